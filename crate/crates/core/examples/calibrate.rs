//! Recovers the firm value and firm volatility implied by the stock price and
//! stock volatility, then reports the elasticity at the solution.

use uwarrant::{calibrate, CalibrationSettings, FirmCapitalStructure, MarketObservables, StockVolForm};

fn main() -> uwarrant::Result<()> {
    let cap = FirmCapitalStructure::new(50.0, 100.0, 1.0, 50.0)?;
    let mkt = MarketObservables::new(100.0, 0.04, 0.04, 3.0, 0.02)?;

    let r = calibrate(&cap, &mkt, &CalibrationSettings::default())?;
    println!("sigma*   = {:.12}", r.sigma_star);
    println!("V*       = {:.8}", r.v_star);
    println!("f_w      = {:.10}", r.price);
    println!("beta     = {:.10}", r.beta);
    println!("residual = {:.3e} (value), {:.3e} (vol)", r.residual_value, r.residual_vol);
    println!("iterations {} after {} scan points", r.iterations, r.scan_evaluations);

    // The other bracket form cannot be satisfied on these inputs.
    let printed = CalibrationSettings {
        form: StockVolForm::AsPrinted,
        ..CalibrationSettings::default()
    };
    match calibrate(&cap, &mkt, &printed) {
        Ok(r) => println!("as-printed: sigma* = {:.12}", r.sigma_star),
        Err(e) => println!("as-printed: {e}"),
    }
    Ok(())
}

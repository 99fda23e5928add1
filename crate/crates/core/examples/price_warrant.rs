//! Prices the reference warrant: 50 shares at 100, 100 warrants on 1:1 terms,
//! exercise payment 50 in three years, with V and sigma approximated by N S
//! and the stock volatility.

use uwarrant::pricer::quote_warrant;
use uwarrant::{dfw_dv, FirmCapitalStructure, MarketObservables, QuadratureSettings};

fn main() -> uwarrant::Result<()> {
    let cap = FirmCapitalStructure::new(50.0, 100.0, 1.0, 50.0)?;
    let mkt = MarketObservables::new(100.0, 0.04, 0.04, 3.0, 0.02)?;
    let settings = QuadratureSettings::default();

    let v = cap.n_shares() * mkt.stock_price();
    let sigma = mkt.stock_vol();
    let q = quote_warrant(v, sigma, &cap, &mkt, &settings)?;
    println!("f_w      = {:.10}", q.price);
    println!("c        = {:.10}", q.c);
    println!("alpha0   = {:.6e}", q.alpha0);
    println!("discount = {:.10}", q.discount);
    println!("dfw/dV   = {:.10}", dfw_dv(v, sigma, &cap, &mkt, &settings)?);

    // Zero volatility collapses to the discounted intrinsic value.
    let flat = quote_warrant(v, 0.0, &cap, &mkt, &settings)?;
    let forward = v * (mkt.drift() * mkt.horizon()).exp();
    let intrinsic = (forward - cap.n_shares() * cap.j_payment()).max(0.0) * cap.dilution() * mkt.discount();
    println!("sigma=0  : {:.10} vs {:.10}", flat.price, intrinsic);
    Ok(())
}

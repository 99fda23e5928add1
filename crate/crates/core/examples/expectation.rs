//! Expected values as quantile integrals: a normal uncertain variable, a
//! custom quantile, and functionals of the terminal firm value.

use std::f64::consts::PI;

use uwarrant::{
    expected_monotone_functional, expected_value_from_distribution, expected_value_from_quantile,
    GeometricLiuSpec, NormalUncertainVariable, QuadratureSettings, QuantileFunction,
};

fn main() -> uwarrant::Result<()> {
    let settings = QuadratureSettings::default();

    let xi = NormalUncertainVariable::new(1.5, 2.0)?;
    println!("E[N(1.5, 2)] via quantile     = {:.12}", expected_value_from_quantile(&xi, &settings)?);
    println!("E[N(1.5, 2)] via distribution = {:.12}", expected_value_from_distribution(&xi, &settings)?);

    // (alpha / (1 - alpha))^c integrates to pi c / sin(pi c).
    let c = 0.3;
    let q = QuantileFunction::from_logit(move |u: f64| (c * u).exp());
    println!(
        "odds^{c} integral = {:.12}, closed form {:.12}",
        expected_value_from_quantile(&q, &settings)?,
        PI * c / (PI * c).sin()
    );

    let spec = GeometricLiuSpec::new(5000.0, 0.02, 0.04)?;
    let mean = expected_monotone_functional(&spec, 3.0, |v| v, &settings)?;
    let call = expected_monotone_functional(&spec, 3.0, |v| (v - 2500.0).max(0.0), &settings)?;
    println!("E[V_3] = {mean:.8}, E[(V_3 - 2500)^+] = {call:.8}");

    // Past c = 1 the mean is infinite and is reported as such.
    let wild = GeometricLiuSpec::new(5000.0, 0.02, 0.7)?;
    match wild.expected_value(3.0, &settings) {
        Ok(v) => println!("unexpected finite mean {v}"),
        Err(e) => println!("sigma = 0.7: {e}"),
    }
    Ok(())
}

//! A user-supplied uncertain differential equation with time-varying drift,
//! solved level by level and integrated for its expected terminal value.

use uwarrant::alpha_path::uniform_levels;
use uwarrant::{
    expected_monotone_functional, AlphaPathFamily, NumericUde, QuadratureSettings, UdeSpec,
};

fn main() -> uwarrant::Result<()> {
    // dX = (0.05 + 0.02 t) X dt + 0.1 X dC
    let ude = UdeSpec::new(|t: f64, x: f64| (0.05 + 0.02 * t) * x, |_t: f64, x: f64| 0.1 * x);
    let (x0, t_end) = (1.0, 2.0);

    let family = AlphaPathFamily::solve(&ude, x0, t_end, &uniform_levels(9), 1_000)?;
    for p in &family.paths {
        println!("alpha = {:.1}: X_T = {:.10}", p.alpha, p.terminal());
    }

    let source = NumericUde { ude: &ude, x0, steps: 200 };
    let settings = QuadratureSettings { rel_tol: 1e-7, ..QuadratureSettings::default() };
    let mean = expected_monotone_functional(&source, t_end, |x| x, &settings)?;
    println!("E[X_T] = {mean:.10}");
    Ok(())
}

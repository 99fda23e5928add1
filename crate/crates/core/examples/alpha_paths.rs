//! Closed-form and RK4 alpha-paths of the geometric firm-value equation, and
//! the inverse distribution read back off the terminal slice.

use uwarrant::alpha_path::uniform_levels;
use uwarrant::{gbm_alpha_path, AlphaPathFamily, GeometricLiuSpec};

fn main() -> uwarrant::Result<()> {
    let spec = GeometricLiuSpec::new(5000.0, 0.02, 0.04)?;
    let t_end = 3.0;
    let levels = uniform_levels(99);

    let family = AlphaPathFamily::solve(&spec, spec.v0, t_end, &levels, 2_000)?;
    let worst = family
        .paths
        .iter()
        .map(|p| {
            let exact = gbm_alpha_path(&spec, t_end, p.alpha).unwrap();
            ((p.terminal() - exact) / exact).abs()
        })
        .fold(0.0, f64::max);
    println!("max relative RK4 error at t = {t_end}: {worst:.3e}");

    let slice = family.terminal_slice()?;
    for alpha in [0.05, 0.25, 0.5, 0.75, 0.95] {
        println!(
            "alpha = {alpha:4}: interpolated {:.6}, exact {:.6}",
            slice.inverse_distribution_at(alpha)?,
            gbm_alpha_path(&spec, t_end, alpha)?
        );
    }
    Ok(())
}

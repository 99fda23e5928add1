//! Drives the command-line front end in-process against `example.toml`.

use uwarrant::cli::main_with_args;

fn main() {
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/example.toml");
    for extra in [
        &["price", "--approx-v", "--approx-sigma"][..],
        &["calibrate"][..],
        &["alpha-paths", "--approx-v", "--approx-sigma"][..],
        &["expect", "--approx-v", "--approx-sigma", "--format", "csv"][..],
    ] {
        let base = ["uwarrant", "--config", config];
        let code = main_with_args(base.iter().chain(extra).copied());
        println!("exit {code}");
    }
}

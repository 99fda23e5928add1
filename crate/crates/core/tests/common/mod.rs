#![allow(dead_code)]

pub mod oracles;
pub mod properties;

use uwarrant::{FirmCapitalStructure, MarketObservables};

/// 50 shares at 100, 100 warrants on 1:1 terms with J = 50, three years out.
pub fn example_inputs() -> (FirmCapitalStructure, MarketObservables) {
    (
        FirmCapitalStructure::new(50.0, 100.0, 1.0, 50.0).unwrap(),
        MarketObservables::new(100.0, 0.04, 0.04, 3.0, 0.02).unwrap(),
    )
}

pub const EXAMPLE_TOML: &str = include_str!("../../examples/example.toml");

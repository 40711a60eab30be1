//! Describe a synthetic 64x128 window with the dense CS-LBP descriptor under
//! each block normalization scheme.
//!
//! cargo run --example dense

use cslbp::dense::{dense_descriptor, DenseConfig, NormScheme};
use cslbp::synth::figure_windows;

fn main() -> cslbp::Result<()> {
    let window = &figure_windows(1, 3)?[0];
    for norm in NormScheme::ALL {
        let cfg = DenseConfig {
            norm,
            ..DenseConfig::default()
        };
        let d = dense_descriptor(window, &cfg)?;
        let l1: f64 = d.values.iter().sum();
        println!(
            "{:<12} len {}  sum {:>9.4}",
            norm.name(),
            d.values.len(),
            l1
        );
    }
    Ok(())
}

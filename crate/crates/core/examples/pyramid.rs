//! Pyramid edge-energy descriptors for all four pattern variants, with the
//! per-level mass of the CS-LBP one.
//!
//! cargo run --example pyramid

use cslbp::pyramid::{pyramid_descriptor, PyramidConfig, PyramidVariant};
use cslbp::synth::figure_windows;

fn main() -> cslbp::Result<()> {
    let window = &figure_windows(1, 5)?[0];
    for variant in [
        PyramidVariant::CsLbp,
        PyramidVariant::UniformCsLbp,
        PyramidVariant::CsLtp,
        PyramidVariant::UniformCsLtp,
    ] {
        let cfg = PyramidConfig::new(variant);
        let d = pyramid_descriptor(window, &cfg)?;
        println!(
            "{variant:?}: {} values, cells per level {:?}",
            d.values.len(),
            cfg.level_cell_counts()
        );
    }

    let cfg = PyramidConfig::new(PyramidVariant::CsLbp);
    let d = pyramid_descriptor(window, &cfg)?;
    let mut offset = 0;
    for (level, cells) in cfg.level_cell_counts().into_iter().enumerate() {
        let n = cells * cfg.cell_bins();
        let mass: f64 = d.values[offset..offset + n].iter().sum();
        println!("level {level}: mass {mass:.4}");
        offset += n;
    }
    Ok(())
}

//! Compare dense-descriptor configurations by per-window detection rate at
//! a fixed false-positive rate.
//!
//! cargo run --release --example sweep

use cslbp::sweep::{default_grid, sweep_harness, SweepOptions};
use cslbp::synth::{clutter_windows, figure_windows};

fn main() -> cslbp::Result<()> {
    let pos = figure_windows(120, 21)?;
    let neg = clutter_windows(400, 22)?;
    let opts = SweepOptions {
        fpr: 0.02,
        ..SweepOptions::default()
    };
    for row in sweep_harness(&pos, &neg, &default_grid(), &opts)? {
        println!(
            "{:<18} rate {:.3}  ({} test positives, {} test negatives)",
            row.name, row.rate, row.test_positives, row.test_negatives
        );
    }
    Ok(())
}

//! Write the seeded synthetic corpus in the dataset layout expected by the
//! `cslbp` binary: pos/, neg/ and annotations/.
//!
//! cargo run --release --example synthetic_corpus -- out_dir [images] [seed]

use std::path::PathBuf;

use cslbp::eval::load_dataset;
use cslbp::synth::{generate_corpus, write_corpus, SynthConfig};

fn main() -> cslbp::Result<()> {
    let mut args = std::env::args().skip(1);
    let root = PathBuf::from(args.next().unwrap_or_else(|| "synthetic".into()));
    let d = SynthConfig::default();
    let cfg = SynthConfig {
        images: args.next().and_then(|v| v.parse().ok()).unwrap_or(d.images),
        seed: args.next().and_then(|v| v.parse().ok()).unwrap_or(d.seed),
        ..d
    };
    let corpus = generate_corpus(&cfg)?;
    write_corpus(&corpus, &root)?;
    let ds = load_dataset(&root)?;
    let boxes: usize = ds.positives.iter().map(|p| p.boxes.len()).sum();
    println!(
        "{}: {} positive images ({} boxes), {} negative images",
        root.display(),
        ds.positives.len(),
        boxes,
        ds.negatives.len()
    );
    Ok(())
}

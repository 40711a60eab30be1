//! CS-LBP pattern frequencies over a synthetic corpus, with the share of
//! the eight uniform codes.
//!
//! cargo run --release --example distrib

use cslbp::patterns::{pattern_distribution, uniform_mass, PatternConfig, UNIFORM_CS_LBP_CODES};
use cslbp::synth::{generate_corpus, SynthConfig};

fn main() -> cslbp::Result<()> {
    let corpus = generate_corpus(&SynthConfig {
        images: 10,
        ..SynthConfig::default()
    })?;
    let images: Vec<_> = corpus.into_iter().map(|s| s.image).collect();
    let dist = pattern_distribution(&images, &PatternConfig::default())?;
    for (code, p) in dist.iter().enumerate() {
        let mark = if UNIFORM_CS_LBP_CODES.contains(&(code as u32)) {
            "*"
        } else {
            " "
        };
        println!("{code:04b} {mark} {:>6.2}%", 100.0 * p);
    }
    println!("uniform mass {:.2}%", 100.0 * uniform_mass(&dist));
    Ok(())
}

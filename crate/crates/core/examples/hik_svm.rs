//! Train linear and intersection-kernel SVMs on figure vs clutter windows,
//! then compare exact and table-based HIK scoring.
//!
//! cargo run --release --example hik_svm

use cslbp::features::FeatureKind;
use cslbp::svm::{train_svm, KernelKind, TrainOptions};
use cslbp::synth::{clutter_windows, figure_windows};
use cslbp::training::describe_all;

fn main() -> cslbp::Result<()> {
    let feature = FeatureKind::from_name("pyr-cslbp")?;
    let pos = describe_all(&feature, &figure_windows(40, 1)?)?;
    let neg = describe_all(&feature, &clutter_windows(80, 2)?)?;
    let examples: Vec<Vec<f64>> = pos.iter().chain(&neg).cloned().collect();
    let labels: Vec<f64> = (0..examples.len())
        .map(|i| if i < pos.len() { 1.0 } else { -1.0 })
        .collect();

    let test_pos = describe_all(&feature, &figure_windows(20, 11)?)?;
    let test_neg = describe_all(&feature, &clutter_windows(20, 12)?)?;

    for kernel in [KernelKind::Linear, KernelKind::Hik] {
        let trained = train_svm(&examples, &labels, &TrainOptions::new(kernel, 1.0))?;
        let r = &trained.report;
        let mut correct = 0;
        for (x, y) in test_pos
            .iter()
            .map(|x| (x, 1.0))
            .chain(test_neg.iter().map(|x| (x, -1.0)))
        {
            if trained.model.score(x)? * y > 0.0 {
                correct += 1;
            }
        }
        println!(
            "{kernel:?}: {} iterations, converged {}, {} SVs, held-out accuracy {}/{}",
            r.iterations,
            r.converged,
            r.support_vectors,
            correct,
            test_pos.len() + test_neg.len()
        );
        if kernel == KernelKind::Hik {
            let fast = trained.model.build_fast_hik(64)?;
            let worst = test_pos
                .iter()
                .chain(&test_neg)
                .map(|x| Ok((fast.score(x)? - trained.model.hik_score_exact(x)?).abs()))
                .collect::<cslbp::Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            println!("fast HIK tables: largest deviation from exact {worst:.2e}");
        }
    }
    Ok(())
}

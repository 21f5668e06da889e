//! Decompose predictive uncertainty from a handful of weight samples, then
//! from raw Gaussian-logit outputs.
//!
//!     cargo run --example uq_decomposition

use uq_curate::rng::RngStream;
use uq_curate::uq::{hetero_decompose, summarize, PredictiveSample};

fn main() -> uq_curate::Result<()> {
    let cases: [(&str, Vec<[f64; 2]>); 3] = [
        ("members agree, confident", vec![[0.95, 0.05], [0.93, 0.07], [0.96, 0.04]]),
        ("members agree, unsure", vec![[0.5, 0.5], [0.52, 0.48], [0.49, 0.51]]),
        ("members disagree", vec![[0.95, 0.05], [0.05, 0.95], [0.9, 0.1]]),
    ];
    println!("{:<26} {:>8} {:>8} {:>8} {:>9} {:>9}", "samples", "H_total", "E[H]", "MI", "var_epi", "var_ale");
    for (name, probs) in cases {
        let samples: Vec<PredictiveSample> = probs
            .into_iter()
            .map(PredictiveSample::new)
            .collect::<uq_curate::Result<_>>()?;
        let s = summarize(&samples)?;
        println!(
            "{name:<26} {:>8.4} {:>8.4} {:>8.4} {:>9.5} {:>9.5}",
            s.h_total, s.h_expected, s.mutual_information, s.var_epistemic, s.var_aleatoric
        );
    }

    println!("\nGaussian-logit outputs (mu, sigma per member):");
    let mut rng = RngStream::new(0);
    let agree_noisy = hetero_decompose(&[[2.0, 0.0], [2.1, 0.0]], &[[3.0, 3.0], [3.0, 3.0]], 2000, &mut rng)?;
    let disagree_clean = hetero_decompose(&[[4.0, 0.0], [0.0, 4.0]], &[[0.1, 0.1], [0.1, 0.1]], 2000, &mut rng)?;
    println!("  agreeing means, wide sigma : H_ale {:.4}  H_epi {:.4}", agree_noisy.h_ale, agree_noisy.h_epi);
    println!("  split means, narrow sigma  : H_ale {:.4}  H_epi {:.4}", disagree_clean.h_ale, disagree_clean.h_epi);
    Ok(())
}

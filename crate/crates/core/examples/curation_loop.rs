//! One pool-based curation run per selector on a small synthetic pool.
//!
//!     cargo run --release --example curation_loop

use uq_curate::curation::{curation_loop, curves_to_csv, LoopConfig, NAle, Selector};
use uq_curate::data::{generate_synthetic, SyntheticSpec};
use uq_curate::model::{Head, ModelConfig};
use uq_curate::pipeline::{UncertaintySource, UqMethod, UqSetup};

fn main() -> uq_curate::Result<()> {
    let data = generate_synthetic(&SyntheticSpec {
        n_instances: 600,
        seed: 3,
        ..SyntheticSpec::default()
    })?;
    let mut model = ModelConfig::new(data.feature_dim(), Head::Homoscedastic);
    model.hidden_width = 32;
    let mut uq = UqSetup::new(UqMethod::Ensemble, model);
    uq.ensemble_size = 3;
    let cfg = LoopConfig {
        seed_fraction: 0.2,
        pool_fraction: 0.6,
        tranche_fraction: 0.2,
        val_fraction: 0.1,
        max_rounds: None,
        n_ale: NAle::default(),
        source: UncertaintySource::Auto,
        uq,
    };
    let mut results = Vec::new();
    for selector in Selector::ALL {
        let res = curation_loop(&data, selector, &cfg, 5)?;
        let noisy = res.noisy_fraction_of_first(&data, res.tranches[0].len());
        println!(
            "{selector:>6}: first tranche noisy share {:.2} (pool {:.2})",
            noisy.unwrap_or(f64::NAN),
            res.pool_noisy_fraction.unwrap_or(f64::NAN)
        );
        results.push(res);
    }
    print!("{}", curves_to_csv(&results));
    Ok(())
}

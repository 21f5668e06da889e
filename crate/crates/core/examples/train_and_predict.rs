//! Train a heteroscedastic MLP on synthetic data and compare the vanilla,
//! MC-dropout and ensemble predictors on the test split.
//!
//!     cargo run --release --example train_and_predict

use uq_curate::data::{generate_synthetic, split, undersample_balance, SplitSpec, SyntheticSpec};
use uq_curate::model::{checkpoint, Head, ModelConfig};
use uq_curate::pipeline::{UqMethod, UqSetup};
use uq_curate::rng::RngStream;

fn main() -> uq_curate::Result<()> {
    let data = generate_synthetic(&SyntheticSpec {
        n_instances: 1000,
        seed: 7,
        ..SyntheticSpec::default()
    })?;
    let parts = split(&data, &SplitSpec { seed: 7, ..SplitSpec::default() })?;
    let train = undersample_balance(&parts.train, &mut RngStream::new(1))?;
    println!(
        "train {} (balanced from {}), val {}, test {}",
        train.len(),
        parts.train.len(),
        parts.val.len(),
        parts.test.len()
    );

    let mut model = ModelConfig::new(data.feature_dim(), Head::Heteroscedastic);
    model.hidden_width = 64;
    for method in UqMethod::ALL {
        let setup = UqSetup::new(method, model.clone());
        let fitted = setup.fit(&train, &parts.val, 42)?;
        let report = fitted.evaluate(&parts.test, &mut RngStream::new(3))?;
        println!(
            "{method:>10}: F1 {:.3}  Brier {:.3}  precision {:.3}  recall {:.3}",
            report.f1, report.brier, report.precision, report.recall
        );
    }

    // Checkpoints round-trip bit for bit.
    let single = uq_curate::model::train_model(&model, &train, &parts.val, 42)?;
    let json = checkpoint::model_to_json(&single)?;
    let back = checkpoint::model_from_json(&json)?;
    assert_eq!(single.param_vector(), back.param_vector());
    println!(
        "checkpoint: {} bytes, {} epochs of history",
        json.len(),
        back.history().len()
    );
    Ok(())
}

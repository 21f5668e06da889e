use uq_curate::data::{generate_synthetic, split, Dataset, Instance, SplitSpec, SyntheticSpec};
use uq_curate::model::{
    checkpoint, predict_mc_dropout, predict_vanilla, train_model, Ensemble, Head, ModelConfig,
};
use uq_curate::pipeline::{FittedUq, UqMethod, UqSetup};
use uq_curate::rng::RngStream;
use uq_curate::{uq, Error};

fn separable(seed: u64) -> Dataset {
    generate_synthetic(&SyntheticSpec {
        n_instances: 600,
        feature_dim: 8,
        separation: 10.0,
        imbalance: 1.0,
        noisy_fraction: 0.0,
        seed,
        ..SyntheticSpec::default()
    })
    .unwrap()
}

fn small(head: Head) -> ModelConfig {
    let mut cfg = ModelConfig::new(8, head);
    cfg.hidden_width = 16;
    cfg.max_epochs = 40;
    cfg
}

#[test]
fn separable_blobs_are_learned_by_both_heads() {
    let ds = separable(1);
    let parts = split(&ds, &SplitSpec::default()).unwrap();
    for head in [Head::Homoscedastic, Head::Heteroscedastic] {
        let fitted = UqSetup::new(UqMethod::Vanilla, small(head)).fit(&parts.train, &parts.val, 3).unwrap();
        let report = fitted.evaluate(&parts.test, &mut RngStream::new(0)).unwrap();
        assert!(report.f1 >= 0.99, "{head}: F1 {}", report.f1);
    }
}

#[test]
fn training_is_bit_reproducible() {
    let ds = separable(2);
    let parts = split(&ds, &SplitSpec::default()).unwrap();
    let cfg = small(Head::Heteroscedastic);
    let a = train_model(&cfg, &parts.train, &parts.val, 9).unwrap();
    let b = train_model(&cfg, &parts.train, &parts.val, 9).unwrap();
    let c = train_model(&cfg, &parts.train, &parts.val, 10).unwrap();
    assert_eq!(a.param_vector(), b.param_vector());
    assert_eq!(a.history(), b.history());
    assert_ne!(a.param_vector(), c.param_vector());
}

#[test]
fn checkpoint_round_trip_preserves_predictions() {
    let ds = separable(3);
    let parts = split(&ds, &SplitSpec::default()).unwrap();
    let model = train_model(&small(Head::Heteroscedastic), &parts.train, &parts.val, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    checkpoint::save_model(&model, &path).unwrap();
    let back = checkpoint::load_model(&path).unwrap();
    let x = parts.test.features();
    let p1 = predict_vanilla(&model, &x, &mut RngStream::new(4)).unwrap();
    let p2 = predict_vanilla(&back, &x, &mut RngStream::new(4)).unwrap();
    assert_eq!(p1, p2);

    let ens = Ensemble::train(&small(Head::Homoscedastic), &parts.train, &parts.val, &[1, 2]).unwrap();
    let epath = dir.path().join("e.json");
    checkpoint::save_ensemble(&ens, &epath).unwrap();
    let eback = checkpoint::load_ensemble(&epath).unwrap();
    for (m, n) in ens.members().iter().zip(eback.members()) {
        assert_eq!(m.param_vector(), n.param_vector());
    }
}

#[test]
fn corrupt_checkpoint_is_rejected() {
    assert!(checkpoint::model_from_json("{\"format\":\"something-else\"}").is_err());
    assert!(checkpoint::model_from_json("not json").is_err());
}

#[test]
fn mc_dropout_passes_vary_and_zero_dropout_does_not() {
    let ds = generate_synthetic(&SyntheticSpec {
        n_instances: 300,
        feature_dim: 8,
        seed: 5,
        ..SyntheticSpec::default()
    })
    .unwrap();
    let parts = split(&ds, &SplitSpec::default()).unwrap();
    let model = train_model(&small(Head::Homoscedastic), &parts.train, &parts.val, 2).unwrap();
    let x = parts.test.features();
    let samples = predict_mc_dropout(&model, &x, 20, &mut RngStream::new(1)).unwrap();
    let var: f64 = samples
        .iter()
        .map(|s| uq::total_variance_decompose(s).unwrap().epistemic)
        .sum();
    assert!(var > 0.0);
    assert!(matches!(
        predict_mc_dropout(&model, &x, 0, &mut RngStream::new(1)),
        Err(Error::Config(_))
    ));

    let mut cfg = small(Head::Homoscedastic);
    cfg.dropout = 0.0;
    let det = train_model(&cfg, &parts.train, &parts.val, 2).unwrap();
    let samples = predict_mc_dropout(&det, &x, 5, &mut RngStream::new(1)).unwrap();
    assert!(samples.iter().all(|s| s.iter().all(|p| *p == s[0])));
}

#[test]
fn ensembles_need_distinct_seeds_and_members_differ() {
    let ds = separable(6);
    let parts = split(&ds, &SplitSpec::default()).unwrap();
    let cfg = small(Head::Homoscedastic);
    assert!(Ensemble::train(&cfg, &parts.train, &parts.val, &[4, 4]).is_err());
    let ens = Ensemble::train(&cfg, &parts.train, &parts.val, &[4, 5, 6]).unwrap();
    assert_eq!(ens.len(), 3);
    assert_ne!(ens.members()[0].param_vector(), ens.members()[1].param_vector());
    // Member k is exactly the network a single training run with that seed produces.
    let solo = train_model(&cfg, &parts.train, &parts.val, 5).unwrap();
    assert_eq!(solo.param_vector(), ens.members()[1].param_vector());
}

#[test]
fn single_network_methods_share_ensemble_member_zero() {
    let ds = separable(7);
    let parts = split(&ds, &SplitSpec::default()).unwrap();
    let cfg = small(Head::Heteroscedastic);
    let van = UqSetup::new(UqMethod::Vanilla, cfg.clone()).fit(&parts.train, &parts.val, 11).unwrap();
    let mut ens_setup = UqSetup::new(UqMethod::Ensemble, cfg);
    ens_setup.ensemble_size = 2;
    let ens = ens_setup.fit(&parts.train, &parts.val, 11).unwrap();
    match (van, ens) {
        (FittedUq::Single { model, .. }, FittedUq::Ensemble(e)) => {
            assert_eq!(model.param_vector(), e.members()[0].param_vector())
        }
        _ => panic!("unexpected variants"),
    }
}

#[test]
fn hetero_records_need_two_weight_samples() {
    let ds = separable(8);
    let parts = split(&ds, &SplitSpec::default()).unwrap();
    let van = UqSetup::new(UqMethod::Vanilla, small(Head::Heteroscedastic))
        .fit(&parts.train, &parts.val, 1)
        .unwrap();
    let err = van
        .records(&parts.test, uq_curate::pipeline::UncertaintySource::Hetero, &mut RngStream::new(0))
        .unwrap_err();
    assert!(matches!(err, Error::Config(_)));
}

#[test]
fn empty_partitions_and_divergence_are_reported() {
    let ds = separable(9);
    let parts = split(&ds, &SplitSpec::default()).unwrap();
    let empty = parts.val.subset(&[]);
    assert!(matches!(
        train_model(&small(Head::Homoscedastic), &parts.train, &empty, 1),
        Err(Error::Config(_))
    ));

    // Finite but maximal features overflow the first forward pass.
    let huge: Vec<Instance> = parts
        .train
        .instances()
        .iter()
        .map(|i| Instance::new(i.id.clone(), vec![f64::MAX; i.features.len()], i.label))
        .collect();
    let huge = Dataset::new(huge, "huge").unwrap();
    match train_model(&small(Head::Homoscedastic), &huge, &parts.val, 1) {
        Err(Error::Divergence { epoch, .. }) => assert_eq!(epoch, 1),
        other => panic!("expected divergence, got {:?}", other.map(|_| ())),
    }
}

use std::io::BufReader;

use irlv::channel::ChannelParams;
use irlv::dataset::{generate_dataset, split, FeatureStats};
use irlv::eval::{auc, empirical_roc};
use irlv::geometry::{Scenario, StreetScenario};
use irlv::nn::{layer_sizes, train, Mlp, Samples, TrainConfig};
use irlv::shadowing::{FieldMethod, ShadowingField, ShadowingGenerator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

#[test]
fn street_verifier_end_to_end() {
    let s = StreetScenario::paper_default();
    let params = ChannelParams::default();
    let gen = ShadowingGenerator::new(s.bounds(), &params, 5.0, FieldMethod::Auto).unwrap();
    let fields: Vec<_> = (0..s.n_bs() as u64).map(|n| gen.generate(100 + n)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let data = generate_dataset(&s, &fields, &params, 4000, 0.5, &mut rng).unwrap();
    let (train_set, test_set) = split(&data, 0.7).unwrap();
    let stats = FeatureStats::fit(&train_set).unwrap();
    let train_samples = Samples::from_dataset(&stats.apply(&train_set).unwrap());
    let test_samples = Samples::from_dataset(&stats.apply(&test_set).unwrap());
    let net = Mlp::init(&layer_sizes(5, 8, 1), 1).unwrap();
    let cfg = TrainConfig {
        epochs: 50,
        ..TrainConfig::default()
    };
    let (net, ce) = train(&net, &train_samples, &cfg).unwrap();
    assert!(ce < 0.7, "{ce}");
    let roc = empirical_roc(&net.scores(&test_samples).unwrap(), &test_set.labels()).unwrap();
    assert!(auc(&roc) < 0.1, "{}", auc(&roc));

    // Persisted network and fields reproduce the same scores.
    let dir = TempDir::new().unwrap();
    let net_path = dir.path().join("net.txt");
    net.write_text(std::fs::File::create(&net_path).unwrap()).unwrap();
    let back = Mlp::read_text(BufReader::new(std::fs::File::open(&net_path).unwrap())).unwrap();
    assert_eq!(back.scores(&test_samples).unwrap(), net.scores(&test_samples).unwrap());

    for (ext, f) in ["bin", "csv"].iter().zip(&fields) {
        let path = dir.path().join(format!("field.{ext}"));
        f.save(&path).unwrap();
        let g = ShadowingField::load(&path).unwrap();
        assert_eq!(g.values(), f.values());
        assert_eq!(g.grid(), f.grid());
    }
}

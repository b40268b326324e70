//! Acceptance suite. Every test prints one `PASS`/`FAIL` line for its
//! criterion before asserting, so `cargo test --test acceptance -- --nocapture`
//! gives a readable report.

use std::f64::consts::TAU;
use std::sync::OnceLock;
use std::time::Instant;

use irlv::channel::ChannelParams;
use irlv::dataset::{generate_dataset, Dataset, FeatureStats};
use irlv::eval::{auc, c_out, complexity_report, empirical_roc, max_vertical_gap, uniform_grid, OpCount};
use irlv::geometry::{CircularScenario, Scenario, StreetScenario};
use irlv::nn::{backward, ce_loss, layer_sizes, train, Mlp, Samples, TrainConfig};
use irlv::np::{Hypothesis, NpOracle};
use irlv::planner::{plan, ObjectiveKind, PlacementObjective, PsoConfig, PsoResult};
use irlv::seed;
use irlv::shadowing::{exponential_covariance, lag_covariance, FieldMethod, ShadowingGenerator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("criterion {id} [{status}] {name}: {detail}");
}

// Trained verifier on the circular scenario, shared by criteria 1 and 2.
struct Circular {
    oracle: NpOracle,
    net: Mlp,
    stats: FeatureStats,
    test: Dataset,
}

fn circular() -> &'static Circular {
    static CELL: OnceLock<Circular> = OnceLock::new();
    CELL.get_or_init(|| {
        let scenario = CircularScenario::paper_default();
        let params = ChannelParams::default().without_shadowing();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let train_set = generate_dataset(&scenario, &[], &params, 20_000, 0.5, &mut rng).unwrap();
        let test = generate_dataset(&scenario, &[], &params, 10_000, 0.5, &mut rng).unwrap();
        let stats = FeatureStats::fit(&train_set).unwrap();
        let samples = Samples::from_dataset(&stats.apply(&train_set).unwrap());
        let net = Mlp::init(&layer_sizes(1, 8, 1), 7).unwrap();
        let (net, _) = train(&net, &samples, &TrainConfig::default()).unwrap();
        let oracle = NpOracle::new(scenario, params).unwrap();
        Circular {
            oracle,
            net,
            stats,
            test,
        }
    })
}

#[test]
fn criterion_1_np_equivalence() {
    let start = Instant::now();
    let c = circular();
    let test_samples = Samples::from_dataset(&c.stats.apply(&c.test).unwrap());
    let labels = c.test.labels();
    let nn_scores = c.net.scores(&test_samples).unwrap();
    // The test decides outside for small likelihood ratios, so the negated
    // ratio plays the role of a score.
    let np_scores: Vec<f64> = c
        .test
        .samples()
        .iter()
        .map(|s| -c.oracle.llr(s.a[0]).unwrap())
        .collect();
    let nn_roc = empirical_roc(&nn_scores, &labels).unwrap();
    let np_roc = empirical_roc(&np_scores, &labels).unwrap();
    let gap = max_vertical_gap(&nn_roc, &np_roc, &uniform_grid(1001), 0.05, 0.95);
    let elapsed = start.elapsed().as_secs_f64();
    let pass = gap <= 0.05 && elapsed <= 120.0;
    report(
        1,
        "NP equivalence",
        pass,
        &format!(
            "max ROC gap {gap:.4} (limit 0.05), AUC nn {:.4} np {:.4}, {elapsed:.1} s",
            auc(&nn_roc),
            auc(&np_roc)
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_2_posterior_recovery() {
    let start = Instant::now();
    let c = circular();
    let test_samples = Samples::from_dataset(&c.stats.apply(&c.test).unwrap());
    let scores = c.net.scores(&test_samples).unwrap();
    let mae = c
        .test
        .samples()
        .iter()
        .zip(&scores)
        .map(|(s, t)| (t - c.oracle.posterior_h1(s.a[0], 0.5, 0.5).unwrap()).abs())
        .sum::<f64>()
        / scores.len() as f64;
    let elapsed = start.elapsed().as_secs_f64();
    let pass = mae <= 0.05 && elapsed <= 120.0;
    report(
        2,
        "posterior recovery",
        pass,
        &format!("MAE {mae:.4} over {} samples (limit 0.05), {elapsed:.1} s", scores.len()),
    );
    assert!(pass);
}

#[test]
fn criterion_3_gradient_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let inputs = rng.random_range(1..=5);
        let hidden = rng.random_range(1..=6);
        let layers = rng.random_range(1..=3);
        let net = Mlp::init(&layer_sizes(inputs, hidden, layers), k).unwrap();
        let n = 16;
        let x: Vec<f64> = (0..inputs * n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let t: Vec<f64> = (0..n).map(|i| (i % 2) as f64).collect();
        let batch = Samples::new(inputs, x, t.clone()).unwrap();
        let analytic = backward(&net, &batch).unwrap().flatten();
        let params = net.params();
        let h = 1e-5;
        for (i, g) in analytic.iter().enumerate() {
            let loss = |delta: f64| {
                let mut p = params.clone();
                p[i] += delta;
                let mut m = net.clone();
                m.set_params(&p).unwrap();
                ce_loss(&m.scores(&batch).unwrap(), &t).unwrap()
            };
            let numeric = (loss(h) - loss(-h)) / (2.0 * h);
            let rel = (g - numeric).abs() / g.abs().max(numeric.abs()).max(1e-3);
            worst = worst.max(rel);
        }
    }
    let pass = worst < 1e-5;
    report(
        3,
        "gradient correctness",
        pass,
        &format!("worst relative error {worst:.2e} on 20 networks (limit 1e-5)"),
    );
    assert!(pass);
}

#[test]
fn criterion_4_shadowing_covariance() {
    let start = Instant::now();
    let params = ChannelParams::default();
    let spacing = 2.5;
    let bounds = StreetScenario::paper_default().bounds();
    let gen = ShadowingGenerator::new(bounds, &params, spacing, FieldMethod::Circulant).unwrap();
    let fields: Vec<_> = (0..500).map(|s| gen.generate(seed::derive(4, s))).collect();
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for lag in [37.5, 75.0, 150.0] {
        let nodes = (lag / spacing).round() as usize;
        let theory = exponential_covariance(lag, 8.0, 75.0);
        let emp = lag_covariance(&fields, nodes);
        let rel = (emp - theory).abs() / theory;
        worst = worst.max(rel);
        detail.push(format!("{lag} m: {emp:.2} vs {theory:.2}"));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst <= 0.1 && elapsed <= 300.0;
    report(
        4,
        "shadowing covariance",
        pass,
        &format!(
            "{}; worst relative deviation {:.1}% (limit 10%), 500 fields, {elapsed:.1} s",
            detail.join(", "),
            100.0 * worst
        ),
    );
    assert!(pass);
}

fn street_fields(seed: u64) -> Vec<irlv::shadowing::ShadowingField> {
    let s = StreetScenario::paper_default();
    let gen = ShadowingGenerator::new(s.bounds(), &ChannelParams::default(), 5.0, FieldMethod::Auto)
        .unwrap();
    (0..s.n_bs() as u64).map(|n| gen.generate(seed::derive(seed, n))).collect()
}

#[test]
fn criterion_5_monotone_trends() {
    let start = Instant::now();
    let s = StreetScenario::paper_default();
    let params = ChannelParams::default();
    let sizes = [1_000usize, 10_000, 20_000];
    let hidden = [2usize, 8];
    let seeds = 5u64;
    // mean[h][k]: mean AUC for hidden[h] and sizes[k].
    let mut mean = [[0.0; 3]; 2];
    for sd in 0..seeds {
        let fields = street_fields(seed::derive(5, sd));
        for (h, &nh) in hidden.iter().enumerate() {
            for (k, &size) in sizes.iter().enumerate() {
                let mut o = PlacementObjective::new(&s, &fields, params, size);
                o.hidden = nh;
                o.data_seed = seed::derive(50, sd);
                o.init_seed = seed::derive(51, sd);
                o.train.seed = seed::derive(52, sd);
                mean[h][k] += o.score(s.bs_positions()).unwrap().auc / seeds as f64;
            }
        }
    }
    let margin = 0.02;
    let mut pass = true;
    for row in &mean {
        for w in row.windows(2) {
            pass &= w[1] <= w[0] + margin;
        }
    }
    for k in 0..sizes.len() {
        pass &= mean[1][k] <= mean[0][k] + margin;
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed <= 1800.0;
    let fmt = |row: &[f64; 3]| {
        row.iter()
            .map(|v| format!("{v:.4}"))
            .collect::<Vec<_>>()
            .join("/")
    };
    report(
        5,
        "monotone trends",
        pass,
        &format!(
            "mean AUC for S=1e3/1e4/2e4: N_h=2 {}, N_h=8 {}; margin 0.02, {seeds} seeds, {elapsed:.1} s",
            fmt(&mean[0]),
            fmt(&mean[1])
        ),
    );
    assert!(pass);
}

// Placement runs shared by criteria 6 and 7, keyed by (train size, seed).
struct Runs {
    size: usize,
    seconds: f64,
    ce: Vec<(PsoResult, f64)>,
    auc: Vec<(PsoResult, f64)>,
}

const PROXY_SEEDS: u64 = 5;

fn proxy_objective<'a>(
    s: &'a StreetScenario,
    fields: &'a [irlv::shadowing::ShadowingField],
    size: usize,
    sd: u64,
) -> PlacementObjective<'a, StreetScenario> {
    let mut o = PlacementObjective::new(s, fields, ChannelParams::default(), size);
    o.train.epochs = 50;
    o.data_seed = seed::derive(70, sd);
    o.init_seed = seed::derive(71, sd);
    o.train.seed = seed::derive(72, sd);
    o
}

fn proxy_config(sd: u64) -> PsoConfig {
    PsoConfig {
        seed: seed::derive(73, sd),
        ..PsoConfig::default()
    }
}

fn proxy_runs(size: usize) -> Runs {
    let start = Instant::now();
    let s = StreetScenario::paper_default();
    let mut runs = Runs {
        size,
        seconds: 0.0,
        ce: Vec::new(),
        auc: Vec::new(),
    };
    for sd in 0..PROXY_SEEDS {
        let fields = street_fields(seed::derive(7, sd));
        let o = proxy_objective(&s, &fields, size, sd);
        for kind in [ObjectiveKind::CrossEntropy, ObjectiveKind::Auc] {
            let r = plan(&o, kind, &proxy_config(sd)).unwrap();
            let final_auc = o.score(&r.best_position).unwrap().auc;
            match kind {
                ObjectiveKind::CrossEntropy => runs.ce.push((r, final_auc)),
                ObjectiveKind::Auc => runs.auc.push((r, final_auc)),
            }
        }
    }
    runs.seconds = start.elapsed().as_secs_f64();
    runs
}

fn large_runs() -> &'static Runs {
    static CELL: OnceLock<Runs> = OnceLock::new();
    CELL.get_or_init(|| proxy_runs(20_000))
}

fn small_runs() -> &'static Runs {
    static CELL: OnceLock<Runs> = OnceLock::new();
    CELL.get_or_init(|| proxy_runs(1_000))
}

#[test]
fn criterion_6_pso_bookkeeping() {
    let mut monotone = true;
    let mut count = 0;
    for runs in [small_runs(), large_runs()] {
        for (r, _) in runs.ce.iter().chain(&runs.auc) {
            monotone &= r.history.windows(2).all(|w| w[1] <= w[0]);
            count += 1;
        }
    }
    // Rerun one full placement search from scratch and compare everything.
    let s = StreetScenario::paper_default();
    let fields = street_fields(seed::derive(7, 0));
    let o = proxy_objective(&s, &fields, 1_000, 0);
    let again = plan(&o, ObjectiveKind::Auc, &proxy_config(0)).unwrap();
    let reproducible = again == small_runs().auc[0].0
        && again.best_value.to_bits() == small_runs().auc[0].0.best_value.to_bits();
    let pass = monotone && reproducible;
    report(
        6,
        "PSO bookkeeping",
        pass,
        &format!("global best monotone in {count} runs: {monotone}, bit-identical rerun: {reproducible}"),
    );
    assert!(pass);
}

#[test]
fn criterion_7_ce_as_proxy() {
    let mean = |v: &[(PsoResult, f64)]| v.iter().map(|r| r.1).sum::<f64>() / v.len() as f64;
    let large = large_runs();
    let gap = (mean(&large.ce) - mean(&large.auc)).abs();
    let small = small_runs();
    let small_gap = (mean(&small.ce) - mean(&small.auc)).abs();
    let elapsed = large.seconds + small.seconds;
    let pass = gap <= 0.05 && elapsed <= 3600.0;
    let iters: usize = large.ce.iter().chain(&large.auc).map(|r| r.0.iterations).sum();
    report(
        7,
        "CE as proxy",
        pass,
        &format!(
            "S={}: mean AUC CE-run {:.4}, AUC-run {:.4}, gap {gap:.4} (limit 0.05); \
             S={} (report only): CE-run {:.4}, AUC-run {:.4}, gap {small_gap:.4}; \
             {PROXY_SEEDS} seeds, {iters} iterations, {elapsed:.1} s",
            large.size,
            mean(&large.ce),
            mean(&large.auc),
            small.size,
            mean(&small.ce),
            mean(&small.auc),
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_8_oracle_normalization() {
    let o = NpOracle::new(CircularScenario::paper_default(), ChannelParams::default()).unwrap();
    let s = o.scenario();
    let n = 8000;
    let h = s.r_out() / n as f64;
    let mid = |i: usize| (i as f64 + 0.5) * h;
    let m0: f64 = (0..n).map(|i| o.pdf_r(mid(i), Hypothesis::H0) * h).sum();
    let m1: f64 = (0..n).map(|i| o.pdf_r(mid(i), Hypothesis::H1) * h).sum();
    let area: f64 = (0..n).map(|i| mid(i) * o.alpha(mid(i)) * h).sum();
    let area_rel = (area - s.roi_area()).abs() / s.roi_area();
    // The outside density integrates the complement angle over the disk.
    let outside: f64 = (0..n).map(|i| mid(i) * (TAU - o.alpha(mid(i))) * h).sum();
    let outside_rel = (outside - s.outside_area()).abs() / s.outside_area();
    let pass = (m0 - 1.0).abs() <= 1e-3
        && (m1 - 1.0).abs() <= 1e-3
        && area_rel <= 0.005
        && outside_rel <= 0.005;
    report(
        8,
        "oracle normalization",
        pass,
        &format!(
            "mass H0 {m0:.6}, H1 {m1:.6} (tol 1e-3); area identity {:.3}% / {:.3}% (tol 0.5%)",
            100.0 * area_rel,
            100.0 * outside_rel
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_9_complexity_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut pass = true;
    for _ in 0..10 {
        let (n_ap, n_h, n_l, tau, p) = (
            rng.random_range(1..=20u64),
            rng.random_range(1..=64u64),
            rng.random_range(1..=4u64),
            rng.random_range(1..=100_000u64),
            rng.random_range(1..=20u64),
        );
        // Layer by layer: input layer, N_L hidden-to-hidden blocks, output.
        let mut per_sample = 0u64;
        per_sample += 2 * n_ap * n_h;
        for _ in 0..n_l {
            per_sample += 2 * n_h * n_h;
        }
        per_sample += 2 * n_h;
        let ops = OpCount {
            roc: rng.random_range(0..1_000_000),
            auc: rng.random_range(0..1_000_000),
        };
        let r = complexity_report(n_ap, n_h, n_l, tau, p, ops);
        pass &= r.c_out == per_sample * tau
            && c_out(n_ap, n_h, n_l, tau) == r.c_out
            && r.c_test == p * (per_sample * tau + ops.roc + ops.auc);
    }
    report(9, "complexity formula", pass, "exact integer equality on 10 random tuples");
    assert!(pass);
}

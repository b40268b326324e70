//! The four experiments. Each returns its output files in memory; the caller
//! writes them and the manifest.

use irlv::dataset::{generate_dataset, FeatureStats};
use irlv::eval::{auc, average_roc, empirical_roc, max_vertical_gap, uniform_grid, RocCurve};
use irlv::geometry::{Position, Scenario, StreetScenario};
use irlv::nn::{layer_sizes, train, Mlp, Samples};
use irlv::np::{theta_grid, theta_sweep, NpOracle};
use irlv::planner::{plan, ObjectiveKind, PlacementObjective, PsoResult};
use irlv::seed::derive;
use irlv::shadowing::{exponential_covariance, lag_covariance, FieldMethod, ShadowingField, ShadowingGenerator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{objective_name, RunConfig, SeedSection};
use crate::CliError;

/// Quadrature intervals of the exact Neyman-Pearson ROC.
const EXACT_ROC_INTERVALS: usize = 8000;

/// One output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct Context {
    pub cfg: RunConfig,
    pub seed_offset: u64,
    pub seeds: SeedSection,
}

impl Context {
    pub fn new(cfg: RunConfig, seed_offset: u64) -> Self {
        let seeds = cfg.seeds.offset(seed_offset);
        Self {
            cfg,
            seed_offset,
            seeds,
        }
    }

    fn generator(&self, scenario: &StreetScenario) -> Result<ShadowingGenerator, CliError> {
        Ok(ShadowingGenerator::new(
            scenario.bounds(),
            &self.cfg.channel(),
            self.cfg.channel.field_spacing_m,
            FieldMethod::Auto,
        )?)
    }

    /// Per-base-station fields of shadowing realization `k`.
    fn fields(&self, gen: &ShadowingGenerator, n_bs: usize, k: u64) -> Vec<ShadowingField> {
        let base = derive(self.seeds.field, k);
        (0..n_bs as u64).map(|b| gen.generate(derive(base, b))).collect()
    }

    fn objective<'a>(
        &self,
        scenario: &'a StreetScenario,
        fields: &'a [ShadowingField],
        train_size: usize,
        hidden: usize,
        k: u64,
    ) -> PlacementObjective<'a, StreetScenario> {
        let cfg = &self.cfg;
        let mut o = PlacementObjective::new(scenario, fields, cfg.channel(), train_size);
        o.hidden = hidden;
        o.hidden_layers = cfg.nn.hidden_layers;
        o.train = cfg.train_config(derive(self.seeds.init, 2 * k + 1));
        o.p0 = cfg.dataset.p0;
        o.train_frac = cfg.dataset.train_frac;
        o.data_seed = derive(self.seeds.dataset, k);
        o.init_seed = derive(self.seeds.init, 2 * k);
        o
    }
}

fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>, CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Core(irlv::Error::Csv(e));
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row).map_err(err)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))
}

fn curve_artifact(name: String, roc: &RocCurve, grid: &[f64]) -> Result<Artifact, CliError> {
    let bytes = csv_bytes(
        &["p_fa", "p_md"],
        roc.resample(grid)
            .into_iter()
            .map(|(x, y)| vec![x.to_string(), y.to_string()]),
    )?;
    Ok(Artifact { name, bytes })
}

/// Sweeps hidden-layer widths and training-set sizes on the street map with
/// the configured base stations.
pub fn cmd_roc(ctx: &Context) -> Result<Vec<Artifact>, CliError> {
    let cfg = &ctx.cfg;
    let scenario = cfg.street()?;
    let gen = ctx.generator(&scenario)?;
    let grid = uniform_grid(cfg.eval.grid_points);
    let seeds = cfg.eval.shadowing_seeds;
    let all_fields: Vec<Vec<ShadowingField>> = (0..seeds)
        .into_par_iter()
        .map(|k| ctx.fields(&gen, scenario.n_bs(), k))
        .collect();
    let mut jobs = Vec::new();
    for &nh in &cfg.nn.hidden {
        for &size in &cfg.dataset.train_sizes {
            for k in 0..seeds {
                jobs.push((nh, size, k));
            }
        }
    }
    let results: Vec<(RocCurve, f64, f64)> = jobs
        .par_iter()
        .map(|&(nh, size, k)| {
            let fields = &all_fields[k as usize];
            let o = ctx.objective(&scenario, fields, size, nh, k);
            let e = o.evaluate(scenario.bs_positions())?;
            Ok((e.roc, e.score.auc, e.score.cross_entropy))
        })
        .collect::<Result<_, CliError>>()?;

    let mut artifacts = Vec::new();
    let mut summary = Vec::new();
    for (chunk, (nh, size, _)) in results.chunks(seeds as usize).zip(jobs.iter().step_by(seeds as usize)) {
        let tag = format!("nh{nh}_s{size}");
        for (k, (roc, a, ce)) in chunk.iter().enumerate() {
            artifacts.push(curve_artifact(format!("roc_{tag}_seed{k}.csv"), roc, &grid)?);
            summary.push(vec![nh.to_string(), size.to_string(), k.to_string(), a.to_string(), ce.to_string()]);
        }
        let curves: Vec<RocCurve> = chunk.iter().map(|r| r.0.clone()).collect();
        let mean = average_roc(&curves, &grid)?;
        artifacts.push(curve_artifact(format!("roc_{tag}_mean.csv"), &mean, &grid)?);
        let n = chunk.len() as f64;
        let mean_auc = chunk.iter().map(|r| r.1).sum::<f64>() / n;
        let mean_ce = chunk.iter().map(|r| r.2).sum::<f64>() / n;
        summary.push(vec![
            nh.to_string(),
            size.to_string(),
            "mean".into(),
            mean_auc.to_string(),
            mean_ce.to_string(),
        ]);
    }
    artifacts.push(Artifact {
        name: "roc_summary.csv".into(),
        bytes: csv_bytes(&["hidden", "train_size", "seed", "auc", "cross_entropy"], summary)?,
    });
    Ok(artifacts)
}

/// Trains a verifier on the circular map and compares it with the
/// Neyman-Pearson test on the same test samples.
pub fn cmd_np_compare(ctx: &Context) -> Result<Vec<Artifact>, CliError> {
    let cfg = &ctx.cfg;
    let scenario = cfg.circular()?;
    let params = cfg.channel().without_shadowing();
    let np = &cfg.np;
    let mut rng = ChaCha8Rng::seed_from_u64(derive(ctx.seeds.dataset, 0));
    let train_set = generate_dataset(&scenario, &[], &params, np.train_size, cfg.dataset.p0, &mut rng)?;
    let test_set = generate_dataset(&scenario, &[], &params, np.test_size, cfg.dataset.p0, &mut rng)?;
    let stats = FeatureStats::fit(&train_set)?;
    let net = Mlp::init(&layer_sizes(1, np.hidden, cfg.nn.hidden_layers), derive(ctx.seeds.init, 0))?;
    let (net, ce) = train(
        &net,
        &Samples::from_dataset(&stats.apply(&train_set)?),
        &cfg.train_config(derive(ctx.seeds.init, 1)),
    )?;
    let labels = test_set.labels();
    let nn_scores = net.scores(&Samples::from_dataset(&stats.apply(&test_set)?))?;
    let oracle = NpOracle::new(scenario.clone(), params)?;
    let llrs: Vec<f64> = test_set
        .samples()
        .iter()
        .map(|s| oracle.llr(s.a[0]))
        .collect::<Result<_, _>>()?;
    let np_scores: Vec<f64> = llrs.iter().map(|l| -l).collect();
    let nn_roc = empirical_roc(&nn_scores, &labels)?;
    let np_roc = empirical_roc(&np_scores, &labels)?;
    let exact = oracle.roc_exact(EXACT_ROC_INTERVALS)?;

    let (h0, h1): (Vec<_>, Vec<_>) = llrs.iter().zip(&labels).partition(|(_, &t)| t == 0);
    let h0: Vec<f64> = h0.into_iter().map(|(l, _)| *l).collect();
    let h1: Vec<f64> = h1.into_iter().map(|(l, _)| *l).collect();
    let thetas = theta_grid(np.theta_min_bits, np.theta_max_bits, np.theta_points);
    let sweep = theta_sweep(&h0, &h1, &thetas);

    let grid = uniform_grid(cfg.eval.grid_points);
    let gap = max_vertical_gap(&nn_roc, &np_roc, &grid, 0.05, 0.95);
    let gap_exact = max_vertical_gap(&nn_roc, &exact, &grid, 0.05, 0.95);
    let roi = scenario.roi();
    let summary = [
        ("r_out_m", scenario.r_out()),
        ("roi_width_m", roi.width()),
        ("roi_height_m", roi.height()),
        ("r_min_m", scenario.r_min()),
        ("r_max_m", scenario.r_max()),
        ("train_cross_entropy_bits", ce),
        ("auc_nn", auc(&nn_roc)),
        ("auc_np", auc(&np_roc)),
        ("auc_np_exact", auc(&exact)),
        ("max_gap_nn_np", gap),
        ("max_gap_nn_np_exact", gap_exact),
    ];
    Ok(vec![
        curve_artifact("roc_nn.csv".into(), &nn_roc, &grid)?,
        curve_artifact("roc_np.csv".into(), &np_roc, &grid)?,
        curve_artifact("roc_np_exact.csv".into(), &exact, &grid)?,
        Artifact {
            name: "np_theta_sweep.csv".into(),
            bytes: csv_bytes(
                &["theta", "log2_theta", "p_fa", "p_md"],
                sweep.iter().map(|(t, fa, md)| {
                    vec![t.to_string(), t.log2().to_string(), fa.to_string(), md.to_string()]
                }),
            )?,
        },
        Artifact {
            name: "np_summary.csv".into(),
            bytes: csv_bytes(
                &["key", "value"],
                summary.iter().map(|(k, v)| vec![k.to_string(), v.to_string()]),
            )?,
        },
    ])
}

/// Test AUC of the global best placement after every iteration.
fn auc_history(o: &PlacementObjective<'_, StreetScenario>, r: &PsoResult) -> Result<Vec<f64>, CliError> {
    let mut out: Vec<f64> = Vec::with_capacity(r.best_history.len());
    for (i, bs) in r.best_history.iter().enumerate() {
        if i > 0 && r.best_history[i - 1] == *bs {
            let prev = out[i - 1];
            out.push(prev);
        } else {
            out.push(o.score(bs)?.auc);
        }
    }
    Ok(out)
}

/// Runs the placement search for every configured objective and shadowing
/// realization.
pub fn cmd_plan(ctx: &Context) -> Result<Vec<Artifact>, CliError> {
    let cfg = &ctx.cfg;
    let scenario = cfg.street()?;
    let gen = ctx.generator(&scenario)?;
    let objectives = cfg.objectives()?;
    let seeds = cfg.eval.shadowing_seeds;
    let jobs: Vec<(ObjectiveKind, u64)> = objectives
        .iter()
        .flat_map(|&o| (0..seeds).map(move |k| (o, k)))
        .collect();
    let results: Vec<(PsoResult, Vec<f64>)> = jobs
        .par_iter()
        .map(|&(kind, k)| {
            let fields = ctx.fields(&gen, scenario.n_bs(), k);
            let o = ctx.objective(&scenario, &fields, cfg.pso.train_size, cfg.pso.hidden, k);
            let r = plan(&o, kind, &cfg.pso_config(derive(ctx.seeds.pso, k)))?;
            let aucs = auc_history(&o, &r)?;
            Ok((r, aucs))
        })
        .collect::<Result<_, CliError>>()?;

    let mut artifacts = Vec::new();
    for ((kind, k), (r, aucs)) in jobs.iter().zip(&results) {
        let name = objective_name(*kind);
        artifacts.push(Artifact {
            name: format!("plan_{name}_seed{k}.csv"),
            bytes: csv_bytes(
                &["iteration", "best_value", "best_auc"],
                r.history
                    .iter()
                    .zip(aucs)
                    .enumerate()
                    .map(|(i, (v, a))| vec![i.to_string(), v.to_string(), a.to_string()]),
            )?,
        });
        artifacts.push(Artifact {
            name: format!("plan_{name}_seed{k}_placement.csv"),
            bytes: csv_bytes(
                &["bs", "x", "y"],
                r.best_position
                    .iter()
                    .enumerate()
                    .map(|(b, p): (usize, &Position)| vec![b.to_string(), p.x.to_string(), p.y.to_string()]),
            )?,
        });
    }

    // Runs stop at different iterations; after stopping a run keeps its
    // final value on the common grid.
    let len = results.iter().map(|r| r.1.len()).max().unwrap_or(0);
    let at = |v: &[f64], i: usize| v[i.min(v.len() - 1)];
    let mut means = Vec::new();
    for (o, kind) in objectives.iter().enumerate() {
        let runs = &results[o * seeds as usize..(o + 1) * seeds as usize];
        let mean: Vec<f64> = (0..len)
            .map(|i| runs.iter().map(|r| at(&r.1, i)).sum::<f64>() / seeds as f64)
            .collect();
        means.push((*kind, mean));
    }
    let mut header = vec!["iteration".to_string()];
    header.extend(means.iter().map(|(k, _)| format!("mean_auc_{}", objective_name(*k))));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    artifacts.push(Artifact {
        name: "plan_mean_auc.csv".into(),
        bytes: csv_bytes(
            &header_refs,
            (0..len).map(|i| {
                let mut row = vec![i.to_string()];
                row.extend(means.iter().map(|(_, m)| m[i].to_string()));
                row
            }),
        )?,
    });
    artifacts.push(Artifact {
        name: "plan_summary.csv".into(),
        bytes: csv_bytes(
            &["objective", "train_size", "initial_mean_auc", "final_mean_auc", "note"],
            means.iter().map(|(kind, m)| {
                let (first, last) = (m[0], m[m.len() - 1]);
                let note = if *kind == ObjectiveKind::CrossEntropy && last > first {
                    "below proxy-validity size"
                } else {
                    ""
                };
                vec![
                    objective_name(*kind).to_string(),
                    cfg.pso.train_size.to_string(),
                    first.to_string(),
                    last.to_string(),
                    note.to_string(),
                ]
            }),
        )?,
    });
    Ok(artifacts)
}

/// Draws shadowing realizations on the street map, exports some of them and
/// compares the empirical covariance with the exponential model.
pub fn cmd_field(ctx: &Context) -> Result<Vec<Artifact>, CliError> {
    let cfg = &ctx.cfg;
    let scenario = cfg.street()?;
    let gen = ctx.generator(&scenario)?;
    let params = cfg.channel();
    let spacing = cfg.channel.field_spacing_m;
    let dc = params.d_c_m;
    let targets = [0.5 * dc, dc, 2.0 * dc];
    let lags: Vec<usize> = targets.iter().map(|l| (l / spacing).round().max(1.0) as usize).collect();

    // Realization k is the field of the first base station in the other
    // subcommands.
    let field_seed = |k: u64| derive(derive(ctx.seeds.field, k), 0);
    let n = cfg.field.realizations;
    let sums: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| {
            let f = gen.generate(field_seed(k));
            lags.iter().map(|&l| lag_covariance(std::slice::from_ref(&f), l)).collect::<Vec<_>>()
        })
        .reduce(
            || vec![0.0; lags.len()],
            |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
        );

    let mut artifacts = Vec::new();
    for k in 0..cfg.field.export {
        let f = gen.generate(field_seed(k));
        let mut bytes = Vec::new();
        let name = if cfg.field.format == "csv" {
            f.write_csv(&mut bytes)?;
            format!("field_seed{k}.csv")
        } else {
            f.write_binary(&mut bytes)?;
            format!("field_seed{k}.bin")
        };
        artifacts.push(Artifact { name, bytes });
    }

    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for ((target, &l), sum) in targets.iter().zip(&lags).zip(&sums) {
        let lag = l as f64 * spacing;
        let theory = exponential_covariance(lag, params.sigma_s_db, dc);
        let emp = if n > 0 { sum / n as f64 } else { f64::NAN };
        let dev = if theory > 0.0 { (emp - theory).abs() / theory } else { f64::NAN };
        if n > 0 {
            worst = worst.max(dev);
        }
        rows.push(vec![
            target.to_string(),
            lag.to_string(),
            l.to_string(),
            emp.to_string(),
            theory.to_string(),
            dev.to_string(),
        ]);
    }
    artifacts.push(Artifact {
        name: "field_covariance.csv".into(),
        bytes: csv_bytes(
            &["target_lag_m", "lag_m", "lag_nodes", "empirical", "theory", "relative_deviation"],
            rows,
        )?,
    });
    artifacts.push(Artifact {
        name: "field_summary.csv".into(),
        bytes: csv_bytes(
            &["key", "value"],
            [
                ("realizations", n.to_string()),
                ("spacing_m", spacing.to_string()),
                ("nodes_x", gen.grid().nx.to_string()),
                ("nodes_y", gen.grid().ny.to_string()),
                ("max_relative_deviation", worst.to_string()),
            ]
            .into_iter()
            .map(|(k, v)| vec![k.to_string(), v]),
        )?,
    });
    Ok(artifacts)
}

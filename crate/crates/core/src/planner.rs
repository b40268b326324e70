//! Base-station placement by particle swarm optimization.
//!
//! Each particle is one candidate placement of all base stations, flattened
//! to `[x1, y1, x2, y2, ...]`. The swarm minimizes an objective over the map
//! bounds; [`PlacementObjective`] provides the two used for verification:
//! the training cross entropy of the verifier and the area under its ROC.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::ChannelParams;
use crate::dataset::{generate_dataset, split, FeatureStats, DEFAULT_P0, DEFAULT_TRAIN_FRAC};
use crate::error::{Error, Result};
use crate::eval::{auc, empirical_roc, RocCurve};
use crate::geometry::{Position, Rectangle, Scenario};
use crate::nn::{layer_sizes, train, Mlp, Samples, TrainConfig};
use crate::shadowing::ShadowingField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsoConfig {
    pub particles: usize,
    /// Inertia weight ω.
    pub inertia: f64,
    /// Pull towards the particle's own best, c1.
    pub cognitive: f64,
    /// Pull towards the swarm's best, c2.
    pub social: f64,
    pub max_iters: usize,
    /// Stop after this many consecutive iterations without an improvement of
    /// the global best larger than `tolerance`.
    pub stall_iters: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            particles: 6,
            inertia: 0.7298,
            cognitive: 1.4961,
            social: 1.4961,
            max_iters: 50,
            stall_iters: 5,
            tolerance: 1e-4,
            seed: 0,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.particles == 0 {
            return Err(Error::InvalidParameter("need at least one particle".into()));
        }
        let coefs = [self.inertia, self.cognitive, self.social, self.tolerance];
        if coefs.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
            return Err(Error::InvalidParameter(
                "inertia, acceleration coefficients and tolerance must be >= 0".into(),
            ));
        }
        if self.stall_iters == 0 {
            return Err(Error::InvalidParameter("stall window must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_value: f64,
}

/// Outcome of one swarm run.
#[derive(Debug, Clone, PartialEq)]
pub struct PsoResult {
    pub best_position: Vec<Position>,
    pub best_value: f64,
    /// Global best value after initialization (entry 0) and after every
    /// iteration.
    pub history: Vec<f64>,
    /// Global best placement at the same instants.
    pub best_history: Vec<Vec<Position>>,
    /// Swarm state at the end of the run.
    pub swarm: Vec<Particle>,
    pub iterations: usize,
}

fn to_positions(flat: &[f64]) -> Vec<Position> {
    flat.chunks(2).map(|c| Position::new(c[0], c[1])).collect()
}

fn to_flat(bs: &[Position]) -> Vec<f64> {
    bs.iter().flat_map(|p| [p.x, p.y]).collect()
}

fn clamp_coord(bounds: &Rectangle, d: usize, v: f64) -> f64 {
    if d % 2 == 0 {
        v.clamp(bounds.min().x, bounds.max().x)
    } else {
        v.clamp(bounds.min().y, bounds.max().y)
    }
}

fn evaluate_all<F>(objective: &F, positions: &[Vec<f64>]) -> Result<Vec<f64>>
where
    F: Fn(&[Position]) -> Result<f64> + Sync,
{
    positions
        .par_iter()
        .map(|x| objective(&to_positions(x)))
        .collect()
}

/// Minimizes `objective` over placements of `n_bs` base stations inside
/// `bounds`, starting from uniformly random positions.
pub fn optimize<F>(bounds: Rectangle, n_bs: usize, objective: F, config: &PsoConfig) -> Result<PsoResult>
where
    F: Fn(&[Position]) -> Result<f64> + Sync,
{
    config.validate()?;
    if n_bs == 0 {
        return Err(Error::InvalidParameter("no base station to place".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let starts: Vec<Vec<Position>> = (0..config.particles)
        .map(|_| (0..n_bs).map(|_| bounds.sample(&mut rng)).collect())
        .collect();
    run(bounds, &starts, objective, config, &mut rng)
}

/// Same as [`optimize`] with the initial particle positions given; the swarm
/// size is the number of starts.
pub fn optimize_from<F>(
    bounds: Rectangle,
    starts: &[Vec<Position>],
    objective: F,
    config: &PsoConfig,
) -> Result<PsoResult>
where
    F: Fn(&[Position]) -> Result<f64> + Sync,
{
    let config = PsoConfig {
        particles: starts.len(),
        ..*config
    };
    config.validate()?;
    let n_bs = starts[0].len();
    if n_bs == 0 || starts.iter().any(|s| s.len() != n_bs) {
        return Err(Error::InvalidParameter(
            "every start must place the same positive number of base stations".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    run(bounds, starts, objective, &config, &mut rng)
}

fn run<F>(
    bounds: Rectangle,
    starts: &[Vec<Position>],
    objective: F,
    config: &PsoConfig,
    rng: &mut ChaCha8Rng,
) -> Result<PsoResult>
where
    F: Fn(&[Position]) -> Result<f64> + Sync,
{
    let vmax = [bounds.width() / 10.0, bounds.height() / 10.0];
    let mut swarm: Vec<Particle> = starts
        .iter()
        .map(|s| {
            let position: Vec<f64> = to_flat(s)
                .iter()
                .enumerate()
                .map(|(d, &v)| clamp_coord(&bounds, d, v))
                .collect();
            let velocity = (0..position.len())
                .map(|d| {
                    let m = vmax[d % 2];
                    if m > 0.0 {
                        rng.random_range(-m..=m)
                    } else {
                        0.0
                    }
                })
                .collect();
            Particle {
                best_position: position.clone(),
                position,
                velocity,
                best_value: f64::INFINITY,
            }
        })
        .collect();

    let values = evaluate_all(&objective, &swarm.iter().map(|p| p.position.clone()).collect::<Vec<_>>())?;
    for (p, v) in swarm.iter_mut().zip(values) {
        p.best_value = v;
    }
    let mut g = argmin(&swarm);
    let mut history = vec![swarm[g].best_value];
    let mut best_history = vec![to_positions(&swarm[g].best_position)];
    let mut stall = 0;
    let mut iterations = 0;

    while iterations < config.max_iters && stall < config.stall_iters {
        iterations += 1;
        let global = swarm[g].best_position.clone();
        for p in swarm.iter_mut() {
            for d in 0..p.position.len() {
                let phi1: f64 = rng.random();
                let phi2: f64 = rng.random();
                let x = p.position[d];
                p.velocity[d] = config.inertia * p.velocity[d]
                    + config.cognitive * phi1 * (p.best_position[d] - x)
                    + config.social * phi2 * (global[d] - x);
                p.position[d] = clamp_coord(&bounds, d, x + p.velocity[d]);
            }
        }
        let values = evaluate_all(&objective, &swarm.iter().map(|p| p.position.clone()).collect::<Vec<_>>())?;
        for (p, v) in swarm.iter_mut().zip(values) {
            if v < p.best_value {
                p.best_value = v;
                p.best_position = p.position.clone();
            }
        }
        let previous = swarm[g].best_value;
        g = argmin(&swarm);
        let current = swarm[g].best_value;
        if previous - current > config.tolerance {
            stall = 0;
        } else {
            stall += 1;
        }
        history.push(current);
        best_history.push(to_positions(&swarm[g].best_position));
    }

    Ok(PsoResult {
        best_position: to_positions(&swarm[g].best_position),
        best_value: swarm[g].best_value,
        history,
        best_history,
        swarm,
        iterations,
    })
}

// First particle with the lowest personal best.
fn argmin(swarm: &[Particle]) -> usize {
    let mut g = 0;
    for (i, p) in swarm.iter().enumerate() {
        if p.best_value < swarm[g].best_value {
            g = i;
        }
    }
    g
}

/// Quantity minimized by the swarm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    /// Training cross entropy of the verifier, bits.
    CrossEntropy,
    /// Area under the ROC of the verifier on held-out samples.
    Auc,
}

/// Scores of one placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacementScore {
    pub cross_entropy: f64,
    pub auc: f64,
}

/// Full outcome of [`PlacementObjective::evaluate`].
#[derive(Debug, Clone)]
pub struct PlacementEvaluation {
    pub score: PlacementScore,
    /// ROC on the test split.
    pub roc: RocCurve,
    pub net: Mlp,
}

/// Trains a verifier for a candidate placement and scores it.
///
/// The shadowing fields, the dataset seed and the network initialization are
/// the same for every placement, so two placements differ only through the
/// geometry.
#[derive(Debug, Clone)]
pub struct PlacementObjective<'a, S: Scenario> {
    pub scenario: &'a S,
    /// One field per base station, or empty for no shadowing.
    pub fields: &'a [ShadowingField],
    pub params: ChannelParams,
    /// Number of training samples; the test split comes on top.
    pub train_size: usize,
    pub hidden: usize,
    pub hidden_layers: usize,
    pub train: TrainConfig,
    pub p0: f64,
    pub train_frac: f64,
    pub data_seed: u64,
    pub init_seed: u64,
}

impl<'a, S: Scenario> PlacementObjective<'a, S> {
    /// Default network and split for `scenario`.
    pub fn new(scenario: &'a S, fields: &'a [ShadowingField], params: ChannelParams, train_size: usize) -> Self {
        Self {
            scenario,
            fields,
            params,
            train_size,
            hidden: 8,
            hidden_layers: 1,
            train: TrainConfig::default(),
            p0: DEFAULT_P0,
            train_frac: DEFAULT_TRAIN_FRAC,
            data_seed: 0,
            init_seed: 0,
        }
    }

    /// Trains on the placement `bs` and evaluates the verifier on the test
    /// split.
    pub fn evaluate(&self, bs: &[Position]) -> Result<PlacementEvaluation> {
        let scenario = self.scenario.with_bs_positions(bs.to_vec());
        let total = (self.train_size as f64 / self.train_frac).round() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(self.data_seed);
        let data = generate_dataset(&scenario, self.fields, &self.params, total, self.p0, &mut rng)?;
        let (train_set, test_set) = split(&data, self.train_frac)?;
        let stats = FeatureStats::fit(&train_set)?;
        let train_samples = Samples::from_dataset(&stats.apply(&train_set)?);
        let test_samples = Samples::from_dataset(&stats.apply(&test_set)?);
        let sizes = layer_sizes(scenario.n_bs(), self.hidden, self.hidden_layers);
        let net = Mlp::init(&sizes, self.init_seed)?;
        let (net, cross_entropy) = train(&net, &train_samples, &self.train)?;
        let scores = net.scores(&test_samples)?;
        let roc = empirical_roc(&scores, &test_set.labels())?;
        Ok(PlacementEvaluation {
            score: PlacementScore {
                cross_entropy,
                auc: auc(&roc),
            },
            roc,
            net,
        })
    }

    /// Training cross entropy and test AUC of the placement `bs`.
    pub fn score(&self, bs: &[Position]) -> Result<PlacementScore> {
        Ok(self.evaluate(bs)?.score)
    }

    pub fn value(&self, bs: &[Position], kind: ObjectiveKind) -> Result<f64> {
        let s = self.score(bs)?;
        Ok(match kind {
            ObjectiveKind::CrossEntropy => s.cross_entropy,
            ObjectiveKind::Auc => s.auc,
        })
    }
}

/// Swarm search with the given objective over the scenario bounds.
pub fn plan<S: Scenario>(
    objective: &PlacementObjective<'_, S>,
    kind: ObjectiveKind,
    config: &PsoConfig,
) -> Result<PsoResult> {
    optimize(
        objective.scenario.bounds(),
        objective.scenario.n_bs(),
        |bs| objective.value(bs, kind),
        config,
    )
}

/// Cross-entropy search followed by an AUC search started from the final
/// positions of the first stage.
pub fn plan_two_stage<S: Scenario>(
    objective: &PlacementObjective<'_, S>,
    first: &PsoConfig,
    second: &PsoConfig,
) -> Result<(PsoResult, PsoResult)> {
    let stage1 = plan(objective, ObjectiveKind::CrossEntropy, first)?;
    let starts: Vec<Vec<Position>> = stage1.swarm.iter().map(|p| to_positions(&p.position)).collect();
    let stage2 = optimize_from(
        objective.scenario.bounds(),
        &starts,
        |bs| objective.value(bs, ObjectiveKind::Auc),
        second,
    )?;
    Ok((stage1, stage2))
}

//! Run configuration, read from a TOML file in which every key is required.

use std::path::{Path, PathBuf};

use irlv::channel::{ChannelParams, SPEED_OF_LIGHT};
use irlv::geometry::{CircularScenario, Position, Rectangle, StreetScenario};
use irlv::nn::TrainConfig;
use irlv::planner::{ObjectiveKind, PsoConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioSection,
    pub circular: CircularSection,
    pub channel: ChannelSection,
    pub nn: NnSection,
    pub dataset: DatasetSection,
    pub eval: EvalSection,
    pub np: NpSection,
    pub pso: PsoSection,
    pub field: FieldSection,
    pub seeds: SeedSection,
    pub output: OutputSection,
}

/// Street map used by `roc`, `plan` and `field`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub map_side: f64,
    pub building_side: f64,
    pub street_width: f64,
    /// `[x_min, y_min, x_max, y_max]`.
    pub roi: [f64; 4],
    pub bs_positions: Vec<[f64; 2]>,
}

/// Single-base-station disk used by `np-compare`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircularSection {
    pub r_out: f64,
    pub roi_width: f64,
    pub roi_height: f64,
    pub r_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub f0_hz: f64,
    pub sigma_s_db: f64,
    pub d_c_m: f64,
    pub h_ap_m: f64,
    /// Node spacing of the shadowing grid, m.
    pub field_spacing_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NnSection {
    /// Hidden-layer widths swept by `roc`.
    pub hidden: Vec<usize>,
    pub hidden_layers: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    /// Training-set sizes swept by `roc`.
    pub train_sizes: Vec<usize>,
    pub p0: f64,
    pub train_frac: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    /// Number of independent shadowing realizations per configuration.
    pub shadowing_seeds: u64,
    /// Points of the common false-alarm grid.
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NpSection {
    pub hidden: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub theta_points: usize,
    pub theta_min_bits: f64,
    pub theta_max_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsoSection {
    /// Any of `"ce"` and `"auc"`.
    pub objectives: Vec<String>,
    pub train_size: usize,
    pub hidden: usize,
    pub particles: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub max_iters: usize,
    pub stall_iters: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    /// Realizations used for the covariance diagnostic.
    pub realizations: u64,
    /// How many of them are written to disk.
    pub export: u64,
    /// `"binary"` or `"csv"`.
    pub format: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSection {
    pub field: u64,
    pub dataset: u64,
    pub init: u64,
    pub pso: u64,
}

impl SeedSection {
    pub fn offset(self, by: u64) -> Self {
        Self {
            field: self.field.wrapping_add(by),
            dataset: self.dataset.wrapping_add(by),
            init: self.init.wrapping_add(by),
            pso: self.pso.wrapping_add(by),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

fn bad(key: &str, why: &str) -> CliError {
    CliError::Config(format!("{key}: {why}"))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Canonical TOML text, used for hashing.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks that every value can be used, naming the offending key.
    pub fn validate(&self) -> Result<(), CliError> {
        self.street()?;
        self.circular()?;
        self.channel()
            .validate()
            .map_err(|e| bad("channel", &e.to_string()))?;
        if !(self.channel.field_spacing_m > 0.0) {
            return Err(bad("channel.field_spacing_m", "must be positive"));
        }
        if self.channel.field_spacing_m > self.channel.d_c_m / 5.0 {
            return Err(bad("channel.field_spacing_m", "must not exceed d_c_m / 5"));
        }
        if self.nn.hidden.is_empty() || self.nn.hidden.contains(&0) {
            return Err(bad("nn.hidden", "needs at least one positive width"));
        }
        if !(self.nn.learning_rate > 0.0) {
            return Err(bad("nn.learning_rate", "must be positive"));
        }
        if self.nn.batch_size == 0 {
            return Err(bad("nn.batch_size", "must be positive"));
        }
        if self.dataset.train_sizes.is_empty() || self.dataset.train_sizes.iter().any(|&s| s < 2) {
            return Err(bad("dataset.train_sizes", "needs sizes of at least 2"));
        }
        if !(self.dataset.p0 > 0.0 && self.dataset.p0 < 1.0) {
            return Err(bad("dataset.p0", "must lie in (0, 1)"));
        }
        if !(self.dataset.train_frac > 0.0 && self.dataset.train_frac < 1.0) {
            return Err(bad("dataset.train_frac", "must lie in (0, 1)"));
        }
        if self.eval.shadowing_seeds == 0 {
            return Err(bad("eval.shadowing_seeds", "must be positive"));
        }
        if self.eval.grid_points < 2 {
            return Err(bad("eval.grid_points", "must be at least 2"));
        }
        if self.np.hidden == 0 || self.np.train_size < 2 || self.np.test_size < 2 {
            return Err(bad("np", "hidden, train_size and test_size must be positive"));
        }
        if self.np.theta_points < 2 || !(self.np.theta_min_bits < self.np.theta_max_bits) {
            return Err(bad("np.theta_points", "needs at least 2 points over a nonempty range"));
        }
        self.objectives()?;
        if self.pso.hidden == 0 || self.pso.train_size < 2 {
            return Err(bad("pso", "hidden and train_size must be positive"));
        }
        self.pso_config(0)
            .validate()
            .map_err(|e| bad("pso", &e.to_string()))?;
        if self.field.export > self.field.realizations {
            return Err(bad("field.export", "cannot exceed field.realizations"));
        }
        if !matches!(self.field.format.as_str(), "binary" | "csv") {
            return Err(bad("field.format", "must be \"binary\" or \"csv\""));
        }
        Ok(())
    }

    pub fn street(&self) -> Result<StreetScenario, CliError> {
        let s = &self.scenario;
        let [x0, y0, x1, y1] = s.roi;
        let roi = Rectangle::new(Position::new(x0, y0), Position::new(x1, y1))
            .map_err(|e| bad("scenario.roi", &e.to_string()))?;
        let bs = s.bs_positions.iter().map(|p| Position::new(p[0], p[1])).collect();
        StreetScenario::new(s.map_side, s.building_side, s.street_width, roi, bs)
            .map_err(|e| bad("scenario", &e.to_string()))
    }

    pub fn circular(&self) -> Result<CircularScenario, CliError> {
        let c = &self.circular;
        CircularScenario::with_corner_at(c.r_out, c.roi_width, c.roi_height, c.r_min)
            .map_err(|e| bad("circular", &e.to_string()))
    }

    pub fn channel(&self) -> ChannelParams {
        ChannelParams {
            f0_hz: self.channel.f0_hz,
            sigma_s_db: self.channel.sigma_s_db,
            d_c_m: self.channel.d_c_m,
            h_ap_m: self.channel.h_ap_m,
            c: SPEED_OF_LIGHT,
        }
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.nn.learning_rate,
            epochs: self.nn.epochs,
            batch_size: self.nn.batch_size,
            seed,
        }
    }

    pub fn pso_config(&self, seed: u64) -> PsoConfig {
        let p = &self.pso;
        PsoConfig {
            particles: p.particles,
            inertia: p.inertia,
            cognitive: p.cognitive,
            social: p.social,
            max_iters: p.max_iters,
            stall_iters: p.stall_iters,
            tolerance: p.tolerance,
            seed,
        }
    }

    pub fn objectives(&self) -> Result<Vec<ObjectiveKind>, CliError> {
        if self.pso.objectives.is_empty() {
            return Err(bad("pso.objectives", "needs at least one objective"));
        }
        self.pso
            .objectives
            .iter()
            .map(|o| match o.as_str() {
                "ce" => Ok(ObjectiveKind::CrossEntropy),
                "auc" => Ok(ObjectiveKind::Auc),
                other => Err(bad("pso.objectives", &format!("unknown objective {other:?}"))),
            })
            .collect()
    }
}

/// Short name of an objective, as used in configs and file names.
pub fn objective_name(kind: ObjectiveKind) -> &'static str {
    match kind {
        ObjectiveKind::CrossEntropy => "ce",
        ObjectiveKind::Auc => "auc",
    }
}

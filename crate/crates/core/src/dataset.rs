//! Labeled attenuation datasets.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::channel::{attenuation_vector, AttenuationVector, ChannelParams};
use crate::error::{Error, Result};
use crate::geometry::{Position, Region, Scenario, INSIDE, OUTSIDE};
use crate::shadowing::ShadowingField;

/// Default share of inside samples.
pub const DEFAULT_P0: f64 = 0.5;
/// Default share of samples used for training.
pub const DEFAULT_TRAIN_FRAC: f64 = 0.7;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    /// Attenuations in dB (or standardized, once normalized).
    pub a: AttenuationVector,
    /// 0 inside the region of interest, 1 outside.
    pub t: u8,
    /// Transmitter position. Kept for diagnostics only; never a feature.
    pub pos: Position,
}

/// Per-feature affine standardization fitted on a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl FeatureStats {
    /// Mean and (population) standard deviation of each feature.
    pub fn fit(data: &Dataset) -> Result<Self> {
        let dim = data.dim();
        let n = data.len() as f64;
        let mut mean = vec![0.0; dim];
        for s in &data.samples {
            for (m, v) in mean.iter_mut().zip(&s.a) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for s in &data.samples {
            for ((acc, v), m) in var.iter_mut().zip(&s.a).zip(&mean) {
                *acc += (v - m) * (v - m);
            }
        }
        let mut std = Vec::with_capacity(dim);
        for (index, v) in var.into_iter().enumerate() {
            let sd = (v / n).sqrt();
            if !(sd > 0.0) {
                return Err(Error::ZeroVariance { index });
            }
            std.push(sd);
        }
        Ok(Self { mean, std })
    }

    pub fn apply_vector(&self, a: &[f64]) -> Vec<f64> {
        a.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn invert_vector(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| v * s + m)
            .collect()
    }

    /// Standardizes every sample of `data` and records these stats on it.
    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        if data.dim() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                got: data.dim(),
            });
        }
        let samples = data
            .samples
            .iter()
            .map(|s| LabeledSample {
                a: self.apply_vector(&s.a),
                ..s.clone()
            })
            .collect();
        Ok(Dataset {
            samples,
            stats: Some(self.clone()),
        })
    }

    /// Maps standardized samples back to dB.
    pub fn invert(&self, data: &Dataset) -> Dataset {
        let samples = data
            .samples
            .iter()
            .map(|s| LabeledSample {
                a: self.invert_vector(&s.a),
                ..s.clone()
            })
            .collect();
        Dataset {
            samples,
            stats: None,
        }
    }
}

/// A nonempty set of labeled samples sharing one feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<LabeledSample>,
    stats: Option<FeatureStats>,
}

impl Dataset {
    pub fn new(samples: Vec<LabeledSample>) -> Result<Self> {
        let Some(first) = samples.first() else {
            return Err(Error::DegenerateDataset("no samples".into()));
        };
        let dim = first.a.len();
        if let Some(bad) = samples.iter().find(|s| s.a.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.a.len(),
            });
        }
        Ok(Self {
            samples,
            stats: None,
        })
    }

    pub fn samples(&self) -> &[LabeledSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples[0].a.len()
    }

    /// Normalization applied to this set, if any.
    pub fn stats(&self) -> Option<&FeatureStats> {
        self.stats.as_ref()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// Number of samples labelled `label`.
    pub fn count(&self, label: u8) -> usize {
        self.samples.iter().filter(|s| s.t == label).count()
    }

    /// CSV with columns `a1..aN,label,x,y`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (1..=self.dim()).map(|n| format!("a{n}")).collect();
        header.extend(["label", "x", "y"].map(String::from));
        out.write_record(&header)?;
        for s in &self.samples {
            let mut row: Vec<String> = s.a.iter().map(f64::to_string).collect();
            row.push(s.t.to_string());
            row.push(s.pos.x.to_string());
            row.push(s.pos.y.to_string());
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Draws `⌊p0·size⌋` transmitter positions uniformly inside the region of
/// interest and the rest uniformly outside it, computes their attenuation
/// vectors and shuffles the result.
pub fn generate_dataset<S: Scenario, R: Rng + ?Sized>(
    scenario: &S,
    fields: &[ShadowingField],
    params: &ChannelParams,
    size: usize,
    p0: f64,
    rng: &mut R,
) -> Result<Dataset> {
    if size < 2 {
        return Err(Error::DegenerateDataset(format!("size {size} < 2")));
    }
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::InvalidParameter(format!("p0 = {p0} not in (0, 1)")));
    }
    let n0 = (p0 * size as f64).floor() as usize;
    if n0 == 0 || n0 == size {
        return Err(Error::DegenerateDataset(format!(
            "p0 = {p0} with {size} samples leaves a class empty"
        )));
    }
    if !(scenario.roi_area() > 0.0 && scenario.outside_area() > 0.0) {
        return Err(Error::DegenerateDataset("empty region".into()));
    }
    let mut samples = Vec::with_capacity(size);
    for k in 0..size {
        let (region, t) = if k < n0 {
            (Region::Inside, INSIDE)
        } else {
            (Region::Outside, OUTSIDE)
        };
        let pos = scenario.sample_uniform(region, rng);
        let a = attenuation_vector(scenario, fields, params, pos)?;
        samples.push(LabeledSample { a, t, pos });
    }
    samples.shuffle(rng);
    Dataset::new(samples)
}

/// Splits off the first `⌊train_frac·len⌋` samples for training.
pub fn split(data: &Dataset, train_frac: f64) -> Result<(Dataset, Dataset)> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train_frac = {train_frac} not in (0, 1)"
        )));
    }
    let cut = (train_frac * data.len() as f64).floor() as usize;
    if cut == 0 || cut == data.len() {
        return Err(Error::DegenerateDataset("split leaves an empty side".into()));
    }
    let (train, test) = data.samples.split_at(cut);
    let keep = |s: &[LabeledSample]| Dataset {
        samples: s.to_vec(),
        stats: data.stats.clone(),
    };
    Ok((keep(train), keep(test)))
}

/// Standardizes `data` with its own statistics.
pub fn normalize(data: &Dataset) -> Result<Dataset> {
    FeatureStats::fit(data)?.apply(data)
}

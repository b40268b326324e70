//! Neyman-Pearson verifier for the circular scenario without shadowing.
//!
//! With a single line-of-sight base station at the origin and no shadowing,
//! the attenuation is a bijective function of the distance `R`, so the test
//! reduces to comparing the densities of `R` under the two hypotheses. Both
//! depend on `α(r)`, the angle subtended by the region of interest on the
//! circle of radius `r`:
//!
//! - `p(r | H0) = r·α(r) / |A0|`
//! - `p(r | H1) = r·(2π − α(r)) / |A1|` for `r ≤ R_out`, 0 beyond.
//!
//! Log-likelihood ratios are in bits, `log₂ p(a|H0)/p(a|H1)`. The test
//! decides inside (0) when the ratio reaches `log₂ θ` and outside (1)
//! otherwise.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use crate::channel::{path_loss_los_db, ChannelParams};
use crate::error::{Error, Result};
use crate::eval::RocCurve;
use crate::geometry::{CircularScenario, Position, Region, Scenario, INSIDE, OUTSIDE};

/// Default step of the angular scan, rad.
pub const DEFAULT_ANGULAR_RESOLUTION: f64 = 1e-4;

/// Magnitude of the log-likelihood ratio reported where one density vanishes.
pub const LLR_SENTINEL: f64 = 1024.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// The transmitter is inside the region of interest.
    H0,
    /// The transmitter is outside.
    H1,
}

/// Distance matching a free-space attenuation `a_db`.
pub fn radius_from_attenuation(a_db: f64, params: &ChannelParams) -> Result<f64> {
    if !(a_db >= 0.0) {
        return Err(Error::AttenuationBelowFreeSpace(a_db));
    }
    Ok(params.unit_loss_distance() * 10f64.powf(a_db / 20.0))
}

/// Distance matching a linear amplitude attenuation `a = 10^(a_dB/20)`.
pub fn radius_from_linear_attenuation(a: f64, params: &ChannelParams) -> Result<f64> {
    if !(a >= 1.0) {
        return Err(Error::AttenuationBelowFreeSpace(20.0 * a.log10()));
    }
    Ok(params.unit_loss_distance() * a)
}

/// Closed-form test for one [`CircularScenario`].
#[derive(Debug, Clone)]
pub struct NpOracle {
    scenario: CircularScenario,
    params: ChannelParams,
    steps: usize,
    // Scan window [first, first + count) in units of the angular step, or
    // `None` for the full circle.
    window: Option<(i64, i64)>,
}

impl NpOracle {
    /// Oracle for `scenario`. Only the carrier frequency and propagation
    /// speed of `params` matter; shadowing is ignored.
    pub fn new(scenario: CircularScenario, params: ChannelParams) -> Result<Self> {
        Self::with_resolution(scenario, params, DEFAULT_ANGULAR_RESOLUTION)
    }

    /// Same with an explicit angular step, which must not exceed 1e-3 rad.
    pub fn with_resolution(
        scenario: CircularScenario,
        params: ChannelParams,
        resolution: f64,
    ) -> Result<Self> {
        params.validate()?;
        if !(resolution > 0.0 && resolution <= 1e-3) {
            return Err(Error::InvalidParameter(format!(
                "angular resolution {resolution} must lie in (0, 1e-3]"
            )));
        }
        let steps = (TAU / resolution).ceil() as usize;
        let delta = TAU / steps as f64;
        let roi = scenario.roi();
        let window = if roi.contains(Position::default()) {
            None
        } else {
            // A convex set missing the origin spans less than π around it.
            let c = roi.centroid();
            let center = c.y.atan2(c.x);
            let offsets = roi.corners().map(|p| wrap(p.y.atan2(p.x) - center));
            let lo = center + offsets.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = center + offsets.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let first = (lo / delta - 0.5).floor() as i64 - 1;
            let last = (hi / delta - 0.5).ceil() as i64 + 1;
            Some((first, last - first + 1))
        };
        Ok(Self {
            scenario,
            params,
            steps,
            window,
        })
    }

    pub fn scenario(&self) -> &CircularScenario {
        &self.scenario
    }

    /// Angular step actually used, rad.
    pub fn resolution(&self) -> f64 {
        TAU / self.steps as f64
    }

    /// Angle of the circle of radius `r` that lies inside the region of
    /// interest, by midpoint scan.
    pub fn alpha(&self, r: f64) -> f64 {
        if !(r > 0.0) || r < self.scenario.r_min() || r > self.scenario.r_max() {
            return 0.0;
        }
        let roi = self.scenario.roi();
        let delta = self.resolution();
        let n = self.steps as i64;
        let (first, count) = self.window.unwrap_or((0, n));
        let count = count.min(n);
        let hits = (first..first + count)
            .filter(|k| {
                let phi = (k.rem_euclid(n) as f64 + 0.5) * delta;
                roi.contains(Position::new(r * phi.cos(), r * phi.sin()))
            })
            .count();
        hits as f64 * delta
    }

    /// Density of the distance under hypothesis `h`.
    pub fn pdf_r(&self, r: f64, h: Hypothesis) -> f64 {
        if !(r > 0.0) || r > self.scenario.r_out() {
            return 0.0;
        }
        let alpha = self.alpha(r);
        match h {
            Hypothesis::H0 => r * alpha / self.scenario.roi_area(),
            Hypothesis::H1 => r * (TAU - alpha) / self.scenario.outside_area(),
        }
    }

    /// Log-likelihood ratio in bits at distance `r`.
    ///
    /// Returns `+LLR_SENTINEL` where only H0 is possible and
    /// `-LLR_SENTINEL` where H0 is impossible.
    pub fn llr_at_radius(&self, r: f64) -> f64 {
        if !(r > 0.0) || r > self.scenario.r_out() {
            return -LLR_SENTINEL;
        }
        let alpha = self.alpha(r);
        self.llr_from_alpha(alpha)
    }

    fn llr_from_alpha(&self, alpha: f64) -> f64 {
        if alpha <= 0.0 {
            return -LLR_SENTINEL;
        }
        if alpha >= TAU {
            return LLR_SENTINEL;
        }
        let a0 = self.scenario.roi_area();
        let a1 = self.scenario.outside_area();
        (a1 * alpha / (a0 * (TAU - alpha))).log2()
    }

    /// Log-likelihood ratio in bits of an attenuation in dB.
    pub fn llr(&self, a_db: f64) -> Result<f64> {
        Ok(self.llr_at_radius(radius_from_attenuation(a_db, &self.params)?))
    }

    /// Same for a linear amplitude attenuation.
    pub fn llr_linear(&self, a: f64) -> Result<f64> {
        Ok(self.llr_at_radius(radius_from_linear_attenuation(a, &self.params)?))
    }

    /// Decision at ratio-scale threshold `theta`.
    pub fn decide(&self, a_db: f64, theta: f64) -> Result<u8> {
        Ok(decide_llr(self.llr(a_db)?, theta))
    }

    /// Posterior probability of H1 given the attenuation.
    pub fn posterior_h1(&self, a_db: f64, prior0: f64, prior1: f64) -> Result<f64> {
        let llr = self.llr(a_db)?;
        Ok(1.0 - crate::nn::posterior_from_llr(llr, prior0, prior1)?)
    }

    /// Free-space attenuation of a transmitter at `p`.
    pub fn attenuation_at(&self, p: Position) -> Result<f64> {
        path_loss_los_db(p.norm(), &self.params)
    }

    /// Log-likelihood ratios of `n` uniform draws from each hypothesis, going
    /// through the attenuation.
    pub fn sample_llrs<R: Rng + ?Sized>(
        &self,
        n: usize,
        rng: &mut R,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut draw = |region| -> Result<Vec<f64>> {
            (0..n)
                .map(|_| {
                    let p = self.scenario.sample_uniform(region, rng);
                    self.llr(self.attenuation_at(p)?)
                })
                .collect()
        };
        let h0 = draw(Region::Inside)?;
        let h1 = draw(Region::Outside)?;
        Ok((h0, h1))
    }

    /// Monte-Carlo ROC over the ratio-scale thresholds `thetas`, using `n`
    /// draws per hypothesis.
    pub fn roc_monte_carlo<R: Rng + ?Sized>(
        &self,
        n: usize,
        thetas: &[f64],
        rng: &mut R,
    ) -> Result<RocCurve> {
        if n == 0 {
            return Err(Error::InvalidParameter("need at least one draw".into()));
        }
        let (h0, h1) = self.sample_llrs(n, rng)?;
        let sweep = theta_sweep(&h0, &h1, thetas);
        RocCurve::from_points(sweep.iter().map(|s| (s.1, s.2)).collect())
    }

    /// ROC computed by quadrature of the two distance densities over
    /// `intervals` equal slices of `[0, R_out]`, with every achievable
    /// threshold.
    pub fn roc_exact(&self, intervals: usize) -> Result<RocCurve> {
        if intervals == 0 {
            return Err(Error::InvalidParameter("need at least one interval".into()));
        }
        let h = self.scenario.r_out() / intervals as f64;
        let a0 = self.scenario.roi_area();
        let a1 = self.scenario.outside_area();
        // (llr, weight under H0, weight under H1)
        let mut cells: Vec<(f64, f64, f64)> = (0..intervals)
            .map(|i| {
                let r = (i as f64 + 0.5) * h;
                let alpha = self.alpha(r);
                (
                    self.llr_from_alpha(alpha),
                    r * alpha / a0 * h,
                    r * (TAU - alpha) / a1 * h,
                )
            })
            .collect();
        cells.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total0: f64 = cells.iter().map(|c| c.1).sum();
        let total1: f64 = cells.iter().map(|c| c.2).sum();
        // Threshold just above each distinct llr: cells at or below it are
        // declared outside.
        let mut points = Vec::new();
        let (mut out0, mut out1) = (0.0, 0.0);
        let mut k = 0;
        while k < cells.len() {
            let level = cells[k].0;
            while k < cells.len() && cells[k].0 == level {
                out0 += cells[k].1;
                out1 += cells[k].2;
                k += 1;
            }
            let p_fa = (out0 / total0).clamp(0.0, 1.0);
            let p_md = (1.0 - out1 / total1).clamp(0.0, 1.0);
            points.push((p_fa, p_md));
        }
        RocCurve::from_points(points)
    }
}

fn wrap(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    if a > PI {
        a - TAU
    } else {
        a
    }
}

/// Decision of the test for a given log-likelihood ratio and ratio-scale
/// threshold `theta`.
pub fn decide_llr(llr_bits: f64, theta: f64) -> u8 {
    if llr_bits >= theta.log2() {
        INSIDE
    } else {
        OUTSIDE
    }
}

/// `(theta, p_fa, p_md)` of the test applied to log-likelihood ratios drawn
/// under H0 (`h0`) and H1 (`h1`).
pub fn theta_sweep(h0: &[f64], h1: &[f64], thetas: &[f64]) -> Vec<(f64, f64, f64)> {
    let mut s0 = h0.to_vec();
    let mut s1 = h1.to_vec();
    s0.sort_by(f64::total_cmp);
    s1.sort_by(f64::total_cmp);
    thetas
        .iter()
        .map(|&theta| {
            let t = theta.log2();
            let fa = s0.partition_point(|&l| l < t) as f64 / s0.len().max(1) as f64;
            let md = (s1.len() - s1.partition_point(|&l| l < t)) as f64 / s1.len().max(1) as f64;
            (theta, fa, md)
        })
        .collect()
}

/// Log-spaced thresholds `2^k` for `k` from `lo_bits` to `hi_bits`.
pub fn theta_grid(lo_bits: f64, hi_bits: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo_bits.exp2()],
        _ => (0..n)
            .map(|k| (lo_bits + (hi_bits - lo_bits) * k as f64 / (n - 1) as f64).exp2())
            .collect(),
    }
}

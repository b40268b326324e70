//! ROC curves, their area and averaging, plus operation counts of the test
//! phase.
//!
//! Curves plot the missed-detection probability `P_MD` against the
//! false-alarm probability `P_FA`. The area under that curve is the integral
//! of `P_MD` over `P_FA`: a perfect verifier scores 0, a coin flip 0.5, and
//! lower is better.

use std::io::Write;

use crate::error::{Error, Result};

/// Default number of points of the common `P_FA` grid.
pub const DEFAULT_GRID_POINTS: usize = 200;

/// Monotone ROC curve.
///
/// Points are sorted by `p_fa` ascending (ties by `p_md` descending), contain
/// the trivial operating points `(0, 1)` and `(1, 0)`, and `p_md` never
/// increases along the curve.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    points: Vec<(f64, f64)>,
}

impl RocCurve {
    /// Builds a curve from arbitrary `(p_fa, p_md)` operating points.
    pub fn from_points(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points
            .iter()
            .any(|&(x, y)| !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y))
        {
            return Err(Error::InvalidParameter(
                "ROC coordinates must lie in [0, 1]".into(),
            ));
        }
        points.push((0.0, 1.0));
        points.push((1.0, 0.0));
        points.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
        // Lower envelope: an operating point is never worse than one with a
        // smaller false-alarm rate.
        let mut floor = f64::INFINITY;
        for p in points.iter_mut() {
            floor = floor.min(p.1);
            p.1 = floor;
        }
        points.dedup();
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// `P_MD` at `p_fa`, linearly interpolated. At a vertical jump the lower
    /// value is returned.
    pub fn p_md_at(&self, p_fa: f64) -> f64 {
        let x = p_fa.clamp(0.0, 1.0);
        let i = self.points.partition_point(|p| p.0 <= x) - 1;
        let (x0, y0) = self.points[i];
        if x0 == x || i + 1 == self.points.len() {
            return y0;
        }
        let (x1, y1) = self.points[i + 1];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// `(p_fa, p_md)` pairs on `grid`.
    pub fn resample(&self, grid: &[f64]) -> Vec<(f64, f64)> {
        grid.iter().map(|&x| (x, self.p_md_at(x))).collect()
    }

    /// CSV with columns `p_fa,p_md`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_pairs_csv(w, &self.points)
    }
}

/// Writes `p_fa,p_md` rows.
pub fn write_pairs_csv<W: Write>(w: W, pairs: &[(f64, f64)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["p_fa", "p_md"])?;
    for (x, y) in pairs {
        out.write_record([x.to_string(), y.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// `n` equally spaced points on `[0, 1]`.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}

/// Arithmetic operations spent building a ROC and integrating it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCount {
    pub roc: u64,
    pub auc: u64,
}

/// Empirical ROC of `scores` against labels (0 inside, 1 outside), sweeping
/// the decision threshold over every distinct score with the rule
/// "decide outside iff score > threshold".
pub fn empirical_roc(scores: &[f64], labels: &[u8]) -> Result<RocCurve> {
    empirical_roc_counted(scores, labels).map(|(roc, _)| roc)
}

/// [`empirical_roc`] that also reports how many comparisons and additions it
/// performed.
pub fn empirical_roc_counted(scores: &[f64], labels: &[u8]) -> Result<(RocCurve, u64)> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    let n1 = labels.iter().filter(|&&t| t == 1).count();
    let n0 = labels.len() - n1;
    if n0 == 0 || n1 == 0 {
        return Err(Error::SingleClass);
    }
    let mut ops = 0u64;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        ops += 1;
        scores[a].total_cmp(&scores[b])
    });
    // Walk thresholds upward; everything at or below the threshold is
    // declared inside.
    let (n0f, n1f) = (n0 as f64, n1 as f64);
    let mut points = Vec::new();
    let (mut inside0, mut inside1) = (0usize, 0usize);
    let mut k = 0;
    while k < order.len() {
        let level = scores[order[k]];
        while k < order.len() && scores[order[k]] == level {
            if labels[order[k]] == 1 {
                inside1 += 1;
            } else {
                inside0 += 1;
            }
            ops += 2;
            k += 1;
        }
        points.push(((n0 - inside0) as f64 / n0f, inside1 as f64 / n1f));
        ops += 4;
    }
    Ok((RocCurve::from_points(points)?, ops))
}

/// Trapezoidal area under `P_MD(P_FA)`.
pub fn auc(roc: &RocCurve) -> f64 {
    auc_counted(roc).0
}

pub fn auc_counted(roc: &RocCurve) -> (f64, u64) {
    let mut area = 0.0;
    let mut ops = 0u64;
    for w in roc.points.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        area += 0.5 * (x1 - x0) * (y0 + y1);
        ops += 5;
    }
    (area.clamp(0.0, 1.0), ops)
}

/// Pointwise mean of `P_MD` over curves resampled on `grid`.
pub fn average_roc(curves: &[RocCurve], grid: &[f64]) -> Result<RocCurve> {
    if curves.is_empty() {
        return Err(Error::InvalidParameter("no curves to average".into()));
    }
    let n = curves.len() as f64;
    let points = grid
        .iter()
        .map(|&x| (x, curves.iter().map(|c| c.p_md_at(x)).sum::<f64>() / n))
        .collect();
    RocCurve::from_points(points)
}

/// Largest `|P_MD|` difference between two curves over grid points with
/// `P_FA` in `[lo, hi]`.
pub fn max_vertical_gap(a: &RocCurve, b: &RocCurve, grid: &[f64], lo: f64, hi: f64) -> f64 {
    grid.iter()
        .filter(|&&x| x >= lo && x <= hi)
        .map(|&x| (a.p_md_at(x) - b.p_md_at(x)).abs())
        .fold(0.0, f64::max)
}

/// Multiplications and additions needed to run the network on `tau` test
/// vectors: `(2·N_ap·N_h + 2·N_h²·N_L + 2·N_h)·τ`.
pub fn c_out(n_ap: u64, n_h: u64, n_l: u64, tau: u64) -> u64 {
    (2 * n_ap * n_h + 2 * n_h * n_h * n_l + 2 * n_h) * tau
}

/// Extra cost of estimating the AUC instead of reading the training loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexityReport {
    pub c_out: u64,
    pub c_roc: u64,
    pub c_auc: u64,
    /// `P · (C_out + C_ROC + C_AUC)`.
    pub c_test: u64,
}

/// Combines the network cost with measured ROC/AUC operation counts for a
/// swarm of `particles` particles.
pub fn complexity_report(
    n_ap: u64,
    n_h: u64,
    n_l: u64,
    tau: u64,
    particles: u64,
    measured: OpCount,
) -> ComplexityReport {
    let out = c_out(n_ap, n_h, n_l, tau);
    ComplexityReport {
        c_out: out,
        c_roc: measured.roc,
        c_auc: measured.auc,
        c_test: particles * (out + measured.roc + measured.auc),
    }
}

/// Counts the operations of one ROC construction and integration.
pub fn measure_ops(scores: &[f64], labels: &[u8]) -> Result<OpCount> {
    let (roc, roc_ops) = empirical_roc_counted(scores, labels)?;
    let (_, auc_ops) = auc_counted(&roc);
    Ok(OpCount {
        roc: roc_ops,
        auc: auc_ops,
    })
}

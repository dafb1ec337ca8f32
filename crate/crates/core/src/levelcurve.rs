//! The level curve `|z^alpha (1 - z)| = c` through the crossing point
//! `w0 = alpha/(alpha+1)`, traced as the level line `Re psi = log c`, and
//! distances from point sets to its arcs.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flows::{self, ClassifyOptions, FlowError, Region};
use crate::kernel::{Alpha, BranchTrackedValue, KernelError};
use crate::saddle::level_constant;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("resolution must be positive and finite, got {0}")]
    InvalidResolution(f64),
    #[error("no arc matches the selection")]
    EmptySelection,
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// How an arc ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArcEnd {
    /// Returned to the crossing point.
    Closed,
    /// Reached the negative real axis, where principal `z^alpha` jumps
    /// (complex alpha only).
    BranchCut,
    /// Left the disc `|z| <= max_radius`.
    Escaped,
    /// Corrector failure or length limit; the arc is partial.
    Truncated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelArc {
    pub points: Vec<Complex64>,
    pub label: Region,
    pub end: ArcEnd,
    /// Unit tangent at the crossing point.
    pub start_direction: Complex64,
}

impl LevelArc {
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCurve {
    pub alpha: Alpha,
    pub constant: f64,
    pub crossing_point: Complex64,
    pub resolution: f64,
    pub arcs: Vec<LevelArc>,
}

impl LevelCurve {
    pub fn in_e_flags(&self) -> Vec<bool> {
        self.arcs.iter().map(|a| a.label == Region::InE).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveOptions {
    /// Arclength step; `None` means `1e-3 |w0|`.
    pub resolution: Option<f64>,
    /// Corrector tolerance on `Re psi - log c`.
    pub corrector_tol: f64,
    pub max_radius: f64,
    pub max_length: f64,
    pub classify: ClassifyOptions,
}

impl Default for CurveOptions {
    fn default() -> Self {
        Self {
            resolution: None,
            corrector_tol: 1e-13,
            max_radius: 1e3,
            max_length: 1e3,
            classify: ClassifyOptions::default(),
        }
    }
}

/// `psi(w) = alpha log w + log(1 - w)` with `log w` continued from `prev`.
fn psi(
    w: Complex64,
    alpha: Complex64,
    prev: &BranchTrackedValue,
) -> Result<(Complex64, BranchTrackedValue), KernelError> {
    let lw = prev.continue_to(w)?;
    let lu = crate::kernel::principal_log(Complex64::new(1.0, 0.0) - w)?;
    Ok((alpha * lw.continued() + lu, lw))
}

fn psi_prime(w: Complex64, alpha: Complex64) -> Complex64 {
    alpha / w - 1.0 / (Complex64::new(1.0, 0.0) - w)
}

fn correct(
    mut w: Complex64,
    alpha: Complex64,
    prev: &BranchTrackedValue,
    target: f64,
    tol: f64,
    max_move: f64,
) -> Option<(Complex64, BranchTrackedValue)> {
    let start = w;
    for _ in 0..20 {
        let (v, lw) = psi(w, alpha, prev).ok()?;
        let r = v.re - target;
        let d = psi_prime(w, alpha);
        let floor = 8.0 * f64::EPSILON * (w.norm() * d.norm() + v.norm());
        if r.abs() <= tol.max(floor) {
            return Some((w, lw));
        }
        w -= d.conj() * (r / d.norm_sqr());
        if (w - start).norm() > max_move {
            return None;
        }
    }
    None
}

/// Trace one branch leaving `w0` along `dir`.
fn trace_branch(
    alpha: Alpha,
    target: f64,
    dir: Complex64,
    h0: f64,
    opts: &CurveOptions,
) -> (Vec<Complex64>, ArcEnd) {
    let a = alpha.as_complex();
    let w0 = alpha.crossing_point();
    let Ok(mut lw) = BranchTrackedValue::principal(w0) else {
        return (vec![w0], ArcEnd::Truncated);
    };
    let mut pts = vec![w0];
    let mut w = w0;
    let mut tangent = dir;
    let mut length = 0.0;
    let mut left = false;
    // First step straight along the local direction, then corrected.
    let mut pred = w0 + dir * h0;
    loop {
        let cap = 0.1 * w.norm().min((Complex64::new(1.0, 0.0) - w).norm());
        let h = h0.min(cap.max(h0 * 1e-3));
        let Some((wn, ln)) = correct(pred, a, &lw, target, opts.corrector_tol, 0.5 * h + 1e-14)
        else {
            return (pts, ArcEnd::Truncated);
        };
        if alpha.zeta() != 0.0 && wn.re < 0.0 && wn.im.signum() != w.im.signum() && w.im != 0.0 {
            return (pts, ArcEnd::BranchCut);
        }
        length += (wn - w).norm();
        w = wn;
        lw = ln;
        pts.push(w);
        let dist0 = (w - w0).norm();
        if dist0 > 5.0 * h0 {
            left = true;
        }
        if left && dist0 < 1.5 * h0 {
            pts.push(w0);
            return (pts, ArcEnd::Closed);
        }
        if w.norm() > opts.max_radius {
            return (pts, ArcEnd::Escaped);
        }
        if length > opts.max_length {
            return (pts, ArcEnd::Truncated);
        }
        let d = psi_prime(w, a);
        let mut t = Complex64::i() * d.conj() / d.norm();
        if (t * tangent.conj()).re < 0.0 {
            t = -t;
        }
        tangent = t;
        let h = h0.min(
            0.1 * w
                .norm()
                .min((Complex64::new(1.0, 0.0) - w).norm())
                .max(h0 * 1e-3),
        );
        pred = w + tangent * h;
    }
}

fn label_arc(
    points: &[Complex64],
    alpha: Alpha,
    opts: &ClassifyOptions,
) -> Result<Region, CurveError> {
    let m = points.len();
    let mut votes = [0usize; 3];
    for k in 1..=5 {
        let p = points[(m * k) / 6];
        match flows::classify_region(p, alpha, opts)?.label {
            Region::InE => votes[0] += 1,
            Region::NotInE => votes[1] += 1,
            Region::Boundary => votes[2] += 1,
        }
    }
    Ok(if votes[0] > votes[1] {
        Region::InE
    } else if votes[1] > votes[0] {
        Region::NotInE
    } else {
        Region::Boundary
    })
}

/// Trace the level curve of `|z^alpha (1 - z)|` at `level_constant(alpha)`.
pub fn trace_level_curve(alpha: Alpha, opts: &CurveOptions) -> Result<LevelCurve, CurveError> {
    let w0 = alpha.crossing_point();
    let h = opts.resolution.unwrap_or(1e-3 * w0.norm());
    if !(h > 0.0 && h.is_finite()) {
        return Err(CurveError::InvalidResolution(h));
    }
    let c = level_constant(alpha);
    let target = c.ln();
    let a = alpha.as_complex();
    // psi''(w0) d^2 purely imaginary.
    let beta = (-(a + 1.0).powi(3) / a).arg();
    let d0 = Complex64::from_polar(1.0, (std::f64::consts::FRAC_PI_2 - beta) / 2.0);
    let dirs: Vec<Complex64> = (0..4).map(|k| d0 * Complex64::i().powi(k)).collect();
    let traced: Vec<(Vec<Complex64>, ArcEnd)> = dirs
        .par_iter()
        .map(|d| trace_branch(alpha, target, *d, h, opts))
        .collect();

    let mut arcs = Vec::new();
    let mut used = [false; 4];
    for i in 0..4 {
        if used[i] {
            continue;
        }
        used[i] = true;
        let (points, end) = &traced[i];
        if *end == ArcEnd::Closed {
            // The loop returns along the reverse of another start direction.
            let m = points.len();
            let back = points[m.saturating_sub(4)] - w0;
            let back = back / back.norm();
            if let Some(j) = (0..4).filter(|&j| !used[j]).max_by(|&x, &y| {
                (dirs[x] * back.conj())
                    .re
                    .total_cmp(&(dirs[y] * back.conj()).re)
            }) {
                used[j] = true;
            }
        }
        let label = label_arc(points, alpha, &opts.classify)?;
        arcs.push(LevelArc {
            points: points.clone(),
            label,
            end: *end,
            start_direction: dirs[i],
        });
    }
    Ok(LevelCurve {
        alpha,
        constant: c,
        crossing_point: w0,
        resolution: h,
        arcs,
    })
}

/// Distance from `p` to the segment `[a, b]`.
pub fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let l = d.norm_sqr();
    if l == 0.0 {
        return (p - a).norm();
    }
    let s = (((p - a) * d.conj()).re / l).clamp(0.0, 1.0);
    (p - (a + d * s)).norm()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distances {
    pub per_point: Vec<f64>,
    pub max: f64,
    pub mean: f64,
}

fn selected(curve: &LevelCurve, restrict_to_e: bool) -> Result<Vec<&LevelArc>, CurveError> {
    let arcs: Vec<&LevelArc> = curve
        .arcs
        .iter()
        .filter(|a| !restrict_to_e || a.label == Region::InE)
        .collect();
    if arcs.is_empty() {
        return Err(CurveError::EmptySelection);
    }
    Ok(arcs)
}

/// Segment-projection distances from `points` to the selected arcs.
pub fn distance_to_curve(
    points: &[Complex64],
    curve: &LevelCurve,
    restrict_to_e: bool,
) -> Result<Distances, CurveError> {
    let arcs = selected(curve, restrict_to_e)?;
    let per_point: Vec<f64> = points
        .par_iter()
        .map(|p| {
            arcs.iter()
                .flat_map(|a| a.points.windows(2))
                .map(|w| segment_distance(*p, w[0], w[1]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let max = per_point.iter().cloned().fold(0.0, f64::max);
    let mean = if per_point.is_empty() {
        0.0
    } else {
        per_point.iter().sum::<f64>() / per_point.len() as f64
    };
    Ok(Distances {
        per_point,
        max,
        mean,
    })
}

/// Largest gap, as a fraction of total arclength, between the arclength
/// parameters of the nearest arc points to `points` on the selected arcs.
pub fn coverage_gap(
    points: &[Complex64],
    curve: &LevelCurve,
    restrict_to_e: bool,
) -> Result<f64, CurveError> {
    let arcs = selected(curve, restrict_to_e)?;
    let mut offsets = Vec::new();
    let mut total = 0.0;
    for a in &arcs {
        offsets.push(total);
        total += a.length();
    }
    let mut params: Vec<f64> = points
        .iter()
        .map(|p| {
            let mut best = (f64::INFINITY, 0.0);
            for (ai, a) in arcs.iter().enumerate() {
                let mut s = offsets[ai];
                for w in a.points.windows(2) {
                    let d = segment_distance(*p, w[0], w[1]);
                    if d < best.0 {
                        best = (d, s);
                    }
                    s += (w[1] - w[0]).norm();
                }
            }
            best.1
        })
        .collect();
    if params.is_empty() || total == 0.0 {
        return Ok(1.0);
    }
    params.sort_by(f64::total_cmp);
    let mut gap = params[0] + (total - params[params.len() - 1]);
    for w in params.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    Ok(gap / total)
}

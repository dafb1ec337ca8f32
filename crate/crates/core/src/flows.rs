//! Steepest ascent and descent paths of `phi` (t-plane) and of
//! `psi(w) = alpha log w + log(1 - w)` (w-plane, `z = 1`).
//!
//! Paths are integrated as the unit-speed gradient flow
//! `dt/ds = +-conj(phi'(t)) / |phi'(t)|` with an embedded Bogacki–Shampine
//! 3(2) predictor. After each accepted step a Newton corrector pulls the point
//! back onto the level line `Im phi = const`, with `phi` continued along the
//! path. Step lengths are capped by a fraction of the distance to the branch
//! points and to the saddle, which is what lets a trace follow the spiral
//! into `t = 0` (when `Im alpha != 0`) down to the stop radius.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{self, Alpha, KernelError, PhiBranch, PhiValue};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("start point {start} lies within {radius:e} of a branch point")]
    StartAtBranchPoint { start: Complex64, radius: f64 },
    #[error("start point {start} is the saddle point; the flow direction is undefined")]
    StartAtSaddle { start: Complex64 },
    #[error("{0} is not a valid point for region classification")]
    InvalidPoint(Complex64),
    #[error("corrector diverged at {at} after arclength {arclength}: residual {residual:e}")]
    CorrectorDiverged {
        at: Complex64,
        arclength: f64,
        residual: f64,
    },
    #[error("descent from {z} was truncated at {last} before reaching a branch point")]
    Indeterminate { z: Complex64, last: Complex64 },
    #[error("half-plane certificate requires Re z <= 0, got {0}")]
    HalfplanePrecondition(Complex64),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Ascent,
    Descent,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Ascent => 1.0,
            Direction::Descent => -1.0,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Ascent => "ascent",
            Direction::Descent => "descent",
        })
    }
}

/// Why a trace stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Terminal {
    /// Reached the branch point `0`.
    Endpoint0,
    /// Reached the branch point `1/z` (`w = 1` in the w-plane).
    Endpoint1,
    EndpointInfinity,
    SaddleReached,
    Truncated,
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Terminal::Endpoint0 => "Endpoint0",
            Terminal::Endpoint1 => "Endpoint1",
            Terminal::EndpointInfinity => "EndpointInfinity",
            Terminal::SaddleReached => "SaddleReached",
            Terminal::Truncated => "Truncated",
        })
    }
}

/// Stop conditions for [`trace_flow`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    /// Radius around `0` and `1/z` that counts as arrival.
    pub branch_radius: f64,
    /// Radius around the saddle that counts as arrival (only after the
    /// trace has been farther away than twice this radius).
    pub saddle_radius: f64,
    pub max_arclength: f64,
    /// `|t|` beyond which an ascent has escaped; `None` means `10 (1 + |1/z|)`.
    pub infinity_radius: Option<f64>,
    pub max_steps: usize,
    /// Step cap as a fraction of the distance to the nearest special point.
    pub step_fraction: f64,
    /// Absolute tolerance of the `Im phi` corrector.
    pub corrector_tol: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            branch_radius: 1e-8,
            saddle_radius: 1e-6,
            max_arclength: 1e4,
            infinity_radius: None,
            max_steps: 200_000,
            step_fraction: 0.1,
            corrector_tol: 1e-12,
        }
    }
}

/// A traced steepest path with its continued phase values.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTrace {
    pub z: Complex64,
    pub alpha: Alpha,
    pub direction: Direction,
    pub terminal: Terminal,
    pub points: Vec<Complex64>,
    /// Continuation state of `phi` at each point.
    pub phases: Vec<PhiBranch>,
    /// Continued `phi` at each point.
    pub values: Vec<Complex64>,
    pub arclength: f64,
    /// Smallest distance to the saddle seen along the trace.
    pub closest_saddle_approach: f64,
}

impl PathTrace {
    pub fn last(&self) -> Complex64 {
        *self
            .points
            .last()
            .expect("trace has at least its start point")
    }

    /// Largest deviation of `Im phi` from its value at the first point.
    pub fn im_phase_drift(&self) -> f64 {
        let c = self.values[0].im;
        self.values
            .iter()
            .map(|v| (v.im - c).abs())
            .fold(0.0, f64::max)
    }

    /// Points mapped by `t -> scale * t` (the t-plane to w-plane rescaling).
    pub fn scaled_points(&self, scale: Complex64) -> Vec<Complex64> {
        self.points.iter().map(|p| p * scale).collect()
    }

    pub fn to_json(&self) -> PathTraceJson {
        PathTraceJson {
            direction: self.direction.to_string(),
            terminal: self.terminal.to_string(),
            points: self.points.iter().map(|p| [p.re, p.im]).collect(),
            im_phase_drift: self.im_phase_drift(),
        }
    }
}

/// Serialized form `{"direction", "terminal", "points", "im_phase_drift"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathTraceJson {
    pub direction: String,
    pub terminal: String,
    pub points: Vec<[f64; 2]>,
    pub im_phase_drift: f64,
}

struct Field {
    z: Complex64,
    alpha: Alpha,
    sign: f64,
}

impl Field {
    fn eval(&self, t: Complex64) -> Result<Complex64, KernelError> {
        let d = kernel::phi_prime(t, self.z, self.alpha)?;
        let m = d.norm();
        if m == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(d.conj() * (self.sign / m))
    }
}

/// Pull `t` back onto `Im phi = target` along the gradient of `Im phi`.
fn correct(
    mut t: Complex64,
    z: Complex64,
    alpha: Alpha,
    branch: &PhiBranch,
    target: f64,
    tol: f64,
    max_move: f64,
) -> Option<(Complex64, PhiValue)> {
    let start = t;
    let mut v = kernel::phi(t, z, alpha, branch).ok()?;
    let mut best = (t, v, f64::INFINITY);
    for _ in 0..12 {
        let d = kernel::phi_prime(t, z, alpha).ok()?;
        let r = v.value.im - target;
        // Im phi cannot be resolved below one ulp of t times |phi'|.
        let floor = 8.0 * f64::EPSILON * (t.norm() * d.norm() + v.value.norm());
        if r.abs() <= tol.max(floor) {
            return Some((t, v));
        }
        if r.abs() < best.2 {
            best = (t, v, r.abs());
        }
        // grad Im phi = i conj(phi')
        let step = -Complex64::i() * d.conj() * (r / d.norm_sqr());
        t += step;
        if (t - start).norm() > max_move {
            return None;
        }
        v = kernel::phi(t, z, alpha, &v.branch).ok()?;
    }
    let d = kernel::phi_prime(best.0, z, alpha).ok()?;
    let floor = 8.0 * f64::EPSILON * (best.0.norm() * d.norm() + best.1.value.norm());
    (best.2 <= 100.0 * tol.max(floor)).then_some((best.0, best.1))
}

/// Trace a steepest ascent/descent path of `phi` (parameter `z`) from `start`.
pub fn trace_flow(
    start: Complex64,
    z: Complex64,
    alpha: Alpha,
    direction: Direction,
    stop: &StopRule,
) -> Result<PathTrace, FlowError> {
    let v0 = kernel::phi_principal(start, z, alpha)?;
    trace_from(start, v0, None, z, alpha, direction, stop)
}

/// Continue a trace from `start`, whose `phi` state is `v0`. If `target_im`
/// is given the corrector aims at that value instead of `Im phi(start)`.
fn trace_from(
    start: Complex64,
    v0: PhiValue,
    target_im: Option<f64>,
    z: Complex64,
    alpha: Alpha,
    direction: Direction,
    stop: &StopRule,
) -> Result<PathTrace, FlowError> {
    let p = z.inv();
    let a = alpha.as_complex();
    let t0 = a / ((a + 1.0) * z);
    let eps0 = stop.branch_radius;
    if start.norm() < eps0 || (start - p).norm() < eps0 {
        return Err(FlowError::StartAtBranchPoint {
            start,
            radius: eps0,
        });
    }
    if kernel::phi_prime(start, z, alpha)?.norm() == 0.0 {
        return Err(FlowError::StartAtSaddle { start });
    }
    let r_inf = stop.infinity_radius.unwrap_or(10.0 * (1.0 + p.norm()));
    let target = target_im.unwrap_or(v0.value.im);
    let field = Field {
        z,
        alpha,
        sign: direction.sign(),
    };

    let mut points = vec![start];
    let mut phases = vec![v0.branch];
    let mut values = vec![v0.value];
    let mut t = start;
    let mut cur = v0;
    let mut s = 0.0;
    let mut closest = (start - t0).norm();
    let mut left_saddle = closest > 2.0 * stop.saddle_radius;
    let mut h = stop.step_fraction * start.norm().min((start - p).norm()).min(closest);
    let mut k1 = field.eval(t)?;
    let mut terminal = Terminal::Truncated;
    let mut rejects = 0usize;

    for _ in 0..stop.max_steps {
        let dist = t.norm().min((t - p).norm()).min((t - t0).norm());
        let cap = stop.step_fraction * dist;
        h = h.min(cap).max(cap * 1e-6);

        let k2 = field.eval(t + k1 * (0.5 * h))?;
        let k3 = field.eval(t + k2 * (0.75 * h))?;
        let pred = t + (k1 * (2.0 / 9.0) + k2 * (1.0 / 3.0) + k3 * (4.0 / 9.0)) * h;
        let k4 = field.eval(pred)?;
        let err = ((k1 * (-5.0 / 72.0) + k2 * (1.0 / 12.0) + k3 * (1.0 / 9.0) + k4 * (-0.125)) * h)
            .norm();
        let tol = 1e-9 * dist.max(1e-300);
        if err > tol && h > cap * 1e-6 {
            h *= (0.9 * (tol / err).powf(1.0 / 3.0)).clamp(0.1, 0.5);
            continue;
        }
        let Some((t_new, v_new)) = correct(
            pred,
            z,
            alpha,
            &cur.branch,
            target,
            stop.corrector_tol * (1.0 + target.abs()),
            0.5 * h + 1e-300,
        ) else {
            rejects += 1;
            if rejects > 40 {
                return Err(FlowError::CorrectorDiverged {
                    at: t,
                    arclength: s,
                    residual: (cur.value.im - target).abs(),
                });
            }
            h *= 0.25;
            continue;
        };
        rejects = 0;
        s += (t_new - t).norm();
        t = t_new;
        cur = v_new;
        points.push(t);
        phases.push(cur.branch);
        values.push(cur.value);
        k1 = field.eval(t)?;

        let ds = (t - t0).norm();
        closest = closest.min(ds);
        if ds > 2.0 * stop.saddle_radius {
            left_saddle = true;
        }
        if t.norm() < eps0 {
            terminal = Terminal::Endpoint0;
            break;
        }
        if (t - p).norm() < eps0 {
            terminal = Terminal::Endpoint1;
            break;
        }
        if t.norm() > r_inf {
            terminal = Terminal::EndpointInfinity;
            break;
        }
        if left_saddle && ds < stop.saddle_radius {
            terminal = Terminal::SaddleReached;
            break;
        }
        if s > stop.max_arclength {
            break;
        }
        if err > 0.0 {
            h *= (0.9 * (tol / err).powf(1.0 / 3.0)).clamp(0.2, 4.0);
        } else {
            h *= 4.0;
        }
    }

    Ok(PathTrace {
        z,
        alpha,
        direction,
        terminal,
        points,
        phases,
        values,
        arclength: s,
        closest_saddle_approach: closest,
    })
}

/// The two descent and two ascent tangent directions at the saddle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleDirections {
    pub descent: [Complex64; 2],
    pub ascent: [Complex64; 2],
}

/// Directions from the local quadratic model `phi ~ phi(t0) + phi''(t0) d^2 / 2`:
/// descent where `phi'' d^2` is real negative, ascent where it is real positive.
pub fn saddle_directions(z: Complex64, alpha: Alpha) -> Result<SaddleDirections, FlowError> {
    if z.norm() == 0.0 {
        return Err(FlowError::InvalidPoint(z));
    }
    let a = alpha.as_complex();
    let t0 = a / ((a + 1.0) * z);
    let beta = kernel::phi_second(t0, z, alpha)?.arg();
    let d = Complex64::from_polar(1.0, (std::f64::consts::PI - beta) / 2.0);
    let u = Complex64::from_polar(1.0, -beta / 2.0);
    Ok(SaddleDirections {
        descent: [d, -d],
        ascent: [u, -u],
    })
}

/// Trace from the saddle along `dir`, starting a small offset away. The
/// returned trace begins at `t0` itself and the corrector targets
/// `Im phi(t0)` on the branch given by `v_t0`.
pub fn trace_from_saddle(
    z: Complex64,
    alpha: Alpha,
    v_t0: PhiValue,
    dir: Complex64,
    direction: Direction,
    stop: &StopRule,
) -> Result<PathTrace, FlowError> {
    let a = alpha.as_complex();
    let t0 = a / ((a + 1.0) * z);
    let offset = 1e-5 * t0.norm().min((t0 - z.inv()).norm());
    let start = t0 + dir * offset;
    let v_start = kernel::phi(start, z, alpha, &v_t0.branch)?;
    let mut tr = trace_from(
        start,
        v_start,
        Some(v_t0.value.im),
        z,
        alpha,
        direction,
        stop,
    )?;
    tr.points.insert(0, t0);
    tr.phases.insert(0, v_t0.branch);
    tr.values.insert(0, v_t0.value);
    tr.arclength += offset;
    tr.closest_saddle_approach = 0.0;
    Ok(tr)
}

impl PathTrace {
    /// Move the `log t` branch by `turns` full turns.
    pub fn shift_log_t(&mut self, turns: i64) {
        if turns == 0 {
            return;
        }
        let dl = std::f64::consts::TAU * turns as f64;
        let dphi = self.alpha.as_complex() * Complex64::new(0.0, dl);
        for b in &mut self.phases {
            b.log_t.imag_phase += dl;
        }
        for v in &mut self.values {
            *v += dphi;
        }
    }
}

/// The deformed contour for `z` in `E`: the two steepest descent paths from
/// the saddle (to `0` and to `1/z`) and the path `Delta` from `t = 1` down to
/// `1/z`, on one analytic continuation of `phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct DescentContour {
    pub to_zero: PathTrace,
    pub to_pole: PathTrace,
    pub delta: PathTrace,
    /// Turns added to the principal `log t0` so that `to_pole` and `delta`
    /// agree at `1/z`.
    pub saddle_winding: i64,
}

impl DescentContour {
    /// Continued `phi` at the saddle on the contour's branch.
    pub fn phi_at_saddle(&self) -> PhiValue {
        PhiValue {
            value: self.to_pole.values[0],
            branch: self.to_pole.phases[0],
        }
    }

    /// Continued `log t` at the end of `Delta`, extrapolated to `t = 1/z`.
    pub fn junction_log_t(&self) -> Complex64 {
        let b = self.delta.phases.last().expect("nonempty trace").log_t;
        let end = self.delta.last();
        b.continued() + kernel::principal_log(self.delta.z.inv() / end).unwrap_or_default()
    }
}

/// Build the contour of [`DescentContour`]. Fails with `Indeterminate` when
/// `Delta` does not reach `1/z`, which happens exactly when `z` is not in `E`.
pub fn descent_contour(
    z: Complex64,
    alpha: Alpha,
    stop: &StopRule,
) -> Result<DescentContour, FlowError> {
    if z.norm() == 0.0 {
        return Err(FlowError::InvalidPoint(z));
    }
    let one = Complex64::new(1.0, 0.0);
    let delta = if (z - one).norm() < stop.branch_radius {
        // t = 1 already is the branch point 1/z; Delta is a single point.
        let log_t = kernel::BranchTrackedValue::principal(one)?;
        let log_u = kernel::BranchTrackedValue {
            value: Complex64::new(f64::NEG_INFINITY, 0.0),
            imag_phase: 0.0,
        };
        PathTrace {
            z,
            alpha,
            direction: Direction::Descent,
            terminal: Terminal::Endpoint1,
            points: vec![one],
            phases: vec![PhiBranch { log_t, log_u }],
            values: vec![Complex64::new(f64::NEG_INFINITY, 0.0)],
            arclength: 0.0,
            closest_saddle_approach: (one - alpha.crossing_point() / z).norm(),
        }
    } else {
        trace_flow(one, z, alpha, Direction::Descent, stop)?
    };
    if delta.terminal != Terminal::Endpoint1 {
        return Err(FlowError::Indeterminate {
            z,
            last: delta.last(),
        });
    }
    let a = alpha.as_complex();
    let t0 = a / ((a + 1.0) * z);
    let v0 = kernel::phi_principal(t0, z, alpha)?;
    let dirs = saddle_directions(z, alpha)?;
    let mut to_zero = None;
    let mut to_pole = None;
    for d in dirs.descent {
        let tr = trace_from_saddle(z, alpha, v0, d, Direction::Descent, stop)?;
        match tr.terminal {
            Terminal::Endpoint0 => to_zero = Some(tr),
            Terminal::Endpoint1 => to_pole = Some(tr),
            _ => return Err(FlowError::Indeterminate { z, last: tr.last() }),
        }
    }
    let (Some(mut to_zero), Some(mut to_pole)) = (to_zero, to_pole) else {
        return Err(FlowError::Indeterminate { z, last: t0 });
    };
    let mut contour = DescentContour {
        to_zero: to_zero.clone(),
        to_pole: to_pole.clone(),
        delta,
        saddle_winding: 0,
    };
    let end = to_pole.phases.last().expect("nonempty trace").log_t;
    let pole_log =
        end.continued() + kernel::principal_log(z.inv() / to_pole.last()).unwrap_or_default();
    let turns =
        ((contour.junction_log_t().im - pole_log.im) / std::f64::consts::TAU).round() as i64;
    to_zero.shift_log_t(turns);
    to_pole.shift_log_t(turns);
    contour.to_zero = to_zero;
    contour.to_pole = to_pole;
    contour.saddle_winding = turns;
    Ok(contour)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    InE,
    NotInE,
    Boundary,
}

/// Classification of a point against the separatrices of `psi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionLabel {
    pub label: Region,
    /// Closest approach of the descent path from `z` to the saddle
    /// `alpha/(alpha+1)`. Points on a separatrix flow into the saddle, so this
    /// shrinks to zero as `z` approaches the boundary of `E`.
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub boundary_tol: f64,
    pub stop: StopRule,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            boundary_tol: 1e-6,
            stop: StopRule::default(),
        }
    }
}

fn classify_once(
    z: Complex64,
    alpha: Alpha,
    opts: &ClassifyOptions,
) -> Result<RegionLabel, FlowError> {
    let one = Complex64::new(1.0, 0.0);
    let w0 = alpha.crossing_point();
    let d0 = (z - w0).norm();
    if d0 < opts.boundary_tol {
        return Ok(RegionLabel {
            label: Region::Boundary,
            margin: d0,
        });
    }
    let stop = StopRule {
        saddle_radius: opts.boundary_tol,
        ..opts.stop
    };
    let tr = trace_flow(z, one, alpha, Direction::Descent, &stop)?;
    let margin = tr.closest_saddle_approach;
    let label = match tr.terminal {
        _ if margin < opts.boundary_tol => Region::Boundary,
        Terminal::SaddleReached => Region::Boundary,
        Terminal::Endpoint1 => Region::InE,
        Terminal::Endpoint0 => Region::NotInE,
        Terminal::EndpointInfinity | Terminal::Truncated => {
            return Err(FlowError::Indeterminate { z, last: tr.last() })
        }
    };
    Ok(RegionLabel { label, margin })
}

/// Is `z` in `E`, the basin of `w = 1` under the descent flow of `psi`?
///
/// Paths that pass within ten boundary tolerances of the saddle are traced a
/// second time with a tenfold smaller step cap; if the two runs land on
/// different branch points the point is reported as `Boundary`.
pub fn classify_region(
    z: Complex64,
    alpha: Alpha,
    opts: &ClassifyOptions,
) -> Result<RegionLabel, FlowError> {
    if z.norm() == 0.0 || !z.re.is_finite() || !z.im.is_finite() {
        return Err(FlowError::InvalidPoint(z));
    }
    if z.norm() < opts.stop.branch_radius || (z - 1.0).norm() < opts.stop.branch_radius {
        let label = if z.norm() < 0.5 {
            Region::NotInE
        } else {
            Region::InE
        };
        return Ok(RegionLabel {
            label,
            margin: (z - alpha.crossing_point()).norm(),
        });
    }
    let first = classify_once(z, alpha, opts)?;
    if first.label == Region::Boundary || first.margin > 10.0 * opts.boundary_tol {
        return Ok(first);
    }
    let fine = ClassifyOptions {
        stop: StopRule {
            step_fraction: opts.stop.step_fraction * 0.1,
            ..opts.stop
        },
        ..*opts
    };
    let second = classify_once(z, alpha, &fine)?;
    if second.label != first.label {
        return Ok(RegionLabel {
            label: Region::Boundary,
            margin: first.margin.min(second.margin),
        });
    }
    Ok(first)
}

/// The two steepest ascent paths of `psi` leaving the saddle
/// `alpha/(alpha+1)`; together they separate the basins of `0` and `1`.
pub fn separatrices(alpha: Alpha, stop: &StopRule) -> Result<[PathTrace; 2], FlowError> {
    let one = Complex64::new(1.0, 0.0);
    let dirs = saddle_directions(one, alpha)?;
    let w0 = alpha.crossing_point();
    let v0 = kernel::phi_principal(w0, one, alpha)?;
    let a = trace_from_saddle(one, alpha, v0, dirs.ascent[0], Direction::Ascent, stop)?;
    let b = trace_from_saddle(one, alpha, v0, dirs.ascent[1], Direction::Ascent, stop)?;
    Ok([a, b])
}

/// Certificate that the segment `[0, z]` ascends for `psi` when `Re z <= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfplaneCertificate {
    /// `E(s) = c0 + c1 s + c2 s^2 + c3 s^3`.
    pub coefficients: [f64; 4],
    /// Real stationary points of `E` with the value of `E` there.
    pub stationary_points: Vec<(f64, f64)>,
    /// Horizon `S`, at or beyond the last stationary point.
    pub horizon: f64,
    /// Minimum of `E` over `[0, S]`.
    pub min_value: f64,
    pub certified: bool,
}

impl HalfplaneCertificate {
    pub fn eval(&self, s: f64) -> f64 {
        let [c0, c1, c2, c3] = self.coefficients;
        ((c3 * s + c2) * s + c1) * s + c0
    }
}

/// `E(s) = eta - 2 eta x s + (eta (x^2 + y^2) - x) s^2 + (x^2 + y^2) s^3`
/// for `z = x + iy` with `x <= 0`, checked nonnegative on `[0, S]` through
/// its closed-form stationary points.
pub fn halfplane_zero_free_check(
    z: Complex64,
    alpha: Alpha,
) -> Result<HalfplaneCertificate, FlowError> {
    if z.re > 0.0 {
        return Err(FlowError::HalfplanePrecondition(z));
    }
    let eta = alpha.eta();
    let (x, r2) = (z.re, z.norm_sqr());
    let coefficients = [eta, -2.0 * eta * x, eta * r2 - x, r2];
    let [_, c1, c2, c3] = coefficients;
    // E'(s) = c1 + 2 c2 s + 3 c3 s^2
    let mut roots = Vec::new();
    if c3 != 0.0 {
        let disc = 4.0 * c2 * c2 - 12.0 * c3 * c1;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            roots.push((-2.0 * c2 - sq) / (6.0 * c3));
            roots.push((-2.0 * c2 + sq) / (6.0 * c3));
        }
    } else if c2 != 0.0 {
        roots.push(-c1 / (2.0 * c2));
    }
    let mut cert = HalfplaneCertificate {
        coefficients,
        stationary_points: Vec::new(),
        horizon: 1.0,
        min_value: 0.0,
        certified: false,
    };
    cert.stationary_points = roots.iter().map(|&s| (s, cert.eval(s))).collect();
    cert.horizon = roots.iter().cloned().fold(1.0, f64::max);
    let mut candidates = vec![0.0, cert.horizon];
    candidates.extend(roots.iter().filter(|s| **s >= 0.0 && **s <= cert.horizon));
    cert.min_value = candidates
        .iter()
        .map(|&s| cert.eval(s))
        .fold(f64::INFINITY, f64::min);
    // Past the horizon E is monotone (cubic with c3 >= 0, or constant).
    cert.certified = cert.min_value >= 0.0;
    Ok(cert)
}

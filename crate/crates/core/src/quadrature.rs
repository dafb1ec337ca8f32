//! The Euler integral `int_0^1 t^{alpha n} (1 - z t)^n dt` and its split
//! `I_1 + I_2` along the deformed contour `0 -> t0 -> 1/z -> 1`.
//!
//! Values are carried in log scale: each integrand is evaluated as
//! `exp(n phi(t) - C)` for a shift `C` (usually `n phi(t0)`), and the shift is
//! added back into [`ContourIntegral::log_modulus`] and
//! [`ContourIntegral::phase`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flows::{self, FlowError, Region, StopRule};
use crate::kernel::{self, Alpha, BranchTrackedValue, KernelError, PhiBranch};
use crate::saddle::ScaledComplex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("requested relative tolerance {requested:e} not reached; achieved {achieved:e}")]
    Accuracy { requested: f64, achieved: f64 },
    #[error("z = {z} is not in E (classified {label:?})")]
    NotInE { z: Complex64, label: Region },
    #[error("continuation of the implicit path stalled at u = {u}, t = {t}")]
    Continuation { u: f64, t: Complex64 },
    #[error("truncation radius must satisfy 0 < epsilon < |t0|/2, got {0}")]
    InvalidEpsilon(f64),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Which contour an integral was computed on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContourId {
    /// `[0, 1]`, with `t = e^{-u}` on `(0, split]`.
    UnitSegment { split: f64 },
    /// Steepest descent `0 -> t0 -> 1/z`, cut at the first point with
    /// `|t| <= epsilon`; the piece `[0, truncated_at]` enters the error only.
    SteepestDescent {
        epsilon: f64,
        truncated_at: [f64; 2],
        saddle_winding: i64,
        chords: usize,
    },
    /// The implicit path `t^alpha (1 - z t) = s (1 - z)`, `s` from 1 to 0.
    ImplicitDelta { u_min: f64, nodes: usize },
    /// `int_0^1 f(s) s^{n-1} ds`.
    LemmaSegment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourIntegral {
    pub log_modulus: f64,
    pub phase: f64,
    /// Natural log of the absolute error bound.
    pub abs_error_bound: f64,
    pub contour_id: ContourId,
}

impl ContourIntegral {
    pub fn scaled(&self) -> ScaledComplex {
        ScaledComplex {
            log_modulus: self.log_modulus,
            phase: self.phase,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        self.scaled().to_complex()
    }

    pub fn abs_error(&self) -> f64 {
        self.abs_error_bound.exp()
    }

    /// Error bound relative to the value.
    pub fn rel_error(&self) -> f64 {
        (self.abs_error_bound - self.log_modulus).exp()
    }
}

/// `ln(e^a + e^b)`.
pub fn log_add(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_evals: 2_000_000,
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct PanelResult {
    value: Complex64,
    err: f64,
    l1: f64,
}

fn gk15<E>(
    f: &mut impl FnMut(usize, f64) -> Result<Complex64, E>,
    id: usize,
    a: f64,
    b: f64,
) -> Result<PanelResult, E> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(id, c)?;
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut l1 = fc.norm() * WGK[7];
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(id, c - x)?;
        let f2 = f(id, c + x)?;
        k += (f1 + f2) * WGK[j];
        l1 += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            g += (f1 + f2) * WG[j / 2];
        }
    }
    Ok(PanelResult {
        value: k * h,
        err: ((k - g) * h).norm(),
        l1: l1 * h.abs(),
    })
}

struct Queued {
    id: usize,
    a: f64,
    b: f64,
    r: PanelResult,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.r.err == other.r.err
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.r.err.total_cmp(&other.r.err)
    }
}

/// Result of [`adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Adaptive {
    pub value: Complex64,
    pub err: f64,
    pub l1: f64,
    /// Whether `err` met the relative target (or the rounding floor).
    pub converged: bool,
}

/// Globally adaptive G7K15 over a set of panels `(id, a, b)`; the integrand
/// sees the id of the initial panel a node belongs to.
pub(crate) fn adaptive<E>(
    mut f: impl FnMut(usize, f64) -> Result<Complex64, E>,
    panels: &[(usize, f64, f64)],
    rel_tol: f64,
    max_evals: usize,
) -> Result<Adaptive, E> {
    let mut heap = BinaryHeap::new();
    let (mut value, mut err, mut l1) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
    let mut evals = 0;
    for &(id, a, b) in panels {
        let r = gk15(&mut f, id, a, b)?;
        evals += 15;
        value += r.value;
        err += r.err;
        l1 += r.l1;
        heap.push(Queued { id, a, b, r });
    }
    let target = |v: Complex64, l1: f64| (rel_tol * v.norm()).max(64.0 * f64::EPSILON * l1);
    while err > target(value, l1) && evals < max_evals {
        let Some(q) = heap.pop() else { break };
        let m = 0.5 * (q.a + q.b);
        if m <= q.a || m >= q.b {
            heap.push(q);
            break;
        }
        let left = gk15(&mut f, q.id, q.a, m)?;
        let right = gk15(&mut f, q.id, m, q.b)?;
        evals += 30;
        value += left.value + right.value - q.r.value;
        err += left.err + right.err - q.r.err;
        l1 += left.l1 + right.l1 - q.r.l1;
        heap.push(Queued {
            id: q.id,
            a: q.a,
            b: m,
            r: left,
        });
        heap.push(Queued {
            id: q.id,
            a: m,
            b: q.b,
            r: right,
        });
    }
    // Recompute sums to shed accumulated update rounding.
    let (mut v2, mut e2, mut l2) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
    for q in heap.iter() {
        v2 += q.r.value;
        e2 += q.r.err;
        l2 += q.r.l1;
    }
    let converged = e2 <= target(v2, l2);
    Ok(Adaptive {
        value: v2,
        // Summation rounding is not seen by the Kronrod estimate.
        err: e2 + 64.0 * f64::EPSILON * l2,
        l1: l2,
        converged,
    })
}

fn check(a: &Adaptive, rel_tol: f64) -> Result<(), QuadError> {
    if a.converged {
        Ok(())
    } else {
        Err(QuadError::Accuracy {
            requested: rel_tol,
            achieved: a.err / a.value.norm(),
        })
    }
}

fn log_one_minus(z: Complex64, t: Complex64) -> Option<Complex64> {
    let u = Complex64::new(1.0, 0.0) - z * t;
    (u.norm() > 0.0).then(|| u.ln())
}

/// `int_0^1 t^{alpha n} (1 - z t)^n dt`, principal `t^{alpha n}`. Multiply by
/// `alpha n + 1` to compare with `p_n(z)`.
pub fn euler_integral(n: usize, alpha: Alpha, z: Complex64) -> Result<ContourIntegral, QuadError> {
    euler_integral_with(n, alpha, z, &QuadOptions::default())
}

pub fn euler_integral_with(
    n: usize,
    alpha: Alpha,
    z: Complex64,
    opts: &QuadOptions,
) -> Result<ContourIntegral, QuadError> {
    let nf = n as f64;
    let a = alpha.as_complex();
    let eta = alpha.eta();
    let split = 0.5;
    let mut shift = f64::NEG_INFINITY;
    let mut min_u = f64::INFINITY;
    for j in 1..=256 {
        let t = j as f64 / 256.0;
        let u = (Complex64::new(1.0, 0.0) - z * t).norm();
        min_u = min_u.min(u);
        shift = shift.max(nf * (eta * t.ln() + u.max(1e-300).ln()));
    }
    if n == 0 {
        shift = 0.0;
    }
    let integrand_t = |t: f64| -> Complex64 {
        match log_one_minus(z, Complex64::new(t, 0.0)) {
            Some(l) => ((a * t.ln() + l) * nf - shift).exp(),
            None => Complex64::new(0.0, 0.0),
        }
    };
    // t = e^{-u}
    let integrand_u = |u: f64| -> Complex64 {
        let t = (-u).exp();
        match log_one_minus(z, Complex64::new(t, 0.0)) {
            Some(l) => ((-a * u + l) * nf - u - shift).exp(),
            None => Complex64::new(0.0, 0.0),
        }
    };
    let zn = z.norm();
    let u0 = -f64::ln(split);
    let growth = nf * (1.0 + zn).ln();
    let u_max = u0.max((60.0 + growth - shift) / (eta * nf + 1.0)) + 1.0;
    let tail_log = -(eta * nf + 1.0) * u_max + nf * (1.0 + zn * (-u_max).exp()).ln()
        - shift
        - (eta * nf + 1.0).ln();

    let vel_u = nf * (alpha.zeta().abs() + zn) + 1.0;
    let nu = (((u_max - u0) * vel_u / std::f64::consts::PI).ceil() as usize).clamp(1, 100_000);
    let vel_t = nf * (2.0 * a.norm() + zn / min_u.max(1e-3)) + 1.0;
    let nt = (((1.0 - split) * vel_t / std::f64::consts::PI).ceil() as usize).clamp(1, 100_000);
    let mut panels = Vec::with_capacity(nu + nt);
    for i in 0..nu {
        let l = u0 + (u_max - u0) * i as f64 / nu as f64;
        let r = u0 + (u_max - u0) * (i + 1) as f64 / nu as f64;
        panels.push((0, l, r));
    }
    for i in 0..nt {
        let l = split + (1.0 - split) * i as f64 / nt as f64;
        let r = split + (1.0 - split) * (i + 1) as f64 / nt as f64;
        panels.push((1, l, r));
    }
    let res = adaptive(
        |id, x| -> Result<Complex64, QuadError> {
            Ok(if id == 0 {
                integrand_u(x)
            } else {
                integrand_t(x)
            })
        },
        &panels,
        opts.rel_tol,
        opts.max_evals,
    )?;
    check(&res, opts.rel_tol)?;
    let v = ScaledComplex::from_scaled(res.value, shift);
    Ok(ContourIntegral {
        log_modulus: v.log_modulus,
        phase: v.phase,
        abs_error_bound: log_add(res.err.ln() + shift, tail_log + shift),
        contour_id: ContourId::UnitSegment { split },
    })
}

/// Bound on `|int_0^{t_eps} g(t)^n dt|` along the ray to `t_eps`, with
/// `log t_eps` on the contour's branch:
/// `|t_eps^{alpha n}| (1 + |z| |t_eps|)^n |t_eps| / (eta n + 1)`.
pub fn truncation_bound_log(n: usize, alpha: Alpha, z: Complex64, log_t_eps: Complex64) -> f64 {
    let nf = n as f64;
    let r = log_t_eps.re.exp();
    nf * (alpha.as_complex() * log_t_eps).re + nf * (1.0 + z.norm() * r).ln() + log_t_eps.re
        - (alpha.eta() * nf + 1.0).ln()
}

fn require_in_e(z: Complex64, alpha: Alpha) -> Result<(), QuadError> {
    let label = flows::classify_region(z, alpha, &flows::ClassifyOptions::default())?;
    if label.label != Region::InE {
        return Err(QuadError::NotInE {
            z,
            label: label.label,
        });
    }
    Ok(())
}

/// `I_1 = int_0^{1/z} g(t)^n dt` along the steepest descent paths through
/// `t0`, on the branch of `log t` continued from `t = 1` along `Delta`.
pub fn integrate_i1(
    n: usize,
    alpha: Alpha,
    z: Complex64,
    epsilon: f64,
) -> Result<ContourIntegral, QuadError> {
    integrate_i1_with(n, alpha, z, epsilon, &QuadOptions::default())
}

pub fn integrate_i1_with(
    n: usize,
    alpha: Alpha,
    z: Complex64,
    epsilon: f64,
    opts: &QuadOptions,
) -> Result<ContourIntegral, QuadError> {
    require_in_e(z, alpha)?;
    let a = alpha.as_complex();
    let t0 = a / ((a + 1.0) * z);
    if !(epsilon > 0.0 && epsilon < 0.5 * t0.norm()) {
        return Err(QuadError::InvalidEpsilon(epsilon));
    }
    let stop = StopRule {
        branch_radius: epsilon.min(1e-8),
        ..StopRule::default()
    };
    let contour = flows::descent_contour(z, alpha, &stop)?;
    let nf = n as f64;
    let shift = contour.phi_at_saddle().value * nf;

    // 0 <- t0 reversed, then t0 -> 1/z, then the exact endpoint.
    let cut = contour
        .to_zero
        .points
        .iter()
        .position(|p| p.norm() <= epsilon)
        .unwrap_or(contour.to_zero.points.len() - 1);
    let mut nodes: Vec<(Complex64, BranchTrackedValue)> = (0..=cut)
        .rev()
        .map(|i| (contour.to_zero.points[i], contour.to_zero.phases[i].log_t))
        .collect();
    nodes.extend(
        contour
            .to_pole
            .points
            .iter()
            .zip(&contour.to_pole.phases)
            .skip(1)
            .map(|(p, b)| (*p, b.log_t)),
    );
    let p = z.inv();
    let last = nodes.last().expect("nonempty").1;
    nodes.push((p, last.continue_to(p)?));

    let t_eps = nodes[0];
    let trunc = truncation_bound_log(n, alpha, z, t_eps.1.continued()) - shift.re;
    let panels: Vec<(usize, f64, f64)> = (0..nodes.len() - 1).map(|i| (i, 0.0, 1.0)).collect();
    let res = adaptive(
        |i, tau| -> Result<Complex64, QuadError> {
            let (ta, la) = nodes[i];
            let tb = nodes[i + 1].0;
            let t = ta + (tb - ta) * tau;
            let Some(lu) = log_one_minus(z, t) else {
                return Ok(Complex64::new(0.0, 0.0));
            };
            let lt = la.continue_to(t)?.continued();
            Ok(((a * lt + lu) * nf - shift).exp() * (tb - ta))
        },
        &panels,
        opts.rel_tol,
        opts.max_evals,
    )?;
    check(&res, opts.rel_tol)?;
    let v = ScaledComplex::from_complex(res.value);
    Ok(ContourIntegral {
        log_modulus: v.log_modulus + shift.re,
        phase: v.phase + shift.im,
        abs_error_bound: log_add(res.err.ln(), trunc) + shift.re,
        contour_id: ContourId::SteepestDescent {
            epsilon,
            truncated_at: [t_eps.0.re, t_eps.0.im],
            saddle_winding: contour.saddle_winding,
            chords: panels.len(),
        },
    })
}

/// `I_2 = int_{1/z}^{1} g(t)^n dt = (1 - z)^n K(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaIntegral {
    pub integral: ContourIntegral,
    /// `n log(1 - z)` (principal).
    pub log_prefactor: Complex64,
    /// `K(z) = int_0^1 t(1 - z t) / (alpha - (alpha + 1) z t) s^{n-1} ds`.
    pub k: Complex64,
    pub k_abs_error: f64,
    /// Continued `log t` at the end of the implicit path, `t = 1/z`.
    pub junction_log_t: Complex64,
}

/// A node of the continuation `t(u)` with `phi(t(u)) = log(1 - z) + u`.
#[derive(Debug, Clone, Copy)]
struct DeltaNode {
    u: f64,
    t: Complex64,
    branch: PhiBranch,
}

fn solve_delta(
    u: f64,
    seed: Complex64,
    branch: &PhiBranch,
    z: Complex64,
    alpha: Alpha,
    base: Complex64,
    max_move: f64,
) -> Option<(Complex64, PhiBranch)> {
    let target = base + u;
    let mut t = seed;
    let mut v = kernel::phi(t, z, alpha, branch).ok()?;
    for _ in 0..30 {
        let d = kernel::phi_prime(t, z, alpha).ok()?;
        let r = v.value - target;
        let floor = 8.0 * f64::EPSILON * (t.norm() * d.norm() + v.value.norm());
        if r.norm() <= floor.max(1e-14 * (1.0 + target.norm())) {
            return Some((t, v.branch));
        }
        t -= r / d;
        if (t - seed).norm() > max_move {
            return None;
        }
        v = kernel::phi(t, z, alpha, &v.branch).ok()?;
    }
    None
}

fn delta_nodes(
    z: Complex64,
    alpha: Alpha,
    u_min: f64,
    base: Complex64,
) -> Result<Vec<DeltaNode>, QuadError> {
    let one = Complex64::new(1.0, 0.0);
    let a = alpha.as_complex();
    let t0 = a / ((a + 1.0) * z);
    let p = z.inv();
    let mut nodes = vec![DeltaNode {
        u: 0.0,
        t: one,
        branch: kernel::phi_principal(one, z, alpha)?.branch,
    }];
    let mut du = 0.01f64.min(-u_min);
    while nodes.last().expect("nonempty").u > u_min {
        let cur = *nodes.last().expect("nonempty");
        let d = kernel::phi_prime(cur.t, z, alpha)?;
        let dist = cur
            .t
            .norm()
            .min((cur.t - p).norm())
            .min((cur.t - t0).norm());
        du = du.min(0.1 * dist * d.norm()).min(cur.u - u_min);
        let mut accepted = None;
        while du > 1e-14 {
            let u = cur.u - du;
            if let Some((t, branch)) =
                solve_delta(u, cur.t - du / d, &cur.branch, z, alpha, base, 0.5 * dist)
            {
                accepted = Some(DeltaNode { u, t, branch });
                break;
            }
            du *= 0.5;
        }
        let Some(node) = accepted else {
            return Err(QuadError::Continuation { u: cur.u, t: cur.t });
        };
        nodes.push(node);
        du *= 2.0;
    }
    Ok(nodes)
}

pub fn integrate_i2(n: usize, alpha: Alpha, z: Complex64) -> Result<DeltaIntegral, QuadError> {
    integrate_i2_with(n, alpha, z, &QuadOptions::default())
}

pub fn integrate_i2_with(
    n: usize,
    alpha: Alpha,
    z: Complex64,
    opts: &QuadOptions,
) -> Result<DeltaIntegral, QuadError> {
    require_in_e(z, alpha)?;
    let one = Complex64::new(1.0, 0.0);
    let nf = n as f64;
    let p = z.inv();
    if (z - one).norm() < 1e-14 {
        return Ok(DeltaIntegral {
            integral: ContourIntegral {
                log_modulus: f64::NEG_INFINITY,
                phase: 0.0,
                abs_error_bound: f64::NEG_INFINITY,
                contour_id: ContourId::ImplicitDelta {
                    u_min: 0.0,
                    nodes: 1,
                },
            },
            log_prefactor: Complex64::new(f64::NEG_INFINITY, 0.0),
            k: Complex64::new(0.0, 0.0),
            k_abs_error: 0.0,
            junction_log_t: kernel::principal_log(p)?,
        });
    }
    let a = alpha.as_complex();
    let base = (one - z).ln();
    let u_min = -(50.0 / (nf + 1.0)).min(30.0);
    let nodes = delta_nodes(z, alpha, u_min, base)?;

    let f = |t: Complex64| t * (one - z * t) / (a - (a + 1.0) * z * t);
    let panels: Vec<(usize, f64, f64)> = (0..nodes.len() - 1)
        .map(|i| (i, nodes[i + 1].u, nodes[i].u))
        .collect();
    let res = adaptive(
        |i, u| -> Result<Complex64, QuadError> {
            let left = nodes[i];
            let d = kernel::phi_prime(left.t, z, alpha)?;
            let reach = (nodes[i + 1].t - left.t).norm() * 4.0 + 1e-300;
            let (t, _) = solve_delta(
                u,
                left.t + (u - left.u) / d,
                &left.branch,
                z,
                alpha,
                base,
                reach,
            )
            .ok_or(QuadError::Continuation { u, t: left.t })?;
            Ok(f(t) * (nf * u).exp())
        },
        &panels,
        opts.rel_tol,
        opts.max_evals,
    )?;
    check(&res, opts.rel_tol)?;
    let end = nodes.last().expect("nonempty");
    // |f| shrinks like e^u toward 1/z, so the dropped tail is below this.
    let tail = f(end.t).norm() * (nf * u_min).exp() / (nf + 1.0);
    let k_err = res.err + tail;
    let junction_log_t = end.branch.log_t.continued() + kernel::principal_log(p / end.t)?;

    let log_prefactor = base * nf;
    let kk = ScaledComplex::from_complex(res.value);
    Ok(DeltaIntegral {
        integral: ContourIntegral {
            log_modulus: kk.log_modulus + log_prefactor.re,
            phase: kk.phase + log_prefactor.im,
            abs_error_bound: k_err.ln() + log_prefactor.re,
            contour_id: ContourId::ImplicitDelta {
                u_min,
                nodes: nodes.len(),
            },
        },
        log_prefactor,
        k: res.value,
        k_abs_error: k_err,
        junction_log_t,
    })
}

/// `|int_0^1 f(s) s^{n-1} ds|^{1/n}` for each `n` in `n_list`.
pub fn f_lemma_check(f: &dyn Fn(f64) -> Complex64, n_list: &[usize]) -> Vec<f64> {
    n_list
        .iter()
        .map(|&n| {
            lemma_integral(f, n)
                .map(|c| c.log_modulus / n as f64)
                .map(f64::exp)
                .unwrap_or(f64::NAN)
        })
        .collect()
}

/// `int_0^1 f(s) s^{n-1} ds` via `s = e^{-v}`.
pub fn lemma_integral(
    f: &dyn Fn(f64) -> Complex64,
    n: usize,
) -> Result<ContourIntegral, QuadError> {
    assert!(n >= 1, "the lemma integral needs n >= 1");
    let nf = n as f64;
    let v_max = 60.0 / nf;
    let k = 32;
    let panels: Vec<(usize, f64, f64)> = (0..k)
        .map(|i| {
            (
                0,
                v_max * i as f64 / k as f64,
                v_max * (i + 1) as f64 / k as f64,
            )
        })
        .collect();
    let opts = QuadOptions::default();
    let res = adaptive(
        |_, v| -> Result<Complex64, QuadError> { Ok(f((-v).exp()) * (-nf * v).exp()) },
        &panels,
        opts.rel_tol,
        opts.max_evals,
    )?;
    let sup = (0..=64)
        .map(|j| f((-v_max - j as f64).exp()).norm())
        .fold(0.0, f64::max);
    let tail = sup * (-60.0f64).exp() / nf;
    let v = ScaledComplex::from_complex(res.value);
    Ok(ContourIntegral {
        log_modulus: v.log_modulus,
        phase: v.phase,
        abs_error_bound: (res.err + tail).ln(),
        contour_id: ContourId::LemmaSegment,
    })
}

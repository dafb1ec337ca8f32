//! All zeros of `p_n` by Aberth–Ehrlich simultaneous iteration.
//!
//! Each sweep computes every correction from the previous sweep's snapshot,
//! so the sweep is a parallel map and the result does not depend on the
//! thread count. The solve runs in f64 or in MPFR; roots are then polished by
//! Newton's method in MPFR and checked twice: the condition-scaled residual
//! `|p(z)| / sum |c_k| |z|^k`, and the Newton step `|p(z)/p'(z)| / |z|` as a
//! forward-error estimate. If either check fails the whole solve is repeated
//! at a higher precision.

use std::fmt::Write as _;
use std::io;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hyperpoly::{to_c64, Family, Polynomial};
use crate::kernel::{Alpha, Precision};

#[derive(Debug, Error)]
pub enum RootError {
    #[error("leading coefficient of the degree-{0} polynomial vanishes")]
    DegenerateLeading(usize),
    #[error("invalid root options: {0}")]
    InvalidOptions(String),
    #[error("csv output failed: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootOptions {
    /// Bound on the condition-scaled residual.
    pub residual_tol: f64,
    /// Bound on the relative Newton step `|p/p'| / |z|`.
    pub forward_tol: f64,
    pub max_sweeps: usize,
    /// Seed for the angular jitter of the starting circle.
    pub seed: u64,
    /// Precision ceiling for escalation.
    pub max_bits: u32,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            residual_tol: 1e-10,
            forward_tol: 1e-12,
            max_sweeps: 2000,
            seed: 0x5eed,
            max_bits: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootDiagnostics {
    /// Aberth sweeps of the final solve.
    pub sweeps: usize,
    /// Precision of the final solve and polish (53 for f64).
    pub bits: u32,
    /// Precisions tried, in order.
    pub attempts: Vec<u32>,
    /// Whether every root met both tolerances.
    pub converged: bool,
    /// Indices of roots that did not meet the tolerances.
    pub flagged: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    pub n: usize,
    pub alpha: Alpha,
    pub family: Family,
    pub zeros: Vec<Complex64>,
    /// Condition-scaled residuals `|p(z)| / sum |c_k| |z|^k`.
    pub residuals: Vec<f64>,
    /// Relative Newton steps `|p(z)/p'(z)| / |z|`.
    pub forward_errors: Vec<f64>,
    pub iterations: RootDiagnostics,
}

impl ZeroSet {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }

    pub fn max_forward_error(&self) -> f64 {
        self.forward_errors.iter().cloned().fold(0.0, f64::max)
    }

    /// CSV with header `re,im,residual`.
    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "re,im,residual")?;
        for (z, r) in self.zeros.iter().zip(&self.residuals) {
            writeln!(w, "{:e},{:e},{:e}", z.re, z.im, r)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("re,im,residual\n");
        for (z, r) in self.zeros.iter().zip(&self.residuals) {
            let _ = writeln!(s, "{:e},{:e},{:e}", z.re, z.im, r);
        }
        s
    }
}

/// Starting points on a circle of radius `1.1 (max|c_k| / |c_n|)^{1/n}`
/// around the centroid of the roots, with seeded angular jitter.
pub fn initial_points(coeffs: &[Complex64], seed: u64) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let cmax = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let radius = 1.1 * (cmax / lead.norm()).powf(1.0 / n as f64);
    let center = -coeffs[n - 1] / (lead * n as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    (0..n)
        .map(|k| {
            let jitter: f64 = rng.gen_range(-0.25..0.25);
            let th = offset + std::f64::consts::TAU * (k as f64 + jitter) / n as f64;
            center + Complex64::from_polar(radius, th)
        })
        .collect()
}

/// `p(z)`, `p'(z)` and `sum |c_k| |z|^k`.
fn horner_d(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64, f64) {
    let zn = z.norm();
    let mut p = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    let mut s = 0.0;
    for c in coeffs.iter().rev() {
        d = d * z + p;
        p = p * z + c;
        s = s * zn + c.norm();
    }
    (p, d, s)
}

fn aberth_f64(
    coeffs: &[Complex64],
    mut z: Vec<Complex64>,
    max_sweeps: usize,
) -> (Vec<Complex64>, usize) {
    let n = z.len();
    let mut done = vec![false; n];
    let mut sweeps = 0;
    while sweeps < max_sweeps && done.iter().any(|d| !d) {
        sweeps += 1;
        let snap = z.clone();
        let noise = 16.0 * n as f64 * f64::EPSILON;
        let steps: Vec<Option<(Complex64, bool)>> = (0..n)
            .into_par_iter()
            .map(|i| {
                if done[i] {
                    return None;
                }
                let (p, d, abs) = horner_d(coeffs, snap[i]);
                let settled = p.norm() <= noise * abs;
                if p.norm() == 0.0 {
                    return Some((Complex64::new(0.0, 0.0), true));
                }
                let ratio = p / d;
                let s: Complex64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (snap[i] - snap[j]).inv())
                    .sum();
                Some((ratio / (Complex64::new(1.0, 0.0) - ratio * s), settled))
            })
            .collect();
        for (i, w) in steps.into_iter().enumerate() {
            if let Some((w, settled)) = w {
                if w.re.is_finite() && w.im.is_finite() {
                    z[i] -= w;
                }
                let step = w.norm();
                if settled || step.is_nan() || step <= 4.0 * f64::EPSILON * z[i].norm() {
                    done[i] = true;
                }
            }
        }
    }
    (z, sweeps)
}

fn horner_d_wide(coeffs: &[Complex], z: &Complex) -> (Complex, Complex) {
    let bits = z.prec().0;
    let mut p = Complex::new(bits);
    let mut d = Complex::new(bits);
    for c in coeffs.iter().rev() {
        d *= z;
        d += &p;
        p *= z;
        p += c;
    }
    (p, d)
}

/// Whether `|p(z)|` is within rounding noise of `sum |c_k| |z|^k` at `bits`.
fn settled_wide(coeffs: &[Complex], z: &Complex, p: &Complex) -> bool {
    let bits = z.prec().0;
    let (_, abs) = crate::hyperpoly::horner_wide(coeffs, z);
    let pn = Float::with_val(bits, p.abs_ref());
    let noise = 16.0 * coeffs.len() as f64;
    let lhs = pn.get_exp().unwrap_or(i32::MIN) as i64;
    let rhs = abs.get_exp().unwrap_or(i32::MIN) as i64 - bits as i64 + noise.log2().ceil() as i64;
    lhs <= rhs
}

fn aberth_wide(
    coeffs: &[Complex],
    start: &[Complex64],
    bits: u32,
    max_sweeps: usize,
) -> (Vec<Complex>, usize) {
    let n = start.len();
    let mut z: Vec<Complex> = start
        .iter()
        .map(|s| Complex::with_val(bits, (s.re, s.im)))
        .collect();
    let mut done = vec![false; n];
    let tol_exp = -(bits as i32) + 4;
    let mut sweeps = 0;
    while sweeps < max_sweeps && done.iter().any(|d| !d) {
        sweeps += 1;
        let snap = z.clone();
        let steps: Vec<Option<(Complex, bool)>> = (0..n)
            .into_par_iter()
            .map(|i| {
                if done[i] {
                    return None;
                }
                let (p, d) = horner_d_wide(coeffs, &snap[i]);
                if p.is_zero() {
                    return Some((Complex::new(bits), true));
                }
                let settled = settled_wide(coeffs, &snap[i], &p);
                let ratio = Complex::with_val(bits, &p / &d);
                let mut s = Complex::new(bits);
                for (j, zj) in snap.iter().enumerate() {
                    if j != i {
                        let diff = Complex::with_val(bits, &snap[i] - zj);
                        s += diff.recip();
                    }
                }
                let denom = Complex::with_val(bits, 1) - Complex::with_val(bits, &ratio * &s);
                Some((ratio / denom, settled))
            })
            .collect();
        for (i, w) in steps.into_iter().enumerate() {
            if let Some((w, settled)) = w {
                let finite = w.real().is_finite() && w.imag().is_finite();
                if finite {
                    z[i] -= &w;
                }
                let wn = Float::with_val(bits, w.abs_ref());
                let zn = Float::with_val(bits, z[i].abs_ref());
                let small = wn.is_zero()
                    || (finite
                        && wn.get_exp().unwrap_or(i32::MIN) <= zn.get_exp().unwrap_or(0) + tol_exp);
                if small || settled {
                    done[i] = true;
                }
            }
        }
    }
    (z, sweeps)
}

struct Checked {
    zeros: Vec<Complex64>,
    residuals: Vec<f64>,
    forward: Vec<f64>,
}

/// Newton polish at `bits`, then residual and forward-error estimates with
/// enough precision that `p(z)` carries at least a few correct digits.
fn polish_and_check(p: &Polynomial, roots: Vec<Complex>, bits: u32) -> Checked {
    let w = p.wide_at(bits);
    let coeffs = &w.coeffs;
    let polished: Vec<Complex> = roots
        .into_par_iter()
        .map(|mut z| {
            for _ in 0..4 {
                let (v, d) = horner_d_wide(coeffs, &z);
                if v.is_zero() || d.is_zero() {
                    break;
                }
                let step = Complex::with_val(bits, &v / &d);
                z -= &step;
                let sn = Float::with_val(bits, step.abs_ref());
                let zn = Float::with_val(bits, z.abs_ref());
                if sn.is_zero()
                    || sn.get_exp().unwrap_or(i32::MIN)
                        < zn.get_exp().unwrap_or(0) - bits as i32 + 8
                {
                    break;
                }
            }
            z
        })
        .collect();
    let zeros: Vec<Complex64> = polished.iter().map(to_c64).collect();
    let checks: Vec<(f64, f64)> = zeros
        .par_iter()
        .map(|&z| {
            // Check at the rounded f64 root, which is what callers receive.
            let mut b = bits.max(128);
            loop {
                let wc = p.wide_at(b);
                let zw = Complex::with_val(b, (z.re, z.im));
                let (v, d) = horner_d_wide(&wc.coeffs, &zw);
                let (_, s) = crate::hyperpoly::horner_wide(&wc.coeffs, &zw);
                let vn = Float::with_val(b, v.abs_ref()).to_f64();
                let sn = s.to_f64();
                let bound = 2.0 * (p.degree().max(1) as f64) * 2f64.powi(-(b as i32)) * sn;
                if bound <= 0.1 * vn || b >= 16384 || vn == 0.0 {
                    let dn = Float::with_val(b, d.abs_ref()).to_f64();
                    let residual = (vn + bound) / sn;
                    let forward = (vn + bound) / dn / z.norm();
                    return (residual, forward);
                }
                b *= 2;
            }
        })
        .collect();
    Checked {
        zeros,
        residuals: checks.iter().map(|c| c.0).collect(),
        forward: checks.iter().map(|c| c.1).collect(),
    }
}

/// All `n` zeros of `p`, starting the solve in `precision` and escalating
/// until every root meets the residual and forward-error tolerances.
pub fn find_roots(p: &Polynomial, precision: Precision) -> Result<ZeroSet, RootError> {
    find_roots_with(p, precision, &RootOptions::default())
}

pub fn find_roots_with(
    p: &Polynomial,
    precision: Precision,
    opts: &RootOptions,
) -> Result<ZeroSet, RootError> {
    if !(opts.residual_tol > 0.0 && opts.forward_tol > 0.0) {
        return Err(RootError::InvalidOptions(
            "tolerances must be positive".into(),
        ));
    }
    let n = p.degree();
    let mut zs = ZeroSet {
        n,
        alpha: p.alpha(),
        family: p.family(),
        zeros: Vec::new(),
        residuals: Vec::new(),
        forward_errors: Vec::new(),
        iterations: RootDiagnostics {
            sweeps: 0,
            bits: precision.bits(),
            attempts: Vec::new(),
            converged: true,
            flagged: Vec::new(),
        },
    };
    if n == 0 {
        return Ok(zs);
    }
    let coeffs = p.coeffs();
    if coeffs[n].norm() == 0.0 {
        return Err(RootError::DegenerateLeading(n));
    }
    let start = initial_points(coeffs, opts.seed);
    let polish_floor = Precision::auto_for_degree(n).bits().max(128);
    let mut bits = precision.bits();
    loop {
        zs.iterations.attempts.push(bits);
        let (roots, sweeps, polish_bits) = if bits <= 53 {
            let (r, s) = aberth_f64(coeffs, start.clone(), opts.max_sweeps);
            let w: Vec<Complex> = r
                .iter()
                .map(|z| Complex::with_val(polish_floor, (z.re, z.im)))
                .collect();
            (w, s, polish_floor)
        } else {
            let wc = p.wide_at(bits);
            let (r, s) = aberth_wide(&wc.coeffs, &start, bits, opts.max_sweeps);
            (r, s, bits)
        };
        let checked = polish_and_check(p, roots, polish_bits);
        let flagged: Vec<usize> = (0..n)
            .filter(|&i| {
                !(checked.residuals[i] <= opts.residual_tol
                    && checked.forward[i] <= opts.forward_tol)
            })
            .collect();
        zs.zeros = checked.zeros;
        zs.residuals = checked.residuals;
        zs.forward_errors = checked.forward;
        zs.iterations.sweeps = sweeps;
        zs.iterations.bits = bits;
        zs.iterations.converged = flagged.is_empty();
        zs.iterations.flagged = flagged;
        if zs.iterations.converged || bits >= opts.max_bits {
            return Ok(zs);
        }
        bits = if bits <= 53 {
            Precision::auto_for_degree(n).bits()
        } else {
            (bits * 2).min(opts.max_bits)
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperpoly::coefficients;
    use approx::assert_relative_eq;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn small_degree_examples() {
        let one = Alpha::real(1.0).unwrap();
        let z = find_roots(&coefficients(1, one), Precision::Double).unwrap();
        assert_eq!(z.zeros.len(), 1);
        assert_relative_eq!(z.zeros[0].re, 1.5, epsilon = 1e-14);
        assert!(z.zeros[0].im.abs() < 1e-14);

        let z = find_roots(&coefficients(2, one), Precision::Double).unwrap();
        let r = sorted(z.zeros.clone());
        let im = (3.0f64 / 20.0).sqrt() / 1.2;
        assert!((im - 0.322_749).abs() < 5e-7);
        assert_relative_eq!(r[0].re, 1.25, epsilon = 1e-13);
        assert_relative_eq!(r[0].im, -im, epsilon = 1e-13);
        assert_relative_eq!(r[1].im, im, epsilon = 1e-13);
        assert!(z.max_residual() <= 1e-10);
    }

    #[test]
    fn root_count_residuals_and_symmetry() {
        for (a, ns) in [
            (Alpha::real(1.0).unwrap(), vec![5, 20, 45]),
            (Alpha::real(2.0).unwrap(), vec![10, 30]),
            (Alpha::new(1.0, 1.0).unwrap(), vec![7, 25]),
            (Alpha::new(2.0, -1.0).unwrap(), vec![12]),
        ] {
            for n in ns {
                let p =
                    Polynomial::new(Family::Alpha { alpha: a }, n, Precision::auto_for_degree(n))
                        .unwrap();
                let z = find_roots(&p, Precision::Double).unwrap();
                assert_eq!(z.zeros.len(), n);
                assert!(
                    z.iterations.converged,
                    "alpha={a} n={n}: {:?}",
                    z.iterations
                );
                assert!(z.max_residual() <= 1e-10);
                assert!(z.zeros.iter().all(|r| r.re > 0.0 && r.norm() > 0.0));
                if a.zeta() == 0.0 {
                    for r in &z.zeros {
                        let d = z
                            .zeros
                            .iter()
                            .map(|s| (s - r.conj()).norm())
                            .fold(f64::INFINITY, f64::min);
                        assert!(d < 1e-9 * (1.0 + r.norm()), "conjugate of {r} missing");
                    }
                }
            }
        }
    }

    /// `prod (z - r_k) c_n` reproduces the coefficients (Vieta).
    #[test]
    fn roots_rebuild_polynomial() {
        let a = Alpha::new(1.0, 1.0).unwrap();
        let p = coefficients(9, a);
        let z = find_roots(&p, Precision::Double).unwrap();
        let mut prod = vec![Complex64::new(1.0, 0.0)];
        for r in &z.zeros {
            let mut next = vec![Complex64::new(0.0, 0.0); prod.len() + 1];
            for (k, c) in prod.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * r;
            }
            prod = next;
        }
        let lead = p.coeffs()[9];
        for (k, c) in p.coeffs().iter().enumerate() {
            assert!((prod[k] * lead - c).norm() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn extended_degree_sixty_escalates_and_is_accurate() {
        let a = Alpha::new(1.0, 1.0).unwrap();
        let p = Polynomial::new(
            Family::Alpha { alpha: a },
            60,
            Precision::auto_for_degree(60),
        )
        .unwrap();
        let z = find_roots(&p, Precision::Double).unwrap();
        assert!(
            z.iterations.attempts.len() >= 2,
            "{:?}",
            z.iterations.attempts
        );
        assert!(z.iterations.converged);
        assert!(z.max_forward_error() <= 1e-12);
        let direct = find_roots(&p, Precision::auto_for_degree(60)).unwrap();
        let a = sorted(z.zeros);
        let b = sorted(direct.zeros);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn deterministic_across_runs() {
        let p = Polynomial::new(
            Family::Alpha {
                alpha: Alpha::new(2.0, -1.0).unwrap(),
            },
            30,
            Precision::auto_for_degree(30),
        )
        .unwrap();
        let x = find_roots(&p, Precision::Double).unwrap();
        let y = find_roots(&p, Precision::Double).unwrap();
        assert_eq!(
            serde_json::to_string(&x).unwrap(),
            serde_json::to_string(&y).unwrap()
        );
    }

    #[test]
    fn csv_and_json_shape() {
        let z = find_roots(
            &coefficients(3, Alpha::real(1.0).unwrap()),
            Precision::Double,
        )
        .unwrap();
        let csv = z.to_csv_string();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "re,im,residual");
        assert_eq!(lines.len(), 4);
        let mut buf = Vec::new();
        z.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), csv);
        let v = serde_json::to_value(&z).unwrap();
        assert_eq!(v["n"], 3);
        assert_eq!(v["zeros"].as_array().unwrap().len(), 3);
        assert_eq!(v["residuals"].as_array().unwrap().len(), 3);
        let back: ZeroSet = serde_json::from_value(v).unwrap();
        assert_eq!(back, z);
    }

    #[test]
    fn degree_zero_has_no_roots() {
        let z = find_roots(
            &coefficients(0, Alpha::real(1.0).unwrap()),
            Precision::Double,
        )
        .unwrap();
        assert!(z.zeros.is_empty());
    }
}

//! Branch-aware complex primitives shared by every other module.
//!
//! The two phase functions used throughout the crate are
//!
//! ```text
//! phi(t) = alpha * log t + log(1 - z t)      (t-plane, parameter z)
//! psi(w) = alpha * log w + log(1 - w)        (w-plane, psi = phi with z = 1)
//! ```
//!
//! Both logarithms are multivalued. Paths through the plane carry a
//! [`PhiBranch`] that records the continuously tracked argument of `t` and of
//! `1 - z t`, and every evaluation along the path unwinds the principal value
//! to the multiple of `2 pi` nearest the previous phase.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("logarithm of zero")]
    LogOfZero,
    #[error("invalid parameter alpha = {eta} + {zeta}i: real part must be positive and finite")]
    InvalidAlpha { eta: f64, zeta: f64 },
    #[error("t = {t} is a branch point of phi for z = {z}")]
    SingularPoint { t: Complex64, z: Complex64 },
    #[error("t = {t} is a pole of phi' for z = {z}")]
    Pole { t: Complex64, z: Complex64 },
    #[error("invalid precision `{0}` (expected `double` or `extended:<bits>`)")]
    InvalidPrecision(String),
}

/// Which parameter regime an [`Alpha`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `zeta != 0`: spiralling descent paths at `t = 0`.
    Complex,
    /// `zeta == 0`: the classical real-parameter lemniscate case.
    Real,
}

/// The complex parameter `alpha = eta + i zeta`, with `eta > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Alpha {
    eta: f64,
    zeta: f64,
}

impl Alpha {
    pub fn new(eta: f64, zeta: f64) -> Result<Self, KernelError> {
        if eta <= 0.0 || !eta.is_finite() || !zeta.is_finite() {
            return Err(KernelError::InvalidAlpha { eta, zeta });
        }
        Ok(Self { eta, zeta })
    }

    pub fn real(k: f64) -> Result<Self, KernelError> {
        Self::new(k, 0.0)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn regime(&self) -> Regime {
        if self.zeta == 0.0 {
            Regime::Real
        } else {
            Regime::Complex
        }
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.eta, self.zeta)
    }

    /// The crossing point `alpha / (alpha + 1)` of the level curve, which is
    /// also the saddle of `psi`.
    pub fn crossing_point(&self) -> Complex64 {
        let a = self.as_complex();
        a / (a + 1.0)
    }
}

impl TryFrom<[f64; 2]> for Alpha {
    type Error = KernelError;

    fn try_from(v: [f64; 2]) -> Result<Self, Self::Error> {
        Alpha::new(v[0], v[1])
    }
}

impl From<Alpha> for [f64; 2] {
    fn from(a: Alpha) -> Self {
        [a.eta, a.zeta]
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.zeta < 0.0 {
            write!(f, "{}-{}i", self.eta, -self.zeta)
        } else {
            write!(f, "{}+{}i", self.eta, self.zeta)
        }
    }
}

/// Arithmetic precision used for polynomial coefficients, evaluation and
/// root finding. Flow tracing and quadrature always run in `f64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Precision {
    #[default]
    Double,
    /// MPFR arithmetic with the given mantissa width.
    Extended { bits: u32 },
}

impl Precision {
    /// Mantissa bits large enough to resolve all `n` zeros of `p_n`.
    ///
    /// Near its zeros `p_n` is smaller than the sum of its absolute terms by
    /// roughly `((1 + |z|) / |1 - z|)^n`, about `11^n` on the acceptance
    /// curves, so each degree costs ~3.5 bits on top of the working mantissa.
    pub fn auto_for_degree(n: usize) -> Self {
        let bits = 64 + 4 * n as u32;
        Precision::Extended {
            bits: bits.div_ceil(64) * 64,
        }
    }

    pub fn bits(&self) -> u32 {
        match self {
            Precision::Double => 53,
            Precision::Extended { bits } => *bits,
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Double => f.write_str("double"),
            Precision::Extended { bits } => write!(f, "extended:{bits}"),
        }
    }
}

impl FromStr for Precision {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "double" {
            return Ok(Precision::Double);
        }
        let bits = s
            .strip_prefix("extended:")
            .and_then(|b| b.parse::<u32>().ok())
            .filter(|b| *b >= 64)
            .ok_or_else(|| KernelError::InvalidPrecision(s.to_string()))?;
        Ok(Precision::Extended { bits })
    }
}

impl From<Precision> for String {
    fn from(p: Precision) -> Self {
        p.to_string()
    }
}

impl TryFrom<String> for Precision {
    type Error = KernelError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Principal logarithm, imaginary part in `(-pi, pi]`.
pub fn principal_log(w: Complex64) -> Result<Complex64, KernelError> {
    if w.re == 0.0 && w.im == 0.0 {
        return Err(KernelError::LogOfZero);
    }
    let mut l = w.ln();
    // atan2 returns -pi for (-x, -0.0); fold onto +pi.
    if l.im == -PI {
        l.im = PI;
    }
    Ok(l)
}

/// Shift `raw` by the multiple of `2 pi` that lands closest to `previous`.
pub fn unwind(raw: f64, previous: f64) -> f64 {
    raw + TAU * ((previous - raw) / TAU).round()
}

/// A logarithm evaluated along a path: the principal value plus the
/// continuously tracked imaginary part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchTrackedValue {
    pub value: Complex64,
    pub imag_phase: f64,
}

impl BranchTrackedValue {
    /// Principal branch at `w`.
    pub fn principal(w: Complex64) -> Result<Self, KernelError> {
        let value = principal_log(w)?;
        Ok(Self {
            value,
            imag_phase: value.im,
        })
    }

    /// Continue the logarithm to `w` from the state at a nearby point.
    pub fn continue_to(&self, w: Complex64) -> Result<Self, KernelError> {
        let value = principal_log(w)?;
        Ok(Self {
            value,
            imag_phase: unwind(value.im, self.imag_phase),
        })
    }

    /// The continued logarithm `log|w| + i * imag_phase`.
    pub fn continued(&self) -> Complex64 {
        Complex64::new(self.value.re, self.imag_phase)
    }

    /// Number of full turns separating the tracked phase from the principal one.
    pub fn winding(&self) -> i64 {
        ((self.imag_phase - self.value.im) / TAU).round() as i64
    }
}

/// Continuation state of `phi`: one tracked logarithm per factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiBranch {
    pub log_t: BranchTrackedValue,
    pub log_u: BranchTrackedValue,
}

/// `phi` at a point, together with the branch state needed to continue it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiValue {
    pub value: Complex64,
    pub branch: PhiBranch,
}

impl PhiValue {
    pub fn imag_phase(&self) -> f64 {
        self.value.im
    }
}

fn check_regular(t: Complex64, z: Complex64) -> Result<Complex64, KernelError> {
    let u = Complex64::new(1.0, 0.0) - z * t;
    if t.norm_sqr() == 0.0 || u.norm_sqr() == 0.0 {
        return Err(KernelError::SingularPoint { t, z });
    }
    Ok(u)
}

fn combine(alpha: Alpha, log_t: BranchTrackedValue, log_u: BranchTrackedValue) -> PhiValue {
    PhiValue {
        value: alpha.as_complex() * log_t.continued() + log_u.continued(),
        branch: PhiBranch { log_t, log_u },
    }
}

/// `phi(t)` with both logarithms on their principal branch.
pub fn phi_principal(t: Complex64, z: Complex64, alpha: Alpha) -> Result<PhiValue, KernelError> {
    let u = check_regular(t, z)?;
    Ok(combine(
        alpha,
        BranchTrackedValue::principal(t)?,
        BranchTrackedValue::principal(u)?,
    ))
}

/// `phi(t)` continued from the branch state of a neighbouring path point.
pub fn phi(
    t: Complex64,
    z: Complex64,
    alpha: Alpha,
    branch: &PhiBranch,
) -> Result<PhiValue, KernelError> {
    let u = check_regular(t, z)?;
    Ok(combine(
        alpha,
        branch.log_t.continue_to(t)?,
        branch.log_u.continue_to(u)?,
    ))
}

/// `phi'(t) = (alpha - z t (alpha + 1)) / (t (1 - z t))`, single valued.
pub fn phi_prime(t: Complex64, z: Complex64, alpha: Alpha) -> Result<Complex64, KernelError> {
    let u = Complex64::new(1.0, 0.0) - z * t;
    if t.norm_sqr() == 0.0 || u.norm_sqr() == 0.0 {
        return Err(KernelError::Pole { t, z });
    }
    let a = alpha.as_complex();
    Ok((a - z * t * (a + 1.0)) / (t * u))
}

/// `phi''(t) = -alpha / t^2 - z^2 / (1 - z t)^2`.
pub fn phi_second(t: Complex64, z: Complex64, alpha: Alpha) -> Result<Complex64, KernelError> {
    let u = Complex64::new(1.0, 0.0) - z * t;
    if t.norm_sqr() == 0.0 || u.norm_sqr() == 0.0 {
        return Err(KernelError::Pole { t, z });
    }
    Ok(-alpha.as_complex() / (t * t) - z * z / (u * u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn principal_log_examples() {
        assert_eq!(principal_log(c(1.0, 0.0)).unwrap(), c(0.0, 0.0));
        let l = principal_log(c(-1.0, 0.0)).unwrap();
        assert_relative_eq!(l.re, 0.0);
        assert_relative_eq!(l.im, PI);
        let l = principal_log(c(-1.0, -0.0)).unwrap();
        assert_relative_eq!(l.im, PI);
        let l = principal_log(c(0.0, 2.0)).unwrap();
        assert_relative_eq!(l.re, 2f64.ln());
        assert_relative_eq!(l.im, PI / 2.0);
        assert_eq!(principal_log(c(0.0, 0.0)), Err(KernelError::LogOfZero));
    }

    #[test]
    fn alpha_validation() {
        assert!(Alpha::new(0.0, 1.0).is_err());
        assert!(Alpha::new(-1.0, 0.0).is_err());
        assert!(Alpha::new(f64::NAN, 0.0).is_err());
        assert_eq!(Alpha::new(1.0, 0.0).unwrap().regime(), Regime::Real);
        assert_eq!(Alpha::new(1.0, -2.0).unwrap().regime(), Regime::Complex);
        let a: Alpha = serde_json::from_str("[1.5, -1.0]").unwrap();
        assert_eq!(a, Alpha::new(1.5, -1.0).unwrap());
        assert!(serde_json::from_str::<Alpha>("[-1.0, 0.0]").is_err());
    }

    #[test]
    fn precision_parsing() {
        assert_eq!("double".parse::<Precision>().unwrap(), Precision::Double);
        assert_eq!(
            "extended:256".parse::<Precision>().unwrap(),
            Precision::Extended { bits: 256 }
        );
        assert!("extended:12".parse::<Precision>().is_err());
        assert!("quad".parse::<Precision>().is_err());
        assert_eq!(
            Precision::auto_for_degree(60),
            Precision::Extended { bits: 320 }
        );
    }

    #[test]
    fn phi_examples() {
        let one = Alpha::real(1.0).unwrap();
        let v = phi_principal(c(0.5, 0.0), c(1.0, 0.0), one).unwrap();
        assert_relative_eq!(v.value.re, -2.0 * 2f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(v.value.im, 0.0);

        let a = Alpha::new(1.3, -0.7).unwrap();
        let v = phi_principal(c(0.5, 0.0), c(0.0, 0.0), a).unwrap();
        let expect = a.as_complex() * 0.5f64.ln();
        assert_relative_eq!(v.value.re, expect.re, epsilon = 1e-15);
        assert_relative_eq!(v.value.im, expect.im, epsilon = 1e-15);

        // Real segment with real data stays real.
        let z = c(0.5, 0.0);
        let start = phi_principal(c(1e-3, 0.0), z, one).unwrap();
        let mut branch = start.branch;
        for k in 0..=100 {
            let t = c(1e-3 + (1.0 - 1e-3) * k as f64 / 100.0, 0.0);
            let v = phi(t, z, one, &branch).unwrap();
            branch = v.branch;
            let real = t.re.ln() + (1.0 - 0.5 * t.re).ln();
            assert_relative_eq!(v.value.re, real, epsilon = 1e-14);
            assert_eq!(v.value.im, 0.0);
        }

        assert!(matches!(
            phi_principal(c(0.0, 0.0), z, one),
            Err(KernelError::SingularPoint { .. })
        ));
        assert!(matches!(
            phi_principal(c(2.0, 0.0), z, one),
            Err(KernelError::SingularPoint { .. })
        ));
    }

    #[test]
    fn phi_prime_examples() {
        let one = Alpha::real(1.0).unwrap();
        let a = Alpha::new(2.0, -1.0).unwrap();
        let z = c(0.3, 1.1);
        let t0 = a.as_complex() / ((a.as_complex() + 1.0) * z);
        assert!(phi_prime(t0, z, a).unwrap().norm() < 1e-14 * (a.as_complex() / t0).norm());
        let d = phi_prime(c(0.25, 0.0), c(1.0, 0.0), one).unwrap();
        assert_relative_eq!(d.re, 8.0 / 3.0, epsilon = 1e-15);
        let d = phi_prime(c(1.0, 0.0), c(0.0, 0.0), one).unwrap();
        assert_relative_eq!(d.re, 1.0);
        assert!(matches!(
            phi_prime(c(0.0, 0.0), z, a),
            Err(KernelError::Pole { .. })
        ));
        assert!(matches!(
            phi_prime(c(0.5, 0.0), c(2.0, 0.0), a),
            Err(KernelError::Pole { .. })
        ));
    }

    #[test]
    fn second_derivative_at_saddle_has_leading_minus_sign() {
        let a = Alpha::new(1.0, 1.0).unwrap();
        let z = c(2.0, 0.0);
        let al = a.as_complex();
        let t0 = al / ((al + 1.0) * z);
        let got = phi_second(t0, z, a).unwrap();
        let closed = -(al + 1.0).powu(3) * z * z / al;
        assert!((got - closed).norm() < 1e-13 * closed.norm());
    }

    /// Finite differences of the continued `phi` against `phi'`.
    #[test]
    fn phi_prime_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let alphas = [
            Alpha::new(1.0, 0.0).unwrap(),
            Alpha::new(1.0, 1.0).unwrap(),
            Alpha::new(2.0, -1.0).unwrap(),
            Alpha::new(0.5, 1.0).unwrap(),
        ];
        let mut checked = 0;
        while checked < 100 {
            let a = alphas[checked % alphas.len()];
            let z = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let t = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let u = c(1.0, 0.0) - z * t;
            if t.norm() < 0.1 || u.norm() < 0.1 {
                continue;
            }
            let h = 1e-5 * t.norm().max(1.0);
            let base = phi_principal(t, z, a).unwrap();
            let fwd = phi(t + h, z, a, &base.branch).unwrap().value;
            let bwd = phi(t - h, z, a, &base.branch).unwrap().value;
            let fd = (fwd - bwd) / (2.0 * h);
            let exact = phi_prime(t, z, a).unwrap();
            assert!(
                (fd - exact).norm() <= 1e-6 * exact.norm().max(1.0),
                "t={t} z={z} a={a}: fd={fd} exact={exact}"
            );
            checked += 1;
        }
    }

    #[test]
    fn continuation_winds_around_origin() {
        let mut state = BranchTrackedValue::principal(c(1.0, 0.0)).unwrap();
        let steps = 400;
        for k in 1..=2 * steps {
            let th = TAU * k as f64 / steps as f64;
            let next = state.continue_to(c(th.cos(), th.sin())).unwrap();
            assert!((next.imag_phase - state.imag_phase).abs() < PI);
            state = next;
        }
        assert_relative_eq!(state.imag_phase, 2.0 * TAU, epsilon = 1e-12);
        assert_eq!(state.winding(), 2);
    }

    proptest! {
        #[test]
        fn principal_log_conjugation(re in -10.0f64..10.0, im in 1e-6f64..10.0) {
            for w in [c(re, im), c(re, -im)] {
                let l = principal_log(w).unwrap();
                let lc = principal_log(w.conj()).unwrap();
                prop_assert!((l.conj() - lc).norm() <= 1e-15 * l.norm().max(1.0));
            }
        }

        #[test]
        fn unwind_lands_within_pi(raw in -PI..PI, prev in -100.0f64..100.0) {
            let u = unwind(raw, prev);
            prop_assert!((u - prev).abs() <= PI + 1e-12);
            prop_assert!(((u - raw) / TAU - ((u - raw) / TAU).round()).abs() < 1e-9);
        }
    }
}

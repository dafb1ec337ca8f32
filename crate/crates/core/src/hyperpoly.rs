//! The terminating series `p_n(z) = 2F1(-n, b; b + 1; z)`.
//!
//! With `b = alpha n + 1` this is the main family; with `b = k n + l + 1`
//! (real `k`, `l`) it is the classical real-parameter family. Both share the
//! closed form
//!
//! ```text
//! c_k = (-1)^k C(n, k) b / (b + k),
//! ```
//!
//! obtained from the Pochhammer quotient `(-n)_k (b)_k / ((b + 1)_k k!)`.
//!
//! Coefficients grow like `C(n, n/2)`, and near its zeros the polynomial is
//! exponentially smaller than `sum |c_k| |z|^k`, so every polynomial also
//! knows how to rebuild its coefficients in MPFR at any mantissa width.

use num_complex::Complex64;
use rug::{Complex, Float, Integer, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{Alpha, Precision};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("numerator parameter b = {0} makes b + k vanish for some k")]
    DegenerateParameter(Complex64),
    #[error("malformed polynomial: {0}")]
    Malformed(String),
}

/// Which hypergeometric family a polynomial belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// `2F1(-n, alpha n + 1; alpha n + 2; z)`.
    Alpha { alpha: Alpha },
    /// `2F1(-n, k n + l + 1; k n + l + 2; z)` with real `k > 0`, `l >= 0`.
    RealCase { k: f64, l: f64 },
}

impl Family {
    /// Numerator parameter `b` at degree `n`.
    pub fn b(&self, n: usize) -> Complex64 {
        match *self {
            Family::Alpha { alpha } => alpha.as_complex() * n as f64 + 1.0,
            Family::RealCase { k, l } => Complex64::new(k * n as f64 + l + 1.0, 0.0),
        }
    }

    /// The parameter governing the limiting curve (`k` for the real family).
    pub fn alpha(&self) -> Alpha {
        match *self {
            Family::Alpha { alpha } => alpha,
            Family::RealCase { k, .. } => Alpha::real(k).expect("real-case family requires k > 0"),
        }
    }

    /// `b` as an MPFR complex, computed exactly from the `f64` inputs.
    fn b_wide(&self, n: usize, bits: u32) -> Complex {
        match *self {
            Family::Alpha { alpha } => {
                let mut b = Complex::with_val(bits + 64, (alpha.eta(), alpha.zeta()));
                b *= n as u64;
                b += 1u32;
                Complex::with_val(bits, b)
            }
            Family::RealCase { k, l } => {
                let mut b = Float::with_val(bits + 64, k);
                b *= n as u64;
                b += l;
                b += 1u32;
                Complex::with_val(bits, (b, 0))
            }
        }
    }
}

/// Coefficients of `p_n` at a fixed MPFR precision, unscaled.
#[derive(Debug, Clone, PartialEq)]
pub struct WideCoeffs {
    pub bits: u32,
    pub coeffs: Vec<Complex>,
}

/// Degree-`n` polynomial in the monomial basis, stored as
/// `c_k = coeffs[k] * exp(scale)` with `max |coeffs[k]| = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    family: Family,
    degree: usize,
    coeffs: Vec<Complex64>,
    scale: f64,
    precision: Precision,
    wide: Option<WideCoeffs>,
}

/// Value of `p_n(z)` with the magnitude of the sum it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: Complex64,
    /// `sum_k |c_k| |z|^k`.
    pub abs_sum: f64,
    /// A-priori relative error bound of `value`, when evaluated in MPFR.
    pub rel_error: Option<f64>,
    /// Mantissa bits used.
    pub bits: u32,
}

impl Evaluation {
    /// `|p(z)| / sum |c_k| |z|^k`.
    pub fn scaled_residual(&self) -> f64 {
        if self.abs_sum == 0.0 {
            0.0
        } else {
            self.value.norm() / self.abs_sum
        }
    }
}

/// `p_n` for the main family, in double precision.
pub fn coefficients(n: usize, alpha: Alpha) -> Polynomial {
    Polynomial::new(Family::Alpha { alpha }, n, Precision::Double)
        .expect("alpha with positive real part never degenerates")
}

fn ln_binomials(n: usize) -> Vec<f64> {
    let mut ln_fact = Vec::with_capacity(n + 1);
    let mut acc = 0.0f64;
    ln_fact.push(0.0);
    for i in 1..=n {
        acc += (i as f64).ln();
        ln_fact.push(acc);
    }
    (0..=n)
        .map(|k| ln_fact[n] - ln_fact[k] - ln_fact[n - k])
        .collect()
}

impl Polynomial {
    pub fn new(family: Family, n: usize, precision: Precision) -> Result<Self, PolyError> {
        let b = family.b(n);
        if (0..=n).any(|k| (b + k as f64).norm() == 0.0) {
            return Err(PolyError::DegenerateParameter(b));
        }
        let wide = match precision {
            Precision::Double => None,
            Precision::Extended { bits } => Some(wide_coefficients(family, n, bits)),
        };
        let (coeffs, scale) = match &wide {
            // Round from the exact values so both representations agree.
            Some(w) => scaled_from_wide(&w.coeffs),
            None => {
                let lnb = ln_binomials(n);
                let ratios: Vec<Complex64> = (0..=n).map(|k| b / (b + k as f64)).collect();
                let scale = (0..=n)
                    .map(|k| lnb[k] + ratios[k].norm().ln())
                    .fold(f64::NEG_INFINITY, f64::max);
                let coeffs = (0..=n)
                    .map(|k| {
                        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                        ratios[k] * (sign * (lnb[k] - scale).exp())
                    })
                    .collect();
                (coeffs, scale)
            }
        };
        Ok(Self {
            family,
            degree: n,
            coeffs,
            scale,
            precision,
            wide,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn alpha(&self) -> Alpha {
        self.family.alpha()
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// Scaled coefficients; the true coefficients are `coeffs[k] * exp(scale)`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// True coefficient `c_k`, possibly overflowing for huge `n`.
    pub fn coefficient(&self, k: usize) -> Complex64 {
        self.coeffs[k] * self.scale.exp()
    }

    /// The MPFR coefficients built at construction, if any.
    pub fn wide(&self) -> Option<&WideCoeffs> {
        self.wide.as_ref()
    }

    /// MPFR coefficients at `bits`, reusing the cached set when wide enough.
    pub fn wide_at(&self, bits: u32) -> WideCoeffs {
        match &self.wide {
            Some(w) if w.bits == bits => w.clone(),
            _ => wide_coefficients(self.family, self.degree, bits),
        }
    }

    /// Nested (Horner) evaluation in double precision.
    pub fn evaluate(&self, z: Complex64) -> Evaluation {
        let zabs = z.norm();
        let mut v = Complex64::new(0.0, 0.0);
        let mut s = 0.0;
        for c in self.coeffs.iter().rev() {
            v = v * z + c;
            s = s * zabs + c.norm();
        }
        let f = self.scale.exp();
        Evaluation {
            value: v * f,
            abs_sum: s * f,
            rel_error: None,
            bits: 53,
        }
    }

    /// Horner evaluation in MPFR at `bits`, with the standard a-priori bound
    /// `|err| <= 2 n u sum |c_k| |z|^k` turned into a relative estimate.
    pub fn evaluate_wide(&self, z: Complex64, bits: u32) -> Evaluation {
        let w = self.wide_at(bits);
        let zw = Complex::with_val(bits, (z.re, z.im));
        let (v, s) = horner_wide(&w.coeffs, &zw);
        let value = to_c64(&v);
        let abs_sum = s.to_f64();
        let unit = 2f64.powi(-(bits as i32));
        let bound = 2.0 * (self.degree.max(1) as f64) * unit * abs_sum;
        let rel = if value.norm() > 0.0 {
            bound / value.norm()
        } else {
            f64::INFINITY
        };
        Evaluation {
            value,
            abs_sum,
            rel_error: Some(rel),
            bits,
        }
    }

    /// Evaluate in the polynomial's own precision mode.
    pub fn evaluate_in_mode(&self, z: Complex64) -> Evaluation {
        match self.precision {
            Precision::Double => self.evaluate(z),
            Precision::Extended { bits } => self.evaluate_wide(z, bits),
        }
    }

    /// MPFR evaluation, widening until the relative error bound is below
    /// `rel_target` (or 16384 bits is reached).
    pub fn evaluate_certified(&self, z: Complex64, rel_target: f64) -> Evaluation {
        let mut bits = self.precision.bits().max(128);
        loop {
            let e = self.evaluate_wide(z, bits);
            if e.rel_error.unwrap_or(f64::INFINITY) <= rel_target || bits >= 16384 {
                return e;
            }
            bits *= 2;
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(PolynomialJson::from(self)).expect("polynomial serializes")
    }
}

/// MPFR coefficients `c_k` for `family` at degree `n`.
pub fn wide_coefficients(family: Family, n: usize, bits: u32) -> WideCoeffs {
    let b = family.b_wide(n, bits);
    let coeffs = (0..=n)
        .map(|k| {
            let binom = Integer::from(Integer::binomial_u(n as u32, k as u32));
            let mut denom = b.clone();
            denom += k as u64;
            let mut c = Complex::with_val(bits, &b / &denom);
            c *= &binom;
            if k % 2 == 1 {
                c = -c;
            }
            c
        })
        .collect();
    WideCoeffs { bits, coeffs }
}

fn scaled_from_wide(coeffs: &[Complex]) -> (Vec<Complex64>, f64) {
    let logs: Vec<f64> = coeffs
        .iter()
        .map(|c| {
            let a = Float::with_val(c.prec().0, c.abs_ref());
            a.ln().to_f64()
        })
        .collect();
    let scale = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bits = coeffs.first().map(|c| c.prec().0).unwrap_or(64);
    let factor = Float::with_val(bits, -scale).exp();
    let scaled = coeffs
        .iter()
        .map(|c| {
            let s = Complex::with_val(bits, c * &factor);
            to_c64(&s)
        })
        .collect();
    (scaled, scale)
}

pub(crate) fn to_c64(c: &Complex) -> Complex64 {
    Complex64::new(c.real().to_f64(), c.imag().to_f64())
}

/// Horner in MPFR, returning `(p(z), sum |c_k| |z|^k)`.
pub(crate) fn horner_wide(coeffs: &[Complex], z: &Complex) -> (Complex, Float) {
    let bits = z.prec().0;
    let zabs = Float::with_val(bits, z.abs_ref());
    let mut v = Complex::new(bits);
    let mut s = Float::new(bits);
    for c in coeffs.iter().rev() {
        v *= z;
        v += c;
        s *= &zabs;
        s += Float::with_val(bits, c.abs_ref());
    }
    (v, s)
}

/// Exact rational coefficients of `2F1(-n, b; b + 1; z)` from the closed form.
pub fn exact_coefficients(n: usize, b: &Rational) -> Vec<Rational> {
    (0..=n)
        .map(|k| {
            let binom = Integer::from(Integer::binomial_u(n as u32, k as u32));
            let mut c = Rational::from(binom) * b.clone() / (b.clone() + Integer::from(k));
            if k % 2 == 1 {
                c = -c;
            }
            c
        })
        .collect()
}

/// Exact coefficients for rational real `alpha`, i.e. `b = alpha n + 1`.
pub fn exact_alpha_coefficients(n: usize, alpha: &Rational) -> Vec<Rational> {
    let b = alpha.clone() * Integer::from(n) + Integer::from(1);
    exact_coefficients(n, &b)
}

/// Exact value of a rational-coefficient polynomial at a rational point.
pub fn exact_evaluate(coeffs: &[Rational], z: &Rational) -> Rational {
    coeffs
        .iter()
        .rev()
        .fold(Rational::new(), |acc, c| acc * z.clone() + c.clone())
}

/// JSON form: `{"n", "alpha", "coeffs", "scale"}`, plus `l` for the real
/// family `2F1(-n, k n + l + 1; k n + l + 2; z)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub n: usize,
    pub alpha: [f64; 2],
    pub coeffs: Vec<[f64; 2]>,
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
}

impl From<&Polynomial> for PolynomialJson {
    fn from(p: &Polynomial) -> Self {
        let alpha = p.alpha();
        let l = match p.family {
            Family::RealCase { l, .. } => Some(l),
            Family::Alpha { .. } => None,
        };
        Self {
            n: p.degree,
            alpha: [alpha.eta(), alpha.zeta()],
            coeffs: p.coeffs.iter().map(|c| [c.re, c.im]).collect(),
            scale: p.scale,
            l,
        }
    }
}

impl TryFrom<PolynomialJson> for Polynomial {
    type Error = PolyError;

    fn try_from(j: PolynomialJson) -> Result<Self, Self::Error> {
        if j.coeffs.len() != j.n + 1 {
            return Err(PolyError::Malformed(format!(
                "{} coefficients for degree {}",
                j.coeffs.len(),
                j.n
            )));
        }
        let alpha =
            Alpha::new(j.alpha[0], j.alpha[1]).map_err(|e| PolyError::Malformed(e.to_string()))?;
        let family = match j.l {
            Some(l) if alpha.zeta() == 0.0 => Family::RealCase { k: alpha.eta(), l },
            Some(_) => return Err(PolyError::Malformed("`l` requires real alpha".into())),
            None => Family::Alpha { alpha },
        };
        let coeffs: Vec<Complex64> = j
            .coeffs
            .iter()
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        let c0 = coeffs[0] * j.scale.exp();
        if (c0 - 1.0).norm() > 1e-9 {
            return Err(PolyError::Malformed(format!("constant term {c0} != 1")));
        }
        if coeffs[j.n].norm() == 0.0 {
            return Err(PolyError::Malformed("zero leading coefficient".into()));
        }
        Ok(Self {
            family,
            degree: j.n,
            coeffs,
            scale: j.scale,
            precision: Precision::Double,
            wide: None,
        })
    }
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolynomialJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = PolynomialJson::deserialize(d)?;
        Polynomial::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rat(num: i64, den: i64) -> Rational {
        Rational::from((num, den))
    }

    #[test]
    fn small_degree_examples() {
        let one = Alpha::real(1.0).unwrap();
        let p0 = coefficients(0, one);
        assert_eq!(p0.degree(), 0);
        assert_relative_eq!(p0.coefficient(0).re, 1.0);

        let p1 = coefficients(1, one);
        assert_relative_eq!(p1.coefficient(0).re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(p1.coefficient(1).re, -2.0 / 3.0, epsilon = 1e-15);
        assert!(p1.evaluate(c(1.5, 0.0)).value.norm() < 1e-15);

        let p2 = coefficients(2, one);
        let expect = [1.0, -1.5, 0.6];
        for (k, e) in expect.iter().enumerate() {
            assert_relative_eq!(p2.coefficient(k).re, *e, epsilon = 1e-14);
            assert_eq!(p2.coefficient(k).im, 0.0);
        }
        assert_relative_eq!(p2.evaluate(c(1.0, 0.0)).value.re, 0.1, epsilon = 1e-14);
    }

    #[test]
    fn exact_small_degree() {
        let cs = exact_alpha_coefficients(2, &rat(1, 1));
        assert_eq!(cs, vec![rat(1, 1), rat(-3, 2), rat(3, 5)]);
        assert_eq!(exact_evaluate(&cs, &rat(1, 1)), rat(1, 10));
        let cs = exact_alpha_coefficients(1, &rat(1, 1));
        assert_eq!(exact_evaluate(&cs, &rat(3, 2)), Rational::new());
    }

    #[test]
    fn value_at_origin_is_one() {
        for (n, a) in [(5, (1.0, 1.0)), (17, (2.0, -1.0)), (40, (0.5, 0.25))] {
            let p = coefficients(n, Alpha::new(a.0, a.1).unwrap());
            let v = p.evaluate(c(0.0, 0.0)).value;
            assert_relative_eq!(v.re, 1.0, epsilon = 1e-13);
            assert!(v.im.abs() < 1e-13);
        }
    }

    #[test]
    fn scaling_invariants() {
        for n in [0, 1, 7, 30, 60, 200] {
            for a in [(1.0, 0.0), (1.0, 1.0), (2.0, -1.0)] {
                let p = coefficients(n, Alpha::new(a.0, a.1).unwrap());
                assert_eq!(p.coeffs().len(), n + 1);
                assert!(p.coeffs()[n].norm() > 0.0);
                let c0 = p.coeffs()[0] * p.scale().exp();
                assert!((c0 - 1.0).norm() < 1e-12, "n={n}: {c0}");
                let m = p.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
                assert_relative_eq!(m, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn wide_and_double_coefficients_agree() {
        let a = Alpha::new(1.0, 1.0).unwrap();
        let pd = Polynomial::new(Family::Alpha { alpha: a }, 40, Precision::Double).unwrap();
        let pw = Polynomial::new(
            Family::Alpha { alpha: a },
            40,
            Precision::Extended { bits: 256 },
        )
        .unwrap();
        assert_relative_eq!(pd.scale(), pw.scale(), epsilon = 1e-12);
        for (x, y) in pd.coeffs().iter().zip(pw.coeffs()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn wide_evaluation_matches_exact_rational() {
        // alpha = 3/2, n = 20 at z = 5/4, exact value against MPFR.
        let n = 20;
        let cs = exact_alpha_coefficients(n, &rat(3, 2));
        let exact = exact_evaluate(&cs, &rat(5, 4)).to_f64();
        let p = Polynomial::new(
            Family::Alpha {
                alpha: Alpha::real(1.5).unwrap(),
            },
            n,
            Precision::Extended { bits: 192 },
        )
        .unwrap();
        let e = p.evaluate_wide(c(1.25, 0.0), 192);
        assert_relative_eq!(e.value.re, exact, max_relative = 1e-14);
        assert!(e.rel_error.unwrap() < 1e-20);
        let cert = p.evaluate_certified(c(1.25, 0.0), 1e-30);
        assert!(cert.rel_error.unwrap() <= 1e-30);
    }

    #[test]
    fn real_case_family_matches_shifted_b() {
        // k = 1, l = 3 has b = n + 4.
        let fam = Family::RealCase { k: 1.0, l: 3.0 };
        let p = Polynomial::new(fam, 6, Precision::Double).unwrap();
        let cs = exact_coefficients(6, &rat(10, 1));
        for (k, e) in cs.iter().enumerate() {
            assert_relative_eq!(p.coefficient(k).re, e.to_f64(), max_relative = 1e-13);
        }
    }

    #[test]
    fn json_shape_and_roundtrip() {
        let p = coefficients(3, Alpha::new(1.0, 1.0).unwrap());
        let v = p.to_json_value();
        assert_eq!(v["n"], 3);
        assert_eq!(v["alpha"], serde_json::json!([1.0, 1.0]));
        assert_eq!(v["coeffs"].as_array().unwrap().len(), 4);
        assert!(v["scale"].is_number());
        assert!(v.get("l").is_none());
        let back: Polynomial = serde_json::from_value(v).unwrap();
        assert_eq!(back.coeffs(), p.coeffs());
        assert_eq!(back.scale(), p.scale());

        let bad =
            serde_json::json!({"n": 2, "alpha": [1.0, 0.0], "coeffs": [[1.0, 0.0]], "scale": 0.0});
        assert!(serde_json::from_value::<Polynomial>(bad).is_err());
    }
}

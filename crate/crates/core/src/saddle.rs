//! The saddle `t0 = alpha / ((alpha + 1) z)` of `phi`, the leading-order
//! saddle-point estimate of `I_1 = int_0^{1/z} g(t)^n dt`, and the level
//! constant of the limiting curve.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flows::{self, FlowError, Region};
use crate::kernel::{self, Alpha, BranchTrackedValue, KernelError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SaddleError {
    #[error("z = 0 has no saddle point")]
    ZeroArgument,
    #[error("z = {z} is not in E (classified {label:?}); the saddle estimate of I_1 needs z in E")]
    NotInE { z: Complex64, label: Region },
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// A complex number stored as `exp(log_modulus + i phase)`, for values like
/// `g(t0)^n` that leave the `f64` range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledComplex {
    pub log_modulus: f64,
    pub phase: f64,
}

impl ScaledComplex {
    pub const ZERO: ScaledComplex = ScaledComplex {
        log_modulus: f64::NEG_INFINITY,
        phase: 0.0,
    };

    pub fn from_complex(c: Complex64) -> Self {
        if c.norm() == 0.0 {
            return Self::ZERO;
        }
        Self {
            log_modulus: c.norm().ln(),
            phase: c.arg(),
        }
    }

    /// `exp(log_scale) * c`.
    pub fn from_scaled(c: Complex64, log_scale: f64) -> Self {
        let mut s = Self::from_complex(c);
        s.log_modulus += log_scale;
        s
    }

    /// The value rescaled by `exp(-log_scale)`.
    pub fn to_complex_scaled(&self, log_scale: f64) -> Complex64 {
        if self.log_modulus == f64::NEG_INFINITY {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar((self.log_modulus - log_scale).exp(), self.phase)
    }

    pub fn to_complex(&self) -> Complex64 {
        self.to_complex_scaled(0.0)
    }

    pub fn abs(&self) -> f64 {
        self.log_modulus.exp()
    }

    /// Phase folded into `(-pi, pi]`.
    pub fn principal_phase(&self) -> f64 {
        let p = self.phase.rem_euclid(TAU);
        if p > PI {
            p - TAU
        } else {
            p
        }
    }

    pub fn mul(&self, other: &ScaledComplex) -> ScaledComplex {
        ScaledComplex {
            log_modulus: self.log_modulus + other.log_modulus,
            phase: self.phase + other.phase,
        }
    }

    pub fn add(&self, other: &ScaledComplex) -> ScaledComplex {
        let s = self.log_modulus.max(other.log_modulus);
        if s == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        Self::from_scaled(self.to_complex_scaled(s) + other.to_complex_scaled(s), s)
    }

    pub fn neg(&self) -> ScaledComplex {
        ScaledComplex {
            log_modulus: self.log_modulus,
            phase: self.phase + PI,
        }
    }

    /// `|self|^(1/n)`.
    pub fn nth_root_abs(&self, n: usize) -> f64 {
        (self.log_modulus / n as f64).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleData {
    pub z: Complex64,
    pub t0: Complex64,
    /// `phi''(t0)`, evaluated numerically from `-alpha/t^2 - z^2/(1 - z t)^2`.
    pub phi_pp: Complex64,
    pub phi_pp_mod: f64,
    pub phi_pp_arg: f64,
    /// `log g(t0) = phi(t0)` on the principal branch.
    pub g_at_t0: BranchTrackedValue,
}

pub fn saddle_point(z: Complex64, alpha: Alpha) -> Result<SaddleData, SaddleError> {
    if z.norm() == 0.0 {
        return Err(SaddleError::ZeroArgument);
    }
    let a = alpha.as_complex();
    let t0 = a / ((a + 1.0) * z);
    let phi_pp = kernel::phi_second(t0, z, alpha)?;
    let v = kernel::phi_principal(t0, z, alpha)?;
    Ok(SaddleData {
        z,
        t0,
        phi_pp,
        phi_pp_mod: phi_pp.norm(),
        phi_pp_arg: phi_pp.arg(),
        g_at_t0: BranchTrackedValue {
            value: v.value,
            imag_phase: v.value.im,
        },
    })
}

/// `|(alpha/(alpha+1))^alpha| / |alpha + 1|`, principal logarithm.
pub fn level_constant(alpha: Alpha) -> f64 {
    let a = alpha.as_complex();
    let w0 = a / (a + 1.0);
    (a * w0.ln()).re.exp() / (a + 1.0).norm()
}

/// `log |g(t0)|` on the branch where `log t0 = log_t0`.
fn log_g_t0(alpha: Alpha, z: Complex64, log_t0: Complex64) -> Complex64 {
    let a = alpha.as_complex();
    let t0 = a / ((a + 1.0) * z);
    alpha.as_complex() * log_t0 + (Complex64::new(1.0, 0.0) - z * t0).ln()
}

/// Leading saddle-point term `d sqrt(2 pi / (n |phi''|)) exp(n phi(t0))`,
/// with `log t0` given explicitly and `direction` the unit tangent of the
/// contour as it crosses the saddle.
pub fn i1_asymptotic_on_branch(
    n: usize,
    z: Complex64,
    alpha: Alpha,
    log_t0: Complex64,
    direction: Complex64,
) -> Result<ScaledComplex, SaddleError> {
    let s = saddle_point(z, alpha)?;
    let lg = log_g_t0(alpha, z, log_t0);
    let nf = n as f64;
    Ok(ScaledComplex {
        log_modulus: nf * lg.re + 0.5 * (2.0 * PI / (nf * s.phi_pp_mod)).ln(),
        phase: nf * lg.im + direction.arg(),
    })
}

/// Saddle-point estimate of `I_1` for `z` in `E`, on the branch of `log t0`
/// continued from `t = 1` through `1/z` (see [`flows::descent_contour`]).
pub fn i1_asymptotic(n: usize, z: Complex64, alpha: Alpha) -> Result<ScaledComplex, SaddleError> {
    if z.norm() == 0.0 {
        return Err(SaddleError::ZeroArgument);
    }
    let label = flows::classify_region(z, alpha, &flows::ClassifyOptions::default())?;
    if label.label != Region::InE {
        return Err(SaddleError::NotInE {
            z,
            label: label.label,
        });
    }
    let s = saddle_point(z, alpha)?;
    let contour = flows::descent_contour(z, alpha, &flows::StopRule::default())?;
    let d = contour.to_pole.points[1] - s.t0;
    let log_t0 = contour.phi_at_saddle().branch.log_t.continued();
    i1_asymptotic_on_branch(n, z, alpha, log_t0, d / d.norm())
}

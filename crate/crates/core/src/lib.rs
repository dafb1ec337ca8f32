//! Numerical verification toolkit for the zeros of the hypergeometric
//! polynomials `p_n(z) = 2F1(-n, alpha n + 1; alpha n + 2; z)`.
//!
//! As `n` grows the zeros of `p_n` accumulate on the part of the level curve
//! `|z^alpha (1 - z)| = |(alpha/(alpha+1))^alpha / (alpha+1)|` that lies in the
//! region `E`, the basin of `w = 1` under the steepest-descent flow of
//! `psi(w) = alpha log w + log(1 - w)`. This crate computes every object
//! involved in that statement: the polynomials and their zeros, the Euler
//! integral and its split along steepest-descent contours, the saddle-point
//! asymptotics, the region `E`, and the level curve itself.

pub mod flows;
pub mod hyperpoly;
pub mod kernel;
pub mod levelcurve;
pub mod quadrature;
pub mod roots;
pub mod saddle;
pub mod verify;

pub use flows::{classify_region, Direction, PathTrace, Region, RegionLabel, Terminal};
pub use hyperpoly::{coefficients, Evaluation, Family, Polynomial};
pub use kernel::{Alpha, BranchTrackedValue, PhiBranch, Precision, Regime};
pub use saddle::{level_constant, saddle_point, SaddleData};
pub use verify::{
    emit_report, run_realcase_crosscheck, run_theorem_check, ExperimentConfig, VerificationReport,
};

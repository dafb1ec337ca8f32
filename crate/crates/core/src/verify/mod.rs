//! Experiment runs, reports and their JSON, CSV and SVG forms.

mod config;
mod emit;

use std::f64::consts::PI;
use std::path::PathBuf;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flows::{self, ClassifyOptions, PathTraceJson, Region, RegionLabel, StopRule};
use crate::hyperpoly::{Family, Polynomial};
use crate::kernel::Alpha;
use crate::levelcurve::{self, CurveOptions, Distances, LevelCurve};
use crate::quadrature::{self, QuadOptions};
use crate::roots::{self, RootOptions, ZeroSet};
use crate::saddle::{self, level_constant};

pub use config::{
    parse_config_text, ConfigError, ExperimentConfig, Format, GridSpec, Tolerances, KEYS,
};
pub use emit::{emit_asym, emit_curve, emit_region_map, emit_report, render_svg};

pub const SCHEMA: &str = "hypzero/1";

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("a z-grid is required for the region map")]
    MissingGrid,
    #[error("format {0} is not available for this output")]
    UnsupportedFormat(Format),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunKind {
    Theorem,
    Realcase,
}

impl RunKind {
    pub fn stem(&self) -> &'static str {
        match self {
            RunKind::Theorem => "theorem",
            RunKind::Realcase => "realcase",
        }
    }
}

/// Roots that contradict the zero-free region, plus classification gaps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ZeroFree {
    /// Roots with `Re z <= 0`.
    pub left_half_plane: usize,
    /// Roots labelled `NotInE`.
    pub not_in_e: usize,
    pub boundary: usize,
    /// Roots the classifier could not label.
    pub unclassified: usize,
    /// Roots with `Re z <= Re(alpha/(alpha+1))`.
    pub left_of_crossing: usize,
    /// Smallest classifier margin over the roots labelled `InE`.
    pub min_in_e_margin: Option<f64>,
}

/// Contour integrals at one root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSample {
    pub z: Complex64,
    /// `|1 - z|`, the common limit of the two roots below.
    pub one_minus_z: f64,
    pub i1_root: Option<f64>,
    pub i2_root: Option<f64>,
    /// `|I1| / |I1 asymptotic|`.
    pub i1_ratio: Option<f64>,
    /// `|K|^{1/n}`.
    pub k_root: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeRecord {
    pub n: usize,
    pub config_hash: String,
    /// Empty when every step succeeded and every root converged.
    pub flags: Vec<String>,
    pub zeros: Option<ZeroSet>,
    pub regions: Vec<Option<RegionLabel>>,
    /// Distances from the zeros to the `InE` arcs.
    pub distances: Option<Distances>,
    pub coverage_gap: Option<f64>,
    pub zero_free: ZeroFree,
    pub samples: Vec<RootSample>,
}

impl DegreeRecord {
    pub fn max_distance(&self) -> Option<f64> {
        self.distances.as_ref().map(|d| d.max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub kind: RunKind,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub family: Family,
    pub level_constant: f64,
    pub curve: Option<LevelCurve>,
    pub curve_error: Option<String>,
    pub separatrices: Vec<PathTraceJson>,
    /// One record per entry of the n list, in order.
    pub records: Vec<DegreeRecord>,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn record(&self, n: usize) -> Option<&DegreeRecord> {
        self.records.iter().find(|r| r.n == n)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, VerifyError> {
        Ok(serde_json::from_str(s)?)
    }
}

pub(crate) fn stop_rule(c: &ExperimentConfig) -> StopRule {
    StopRule {
        corrector_tol: c.tolerances.corrector,
        ..StopRule::default()
    }
}

pub(crate) fn classify_options(c: &ExperimentConfig) -> ClassifyOptions {
    ClassifyOptions {
        boundary_tol: c.tolerances.boundary,
        stop: stop_rule(c),
    }
}

fn curve_options(c: &ExperimentConfig) -> CurveOptions {
    CurveOptions {
        corrector_tol: c.tolerances.curve,
        classify: classify_options(c),
        ..CurveOptions::default()
    }
}

fn quad_options(c: &ExperimentConfig) -> QuadOptions {
    QuadOptions {
        rel_tol: c.tolerances.quadrature,
        ..QuadOptions::default()
    }
}

/// `root` values are `|x|^{1/n}` computed from `log|x|`.
fn nth_root(log_modulus: f64, n: usize) -> f64 {
    (log_modulus / n as f64).exp()
}

fn sample_root(z: Complex64, n: usize, alpha: Alpha, c: &ExperimentConfig) -> RootSample {
    let mut s = RootSample {
        z,
        one_minus_z: (1.0 - z).norm(),
        i1_root: None,
        i2_root: None,
        i1_ratio: None,
        k_root: None,
        error: None,
    };
    let q = quad_options(c);
    let mut errs = Vec::new();
    match quadrature::integrate_i1_with(n, alpha, z, c.epsilon, &q) {
        Ok(i1) => {
            s.i1_root = Some(nth_root(i1.log_modulus, n));
            match saddle::i1_asymptotic(n, z, alpha) {
                Ok(a) => s.i1_ratio = Some((i1.log_modulus - a.log_modulus).exp()),
                Err(e) => errs.push(format!("asymptotic: {e}")),
            }
        }
        Err(e) => errs.push(format!("I1: {e}")),
    }
    match quadrature::integrate_i2_with(n, alpha, z, &q) {
        Ok(i2) => {
            s.i2_root = Some(nth_root(i2.integral.log_modulus, n));
            s.k_root = Some(i2.k.norm().powf(1.0 / n as f64));
        }
        Err(e) => errs.push(format!("I2: {e}")),
    }
    if !errs.is_empty() {
        s.error = Some(errs.join("; "));
    }
    s
}

/// Up to `count` roots labelled `InE`, evenly spread in angle about `z = 1`.
fn pick_samples(
    zeros: &[Complex64],
    regions: &[Option<RegionLabel>],
    count: usize,
) -> Vec<Complex64> {
    let mut cand: Vec<Complex64> = zeros
        .iter()
        .zip(regions)
        .filter(|(_, r)| matches!(r, Some(l) if l.label == Region::InE))
        .map(|(z, _)| *z)
        .collect();
    cand.sort_by(|a, b| (a - 1.0).arg().total_cmp(&(b - 1.0).arg()));
    let m = cand.len();
    if m == 0 || count == 0 {
        return Vec::new();
    }
    let k = count.min(m);
    (0..k).map(|i| cand[(2 * i + 1) * m / (2 * k)]).collect()
}

struct Context<'a> {
    config: &'a ExperimentConfig,
    hash: &'a str,
    family: Family,
    curve: Option<&'a LevelCurve>,
    sample_integrals: bool,
}

fn run_degree(n: usize, cx: &Context) -> DegreeRecord {
    let c = cx.config;
    let alpha = cx.family.alpha();
    let mut rec = DegreeRecord {
        n,
        config_hash: cx.hash.to_string(),
        flags: Vec::new(),
        zeros: None,
        regions: Vec::new(),
        distances: None,
        coverage_gap: None,
        zero_free: ZeroFree::default(),
        samples: Vec::new(),
    };
    let p = match Polynomial::new(cx.family, n, c.precision) {
        Ok(p) => p,
        Err(e) => {
            rec.flags.push(format!("polynomial: {e}"));
            return rec;
        }
    };
    let ropts = RootOptions {
        residual_tol: c.tolerances.residual,
        forward_tol: c.tolerances.forward,
        seed: c.seed,
        ..RootOptions::default()
    };
    let zs = match roots::find_roots_with(&p, c.precision, &ropts) {
        Ok(z) => z,
        Err(e) => {
            rec.flags.push(format!("roots: {e}"));
            return rec;
        }
    };
    if !zs.iterations.converged {
        rec.flags.push(format!(
            "roots: {} of {n} did not meet the tolerances at {} bits",
            zs.iterations.flagged.len(),
            zs.iterations.bits
        ));
    }
    let copts = classify_options(c);
    let results: Vec<Result<RegionLabel, String>> = zs
        .zeros
        .par_iter()
        .map(|z| flows::classify_region(*z, alpha, &copts).map_err(|e| e.to_string()))
        .collect();
    let w0 = alpha.crossing_point();
    let zf = &mut rec.zero_free;
    for (z, r) in zs.zeros.iter().zip(&results) {
        zf.left_half_plane += (z.re <= 0.0) as usize;
        zf.left_of_crossing += (z.re <= w0.re) as usize;
        match r {
            Ok(l) => match l.label {
                Region::InE => {
                    zf.min_in_e_margin =
                        Some(zf.min_in_e_margin.map_or(l.margin, |m| m.min(l.margin)));
                }
                Region::NotInE => zf.not_in_e += 1,
                Region::Boundary => zf.boundary += 1,
            },
            Err(_) => zf.unclassified += 1,
        }
    }
    if let Some(e) = results.iter().find_map(|r| r.as_ref().err()) {
        rec.flags.push(format!(
            "classify: {} roots unlabelled, first error: {e}",
            zf.unclassified
        ));
    }
    rec.regions = results.into_iter().map(Result::ok).collect();
    match cx.curve {
        Some(curve) => {
            match levelcurve::distance_to_curve(&zs.zeros, curve, true) {
                Ok(d) => rec.distances = Some(d),
                Err(e) => rec.flags.push(format!("distance: {e}")),
            }
            match levelcurve::coverage_gap(&zs.zeros, curve, true) {
                Ok(g) => rec.coverage_gap = Some(g),
                Err(e) => rec.flags.push(format!("coverage: {e}")),
            }
        }
        None => rec.flags.push("distance: no level curve".into()),
    }
    if cx.sample_integrals {
        let picks = pick_samples(&zs.zeros, &rec.regions, c.samples);
        rec.samples = picks
            .par_iter()
            .map(|z| sample_root(*z, n, alpha, c))
            .collect();
        if let Some(e) = rec.samples.iter().find_map(|s| s.error.as_ref()) {
            rec.flags.push(format!("samples: {e}"));
        }
    }
    rec.zeros = Some(zs);
    rec
}

fn common_checks(records: &[DegreeRecord]) -> Vec<Check> {
    let mut checks = Vec::new();
    let flagged: Vec<String> = records
        .iter()
        .filter(|r| !r.flags.is_empty())
        .map(|r| format!("n={}: {}", r.n, r.flags.join("; ")))
        .collect();
    checks.push(Check {
        name: "records_complete".into(),
        passed: flagged.is_empty(),
        detail: if flagged.is_empty() {
            format!("{} records, none flagged", records.len())
        } else {
            flagged.join(" | ")
        },
    });
    let left: usize = records.iter().map(|r| r.zero_free.left_half_plane).sum();
    let out: usize = records.iter().map(|r| r.zero_free.not_in_e).sum();
    checks.push(Check {
        name: "zero_free".into(),
        passed: left == 0 && out == 0,
        detail: format!("{left} roots with Re z <= 0, {out} roots labelled NotInE"),
    });
    let first = records.first().and_then(DegreeRecord::max_distance);
    let last = records.last().and_then(DegreeRecord::max_distance);
    let (passed, detail) = match (records.len(), first, last) {
        (1, _, _) => (true, "single degree, no trend".to_string()),
        (_, Some(a), Some(b)) => (
            b < a,
            format!(
                "max distance {a:.6} at n={} and {b:.6} at n={}",
                records[0].n,
                records[records.len() - 1].n
            ),
        ),
        _ => (false, "distances missing".to_string()),
    };
    checks.push(Check {
        name: "distance_trend".into(),
        passed,
        detail,
    });
    checks
}

fn run(
    config: &ExperimentConfig,
    kind: RunKind,
    family: Family,
    sample_integrals: bool,
) -> Result<VerificationReport, VerifyError> {
    config.validate()?;
    let hash = config.hash();
    let alpha = family.alpha();
    let (curve, curve_error) = match levelcurve::trace_level_curve(alpha, &curve_options(config)) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let separatrices = flows::separatrices(alpha, &stop_rule(config))
        .map(|s| s.iter().map(|t| t.to_json()).collect())
        .unwrap_or_default();
    let cx = Context {
        config,
        hash: &hash,
        family,
        curve: curve.as_ref(),
        sample_integrals,
    };
    let records: Vec<DegreeRecord> = config
        .n_list
        .par_iter()
        .map(|&n| run_degree(n, &cx))
        .collect();
    let mut checks = common_checks(&records);
    if kind == RunKind::Realcase {
        let left: usize = records.iter().map(|r| r.zero_free.left_of_crossing).sum();
        checks.push(Check {
            name: "loop_side".into(),
            passed: left == 0,
            detail: format!("{left} roots with Re z <= {:.6}", alpha.crossing_point().re),
        });
    }
    Ok(VerificationReport {
        schema: SCHEMA.into(),
        kind,
        config_hash: hash,
        config: config.clone(),
        family,
        level_constant: level_constant(alpha),
        curve,
        curve_error,
        separatrices,
        records,
        checks,
    })
}

/// Zeros of `2F1(-n, alpha n + 1; alpha n + 2; z)` for each n against the
/// `InE` arcs of `|z^alpha (1 - z)| = level_constant(alpha)`.
pub fn run_theorem_check(config: &ExperimentConfig) -> Result<VerificationReport, VerifyError> {
    run(
        config,
        RunKind::Theorem,
        Family::Alpha {
            alpha: config.alpha,
        },
        true,
    )
}

/// The real family `2F1(-n, k n + l + 1; k n + l + 2; z)` against the loop
/// `|z^k (z - 1)| = k^k / (k + 1)^{k + 1}`. Contour samples are only taken
/// for `l = 0`, where the family coincides with `alpha = k`.
pub fn run_realcase_crosscheck(
    k: f64,
    l: f64,
    n_list: &[usize],
) -> Result<VerificationReport, VerifyError> {
    let config = ExperimentConfig {
        alpha: Alpha::real(k).map_err(|e| ConfigError::BadValue {
            key: "k".into(),
            value: k.to_string(),
            reason: e.to_string(),
        })?,
        l,
        n_list: n_list.to_vec(),
        ..ExperimentConfig::default()
    };
    run_realcase_with(&config)
}

/// [`run_realcase_crosscheck`] with `k = Re alpha` and the remaining
/// settings taken from `config`.
pub fn run_realcase_with(config: &ExperimentConfig) -> Result<VerificationReport, VerifyError> {
    if config.alpha.zeta() != 0.0 {
        return Err(ConfigError::Invalid(format!(
            "real case needs real alpha, got {}",
            config.alpha
        ))
        .into());
    }
    let family = Family::RealCase {
        k: config.alpha.eta(),
        l: config.l,
    };
    run(config, RunKind::Realcase, family, config.l == 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMap {
    pub schema: String,
    pub config_hash: String,
    pub alpha: Alpha,
    pub grid: GridSpec,
    pub points: Vec<Complex64>,
    pub labels: Vec<Option<RegionLabel>>,
}

impl RegionMap {
    pub fn count(&self, region: Region) -> usize {
        self.labels
            .iter()
            .flatten()
            .filter(|l| l.label == region)
            .count()
    }
}

/// Classify every point of the configured grid.
pub fn run_region_map(config: &ExperimentConfig) -> Result<RegionMap, VerifyError> {
    config.validate()?;
    let grid = config.grid.ok_or(VerifyError::MissingGrid)?;
    let points = grid.points();
    let opts = classify_options(config);
    let labels = points
        .par_iter()
        .map(|z| flows::classify_region(*z, config.alpha, &opts).ok())
        .collect();
    Ok(RegionMap {
        schema: SCHEMA.into(),
        config_hash: config.hash(),
        alpha: config.alpha,
        grid,
        points,
        labels,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub schema: String,
    pub config_hash: String,
    pub alpha: Alpha,
    pub curve: LevelCurve,
    pub separatrices: Vec<PathTraceJson>,
}

pub fn run_curve(config: &ExperimentConfig) -> Result<CurveReport, VerifyError> {
    config.validate()?;
    let curve = levelcurve::trace_level_curve(config.alpha, &curve_options(config))
        .map_err(|e| ConfigError::Invalid(format!("level curve: {e}")))?;
    let separatrices = flows::separatrices(config.alpha, &stop_rule(config))
        .map(|s| s.iter().map(|t| t.to_json()).collect())
        .unwrap_or_default();
    Ok(CurveReport {
        schema: SCHEMA.into(),
        config_hash: config.hash(),
        alpha: config.alpha,
        curve,
        separatrices,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymRow {
    pub z: Complex64,
    pub n: usize,
    pub ratio: Option<f64>,
    /// Whether `ratio` lies in `[1 - 6/n, 1 + 6/n]`.
    pub within: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymTable {
    pub schema: String,
    pub config_hash: String,
    pub alpha: Alpha,
    pub rows: Vec<AsymRow>,
}

impl AsymTable {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.within)
    }
}

/// Default ratio-table points: between the crossing point and `z = 1`.
pub fn default_asym_points(alpha: Alpha) -> Vec<Complex64> {
    let w0 = alpha.crossing_point();
    [0.0, 0.5, -0.5]
        .iter()
        .map(|t: &f64| w0 + (1.0 - w0) * Complex64::from_polar(0.5, *t * PI / 4.0))
        .collect()
}

/// `|I1| / |I1 asymptotic|` for every configured point and degree.
pub fn run_asym_table(config: &ExperimentConfig) -> Result<AsymTable, VerifyError> {
    config.validate()?;
    let points = if config.points.is_empty() {
        default_asym_points(config.alpha)
    } else {
        config.points.clone()
    };
    let jobs: Vec<(Complex64, usize)> = points
        .iter()
        .flat_map(|z| config.n_list.iter().map(move |n| (*z, *n)))
        .collect();
    let q = quad_options(config);
    let rows = jobs
        .par_iter()
        .map(|&(z, n)| {
            let r = quadrature::integrate_i1_with(n, config.alpha, z, config.epsilon, &q)
                .map_err(|e| e.to_string())
                .and_then(|i1| {
                    saddle::i1_asymptotic(n, z, config.alpha)
                        .map(|a| (i1.log_modulus - a.log_modulus).exp())
                        .map_err(|e| e.to_string())
                });
            match r {
                Ok(ratio) => AsymRow {
                    z,
                    n,
                    ratio: Some(ratio),
                    within: (ratio - 1.0).abs() <= 6.0 / n as f64,
                    error: None,
                },
                Err(e) => AsymRow {
                    z,
                    n,
                    ratio: None,
                    within: false,
                    error: Some(e),
                },
            }
        })
        .collect();
    Ok(AsymTable {
        schema: SCHEMA.into(),
        config_hash: config.hash(),
        alpha: config.alpha,
        rows,
    })
}

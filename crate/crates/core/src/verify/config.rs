//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::kernel::{Alpha, Precision};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Output format of [`emit_report`](super::emit_report).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Svg => "svg",
        })
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format `{other}` (json, csv, svg)")),
        }
    }
}

/// Rectangular z-grid `re0:re1:im0:im1:steps`, `steps` points per side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub re: [f64; 2],
    pub im: [f64; 2],
    pub steps: usize,
}

impl GridSpec {
    /// Row-major points, real part fastest.
    pub fn points(&self) -> Vec<Complex64> {
        let at = |r: [f64; 2], i: usize| {
            if self.steps == 1 {
                0.5 * (r[0] + r[1])
            } else {
                r[0] + (r[1] - r[0]) * i as f64 / (self.steps - 1) as f64
            }
        };
        (0..self.steps)
            .flat_map(|j| {
                (0..self.steps).map(move |i| Complex64::new(at(self.re, i), at(self.im, j)))
            })
            .collect()
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}:{}:{}",
            self.re[0], self.re[1], self.im[0], self.im[1], self.steps
        )
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        if parts.len() != 5 {
            return Err("expected re0:re1:im0:im1:steps".into());
        }
        let f = |i: usize| {
            parts[i]
                .trim()
                .parse::<f64>()
                .map_err(|e| format!("{}: {e}", parts[i]))
        };
        let steps = parts[4]
            .trim()
            .parse::<usize>()
            .map_err(|e| format!("{}: {e}", parts[4]))?;
        let g = GridSpec {
            re: [f(0)?, f(1)?],
            im: [f(2)?, f(3)?],
            steps,
        };
        if !(g.re.iter().chain(&g.im).all(|v| v.is_finite()))
            || g.re[0] > g.re[1]
            || g.im[0] > g.im[1]
        {
            return Err("bounds must be finite and ordered".into());
        }
        if steps == 0 {
            return Err("steps must be at least 1".into());
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Condition-scaled residual bound for roots.
    pub residual: f64,
    /// Relative Newton-step bound for roots.
    pub forward: f64,
    /// Flow corrector tolerance on `Im phi`.
    pub corrector: f64,
    /// Level-curve corrector tolerance.
    pub curve: f64,
    /// Separatrix distance below which a point is `Boundary`.
    pub boundary: f64,
    /// Relative tolerance for contour quadrature.
    pub quadrature: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-10,
            forward: 1e-12,
            corrector: 1e-12,
            curve: 1e-13,
            boundary: 1e-6,
            quadrature: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub alpha: Alpha,
    /// Shift `l` of the real family; only read by the real-case run.
    pub l: f64,
    pub n_list: Vec<usize>,
    pub precision: Precision,
    pub tolerances: Tolerances,
    pub out_dir: Option<PathBuf>,
    pub formats: Vec<Format>,
    pub grid: Option<GridSpec>,
    /// Zeros per degree at which the contour integrals are sampled.
    pub samples: usize,
    /// Extra sample points for the asymptotic ratio table.
    pub points: Vec<Complex64>,
    /// Truncation radius of the `I1` spiral at `t = 0`.
    pub epsilon: f64,
    /// Root-finder jitter seed.
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            alpha: Alpha::new(1.0, 1.0).expect("valid default alpha"),
            l: 0.0,
            n_list: vec![10, 20, 40],
            precision: Precision::Double,
            tolerances: Tolerances::default(),
            out_dir: None,
            formats: vec![Format::Json],
            grid: None,
            samples: 3,
            points: Vec::new(),
            epsilon: 1e-9,
            seed: 0x5eed,
        }
    }
}

pub const KEYS: &[&str] = &[
    "alpha_re",
    "alpha_im",
    "l",
    "n",
    "precision",
    "out",
    "format",
    "tol_residual",
    "tol_forward",
    "tol_corrector",
    "tol_curve",
    "tol_boundary",
    "tol_quadrature",
    "grid",
    "samples",
    "points",
    "epsilon",
    "seed",
];

/// Parse `key = value` lines; `#` starts a comment. Later keys win.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            });
        };
        let key = k.trim().replace('-', "_");
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            });
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

fn bad(key: &str, value: &str, reason: impl ToString) -> ConfigError {
    ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| bad(key, value, e))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

fn parse_points(key: &str, value: &str) -> Result<Vec<Complex64>, ConfigError> {
    value
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let v: Vec<f64> = list(key, s)?;
            match v[..] {
                [re, im] => Ok(Complex64::new(re, im)),
                _ => Err(bad(key, value, "points are `re,im` pairs separated by `;`")),
            }
        })
        .collect()
}

impl ExperimentConfig {
    /// Defaults overridden by each layer in turn, so pass the file layer
    /// before the command-line layer.
    pub fn from_layers(layers: &[&BTreeMap<String, String>]) -> Result<Self, ConfigError> {
        let mut merged = BTreeMap::new();
        for layer in layers {
            for (k, v) in layer.iter() {
                merged.insert(k.replace('-', "_"), v.clone());
            }
        }
        let mut c = Self::default();
        let (mut re, mut im) = (c.alpha.eta(), c.alpha.zeta());
        for (k, v) in &merged {
            match k.as_str() {
                "alpha_re" => re = num(k, v)?,
                "alpha_im" => im = num(k, v)?,
                "l" => c.l = num(k, v)?,
                "n" => c.n_list = list(k, v)?,
                "precision" => c.precision = num(k, v)?,
                "out" => c.out_dir = Some(PathBuf::from(v)),
                "format" => c.formats = list(k, v)?,
                "tol_residual" => c.tolerances.residual = num(k, v)?,
                "tol_forward" => c.tolerances.forward = num(k, v)?,
                "tol_corrector" => c.tolerances.corrector = num(k, v)?,
                "tol_curve" => c.tolerances.curve = num(k, v)?,
                "tol_boundary" => c.tolerances.boundary = num(k, v)?,
                "tol_quadrature" => c.tolerances.quadrature = num(k, v)?,
                "grid" => c.grid = Some(num(k, v)?),
                "samples" => c.samples = num(k, v)?,
                "points" => c.points = parse_points(k, v)?,
                "epsilon" => c.epsilon = num(k, v)?,
                "seed" => c.seed = num(k, v)?,
                _ => return Err(ConfigError::UnknownKey(k.clone())),
            }
        }
        c.alpha = Alpha::new(re, im).map_err(|e| bad("alpha", &format!("{re},{im}"), e))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_list.is_empty() {
            return Err(ConfigError::Invalid("n list is empty".into()));
        }
        if self.n_list[0] == 0 || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError::Invalid(format!(
                "n list must be positive and strictly increasing, got {:?}",
                self.n_list
            )));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("residual", t.residual),
            ("forward", t.forward),
            ("corrector", t.corrector),
            ("curve", t.curve),
            ("boundary", t.boundary),
            ("quadrature", t.quadrature),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::Invalid(format!(
                    "tolerance `{name}` must be positive, got {v}"
                )));
            }
        }
        if !(self.l >= 0.0 && self.l.is_finite()) {
            return Err(ConfigError::Invalid(format!(
                "l must be nonnegative, got {}",
                self.l
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.1) {
            return Err(ConfigError::Invalid(format!(
                "epsilon must lie in (0, 0.1), got {}",
                self.epsilon
            )));
        }
        if self.formats.is_empty() {
            return Err(ConfigError::Invalid("no output format".into()));
        }
        if self
            .points
            .iter()
            .any(|p| !p.re.is_finite() || !p.im.is_finite() || p.norm() == 0.0)
        {
            return Err(ConfigError::Invalid(
                "sample points must be finite and nonzero".into(),
            ));
        }
        Ok(())
    }

    /// The configuration as `key = value` text accepted by [`parse_config_text`].
    pub fn to_config_text(&self) -> String {
        let t = &self.tolerances;
        let join = |v: Vec<String>, sep: &str| v.join(sep);
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        put("alpha_re", format!("{:?}", self.alpha.eta()));
        put("alpha_im", format!("{:?}", self.alpha.zeta()));
        put("l", format!("{:?}", self.l));
        put(
            "n",
            join(self.n_list.iter().map(|n| n.to_string()).collect(), ","),
        );
        put("precision", self.precision.to_string());
        if let Some(o) = &self.out_dir {
            put("out", o.display().to_string());
        }
        put(
            "format",
            join(self.formats.iter().map(|f| f.to_string()).collect(), ","),
        );
        put("tol_residual", format!("{:e}", t.residual));
        put("tol_forward", format!("{:e}", t.forward));
        put("tol_corrector", format!("{:e}", t.corrector));
        put("tol_curve", format!("{:e}", t.curve));
        put("tol_boundary", format!("{:e}", t.boundary));
        put("tol_quadrature", format!("{:e}", t.quadrature));
        if let Some(g) = &self.grid {
            put("grid", g.to_string());
        }
        put("samples", self.samples.to_string());
        if !self.points.is_empty() {
            put(
                "points",
                join(
                    self.points
                        .iter()
                        .map(|p| format!("{:?},{:?}", p.re, p.im))
                        .collect(),
                    ";",
                ),
            );
        }
        put("epsilon", format!("{:e}", self.epsilon));
        put("seed", self.seed.to_string());
        s
    }

    /// SHA-256 of the canonical JSON form, hex encoded. Output paths are
    /// excluded so that the same experiment hashes the same wherever it is
    /// written.
    pub fn hash(&self) -> String {
        let mut canon = self.clone();
        canon.out_dir = None;
        canon.formats.clear();
        let bytes = serde_json::to_vec(&canon).expect("config serializes");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn cli_overrides_file_overrides_defaults() {
        let file =
            parse_config_text("alpha_re = 2\nalpha_im = -1 # comment\nn = 5, 10\nsamples = 1\n")
                .unwrap();
        let cli = map(&[("n", "7,9"), ("tol-boundary", "1e-5")]);
        let c = ExperimentConfig::from_layers(&[&file, &cli]).unwrap();
        assert_eq!(c.alpha, Alpha::new(2.0, -1.0).unwrap());
        assert_eq!(c.n_list, vec![7, 9]);
        assert_eq!(c.samples, 1);
        assert_eq!(c.tolerances.boundary, 1e-5);
        assert_eq!(c.tolerances.residual, 1e-10);
    }

    #[test]
    fn rejects_invalid_values() {
        let cases = [
            ("n", "10,5"),
            ("n", "0,3"),
            ("tol_residual", "0"),
            ("tol_quadrature", "-1"),
            ("alpha_re", "-1"),
            ("precision", "quad"),
            ("grid", "0:1:0:1"),
            ("format", "png"),
            ("l", "-2"),
        ];
        for (k, v) in cases {
            let m = map(&[(k, v)]);
            assert!(
                ExperimentConfig::from_layers(&[&m]).is_err(),
                "{k} = {v} accepted"
            );
        }
        let m = map(&[("bogus", "1")]);
        assert_eq!(
            ExperimentConfig::from_layers(&[&m]),
            Err(ConfigError::UnknownKey("bogus".into()))
        );
        assert!(matches!(
            parse_config_text("just words"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn text_roundtrip_and_hash() {
        let m = map(&[
            ("alpha_re", "0.5"),
            ("alpha_im", "1.25"),
            ("n", "3,8"),
            ("precision", "extended:256"),
            ("grid", "-1:2:-1.5:1.5:11"),
            ("points", "0.7,0.2; 0.8,-0.1"),
            ("format", "json,svg"),
        ]);
        let c = ExperimentConfig::from_layers(&[&m]).unwrap();
        let back =
            ExperimentConfig::from_layers(&[&parse_config_text(&c.to_config_text()).unwrap()])
                .unwrap();
        assert_eq!(c, back);
        assert_eq!(c.hash(), back.hash());
        assert_eq!(c.hash().len(), 64);
        let mut moved = c.clone();
        moved.out_dir = Some("/tmp/elsewhere".into());
        assert_eq!(c.hash(), moved.hash());
        moved.n_list = vec![3, 9];
        assert_ne!(c.hash(), moved.hash());
    }

    #[test]
    fn grid_points_are_row_major() {
        let g: GridSpec = "0:1:-1:1:3".parse().unwrap();
        let p = g.points();
        assert_eq!(p.len(), 9);
        assert_eq!(p[0], Complex64::new(0.0, -1.0));
        assert_eq!(p[1], Complex64::new(0.5, -1.0));
        assert_eq!(p[8], Complex64::new(1.0, 1.0));
    }
}

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hypzero_core::verify::{
    self, emit_asym, emit_curve, emit_region_map, emit_report, parse_config_text, ExperimentConfig,
    Format, VerificationReport, VerifyError,
};
use hypzero_core::Region;

#[derive(Parser)]
#[command(
    name = "hypzero",
    version,
    about = "Zeros of 2F1(-n, an+1; an+2; z) against their limiting level curve"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Zeros for each n against the InE arcs of the level curve.
    Check(Common),
    /// The real family 2F1(-n, kn+l+1; kn+l+2; z), k = --alpha-re.
    Realcase {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        l: Option<f64>,
    },
    /// Label every point of --grid as InE, NotInE or Boundary.
    Region(Common),
    /// Trace the level curve and separatrices only.
    Curve(Common),
    /// Table of |I1| over its saddle-point asymptotic.
    Asym {
        #[command(flatten)]
        common: Common,
        /// Sample points `re,im;re,im;...`.
        #[arg(long)]
        points: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    /// `key = value` file; flags given here take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_im: Option<f64>,
    /// Comma-separated, strictly increasing degrees.
    #[arg(long)]
    n: Option<String>,
    /// `double` or `extended:<bits>`.
    #[arg(long)]
    precision: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of json, csv, svg.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    tol_residual: Option<f64>,
    #[arg(long)]
    tol_boundary: Option<f64>,
    /// `re0:re1:im0:im1:steps`.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
}

enum Failure {
    Config(String),
    Run(String),
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Config(_)
            | VerifyError::MissingGrid
            | VerifyError::UnsupportedFormat(_)
            | VerifyError::Io { .. } => Failure::Config(e.to_string()),
            VerifyError::Json(_) => Failure::Run(e.to_string()),
        }
    }
}

impl Common {
    fn resolve(&self, extra: &[(&str, Option<String>)]) -> Result<ExperimentConfig, Failure> {
        let file = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
                parse_config_text(&text)
                    .map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?
            }
            None => BTreeMap::new(),
        };
        let mut cli = BTreeMap::new();
        let pairs = [
            ("alpha_re", self.alpha_re.map(|v| v.to_string())),
            ("alpha_im", self.alpha_im.map(|v| v.to_string())),
            ("n", self.n.clone()),
            ("precision", self.precision.clone()),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("format", self.format.clone()),
            ("tol_residual", self.tol_residual.map(|v| v.to_string())),
            ("tol_boundary", self.tol_boundary.map(|v| v.to_string())),
            ("grid", self.grid.clone()),
        ];
        for (k, v) in pairs
            .into_iter()
            .chain(extra.iter().map(|(k, v)| (*k, v.clone())))
        {
            if let Some(v) = v {
                cli.insert(k.to_string(), v);
            }
        }
        ExperimentConfig::from_layers(&[&file, &cli]).map_err(|e| Failure::Config(e.to_string()))
    }
}

fn print_report(r: &VerificationReport) {
    for rec in &r.records {
        let d = rec.max_distance().map_or("-".into(), |d| format!("{d:.6}"));
        let m = rec
            .zero_free
            .min_in_e_margin
            .map_or("-".into(), |m| format!("{m:.3e}"));
        println!(
            "n={:<5} max_distance={d:<10} min_margin={m:<10} not_in_e={} re<=0={}{}",
            rec.n,
            rec.zero_free.not_in_e,
            rec.zero_free.left_half_plane,
            if rec.flags.is_empty() {
                String::new()
            } else {
                format!(" flags: {}", rec.flags.join("; "))
            }
        );
        for s in &rec.samples {
            let f = |v: Option<f64>| v.map_or("-".into(), |v| format!("{v:.6}"));
            println!(
                "    z={:.6}{:+.6}i |1-z|={:.6} |I1|^(1/n)={} |I2|^(1/n)={} I1 ratio={} |K|^(1/n)={}",
                s.z.re,
                s.z.im,
                s.one_minus_z,
                f(s.i1_root),
                f(s.i2_root),
                f(s.i1_ratio),
                f(s.k_root)
            );
        }
    }
    for c in &r.checks {
        println!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
}

fn emit_all<F>(c: &ExperimentConfig, mut emit: F) -> Result<(), Failure>
where
    F: FnMut(Format, &std::path::Path) -> Result<Vec<PathBuf>, VerifyError>,
{
    let Some(dir) = &c.out_dir else { return Ok(()) };
    for f in &c.formats {
        for p in emit(*f, dir)? {
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Check(common) => {
            let c = common.resolve(&[])?;
            let r = verify::run_theorem_check(&c)?;
            print_report(&r);
            emit_all(&c, |f, d| emit_report(&r, f, d))?;
            Ok(r.passed())
        }
        Command::Realcase { common, l } => {
            let c = common.resolve(&[("l", l.map(|v| v.to_string()))])?;
            let r = verify::run_realcase_with(&c)?;
            print_report(&r);
            emit_all(&c, |f, d| emit_report(&r, f, d))?;
            Ok(r.passed())
        }
        Command::Region(common) => {
            let c = common.resolve(&[])?;
            let m = verify::run_region_map(&c)?;
            let unlabelled = m.labels.iter().filter(|l| l.is_none()).count();
            println!(
                "InE={} NotInE={} Boundary={} unclassified={unlabelled}",
                m.count(Region::InE),
                m.count(Region::NotInE),
                m.count(Region::Boundary)
            );
            emit_all(&c, |f, d| emit_region_map(&m, f, d))?;
            Ok(unlabelled == 0)
        }
        Command::Curve(common) => {
            let c = common.resolve(&[])?;
            let r = verify::run_curve(&c)?;
            println!("level constant {:.15}", r.curve.constant);
            for (i, a) in r.curve.arcs.iter().enumerate() {
                println!(
                    "arc {i}: {:?} {:?} {} points, length {:.6}",
                    a.label,
                    a.end,
                    a.points.len(),
                    a.length()
                );
            }
            emit_all(&c, |f, d| emit_curve(&r, f, d))?;
            Ok(true)
        }
        Command::Asym { common, points } => {
            let c = common.resolve(&[("points", points)])?;
            let t = verify::run_asym_table(&c)?;
            for r in &t.rows {
                let ratio = r.ratio.map_or_else(
                    || r.error.clone().unwrap_or_default(),
                    |v| format!("{v:.8}"),
                );
                println!(
                    "z={:.6}{:+.6}i n={:<5} ratio={ratio} within={}",
                    r.z.re, r.z.im, r.n, r.within
                );
            }
            emit_all(&c, |f, d| emit_asym(&t, f, d))?;
            Ok(t.passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
    }
}

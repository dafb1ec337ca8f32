use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use super::{
    AsymTable, CurveReport, DegreeRecord, Format, RegionMap, VerificationReport, VerifyError,
};
use crate::flows::{PathTraceJson, Region};
use crate::levelcurve::LevelCurve;

fn write(dir: &Path, name: String, body: &str) -> Result<PathBuf, VerifyError> {
    fs::create_dir_all(dir).map_err(|source| VerifyError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    fs::write(&path, body).map_err(|source| VerifyError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn region_name(r: Option<Region>) -> &'static str {
    match r {
        Some(Region::InE) => "in_e",
        Some(Region::NotInE) => "not_in_e",
        Some(Region::Boundary) => "boundary",
        None => "unclassified",
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

fn degree_csv(rec: &DegreeRecord) -> String {
    let mut s = String::from("re,im,residual,forward_error,distance,region,margin\n");
    let Some(zs) = &rec.zeros else { return s };
    for (i, z) in zs.zeros.iter().enumerate() {
        let d = rec.distances.as_ref().map(|d| d.per_point[i]);
        let r = rec.regions.get(i).copied().flatten();
        let _ = writeln!(
            s,
            "{:e},{:e},{:e},{:e},{},{},{}",
            z.re,
            z.im,
            zs.residuals[i],
            zs.forward_errors[i],
            opt(d),
            region_name(r.map(|l| l.label)),
            opt(r.map(|l| l.margin)),
        );
    }
    s
}

/// World-to-picture window: a square around the zeros, the `InE` arcs and
/// the points 0 and 1.
struct Window {
    lo: Complex64,
    size: f64,
}

impl Window {
    fn new<'a>(pts: impl Iterator<Item = &'a Complex64>) -> Self {
        let mut lo = Complex64::new(0.0, 0.0);
        let mut hi = Complex64::new(1.0, 0.0);
        for p in pts {
            lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        let size = (hi.re - lo.re).max(hi.im - lo.im) * 1.3;
        let mid = (lo + hi) * 0.5;
        Window {
            lo: mid - Complex64::new(size, size) * 0.5,
            size,
        }
    }

    fn xy(&self, z: Complex64) -> (f64, f64) {
        let s = 1000.0 / self.size;
        ((z.re - self.lo.re) * s, 1000.0 - (z.im - self.lo.im) * s)
    }
}

fn polyline_points(w: &Window, pts: impl Iterator<Item = Complex64>) -> String {
    let mut s = String::new();
    for p in pts {
        let (x, y) = w.xy(p);
        let _ = write!(s, "{x:.2},{y:.2} ");
    }
    s.trim_end().to_string()
}

/// One `<path>` per arc, one `<polyline>` per separatrix and one `<circle>`
/// per zero.
pub fn render_svg(
    curve: Option<&LevelCurve>,
    separatrices: &[PathTraceJson],
    zeros: &[Complex64],
    title: &str,
) -> String {
    let in_e = curve
        .into_iter()
        .flat_map(|c| c.arcs.iter())
        .filter(|a| a.label == Region::InE)
        .flat_map(|a| a.points.iter());
    let w = Window::new(zeros.iter().chain(in_e));
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="800" viewBox="0 0 1000 1000">"#
    );
    let _ = writeln!(s, "<title>{title}</title>");
    let _ = writeln!(s, r##"<rect width="1000" height="1000" fill="#fff"/>"##);
    let (x0, y0) = w.xy(Complex64::new(0.0, 0.0));
    let _ = writeln!(
        s,
        r##"<line x1="0" y1="{y0:.2}" x2="1000" y2="{y0:.2}" stroke="#bbb"/><line x1="{x0:.2}" y1="0" x2="{x0:.2}" y2="1000" stroke="#bbb"/>"##
    );
    for t in separatrices {
        let pts = polyline_points(&w, t.points.iter().map(|p| Complex64::new(p[0], p[1])));
        let _ = writeln!(
            s,
            r##"<polyline class="separatrix" points="{pts}" fill="none" stroke="#999" stroke-dasharray="6 4"/>"##
        );
    }
    if let Some(c) = curve {
        for a in &c.arcs {
            let colour = if a.label == Region::InE {
                "#c0392b"
            } else {
                "#2c7fb8"
            };
            let mut d = String::new();
            for (i, p) in a.points.iter().enumerate() {
                let (x, y) = w.xy(*p);
                let _ = write!(d, "{}{x:.2},{y:.2} ", if i == 0 { 'M' } else { 'L' });
            }
            let _ = writeln!(
                s,
                r#"<path class="{:?}" d="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#,
                a.label,
                d.trim_end()
            );
        }
    }
    for z in zeros {
        let (x, y) = w.xy(*z);
        let _ = writeln!(
            s,
            r##"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="#222"/>"##
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Write `report` in `format` under `dir`. JSON is one file; CSV and SVG
/// are one file per degree.
pub fn emit_report(
    report: &VerificationReport,
    format: Format,
    dir: &Path,
) -> Result<Vec<PathBuf>, VerifyError> {
    let stem = report.kind.stem();
    match format {
        Format::Json => Ok(vec![write(dir, format!("{stem}.json"), &report.to_json())?]),
        Format::Csv => report
            .records
            .iter()
            .map(|r| write(dir, format!("{stem}_n{}.csv", r.n), &degree_csv(r)))
            .collect(),
        Format::Svg => report
            .records
            .iter()
            .map(|r| {
                let zeros = r.zeros.as_ref().map(|z| z.zeros.as_slice()).unwrap_or(&[]);
                let title = format!("alpha = {}, n = {}", report.family.alpha(), r.n);
                let svg = render_svg(report.curve.as_ref(), &report.separatrices, zeros, &title);
                write(dir, format!("{stem}_n{}.svg", r.n), &svg)
            })
            .collect(),
    }
}

pub fn emit_region_map(
    map: &RegionMap,
    format: Format,
    dir: &Path,
) -> Result<Vec<PathBuf>, VerifyError> {
    match format {
        Format::Json => Ok(vec![write(
            dir,
            "region.json".into(),
            &serde_json::to_string_pretty(map)?,
        )?]),
        Format::Csv => {
            let mut s = String::from("re,im,region,margin\n");
            for (z, l) in map.points.iter().zip(&map.labels) {
                let _ = writeln!(
                    s,
                    "{:e},{:e},{},{}",
                    z.re,
                    z.im,
                    region_name(l.map(|l| l.label)),
                    opt(l.map(|l| l.margin))
                );
            }
            Ok(vec![write(dir, "region.csv".into(), &s)?])
        }
        Format::Svg => {
            let w = Window::new(map.points.iter());
            let mut s = String::from(
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"0 0 1000 1000\">\n",
            );
            for (z, l) in map.points.iter().zip(&map.labels) {
                let (x, y) = w.xy(*z);
                let fill = match l.map(|l| l.label) {
                    Some(Region::InE) => "#c0392b",
                    Some(Region::NotInE) => "#2c7fb8",
                    Some(Region::Boundary) => "#f1c40f",
                    None => "#777",
                };
                let _ = writeln!(
                    s,
                    r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{fill}"/>"#
                );
            }
            s.push_str("</svg>\n");
            Ok(vec![write(dir, "region.svg".into(), &s)?])
        }
    }
}

pub fn emit_curve(
    report: &CurveReport,
    format: Format,
    dir: &Path,
) -> Result<Vec<PathBuf>, VerifyError> {
    match format {
        Format::Json => Ok(vec![write(
            dir,
            "curve.json".into(),
            &serde_json::to_string_pretty(report)?,
        )?]),
        Format::Csv => {
            let mut s = String::from("arc,region,re,im\n");
            for (i, a) in report.curve.arcs.iter().enumerate() {
                for p in &a.points {
                    let _ = writeln!(
                        s,
                        "{i},{},{:e},{:e}",
                        region_name(Some(a.label)),
                        p.re,
                        p.im
                    );
                }
            }
            Ok(vec![write(dir, "curve.csv".into(), &s)?])
        }
        Format::Svg => {
            let title = format!("alpha = {}", report.alpha);
            let svg = render_svg(Some(&report.curve), &report.separatrices, &[], &title);
            Ok(vec![write(dir, "curve.svg".into(), &svg)?])
        }
    }
}

pub fn emit_asym(
    table: &AsymTable,
    format: Format,
    dir: &Path,
) -> Result<Vec<PathBuf>, VerifyError> {
    match format {
        Format::Json => Ok(vec![write(
            dir,
            "asym.json".into(),
            &serde_json::to_string_pretty(table)?,
        )?]),
        Format::Csv => {
            let mut s = String::from("re,im,n,ratio,within\n");
            for r in &table.rows {
                let _ = writeln!(
                    s,
                    "{:e},{:e},{},{},{}",
                    r.z.re,
                    r.z.im,
                    r.n,
                    opt(r.ratio),
                    r.within
                );
            }
            Ok(vec![write(dir, "asym.csv".into(), &s)?])
        }
        Format::Svg => Err(VerifyError::UnsupportedFormat(Format::Svg)),
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use crate::kernel::Alpha;

    #[test]
    fn emitted_files_have_the_promised_shape() {
        let c = ExperimentConfig {
            alpha: Alpha::new(2.0, -1.0).unwrap(),
            n_list: vec![6, 11],
            samples: 1,
            ..ExperimentConfig::default()
        };
        let r = run_theorem_check(&c).unwrap();
        let dir = tempfile::tempdir().unwrap();

        let json = emit_report(&r, Format::Json, dir.path()).unwrap();
        let text = std::fs::read_to_string(&json[0]).unwrap();
        assert!(text.contains("\"schema\": \"hypzero/1\""));
        assert_eq!(VerificationReport::from_json(&text).unwrap(), r);

        let csv = emit_report(&r, Format::Csv, dir.path()).unwrap();
        for (path, n) in csv.iter().zip([6, 11]) {
            let rows = std::fs::read_to_string(path).unwrap().lines().count() - 1;
            assert_eq!(rows, n);
        }

        let svg = emit_report(&r, Format::Svg, dir.path()).unwrap();
        let arcs = r.curve.as_ref().unwrap().arcs.len();
        for (path, n) in svg.iter().zip([6, 11]) {
            let s = std::fs::read_to_string(path).unwrap();
            assert_eq!(s.matches("<path ").count(), arcs);
            assert_eq!(s.matches("<circle ").count(), n);
        }
    }

    #[test]
    fn unwritable_directory_reports_path() {
        let r = run_curve(&ExperimentConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("occupied");
        std::fs::write(&file, "x").unwrap();
        match emit_curve(&r, Format::Json, &file) {
            Err(VerifyError::Io { path, .. }) => assert_eq!(path, file),
            other => panic!("{other:?}"),
        }
    }
}

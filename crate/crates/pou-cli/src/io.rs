//! Result emission: CSV tables, minimal SVG line plots, and the run
//! manifest.
//!
//! CSV is the canonical output; columns are fixed per experiment and floats
//! are written with Rust's shortest round-trip formatting, so identical
//! computations produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::CliError;

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x}")
    }
}

pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), CliError> {
    let mut text = String::new();
    let _ = writeln!(text, "{}", header.join(","));
    for row in rows {
        let _ = writeln!(text, "{}", row.join(","));
    }
    fs::write(path, text)
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

/// Creates the output directory and probes that it is writable.
pub fn prepare_output_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("output_dir {}: {e}", dir.display())))?;
    let probe = dir.join(".write_probe");
    fs::write(&probe, b"ok")
        .map_err(|e| CliError::Config(format!("output_dir {} not writable: {e}", dir.display())))?;
    let _ = fs::remove_file(&probe);
    Ok(())
}

/// Writes an empirical measure as CSV: one row per atom, weight first,
/// then the coordinates.
pub fn write_measure_csv(
    path: &Path,
    measure: &pou_core::EmpiricalMeasure,
) -> Result<(), CliError> {
    let d = measure.dim();
    let header: Vec<String> =
        std::iter::once("weight".to_string()).chain((0..d).map(|i| format!("x{i}"))).collect();
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let rows = measure.points().iter().zip(measure.weights()).map(|(p, &w)| {
        std::iter::once(fmt_f64(w)).chain(p.iter().map(|&x| fmt_f64(x))).collect()
    });
    write_csv(path, &header_refs, rows)
}

/// Reads a measure written by [`write_measure_csv`].
pub fn read_measure_csv(path: &Path) -> Result<pou_core::EmpiricalMeasure, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Io(format!("{}: empty measure file", path.display())))?;
    let d = header.split(',').count().saturating_sub(1);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d + 1 {
            return Err(CliError::Io(format!(
                "{} line {}: expected {} fields, found {}",
                path.display(),
                lineno + 2,
                d + 1,
                fields.len()
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|e| {
                CliError::Io(format!("{} line {}: {e}", path.display(), lineno + 2))
            })
        };
        weights.push(parse(fields[0])?);
        let mut coords = Vec::with_capacity(d);
        for f in &fields[1..] {
            coords.push(parse(f)?);
        }
        points.push(nalgebra::DVector::from_vec(coords));
    }
    pou_core::EmpiricalMeasure::new(points, weights)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Records what produced the artifacts in a directory: experiment name,
/// SHA-256 of the effective configuration, seed, worker count, versions.
pub fn write_manifest(
    dir: &Path,
    experiment: &str,
    config_json: &str,
    master_seed: u64,
    workers: usize,
) -> Result<(), CliError> {
    let mut hasher = Sha256::new();
    hasher.update(config_json.as_bytes());
    let digest = hasher.finalize();
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    let manifest = serde_json::json!({
        "experiment": experiment,
        "config_sha256": hex,
        "master_seed": master_seed,
        "workers": workers,
        "package": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
    });
    let path = dir.join("run_manifest.json");
    let mut f = fs::File::create(&path)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", path.display())))?;
    f.write_all(serde_json::to_string_pretty(&manifest).expect("static json").as_bytes())
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
    Ok(())
}

/// Minimal log-log SVG line plot (polyline plus decade grid lines); a
/// convenience view of the CSV, not the canonical output.
pub fn write_log_log_svg(
    path: &PathBuf,
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[(f64, f64)],
) -> Result<(), CliError> {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const ML: f64 = 70.0;
    const MR: f64 = 20.0;
    const MT: f64 = 40.0;
    const MB: f64 = 50.0;

    let pts: Vec<(f64, f64)> =
        series.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|&(x, y)| (x.log10(), y.log10())).collect();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{title}</text>"#,
        W / 2.0
    );
    if pts.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">no positive data</text>"#,
            W / 2.0,
            H / 2.0
        );
        let _ = writeln!(svg, "</svg>");
        return fs::write(path, svg)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())));
    }
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let sx = |x: f64| ML + (x - x0) / (x1 - x0) * (W - ML - MR);
    let sy = |y: f64| H - MB - (y - y0) / (y1 - y0) * (H - MT - MB);

    // decade grid
    for e in (x0.floor() as i64)..=(x1.ceil() as i64) {
        let x = e as f64;
        if x < x0 || x > x1 {
            continue;
        }
        let px = sx(x);
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.2}" y1="{MT}" x2="{px:.2}" y2="{}" stroke="#ddd"/>"##,
            H - MB
        );
        let _ = writeln!(
            svg,
            r#"<text x="{px:.2}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">1e{e}</text>"#,
            H - MB + 16.0
        );
    }
    for e in (y0.floor() as i64)..=(y1.ceil() as i64) {
        let y = e as f64;
        if y < y0 || y > y1 {
            continue;
        }
        let py = sy(y);
        let _ = writeln!(
            svg,
            r##"<line x1="{ML}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="#ddd"/>"##,
            W - MR
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{py:.2}" font-family="sans-serif" font-size="11" text-anchor="end">1e{e}</text>"#,
            ML - 6.0
        );
    }
    // axes
    let _ = writeln!(
        svg,
        r#"<rect x="{ML}" y="{MT}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - ML - MR,
        H - MT - MB
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">{xlabel}</text>"#,
        (ML + W - MR) / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{ylabel}</text>"#,
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0
    );
    // data polyline
    let mut d = String::new();
    for (i, &(x, y)) in pts.iter().enumerate() {
        let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "" } else { " " }, sx(x), sy(y));
    }
    let _ = writeln!(svg, r##"<polyline points="{d}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##);
    let _ = writeln!(svg, "</svg>");
    fs::write(path, svg).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

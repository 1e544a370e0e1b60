//! Report emission: a plain-text table on stdout, JSON and CSV files.

use std::io::Write;
use std::path::Path;

use anyhow::Context;
use qgeo::report::Report;
use serde::Serialize;

pub fn to_json(report: &Report) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

#[derive(Serialize)]
struct CheckRow<'a> {
    suite: &'a str,
    name: &'a str,
    topic: &'a str,
    residual: Option<f64>,
    tolerance: f64,
    bound: &'static str,
    pass: bool,
}

#[derive(Serialize)]
struct QuantityRow<'a> {
    scene: &'a str,
    point: String,
    name: &'a str,
    value: f64,
    weight: Option<i32>,
}

/// Residual table, or the quantity table when the report has no checks.
pub fn to_csv(report: &Report) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if report.checks.is_empty() {
        for q in &report.quantities {
            let point = q.point.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
            w.serialize(QuantityRow { scene: &q.scene, point, name: &q.name, value: q.value, weight: q.weight })?;
        }
    } else {
        for c in &report.checks {
            w.serialize(CheckRow {
                suite: &c.suite,
                name: &c.name,
                topic: &c.topic,
                residual: c.residual,
                tolerance: c.tolerance,
                bound: match c.bound {
                    qgeo::report::Bound::Below => "<",
                    qgeo::report::Bound::Above => ">",
                },
                pass: c.pass,
            })?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn write_to(target: &Path, text: &str) -> anyhow::Result<()> {
    if target == Path::new("-") {
        std::io::stdout().write_all(text.as_bytes())?;
        return Ok(());
    }
    std::fs::write(target, text).with_context(|| format!("writing {}", target.display()))
}

pub fn table(report: &Report) -> String {
    let mut s = String::new();
    let mut last: Option<(&str, &[f64])> = None;
    for q in &report.quantities {
        let key = (q.scene.as_str(), q.point.as_slice());
        if last != Some(key) {
            last = Some(key);
            s += &q.scene;
            if !q.point.is_empty() {
                s += &format!(" at {:?}", q.point);
            }
            s.push('\n');
        }
        let w = q.weight.map(|w| format!("  weight {w}")).unwrap_or_default();
        s += &format!("  {:<18} {:>24.15e}{w}\n", q.name, q.value);
    }
    for c in &report.checks {
        let r = c.residual.map_or("n/a".to_string(), |r| format!("{r:.3e}"));
        let op = match c.bound {
            qgeo::report::Bound::Below => "<",
            qgeo::report::Bound::Above => ">",
        };
        s += &format!(
            "{} {:<14} {} ({r} {op} {:.0e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.suite,
            c.name,
            c.tolerance
        );
        if let Some(n) = &c.note {
            if !c.pass {
                s += &format!(" [{n}]");
            }
        }
        s.push('\n');
    }
    if !report.checks.is_empty() {
        let m = &report.summary;
        s += &format!("{} checks, {} passed, {} failed\n", m.total, m.passed, m.failed);
    }
    s
}

//! Measures as line records (`coords... weight`, whitespace or comma
//! separated, `#` comments) and estimator reports as CSV.

use std::io::{BufRead, Write};

use carnot_core::{DiscreteMeasure, Error, HTypeAlgebra, Result};
use serde::Serialize;

pub fn read_measure(alg: &HTypeAlgebra, reader: impl BufRead, label: &str) -> Result<DiscreteMeasure> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (no, line) in reader.lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let vals: Vec<f64> = body
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|e| Error::invalid(format!("line {}: {e}", no + 1))))
            .collect::<Result<_>>()?;
        if vals.len() != alg.dim() + 1 {
            return Err(Error::invalid(format!("line {}: expected {} values, got {}", no + 1, alg.dim() + 1, vals.len())));
        }
        points.push(alg.point_from_flat(&vals[..alg.dim()])?);
        weights.push(vals[alg.dim()]);
    }
    DiscreteMeasure::new(points, weights, label)
}

pub fn write_measure(mu: &DiscreteMeasure, mut out: impl Write) -> Result<()> {
    for (p, w) in mu.points.iter().zip(&mu.weights) {
        let coords: Vec<String> = p.to_flat().iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "{} {w:e}", coords.join(" "))?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub scale: f64,
    pub count: usize,
    pub value: f64,
}

pub fn write_csv_report(rows: &[ReportRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::invalid(format!("csv: {e}")))?;
    }
    w.flush()?;
    Ok(())
}

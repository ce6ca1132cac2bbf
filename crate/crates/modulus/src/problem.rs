use carnot_core::{Error, Result};
use serde::{Deserialize, Serialize};

/// One measure of the family, as its non-zero masses per cell.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseRow {
    pub idx: Vec<usize>,
    pub val: Vec<f64>,
}

impl SparseRow {
    pub fn from_pairs(mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let mut row = SparseRow::default();
        for (i, v) in pairs {
            if v == 0.0 {
                continue;
            }
            if row.idx.last() == Some(&i) {
                *row.val.last_mut().unwrap() += v;
            } else {
                row.idx.push(i);
                row.val.push(v);
            }
        }
        row
    }

    pub fn from_dense(w: &[f64]) -> Self {
        Self::from_pairs(w.iter().copied().enumerate().collect())
    }

    pub fn dot(&self, f: &[f64]) -> f64 {
        self.idx.iter().zip(&self.val).map(|(&i, v)| v * f[i]).sum()
    }

    pub fn total(&self) -> f64 {
        self.val.iter().sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        SparseRow { idx: self.idx.clone(), val: self.val.iter().map(|v| v * c).collect() }
    }
}

/// `min sum_i m_i f_i^p` over `f >= 0` with `sum_i mu_ji f_i >= 1` for every
/// measure `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModulusProblem {
    /// Cell centres in flat coordinates.
    pub centers: Vec<Vec<f64>>,
    pub masses: Vec<f64>,
    pub rows: Vec<SparseRow>,
    pub p: f64,
}

#[derive(Serialize, Deserialize)]
struct ProblemJson {
    cells: Vec<Vec<f64>>,
    measures: Vec<Vec<f64>>,
    p: f64,
}

impl ModulusProblem {
    pub fn new(centers: Vec<Vec<f64>>, masses: Vec<f64>, rows: Vec<SparseRow>, p: f64) -> Result<Self> {
        if centers.len() != masses.len() {
            return Err(Error::DimensionMismatch { expected: masses.len(), got: centers.len() });
        }
        if masses.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(Error::invalid("cell masses must be positive and finite"));
        }
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::invalid("exponent p must be positive and finite"));
        }
        for r in &rows {
            if r.idx.len() != r.val.len() || r.idx.iter().any(|&i| i >= masses.len()) {
                return Err(Error::invalid("measure refers to a missing cell"));
            }
            if r.val.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                return Err(Error::invalid("measure weights must be finite and non-negative"));
            }
        }
        Ok(Self { centers, masses, rows, p })
    }

    /// Cells without coordinates, for problems given purely by masses.
    pub fn from_masses(masses: Vec<f64>, rows: Vec<SparseRow>, p: f64) -> Result<Self> {
        let centers = vec![Vec::new(); masses.len()];
        Self::new(centers, masses, rows, p)
    }

    pub fn n_cells(&self) -> usize {
        self.masses.len()
    }

    /// A measure with no mass admits no density.
    pub fn has_empty_measure(&self) -> bool {
        self.rows.iter().any(|r| r.total() <= 0.0)
    }

    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(self.centers.clone(), self.masses.clone(), self.rows.clone(), p)
    }

    pub fn integrals(&self, f: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.dot(f)).collect()
    }

    pub fn energy(&self, f: &[f64]) -> f64 {
        self.masses.iter().zip(f).map(|(m, v)| m * v.powf(self.p)).sum()
    }

    /// `{"cells": [[coords.., mass], ..], "measures": [[weight per cell], ..], "p": p}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ProblemJson = serde_json::from_str(text).map_err(|e| Error::invalid(format!("modulus problem: {e}")))?;
        let mut centers = Vec::with_capacity(raw.cells.len());
        let mut masses = Vec::with_capacity(raw.cells.len());
        for mut c in raw.cells {
            let m = c.pop().ok_or_else(|| Error::invalid("cell rows need at least a mass"))?;
            centers.push(c);
            masses.push(m);
        }
        let mut rows = Vec::with_capacity(raw.measures.len());
        for w in raw.measures {
            if w.len() != masses.len() {
                return Err(Error::DimensionMismatch { expected: masses.len(), got: w.len() });
            }
            rows.push(SparseRow::from_dense(&w));
        }
        Self::new(centers, masses, rows, raw.p)
    }

    pub fn to_json(&self) -> String {
        let cells = self.centers.iter().zip(&self.masses).map(|(c, m)| c.iter().copied().chain([*m]).collect()).collect();
        let measures = self
            .rows
            .iter()
            .map(|r| {
                let mut w = vec![0.0; self.n_cells()];
                for (&i, v) in r.idx.iter().zip(&r.val) {
                    w[i] = *v;
                }
                w
            })
            .collect();
        serde_json::to_string(&ProblemJson { cells, measures, p: self.p }).expect("plain numbers serialise")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// Smallest `integral - 1` over the measures; `+inf` for an empty family.
    pub worst_margin: f64,
    pub worst_measure: Option<usize>,
}

/// A density is admissible when it is non-negative and every measure
/// integrates it to at least `1 - 1e-10`.
pub fn check_admissible(problem: &ModulusProblem, density: &[f64]) -> Result<Admissibility> {
    if density.len() != problem.n_cells() {
        return Err(Error::DimensionMismatch { expected: problem.n_cells(), got: density.len() });
    }
    let (worst_margin, worst_measure) = problem
        .integrals(density)
        .into_iter()
        .enumerate()
        .fold((f64::INFINITY, None), |acc, (j, v)| if v - 1.0 < acc.0 { (v - 1.0, Some(j)) } else { acc });
    let nonneg = density.iter().all(|v| *v >= 0.0);
    Ok(Admissibility { admissible: nonneg && worst_margin >= -1e-10, worst_margin, worst_measure })
}

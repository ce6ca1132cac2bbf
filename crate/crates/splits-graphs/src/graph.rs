use carnot_core::{Error, GroupPoint, HTypeAlgebra, HomogeneousNorm, Result};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::split::{cone_margin, HomogeneousSplit};

/// Regular grid of nodes `lo + k step` in `M` coordinates. Each node stands
/// for a cell of volume `prod(step)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphGrid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub step: Vec<f64>,
}

impl GraphGrid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, step: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.len() != step.len() {
            return Err(Error::invalid("grid bounds and steps must have equal length"));
        }
        for k in 0..lo.len() {
            if !(step[k] > 0.0 && step[k].is_finite() && lo[k].is_finite() && hi[k] >= lo[k] && hi[k].is_finite()) {
                return Err(Error::invalid("grid needs finite lo <= hi and positive steps"));
            }
        }
        Ok(Self { lo, hi, step })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn counts(&self) -> Vec<usize> {
        (0..self.dim()).map(|k| ((self.hi[k] - self.lo[k]) / self.step[k] + 1e-9).floor() as usize + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.counts().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.step.iter().product()
    }

    /// Nodes in row-major order (last coordinate fastest).
    pub fn nodes(&self) -> Vec<Vec<f64>> {
        let counts = self.counts();
        let total: usize = counts.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; self.dim()];
        for _ in 0..total {
            out.push((0..self.dim()).map(|k| self.lo[k] + idx[k] as f64 * self.step[k]).collect());
            for k in (0..self.dim()).rev() {
                idx[k] += 1;
                if idx[k] < counts[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        out
    }
}

/// The map `f: M -> H`, given in `H` coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum GraphMap {
    Zero,
    /// `H`-coordinates equal `A` times `M`-coordinates.
    Linear(DMatrix<f64>),
    /// One row of `H`-coordinates per grid node, in node order.
    Table(Vec<Vec<f64>>),
}

#[derive(Clone, Debug)]
pub struct IntrinsicGraph {
    pub split: HomogeneousSplit,
    pub grid: GraphGrid,
    pub map: GraphMap,
}

impl IntrinsicGraph {
    pub fn new(split: HomogeneousSplit, grid: GraphGrid, map: GraphMap) -> Result<Self> {
        if grid.dim() != split.d_t() {
            return Err(Error::DimensionMismatch { expected: split.d_t(), got: grid.dim() });
        }
        match &map {
            GraphMap::Zero => {}
            GraphMap::Linear(a) => {
                if a.nrows() != split.h_dim() || a.ncols() != split.d_t() {
                    return Err(Error::invalid(format!(
                        "linear map must be {}x{}, got {}x{}",
                        split.h_dim(),
                        split.d_t(),
                        a.nrows(),
                        a.ncols()
                    )));
                }
            }
            GraphMap::Table(rows) => {
                if rows.len() != grid.len() {
                    return Err(Error::DimensionMismatch { expected: grid.len(), got: rows.len() });
                }
                if rows.iter().any(|r| r.len() != split.h_dim() || r.iter().any(|v| !v.is_finite())) {
                    return Err(Error::invalid("table rows must hold finite H coordinates"));
                }
            }
        }
        Ok(Self { split, grid, map })
    }

    /// `f` at the node with index `k` and `M` coordinates `c`.
    pub fn f_coords(&self, k: usize, c: &[f64]) -> Vec<f64> {
        match &self.map {
            GraphMap::Zero => vec![0.0; self.split.h_dim()],
            GraphMap::Linear(a) => (a * DVector::from_column_slice(c)).as_slice().to_vec(),
            GraphMap::Table(rows) => rows[k].clone(),
        }
    }

    /// Graph points `m f(m)` and the `M`-coordinates they come from.
    pub fn sample(&self, alg: &HTypeAlgebra) -> (Vec<GroupPoint>, Vec<Vec<f64>>) {
        let nodes = self.grid.nodes();
        let pts = nodes
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let m = self.split.m_point(alg, c);
                let h = self.split.h_point(alg, &self.f_coords(k, c));
                alg.mul_unchecked(&m, &h)
            })
            .collect();
        (pts, nodes)
    }

    pub fn points(&self, alg: &HTypeAlgebra) -> Vec<GroupPoint> {
        self.sample(alg).0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeReport {
    pub holds: bool,
    /// Smallest `|m| - |h| / L` over checked pairs; negative on violation.
    pub worst_margin: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub pairs_checked: usize,
    pub subsampled: bool,
}

/// Points beyond this count are thinned to an even subsample before the
/// quadratic pair scan.
pub const CONE_POINT_CAP: usize = 10_000;

/// Checks that no graph point lies strictly inside the cone `C(p, 1/L)` at
/// another graph point. Boundary points do not count as violations.
pub fn verify_cone(alg: &HTypeAlgebra, graph: &IntrinsicGraph, lipschitz: f64, norm: &HomogeneousNorm) -> Result<ConeReport> {
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::invalid("Lipschitz constant must be positive and finite"));
    }
    let all = graph.points(alg);
    let (pts, subsampled): (Vec<(usize, GroupPoint)>, bool) = if all.len() > CONE_POINT_CAP {
        let stride = all.len() as f64 / CONE_POINT_CAP as f64;
        let pick = (0..CONE_POINT_CAP).map(|k| (k as f64 * stride) as usize).map(|i| (i, all[i].clone())).collect();
        (pick, true)
    } else {
        (all.into_iter().enumerate().collect(), false)
    };
    let beta = 1.0 / lipschitz;
    let per_vertex: Vec<(f64, Option<(usize, usize)>)> = pts
        .par_iter()
        .map(|(i, p)| {
            let mut best = (f64::INFINITY, None);
            for (j, q) in &pts {
                if i == j {
                    continue;
                }
                let m = cone_margin(alg, &graph.split, norm, p, beta, q);
                if m < best.0 {
                    best = (m, Some((*i, *j)));
                }
            }
            best
        })
        .collect();
    let (worst_margin, worst_pair) = per_vertex.into_iter().fold((f64::INFINITY, None), |a, b| if b.0 < a.0 { b } else { a });
    let n = pts.len();
    Ok(ConeReport {
        holds: worst_margin >= 0.0,
        worst_margin,
        worst_pair,
        pairs_checked: n * n.saturating_sub(1),
        subsampled,
    })
}

//! JSON graph fixtures:
//! `{"split": {"M_h": [..], "M_v": [..]}, "grid": {"lo", "hi", "step"}, "f": ..}`
//! where grid entries are scalars or per-coordinate arrays and `f` is
//! `"zero"`, `"linear:[[..],..]"` or a table with one row per node.

use carnot_core::{Error, HTypeAlgebra, Result};
use nalgebra::DMatrix;
use serde::Deserialize;
use serde_json::Value;

use crate::graph::{GraphGrid, GraphMap, IntrinsicGraph};
use crate::split::HomogeneousSplit;

#[derive(Clone, Debug, Deserialize)]
struct SplitSpec {
    #[serde(rename = "M_h", default)]
    m_h: Vec<usize>,
    #[serde(rename = "M_v", default)]
    m_v: Vec<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum Axis {
    Scalar(f64),
    PerCoord(Vec<f64>),
}

impl Axis {
    fn expand(&self, d: usize) -> Result<Vec<f64>> {
        match self {
            Axis::Scalar(v) => Ok(vec![*v; d]),
            Axis::PerCoord(v) if v.len() == d => Ok(v.clone()),
            Axis::PerCoord(v) => Err(Error::DimensionMismatch { expected: d, got: v.len() }),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
struct GridSpec {
    lo: Axis,
    hi: Axis,
    step: Axis,
}

#[derive(Clone, Debug, Deserialize)]
pub struct GraphFixture {
    split: SplitSpec,
    grid: GridSpec,
    f: Value,
}

impl GraphFixture {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("graph fixture: {e}")))
    }

    pub fn split(&self, alg: &HTypeAlgebra) -> Result<HomogeneousSplit> {
        HomogeneousSplit::new(alg, self.split.m_h.clone(), self.split.m_v.clone())
    }

    pub fn build(&self, alg: &HTypeAlgebra) -> Result<IntrinsicGraph> {
        let split = self.split(alg)?;
        let d = split.d_t();
        let grid = GraphGrid::new(self.grid.lo.expand(d)?, self.grid.hi.expand(d)?, self.grid.step.expand(d)?)?;
        let map = parse_map(&self.f)?;
        IntrinsicGraph::new(split, grid, map)
    }
}

fn rows(v: &Value) -> Result<Vec<Vec<f64>>> {
    let bad = || Error::invalid("expected an array of numeric rows");
    v.as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|r| r.as_array().ok_or_else(bad)?.iter().map(|x| x.as_f64().ok_or_else(bad)).collect())
        .collect()
}

fn parse_map(v: &Value) -> Result<GraphMap> {
    match v {
        Value::String(s) if s == "zero" => Ok(GraphMap::Zero),
        Value::String(s) => {
            let body = s.strip_prefix("linear:").ok_or_else(|| Error::invalid(format!("unknown map `{s}`")))?;
            let m: Value = serde_json::from_str(body).map_err(|e| Error::invalid(format!("linear map: {e}")))?;
            let r = rows(&m)?;
            let nr = r.len();
            let nc = r.first().map_or(0, |x| x.len());
            if r.iter().any(|x| x.len() != nc) {
                return Err(Error::invalid("ragged linear map"));
            }
            Ok(GraphMap::Linear(DMatrix::from_row_iterator(nr, nc, r.into_iter().flatten())))
        }
        Value::Array(_) => Ok(GraphMap::Table(rows(v)?)),
        _ => Err(Error::invalid("f must be \"zero\", \"linear:<matrix>\" or a table")),
    }
}

use carnot_core::{Error, GroupPoint, HTypeAlgebra, Result};
use rayon::prelude::*;
use serde::Serialize;
use splits_graphs::{graph_measures, loglog_slope, IntrinsicGraph};

use crate::witness::WitnessFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Trend {
    Converging,
    Diverging,
}

#[derive(Clone, Debug, Serialize)]
pub struct Thresholds {
    /// Largest log-slope of the estimate against resolution still read as converging.
    pub slope: f64,
    /// Largest relative change between the last two levels still read as converging.
    pub rel_change: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { slope: 0.1, rel_change: 0.1 }
    }
}

/// Resolution of an `L^p` estimate. Radial witnesses integrate a grid of
/// `cells` per axis over the shell `1/2 <= |g| < 1` and sum `depth 4^l`
/// dilated copies of it at level `l`; the others integrate a midpoint grid
/// of `cells 2^l` per axis over the box `[lo, hi]` of flat coordinates.
#[derive(Clone, Debug, Serialize)]
pub struct LpGrid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cells: usize,
    pub depth: usize,
    pub levels: usize,
}

impl LpGrid {
    pub fn radial(cells: usize, depth: usize) -> Self {
        Self { lo: Vec::new(), hi: Vec::new(), cells, depth, levels: 3 }
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>, cells: usize) -> Self {
        Self { lo, hi, cells, depth: 0, levels: 3 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LpEstimate {
    pub p: f64,
    pub route: &'static str,
    /// Shells summed, or cells per axis, at each level.
    pub resolution: Vec<f64>,
    pub values: Vec<f64>,
    pub log_values: Vec<f64>,
    pub rel_change: f64,
    pub log_slope: f64,
    pub verdict: Trend,
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m.is_infinite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Midpoint nodes of a grid of `n` cells per axis on `[lo, hi]`, visited in
/// slices of the first axis. Returns the per-slice sums, reduced in order.
fn grid_sum(lo: &[f64], hi: &[f64], n: usize, f: impl Fn(&[f64]) -> f64 + Sync) -> f64 {
    let d = lo.len();
    let h: Vec<f64> = (0..d).map(|k| (hi[k] - lo[k]) / n as f64).collect();
    let slices: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i0| {
            let mut node = vec![0.0; d];
            node[0] = lo[0] + (i0 as f64 + 0.5) * h[0];
            let mut idx = vec![0usize; d];
            let mut sum = 0.0;
            loop {
                for k in 1..d {
                    node[k] = lo[k] + (idx[k] as f64 + 0.5) * h[k];
                }
                sum += f(&node);
                let mut k = d - 1;
                loop {
                    if k == 0 {
                        return sum;
                    }
                    idx[k] += 1;
                    if idx[k] < n {
                        break;
                    }
                    idx[k] = 0;
                    k -= 1;
                }
            }
        })
        .collect();
    slices.iter().sum()
}

/// Estimates `int F^p dg` and reads its trend over the refinement levels.
pub fn lp_norm_estimate(
    alg: &HTypeAlgebra,
    w: &WitnessFunction,
    p: f64,
    grid: &LpGrid,
    th: &Thresholds,
) -> Result<LpEstimate> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::invalid("p must be positive and finite"));
    }
    if grid.levels < 2 || grid.cells == 0 {
        return Err(Error::invalid("need at least two levels and one cell per axis"));
    }
    let (route, resolution, log_values) = if w.is_radial() {
        if grid.depth == 0 {
            return Err(Error::invalid("dyadic depth must be positive"));
        }
        radial_estimates(alg, w, p, grid)?
    } else {
        boxed_estimates(alg, w, p, grid)?
    };
    let values: Vec<f64> = log_values.iter().map(|v| v.exp()).collect();
    let k = log_values.len();
    let (a, b) = (log_values[k - 2], log_values[k - 1]);
    let (rel_change, log_slope) = if a.is_finite() && b.is_finite() {
        ((b - a).exp_m1().abs(), (b - a) / (resolution[k - 1] / resolution[k - 2]).ln())
    } else if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
        (0.0, 0.0)
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    let verdict = if rel_change < th.rel_change && log_slope < th.slope { Trend::Converging } else { Trend::Diverging };
    Ok(LpEstimate { p, route, resolution, values, log_values, rel_change, log_slope, verdict })
}

/// Haar measure scales by `lambda^Q`, so the part of the integral on the
/// shell `2^-j-1 <= |g| < 2^-j` is `2^-jQ` times the shell-0 integral of
/// `F(delta_(2^-j) g)^p`; everything is summed in logarithms.
fn radial_estimates(alg: &HTypeAlgebra, w: &WitnessFunction, p: f64, grid: &LpGrid) -> Result<(&'static str, Vec<f64>, Vec<f64>)> {
    let (bx, bt) = w.norm.ball_box(1.0);
    let lo: Vec<f64> = (0..alg.dim()).map(|k| if k < alg.m1() { -bx } else { -bt }).collect();
    let hi: Vec<f64> = lo.iter().map(|v| -v).collect();
    let n = grid.cells;
    let vol: f64 = lo.iter().zip(&hi).map(|(a, b)| (b - a) / n as f64).product();
    // Log-norms of the shell nodes.
    let mut ln_r = Vec::new();
    let d = alg.dim();
    let h: Vec<f64> = (0..d).map(|k| (hi[k] - lo[k]) / n as f64).collect();
    let mut idx = vec![0usize; d];
    let total = n.checked_pow(d as u32).filter(|t| *t <= 1 << 26).ok_or_else(|| Error::invalid("shell grid too large"))?;
    for _ in 0..total {
        let x: Vec<f64> = (0..alg.m1()).map(|k| lo[k] + (idx[k] as f64 + 0.5) * h[k]).collect();
        let t: Vec<f64> = (alg.m1()..d).map(|k| lo[k] + (idx[k] as f64 + 0.5) * h[k]).collect();
        let r = w.norm.eval(&x, &t);
        if (0.5..1.0).contains(&r) {
            ln_r.push(r.ln());
        }
        for k in (0..d).rev() {
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
        }
    }
    if ln_r.is_empty() {
        return Err(Error::invalid("shell grid too coarse to hit the shell"));
    }
    let q = alg.homogeneous_dim() as f64;
    let ln2 = std::f64::consts::LN_2;
    let max_depth = grid.depth * 4usize.pow(grid.levels as u32 - 1);
    let shells: Vec<f64> = (0..max_depth)
        .into_par_iter()
        .map(|j| {
            let terms: Vec<f64> = ln_r.iter().map(|lr| p * w.radial_ln(lr - j as f64 * ln2).unwrap()).collect();
            log_sum_exp(&terms) + vol.ln() - j as f64 * q * ln2
        })
        .collect();
    let mut res = Vec::new();
    let mut out = Vec::new();
    for l in 0..grid.levels {
        let k = grid.depth * 4usize.pow(l as u32);
        res.push(k as f64);
        out.push(log_sum_exp(&shells[..k]));
    }
    Ok(("dyadic-shells", res, out))
}

/// Midpoint sums that skip cells within one cell diagonal of the singular set.
fn boxed_estimates(alg: &HTypeAlgebra, w: &WitnessFunction, p: f64, grid: &LpGrid) -> Result<(&'static str, Vec<f64>, Vec<f64>)> {
    let d = alg.dim();
    if grid.lo.len() != d || grid.hi.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: grid.lo.len() });
    }
    if grid.lo.iter().zip(&grid.hi).any(|(a, b)| !(a < b && a.is_finite() && b.is_finite())) {
        return Err(Error::invalid("integration box needs finite lo < hi"));
    }
    let mut res = Vec::new();
    let mut out = Vec::new();
    for l in 0..grid.levels {
        let n = grid.cells << l;
        if (n as f64).powi(d as i32) > 1e9 {
            return Err(Error::invalid("integration grid too large"));
        }
        let h: Vec<f64> = grid.lo.iter().zip(&grid.hi).map(|(a, b)| (b - a) / n as f64).collect();
        let vol: f64 = h.iter().product();
        let core = h.iter().map(|v| v * v).sum::<f64>().sqrt();
        let sum = grid_sum(&grid.lo, &grid.hi, n, |c| {
            let g = GroupPoint::new(c[..alg.m1()].to_vec(), c[alg.m1()..].to_vec());
            if w.singular_distance(alg, &g) < core {
                return 0.0;
            }
            let v = w.eval_unchecked(alg, &g);
            if v > 0.0 {
                v.powf(p)
            } else {
                0.0
            }
        });
        res.push(n as f64);
        out.push((sum * vol).ln());
    }
    Ok(("grid", res, out))
}

/// Ring sums fitted as `(j + 2)^-a` with `a` below `exponent` are read as a
/// divergent series; bounded-below sums give `a` near 0.
#[derive(Clone, Debug, Serialize)]
pub struct RingThresholds {
    pub exponent: f64,
}

impl Default for RingThresholds {
    fn default() -> Self {
        Self { exponent: 1.0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RingReport {
    /// Ring `j = 1, 2, ..`: `int F dsigma` over `2^-j-1 < |g| <= 2^-j`.
    pub sums: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub rings: usize,
    pub warning: Option<String>,
    /// `max / min` of the ring sums.
    pub ratio: f64,
    pub decay_exponent: f64,
    pub verdict: Trend,
}

/// Ring decomposition of `int_S F dsigma` around the identity.
pub fn surface_divergence_check(
    alg: &HTypeAlgebra,
    w: &WitnessFunction,
    graph: &IntrinsicGraph,
    rings: usize,
    th: &RingThresholds,
) -> Result<RingReport> {
    if rings < 3 {
        return Err(Error::invalid("need at least three rings"));
    }
    let gm = graph_measures(alg, graph, &w.norm)?;
    let norms: Vec<f64> = gm.sigma.points.iter().map(|g| w.norm.eval(&g.x, &g.t)).collect();
    if !(norms.iter().copied().fold(f64::INFINITY, f64::min) <= gm.spacing) {
        return Err(Error::invalid("graph does not pass through the identity"));
    }
    let mut sums = Vec::new();
    let mut warning = None;
    for j in 1..=rings {
        let (inner, outer) = (0.5f64.powi(j as i32 + 1), 0.5f64.powi(j as i32));
        let hits: Vec<usize> = (0..norms.len()).filter(|&i| norms[i] > inner && norms[i] <= outer).collect();
        // Rings thinner than a few cover balls are not resolved.
        if hits.is_empty() || outer - inner < 4.0 * gm.spacing {
            warning = Some(format!("graph resolves only {} of {rings} rings", j - 1));
            break;
        }
        sums.push(hits.iter().map(|&i| w.eval_unchecked(alg, &gm.sigma.points[i]) * gm.sigma.weights[i]).sum());
    }
    if sums.is_empty() {
        return Err(Error::invalid("graph resolves no ring around the identity"));
    }
    let partial_sums: Vec<f64> = sums.iter().scan(0.0, |acc, v| { *acc += v; Some(*acc) }).collect();
    let lo = sums.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sums.iter().copied().fold(0.0, f64::max);
    let (ratio, decay_exponent, verdict) = if hi == 0.0 {
        (f64::NAN, f64::INFINITY, Trend::Converging)
    } else if lo == 0.0 || sums.len() < 2 {
        (f64::INFINITY, f64::INFINITY, Trend::Converging)
    } else {
        let js: Vec<f64> = (1..=sums.len()).map(|j| j as f64 + 2.0).collect();
        let a = -loglog_slope(&js, &sums);
        let r = hi / lo;
        let v = if a < th.exponent { Trend::Diverging } else { Trend::Converging };
        (r, a, v)
    };
    Ok(RingReport { rings: sums.len(), sums, partial_sums, warning, ratio, decay_exponent, verdict })
}

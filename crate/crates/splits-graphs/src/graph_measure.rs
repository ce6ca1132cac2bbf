use carnot_core::{greedy_cover, DiscreteMeasure, Error, GroupPoint, HTypeAlgebra, HomogeneousNorm, Result};
use serde::Serialize;

use crate::graph::{GraphGrid, GraphMap, IntrinsicGraph};
use crate::split::HomogeneousSplit;

/// `mu` is the push-forward of Haar measure on `M`; `sigma` is the spherical
/// covering estimate of the `d_m`-dimensional measure at resolution
/// `2 spacing`. Both are carried by the same atoms.
#[derive(Clone, Debug)]
pub struct GraphMeasures {
    pub mu: DiscreteMeasure,
    pub sigma: DiscreteMeasure,
    /// Largest norm of a single grid step.
    pub spacing: f64,
    pub cover_count: usize,
}

/// Norm of the longest single grid step in `M`.
pub fn metric_spacing(alg: &HTypeAlgebra, split: &HomogeneousSplit, grid: &GraphGrid, norm: &HomogeneousNorm) -> f64 {
    (0..split.d_t())
        .map(|k| {
            let mut c = vec![0.0; split.d_t()];
            c[k] = grid.step[k];
            let g = split.m_point(alg, &c);
            norm.eval(&g.x, &g.t)
        })
        .fold(0.0, f64::max)
}

/// Builds both measures from atoms with Haar cell weights `cell`. Each cover
/// ball of radius `s` carries `(2s)^d_m`, shared among its atoms in
/// proportion to their `mu` weights.
fn measures_from_atoms(
    alg: &HTypeAlgebra,
    points: Vec<GroupPoint>,
    cell: f64,
    s: f64,
    d_m: usize,
    norm: &HomogeneousNorm,
) -> Result<GraphMeasures> {
    if !(s > 0.0) {
        return Err(Error::invalid("graph spacing must be positive"));
    }
    let cover = greedy_cover(alg, &points, s, norm);
    let mut ball_mass = vec![0.0; cover.count()];
    for &b in &cover.assignment {
        ball_mass[b] += cell;
    }
    let ball_weight = (2.0 * s).powi(d_m as i32);
    let sigma_w: Vec<f64> = cover.assignment.iter().map(|&b| ball_weight * cell / ball_mass[b]).collect();
    let mu_w = vec![cell; points.len()];
    Ok(GraphMeasures {
        mu: DiscreteMeasure::new(points.clone(), mu_w, "mu")?,
        sigma: DiscreteMeasure::new(points, sigma_w, "sigma")?,
        spacing: s,
        cover_count: cover.count(),
    })
}

pub fn graph_measures(alg: &HTypeAlgebra, graph: &IntrinsicGraph, norm: &HomogeneousNorm) -> Result<GraphMeasures> {
    let s = metric_spacing(alg, &graph.split, &graph.grid, norm);
    measures_from_atoms(alg, graph.points(alg), graph.grid.cell_volume(), s, graph.split.d_m(), norm)
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphIntegral {
    /// Integral against `sigma`.
    pub lhs: f64,
    /// Integral of `h(m f(m))` against Haar measure on `M`.
    pub rhs: f64,
    /// Atomwise bounds `c1 <= dmu / dsigma <= c2`, so `c1 lhs <= rhs <= c2 lhs`
    /// for every non-negative `h`.
    pub c1: f64,
    pub c2: f64,
}

pub fn integrate_on_graph(
    alg: &HTypeAlgebra,
    graph: &IntrinsicGraph,
    norm: &HomogeneousNorm,
    h: impl Fn(&GroupPoint) -> f64,
) -> Result<GraphIntegral> {
    let gm = graph_measures(alg, graph, norm)?;
    let vals: Vec<f64> = gm.mu.points.iter().map(&h).collect();
    if vals.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::invalid("integrand must be finite and non-negative on the graph"));
    }
    let lhs = vals.iter().zip(&gm.sigma.weights).map(|(v, w)| v * w).sum();
    let rhs = vals.iter().zip(&gm.mu.weights).map(|(v, w)| v * w).sum();
    let ratios = gm.mu.weights.iter().zip(&gm.sigma.weights).map(|(m, s)| m / s);
    let (c1, c2) = ratios.fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r), b.max(r)));
    Ok(GraphIntegral { lhs, rhs, c1, c2 })
}

#[derive(Clone, Debug, Serialize)]
pub struct AhlforsReport {
    pub radii: Vec<f64>,
    pub sigma: Vec<f64>,
    /// `sigma(B(e, R)) / R^d_m`.
    pub normalized: Vec<f64>,
    /// Least-squares slope of `log sigma` against `log R`.
    pub slope: f64,
    pub d_m: usize,
    pub c0: f64,
    pub lower_constant: f64,
    pub upper_constant: f64,
    pub in_band: Vec<bool>,
    pub all_in_band: bool,
}

pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn report(radii: &[f64], sigma: Vec<f64>, d_m: usize, c0: f64, lipschitz: f64) -> AhlforsReport {
    let normalized: Vec<f64> = radii.iter().zip(&sigma).map(|(r, s)| s / r.powi(d_m as i32)).collect();
    // Band constants: the lower one is (c0 / (1 + L))^d_m; the upper one is
    // taken symmetric, ((1 + L) / c0)^d_m.
    let lower = (c0 / (1.0 + lipschitz)).powi(d_m as i32);
    let upper = ((1.0 + lipschitz) / c0).powi(d_m as i32);
    let in_band: Vec<bool> = normalized.iter().map(|v| *v >= lower && *v <= upper).collect();
    AhlforsReport {
        radii: radii.to_vec(),
        slope: loglog_slope(radii, &sigma),
        sigma,
        normalized,
        d_m,
        c0,
        lower_constant: lower,
        upper_constant: upper,
        all_in_band: in_band.iter().all(|b| *b),
        in_band,
    }
}

fn check_profile_args(radii: &[f64], lipschitz: f64, c0: f64) -> Result<()> {
    if radii.len() < 2 || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::invalid("need at least two positive radii"));
    }
    if !(lipschitz > 0.0 && lipschitz.is_finite()) || !(c0 > 0.0 && c0 <= 1.0) {
        return Err(Error::invalid("Lipschitz constant must be positive and c0 in (0, 1]"));
    }
    Ok(())
}

/// `sigma(B(e, R))` for a graph through the identity, with the graph
/// resampled for each radius on a box covering `P_M(B(e, R))` at spacing
/// `R / rel_resolution`.
#[allow(clippy::too_many_arguments)]
pub fn ahlfors_profile(
    alg: &HTypeAlgebra,
    split: &HomogeneousSplit,
    map: &GraphMap,
    norm: &HomogeneousNorm,
    lipschitz: f64,
    radii: &[f64],
    rel_resolution: usize,
    c0: f64,
) -> Result<AhlforsReport> {
    check_profile_args(radii, lipschitz, c0)?;
    if matches!(map, GraphMap::Table(_)) {
        return Err(Error::Unsupported("per-radius resampling needs a map defined on all of M".into()));
    }
    if rel_resolution < 2 {
        return Err(Error::invalid("relative resolution must be at least 2"));
    }
    let d = split.d_t();
    let mut sigma = Vec::with_capacity(radii.len());
    for &r in radii {
        // |m| <= |m f(m)| / c0 bounds the part of M that reaches the ball.
        let (bx, bt) = norm.ball_box(r / c0);
        let (sx, st) = norm.ball_box(r / rel_resolution as f64);
        let mut lo = Vec::with_capacity(d);
        let mut step = Vec::with_capacity(d);
        for k in 0..d {
            let (b, s) = if split.m_is_vertical(k) { (bt, st) } else { (bx, sx) };
            step.push(s);
            lo.push(-(b / s).ceil() * s);
        }
        let hi: Vec<f64> = lo.iter().map(|v| -v).collect();
        let grid = GraphGrid::new(lo, hi, step)?;
        let graph = IntrinsicGraph::new(split.clone(), grid, map.clone())?;
        let s = metric_spacing(alg, split, &graph.grid, norm);
        let cut = r + 3.0 * s;
        let pts: Vec<GroupPoint> = graph.points(alg).into_iter().filter(|p| norm.eval(&p.x, &p.t) <= cut).collect();
        let gm = measures_from_atoms(alg, pts, graph.grid.cell_volume(), s, split.d_m(), norm)?;
        let e = alg.identity();
        sigma.push(gm.sigma.ball_mass(alg, &e, r, norm));
    }
    Ok(report(radii, sigma, split.d_m(), c0, lipschitz))
}

/// Same report from a single fixed sampling of the graph.
pub fn ahlfors_on_graph(
    alg: &HTypeAlgebra,
    graph: &IntrinsicGraph,
    norm: &HomogeneousNorm,
    center: &GroupPoint,
    lipschitz: f64,
    radii: &[f64],
    c0: f64,
) -> Result<AhlforsReport> {
    check_profile_args(radii, lipschitz, c0)?;
    alg.check_point(center)?;
    let gm = graph_measures(alg, graph, norm)?;
    let sigma = radii.iter().map(|&r| gm.sigma.ball_mass(alg, center, r, norm)).collect();
    Ok(report(radii, sigma, graph.split.d_m(), c0, lipschitz))
}

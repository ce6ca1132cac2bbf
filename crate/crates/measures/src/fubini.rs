use carnot_core::{Error, HTypeAlgebra, Result};
use rayon::prelude::*;
use serde::Serialize;
use splits_graphs::HomogeneousSplit;

/// Coordinate box in `G` (flat `x` then `t`) holding the support of the
/// integrand, sampled by a midpoint rule with spacing at most `step`.
#[derive(Clone, Debug, Serialize)]
pub struct FubiniBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub step: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FubiniReport {
    /// Direct sum over `G`.
    pub lhs: f64,
    /// Iterated sum over cosets `M h`, `h` in `H`, then over `M`.
    pub rhs: f64,
    pub rel_error: f64,
    pub step: f64,
    pub g_cells: usize,
    pub coset_cells: usize,
    pub m_cells: usize,
}

#[derive(Clone, Debug)]
struct Axis {
    lo: f64,
    h: f64,
    n: usize,
}

impl Axis {
    fn new(lo: f64, hi: f64, step: f64) -> Self {
        let n = (((hi - lo) / step) - 1e-9).ceil().max(1.0) as usize;
        Self { lo, h: (hi - lo) / n as f64, n }
    }

    fn mid(&self, k: usize) -> f64 {
        self.lo + (k as f64 + 0.5) * self.h
    }
}

/// Calls `f` on every midpoint of the product grid, reusing one buffer.
fn for_each_node(axes: &[Axis], buf: &mut Vec<f64>, mut f: impl FnMut(&[f64])) {
    let d = axes.len();
    buf.clear();
    buf.extend(axes.iter().map(|a| a.mid(0)));
    if axes.iter().any(|a| a.n == 0) {
        return;
    }
    let mut idx = vec![0usize; d];
    loop {
        f(buf);
        let mut k = d;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < axes[k].n {
                buf[k] = axes[k].mid(idx[k]);
                break;
            }
            idx[k] = 0;
            buf[k] = axes[k].mid(0);
        }
    }
}

fn cells(axes: &[Axis]) -> usize {
    axes.iter().map(|a| a.n).product()
}

fn volume(axes: &[Axis]) -> f64 {
    axes.iter().map(|a| a.h).product()
}

/// Sum of `f` over the grid, split on the first axis across threads and
/// reduced in index order.
fn grid_sum(axes: &[Axis], f: impl Fn(&[f64], &mut Vec<f64>) -> f64 + Sync) -> f64 {
    if axes.is_empty() {
        return f(&[], &mut Vec::new());
    }
    let parts: Vec<f64> = (0..axes[0].n)
        .into_par_iter()
        .map(|i| {
            let mut rest: Vec<Axis> = axes.to_vec();
            rest[0] = Axis { lo: axes[0].mid(i) - 0.5 * axes[0].h, h: axes[0].h, n: 1 };
            let mut buf = Vec::new();
            let mut scratch = Vec::new();
            let mut s = 0.0;
            for_each_node(&rest, &mut buf, |c| s += f(c, &mut scratch));
            s
        })
        .collect();
    parts.iter().sum()
}

/// Compares `int_G kappa` with `int_{M\G} int_M kappa(m g) dm dg`, cosets
/// parametrised by `H`. Errors if `kappa` is not negligible on the box
/// boundary.
pub fn coset_fubini<F>(alg: &HTypeAlgebra, split: &HomogeneousSplit, kappa: F, region: &FubiniBox) -> Result<FubiniReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let (m1, dim) = (alg.m1(), alg.dim());
    if region.lo.len() != dim || region.hi.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: region.lo.len().min(region.hi.len()) });
    }
    if !(region.step > 0.0 && region.step.is_finite()) {
        return Err(Error::invalid("step must be positive"));
    }
    if region.lo.iter().zip(&region.hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && b > a)) {
        return Err(Error::invalid("box needs finite lo < hi in every coordinate"));
    }
    let g_axes: Vec<Axis> = (0..dim).map(|k| Axis::new(region.lo[k], region.hi[k], region.step)).collect();

    // Support check on the boundary faces.
    let mut edge = 0.0f64;
    let mut buf = Vec::new();
    for k in 0..dim {
        for v in [region.lo[k], region.hi[k]] {
            let mut face = g_axes.clone();
            face[k] = Axis { lo: v, h: 0.0, n: 1 };
            for_each_node(&face, &mut buf, |c| edge = edge.max(kappa(c).abs()));
        }
    }

    let lhs = grid_sum(&g_axes, |c, _| kappa(c)) * volume(&g_axes);
    let peak = {
        let mut p = 0.0f64;
        for_each_node(&g_axes, &mut buf, |c| p = p.max(kappa(c).abs()));
        p
    };
    if !lhs.is_finite() || !peak.is_finite() {
        return Err(Error::invalid("integrand must be finite on the box"));
    }
    if edge > 1e-9 * peak {
        return Err(Error::invalid(format!("integrand reaches {edge:e} on the box boundary; enlarge the box")));
    }

    // `s = t - [x_M, x_H] / 2` stays within the t-range widened by this bound.
    let reach: Vec<f64> = (0..m1).map(|i| region.lo[i].abs().max(region.hi[i].abs())).collect();
    let mut widen = vec![0.0; alg.m2()];
    for t in alg.terms() {
        widen[t.a] += 0.5 * t.c.abs() * reach[t.i] * reach[t.j];
    }
    let axis_for = |hor: bool, idx: usize| {
        if hor {
            Axis::new(region.lo[idx], region.hi[idx], region.step)
        } else {
            Axis::new(region.lo[m1 + idx] - widen[idx], region.hi[m1 + idx] + widen[idx], region.step)
        }
    };
    let m_axes: Vec<Axis> = split.m_h.iter().map(|&i| axis_for(true, i)).chain(split.m_v.iter().map(|&a| axis_for(false, a))).collect();
    let h_axes: Vec<Axis> =
        split.h_h().iter().map(|&i| axis_for(true, i)).chain(split.h_v().iter().map(|&a| axis_for(false, a))).collect();

    let (nmh, nhh) = (split.m_h.len(), split.h_h().len());
    let inner = |ch: &[f64], scratch: &mut Vec<f64>| {
        let mut xh = vec![0.0; m1];
        let mut th = vec![0.0; alg.m2()];
        for (k, &i) in split.h_h().iter().enumerate() {
            xh[i] = ch[k];
        }
        for (k, &a) in split.h_v().iter().enumerate() {
            th[a] = ch[nhh + k];
        }
        let mut xm = vec![0.0; m1];
        let mut g = vec![0.0; dim];
        let mut s = 0.0;
        for_each_node(&m_axes, scratch, |cm| {
            for (k, &i) in split.m_h.iter().enumerate() {
                xm[i] = cm[k];
            }
            g[..m1].iter_mut().enumerate().for_each(|(i, v)| *v = xm[i] + xh[i]);
            g[m1..].copy_from_slice(&th);
            for (k, &a) in split.m_v.iter().enumerate() {
                g[m1 + a] += cm[nmh + k];
            }
            alg.bracket_add(&xm, &xh, 0.5, &mut g[m1..]);
            s += kappa(&g);
        });
        s
    };
    let rhs = grid_sum(&h_axes, inner) * volume(&m_axes) * volume(&h_axes);
    if !rhs.is_finite() {
        return Err(Error::invalid("integrand must be finite on the coset grid"));
    }
    let rel_error = if lhs == 0.0 && rhs == 0.0 { 0.0 } else { (lhs - rhs).abs() / lhs.abs().max(f64::MIN_POSITIVE) };
    Ok(FubiniReport {
        lhs,
        rhs,
        rel_error,
        step: region.step,
        g_cells: cells(&g_axes),
        coset_cells: cells(&h_axes),
        m_cells: cells(&m_axes),
    })
}

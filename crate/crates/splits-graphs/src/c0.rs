use carnot_core::rng::{self, Rng};
use carnot_core::{Error, GroupPoint, HTypeAlgebra, HomogeneousNorm, Result};
use serde::Serialize;

use crate::split::HomogeneousSplit;

#[derive(Clone, Debug, Serialize)]
pub struct C0Estimate {
    /// Smallest sampled `|m h|` with `|m| + |h| = 1`; an upper bound for the infimum.
    pub value: f64,
    pub samples: usize,
    pub best_m: Vec<f64>,
    pub best_h: Vec<f64>,
}

/// Dilates `g` so that its norm equals `target`. Exact for homogeneous
/// norms, bisection on the dilation factor otherwise.
pub fn scale_to_norm(alg: &HTypeAlgebra, g: &GroupPoint, target: f64, norm: &HomogeneousNorm) -> Result<GroupPoint> {
    let n0 = norm.eval(&g.x, &g.t);
    if n0 == 0.0 {
        return if target == 0.0 { Ok(g.clone()) } else { Err(Error::invalid("cannot rescale the identity")) };
    }
    if target == 0.0 {
        return Ok(alg.identity());
    }
    if norm.is_homogeneous() {
        return alg.dilate(g, target / n0);
    }
    let eval = |l: f64| {
        let d = alg.dilate(g, l).expect("positive factor");
        norm.eval(&d.x, &d.t)
    };
    let (mut lo, mut hi) = (1.0, 1.0);
    while eval(lo) > target {
        lo *= 0.5;
    }
    while eval(hi) < target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if eval(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    alg.dilate(g, 0.5 * (lo + hi))
}

fn random_in(alg: &HTypeAlgebra, hor: &[usize], ver: &[usize], rng: &mut Rng) -> GroupPoint {
    let mut g = alg.identity();
    for &i in hor {
        g.x[i] = rng::normal(rng);
    }
    for &a in ver {
        g.t[a] = rng::normal(rng);
    }
    g
}

/// Monte Carlo estimate of `c0 = inf { |m h| : |m| + |h| = 1 }`.
pub fn c0_estimate(
    alg: &HTypeAlgebra,
    split: &HomogeneousSplit,
    norm: &HomogeneousNorm,
    samples: usize,
    seed: u64,
) -> Result<C0Estimate> {
    if samples == 0 {
        return Err(Error::invalid("c0 estimate needs at least one sample"));
    }
    let mut rng = rng::seeded(seed);
    let h_trivial = split.h_dim() == 0;
    let mut best = (f64::INFINITY, alg.identity(), alg.identity());
    for _ in 0..samples {
        let a = if h_trivial { 1.0 } else { rng::uniform(&mut rng) };
        let m = random_in(alg, &split.m_h, &split.m_v, &mut rng);
        let h = random_in(alg, split.h_h(), split.h_v(), &mut rng);
        let m = scale_to_norm(alg, &m, a, norm)?;
        let h = if h_trivial { h } else { scale_to_norm(alg, &h, 1.0 - a, norm)? };
        let p = alg.mul_unchecked(&m, &h);
        let v = norm.eval(&p.x, &p.t);
        if v < best.0 {
            best = (v, m, h);
        }
    }
    Ok(C0Estimate { value: best.0, samples, best_m: best.1.to_flat(), best_h: best.2.to_flat() })
}

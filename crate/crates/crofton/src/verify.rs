//! Monte Carlo estimates of Grassmannian averages of subspace integrals,
//! compared with radially weighted ambient integrals.

use carnot_core::rng::{self};
use carnot_core::{Error, HTypeAlgebra, Result};
use grassmann::{haar_orthogonal, isometry_at, reference_subalgebra, Subalgebra};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::integrand::{sphere_area, Integrand, Quadrature, Separable};

#[derive(Clone, Debug, Serialize)]
pub struct CroftonOptions {
    /// Batches for the batch-means standard error.
    pub batches: usize,
    pub quadrature: Quadrature,
    /// Include the reflection component of the isometry group (complex and
    /// quaternionic algebras; the real one always includes it).
    pub reflections: bool,
}

impl Default for CroftonOptions {
    fn default() -> Self {
        CroftonOptions { batches: 20, quadrature: Quadrature::default(), reflections: false }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CroftonReport {
    pub space: String,
    pub integrand: String,
    pub m1: usize,
    pub m2: usize,
    pub k_h: usize,
    pub k_v: usize,
    pub samples: usize,
    pub batches: usize,
    /// Grassmannian average of the subspace integrals.
    pub lhs: f64,
    pub lhs_se: f64,
    /// Radially weighted ambient integral.
    pub rhs: f64,
    /// `lhs / rhs`; absent when `rhs = 0`.
    pub constant: Option<f64>,
    pub constant_se: Option<f64>,
    /// `|S^(k_h-1)| |S^(k_v-1)| / (|S^(m1-1)| |S^(m2-1)|)`, the value the
    /// sphere push-forward predicts (sphere factors of empty layers are 1).
    pub sphere_ratio: f64,
}

fn sphere_factor(k: usize, m: usize) -> f64 {
    if k == 0 || m == 0 {
        1.0
    } else {
        sphere_area(k) / sphere_area(m)
    }
}

/// Batch means of `sample(i)` for `i < samples`, evaluated in parallel with a
/// fixed reduction order. Returns (mean, standard error).
fn batch_means(samples: usize, batches: usize, sample: impl Fn(usize) -> Result<f64> + Sync) -> Result<(f64, f64)> {
    if batches < 2 {
        return Err(Error::invalid("need at least two batches"));
    }
    if samples < batches {
        return Err(Error::invalid(format!("need at least {batches} samples, one per batch")));
    }
    let bounds: Vec<(usize, usize)> = (0..batches).map(|b| (b * samples / batches, (b + 1) * samples / batches)).collect();
    let sums: Vec<f64> = bounds
        .par_iter()
        .map(|&(lo, hi)| (lo..hi).map(&sample).sum::<Result<f64>>())
        .collect::<Result<Vec<f64>>>()?;
    let means: Vec<f64> = sums.iter().zip(&bounds).map(|(s, (lo, hi))| s / (hi - lo) as f64).collect();
    let mean = sums.iter().sum::<f64>() / samples as f64;
    let bm = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - bm) * (m - bm)).sum::<f64>() / (batches - 1) as f64;
    Ok((mean, (var / batches as f64).sqrt()))
}

#[allow(clippy::too_many_arguments)]
fn report(
    space: String,
    integrand: String,
    (m1, m2, k_h, k_v): (usize, usize, usize, usize),
    samples: usize,
    batches: usize,
    (lhs, lhs_se): (f64, f64),
    rhs: f64,
) -> CroftonReport {
    let (constant, constant_se) = if rhs > 0.0 { (Some(lhs / rhs), Some(lhs_se / rhs)) } else { (None, None) };
    CroftonReport {
        space,
        integrand,
        m1,
        m2,
        k_h,
        k_v,
        samples,
        batches,
        lhs,
        lhs_se,
        rhs,
        constant,
        constant_se,
        sphere_ratio: sphere_factor(k_h, m1) * sphere_factor(k_v, m2),
    }
}

/// Random `k`-planes of `R^n` (first columns of Haar orthogonal matrices,
/// sample `i` from stream `i` of `seed`).
pub fn euclidean_crofton(n: usize, k: usize, f: &Integrand, samples: usize, seed: u64, opts: &CroftonOptions) -> Result<CroftonReport> {
    if !(1 <= k && k < n) {
        return Err(Error::invalid(format!("need 1 <= k < n, got k = {k}, n = {n}")));
    }
    f.validate(n)?;
    opts.quadrature.validate()?;
    let q = opts.quadrature;
    let lhs = batch_means(samples, opts.batches, |i| {
        let o = haar_orthogonal(n, &mut rng::child(seed, i as u64))?;
        Ok(f.subspace_integral(&o.columns(0, k).into_owned(), &q))
    })?;
    let rhs = f.weighted_integral(n, k, &q);
    Ok(report(format!("R^{n}"), f.label(), (n, 0, k, 0), samples, opts.batches, lhs, rhs))
}

fn algebra_label(alg: &HTypeAlgebra) -> String {
    format!("{:?}(n={})", alg.kind(), alg.n())
}

fn grassmannian_mean(
    alg: &HTypeAlgebra,
    reference: &Subalgebra,
    samples: usize,
    seed: u64,
    opts: &CroftonOptions,
    integral: impl Fn(&DMatrix<f64>, &DMatrix<f64>) -> f64 + Sync,
) -> Result<(f64, f64)> {
    batch_means(samples, opts.batches, |i| {
        let v = reference.act(&isometry_at(alg, seed, i, opts.reflections)?);
        Ok(integral(&v.h_matrix(), &v.t_matrix()))
    })
}

/// Horizontal `k`-dimensional subalgebras of an H-type algebra, `f` on the
/// first layer.
pub fn htype_crofton_horizontal(
    alg: &HTypeAlgebra,
    k: usize,
    f: &Integrand,
    samples: usize,
    seed: u64,
    opts: &CroftonOptions,
) -> Result<CroftonReport> {
    let reference = reference_subalgebra(alg, k, 0)?;
    f.validate(alg.m1())?;
    opts.quadrature.validate()?;
    let q = opts.quadrature;
    let lhs = grassmannian_mean(alg, &reference, samples, seed, opts, |h, _| f.subspace_integral(h, &q))?;
    let rhs = f.weighted_integral(alg.m1(), k, &q);
    Ok(report(algebra_label(alg), f.label(), (alg.m1(), alg.m2(), k, 0), samples, opts.batches, lhs, rhs))
}

/// Subalgebras of shape `(k_h, k_v)` with `k_v >= 1`, separable `f` on
/// `h_1 x h_2`.
pub fn htype_crofton_vertical(
    alg: &HTypeAlgebra,
    k_h: usize,
    k_v: usize,
    f: &Separable,
    samples: usize,
    seed: u64,
    opts: &CroftonOptions,
) -> Result<CroftonReport> {
    if k_v == 0 {
        return Err(Error::invalid("vertical shapes need k_v >= 1; use the horizontal verifier"));
    }
    if k_h == 0 {
        return Err(Error::invalid("vertical shapes need k_h >= 1"));
    }
    let reference = reference_subalgebra(alg, k_h, k_v)?;
    f.validate(alg.m1(), alg.m2())?;
    opts.quadrature.validate()?;
    let q = opts.quadrature;
    let lhs = grassmannian_mean(alg, &reference, samples, seed, opts, |h, t| f.subspace_integral(h, t, &q))?;
    let rhs = f.weighted_integral(alg.m1(), k_h, alg.m2(), k_v, &q);
    Ok(report(algebra_label(alg), f.label(), (alg.m1(), alg.m2(), k_h, k_v), samples, opts.batches, lhs, rhs))
}

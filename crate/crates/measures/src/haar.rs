use carnot_core::{Error, GroupPoint, HTypeAlgebra, Result};
use nalgebra::DMatrix;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct HaarScaling {
    pub lambda: f64,
    /// `vol(delta_l E) / vol(E)` for the coordinate box `E`.
    pub ratio: f64,
    /// `lambda^Q`.
    pub expected: f64,
}

fn jacobian(dim: usize, map: impl Fn(&[f64]) -> Vec<f64>, at: &[f64]) -> DMatrix<f64> {
    let h = 1e-5;
    let mut j = DMatrix::zeros(dim, dim);
    for c in 0..dim {
        let mut p = at.to_vec();
        let mut q = at.to_vec();
        p[c] += h;
        q[c] -= h;
        let (fp, fq) = (map(&p), map(&q));
        for r in 0..dim {
            j[(r, c)] = (fp[r] - fq[r]) / (2.0 * h);
        }
    }
    j
}

/// Jacobian determinant of `delta_l` at `at`.
pub fn dilation_jacobian(alg: &HTypeAlgebra, lambda: f64, at: &GroupPoint) -> Result<f64> {
    alg.check_point(at)?;
    let map = |v: &[f64]| alg.dilate(&alg.point_from_flat(v).expect("dims"), lambda).expect("lambda").to_flat();
    if !(lambda > 0.0) {
        return Err(Error::invalid("dilation factor must be positive"));
    }
    Ok(jacobian(alg.dim(), map, &at.to_flat()).determinant())
}

/// Jacobian determinant of left translation by `g` at `at`.
pub fn translation_jacobian(alg: &HTypeAlgebra, g: &GroupPoint, at: &GroupPoint) -> Result<f64> {
    alg.check_point(g)?;
    alg.check_point(at)?;
    let map = |v: &[f64]| alg.mul_unchecked(g, &alg.point_from_flat(v).expect("dims")).to_flat();
    Ok(jacobian(alg.dim(), map, &at.to_flat()).determinant())
}

/// Volume ratio of the dilated coordinate box `[lo, hi]`, read off the
/// image of its corners.
pub fn haar_scaling_check(alg: &HTypeAlgebra, lambda: f64, lo: &[f64], hi: &[f64]) -> Result<HaarScaling> {
    if lo.len() != alg.dim() || hi.len() != alg.dim() {
        return Err(Error::DimensionMismatch { expected: alg.dim(), got: lo.len().min(hi.len()) });
    }
    if lo.iter().zip(hi).any(|(a, b)| !(b > a)) {
        return Err(Error::invalid("box must have positive volume"));
    }
    let a = alg.dilate(&alg.point_from_flat(lo)?, lambda)?.to_flat();
    let b = alg.dilate(&alg.point_from_flat(hi)?, lambda)?.to_flat();
    let ratio = (0..alg.dim()).map(|k| (b[k] - a[k]) / (hi[k] - lo[k])).product();
    Ok(HaarScaling { lambda, ratio, expected: lambda.powi(alg.homogeneous_dim() as i32) })
}

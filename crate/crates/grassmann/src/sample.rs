//! Invariant measures as push-forwards of the isometry group's Haar measure:
//! Grassmannians of complemented subalgebras and products of spheres.

use carnot_core::rng::{self, Rng};
use carnot_core::{Error, GroupPoint, HTypeAlgebra, Result};

use crate::isometry::{sample_isometry_with, Isometry};
use crate::subalgebra::Subalgebra;

/// Closure tolerance a reference subalgebra must meet.
pub const CLOSURE_TOL: f64 = 1e-10;

/// One isometry per sample, sample `i` drawn from stream `i` of `seed`, so
/// any sub-range can be regenerated independently.
pub fn sample_isometries(alg: &HTypeAlgebra, count: usize, seed: u64, reflections: bool) -> Result<Vec<Isometry>> {
    (0..count).map(|i| isometry_at(alg, seed, i, reflections)).collect()
}

/// Sample `i` of [`sample_isometries`].
pub fn isometry_at(alg: &HTypeAlgebra, seed: u64, index: usize, reflections: bool) -> Result<Isometry> {
    let mut r: Rng = rng::child(seed, index as u64);
    sample_isometry_with(alg, &mut r, reflections)
}

/// `count` independent draws from the invariant measure on the orbit of
/// `reference`.
pub fn sample_grassmannian(
    alg: &HTypeAlgebra,
    reference: &Subalgebra,
    count: usize,
    seed: u64,
    reflections: bool,
) -> Result<Vec<Subalgebra>> {
    if reference.m1 != alg.m1() || reference.m2 != alg.m2() {
        return Err(Error::DimensionMismatch { expected: alg.m1() + alg.m2(), got: reference.m1 + reference.m2 });
    }
    let defect = reference.closure_defect(alg);
    if defect > CLOSURE_TOL {
        return Err(Error::invalid(format!("reference is not an orthogonally complemented subalgebra (defect {defect:.2e})")));
    }
    (0..count).map(|i| Ok(reference.act(&isometry_at(alg, seed, i, reflections)?))).collect()
}

/// Orbit samples `(U x, V t)` of a point. The horizontal radius must be
/// positive; otherwise the orbit degenerates to the vertical sphere.
pub fn sphere_pushforward(
    alg: &HTypeAlgebra,
    point: &GroupPoint,
    count: usize,
    seed: u64,
    reflections: bool,
) -> Result<Vec<GroupPoint>> {
    alg.check_point(point)?;
    if point.x.iter().all(|x| *x == 0.0) {
        return Err(Error::invalid("degenerate orbit: horizontal radius is zero"));
    }
    (0..count).map(|i| Ok(isometry_at(alg, seed, i, reflections)?.apply(point))).collect()
}

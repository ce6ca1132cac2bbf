//! Grading-preserving isometries `(U, V)` of H-type algebras, defined by
//! `U^T J_z U = J_{V^T z}`.

use carnot_core::rng::{self, Rng};
use carnot_core::{AlgebraKind, Error, GroupPoint, HTypeAlgebra, Result};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

use crate::haar::{commutant_haar, quaternion_words, unitary_words};

#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
}

impl Isometry {
    pub fn identity(alg: &HTypeAlgebra) -> Self {
        Isometry { u: DMatrix::identity(alg.m1(), alg.m1()), v: DMatrix::identity(alg.m2(), alg.m2()) }
    }

    /// Completes a horizontal orthogonal map to an isometry by reading `V`
    /// off `U^T J_a U = sum_b V_ab J_b`. Fails if `U` is not compatible.
    pub fn from_horizontal(alg: &HTypeAlgebra, u: DMatrix<f64>) -> Result<Self> {
        if u.nrows() != alg.m1() || u.ncols() != alg.m1() {
            return Err(Error::DimensionMismatch { expected: alg.m1(), got: u.nrows() });
        }
        let m1 = alg.m1() as f64;
        let js = alg.j_maps();
        let conj: Vec<DMatrix<f64>> = js.iter().map(|j| u.transpose() * j * &u).collect();
        let v = DMatrix::from_fn(alg.m2(), alg.m2(), |a, b| conj[a].dot(&js[b]) / m1);
        let iso = Isometry { u, v };
        let defect = iso.defect(alg);
        if defect > 1e-9 {
            return Err(Error::invalid(format!("horizontal map is not an isometry of the algebra (defect {defect:.2e})")));
        }
        Ok(iso)
    }

    /// Largest entry of `U^T J_a U - J_{V^T e_a}` over the centre basis, and
    /// of the orthogonality defects of `U` and `V`.
    pub fn defect(&self, alg: &HTypeAlgebra) -> f64 {
        let js = alg.j_maps();
        let mut worst = crate::haar::orthogonality_defect(&self.u).max(if alg.m2() > 0 {
            crate::haar::orthogonality_defect(&self.v)
        } else {
            0.0
        });
        for (a, ja) in js.iter().enumerate() {
            let mut rhs = DMatrix::zeros(alg.m1(), alg.m1());
            for (b, jb) in js.iter().enumerate() {
                rhs += jb * self.v[(a, b)];
            }
            worst = worst.max((self.u.transpose() * ja * &self.u - rhs).amax());
        }
        worst
    }

    /// `(x, t) -> (U x, V t)`.
    pub fn apply(&self, g: &GroupPoint) -> GroupPoint {
        let x = &self.u * DVector::from_column_slice(&g.x);
        let t = &self.v * DVector::from_column_slice(&g.t);
        GroupPoint::new(x.as_slice().to_vec(), t.as_slice().to_vec())
    }

    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry { u: &self.u * &other.u, v: &self.v * &other.v }
    }

    pub fn inverse(&self) -> Isometry {
        Isometry { u: self.u.transpose(), v: self.v.transpose() }
    }
}

/// Haar sample of the isometry group. For the real Heisenberg algebra the
/// reflection component is always included; for the complex and
/// quaternionic ones `reflections` adds the non-identity Pin component.
pub fn sample_isometry_with(alg: &HTypeAlgebra, rng: &mut Rng, reflections: bool) -> Result<Isometry> {
    let m1 = alg.m1();
    let js = alg.j_maps();
    let u = match alg.kind() {
        AlgebraKind::RealHeis => {
            let a = commutant_haar(&unitary_words(alg), m1, rng);
            if rng::uniform(rng) < 0.5 {
                a
            } else {
                // (x, y) -> (x, -y) anticommutes with J.
                let n = alg.n();
                let k = DMatrix::from_fn(m1, m1, |i, j| if i != j { 0.0 } else if i < n { 1.0 } else { -1.0 });
                k * a
            }
        }
        AlgebraKind::ComplexHeis => {
            let a = commutant_haar(&quaternion_words(alg), m1, rng);
            let theta = 2.0 * PI * rng::uniform(rng);
            let spin = DMatrix::identity(m1, m1) * theta.cos() + &js[0] * &js[1] * theta.sin();
            let pin = if reflections && rng::uniform(rng) < 0.5 {
                let phi = 2.0 * PI * rng::uniform(rng);
                (&js[0] * phi.cos() + &js[1] * phi.sin()) * spin
            } else {
                spin
            };
            pin * a
        }
        AlgebraKind::QuatHeis => {
            let a = commutant_haar(&quaternion_words(alg), m1, rng);
            let q = DVector::from_vec(rng::normal_vec(rng, 4)).normalize();
            let spin = DMatrix::identity(m1, m1) * q[0]
                + &js[1] * &js[2] * q[1]
                + &js[2] * &js[0] * q[2]
                + &js[0] * &js[1] * q[3];
            let pin = if reflections && rng::uniform(rng) < 0.5 { &js[0] * spin } else { spin };
            pin * a
        }
        AlgebraKind::GenericStep2 => {
            return Err(Error::Unsupported("isometry sampling needs a Heisenberg-type algebra".into()));
        }
    };
    Isometry::from_horizontal(alg, u)
}

/// [`sample_isometry_with`] on a fresh generator, identity Pin component only.
pub fn sample_isometry(alg: &HTypeAlgebra, seed: u64) -> Result<Isometry> {
    sample_isometry_with(alg, &mut rng::seeded(seed), false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use carnot_core::HomogeneousNorm;

    fn algebras() -> Vec<HTypeAlgebra> {
        vec![
            HTypeAlgebra::real_heisenberg(1).unwrap(),
            HTypeAlgebra::real_heisenberg(2).unwrap(),
            HTypeAlgebra::complex_heisenberg(1).unwrap(),
            HTypeAlgebra::complex_heisenberg(2).unwrap(),
            HTypeAlgebra::quaternion_heisenberg(1).unwrap(),
            HTypeAlgebra::quaternion_heisenberg(2).unwrap(),
        ]
    }

    #[test]
    fn identity_is_compatible() {
        for alg in algebras() {
            let id = Isometry::identity(&alg);
            assert_eq!(id.defect(&alg), 0.0);
            assert_eq!(Isometry::from_horizontal(&alg, id.u.clone()).unwrap(), id);
        }
    }

    #[test]
    fn samples_satisfy_the_defining_relation() {
        let mut rng = rng::seeded(5);
        for alg in algebras() {
            for refl in [false, true] {
                for _ in 0..50 {
                    let iso = sample_isometry_with(&alg, &mut rng, refl).unwrap();
                    assert!(iso.defect(&alg) < 1e-12, "{:?} {}", alg.kind(), iso.defect(&alg));
                }
            }
        }
    }

    #[test]
    fn real_heisenberg_centre_action_is_a_fair_sign() {
        let alg = HTypeAlgebra::real_heisenberg(2).unwrap();
        let mut rng = rng::seeded(6);
        let draws = 10_000;
        let mut minus = 0;
        for _ in 0..draws {
            let iso = sample_isometry_with(&alg, &mut rng, false).unwrap();
            let v = iso.v[(0, 0)];
            assert!((v.abs() - 1.0).abs() < 1e-12);
            let j = alg.j_map(0);
            assert!((iso.u.transpose() * j * &iso.u - j * v).amax() < 1e-12);
            if v < 0.0 {
                minus += 1;
            }
        }
        assert!((minus as f64 / draws as f64 - 0.5).abs() < 0.02);
    }

    #[test]
    fn complex_reflections_reach_both_components() {
        let alg = HTypeAlgebra::complex_heisenberg(1).unwrap();
        let mut rng = rng::seeded(7);
        let dets: Vec<f64> = (0..200).map(|_| sample_isometry_with(&alg, &mut rng, true).unwrap().v.determinant()).collect();
        assert!(dets.iter().any(|d| *d < -0.5) && dets.iter().any(|d| *d > 0.5));
        let rot = (0..200).all(|_| sample_isometry_with(&alg, &mut rng, false).unwrap().v.determinant() > 0.5);
        assert!(rot);
    }

    #[test]
    fn isometries_preserve_norms_and_products() {
        let mut rng = rng::seeded(8);
        let norms = [HomogeneousNorm::default(), HomogeneousNorm::Cygan, HomogeneousNorm::Euclidean];
        for alg in algebras() {
            for _ in 0..20 {
                let iso = sample_isometry_with(&alg, &mut rng, true).unwrap();
                let a = alg.point(rng::normal_vec(&mut rng, alg.m1()), rng::normal_vec(&mut rng, alg.m2())).unwrap();
                let b = alg.point(rng::normal_vec(&mut rng, alg.m1()), rng::normal_vec(&mut rng, alg.m2())).unwrap();
                for nm in &norms {
                    let before = alg.norm(&a, nm).unwrap();
                    let after = alg.norm(&iso.apply(&a), nm).unwrap();
                    assert!((before - after).abs() < 1e-12 * before.max(1.0));
                }
                let lhs = alg.multiply(&iso.apply(&a), &iso.apply(&b)).unwrap();
                let rhs = iso.apply(&alg.multiply(&a, &b).unwrap());
                for (p, q) in lhs.to_flat().iter().zip(rhs.to_flat()) {
                    assert!((p - q).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn incompatible_map_is_rejected() {
        let alg = HTypeAlgebra::complex_heisenberg(1).unwrap();
        let mut u = DMatrix::identity(4, 4);
        u.swap_columns(0, 1);
        assert!(Isometry::from_horizontal(&alg, u).is_err());
        let generic = HTypeAlgebra::abelian(3).unwrap();
        assert!(matches!(sample_isometry(&generic, 0), Err(Error::Unsupported(_))));
    }
}

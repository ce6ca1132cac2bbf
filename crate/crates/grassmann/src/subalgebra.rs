//! Homogeneous subalgebras `V = H + T` with `H` in the first layer and `T`
//! in the centre, and the orthogonally complemented reference subalgebras.

use carnot_core::{AlgebraKind, Error, GroupPoint, HTypeAlgebra, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::isometry::Isometry;

const ORTHO_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subalgebra {
    pub m1: usize,
    pub m2: usize,
    /// Orthonormal basis of the horizontal part, vectors of length `m1`.
    pub h_basis: Vec<Vec<f64>>,
    /// Orthonormal basis of the vertical part, vectors of length `m2`.
    pub t_basis: Vec<Vec<f64>>,
}

fn check_orthonormal(basis: &[Vec<f64>], len: usize, what: &str) -> Result<()> {
    for (i, b) in basis.iter().enumerate() {
        if b.len() != len {
            return Err(Error::DimensionMismatch { expected: len, got: b.len() });
        }
        for (j, c) in basis[..=i].iter().enumerate() {
            let dot: f64 = b.iter().zip(c).map(|(p, q)| p * q).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            if (dot - target).abs() > ORTHO_TOL {
                return Err(Error::invalid(format!("{what} basis is not orthonormal")));
            }
        }
    }
    Ok(())
}

fn columns(basis: &[Vec<f64>], len: usize) -> DMatrix<f64> {
    DMatrix::from_fn(len, basis.len(), |i, j| basis[j][i])
}

/// Orthonormal basis of the orthogonal complement of `basis` in `R^len`.
fn complement_basis(basis: &[Vec<f64>], len: usize) -> Vec<Vec<f64>> {
    let mut all: Vec<DVector<f64>> = basis.iter().map(|b| DVector::from_column_slice(b)).collect();
    let mut out = Vec::new();
    for i in 0..len {
        if all.len() == len {
            break;
        }
        let mut v = DVector::from_fn(len, |j, _| if i == j { 1.0 } else { 0.0 });
        for _ in 0..2 {
            for b in &all {
                let c = b.dot(&v);
                v.axpy(-c, b, 1.0);
            }
        }
        let nv = v.norm();
        if nv > 1e-8 {
            v /= nv;
            out.push(v.as_slice().to_vec());
            all.push(v);
        }
    }
    out
}

impl Subalgebra {
    /// Checks shapes and orthonormality. Bracket closure is a separate
    /// check, see [`Subalgebra::closure_defect`].
    pub fn new(alg: &HTypeAlgebra, h_basis: Vec<Vec<f64>>, t_basis: Vec<Vec<f64>>) -> Result<Self> {
        check_orthonormal(&h_basis, alg.m1(), "horizontal")?;
        check_orthonormal(&t_basis, alg.m2(), "vertical")?;
        if h_basis.is_empty() && t_basis.is_empty() {
            return Err(Error::invalid("subalgebra must have positive dimension"));
        }
        Ok(Subalgebra { m1: alg.m1(), m2: alg.m2(), h_basis, t_basis })
    }

    pub fn k_h(&self) -> usize {
        self.h_basis.len()
    }

    pub fn k_v(&self) -> usize {
        self.t_basis.len()
    }

    /// Topological dimension.
    pub fn d_t(&self) -> usize {
        self.k_h() + self.k_v()
    }

    /// Homogeneous dimension.
    pub fn d_m(&self) -> usize {
        self.k_h() + 2 * self.k_v()
    }

    pub fn h_matrix(&self) -> DMatrix<f64> {
        columns(&self.h_basis, self.m1)
    }

    pub fn t_matrix(&self) -> DMatrix<f64> {
        columns(&self.t_basis, self.m2)
    }

    /// Orthogonal complement in both layers.
    pub fn complement(&self) -> Subalgebra {
        Subalgebra {
            m1: self.m1,
            m2: self.m2,
            h_basis: complement_basis(&self.h_basis, self.m1),
            t_basis: complement_basis(&self.t_basis, self.m2),
        }
    }

    /// Largest component of `[h_i, h_j]` outside `span(T)`.
    pub fn own_closure_defect(&self, alg: &HTypeAlgebra) -> f64 {
        let t = self.t_matrix();
        let mut worst = 0.0f64;
        for (i, u) in self.h_basis.iter().enumerate() {
            for v in &self.h_basis[i + 1..] {
                let mut b = vec![0.0; alg.m2()];
                alg.bracket_add(u, v, 1.0, &mut b);
                let b = DVector::from_vec(b);
                let resid = &b - &t * (t.transpose() * &b);
                worst = worst.max(resid.amax());
            }
        }
        worst
    }

    /// Closure defect of the subalgebra and of its orthogonal complement.
    pub fn closure_defect(&self, alg: &HTypeAlgebra) -> f64 {
        self.own_closure_defect(alg).max(self.complement().own_closure_defect(alg))
    }

    pub fn is_complemented(&self, alg: &HTypeAlgebra, tol: f64) -> bool {
        self.closure_defect(alg) <= tol
    }

    /// Image under an isometry: `(U H, V T)`.
    pub fn act(&self, iso: &Isometry) -> Subalgebra {
        let map = |m: &DMatrix<f64>, basis: &[Vec<f64>]| -> Vec<Vec<f64>> {
            basis.iter().map(|b| (m * DVector::from_column_slice(b)).as_slice().to_vec()).collect()
        };
        Subalgebra { m1: self.m1, m2: self.m2, h_basis: map(&iso.u, &self.h_basis), t_basis: map(&iso.v, &self.t_basis) }
    }

    /// Point with coordinates `a` in `H` and `b` in `T`.
    pub fn embed(&self, a: &[f64], b: &[f64]) -> GroupPoint {
        let mut x = vec![0.0; self.m1];
        for (c, basis) in a.iter().zip(&self.h_basis) {
            for (xi, bi) in x.iter_mut().zip(basis) {
                *xi += c * bi;
            }
        }
        let mut t = vec![0.0; self.m2];
        for (c, basis) in b.iter().zip(&self.t_basis) {
            for (ti, bi) in t.iter_mut().zip(basis) {
                *ti += c * bi;
            }
        }
        GroupPoint::new(x, t)
    }

    /// Largest entry difference between the orthogonal projectors of the two
    /// layers; zero iff the subspaces coincide.
    pub fn distance(&self, other: &Subalgebra) -> f64 {
        if self.m1 != other.m1 || self.m2 != other.m2 || self.k_h() != other.k_h() || self.k_v() != other.k_v() {
            return f64::INFINITY;
        }
        let proj = |m: DMatrix<f64>| &m * m.transpose();
        let dh = (proj(self.h_matrix()) - proj(other.h_matrix())).amax();
        let dt = if self.m2 == 0 { 0.0 } else { (proj(self.t_matrix()) - proj(other.t_matrix())).amax() };
        dh.max(dt)
    }
}

fn unit(len: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[i] = 1.0;
    v
}

fn inadmissible(msg: String) -> Error {
    Error::invalid(format!("inadmissible shape: {msg}"))
}

/// The coordinate reference subalgebra of shape `(k_h, k_v)`.
///
/// Real and quaternionic: `k_v = 0` with `1 <= k_h <= n` (isotropic, inside
/// the first layer), or `k_v = m2` with `k_h >= (m1 - n)` (contains the
/// centre, complement isotropic). Complex: `k_v = 0` with `k_h <= 2n`,
/// `k_v = 1` with `k_h = 2n`, or `k_v = 2` with `k_h >= 2n`.
pub fn reference_subalgebra(alg: &HTypeAlgebra, k_h: usize, k_v: usize) -> Result<Subalgebra> {
    let (n, m1, m2) = (alg.n(), alg.m1(), alg.m2());
    // Maximal isotropic coordinate directions, in the order they are used.
    let isotropic: Vec<usize> = match alg.kind() {
        AlgebraKind::RealHeis => (0..n).collect(),
        AlgebraKind::ComplexHeis => (0..n).flat_map(|s| [4 * s, 4 * s + 3]).collect(),
        AlgebraKind::QuatHeis => (0..n).map(|s| 4 * s).collect(),
        AlgebraKind::GenericStep2 => {
            return Err(Error::Unsupported("reference subalgebras are tabulated for Heisenberg-type algebras only".into()))
        }
    };
    let iso = isotropic.len();
    let horizontal = |k: usize| isotropic[..k].iter().map(|&i| unit(m1, i)).collect::<Vec<_>>();
    let co_horizontal = |d: usize| (0..m1).filter(|i| !isotropic[..d].contains(i)).map(|i| unit(m1, i)).collect::<Vec<_>>();
    let (h, t) = if k_v == 0 {
        if k_h == 0 || k_h > iso {
            return Err(inadmissible(format!(
                "a subalgebra inside the first layer is isotropic, so 1 <= k_h <= {iso} (got {k_h})"
            )));
        }
        (horizontal(k_h), vec![])
    } else if k_v == m2 {
        if k_h < m1 - iso || k_h > m1 {
            return Err(inadmissible(format!(
                "a subalgebra containing the centre has an isotropic complement, so {} <= k_h <= {m1} (got {k_h})",
                m1 - iso
            )));
        }
        (co_horizontal(m1 - k_h), (0..m2).map(|a| unit(m2, a)).collect())
    } else if alg.kind() == AlgebraKind::ComplexHeis && k_v == 1 {
        if k_h != 2 * n {
            return Err(inadmissible(format!("one centre direction forces k_h = {} (got {k_h})", 2 * n)));
        }
        (horizontal(2 * n), vec![unit(m2, 0)])
    } else {
        return Err(inadmissible(format!(
            "a subalgebra of dimension above the isotropic bound contains the whole centre (k_v = {m2}, got {k_v})"
        )));
    };
    let sub = Subalgebra::new(alg, h, t)?;
    debug_assert!(sub.closure_defect(alg) == 0.0);
    Ok(sub)
}

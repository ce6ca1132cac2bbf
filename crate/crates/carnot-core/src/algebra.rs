//! Bracket tables for the model algebras.
//!
//! A bracket is stored sparsely as terms `[e_i, e_j]_a = c` with `i < j`.
//! The associated maps satisfy `<J_a u, v> = [u, v]_a`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norm::HomogeneousNorm;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlgebraKind {
    RealHeis,
    ComplexHeis,
    QuatHeis,
    GenericStep2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketTerm {
    pub i: usize,
    pub j: usize,
    pub a: usize,
    pub c: f64,
}

#[derive(Clone, Debug)]
pub struct HTypeAlgebra {
    kind: AlgebraKind,
    n: usize,
    m1: usize,
    m2: usize,
    terms: Vec<BracketTerm>,
    j_maps: Vec<DMatrix<f64>>,
}

impl HTypeAlgebra {
    /// Real Heisenberg algebra on `(x_1..x_n, y_1..y_n, t)` with `[X_j, Y_j] = e`.
    pub fn real_heisenberg(n: usize) -> Result<Self> {
        check_n(n)?;
        let terms = (0..n).map(|k| BracketTerm { i: k, j: n + k, a: 0, c: 1.0 }).collect();
        Self::build(AlgebraKind::RealHeis, n, 2 * n, 1, terms)
    }

    /// Complex Heisenberg algebra. Coordinates are grouped per slot as
    /// `(x1, x2, x3, x4)` with `[X1,X2] = -[X3,X4] = e1`, `[X1,X3] = [X2,X4] = e2`.
    pub fn complex_heisenberg(n: usize) -> Result<Self> {
        check_n(n)?;
        let mut terms = Vec::with_capacity(4 * n);
        for k in 0..n {
            let b = 4 * k;
            terms.push(BracketTerm { i: b, j: b + 1, a: 0, c: 1.0 });
            terms.push(BracketTerm { i: b + 2, j: b + 3, a: 0, c: -1.0 });
            terms.push(BracketTerm { i: b, j: b + 2, a: 1, c: 1.0 });
            terms.push(BracketTerm { i: b + 1, j: b + 3, a: 1, c: 1.0 });
        }
        Self::build(AlgebraKind::ComplexHeis, n, 4 * n, 2, terms)
    }

    /// Quaternionic Heisenberg algebra: the complex table plus
    /// `[X1,X4] = -[X2,X3] = e3`.
    pub fn quaternion_heisenberg(n: usize) -> Result<Self> {
        check_n(n)?;
        let mut terms = Vec::with_capacity(6 * n);
        for k in 0..n {
            let b = 4 * k;
            terms.push(BracketTerm { i: b, j: b + 1, a: 0, c: 1.0 });
            terms.push(BracketTerm { i: b + 2, j: b + 3, a: 0, c: -1.0 });
            terms.push(BracketTerm { i: b, j: b + 2, a: 1, c: 1.0 });
            terms.push(BracketTerm { i: b + 1, j: b + 3, a: 1, c: 1.0 });
            terms.push(BracketTerm { i: b, j: b + 3, a: 2, c: 1.0 });
            terms.push(BracketTerm { i: b + 1, j: b + 2, a: 2, c: -1.0 });
        }
        Self::build(AlgebraKind::QuatHeis, n, 4 * n, 3, terms)
    }

    /// Flat `R^n`, used as the Euclidean control case.
    pub fn abelian(n: usize) -> Result<Self> {
        check_n(n)?;
        Self::build(AlgebraKind::GenericStep2, n, n, 0, Vec::new())
    }

    /// Arbitrary step-two algebra from structure constants. Terms with
    /// `i > j` are reoriented; repeated pairs are summed.
    pub fn from_brackets(m1: usize, m2: usize, terms: &[BracketTerm]) -> Result<Self> {
        if m1 == 0 {
            return Err(Error::invalid("horizontal layer must be non-trivial"));
        }
        let mut out: Vec<BracketTerm> = Vec::new();
        for t in terms {
            if t.i >= m1 || t.j >= m1 || t.a >= m2 {
                return Err(Error::invalid(format!("bracket term {t:?} out of range")));
            }
            if t.i == t.j {
                if t.c != 0.0 {
                    return Err(Error::invalid("bracket must be antisymmetric"));
                }
                continue;
            }
            if !t.c.is_finite() {
                return Err(Error::invalid("non-finite structure constant"));
            }
            let (i, j, c) = if t.i < t.j { (t.i, t.j, t.c) } else { (t.j, t.i, -t.c) };
            match out.iter_mut().find(|o| o.i == i && o.j == j && o.a == t.a) {
                Some(o) => o.c += c,
                None => out.push(BracketTerm { i, j, a: t.a, c }),
            }
        }
        out.retain(|t| t.c != 0.0);
        Self::build(AlgebraKind::GenericStep2, m1, m1, m2, out)
    }

    fn build(kind: AlgebraKind, n: usize, m1: usize, m2: usize, terms: Vec<BracketTerm>) -> Result<Self> {
        let mut j_maps = vec![DMatrix::zeros(m1, m1); m2];
        for t in &terms {
            // J_a = B_a^T where B_a[i][j] = [e_i, e_j]_a.
            j_maps[t.a][(t.j, t.i)] += t.c;
            j_maps[t.a][(t.i, t.j)] -= t.c;
        }
        Ok(Self { kind, n, m1, m2, terms, j_maps })
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    /// Family parameter: number of slots for the Heisenberg families,
    /// the horizontal dimension for generic algebras.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn m2(&self) -> usize {
        self.m2
    }

    /// Topological dimension `m1 + m2`.
    pub fn dim(&self) -> usize {
        self.m1 + self.m2
    }

    /// Homogeneous dimension `m1 + 2 m2`.
    pub fn homogeneous_dim(&self) -> usize {
        self.m1 + 2 * self.m2
    }

    pub fn terms(&self) -> &[BracketTerm] {
        &self.terms
    }

    pub fn j_map(&self, a: usize) -> &DMatrix<f64> {
        &self.j_maps[a]
    }

    pub fn j_maps(&self) -> &[DMatrix<f64>] {
        &self.j_maps
    }

    /// `[u, v]` accumulated into `out` (not cleared).
    #[inline]
    pub fn bracket_add(&self, u: &[f64], v: &[f64], scale: f64, out: &mut [f64]) {
        for t in &self.terms {
            out[t.a] += scale * t.c * (u[t.i] * v[t.j] - u[t.j] * v[t.i]);
        }
    }

    pub fn bracket(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        crate::error::check_len(self.m1, u.len())?;
        crate::error::check_len(self.m1, v.len())?;
        let mut out = vec![0.0; self.m2];
        self.bracket_add(u, v, 1.0, &mut out);
        Ok(out)
    }

    /// Largest deviation from the H-type identities
    /// `J_a J_b + J_b J_a = -2 delta_ab I`.
    pub fn h_type_defect(&self) -> f64 {
        let id = DMatrix::<f64>::identity(self.m1, self.m1);
        let mut worst = 0.0f64;
        for a in 0..self.m2 {
            for b in a..self.m2 {
                let s = &self.j_maps[a] * &self.j_maps[b] + &self.j_maps[b] * &self.j_maps[a];
                let target = if a == b { -2.0 * &id } else { DMatrix::zeros(self.m1, self.m1) };
                worst = worst.max((s - target).amax());
            }
        }
        worst
    }

    pub fn is_h_type(&self) -> bool {
        self.m2 > 0 && self.h_type_defect() < 1e-12
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::invalid("family parameter n must be at least 1"))
    } else {
        Ok(())
    }
}

/// JSON descriptor `{kind, n, epsilon: [e1, e2]}`. The weights feed the
/// max-type homogeneous norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraSpec {
    pub kind: AlgebraKind,
    pub n: usize,
    #[serde(default = "unit_eps")]
    pub epsilon: [f64; 2],
}

fn unit_eps() -> [f64; 2] {
    [1.0, 1.0]
}

impl AlgebraSpec {
    pub fn new(kind: AlgebraKind, n: usize) -> Self {
        Self { kind, n, epsilon: unit_eps() }
    }

    /// `GenericStep2` descriptors denote the abelian group `R^n`.
    pub fn build(&self) -> Result<HTypeAlgebra> {
        match self.kind {
            AlgebraKind::RealHeis => HTypeAlgebra::real_heisenberg(self.n),
            AlgebraKind::ComplexHeis => HTypeAlgebra::complex_heisenberg(self.n),
            AlgebraKind::QuatHeis => HTypeAlgebra::quaternion_heisenberg(self.n),
            AlgebraKind::GenericStep2 => HTypeAlgebra::abelian(self.n),
        }
    }

    pub fn max_norm(&self) -> Result<HomogeneousNorm> {
        HomogeneousNorm::max_homog(self.epsilon[0], self.epsilon[1])
    }
}

use carnot_core::{Error, GroupPoint, HTypeAlgebra, HomogeneousNorm, Result};
use serde::{Deserialize, Serialize};

/// A pair of complementary coordinate subgroups. `M` is spanned by the
/// horizontal coordinates `m_h` and central coordinates `m_v`; `H` by the
/// remaining ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousSplit {
    #[serde(rename = "M_h")]
    pub m_h: Vec<usize>,
    #[serde(rename = "M_v")]
    pub m_v: Vec<usize>,
    #[serde(skip)]
    h_h: Vec<usize>,
    #[serde(skip)]
    h_v: Vec<usize>,
}

fn complement(idx: &[usize], n: usize) -> Vec<usize> {
    (0..n).filter(|i| !idx.contains(i)).collect()
}

fn closed(alg: &HTypeAlgebra, hor: &[usize], ver: &[usize]) -> bool {
    alg.terms().iter().all(|t| !(hor.contains(&t.i) && hor.contains(&t.j)) || ver.contains(&t.a))
}

impl HomogeneousSplit {
    pub fn new(alg: &HTypeAlgebra, mut m_h: Vec<usize>, mut m_v: Vec<usize>) -> Result<Self> {
        m_h.sort_unstable();
        m_v.sort_unstable();
        if m_h.windows(2).any(|w| w[0] == w[1]) || m_v.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("repeated coordinate in split"));
        }
        if m_h.iter().any(|&i| i >= alg.m1()) || m_v.iter().any(|&a| a >= alg.m2()) {
            return Err(Error::invalid("split coordinate out of range"));
        }
        if m_h.is_empty() && m_v.is_empty() {
            return Err(Error::invalid("M must be non-trivial"));
        }
        let h_h = complement(&m_h, alg.m1());
        let h_v = complement(&m_v, alg.m2());
        if !closed(alg, &m_h, &m_v) {
            return Err(Error::invalid("M is not closed under the bracket"));
        }
        if !closed(alg, &h_h, &h_v) {
            return Err(Error::invalid("H is not closed under the bracket"));
        }
        Ok(Self { m_h, m_v, h_h, h_v })
    }

    /// Re-derives the complement after deserialisation.
    pub fn validated(self, alg: &HTypeAlgebra) -> Result<Self> {
        Self::new(alg, self.m_h, self.m_v)
    }

    pub fn h_h(&self) -> &[usize] {
        &self.h_h
    }

    pub fn h_v(&self) -> &[usize] {
        &self.h_v
    }

    /// Topological dimension of `M`.
    pub fn d_t(&self) -> usize {
        self.m_h.len() + self.m_v.len()
    }

    /// Metric dimension of `M`.
    pub fn d_m(&self) -> usize {
        self.m_h.len() + 2 * self.m_v.len()
    }

    pub fn h_dim(&self) -> usize {
        self.h_h.len() + self.h_v.len()
    }

    /// The split with the roles of `M` and `H` exchanged.
    pub fn swapped(&self, alg: &HTypeAlgebra) -> Result<Self> {
        Self::new(alg, self.h_h.clone(), self.h_v.clone())
    }

    /// Unique `(m, h)` with `m` in `M`, `h` in `H` and `m h = g`.
    pub fn decompose(&self, alg: &HTypeAlgebra, g: &GroupPoint) -> Result<(GroupPoint, GroupPoint)> {
        alg.check_point(g)?;
        Ok(self.decompose_unchecked(alg, g))
    }

    pub fn decompose_unchecked(&self, alg: &HTypeAlgebra, g: &GroupPoint) -> (GroupPoint, GroupPoint) {
        let mut xm = vec![0.0; alg.m1()];
        let mut xh = vec![0.0; alg.m1()];
        for &i in &self.m_h {
            xm[i] = g.x[i];
        }
        for &i in &self.h_h {
            xh[i] = g.x[i];
        }
        let mut s = g.t.clone();
        alg.bracket_add(&xm, &xh, -0.5, &mut s);
        let mut tm = vec![0.0; alg.m2()];
        let mut th = vec![0.0; alg.m2()];
        for &a in &self.m_v {
            tm[a] = s[a];
        }
        for &a in &self.h_v {
            th[a] = s[a];
        }
        (GroupPoint::new(xm, tm), GroupPoint::new(xh, th))
    }

    /// Coordinates of an element of `M`: horizontal entries then central.
    pub fn m_coords(&self, m: &GroupPoint) -> Vec<f64> {
        self.m_h.iter().map(|&i| m.x[i]).chain(self.m_v.iter().map(|&a| m.t[a])).collect()
    }

    pub fn m_point(&self, alg: &HTypeAlgebra, c: &[f64]) -> GroupPoint {
        embed(alg, &self.m_h, &self.m_v, c)
    }

    pub fn h_coords(&self, h: &GroupPoint) -> Vec<f64> {
        self.h_h.iter().map(|&i| h.x[i]).chain(self.h_v.iter().map(|&a| h.t[a])).collect()
    }

    pub fn h_point(&self, alg: &HTypeAlgebra, c: &[f64]) -> GroupPoint {
        embed(alg, &self.h_h, &self.h_v, c)
    }

    /// Whether the `k`-th `M` coordinate is central.
    pub fn m_is_vertical(&self, k: usize) -> bool {
        k >= self.m_h.len()
    }

    pub fn h_is_vertical(&self, k: usize) -> bool {
        k >= self.h_h.len()
    }
}

fn embed(alg: &HTypeAlgebra, hor: &[usize], ver: &[usize], c: &[f64]) -> GroupPoint {
    let mut g = alg.identity();
    for (k, &i) in hor.iter().enumerate() {
        g.x[i] = c[k];
    }
    for (k, &a) in ver.iter().enumerate() {
        g.t[a] = c[hor.len() + k];
    }
    g
}

/// `|m| - beta |h|` for `q^{-1} p = m h`; non-positive exactly when `p` lies in
/// the cone `C(q, beta)`.
pub fn cone_margin(
    alg: &HTypeAlgebra,
    split: &HomogeneousSplit,
    norm: &HomogeneousNorm,
    vertex: &GroupPoint,
    beta: f64,
    p: &GroupPoint,
) -> f64 {
    let rel = alg.mul_unchecked(&alg.inverse(vertex), p);
    let (m, h) = split.decompose_unchecked(alg, &rel);
    norm.eval(&m.x, &m.t) - beta * norm.eval(&h.x, &h.t)
}

/// Membership of `p` in `C(q, beta) = q {m h : |m| <= beta |h|}`.
pub fn cone_contains(
    alg: &HTypeAlgebra,
    split: &HomogeneousSplit,
    norm: &HomogeneousNorm,
    vertex: &GroupPoint,
    beta: f64,
    p: &GroupPoint,
) -> Result<bool> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid("cone opening must be finite and non-negative"));
    }
    alg.check_point(vertex)?;
    alg.check_point(p)?;
    Ok(cone_margin(alg, split, norm, vertex, beta, p) <= 0.0)
}

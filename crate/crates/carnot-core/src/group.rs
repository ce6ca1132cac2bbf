use nalgebra::DMatrix;

use crate::algebra::HTypeAlgebra;
use crate::error::{check_len, Error, Result};
use crate::norm::{sq, HomogeneousNorm};

/// A group element in exponential coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupPoint {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
}

impl GroupPoint {
    pub fn new(x: Vec<f64>, t: Vec<f64>) -> Self {
        Self { x, t }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.x.clone();
        v.extend_from_slice(&self.t);
        v
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.t).all(|v| v.is_finite())
    }
}

impl HTypeAlgebra {
    pub fn identity(&self) -> GroupPoint {
        GroupPoint::new(vec![0.0; self.m1()], vec![0.0; self.m2()])
    }

    pub fn point(&self, x: Vec<f64>, t: Vec<f64>) -> Result<GroupPoint> {
        let g = GroupPoint::new(x, t);
        self.check_point(&g)?;
        Ok(g)
    }

    pub fn point_from_flat(&self, v: &[f64]) -> Result<GroupPoint> {
        check_len(self.dim(), v.len())?;
        self.point(v[..self.m1()].to_vec(), v[self.m1()..].to_vec())
    }

    pub fn check_point(&self, g: &GroupPoint) -> Result<()> {
        check_len(self.m1(), g.x.len())?;
        check_len(self.m2(), g.t.len())?;
        if !g.is_finite() {
            return Err(Error::invalid("non-finite coordinate"));
        }
        Ok(())
    }

    pub fn multiply(&self, a: &GroupPoint, b: &GroupPoint) -> Result<GroupPoint> {
        self.check_point(a)?;
        self.check_point(b)?;
        Ok(self.mul_unchecked(a, b))
    }

    /// Group product without dimension checks.
    pub fn mul_unchecked(&self, a: &GroupPoint, b: &GroupPoint) -> GroupPoint {
        let x = a.x.iter().zip(&b.x).map(|(p, q)| p + q).collect();
        let mut t: Vec<f64> = a.t.iter().zip(&b.t).map(|(p, q)| p + q).collect();
        self.bracket_add(&a.x, &b.x, 0.5, &mut t);
        GroupPoint::new(x, t)
    }

    pub fn inverse(&self, g: &GroupPoint) -> GroupPoint {
        GroupPoint::new(g.x.iter().map(|v| -v).collect(), g.t.iter().map(|v| -v).collect())
    }

    /// `delta_l(x, t) = (l x, l^2 t)`.
    pub fn dilate(&self, g: &GroupPoint, lambda: f64) -> Result<GroupPoint> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid("dilation factor must be positive"));
        }
        self.check_point(g)?;
        Ok(dilate_unchecked(g, lambda))
    }

    pub fn norm(&self, g: &GroupPoint, norm: &HomogeneousNorm) -> Result<f64> {
        self.check_point(g)?;
        Ok(norm.eval(&g.x, &g.t))
    }

    /// `d(a, b) = |b^{-1} a|`.
    pub fn distance(&self, a: &GroupPoint, b: &GroupPoint, norm: &HomogeneousNorm) -> Result<f64> {
        self.check_point(a)?;
        self.check_point(b)?;
        Ok(self.distance_unchecked(a, b, norm))
    }

    #[inline]
    pub fn distance_unchecked(&self, a: &GroupPoint, b: &GroupPoint, norm: &HomogeneousNorm) -> f64 {
        let x2: f64 = a.x.iter().zip(&b.x).map(|(p, q)| (p - q) * (p - q)).sum();
        let m2 = self.m2();
        let mut stack = [0.0f64; 8];
        let mut heap;
        let t: &mut [f64] = if m2 <= 8 {
            &mut stack[..m2]
        } else {
            heap = vec![0.0; m2];
            &mut heap
        };
        for (k, v) in t.iter_mut().enumerate() {
            *v = a.t[k] - b.t[k];
        }
        self.bracket_add(&b.x, &a.x, -0.5, t);
        norm.from_squares(x2, sq(t))
    }

    /// Left-invariant frame at `g` as columns `X_1..X_m1, T_1..T_m2`, with
    /// `X_i = d_i + 1/2 sum_a [x, e_i]_a d_{t_a}`.
    pub fn frame(&self, g: &GroupPoint) -> Result<DMatrix<f64>> {
        self.check_point(g)?;
        let (m1, m2) = (self.m1(), self.m2());
        let mut f = DMatrix::zeros(m1 + m2, m1 + m2);
        let mut e = vec![0.0; m1];
        for i in 0..m1 {
            f[(i, i)] = 1.0;
            e[i] = 1.0;
            let mut c = vec![0.0; m2];
            self.bracket_add(&g.x, &e, 0.5, &mut c);
            e[i] = 0.0;
            for a in 0..m2 {
                f[(m1 + a, i)] = c[a];
            }
        }
        for a in 0..m2 {
            f[(m1 + a, m1 + a)] = 1.0;
        }
        Ok(f)
    }

    /// Largest vertical component of the velocity of a sampled curve in the
    /// left-invariant frame, by central differences with parameter step `h`.
    pub fn horizontal_defect(&self, samples: &[GroupPoint], h: f64) -> Result<f64> {
        if samples.len() < 3 {
            return Err(Error::invalid("a curve needs at least three samples"));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid("parameter step must be positive"));
        }
        for s in samples {
            self.check_point(s)?;
        }
        let mut worst = 0.0f64;
        for w in samples.windows(3) {
            let (p, g, q) = (&w[0], &w[1], &w[2]);
            let vx: Vec<f64> = q.x.iter().zip(&p.x).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            let mut d: Vec<f64> = q.t.iter().zip(&p.t).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            self.bracket_add(&g.x, &vx, -0.5, &mut d);
            worst = worst.max(sq(&d).sqrt());
        }
        Ok(worst)
    }

    pub fn is_horizontal(&self, samples: &[GroupPoint], h: f64, tol: f64) -> Result<bool> {
        Ok(self.horizontal_defect(samples, h)? <= tol)
    }
}

pub(crate) fn dilate_unchecked(g: &GroupPoint, lambda: f64) -> GroupPoint {
    GroupPoint::new(
        g.x.iter().map(|v| lambda * v).collect(),
        g.t.iter().map(|v| lambda * lambda * v).collect(),
    )
}

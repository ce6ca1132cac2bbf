//! Test integrands with exact or low-dimensional formulas for their
//! integrals over linear subspaces and for radially weighted integrals.

use carnot_core::{Error, Result};
use gauss_quad::legendre::GaussLegendre;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::num::NonZeroUsize;

/// Measure of the unit sphere `S^(d-1)` in `R^d`.
pub fn sphere_area(d: usize) -> f64 {
    match d {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (d as f64 - 2.0) * sphere_area(d - 2),
    }
}

/// Composite Gauss-Legendre rule: `panels` equal panels of `nodes` points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub panels: usize,
    pub nodes: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { panels: 8, nodes: 16 }
    }
}

impl Quadrature {
    fn rule(&self) -> GaussLegendre {
        GaussLegendre::new(NonZeroUsize::new(self.nodes.max(1)).unwrap())
    }

    fn integrate(&self, rule: &GaussLegendre, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let panels = self.panels.max(1);
        let h = (b - a) / panels as f64;
        (0..panels).map(|i| rule.integrate(a + i as f64 * h, a + (i + 1) as f64 * h, &mut f)).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.panels == 0 || self.nodes == 0 {
            return Err(Error::invalid("quadrature needs at least one panel and one node"));
        }
        Ok(())
    }
}

/// Non-negative test function on `R^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Integrand {
    Zero,
    /// `exp(-|y - c|^2 / (2 sigma^2))`.
    Gauss { center: Vec<f64>, sigma: f64 },
    /// Indicator of `inner <= |y| <= outer`.
    Annulus { inner: f64, outer: f64 },
    /// `exp(-1 / (1 - |y - c|^2 / radius^2))` inside the ball, 0 outside.
    Bump { center: Vec<f64>, radius: f64 },
    /// Non-negative combination.
    Sum { terms: Vec<(f64, Integrand)> },
    /// `y -> inner(lambda y)`.
    Dilated { inner: Box<Integrand>, lambda: f64 },
    /// `y -> inner(Q y)` for an orthogonal `Q`, given by rows.
    Rotated { inner: Box<Integrand>, matrix: Vec<Vec<f64>> },
}

/// Gaussian tails beyond this many standard deviations are dropped from
/// quadrature ranges (relative size below `1e-31`).
const GAUSS_CUTOFF: f64 = 12.0;

enum Profile {
    Gauss(f64),
    Bump(f64),
}

impl Profile {
    /// Value at squared distance `s2` from the centre.
    fn at(&self, s2: f64) -> f64 {
        match *self {
            Profile::Gauss(sigma) => (-s2 / (2.0 * sigma * sigma)).exp(),
            Profile::Bump(rho) => {
                let q = s2 / (rho * rho);
                if q < 1.0 {
                    (-1.0 / (1.0 - q)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    fn reach(&self) -> f64 {
        match *self {
            Profile::Gauss(sigma) => GAUSS_CUTOFF * sigma,
            Profile::Bump(rho) => rho,
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

impl Integrand {
    pub fn gauss(center: Vec<f64>, sigma: f64) -> Self {
        Integrand::Gauss { center, sigma }
    }

    pub fn annulus(inner: f64, outer: f64) -> Self {
        Integrand::Annulus { inner, outer }
    }

    pub fn bump(center: Vec<f64>, radius: f64) -> Self {
        Integrand::Bump { center, radius }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let check_center = |c: &Vec<f64>| -> Result<()> {
            if c.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: c.len() });
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid("integrand centre must be finite"));
            }
            Ok(())
        };
        match self {
            Integrand::Zero => Ok(()),
            Integrand::Gauss { center, sigma } => {
                check_center(center)?;
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(Error::invalid("gaussian width must be positive and finite"));
                }
                Ok(())
            }
            Integrand::Annulus { inner, outer } => {
                if !outer.is_finite() {
                    return Err(Error::invalid("integrand support must be bounded"));
                }
                if !(*inner >= 0.0 && inner < outer) {
                    return Err(Error::invalid("annulus needs 0 <= inner < outer"));
                }
                Ok(())
            }
            Integrand::Bump { center, radius } => {
                check_center(center)?;
                if !radius.is_finite() {
                    return Err(Error::invalid("integrand support must be bounded"));
                }
                if *radius <= 0.0 {
                    return Err(Error::invalid("bump radius must be positive"));
                }
                Ok(())
            }
            Integrand::Sum { terms } => {
                for (c, f) in terms {
                    if !(c.is_finite() && *c >= 0.0) {
                        return Err(Error::invalid("integrand coefficients must be non-negative"));
                    }
                    f.validate(dim)?;
                }
                Ok(())
            }
            Integrand::Dilated { inner, lambda } => {
                if !(lambda.is_finite() && *lambda > 0.0) {
                    return Err(Error::invalid("dilation factor must be positive"));
                }
                inner.validate(dim)
            }
            Integrand::Rotated { inner, matrix } => {
                if matrix.len() != dim || matrix.iter().any(|r| r.len() != dim) {
                    return Err(Error::DimensionMismatch { expected: dim, got: matrix.len() });
                }
                let q = rotation(matrix);
                if (q.transpose() * &q - DMatrix::<f64>::identity(dim, dim)).amax() > 1e-9 {
                    return Err(Error::invalid("rotation matrix must be orthogonal"));
                }
                inner.validate(dim)
            }
        }
    }

    /// Radius of a centred ball containing the support (Gaussians: the
    /// quadrature cutoff).
    pub fn support_radius(&self) -> f64 {
        match self {
            Integrand::Zero => 0.0,
            Integrand::Gauss { center, sigma } => norm2(center).sqrt() + GAUSS_CUTOFF * sigma,
            Integrand::Annulus { outer, .. } => *outer,
            Integrand::Bump { center, radius } => norm2(center).sqrt() + radius,
            Integrand::Sum { terms } => terms.iter().map(|(_, f)| f.support_radius()).fold(0.0, f64::max),
            Integrand::Dilated { inner, lambda } => inner.support_radius() / lambda,
            Integrand::Rotated { inner, .. } => inner.support_radius(),
        }
    }

    fn centred(&self) -> Option<(&[f64], Profile)> {
        match self {
            Integrand::Gauss { center, sigma } => Some((center, Profile::Gauss(*sigma))),
            Integrand::Bump { center, radius } => Some((center, Profile::Bump(*radius))),
            _ => None,
        }
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        if let Some((c, prof)) = self.centred() {
            let s2: f64 = y.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
            return prof.at(s2);
        }
        match self {
            Integrand::Zero => 0.0,
            Integrand::Annulus { inner, outer } => {
                let r = norm2(y).sqrt();
                if *inner <= r && r <= *outer {
                    1.0
                } else {
                    0.0
                }
            }
            Integrand::Sum { terms } => terms.iter().map(|(c, f)| c * f.eval(y)).sum(),
            Integrand::Dilated { inner, lambda } => inner.eval(&y.iter().map(|v| v * lambda).collect::<Vec<_>>()),
            Integrand::Rotated { inner, matrix } => {
                let qy = rotation(matrix) * DVector::from_column_slice(y);
                inner.eval(qy.as_slice())
            }
            Integrand::Gauss { .. } | Integrand::Bump { .. } => unreachable!(),
        }
    }

    /// `int_V f dL^k` over the span of the orthonormal columns of `basis`
    /// (`k = 0` gives `f(0)`).
    pub fn subspace_integral(&self, basis: &DMatrix<f64>, quad: &Quadrature) -> f64 {
        let k = basis.ncols();
        if let Some((c, prof)) = self.centred() {
            let cv = DVector::from_column_slice(c);
            let along = basis.transpose() * &cv;
            let perp2 = (cv.norm_squared() - along.norm_squared()).max(0.0);
            if k == 0 {
                return prof.at(perp2);
            }
            return match prof {
                Profile::Gauss(sigma) => (2.0 * PI * sigma * sigma).powf(k as f64 / 2.0) * prof.at(perp2),
                Profile::Bump(rho) => {
                    let reach2 = rho * rho - perp2;
                    if reach2 <= 0.0 {
                        return 0.0;
                    }
                    let rule = quad.rule();
                    sphere_area(k) * quad.integrate(&rule, 0.0, reach2.sqrt(), |r| prof.at(r * r + perp2) * r.powi(k as i32 - 1))
                }
            };
        }
        match self {
            Integrand::Zero => 0.0,
            Integrand::Annulus { inner, outer } => {
                if k == 0 {
                    if *inner == 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    sphere_area(k) * (outer.powi(k as i32) - inner.powi(k as i32)) / k as f64
                }
            }
            Integrand::Sum { terms } => terms.iter().map(|(c, f)| c * f.subspace_integral(basis, quad)).sum(),
            Integrand::Dilated { inner, lambda } => lambda.powi(-(k as i32)) * inner.subspace_integral(basis, quad),
            Integrand::Rotated { inner, matrix } => inner.subspace_integral(&(rotation(matrix) * basis), quad),
            Integrand::Gauss { .. } | Integrand::Bump { .. } => unreachable!(),
        }
    }

    /// `int_{R^d} |y|^(k - d) f(y) dy` for `1 <= k <= d`, in polar form so the
    /// weight's singularity cancels against the volume element.
    pub fn weighted_integral(&self, d: usize, k: usize, quad: &Quadrature) -> f64 {
        assert!(k >= 1 && k <= d, "weight exponent out of range");
        if let Some((c, prof)) = self.centred() {
            let a = norm2(c).sqrt();
            let reach = prof.reach();
            let (r0, r1) = ((a - reach).max(0.0), a + reach);
            let rule = quad.rule();
            let rk = |r: f64| r.powi(k as i32 - 1);
            if a == 0.0 || d == 1 {
                // One-dimensional, or radial about the origin.
                return if d == 1 {
                    quad.integrate(&rule, 0.0, r1, |r| rk(r) * (prof.at((r - a) * (r - a)) + prof.at((r + a) * (r + a))))
                } else {
                    sphere_area(d) * quad.integrate(&rule, r0, r1, |r| rk(r) * prof.at(r * r))
                };
            }
            // |r theta - c|^2 = r^2 + a^2 - 2 r a cos(psi), psi the angle to c.
            let inner = |r: f64| -> f64 {
                let psi_max = match prof {
                    Profile::Gauss(_) => PI,
                    Profile::Bump(rho) => {
                        let cmin = (r * r + a * a - rho * rho) / (2.0 * r * a);
                        if cmin >= 1.0 {
                            return 0.0;
                        }
                        cmin.max(-1.0).acos()
                    }
                };
                quad.integrate(&rule, 0.0, psi_max, |psi| {
                    prof.at(r * r + a * a - 2.0 * r * a * psi.cos()) * psi.sin().powi(d as i32 - 2)
                })
            };
            return sphere_area(d - 1) * quad.integrate(&rule, r0, r1, |r| rk(r) * inner(r));
        }
        match self {
            Integrand::Zero => 0.0,
            Integrand::Annulus { inner, outer } => sphere_area(d) * (outer.powi(k as i32) - inner.powi(k as i32)) / k as f64,
            Integrand::Sum { terms } => terms.iter().map(|(c, f)| c * f.weighted_integral(d, k, quad)).sum(),
            Integrand::Dilated { inner, lambda } => lambda.powi(-(k as i32)) * inner.weighted_integral(d, k, quad),
            Integrand::Rotated { inner, .. } => inner.weighted_integral(d, k, quad),
            Integrand::Gauss { .. } | Integrand::Bump { .. } => unreachable!(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Integrand::Zero => "zero".into(),
            Integrand::Gauss { sigma, .. } => format!("gauss(sigma={sigma})"),
            Integrand::Annulus { inner, outer } => format!("annulus({inner},{outer})"),
            Integrand::Bump { radius, .. } => format!("bump(radius={radius})"),
            Integrand::Sum { terms } => {
                format!("sum({})", terms.iter().map(|(c, f)| format!("{c}*{}", f.label())).collect::<Vec<_>>().join("+"))
            }
            Integrand::Dilated { inner, lambda } => format!("{}∘δ{lambda}", inner.label()),
            Integrand::Rotated { inner, .. } => format!("{}∘Q", inner.label()),
        }
    }
}

fn rotation(rows: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows.len(), |i, j| rows[i][j])
}

/// Non-negative combination of products `g(x) h(t)` on `h_1 x h_2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Separable {
    pub terms: Vec<ProductTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductTerm {
    pub coef: f64,
    pub horizontal: Integrand,
    pub vertical: Integrand,
}

impl Separable {
    pub fn product(horizontal: Integrand, vertical: Integrand) -> Self {
        Separable { terms: vec![ProductTerm { coef: 1.0, horizontal, vertical }] }
    }

    pub fn validate(&self, m1: usize, m2: usize) -> Result<()> {
        for t in &self.terms {
            if !(t.coef.is_finite() && t.coef >= 0.0) {
                return Err(Error::invalid("integrand coefficients must be non-negative"));
            }
            t.horizontal.validate(m1)?;
            t.vertical.validate(m2)?;
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64], t: &[f64]) -> f64 {
        self.terms.iter().map(|p| p.coef * p.horizontal.eval(x) * p.vertical.eval(t)).sum()
    }

    pub fn subspace_integral(&self, h: &DMatrix<f64>, t: &DMatrix<f64>, quad: &Quadrature) -> f64 {
        self.terms
            .iter()
            .map(|p| p.coef * p.horizontal.subspace_integral(h, quad) * p.vertical.subspace_integral(t, quad))
            .sum()
    }

    /// `int |x|^(k_h - m1) |t|^(k_v - m2) f(x, t) dx dt`.
    pub fn weighted_integral(&self, m1: usize, k_h: usize, m2: usize, k_v: usize, quad: &Quadrature) -> f64 {
        self.terms
            .iter()
            .map(|p| p.coef * p.horizontal.weighted_integral(m1, k_h, quad) * p.vertical.weighted_integral(m2, k_v, quad))
            .sum()
    }

    pub fn label(&self) -> String {
        self.terms
            .iter()
            .map(|p| format!("{}*{}⊗{}", p.coef, p.horizontal.label(), p.vertical.label()))
            .collect::<Vec<_>>()
            .join("+")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert_eq!(sphere_area(1), 2.0);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn gauss_weighted_integral_matches_closed_form() {
        // k = d: plain integral (2 pi sigma^2)^(d/2), any centre.
        let q = Quadrature::default();
        for d in 1..5 {
            let f = Integrand::gauss((0..d).map(|i| 0.3 * i as f64 + 0.4).collect(), 0.7);
            let exact = (2.0 * PI * 0.49f64).powf(d as f64 / 2.0);
            assert!((f.weighted_integral(d, d, &q) / exact - 1.0).abs() < 1e-10, "{d}");
        }
        // Centred, k = 1, d = 3: int |y|^-2 e^{-|y|^2/2} = 4 pi sqrt(pi/2).
        let f = Integrand::gauss(vec![0.0; 3], 1.0);
        let exact = 4.0 * PI * (PI / 2.0).sqrt();
        assert!((f.weighted_integral(3, 1, &q) / exact - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gauss_subspace_integral_matches_grid() {
        let f = Integrand::gauss(vec![0.5, -0.2, 0.3], 0.6);
        let b = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.6, 0.8]);
        let h = 0.01;
        let mut grid = 0.0;
        for i in -600..600 {
            for j in -600..600 {
                let (u, v) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
                grid += f.eval(&[u, 0.6 * v, 0.8 * v]) * h * h;
            }
        }
        let exact = f.subspace_integral(&b, &Quadrature::default());
        assert!((grid / exact - 1.0).abs() < 1e-8, "{grid} {exact}");
    }

    #[test]
    fn bump_integrals_match_brute_force() {
        let f = Integrand::bump(vec![0.4, 0.3], 0.5);
        let q = Quadrature::default();
        let h = 0.0025;
        let (mut plain, mut weighted) = (0.0, 0.0);
        for i in -160..480 {
            for j in -240..400 {
                let (x, y) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
                let v = f.eval(&[x, y]) * h * h;
                plain += v;
                weighted += v / (x * x + y * y).sqrt();
            }
        }
        assert!((f.weighted_integral(2, 2, &q) / plain - 1.0).abs() < 1e-6);
        assert!((f.weighted_integral(2, 1, &q) / weighted - 1.0).abs() < 1e-5);
        let line = DMatrix::from_column_slice(2, 1, &[0.8, 0.6]);
        let mut direct = 0.0;
        for i in -2000..12000 {
            let s = (i as f64 + 0.5) * 1e-4;
            direct += f.eval(&[0.8 * s, 0.6 * s]) * 1e-4;
        }
        assert!((f.subspace_integral(&line, &q) / direct - 1.0).abs() < 1e-8);
        let miss = DMatrix::from_column_slice(2, 1, &[0.6, -0.8]);
        assert_eq!(f.subspace_integral(&miss, &q), 0.0);
    }

    #[test]
    fn annulus_closed_forms() {
        let f = Integrand::annulus(1.0, 2.0);
        let q = Quadrature::default();
        let line = DMatrix::from_column_slice(2, 1, &[0.6, 0.8]);
        assert_eq!(f.subspace_integral(&line, &q), 2.0);
        assert!((f.weighted_integral(2, 1, &q) - 2.0 * PI).abs() < 1e-14);
        assert_eq!(f.subspace_integral(&DMatrix::zeros(2, 0), &q), 0.0);
        assert_eq!(Integrand::annulus(0.0, 1.0).subspace_integral(&DMatrix::zeros(2, 0), &q), 1.0);
    }

    #[test]
    fn transforms_and_sums() {
        let q = Quadrature::default();
        let g = Integrand::gauss(vec![1.0, 0.0, 0.0], 0.5);
        let th: f64 = 0.7;
        let rot = vec![vec![th.cos(), -th.sin(), 0.0], vec![th.sin(), th.cos(), 0.0], vec![0.0, 0.0, 1.0]];
        let r = Integrand::Rotated { inner: Box::new(g.clone()), matrix: rot };
        r.validate(3).unwrap();
        let y = [0.3, -0.2, 0.5];
        let qy = [th.cos() * 0.3 + th.sin() * 0.2, th.sin() * 0.3 - th.cos() * 0.2, 0.5];
        assert!((r.eval(&y) - g.eval(&qy)).abs() < 1e-15);
        assert!((r.weighted_integral(3, 2, &q) - g.weighted_integral(3, 2, &q)).abs() < 1e-12);
        let dl = Integrand::Dilated { inner: Box::new(g.clone()), lambda: 2.0 };
        let plane = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let direct = Integrand::gauss(vec![0.5, 0.0, 0.0], 0.25).subspace_integral(&plane, &q);
        assert!((dl.subspace_integral(&plane, &q) / direct - 1.0).abs() < 1e-12);
        let s = Integrand::Sum { terms: vec![(2.0, g.clone()), (0.5, r.clone())] };
        let lin = 2.0 * g.subspace_integral(&plane, &q) + 0.5 * r.subspace_integral(&plane, &q);
        assert!((s.subspace_integral(&plane, &q) - lin).abs() < 1e-14);
    }

    #[test]
    fn validation() {
        assert!(Integrand::annulus(1.0, f64::INFINITY).validate(2).is_err());
        assert!(Integrand::annulus(2.0, 1.0).validate(2).is_err());
        assert!(Integrand::gauss(vec![0.0], 1.0).validate(2).is_err());
        assert!(Integrand::bump(vec![0.0, 0.0], 0.0).validate(2).is_err());
        let bad = Integrand::Sum { terms: vec![(-1.0, Integrand::Zero)] };
        assert!(bad.validate(2).is_err());
        let skew = Integrand::Rotated { inner: Box::new(Integrand::Zero), matrix: vec![vec![1.0, 1.0], vec![0.0, 1.0]] };
        assert!(skew.validate(2).is_err());
    }

    #[test]
    fn json_round_trip() {
        let f = Integrand::Sum { terms: vec![(1.0, Integrand::gauss(vec![0.0, 1.0], 0.5)), (2.0, Integrand::annulus(1.0, 2.0))] };
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<Integrand>(&s).unwrap(), f);
    }
}

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use carnot_core::{rng, Error, HTypeAlgebra, Result};
use gauss_quad::legendre::GaussLegendre;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::problem::{ModulusProblem, SparseRow};
use crate::solver::{solve_modulus_with, SolverOptions};

/// Emits the same family of measures at increasing resolution.
pub trait FamilyBuilder {
    fn build(&self, level: usize, p: f64) -> Result<ModulusProblem>;
}

impl<F: Fn(usize, f64) -> Result<ModulusProblem>> FamilyBuilder for F {
    fn build(&self, level: usize, p: f64) -> Result<ModulusProblem> {
        self(level, p)
    }
}

/// Radial segments across the annulus `inner < |z| < outer`, one per
/// angular column of a polar grid.
#[derive(Clone, Debug)]
pub struct Annulus {
    pub inner: f64,
    pub outer: f64,
    pub radial: usize,
    pub angular: usize,
}

impl Annulus {
    fn check(&self) -> Result<()> {
        if !(self.inner > 0.0 && self.outer > self.inner && self.outer.is_finite()) || self.radial == 0 || self.angular == 0 {
            return Err(Error::invalid("annulus needs 0 < inner < outer and a non-empty grid"));
        }
        Ok(())
    }

    fn edge(&self, i: usize) -> f64 {
        self.inner + (self.outer - self.inner) * i as f64 / self.radial as f64
    }

    /// Cells are indexed `column * radial + ring`.
    pub fn problem(&self, p: f64) -> Result<ModulusProblem> {
        self.check()?;
        let dth = 2.0 * PI / self.angular as f64;
        let dr = (self.outer - self.inner) / self.radial as f64;
        let mut centers = Vec::with_capacity(self.radial * self.angular);
        let mut masses = Vec::with_capacity(self.radial * self.angular);
        let mut rows = Vec::with_capacity(self.angular);
        for c in 0..self.angular {
            let th = (c as f64 + 0.5) * dth;
            for i in 0..self.radial {
                let (r0, r1) = (self.edge(i), self.edge(i + 1));
                let r = 0.5 * (r0 + r1);
                centers.push(vec![r * th.cos(), r * th.sin()]);
                masses.push(0.5 * (r1 * r1 - r0 * r0) * dth);
            }
            rows.push(SparseRow { idx: (c * self.radial..(c + 1) * self.radial).collect(), val: vec![dr; self.radial] });
        }
        ModulusProblem::new(centers, masses, rows, p)
    }

    /// Cell averages of `1 / (|z| ln(outer / inner))`.
    pub fn extremal_density(&self) -> Result<Vec<f64>> {
        self.check()?;
        let dr = (self.outer - self.inner) / self.radial as f64;
        let l = (self.outer / self.inner).ln();
        let col: Vec<f64> = (0..self.radial).map(|i| (self.edge(i + 1) / self.edge(i)).ln() / (dr * l)).collect();
        Ok((0..self.angular).flat_map(|_| col.iter().copied()).collect())
    }

    /// `2 pi / ln(outer / inner)` at `p = 2`.
    pub fn exact_p2(&self) -> f64 {
        2.0 * PI / (self.outer / self.inner).ln()
    }
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * PI / n as f64,
    }
}

/// Partition of the sphere `S^(n-1)` by central projection of a subdivided
/// cube: `2n` faces, each cut into `div^(n-1)` cells.
#[derive(Clone, Debug)]
struct CubeSphere {
    n: usize,
    div: usize,
    areas: Vec<f64>,
    centers: Vec<Vec<f64>>,
}

impl CubeSphere {
    fn new(n: usize, div: usize) -> Self {
        let per_face = div.pow(n as u32 - 1);
        let quad = GaussLegendre::new(NonZeroUsize::new(6).unwrap());
        let rule: Vec<(f64, f64)> = quad.iter().map(|(x, w)| (*x, *w)).collect();
        let h = 2.0 / div as f64;
        // Face cells share their areas up to symmetry; compute one face.
        let mut face_area = vec![0.0; per_face];
        let mut face_dir = vec![vec![0.0; n - 1]; per_face];
        for (c, area) in face_area.iter_mut().enumerate() {
            let lo: Vec<f64> = Self::multi(c, div, n - 1).iter().map(|&k| -1.0 + k as f64 * h).collect();
            face_dir[c] = lo.iter().map(|l| l + 0.5 * h).collect();
            let mut idx = vec![0usize; n - 1];
            loop {
                let mut w = 1.0;
                let mut r2 = 1.0;
                for d in 0..n - 1 {
                    let (x, wt) = rule[idx[d]];
                    let y = lo[d] + 0.5 * h * (x + 1.0);
                    r2 += y * y;
                    w *= 0.5 * h * wt;
                }
                // Jacobian of w -> (1, w) / |(1, w)|.
                *area += w * r2.powf(-0.5 * n as f64);
                let mut d = 0;
                while d < n - 1 {
                    idx[d] += 1;
                    if idx[d] < rule.len() {
                        break;
                    }
                    idx[d] = 0;
                    d += 1;
                }
                if d == n - 1 {
                    break;
                }
            }
        }
        let mut areas = Vec::with_capacity(2 * n * per_face);
        let mut centers = Vec::with_capacity(2 * n * per_face);
        for face in 0..2 * n {
            let (axis, sign) = (face / 2, if face % 2 == 0 { 1.0 } else { -1.0 });
            for c in 0..per_face {
                areas.push(face_area[c]);
                let mut u = Vec::with_capacity(n);
                let mut k = 0;
                for d in 0..n {
                    if d == axis {
                        u.push(sign);
                    } else {
                        u.push(face_dir[c][k]);
                        k += 1;
                    }
                }
                let l = u.iter().map(|v| v * v).sum::<f64>().sqrt();
                centers.push(u.iter().map(|v| v / l).collect());
            }
        }
        Self { n, div, areas, centers }
    }

    fn multi(mut c: usize, div: usize, len: usize) -> Vec<usize> {
        (0..len)
            .map(|_| {
                let k = c % div;
                c /= div;
                k
            })
            .collect()
    }

    fn len(&self) -> usize {
        self.areas.len()
    }

    fn cell_of(&self, u: &[f64]) -> usize {
        let axis = (0..self.n).max_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs())).unwrap();
        let face = 2 * axis + usize::from(u[axis] < 0.0);
        let s = u[axis].abs();
        let mut c = 0;
        let mut stride = 1;
        for d in (0..self.n).filter(|&d| d != axis) {
            let w = u[d] / s;
            let k = (((w + 1.0) * 0.5 * self.div as f64).floor() as isize).clamp(0, self.div as isize - 1) as usize;
            c += k * stride;
            stride *= self.div;
        }
        face * stride + c
    }
}

/// `k`-planes through the origin of `R^n`, each restricted to the unit ball
/// with its `k`-dimensional volume. The ambient ball is cut into a core of
/// radius `eps`, log-spaced shells from `eps` to 1 and cube-sphere direction
/// cells; refinement level `l` uses `eps = 2^(-base_octaves 2^l)`.
#[derive(Clone, Debug)]
pub struct PointFamily {
    n: usize,
    k: usize,
    sphere: CubeSphere,
    planes: Vec<DMatrix<f64>>,
    /// Per plane, its unit `(k-1)`-sphere measure in each direction cell.
    traces: Vec<Vec<(usize, f64)>>,
    pub base_octaves: usize,
    pub shells_per_octave: usize,
}

impl PointFamily {
    /// `planes` are `n x k` matrices with orthonormal columns; `k` is 1 or 2.
    pub fn new(planes: &[DMatrix<f64>], divisions: usize) -> Result<Self> {
        let first = planes.first().ok_or_else(|| Error::invalid("family needs at least one plane"))?;
        let (n, k) = first.shape();
        if planes.iter().any(|b| b.shape() != (n, k)) {
            return Err(Error::invalid("planes must share dimensions"));
        }
        if !(k == 1 || k == 2) || n < 2 || k >= n {
            return Err(Error::Unsupported(format!("{k}-planes in R^{n}; lines and 2-planes only")));
        }
        for b in planes {
            if (b.transpose() * b - DMatrix::identity(k, k)).amax() > 1e-9 {
                return Err(Error::invalid("plane bases must be orthonormal"));
            }
        }
        if divisions == 0 {
            return Err(Error::invalid("need at least one division per cube face"));
        }
        let sphere = CubeSphere::new(n, divisions);
        let samples = 720 * divisions;
        let traces = planes
            .iter()
            .map(|b| {
                let mut acc = vec![0.0; sphere.len()];
                if k == 1 {
                    let u: Vec<f64> = b.column(0).iter().copied().collect();
                    acc[sphere.cell_of(&u)] += 1.0;
                    acc[sphere.cell_of(&u.iter().map(|v| -v).collect::<Vec<_>>())] += 1.0;
                } else {
                    let dl = 2.0 * PI / samples as f64;
                    for s in 0..samples {
                        let th = (s as f64 + 0.5) * dl;
                        let u: Vec<f64> = (0..n).map(|d| th.cos() * b[(d, 0)] + th.sin() * b[(d, 1)]).collect();
                        acc[sphere.cell_of(&u)] += dl;
                    }
                }
                acc.into_iter().enumerate().filter(|(_, v)| *v > 0.0).collect()
            })
            .collect();
        Ok(Self { n, k, sphere, planes: planes.to_vec(), traces, base_octaves: 8, shells_per_octave: 1 })
    }

    /// `count` lines of `R^2` at evenly spaced angles.
    pub fn lines_in_plane(count: usize, divisions: usize) -> Result<Self> {
        let planes: Vec<DMatrix<f64>> = (0..count)
            .map(|j| {
                let th = (j as f64 + 0.5) * PI / count as f64;
                DMatrix::from_column_slice(2, 1, &[th.cos(), th.sin()])
            })
            .collect();
        Self::new(&planes, divisions)
    }

    /// Random horizontal `k`-planes of the first layer: each new basis vector
    /// is orthogonal to the previous ones and to their images under every
    /// `J_a`, so all brackets between them vanish.
    pub fn horizontal_planes(alg: &HTypeAlgebra, k: usize, count: usize, seed: u64, divisions: usize) -> Result<Self> {
        if k * (1 + alg.m2()) > alg.m1() {
            return Err(Error::invalid(format!("no horizontal {k}-planes in a layer of dimension {}", alg.m1())));
        }
        let mut g = rng::seeded(seed);
        let n = alg.m1();
        let mut planes = Vec::with_capacity(count);
        for _ in 0..count {
            let mut basis: Vec<Vec<f64>> = Vec::new();
            let mut avoid: Vec<Vec<f64>> = Vec::new();
            while basis.len() < k {
                let mut v = rng::normal_vec(&mut g, n);
                for a in &avoid {
                    let d: f64 = v.iter().zip(a).map(|(x, y)| x * y).sum();
                    v.iter_mut().zip(a).for_each(|(x, y)| *x -= d * y);
                }
                let l = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if l < 1e-8 {
                    continue;
                }
                v.iter_mut().for_each(|x| *x /= l);
                let mut extra = vec![v.clone()];
                for j in alg.j_maps() {
                    extra.push((j * nalgebra::DVector::from_column_slice(&v)).as_slice().to_vec());
                }
                for mut e in extra {
                    for a in &avoid {
                        let d: f64 = e.iter().zip(a).map(|(x, y)| x * y).sum();
                        e.iter_mut().zip(a).for_each(|(x, y)| *x -= d * y);
                    }
                    let l = e.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if l > 1e-8 {
                        avoid.push(e.iter().map(|x| x / l).collect());
                    }
                }
                basis.push(v);
            }
            planes.push(DMatrix::from_iterator(n, k, basis.into_iter().flatten()));
        }
        Self::new(&planes, divisions)
    }

    pub fn planes(&self) -> &[DMatrix<f64>] {
        &self.planes
    }

    /// Octaves between the core radius and 1 at `level`.
    pub fn octaves(&self, level: usize) -> usize {
        self.base_octaves << level
    }
}

impl FamilyBuilder for PointFamily {
    fn build(&self, level: usize, p: f64) -> Result<ModulusProblem> {
        if self.base_octaves == 0 || self.shells_per_octave == 0 {
            return Err(Error::invalid("need at least one octave and one shell per octave"));
        }
        let oct = self.octaves(level);
        if oct > 512 {
            return Err(Error::invalid("core radius underflows"));
        }
        let shells = oct * self.shells_per_octave;
        let (n, k) = (self.n as i32, self.k as i32);
        let radius = |s: usize| (-(oct as f64) * (1.0 - s as f64 / shells as f64) * 2f64.ln()).exp();
        let eps = radius(0);
        let dirs = self.sphere.len();
        let mut centers = Vec::with_capacity(1 + shells * dirs);
        let mut masses = Vec::with_capacity(1 + shells * dirs);
        centers.push(vec![0.0; self.n]);
        masses.push(unit_ball_volume(self.n) * eps.powi(n));
        let mut radial_k = Vec::with_capacity(shells);
        for s in 0..shells {
            let (r0, r1) = (radius(s), radius(s + 1));
            let rm = 0.5 * (r0 + r1);
            let vol_n = r1.powi(n) * (1.0 - (r0 / r1).powi(n)) / n as f64;
            radial_k.push(r1.powi(k) * (1.0 - (r0 / r1).powi(k)) / k as f64);
            for d in 0..dirs {
                centers.push(self.sphere.centers[d].iter().map(|u| rm * u).collect());
                masses.push(vol_n * self.sphere.areas[d]);
            }
        }
        let core_k = unit_ball_volume(self.k) * eps.powi(k);
        let rows = self
            .traces
            .iter()
            .map(|tr| {
                let mut row = SparseRow { idx: vec![0], val: vec![core_k] };
                for (s, rk) in radial_k.iter().enumerate() {
                    for &(d, len) in tr {
                        row.idx.push(1 + s * dirs + d);
                        row.val.push(rk * len);
                    }
                }
                row
            })
            .collect();
        ModulusProblem::new(centers, masses, rows, p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Exceptionality {
    /// The modulus keeps shrinking under refinement.
    Exceptional,
    /// The modulus settles at a positive value.
    Bounded,
    /// Some measure is empty, so the modulus is `+inf`.
    Infinite,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyOptions {
    pub refinements: usize,
    /// Values below this count as vanished.
    pub floor: f64,
    /// Every successive ratio at most this means decay.
    pub decay_ratio: f64,
    /// `(max - min) / min` below this means bounded.
    pub band: f64,
    pub solver: SolverOptions,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self { refinements: 3, floor: 1e-12, decay_ratio: 0.7, band: 0.2, solver: SolverOptions::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RefinementStudy {
    pub p: f64,
    pub values: Vec<f64>,
    /// `values[l + 1] / values[l]`.
    pub ratios: Vec<f64>,
    pub kkt_residuals: Vec<f64>,
    pub infinite: Vec<bool>,
    pub verdict: Exceptionality,
}

pub fn fuglede_refinement_study(builder: &dyn FamilyBuilder, p: f64, opts: &StudyOptions) -> Result<RefinementStudy> {
    if opts.refinements == 0 {
        return Err(Error::invalid("need at least one refinement"));
    }
    let mut values = Vec::new();
    let mut kkt_residuals = Vec::new();
    let mut infinite = Vec::new();
    for level in 0..=opts.refinements {
        let sol = solve_modulus_with(&builder.build(level, p)?, &opts.solver)?;
        if !sol.converged {
            return Err(Error::numerical(format!("solver stalled at level {level}, KKT residual {:e}", sol.kkt_residual)));
        }
        values.push(sol.value);
        kkt_residuals.push(sol.kkt_residual);
        infinite.push(sol.infinite);
    }
    let ratios: Vec<f64> = values.windows(2).map(|w| w[1] / w[0]).collect();
    let verdict = if infinite.iter().any(|b| *b) {
        Exceptionality::Infinite
    } else if ratios.iter().all(|r| *r <= opts.decay_ratio) || *values.last().unwrap() < opts.floor {
        Exceptionality::Exceptional
    } else {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(0.0, f64::max);
        if lo > 0.0 && (hi - lo) / lo < opts.band {
            Exceptionality::Bounded
        } else {
            Exceptionality::Inconclusive
        }
    };
    Ok(RefinementStudy { p, values, ratios, kkt_residuals, infinite, verdict })
}

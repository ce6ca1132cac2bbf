use carnot_core::{Error, GroupPoint, HTypeAlgebra, HomogeneousNorm, Result};
use serde::{Deserialize, Serialize};
use splits_graphs::HomogeneousSplit;

/// Centres `xi_i` of balls `B(xi_i, r)` covering a cube, with the
/// `B(xi_i, r/5)` pairwise disjoint. The order fixes the weights `2^-i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VitaliCover {
    pub r: f64,
    pub centers: Vec<Vec<f64>>,
}

/// Cap on the number of lattice centres.
const MAX_CENTERS: usize = 1 << 20;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Smooth step: 1 on `[0, 2r]`, 0 from `3r` on.
fn cutoff(rho: f64, r: f64) -> f64 {
    let e = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let s = (rho - 2.0 * r) / r;
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        e(1.0 - s) / (e(1.0 - s) + e(s))
    }
}

impl VitaliCover {
    pub fn new(r: f64, centers: Vec<Vec<f64>>) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::invalid("cover radius must be positive and finite"));
        }
        let d = centers.first().map_or(0, |c| c.len());
        if centers.is_empty() || centers.iter().any(|c| c.len() != d || c.iter().any(|v| !v.is_finite())) {
            return Err(Error::invalid("cover centres must be finite points of one dimension"));
        }
        for (i, a) in centers.iter().enumerate() {
            if centers[..i].iter().any(|b| dist(a, b) < 0.4 * r * (1.0 - 1e-12)) {
                return Err(Error::invalid("cover centres closer than 2r/5"));
            }
        }
        Ok(Self { r, centers })
    }

    /// Cubic lattice in `[-extent, extent]^dim` whose spacing keeps the
    /// covering radius below `r` and the spacing at least `2r/5`. Centres are
    /// ordered by distance from the origin, then lexicographically.
    pub fn lattice(dim: usize, r: f64, extent: f64) -> Result<Self> {
        if dim == 0 || dim > 20 {
            return Err(Error::invalid("lattice covers need dimension 1..=20"));
        }
        if !(extent >= 0.0 && extent.is_finite() && r > 0.0) {
            return Err(Error::invalid("cover extent must be finite and r positive"));
        }
        let s = r * (1.8 / (dim as f64).sqrt()).min(1.0);
        let k = (extent / s).ceil() as usize;
        let side = 2 * k + 1;
        if (side as f64).powi(dim as i32) > MAX_CENTERS as f64 {
            return Err(Error::invalid("cover would need too many centres"));
        }
        let mut centers = Vec::with_capacity(side.pow(dim as u32));
        let mut idx = vec![0usize; dim];
        loop {
            centers.push(idx.iter().map(|&i| (i as f64 - k as f64) * s).collect::<Vec<f64>>());
            let mut d = 0;
            while d < dim {
                idx[d] += 1;
                if idx[d] < side {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == dim {
                break;
            }
        }
        let norm2 = |c: &Vec<f64>| c.iter().map(|v| v * v).sum::<f64>();
        centers.sort_by(|a, b| norm2(a).total_cmp(&norm2(b)).then_with(|| a.partial_cmp(b).unwrap()));
        Ok(Self { r, centers })
    }

    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }

    /// `sum_i 2^-i |xi_i - z|^-1 psi(xi_i - z)`, `i` counted from 1.
    pub fn phi(&self, z: &[f64]) -> f64 {
        let mut w = 1.0;
        let mut sum = 0.0;
        for c in &self.centers {
            w *= 0.5;
            let d = dist(c, z);
            if d == 0.0 {
                return f64::INFINITY;
            }
            if d < 3.0 * self.r {
                sum += w * cutoff(d, self.r) / d;
            }
        }
        sum
    }

    pub fn nearest(&self, z: &[f64]) -> f64 {
        self.centers.iter().map(|c| dist(c, z)).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type")]
pub enum WitnessKind {
    /// `|g|^-d_m` in the unit ball.
    RadialPow { d_m: f64 },
    /// `|g|^-d_m ln(2/|g|)^-alpha` in the unit ball.
    RadialLog { d_m: f64, alpha: f64 },
    /// `phi_r` of the flat coordinates.
    VitaliPhi(VitaliCover),
    /// Sum over splits of `phi_r` of the `M`-coordinates of `P_M(g)`.
    SplitComposite { parts: Vec<(HomogeneousSplit, VitaliCover)> },
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessFunction {
    pub kind: WitnessKind,
    pub norm: HomogeneousNorm,
}

impl WitnessFunction {
    /// Checks the witness against the algebra and rebuilds the splits.
    pub fn new(alg: &HTypeAlgebra, kind: WitnessKind, norm: HomogeneousNorm) -> Result<Self> {
        norm.validate()?;
        let kind = match kind {
            WitnessKind::RadialPow { d_m } | WitnessKind::RadialLog { d_m, .. } if !(d_m > 0.0 && d_m.is_finite()) => {
                return Err(Error::invalid("d_m must be positive and finite"));
            }
            WitnessKind::RadialLog { alpha, .. } if !(alpha > 0.0 && alpha.is_finite()) => {
                return Err(Error::invalid("alpha must be positive and finite"));
            }
            WitnessKind::VitaliPhi(c) => {
                if c.dim() != alg.dim() {
                    return Err(Error::DimensionMismatch { expected: alg.dim(), got: c.dim() });
                }
                WitnessKind::VitaliPhi(c)
            }
            WitnessKind::SplitComposite { parts } => {
                if parts.is_empty() {
                    return Err(Error::invalid("composite witness needs at least one split"));
                }
                let mut out = Vec::with_capacity(parts.len());
                for (s, c) in parts {
                    let s = s.validated(alg)?;
                    if c.dim() != s.d_t() {
                        return Err(Error::DimensionMismatch { expected: s.d_t(), got: c.dim() });
                    }
                    out.push((s, c));
                }
                WitnessKind::SplitComposite { parts: out }
            }
            k => k,
        };
        if matches!(kind, WitnessKind::RadialPow { .. } | WitnessKind::RadialLog { .. })
            && !norm.is_homogeneous()
            && alg.m2() > 0
        {
            return Err(Error::invalid("radial witnesses need a homogeneous norm on a non-abelian group"));
        }
        Ok(Self { kind, norm })
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.kind, WitnessKind::RadialPow { .. } | WitnessKind::RadialLog { .. })
    }

    /// `ln F` as a function of `ln |g|` for the radial kinds; `-inf` outside
    /// the unit ball.
    pub fn radial_ln(&self, ln_r: f64) -> Option<f64> {
        let outside = ln_r >= 0.0;
        match self.kind {
            WitnessKind::RadialPow { d_m } => Some(if outside { f64::NEG_INFINITY } else { -d_m * ln_r }),
            WitnessKind::RadialLog { d_m, alpha } => Some(if outside {
                f64::NEG_INFINITY
            } else {
                -d_m * ln_r - alpha * (std::f64::consts::LN_2 - ln_r).ln()
            }),
            _ => None,
        }
    }

    pub fn eval(&self, alg: &HTypeAlgebra, g: &GroupPoint) -> Result<f64> {
        alg.check_point(g)?;
        Ok(self.eval_unchecked(alg, g))
    }

    pub fn eval_unchecked(&self, alg: &HTypeAlgebra, g: &GroupPoint) -> f64 {
        match &self.kind {
            WitnessKind::RadialPow { .. } | WitnessKind::RadialLog { .. } => {
                let r = self.norm.eval(&g.x, &g.t);
                if r == 0.0 {
                    f64::INFINITY
                } else {
                    self.radial_ln(r.ln()).unwrap().exp()
                }
            }
            WitnessKind::VitaliPhi(c) => c.phi(&g.to_flat()),
            WitnessKind::SplitComposite { parts } => parts
                .iter()
                .map(|(s, c)| {
                    let (m, _) = s.decompose_unchecked(alg, g);
                    c.phi(&s.m_coords(&m))
                })
                .sum(),
        }
    }

    /// Distance to the singular set in the coordinates where it lives.
    pub fn singular_distance(&self, alg: &HTypeAlgebra, g: &GroupPoint) -> f64 {
        match &self.kind {
            WitnessKind::RadialPow { .. } | WitnessKind::RadialLog { .. } => self.norm.eval(&g.x, &g.t),
            WitnessKind::VitaliPhi(c) => c.nearest(&g.to_flat()),
            WitnessKind::SplitComposite { parts } => parts
                .iter()
                .map(|(s, c)| c.nearest(&s.m_coords(&s.decompose_unchecked(alg, g).0)))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

pub fn eval_witness(alg: &HTypeAlgebra, w: &WitnessFunction, g: &GroupPoint) -> Result<f64> {
    w.eval(alg, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h1() -> HTypeAlgebra {
        HTypeAlgebra::real_heisenberg(1).unwrap()
    }

    #[test]
    fn radial_values() {
        let alg = h1();
        let w = WitnessFunction::new(&alg, WitnessKind::RadialPow { d_m: 1.0 }, HomogeneousNorm::default()).unwrap();
        let g = alg.point(vec![0.5, 0.0], vec![0.0]).unwrap();
        assert!((w.eval(&alg, &g).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(w.eval(&alg, &alg.point(vec![1.0, 0.0], vec![0.0]).unwrap()).unwrap(), 0.0);
        assert_eq!(w.eval(&alg, &alg.point(vec![0.0, 0.0], vec![4.0]).unwrap()).unwrap(), 0.0);
        assert!(w.eval(&alg, &alg.identity()).unwrap().is_infinite());
        let w = WitnessFunction::new(&alg, WitnessKind::RadialLog { d_m: 2.0, alpha: 1.5 }, HomogeneousNorm::default()).unwrap();
        let v = w.eval(&alg, &alg.point(vec![0.0, 0.0], vec![0.25]).unwrap()).unwrap();
        assert!((v - 4.0 * 4f64.ln().powf(-1.5)).abs() < 1e-12);
    }

    #[test]
    fn structural_errors() {
        let alg = h1();
        assert!(WitnessFunction::new(&alg, WitnessKind::RadialPow { d_m: 1.0 }, HomogeneousNorm::Euclidean).is_err());
        assert!(WitnessFunction::new(&alg, WitnessKind::RadialPow { d_m: 0.0 }, HomogeneousNorm::default()).is_err());
        let bad = HomogeneousNorm::MaxHomog { eps1: -1.0, eps2: 1.0 };
        assert!(WitnessFunction::new(&alg, WitnessKind::RadialPow { d_m: 1.0 }, bad).is_err());
        let c = VitaliCover::lattice(2, 0.5, 1.0).unwrap();
        assert!(WitnessFunction::new(&alg, WitnessKind::VitaliPhi(c.clone()), HomogeneousNorm::default()).is_err());
        let s = HomogeneousSplit::new(&alg, vec![0], vec![0]).unwrap();
        assert!(WitnessFunction::new(&alg, WitnessKind::SplitComposite { parts: vec![(s, c)] }, HomogeneousNorm::default()).is_ok());
        let abelian = HTypeAlgebra::abelian(2).unwrap();
        assert!(WitnessFunction::new(&abelian, WitnessKind::RadialPow { d_m: 1.0 }, HomogeneousNorm::Euclidean).is_ok());
    }

    #[test]
    fn vitali_lattice_covers_and_separates() {
        for dim in [1, 2, 3, 5] {
            let c = VitaliCover::lattice(dim, 0.3, 0.7).unwrap();
            VitaliCover::new(c.r, c.centers.clone()).unwrap();
            // Every point of the cube lies within r of a centre.
            let probe = vec![0.7; dim];
            assert!(c.nearest(&probe) < 0.3, "{dim}");
            let n2 = |v: &Vec<f64>| v.iter().map(|x| x * x).sum::<f64>();
            assert!(c.centers.windows(2).all(|w| n2(&w[0]) <= n2(&w[1])));
        }
        assert!(VitaliCover::new(1.0, vec![vec![0.0], vec![0.3]]).is_err());
        assert!(VitaliCover::lattice(21, 1.0, 1.0).is_err());
    }

    #[test]
    fn phi_is_singular_at_centres_and_vanishes_far_away() {
        let c = VitaliCover::lattice(2, 0.5, 1.0).unwrap();
        for xi in &c.centers {
            assert!(c.phi(xi).is_infinite());
        }
        assert_eq!(c.phi(&[10.0, 10.0]), 0.0);
        let v = c.phi(&[0.1, 0.05]);
        assert!(v.is_finite() && v > 0.0);
        assert_eq!(cutoff(0.5, 0.25), 1.0);
        assert_eq!(cutoff(0.75, 0.25), 0.0);
        assert!((cutoff(0.625, 0.25) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn composite_reads_m_coordinates() {
        let alg = h1();
        let s = HomogeneousSplit::new(&alg, vec![0], vec![0]).unwrap();
        let c = VitaliCover::new(1.0, vec![vec![0.0, 0.0]]).unwrap();
        let w = WitnessFunction::new(&alg, WitnessKind::SplitComposite { parts: vec![(s, c)] }, HomogeneousNorm::default()).unwrap();
        // The coset through the origin along H = {Y} is singular.
        assert!(w.eval(&alg, &alg.point(vec![0.0, 0.7], vec![0.0]).unwrap()).unwrap().is_infinite());
        let g = alg.point(vec![0.5, 0.0], vec![0.0]).unwrap();
        assert!((w.eval(&alg, &g).unwrap() - 1.0).abs() < 1e-12);
    }
}

//! Randomised algebraic self-test of a group and norm.

use serde::Serialize;

use crate::algebra::{AlgebraKind, HTypeAlgebra};
use crate::group::{dilate_unchecked, GroupPoint};
use crate::norm::HomogeneousNorm;
use crate::rng;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelfTestReport {
    pub checks: Vec<Check>,
    /// Largest observed `|ab| / (|a| + |b|)`.
    pub quasi_triangle_constant: f64,
    /// Sign `s` in `J_1 J_2 J_3 = s I`, for three-dimensional centres.
    pub triple_product_sign: Option<f64>,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn max_diff(a: &GroupPoint, b: &GroupPoint) -> f64 {
    a.x.iter().zip(&b.x).chain(a.t.iter().zip(&b.t)).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

fn scale(g: &GroupPoint) -> f64 {
    1.0 + g.x.iter().chain(&g.t).map(|v| v.abs()).fold(0.0, f64::max).powi(2)
}

pub fn run(alg: &HTypeAlgebra, norm: &HomogeneousNorm, samples: usize, seed: u64) -> SelfTestReport {
    const TOL: f64 = 1e-12;
    let mut rng = rng::seeded(seed);
    let random_point = |rng: &mut rng::Rng| GroupPoint::new(rng::normal_vec(rng, alg.m1()), rng::normal_vec(rng, alg.m2()));
    let e = alg.identity();
    let mut err = [0.0f64; 6];
    let mut qt = 0.0f64;
    for _ in 0..samples {
        let a = random_point(&mut rng);
        let b = random_point(&mut rng);
        let c = random_point(&mut rng);
        let s = scale(&a) * scale(&b) * scale(&c);
        err[0] = err[0].max(max_diff(&alg.mul_unchecked(&e, &a), &a)).max(max_diff(&alg.mul_unchecked(&a, &e), &a));
        let l = alg.mul_unchecked(&alg.mul_unchecked(&a, &b), &c);
        let r = alg.mul_unchecked(&a, &alg.mul_unchecked(&b, &c));
        err[1] = err[1].max(max_diff(&l, &r) / s);
        err[2] = err[2].max(max_diff(&alg.mul_unchecked(&a, &alg.inverse(&a)), &e) / s);
        let lam = 0.25 + 4.0 * rng::uniform(&mut rng);
        let dl = dilate_unchecked(&alg.mul_unchecked(&a, &b), lam);
        let dr = alg.mul_unchecked(&dilate_unchecked(&a, lam), &dilate_unchecked(&b, lam));
        err[3] = err[3].max(max_diff(&dl, &dr) / (s * lam * lam));
        let d0 = alg.distance_unchecked(&a, &b, norm);
        let d1 = alg.distance_unchecked(&alg.mul_unchecked(&c, &a), &alg.mul_unchecked(&c, &b), norm);
        err[4] = err[4].max((d0 - d1).abs() / s);
        if norm.is_homogeneous() {
            let n0 = norm.eval(&a.x, &a.t);
            let da = dilate_unchecked(&a, lam);
            err[5] = err[5].max((norm.eval(&da.x, &da.t) - lam * n0).abs() / (s * lam));
        }
        let ab = alg.mul_unchecked(&a, &b);
        let denom = norm.eval(&a.x, &a.t) + norm.eval(&b.x, &b.t);
        if denom > 0.0 {
            qt = qt.max(norm.eval(&ab.x, &ab.t) / denom);
        }
    }
    let names = [
        "identity",
        "associativity",
        "inverse",
        "dilation_homomorphism",
        "left_invariant_distance",
        "norm_homogeneity",
    ];
    let mut checks: Vec<Check> = names
        .iter()
        .zip(err)
        .map(|(n, e)| Check { name: n.to_string(), max_error: e, tolerance: TOL, passed: e <= TOL })
        .collect();
    checks.push(Check {
        name: "quasi_triangle_constant".into(),
        max_error: qt,
        tolerance: 2.0,
        passed: qt <= 2.0,
    });
    if alg.kind() != AlgebraKind::GenericStep2 {
        let d = alg.h_type_defect();
        checks.push(Check { name: "h_type_relations".into(), max_error: d, tolerance: TOL, passed: d <= TOL });
    }
    let fd = frame_bracket_defect(alg, &mut rng, samples.clamp(1, 16));
    checks.push(Check { name: "frame_brackets".into(), max_error: fd, tolerance: 1e-6, passed: fd <= 1e-6 });
    let triple = (alg.m2() == 3).then(|| {
        let p = alg.j_map(0) * alg.j_map(1) * alg.j_map(2);
        p[(0, 0)].signum()
    });
    SelfTestReport { checks, quasi_triangle_constant: qt, triple_product_sign: triple }
}

/// Compares the Lie bracket of frame fields, `DY.X - DX.Y` by central
/// differences, with the structure constants.
fn frame_bracket_defect(alg: &HTypeAlgebra, rng: &mut rng::Rng, samples: usize) -> f64 {
    let (m1, dim) = (alg.m1(), alg.dim());
    let h = 1e-4;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let g = GroupPoint::new(rng::normal_vec(rng, m1), rng::normal_vec(rng, alg.m2()));
        let f0 = alg.frame(&g).expect("valid point");
        // Directional derivative of the frame field along v.
        let deriv = |v: &[f64]| {
            let shift = |s: f64| {
                let x = g.x.iter().zip(v).map(|(a, b)| a + s * b).collect();
                let t = g.t.iter().zip(&v[m1..]).map(|(a, b)| a + s * b).collect();
                alg.frame(&GroupPoint::new(x, t)).expect("valid point")
            };
            (shift(h) - shift(-h)) / (2.0 * h)
        };
        for i in 0..m1 {
            let di = deriv(f0.column(i).as_slice());
            for j in (i + 1)..m1 {
                let dj = deriv(f0.column(j).as_slice());
                let br = di.column(j) - dj.column(i);
                let mut ei = vec![0.0; m1];
                let mut ej = vec![0.0; m1];
                ei[i] = 1.0;
                ej[j] = 1.0;
                let c = alg.bracket(&ei, &ej).expect("dims");
                for k in 0..dim {
                    let expect = if k >= m1 { c[k - m1] } else { 0.0 };
                    worst = worst.max((br[k] - expect).abs());
                }
            }
        }
    }
    worst
}

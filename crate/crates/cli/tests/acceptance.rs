//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use carnot_core::rng::{normal_vec, seeded};
use carnot_core::{selftest, GroupPoint, HTypeAlgebra, HomogeneousNorm};
use crofton::{euclidean_crofton, htype_crofton_horizontal, htype_crofton_vertical, CroftonOptions, CroftonReport, Integrand, Separable};
use grassmann::{
    haar_orthogonal, haar_symplectic_quaternion, haar_unitary, reference_subalgebra, sample_grassmannian, sample_isometry_with,
};
use measures::{box_dimension, coset_fubini, FubiniBox};
use modulus::{
    fuglede_refinement_study, lp_norm_estimate, solve_modulus, surface_divergence_check, Annulus, LpGrid, PointFamily,
    RefinementStudy, RingThresholds, StudyOptions, Thresholds, Trend, WitnessFunction, WitnessKind,
};
use splits_graphs::{ahlfors_profile, c0_estimate, GraphGrid, GraphMap, HomogeneousSplit, IntrinsicGraph};

type Outcome = Result<String, String>;

/// Name, runtime limit in seconds, check.
type Criterion = (&'static str, Option<u64>, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn algebras() -> Vec<(&'static str, HTypeAlgebra)> {
    vec![
        ("hR", HTypeAlgebra::real_heisenberg(1).unwrap()),
        ("hC", HTypeAlgebra::complex_heisenberg(1).unwrap()),
        ("hQ", HTypeAlgebra::quaternion_heisenberg(1).unwrap()),
    ]
}

/// Nonzero brackets `[e_i, e_j] = sign e_a` with `i < j`.
fn table(name: &str) -> Vec<(usize, usize, usize, f64)> {
    match name {
        "hR" => vec![(0, 1, 0, 1.0)],
        "hC" => vec![(0, 1, 0, 1.0), (2, 3, 0, -1.0), (0, 2, 1, 1.0), (1, 3, 1, 1.0)],
        _ => vec![(0, 1, 0, 1.0), (2, 3, 0, -1.0), (0, 2, 1, 1.0), (1, 3, 1, 1.0), (0, 3, 2, 1.0), (1, 2, 2, -1.0)],
    }
}

fn unit(m: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; m];
    e[i] = 1.0;
    e
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn self_test() -> Outcome {
    let mut worst = 0.0f64;
    for (name, alg) in algebras() {
        let (m1, m2) = (alg.m1(), alg.m2());
        let expected = table(name);
        for i in 0..m1 {
            for j in 0..m1 {
                let got = ok(alg.bracket(&unit(m1, i), &unit(m1, j)))?;
                let mut want = vec![0.0; m2];
                for &(p, q, a, s) in &expected {
                    if (p, q) == (i, j) {
                        want[a] = s;
                    } else if (q, p) == (i, j) {
                        want[a] = -s;
                    }
                }
                ensure!(got == want, "{name}: [e{i}, e{j}] = {got:?}, expected {want:?}");
            }
        }
        let mut rng = seeded(7);
        for _ in 0..1000 {
            let (u, v, z) = (normal_vec(&mut rng, m1), normal_vec(&mut rng, m1), normal_vec(&mut rng, m2));
            let jz = alg.j_maps().iter().zip(&z).fold(nalgebra::DMatrix::zeros(m1, m1), |acc, (j, c)| acc + j * *c);
            let jzu: Vec<f64> = (&jz * nalgebra::DVector::from_column_slice(&u)).iter().copied().collect();
            let lhs = dot(&jzu, &v);
            let rhs = dot(&z, &ok(alg.bracket(&u, &v))?);
            let square = (&jz * &jz + nalgebra::DMatrix::identity(m1, m1) * dot(&z, &z)).amax();
            worst = worst.max((lhs - rhs).abs()).max(square);
        }
        ensure!(worst <= 1e-12, "{name}: H-type identity error {worst:e}");
        let report = selftest::run(&alg, &HomogeneousNorm::default(), 1000, 11);
        ensure!(report.passed(), "{name}: self-test {:?}", report.checks);
    }
    Ok(format!("tables exact, identity error {worst:.1e}"))
}

fn euclidean_crofton_check() -> Outcome {
    let o = CroftonOptions::default();
    let r = ok(euclidean_crofton(2, 1, &Integrand::annulus(1.0, 2.0), 100_000, 1, &o))?;
    // Chords through the origin meet the annulus in two unit segments, and
    // the weighted integral is 2 pi (2 - 1).
    ensure!(r.lhs == 2.0 && (r.rhs - 2.0 * PI).abs() < 1e-12, "annulus lhs {} rhs {}", r.lhs, r.rhs);
    let c = r.constant.unwrap();
    ensure!((c * PI - 1.0).abs() < 0.005, "annulus constant {c}");
    let g = ok(euclidean_crofton(4, 2, &Integrand::gauss(vec![0.8, -0.3, 0.5, 0.2], 0.6), 100_000, 2, &o))?;
    let (cg, se) = (g.constant.unwrap(), g.constant_se.unwrap());
    ensure!((cg - 1.0 / PI).abs() <= 3.0 * se, "gaussian constant {cg} se {se}");
    Ok(format!("annulus {c:.6}, gaussian {cg:.5} ± {se:.1e} (1/pi = {:.5})", 1.0 / PI))
}

fn agree(a: &CroftonReport, b: &CroftonReport) -> (f64, f64) {
    let se = (a.constant_se.unwrap().powi(2) + b.constant_se.unwrap().powi(2)).sqrt();
    ((a.constant.unwrap() - b.constant.unwrap()).abs(), se)
}

fn htype_crofton_check() -> Outcome {
    let o = CroftonOptions::default();
    let hr = HTypeAlgebra::real_heisenberg(2).unwrap();
    let a = ok(htype_crofton_horizontal(&hr, 2, &Integrand::annulus(0.5, 1.5), 100_000, 4, &o))?;
    let b = ok(htype_crofton_horizontal(&hr, 2, &Integrand::gauss(vec![0.7, 0.1, -0.4, 0.3], 0.5), 100_000, 5, &o))?;
    let (d1, se1) = agree(&a, &b);
    ensure!(d1 <= 3.0 * se1, "h2_R horizontal constants differ by {d1} (3 SE = {})", 3.0 * se1);
    let hc = HTypeAlgebra::complex_heisenberg(1).unwrap();
    let f1 = Separable::product(Integrand::gauss(vec![0.5, 0.2, -0.3, 0.4], 0.6), Integrand::gauss(vec![0.3, -0.6], 0.5));
    let f2 = Separable::product(Integrand::bump(vec![-0.2, 0.6, 0.1, 0.0], 0.9), Integrand::annulus(0.2, 1.0));
    let c = ok(htype_crofton_vertical(&hc, 2, 1, &f1, 100_000, 7, &o))?;
    let d = ok(htype_crofton_vertical(&hc, 2, 1, &f2, 100_000, 8, &o))?;
    let (d2, se2) = agree(&c, &d);
    ensure!(d2 <= 3.0 * se2, "h1_C vertical constants differ by {d2} (3 SE = {})", 3.0 * se2);
    Ok(format!(
        "h2_R {:.5} vs {:.5}, h1_C {:.5} vs {:.5}",
        a.constant.unwrap(),
        b.constant.unwrap(),
        c.constant.unwrap(),
        d.constant.unwrap()
    ))
}

fn annulus_modulus() -> Outcome {
    let ann = Annulus { inner: 1.0, outer: 2.0, radial: 200, angular: 200 };
    let s = ok(solve_modulus(&ok(ann.problem(2.0))?))?;
    let exact = 2.0 * PI / 2f64.ln();
    ensure!((s.value / exact - 1.0).abs() < 0.02, "modulus {} vs {exact}", s.value);
    ensure!(s.kkt_residual <= 1e-8, "KKT residual {:e}", s.kkt_residual);
    Ok(format!("{:.5} vs {exact:.5}, KKT {:.1e}", s.value, s.kkt_residual))
}

fn decreasing(s: &RefinementStudy) -> bool {
    s.values.len() == 4 && s.values.windows(2).all(|w| w[1] <= 0.7 * w[0])
}

fn bounded(s: &RefinementStudy) -> bool {
    let lo = s.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.values.iter().copied().fold(0.0, f64::max);
    s.values.len() == 4 && lo > 0.0 && (hi - lo) / lo < 0.2
}

fn fuglede_dichotomy() -> Outcome {
    let opts = StudyOptions { refinements: 3, ..Default::default() };
    let lines = ok(PointFamily::lines_in_plane(16, 8))?;
    let l2 = ok(fuglede_refinement_study(&lines, 2.0, &opts))?;
    let l3 = ok(fuglede_refinement_study(&lines, 3.0, &opts))?;
    ensure!(decreasing(&l2), "R^2 p=2 values {:?}", l2.values);
    ensure!(bounded(&l3), "R^2 p=3 values {:?}", l3.values);
    let alg = HTypeAlgebra::real_heisenberg(2).unwrap();
    let planes = ok(PointFamily::horizontal_planes(&alg, 2, 48, 7, 3))?;
    let low = ok(fuglede_refinement_study(&planes, 1.5, &opts))?;
    let high = ok(fuglede_refinement_study(&planes, 3.0, &opts))?;
    ensure!(low.values.windows(2).all(|w| w[1] < w[0]), "h2_R p=1.5 values {:?}", low.values);
    ensure!(bounded(&high), "h2_R p=3 values {:?}", high.values);
    Ok(format!("R^2 ratios {:.2?} / {:.2?}; h2_R ratios {:.2?} / {:.2?}", l2.ratios, l3.ratios, low.ratios, high.ratios))
}

fn witnesses() -> Outcome {
    let alg = HTypeAlgebra::real_heisenberg(1).unwrap();
    let norm = HomogeneousNorm::default();
    let pow = ok(WitnessFunction::new(&alg, WitnessKind::RadialPow { d_m: 1.0 }, norm))?;
    let grid = LpGrid::radial(48, 32);
    let lp = ok(lp_norm_estimate(&alg, &pow, 2.0, &grid, &Thresholds::default()))?;
    ensure!(lp.values.len() == 3, "expected three levels, got {:?}", lp.values);
    ensure!(lp.values.windows(2).all(|w| (w[1] / w[0] - 1.0).abs() < 0.1), "L^p values {:?}", lp.values);
    let split = ok(HomogeneousSplit::new(&alg, vec![0], vec![]))?;
    let line = ok(IntrinsicGraph::new(split, ok(GraphGrid::new(vec![-1.0], vec![1.0], vec![0.5f64.powi(12)]))?, GraphMap::Zero))?;
    let rings = ok(surface_divergence_check(&alg, &pow, &line, 6, &RingThresholds::default()))?;
    let min = rings.sums.iter().copied().fold(f64::INFINITY, f64::min);
    let max = rings.sums.iter().copied().fold(0.0, f64::max);
    ensure!(rings.sums.len() == 6 && min > 0.0 && max / min <= 10.0, "ring sums {:?}", rings.sums);
    let log = ok(WitnessFunction::new(&alg, WitnessKind::RadialLog { d_m: 1.0, alpha: 0.75 }, norm))?;
    let lp_log = ok(lp_norm_estimate(&alg, &log, 4.0, &grid, &Thresholds::default()))?;
    let rings_log = ok(surface_divergence_check(&alg, &log, &line, 6, &RingThresholds::default()))?;
    ensure!(lp_log.verdict == Trend::Converging, "log witness L^p {:?}", lp_log);
    ensure!(rings_log.verdict == Trend::Diverging, "log witness rings {:?}", rings_log);
    Ok(format!("L^p change {:.1e}, ring max/min {:.3}, log witness finite/divergent", lp.rel_change, max / min))
}

fn ahlfors() -> Outcome {
    let alg = HTypeAlgebra::real_heisenberg(1).unwrap();
    let s = ok(HomogeneousSplit::new(&alg, vec![0], vec![0]))?;
    let norm = HomogeneousNorm::default();
    let c0 = ok(c0_estimate(&alg, &s, &norm, 100_000, 5))?.value;
    let radii: Vec<f64> = (1..=5).map(|k| 0.5f64.powi(k)).collect();
    let rep = ok(ahlfors_profile(&alg, &s, &GraphMap::Zero, &norm, 1.0, &radii, 16, c0))?;
    ensure!((rep.slope - 3.0).abs() <= 0.3, "slope {}", rep.slope);
    ensure!(rep.all_in_band, "band [{}, {}] vs {:?}", rep.lower_constant, rep.upper_constant, rep.normalized);
    Ok(format!("slope {:.3}, band [{:.3}, {:.2}] holds {:.3}", rep.slope, rep.lower_constant, rep.upper_constant, rep.normalized[0]))
}

fn haar_invariance() -> Outcome {
    let draws = 10_000;
    for n in [2usize, 4] {
        let mut rng = seeded(100 + n as u64);
        let o: Vec<f64> = (0..draws).map(|_| haar_orthogonal(n, &mut rng).map(|q| q[(0, 0)].powi(2))).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        let u: Vec<f64> = (0..draws).map(|_| haar_unitary(n, &mut rng).map(|q| q[(0, 0)].norm_sqr())).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        let s: Vec<f64> = (0..draws)
            .map(|_| haar_symplectic_quaternion(n, &mut rng).map(|q| q[(0, 0)].powi(2)))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for (what, xs, want) in [("O", o, 1.0 / n as f64), ("U", u, 1.0 / n as f64), ("Sp", s, 1.0 / (4 * n) as f64)] {
            let (m, se) = mean_se(&xs);
            ensure!((m - want).abs() <= 3.0 * se, "{what}({n}) moment {m} vs {want} (se {se})");
        }
    }
    let families = [
        (HTypeAlgebra::real_heisenberg(2).unwrap(), 2, 0),
        (HTypeAlgebra::real_heisenberg(1).unwrap(), 1, 1),
        (HTypeAlgebra::complex_heisenberg(1).unwrap(), 2, 1),
        (HTypeAlgebra::complex_heisenberg(2).unwrap(), 3, 0),
        (HTypeAlgebra::quaternion_heisenberg(1).unwrap(), 1, 0),
        (HTypeAlgebra::quaternion_heisenberg(2).unwrap(), 6, 3),
    ];
    let (mut closure, mut compat) = (0.0f64, 0.0f64);
    let mut rng = seeded(31);
    for (alg, kh, kv) in &families {
        let reference = ok(reference_subalgebra(alg, *kh, *kv))?;
        let subs = ok(sample_grassmannian(alg, &reference, 1000, 17, true))?;
        closure = subs.iter().map(|s| s.closure_defect(alg)).fold(closure, f64::max);
        for _ in 0..1000 {
            compat = compat.max(ok(sample_isometry_with(alg, &mut rng, true))?.defect(alg));
        }
    }
    ensure!(closure <= 1e-10, "closure defect {closure:e}");
    ensure!(compat <= 1e-12, "compatibility defect {compat:e}");
    Ok(format!("moments within 3 SE, closure {closure:.1e}, compatibility {compat:.1e}"))
}

fn coset_fubini_check() -> Outcome {
    let alg = HTypeAlgebra::real_heisenberg(1).unwrap();
    let gaussian = |c: &[f64]| (-2.0 * c.iter().map(|v| v * v).sum::<f64>()).exp();
    let exact = (PI / 2.0).powf(1.5);
    let mut worst = Vec::new();
    for (m_h, m_v) in [(vec![0], vec![0]), (vec![0], vec![])] {
        let split = ok(HomogeneousSplit::new(&alg, m_h, m_v))?;
        for (step, tol) in [(0.05, 0.02), (0.02, 0.005)] {
            let r = ok(coset_fubini(&alg, &split, gaussian, &FubiniBox { lo: vec![-3.5; 3], hi: vec![3.5; 3], step }))?;
            let err = r.rel_error.max((r.lhs / exact - 1.0).abs());
            ensure!(err < tol, "{split:?} step {step}: error {err}");
            worst.push(format!("{err:.1e}"));
        }
    }
    Ok(format!("errors {}", worst.join(", ")))
}

fn segment(vertical: bool, n: usize) -> Vec<GroupPoint> {
    (0..=n)
        .map(|k| {
            let s = k as f64 / n as f64;
            if vertical {
                GroupPoint::new(vec![0.0, 0.0], vec![s])
            } else {
                GroupPoint::new(vec![s, 0.0], vec![0.0])
            }
        })
        .collect()
}

fn dimensions() -> Outcome {
    let alg = HTypeAlgebra::real_heisenberg(1).unwrap();
    let norm = HomogeneousNorm::default();
    let scales: Vec<f64> = (2..=6).map(|k| 0.5f64.powi(k)).collect();
    let h = ok(box_dimension(&alg, &segment(false, 4096), &scales, &norm))?;
    let scales: Vec<f64> = (2..=5).map(|k| 0.5f64.powi(k)).collect();
    let v = ok(box_dimension(&alg, &segment(true, 10_000), &scales, &norm))?;
    ensure!((h.dimension - 1.0).abs() < 0.15, "horizontal {}", h.dimension);
    ensure!((v.dimension - 2.0).abs() < 0.2, "vertical {}", v.dimension);
    Ok(format!("horizontal {:.3}, vertical {:.3}", h.dimension, v.dimension))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("algebraic self-test", Some(1), self_test),
        ("Euclidean Crofton constant", Some(30), euclidean_crofton_check),
        ("H-type Crofton constant independence", Some(120), htype_crofton_check),
        ("annulus p-modulus", Some(60), annulus_modulus),
        ("point-family dichotomy", Some(300), fuglede_dichotomy),
        ("witness integrability and divergence", None, witnesses),
        ("Ahlfors regularity of the vertical plane", None, ahlfors),
        ("Haar and Grassmannian invariance", None, haar_invariance),
        ("coset Fubini", None, coset_fubini_check),
        ("box-counting dimensions", None, dimensions),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(s)) if elapsed > Duration::from_secs(*s) => Err(format!("took {elapsed:.1?}, limit {s} s")),
            (o, _) => o,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        failed += outcome.is_err() as usize;
        println!("criterion {:>2} {tag} [{:>7.2} s] {name}: {detail}", i + 1, elapsed.as_secs_f64());
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

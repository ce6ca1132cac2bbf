use carnot_core::rng::{normal_vec, seeded};
use carnot_core::{GroupPoint, HTypeAlgebra};
use grassmann::*;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn assert_within_3se(xs: &[f64], expected: f64, what: &str) {
    let (m, se) = mean_se(xs);
    assert!((m - expected).abs() <= 3.0 * se, "{what}: mean {m} expected {expected} se {se}");
}

#[test]
fn first_column_moments() {
    let draws = 10_000;
    for n in [2usize, 4] {
        let mut rng = seeded(100 + n as u64);
        let o: Vec<f64> = (0..draws).map(|_| haar_orthogonal(n, &mut rng).unwrap()[(0, 0)].powi(2)).collect();
        assert_within_3se(&o, 1.0 / n as f64, "orthogonal");
        let u: Vec<f64> = (0..draws).map(|_| haar_unitary(n, &mut rng).unwrap()[(0, 0)].norm_sqr()).collect();
        assert_within_3se(&u, 1.0 / n as f64, "unitary");
        let s: Vec<f64> = (0..draws).map(|_| haar_symplectic_quaternion(n, &mut rng).unwrap()[(0, 0)].powi(2)).collect();
        assert_within_3se(&s, 1.0 / (4 * n) as f64, "symplectic");
    }
}

#[test]
fn left_translation_preserves_moments() {
    // E u^2 = 1/n and E u^4 = 3/(n(n+2)) for a coordinate of a uniform unit vector.
    let n = 4;
    let draws = 10_000;
    let a0 = haar_orthogonal(n, &mut seeded(1)).unwrap();
    let mut rng = seeded(2);
    let (mut second, mut fourth) = (Vec::new(), Vec::new());
    for _ in 0..draws {
        let q = &a0 * haar_orthogonal(n, &mut rng).unwrap();
        second.push(q[(1, 2)].powi(2));
        fourth.push(q[(1, 2)].powi(4));
    }
    assert_within_3se(&second, 0.25, "translated second moment");
    assert_within_3se(&fourth, 3.0 / 24.0, "translated fourth moment");
}

fn families() -> Vec<(HTypeAlgebra, usize, usize)> {
    vec![
        (HTypeAlgebra::real_heisenberg(2).unwrap(), 2, 0),
        (HTypeAlgebra::real_heisenberg(1).unwrap(), 1, 1),
        (HTypeAlgebra::complex_heisenberg(1).unwrap(), 2, 1),
        (HTypeAlgebra::complex_heisenberg(1).unwrap(), 2, 0),
        (HTypeAlgebra::quaternion_heisenberg(1).unwrap(), 1, 0),
        (HTypeAlgebra::quaternion_heisenberg(2).unwrap(), 6, 3),
    ]
}

#[test]
fn grassmannian_samples_stay_complemented() {
    for (alg, kh, kv) in families() {
        let reference = reference_subalgebra(&alg, kh, kv).unwrap();
        for refl in [false, true] {
            let samples = sample_grassmannian(&alg, &reference, 1000, 17, refl).unwrap();
            let worst = samples.iter().map(|s| s.closure_defect(&alg)).fold(0.0, f64::max);
            assert!(worst <= 1e-10, "{:?} ({kh},{kv}) {worst}", alg.kind());
            assert!(samples.iter().all(|s| (s.k_h(), s.k_v()) == (kh, kv)));
        }
    }
}

#[test]
fn grassmannian_frames_are_uniform() {
    for (alg, kh, kv) in families() {
        let reference = reference_subalgebra(&alg, kh, kv).unwrap();
        let samples = sample_grassmannian(&alg, &reference, 4000, 23, false).unwrap();
        let proj: Vec<f64> = samples.iter().map(|s| s.h_basis[0][0].powi(2)).collect();
        assert_within_3se(&proj, 1.0 / alg.m1() as f64, "first basis vector");
    }
}

#[test]
fn sampled_isometries_are_compatible() {
    let mut rng = seeded(31);
    for (alg, _, _) in families() {
        for refl in [false, true] {
            for _ in 0..200 {
                let iso = sample_isometry_with(&alg, &mut rng, refl).unwrap();
                assert!(iso.defect(&alg) <= 1e-12);
            }
        }
    }
}

#[test]
fn real_heisenberg_vertical_orbit_is_a_fair_sign() {
    let alg = HTypeAlgebra::real_heisenberg(1).unwrap();
    let p = GroupPoint::new(vec![0.6, 0.8], vec![1.0]);
    let orbit = sphere_pushforward(&alg, &p, 10_000, 41, false).unwrap();
    let plus = orbit.iter().filter(|q| q.t[0] > 0.0).count() as f64 / orbit.len() as f64;
    assert!((plus - 0.5).abs() < 0.02, "{plus}");
    assert!(orbit.iter().all(|q| (q.t[0].abs() - 1.0).abs() < 1e-12));
    let x0: Vec<f64> = orbit.iter().map(|q| q.x[0].powi(2)).collect();
    assert_within_3se(&x0, 0.5, "horizontal");
}

#[test]
fn quaternionic_vertical_orbit_is_centred() {
    let alg = HTypeAlgebra::quaternion_heisenberg(1).unwrap();
    let p = GroupPoint::new(vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 2.0]);
    let orbit = sphere_pushforward(&alg, &p, 10_000, 43, false).unwrap();
    for a in 0..3 {
        let ta: Vec<f64> = orbit.iter().map(|q| q.t[a]).collect();
        assert_within_3se(&ta, 0.0, "vertical mean");
        let sq: Vec<f64> = orbit.iter().map(|q| q.t[a].powi(2)).collect();
        assert_within_3se(&sq, 4.0 / 3.0, "vertical second moment");
    }
    // Horizontal and vertical parts are independent.
    let cross: Vec<f64> = orbit.iter().map(|q| q.x[0].powi(2) * q.t[2].powi(2)).collect();
    assert_within_3se(&cross, 0.25 * 4.0 / 3.0, "product moment");
}

#[test]
fn complex_vertical_orbit_with_and_without_reflections() {
    let alg = HTypeAlgebra::complex_heisenberg(1).unwrap();
    let p = GroupPoint::new(vec![0.0, 1.0, 0.0, 0.0], vec![1.0, 0.0]);
    for refl in [false, true] {
        let orbit = sphere_pushforward(&alg, &p, 10_000, 47, refl).unwrap();
        let t0: Vec<f64> = orbit.iter().map(|q| q.t[0]).collect();
        assert_within_3se(&t0, 0.0, "vertical mean");
        let sq: Vec<f64> = orbit.iter().map(|q| q.t[0].powi(2)).collect();
        assert_within_3se(&sq, 0.5, "vertical second moment");
    }
}

#[test]
fn conjugating_isometries_exist() {
    for (k, (alg, kh, kv)) in families().into_iter().cycle().take(10).enumerate() {
        let reference = reference_subalgebra(&alg, kh, kv).unwrap();
        let a = isometry_at(&alg, 53, 2 * k, true).unwrap();
        let b = isometry_at(&alg, 53, 2 * k + 1, true).unwrap();
        let (va, vb) = (reference.act(&a), reference.act(&b));
        let c = b.compose(&a.inverse());
        assert!(c.defect(&alg) < 1e-12);
        assert!(va.act(&c).distance(&vb) < 1e-12);
        assert!(va.complement().act(&c).distance(&vb.complement()) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn isometries_are_automorphisms(seed in any::<u64>(), family in 0usize..6, refl in any::<bool>()) {
        let (alg, _, _) = families().swap_remove(family);
        let iso = sample_isometry_with(&alg, &mut seeded(seed), refl).unwrap();
        prop_assert!(iso.defect(&alg) <= 1e-12);
        let mut rng = seeded(seed ^ 0x9e37);
        let a = alg.point(normal_vec(&mut rng, alg.m1()), normal_vec(&mut rng, alg.m2())).unwrap();
        let b = alg.point(normal_vec(&mut rng, alg.m1()), normal_vec(&mut rng, alg.m2())).unwrap();
        let lhs = alg.multiply(&iso.apply(&a), &iso.apply(&b)).unwrap().to_flat();
        let rhs = iso.apply(&alg.multiply(&a, &b).unwrap()).to_flat();
        for (p, q) in lhs.iter().zip(&rhs) {
            prop_assert!((p - q).abs() <= 1e-10);
        }
    }

    #[test]
    fn from_horizontal_recovers_the_centre_action(seed in any::<u64>(), family in 0usize..6) {
        let (alg, _, _) = families().swap_remove(family);
        let iso = sample_isometry_with(&alg, &mut seeded(seed), true).unwrap();
        let again = Isometry::from_horizontal(&alg, iso.u.clone()).unwrap();
        prop_assert!((again.v - &iso.v).amax() <= 1e-12);
        let id: DMatrix<f64> = iso.compose(&iso.inverse()).u;
        prop_assert!((id - DMatrix::<f64>::identity(alg.m1(), alg.m1())).amax() <= 1e-12);
    }
}

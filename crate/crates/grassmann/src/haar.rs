//! Haar samplers for O(n), U(n) and Sp(n).
//!
//! All three are realised as real orthogonal matrices commuting with a set
//! of complex structures (none, `J`, or `J1, J2`). A Gaussian matrix is
//! orthonormalised column block by column block over the skew field the
//! structures generate, which is the QR decomposition with the diagonal
//! fixed positive, so the law is invariant under left multiplication.

use carnot_core::rng::{self, Rng};
use carnot_core::{Error, HTypeAlgebra, Result};
use nalgebra::{Complex, DMatrix, DVector};

const RANK_EPS: f64 = 1e-8;

/// Orthonormal basis of `R^m` made of orbits `{L w}` of the words, taking
/// candidates in order and skipping those already in the span.
fn orbit_gram_schmidt(words: &[DMatrix<f64>], candidates: impl Iterator<Item = DVector<f64>>, m: usize) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(m);
    let mut seeds = Vec::new();
    for mut v in candidates {
        if basis.len() == m {
            break;
        }
        let scale = v.norm();
        for b in &basis {
            let c = b.dot(&v);
            v.axpy(-c, b, 1.0);
        }
        // Second pass keeps the basis orthonormal to rounding.
        for b in &basis {
            let c = b.dot(&v);
            v.axpy(-c, b, 1.0);
        }
        let nv = v.norm();
        if nv <= RANK_EPS * scale.max(1.0) {
            continue;
        }
        v /= nv;
        for l in words {
            basis.push(l * &v);
        }
        seeds.push(v);
    }
    debug_assert_eq!(basis.len(), m);
    seeds
}

/// Haar element of the group of orthogonal maps of `R^m` commuting with
/// every word. `words[0]` must be the identity and the words must map any
/// unit vector to an orthonormal family.
pub(crate) fn commutant_haar(words: &[DMatrix<f64>], m: usize, rng: &mut Rng) -> DMatrix<f64> {
    let blocks = m / words.len();
    let domain = orbit_gram_schmidt(words, (0..m).map(|i| DVector::from_fn(m, |j, _| if i == j { 1.0 } else { 0.0 })), m);
    let mut image = Vec::with_capacity(blocks);
    while image.len() < blocks {
        let fresh = (0..blocks).map(|_| DVector::from_vec(rng::normal_vec(rng, m)));
        let mut tried: Vec<DVector<f64>> = image.clone();
        tried.extend(fresh);
        // Degenerate draws have probability zero; retry keeps this total.
        image = orbit_gram_schmidt(words, tried.into_iter(), m);
    }
    let mut a = DMatrix::zeros(m, m);
    for (w, v) in domain.iter().zip(&image) {
        for l in words {
            a += (l * v) * (l * w).transpose();
        }
    }
    a
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::invalid("matrix size must be at least 1"))
    } else {
        Ok(())
    }
}

/// Haar orthogonal `n x n` matrix.
pub fn haar_orthogonal(n: usize, rng: &mut Rng) -> Result<DMatrix<f64>> {
    check_n(n)?;
    Ok(commutant_haar(&[DMatrix::identity(n, n)], n, rng))
}

/// Haar element of U(n) realised on `(x_1..x_n, y_1..y_n)` with `z = x + iy`,
/// i.e. commuting with the J-map of the real Heisenberg algebra.
pub fn haar_unitary_real(n: usize, rng: &mut Rng) -> Result<DMatrix<f64>> {
    let alg = HTypeAlgebra::real_heisenberg(n)?;
    Ok(commutant_haar(&unitary_words(&alg), 2 * n, rng))
}

/// Haar element of U(n) as a complex matrix.
pub fn haar_unitary(n: usize, rng: &mut Rng) -> Result<DMatrix<Complex<f64>>> {
    let a = haar_unitary_real(n, rng)?;
    Ok(DMatrix::from_fn(n, n, |j, k| Complex::new(a[(j, k)], a[(n + j, k)])))
}

/// Haar element of Sp(n) as a real `4n x 4n` matrix on the slot layout of
/// the complex and quaternionic Heisenberg algebras, commuting with their
/// J-maps.
pub fn haar_symplectic_quaternion(n: usize, rng: &mut Rng) -> Result<DMatrix<f64>> {
    let alg = HTypeAlgebra::complex_heisenberg(n)?;
    Ok(commutant_haar(&quaternion_words(&alg), 4 * n, rng))
}

pub(crate) fn unitary_words(alg: &HTypeAlgebra) -> Vec<DMatrix<f64>> {
    let m = alg.m1();
    vec![DMatrix::identity(m, m), alg.j_map(0).clone()]
}

pub(crate) fn quaternion_words(alg: &HTypeAlgebra) -> Vec<DMatrix<f64>> {
    let m = alg.m1();
    let (j1, j2) = (alg.j_map(0), alg.j_map(1));
    vec![DMatrix::identity(m, m), j1.clone(), j2.clone(), j1 * j2]
}

/// Largest entry of `A^T A - I`.
pub fn orthogonality_defect(a: &DMatrix<f64>) -> f64 {
    let n = a.ncols();
    (a.transpose() * a - DMatrix::<f64>::identity(n, n)).amax()
}

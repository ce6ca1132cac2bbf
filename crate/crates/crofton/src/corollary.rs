//! Non-exceptionality of Grassmannian families of subalgebras: the Hölder
//! integrability test next to a discrete modulus refinement study.

use carnot_core::{rng, Error, HTypeAlgebra, Result};
use grassmann::{haar_orthogonal, reference_subalgebra, sample_grassmannian};
use modulus::{fuglede_refinement_study, Exceptionality, PointFamily, RefinementStudy, StudyOptions};
use nalgebra::DMatrix;
use serde::Serialize;

/// Ambient space of the family.
#[derive(Clone, Debug)]
pub enum Space {
    Euclid { n: usize },
    Algebra(HTypeAlgebra),
}

#[derive(Clone, Debug, Serialize)]
pub struct CorollaryOptions {
    /// Subspaces drawn from the Grassmannian.
    pub planes: usize,
    /// Cube-sphere divisions of the direction cells.
    pub divisions: usize,
    pub reflections: bool,
    pub study: StudyOptions,
}

impl Default for CorollaryOptions {
    fn default() -> Self {
        CorollaryOptions { planes: 48, divisions: 4, reflections: false, study: StudyOptions::default() }
    }
}

/// `int_0^1 r^e dr` for each layer's exponent `e = (p k - m)/(p - 1) - 1`.
#[derive(Clone, Debug, Serialize)]
pub struct HolderBound {
    pub exponents: Vec<f64>,
    /// `1 / (e + 1)`, or infinity when `e <= -1`.
    pub integrals: Vec<f64>,
    pub finite: bool,
}

pub fn holder_bound(p: f64, layers: &[(usize, usize)]) -> Result<HolderBound> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::invalid("Hölder bound needs p > 1"));
    }
    let exponents: Vec<f64> = layers.iter().map(|&(k, m)| (p * k as f64 - m as f64) / (p - 1.0) - 1.0).collect();
    let integrals: Vec<f64> = exponents.iter().map(|&e| if e > -1.0 { 1.0 / (e + 1.0) } else { f64::INFINITY }).collect();
    let finite = integrals.iter().all(|v| v.is_finite());
    Ok(HolderBound { exponents, integrals, finite })
}

#[derive(Clone, Debug, Serialize)]
pub struct CorollaryReport {
    pub space: String,
    pub p: f64,
    pub k_h: usize,
    pub k_v: usize,
    pub m1: usize,
    pub m2: usize,
    pub holder: HolderBound,
    pub study: Option<RefinementStudy>,
    /// Finite bound with a bounded trend, or infinite bound with a vanishing
    /// trend.
    pub consistent: Option<bool>,
    pub note: Option<String>,
}

/// Family of `planes` random subspaces of shape `(k_h, k_v)` through the
/// origin, restricted to the unit ball, studied over `resolutions` levels.
pub fn corollary_experiment(
    space: &Space,
    (k_h, k_v): (usize, usize),
    p: f64,
    resolutions: usize,
    seed: u64,
    opts: &CorollaryOptions,
) -> Result<CorollaryReport> {
    if resolutions < 2 {
        return Err(Error::invalid("need at least two resolutions"));
    }
    if opts.planes == 0 {
        return Err(Error::invalid("need at least one plane"));
    }
    let (label, m1, m2, planes): (String, usize, usize, Option<Vec<DMatrix<f64>>>) = match space {
        Space::Euclid { n } => {
            if k_v != 0 || !(1 <= k_h && k_h < *n) {
                return Err(Error::invalid(format!("Euclidean shape needs 1 <= k < n and no vertical part, got ({k_h}, {k_v})")));
            }
            let planes = (0..opts.planes)
                .map(|i| Ok(haar_orthogonal(*n, &mut rng::child(seed, i as u64))?.columns(0, k_h).into_owned()))
                .collect::<Result<Vec<_>>>()?;
            (format!("R^{n}"), *n, 0, Some(planes))
        }
        Space::Algebra(alg) => {
            let reference = reference_subalgebra(alg, k_h, k_v)?;
            let planes = if k_v == 0 {
                let subs = sample_grassmannian(alg, &reference, opts.planes, seed, opts.reflections)?;
                Some(subs.iter().map(|s| s.h_matrix()).collect())
            } else {
                None
            };
            (format!("{:?}(n={})", alg.kind(), alg.n()), alg.m1(), alg.m2(), planes)
        }
    };
    let layers: Vec<(usize, usize)> = if k_v == 0 { vec![(k_h, m1)] } else { vec![(k_h, m1), (k_v, m2)] };
    let holder = holder_bound(p, &layers)?;
    let (study, note) = match planes {
        Some(planes) if k_h <= 2 => {
            let family = PointFamily::new(&planes, opts.divisions)?;
            let study_opts = StudyOptions { refinements: resolutions - 1, ..opts.study.clone() };
            (Some(fuglede_refinement_study(&family, p, &study_opts)?), None)
        }
        _ => (None, Some("modulus trend is discretised for horizontal lines and 2-planes only".to_string())),
    };
    let consistent = study.as_ref().map(|s| {
        matches!((holder.finite, s.verdict), (true, Exceptionality::Bounded) | (false, Exceptionality::Exceptional))
    });
    Ok(CorollaryReport { space: label, p, k_h, k_v, m1, m2, holder, study, consistent, note })
}

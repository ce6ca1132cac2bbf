use carnot_core::{greedy_cover, DiscreteMeasure, Error, GroupPoint, HTypeAlgebra, HomogeneousNorm, Result};
use serde::Serialize;
use splits_graphs::loglog_slope;

#[derive(Clone, Debug, Serialize)]
pub struct BoxDimension {
    pub scales: Vec<f64>,
    pub counts: Vec<usize>,
    /// Slope of `log N(delta)` against `-log delta`.
    pub dimension: f64,
}

/// Box-counting dimension from greedy covers by balls of radius `delta`.
/// The point set should be dense in the target set at the finest scale.
pub fn box_dimension(alg: &HTypeAlgebra, points: &[GroupPoint], scales: &[f64], norm: &HomogeneousNorm) -> Result<BoxDimension> {
    if scales.len() < 2 {
        return Err(Error::invalid("box dimension needs at least two scales"));
    }
    if scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::invalid("scales must be positive"));
    }
    if points.is_empty() {
        return Err(Error::invalid("box dimension of an empty set"));
    }
    for p in points {
        alg.check_point(p)?;
    }
    let mut counts = Vec::with_capacity(scales.len());
    for &d in scales {
        counts.push(greedy_cover(alg, points, d, norm).count());
    }
    let c: Vec<f64> = counts.iter().map(|&n| n as f64).collect();
    let dimension = if counts.iter().all(|&n| n == counts[0]) { 0.0 } else { -loglog_slope(scales, &c) };
    Ok(BoxDimension { scales: scales.to_vec(), dimension, counts })
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub radii: Vec<f64>,
    /// `mu(B(x, r)) / r^h` per radius.
    pub ratios: Vec<f64>,
    pub min: f64,
    pub max: f64,
}

pub fn density(
    alg: &HTypeAlgebra,
    mu: &DiscreteMeasure,
    center: &GroupPoint,
    h: f64,
    radii: &[f64],
    norm: &HomogeneousNorm,
) -> Result<DensityReport> {
    alg.check_point(center)?;
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::invalid("radii must be positive"));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid("density exponent must be positive"));
    }
    let ratios: Vec<f64> = radii.iter().map(|&r| mu.ball_mass(alg, center, r, norm) / r.powf(h)).collect();
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(DensityReport { radii: radii.to_vec(), ratios, min, max })
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn segment_dimensions() {
        let alg = HTypeAlgebra::real_heisenberg(1).unwrap();
        let n = HomogeneousNorm::default();
        let scales: Vec<f64> = (2..=6).map(|k| 0.5f64.powi(k)).collect();
        let h = box_dimension(&alg, &segment(false, 4096), &scales, &n).unwrap();
        assert!((h.dimension - 1.0).abs() < 0.15, "{h:?}");
        let scales: Vec<f64> = (2..=5).map(|k| 0.5f64.powi(k)).collect();
        let v = box_dimension(&alg, &segment(true, 10_000), &scales, &n).unwrap();
        assert!((v.dimension - 2.0).abs() < 0.2, "{v:?}");
    }

    #[test]
    fn rejects_bad_scales() {
        let alg = HTypeAlgebra::real_heisenberg(1).unwrap();
        let n = HomogeneousNorm::default();
        let pts = segment(false, 100);
        assert!(box_dimension(&alg, &pts, &[0.1], &n).is_err());
        assert!(box_dimension(&alg, &pts, &[0.1, -0.05], &n).is_err());
        assert!(box_dimension(&alg, &[], &[0.1, 0.05], &n).is_err());
    }

    #[test]
    fn single_point_has_dimension_zero() {
        let alg = HTypeAlgebra::real_heisenberg(1).unwrap();
        let n = HomogeneousNorm::default();
        let d = box_dimension(&alg, &[alg.identity()], &[0.5, 0.25, 0.125], &n).unwrap();
        assert_eq!((d.dimension, d.counts.clone()), (0.0, vec![1, 1, 1]));
    }

    #[test]
    fn density_of_segment_measure() {
        let alg = HTypeAlgebra::real_heisenberg(1).unwrap();
        let n = HomogeneousNorm::default();
        let pts: Vec<GroupPoint> = (0..=2000).map(|k| GroupPoint::new(vec![-1.0 + k as f64 / 1000.0, 0.0], vec![0.0])).collect();
        let w = vec![1e-3; pts.len()];
        let mu = DiscreteMeasure::new(pts, w, "segment").unwrap();
        let d = density(&alg, &mu, &alg.identity(), 1.0, &[0.4, 0.2, 0.1], &n).unwrap();
        assert!(d.min > 1.9 && d.max < 2.1, "{d:?}");
        // With h = 2 the ratio grows like 1 / r.
        let d2 = density(&alg, &mu, &alg.identity(), 2.0, &[0.4, 0.2, 0.1], &n).unwrap();
        assert!((d2.ratios[2] / d2.ratios[0] - 4.0).abs() < 0.2, "{d2:?}");
    }

    #[test]
    fn atom_and_empty_measure() {
        let alg = HTypeAlgebra::real_heisenberg(1).unwrap();
        let n = HomogeneousNorm::default();
        let e = alg.identity();
        let atom = DiscreteMeasure::new(vec![e.clone()], vec![1.0], "atom").unwrap();
        let d = density(&alg, &atom, &e, 3.7, &[1.0], &n).unwrap();
        assert_eq!((d.min, d.max), (1.0, 1.0));
        let empty = DiscreteMeasure::new(vec![], vec![], "empty").unwrap();
        let d = density(&alg, &empty, &e, 1.0, &[0.5, 0.25], &n).unwrap();
        assert_eq!((d.min, d.max), (0.0, 0.0));
        assert!(density(&alg, &atom, &e, 0.0, &[1.0], &n).is_err());
    }
}

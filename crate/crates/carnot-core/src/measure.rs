use crate::algebra::HTypeAlgebra;
use crate::error::{Error, Result};
use crate::group::GroupPoint;
use crate::norm::HomogeneousNorm;

/// Finite weighted sum of Dirac masses.
#[derive(Clone, Debug, Default)]
pub struct DiscreteMeasure {
    pub points: Vec<GroupPoint>,
    pub weights: Vec<f64>,
    pub label: String,
}

impl DiscreteMeasure {
    pub fn new(points: Vec<GroupPoint>, weights: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: weights.len() });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("weights must be finite and non-negative"));
        }
        Ok(Self { points, weights, label: label.into() })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Mass of the closed ball `B(center, r)`.
    pub fn ball_mass(&self, alg: &HTypeAlgebra, center: &GroupPoint, r: f64, norm: &HomogeneousNorm) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .filter(|(p, _)| alg.distance_unchecked(p, center, norm) <= r)
            .map(|(_, w)| w)
            .sum()
    }

    pub fn integrate(&self, f: impl Fn(&GroupPoint) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }
}

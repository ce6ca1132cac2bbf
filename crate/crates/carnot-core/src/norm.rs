use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norms on `(x, t)` coordinates. `MaxHomog` and `Cygan` are homogeneous
/// under the dilations; `Euclidean` is not and is kept as a reference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum HomogeneousNorm {
    /// `max(e1 |x|, e2 |t|^(1/2))`.
    MaxHomog { eps1: f64, eps2: f64 },
    /// Gauge `(|x|^4 + 16 |t|^2)^(1/4)`.
    Cygan,
    Euclidean,
}

impl Default for HomogeneousNorm {
    fn default() -> Self {
        HomogeneousNorm::MaxHomog { eps1: 1.0, eps2: 1.0 }
    }
}

impl HomogeneousNorm {
    pub fn max_homog(eps1: f64, eps2: f64) -> Result<Self> {
        if !(eps1 > 0.0 && eps2 > 0.0 && eps1.is_finite() && eps2.is_finite()) {
            return Err(Error::invalid("norm weights must be positive and finite"));
        }
        Ok(HomogeneousNorm::MaxHomog { eps1, eps2 })
    }

    pub fn validate(&self) -> Result<()> {
        if let HomogeneousNorm::MaxHomog { eps1, eps2 } = *self {
            Self::max_homog(eps1, eps2)?;
        }
        Ok(())
    }

    pub fn is_homogeneous(&self) -> bool {
        !matches!(self, HomogeneousNorm::Euclidean)
    }

    /// Norm from the squared lengths of the two layers.
    #[inline]
    pub fn from_squares(&self, x2: f64, t2: f64) -> f64 {
        match *self {
            HomogeneousNorm::MaxHomog { eps1, eps2 } => (eps1 * x2.sqrt()).max(eps2 * t2.sqrt().sqrt()),
            HomogeneousNorm::Cygan => (x2 * x2 + 16.0 * t2).sqrt().sqrt(),
            HomogeneousNorm::Euclidean => (x2 + t2).sqrt(),
        }
    }

    #[inline]
    pub fn eval(&self, x: &[f64], t: &[f64]) -> f64 {
        self.from_squares(sq(x), sq(t))
    }

    /// Bounds `(bx, bt)` with `|x| <= bx` and `|t| <= bt` whenever the
    /// norm is at most `rho`.
    pub fn ball_box(&self, rho: f64) -> (f64, f64) {
        match *self {
            HomogeneousNorm::MaxHomog { eps1, eps2 } => (rho / eps1, (rho / eps2).powi(2)),
            HomogeneousNorm::Cygan => (rho, rho * rho / 4.0),
            HomogeneousNorm::Euclidean => (rho, rho),
        }
    }
}

#[inline]
pub(crate) fn sq(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

//! Crofton-type integral formulas on Euclidean space and on Heisenberg-type
//! groups: Grassmannian averages of subspace integrals against radially
//! weighted ambient integrals, and the non-exceptionality experiments for
//! families of subalgebras.

pub mod corollary;
pub mod integrand;
pub mod verify;

pub use corollary::{corollary_experiment, holder_bound, CorollaryOptions, CorollaryReport, HolderBound, Space};
pub use integrand::{sphere_area, Integrand, ProductTerm, Quadrature, Separable};
pub use verify::{euclidean_crofton, htype_crofton_horizontal, htype_crofton_vertical, CroftonOptions, CroftonReport};

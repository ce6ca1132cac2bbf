//! Discrete measures and the numerical measure-theoretic checks built on them.

mod dimension;
mod fubini;
mod haar;
mod io;

pub use carnot_core::{greedy_cover, Cover, DiscreteMeasure};
pub use dimension::{box_dimension, density, BoxDimension, DensityReport};
pub use fubini::{coset_fubini, FubiniBox, FubiniReport};
pub use haar::{dilation_jacobian, haar_scaling_check, translation_jacobian, HaarScaling};
pub use io::{read_measure, write_csv_report, write_measure, ReportRow};

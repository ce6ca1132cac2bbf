//! Discrete `p`-modulus of families of measures, with the witness functions
//! and integrability diagnostics used when the program is not convex.

pub mod family;
pub mod integrability;
pub mod problem;
pub mod solver;
pub mod witness;

pub use family::{
    fuglede_refinement_study, unit_ball_volume, Annulus, Exceptionality, FamilyBuilder, PointFamily, RefinementStudy,
    StudyOptions,
};
pub use integrability::{
    lp_norm_estimate, surface_divergence_check, LpEstimate, LpGrid, RingReport, RingThresholds, Thresholds, Trend,
};
pub use problem::{check_admissible, Admissibility, ModulusProblem, SparseRow};
pub use solver::{solve_modulus, solve_modulus_with, ModulusSolution, SolverOptions};
pub use witness::{eval_witness, VitaliCover, WitnessFunction, WitnessKind};

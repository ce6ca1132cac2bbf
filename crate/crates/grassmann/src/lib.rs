//! Haar sampling on O(n), U(n), Sp(n) and on the isometry groups of the
//! Heisenberg-type algebras, orthogonally complemented subalgebras, and
//! invariant measures on their Grassmannians.

pub mod haar;
pub mod isometry;
pub mod sample;
pub mod subalgebra;

pub use haar::{haar_orthogonal, haar_symplectic_quaternion, haar_unitary, haar_unitary_real, orthogonality_defect};
pub use isometry::{sample_isometry, sample_isometry_with, Isometry};
pub use sample::{isometry_at, sample_grassmannian, sample_isometries, sphere_pushforward, CLOSURE_TOL};
pub use subalgebra::{reference_subalgebra, Subalgebra};

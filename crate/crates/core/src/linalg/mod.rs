//! Exact linear algebra: integer matrices with Smith normal form, and dense
//! matrices over the supported rings.

mod int;
mod mat;
mod snf;

pub use int::IntMatrix;
pub use mat::{kernel_lattice, solve_linear, LinalgError, Mat};
pub use snf::{cokernel, image_basis, invariant_factors, kernel_basis, rank, smith_normal_form, solve_integer, Smith};

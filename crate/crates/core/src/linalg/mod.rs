//! Dense complex linear algebra for the small matrices that appear in
//! transceiver design (channels, precoders, equalizers, error matrices).

mod eigen;
mod io;
mod matrix;
pub mod random;
mod svd;

pub use eigen::{hermitian_eigen, HermitianEigen};
pub use io::{format_matrix, parse_matrix};
pub use matrix::{frobenius_norm, ComplexMatrix};
pub use svd::{svd, SvdFactors, RANK_TOL};

pub(crate) use matrix::vec_norm;

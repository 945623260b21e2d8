//! Upper bounds on weighted connective constants of self-avoiding walks and
//! self-avoiding trails on periodic lattices, via transfer matrices of
//! walk-extension generating polynomials.

pub mod cluster;
pub mod error;
pub mod gmatrix;
pub mod lattice;
pub mod poly;
pub mod scan;
pub mod spectral;
pub mod walks;

pub use error::{Error, Result};
pub use gmatrix::{build_gmatrix, load_gmatrix, matrix_info, save_gmatrix, GMatrix};
pub use lattice::{builtin_lattice, check_lattice, LatticeSpec};
pub use poly::{Monomial, Poly};
pub use spectral::{mu_upper_bound, CertifiedBound, Evaluator};
pub use walks::Mode;

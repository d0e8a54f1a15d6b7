//! Exact algebraic Bethe ansatz on small inhomogeneous spin-1/2 chains.
//!
//! The crate builds the monodromy matrix of the XXX/XXZ chain as dense
//! operators, constructs the factorizing (F-basis) operator that
//! diagonalizes `A(t)`, and evaluates scalar products of Bethe states along
//! several independent routes: direct contraction, the subset sum over
//! domain-wall partition functions, the F-basis coordinate sum, the Slavnov
//! determinant, its Jacobian form and the Gaudin norm.
//!
//! All algorithms are generic over [`Field`]; with [`Rational`] every
//! identity is checked with zero tolerance.

pub mod algebra;
pub mod bethe;
pub mod chain;
pub mod error;
pub mod fbasis;
pub mod field;
pub mod fixtures;
pub mod identities;
pub mod matrix;
pub mod partition;
pub mod scalar_products;
pub mod space;

pub use chain::{ChainSpec, Entry, Monodromy, Orientation, Weights};
pub use error::{Error, Result};
pub use field::{ComplexFloat, Field, Rational, Regime, DEFAULT_TOLERANCE};
pub use matrix::Matrix;
pub use space::Occupation;

/// Chain over exact rationals (rational regime).
pub type ExactChain = ChainSpec<Rational>;
/// Chain over complex doubles (either regime).
pub type FloatChain = ChainSpec<ComplexFloat>;
pub type ExactMatrix = Matrix<Rational>;
pub type FloatMatrix = Matrix<ComplexFloat>;

//! Exact solution counts for inhomogeneous Vinogradov systems
//!
//! ```text
//! Σ_{i=1}^{s} (x_i^j − y_i^j) = a_j    (1 <= j <= k),   |x_i|, |y_i| <= X
//! ```
//!
//! together with the shifted system obtained by translating every variable,
//! exponential-sum cross-checks of both counts, and the exponent formulas
//! that predict how the counts grow with `X`.
//!
//! - [`model`]: shapes, right-hand sides, power-sum vectors, integer sets.
//! - [`table`]: sparse representation tables and their convolution.
//! - [`engine`]: `J`, `H`, set-restricted and weighted counts, brute force.
//! - [`shift`]: shifting polynomials and the shift injection.
//! - [`expsum`]: exponential sums and discrete-orthogonality checks.
//! - [`exponents`]: closed-form exponents, scans and slope fits.

pub mod count;
pub mod engine;
pub mod error;
pub mod exponents;
pub mod expsum;
pub mod model;
pub mod shift;
pub mod table;

pub use count::Count;
pub use engine::{Budget, CountResult, Method, Quantity, Subject};
pub use error::{Error, Result};
pub use model::{
    first_nonzero_index, power_sum_vector, sumset, IntSet, PowerSumVector, RhsVector, SystemShape,
};
pub use shift::ShiftPolynomialFamily;
pub use table::RepresentationTable;

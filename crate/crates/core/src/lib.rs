//! Evaluation and differentiation of sparse multivariate polynomials at
//! truncated power series in multiple-double precision.
//!
//! The work is compiled into a layered schedule of convolution and addition
//! jobs over one flat coefficient arena ([`jobgraph`]), then executed either
//! sequentially or by a pool of workers separated by per-layer barriers
//! ([`executor`]). Coefficients are multiple-double expansions
//! ([`multidouble`]) combined through truncated series arithmetic
//! ([`pseries`]). The [`oracle`] module holds independent reference
//! evaluators, and [`cli`] the problem-file format, benchmark generators and
//! reporting used by the `polyseries` binary.

pub mod cli;
pub mod error;
pub mod executor;
pub mod jobgraph;
pub mod multidouble;
pub mod oracle;
pub mod pseries;

pub use error::{Error, Result};
pub use executor::{DataArray, RunReport};
pub use jobgraph::{JobGraph, Monomial, Polynomial};
pub use multidouble::{MultiDouble, Precision};
pub use pseries::{Coefficient, Mode, Series};

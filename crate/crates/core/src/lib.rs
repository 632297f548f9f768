//! Radial profiles of equivariant vortices in a two-component Ginzburg-Landau
//! system
//!
//! ```text
//! -f±'' - f±'/r + (n±²/r²) f± + [A±(f±² - t±²) + B(f∓² - t∓²)] f± = 0,
//! f±(0) = 0 if n± ≠ 0,  f±'(0) = 0 if n± = 0,  f±(∞) = t±,
//! ```
//!
//! together with the quantitative checks that go with them: quantization and
//! Pohozaev identities, the amplitude bound, the second variation, tail
//! coefficients and certified sub/supersolution envelopes.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod banded;
pub mod batch;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod model;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{build_grid, GridKind, GridSpec, RadialGrid};
pub use model::{validate, CouplingParams, DegreePair};
pub use solver::{FarField, Profile, SolveOptions, SolveReport};

//! Numerical toolkit for sharp Moser-Trudinger type inequalities on the
//! whole space: radial profiles, rearrangement, the Green profile of
//! `-Δ_N + |·|^{N-2}`, one-dimensional reductions, the concentrating and
//! vanishing limit levels, and a multi-start extremal search.

// `!(x > 0.0)` is used on purpose so that NaN is rejected with the bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub(crate) mod ascent;
pub mod bessel;
pub mod constants;
pub mod error;
pub mod gns;
pub mod green;
pub mod halfline;
pub mod limits;
pub mod nonlinearity;
pub mod ode;
pub mod optimizer;
pub mod par;
pub mod profile;
pub mod quad;
pub mod rearrangement;
pub mod verify;

pub use constants::MtParams;
pub use error::{MtError, Result};
pub use green::GreenTable;
pub use halfline::HalfLineProfile;
pub use nonlinearity::{Criticality, NonlinearitySpec};
pub use profile::RadialProfile;

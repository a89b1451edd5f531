//! reconlab: a numerical toolkit for (m,l,d)-reconstruction systems and
//! packet-erasure protocols.
//!
//! A signal in `F^d` is encoded into m packets of l coefficients by blocks
//! `V_i : F^d -> F^l`; protocols (`sum V_i* V_i = I`) allow blind
//! reconstruction after packet loss. The crate provides:
//!
//! - spectral primitives: majorization, eigen/singular values, symmetric
//!   gauge functions ([`spectra`]);
//! - the system model with analysis/synthesis operators, duals,
//!   classification and JSON persistence ([`systems`]);
//! - the q-potential with its optimality certificates ([`potential`]);
//! - exact worst-case erasure errors, the one- and two-loss lower bounds,
//!   cross-correlation identities, the Welch-type bound and two-uniformity
//!   ([`erasures`]);
//! - existence checks for prescribed spectra through compatibility
//!   inequalities over Littlewood-Richardson-positive tuples, a randomized
//!   constructive oracle and projection factorization ([`feasibility`]);
//! - explicit builders: the roots-of-unity construction and seeded random
//!   systems ([`constructors`]);
//! - an erasure-channel simulator ([`sim`]).

pub mod constructors;
pub mod erasures;
pub mod error;
pub mod feasibility;
pub mod potential;
pub mod sim;
pub mod spectra;
pub mod systems;

pub use error::{Error, Result};
pub use spectra::{CMatrix, CVector, GaugeNorm};
pub use systems::{ErasurePattern, Field, ReconSystem, ReconstructionMode, SystemShape};

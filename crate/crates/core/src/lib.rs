//! Weyl-Heisenberg covariant SIC-POVMs and the full set of mutually unbiased
//! bases in odd prime dimension, together with their geometry in generalized
//! Bloch space.
//!
//! The crate is organised bottom-up:
//!
//! * [`zmod`] - arithmetic in `Z_d` and the symplectic group `SL(2, Z_d)`.
//! * [`qops`] - shift, clock and displacement operators, symplectic unitaries.
//! * [`mubs`] - the `d + 1` mutually unbiased bases and the displacement action on them.
//! * [`bloch`] - Bloch embedding, MUB hyperplane projectors, rotations `R_m`, shifts `S_m`.
//! * [`sic`] - SIC construction, fiduciality criteria, reconstruction and fiducial search.
//! * [`cli`] - the command-line front end.

pub mod bloch;
pub mod cli;
pub mod error;
pub mod mubs;
pub mod qops;
pub mod sic;
pub mod tol;
pub mod zmod;

pub use error::{Error, Result};
pub use zmod::{PrimeDim, SympMatrix};

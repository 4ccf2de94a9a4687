//! Numerical tolerances shared across the crate.

/// Algebraic identities on single operators and Bloch vectors.
pub const TOL_UNIT: f64 = 1e-10;
/// Identities accumulated over several matrix products.
pub const TOL_COV: f64 = 1e-9;
/// Verification of a supplied fiducial.
pub const TOL_SIC: f64 = 1e-9;
/// Acceptance threshold for a raw search result before polishing.
pub const TOL_SEARCH: f64 = 1e-7;
/// Target of the polishing phase after a search hit.
pub const TOL_POLISH: f64 = 1e-12;

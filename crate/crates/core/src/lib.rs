//! Explicit-formula toolkit for the Fejer test function: computes the
//! conductor thresholds below which a cuspidal L-function cannot exist
//! (Q0) or must have a(2) < 0 (Q1), applies them to holomorphic modular
//! forms and elliptic-curve ranks, and verifies the predictions against
//! tabulated LMFDB data.

pub mod applications;
pub mod engine;
pub mod fejer;
pub mod feq;
pub mod lmfdb;
pub mod plot;
pub mod special;
pub mod thresholds;

#[cfg(test)]
pub mod test_oracles;

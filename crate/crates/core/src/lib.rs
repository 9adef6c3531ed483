//! Relativistic two-fermion bound states of an electromagnetically coupled
//! pair, formulated directly in momentum space.
//!
//! The crate builds the partial-wave interaction kernel between helicity
//! channels of a fermion pair, including magnetic, spin-orbit and recoil
//! structure plus composite form factors, and solves the resulting radial
//! integral equation for bound-state masses and wave functions.

pub mod error;
pub mod halfint;
pub mod interaction;
pub mod kernel;
pub mod kinematics;
pub mod oracle;
pub mod quad;
pub mod solver;
pub mod special;
pub mod spinor;
pub mod verify;

pub use error::{Error, Result};

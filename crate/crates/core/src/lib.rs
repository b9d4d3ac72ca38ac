//! Spectral theory of the time part of the Zakharov-Shabat system
//! `DM = (R + V) M` on a 1-periodic, four-component potential.

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod figure;
pub mod fundsol;
pub mod gradients;
pub mod hamiltonian;
pub mod linalg;
pub mod ode;
pub mod output;
pub mod potential;
pub mod singleexp;
pub mod spectra;
pub mod validate;
pub mod zeroset;

pub use error::{Error, Result};
pub use linalg::{c, Mat2, C64};
pub use potential::{Potential, PotentialField, PotentialType};

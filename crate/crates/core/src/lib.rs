//! Exactly solvable Dirac model on a class of static curved 1+1 backgrounds.
//!
//! The wave operator is i (gamma^mu d_mu + Omega) with position-dependent
//! gamma matrices generated by two profile functions a(x), b(x); space is
//! confined between the roots of g00. The crate builds the matrix algebra
//! ([`gamma`]), the profile families and their characteristic maps
//! ([`background`]), the exact free solutions ([`free`]), the coupled
//! interacting extension with its Morse-family closed form
//! ([`interacting`]), and independent numerical oracles that cross-check
//! the closed forms ([`verify`]). The aggregate acceptance checks live in
//! [`suite`]; [`cli`] renders figure data and solution samples as CSV.

pub mod background;
pub mod cli;
pub mod complex2;
pub mod error;
pub mod free;
pub mod gamma;
pub mod interacting;
pub mod kummer;
pub mod params;
pub mod suite;
pub mod verify;

pub use background::{BackgroundProfile, Branch, LocalBackground};
pub use complex2::{Complex2x2, Spinor2};
pub use error::{Error, Result};
pub use free::{DecayData, FreeMode, FreeSpinor, Subspace};
pub use interacting::{
    Component, CoupledCoeffs, Coupling, MorseProblem, PotentialConfig, PotentialDocument,
};
pub use kummer::KummerParams;
pub use params::ModelParams;
pub use suite::CheckReport;

//! Arithmetic of the quartic-twist surfaces `d(1 + a²T⁴)Y² = X³ - X`:
//! exact elliptic-curve and quartic-torsor arithmetic, local solubility,
//! rank certificates and density diagnostics for rational points.

pub mod error;
pub mod rational;
pub mod numtheory;
pub mod facts;
pub mod elliptic;
pub mod quartic;
pub mod criteria;
pub mod surface;
pub mod diagnostics;
pub mod cli;

pub use error::{Error, Result};
pub use rational::ExactRational;

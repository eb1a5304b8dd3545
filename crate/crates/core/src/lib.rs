//! Numerical laboratory for the stable Muskat interface equation on a
//! periodic domain, together with the flattening modulus of continuity
//! `omega(t, r)` and numerical checks of the inequalities that drive it.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod kernel;
pub mod lemmas;
pub mod modulus;
pub mod quad;

pub use config::RunConfig;
pub use error::{Error, Result};

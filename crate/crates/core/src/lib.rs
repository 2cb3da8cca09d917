//! Numerical laboratory for thin-film drainage: the third-order drainage
//! equation and its oscillations, the inner layer near touchdown, the
//! geometry of the substrate and the boundary layer of the accumulation
//! region.

pub mod blayer;
pub mod drainage;
pub mod error;
pub mod inner;
pub mod ode;
pub mod substrate;

pub use error::{Error, OdeError, Result};
pub use ode::{integrate, Direction, Event, IntegratorConfig, Termination, Trajectory};

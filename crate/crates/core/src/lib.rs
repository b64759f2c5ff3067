//! Numerical toolkit for the linear fragmentation equation
//!
//! ```text
//! ∂t u(t,x) + u(t,x) = ∫_x^∞ (1/y) k0(x/y) u(t,y) dy
//! ```
//!
//! covering the Mellin-transform representation of its solution, long-time
//! saddle-point asymptotics, growth/decay region analysis and two direct
//! solvers used to cross-check them.

pub mod asymptotics;
pub mod datum;
pub mod error;
pub mod kernel;
pub mod mellin;
pub mod quadrature;
pub mod rational;
pub mod regions;
pub mod roots;
pub mod simulator;

pub use datum::InitialDatum;
pub use error::{Error, Result};
pub use kernel::FragmentationKernel;

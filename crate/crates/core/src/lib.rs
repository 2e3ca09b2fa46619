//! Laboratory for layered control architectures.
//!
//! The crate stacks three decision layers over a planar unicycle testbed:
//! a grid abstraction that picks which cells to visit, a receding-horizon
//! planner that turns cells into reduced-order trajectories, and a tracking
//! controller built on differential flatness that turns trajectories into
//! inputs. Around that stack sit the analysis tools the experiments need:
//! Lyapunov and barrier QP filters, a bi-criterion least-squares study of how
//! much a single design loses against per-objective specialists, performance
//! limits for quantized and delayed feedback, and frequency-domain
//! conservation laws for sensitivity trade-offs.

pub mod bode;
pub mod decision;
pub mod dynamics;
pub mod error;
pub mod feedback;
pub mod linalg;
pub mod multirate;
pub mod pareto;
pub mod planning;
pub mod qp;
pub mod rng;
pub mod sensorimotor;

pub use error::{Error, Result};
pub use rng::Rng;

// Downstream crates build matrices for the solver entry points; re-exporting
// the linear algebra crate keeps them on this crate's version.
pub use nalgebra;
pub use num_complex;

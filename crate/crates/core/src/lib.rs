//! Per-hop delay-bound derivation and online admission control for
//! Credit-Based Shaper TSN networks.
//!
//! An offline meta-heuristic optimization (PSO, GA, exhaustive search or
//! a quantile-based intuitive baseline) searches per-priority-queue
//! worst-case delay bounds that maximize a three-part fitness: static
//! flow reservations, bandwidth headroom for future flows, and
//! deadline-matched path delays. The frozen bounds then drive online
//! admission control, validated hop by hop with a min-plus network
//! calculus model of the Credit-Based Shaper.

pub mod admission;
pub mod error;
pub mod fitness;
pub mod model;
pub mod netcalc;
pub mod optim;
pub mod routing;
pub mod scenarios;

pub use error::{Error, Result};

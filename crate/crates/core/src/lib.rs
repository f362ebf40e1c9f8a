//! Truthful online preemptive scheduling of deadline jobs on identical servers.
//!
//! All times, demands and values are exact rationals. Mechanisms run inside a
//! deterministic event-driven engine; every produced schedule can be replayed
//! through [`model::validate_trace`].

pub mod adversary;
pub mod bounds;
pub mod committed;
pub mod dualfit;
pub mod engine;
pub mod error;
pub mod feasibility;
pub mod io;
pub mod mechanism;
pub mod model;
pub mod noncommitted;
pub mod oracle;
pub mod payments;
pub mod rational;
pub mod scenarios;
pub mod workload;

pub use error::{Error, Result};

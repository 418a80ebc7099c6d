//! Deterministic multi-agent foraging simulation.
//!
//! Agents and resources live in fixed-capacity, zero-padded structure-of-arrays
//! storage ([`model`]). Each step senses ([`sensors`]), runs every agent's
//! recurrent rate policy ([`policy`]), moves agents as double integrators
//! ([`dynamics`]), regrows and harvests resources ([`resources`]), and applies
//! birth/death rules ([`evolution`]). [`engine`] composes the phases and owns
//! the run loop, and [`checkpoint`] and [`records`] define the on-disk formats.

pub mod checkpoint;
pub mod config;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod evolution;
pub mod geometry;
mod grid;
pub mod model;
mod par;
pub mod policy;
pub mod records;
pub mod resources;
pub mod rng;
pub mod sensors;
pub mod set_ops;

pub use config::{OverflowPolicy, SimConfig};
pub use engine::{bench, run, run_from, step, BenchReport, RunOutcome, SimState, SinkConfig};
pub use error::{ForageError, Result};
pub use geometry::{BoundaryMode, Segment, Vec2, WorldGeometry};
pub use model::{state_init, AgentSet, ResourceSet};
pub use records::StepRecord;

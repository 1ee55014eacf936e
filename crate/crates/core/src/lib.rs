//! Swarm shepherding simulation with a hierarchical mission planner.

pub mod bench;
pub mod error;
pub mod flock;
pub mod geometry;
pub mod grid;
pub mod grouping;
pub mod mission;
pub mod planner;
pub mod rng;
pub mod tsp;
pub mod world;

pub use error::{Error, Result};

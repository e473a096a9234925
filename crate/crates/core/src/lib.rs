//! Reputation effects with a persistent state of the world: best replies to
//! commitment actions, regions of beliefs on which they persist, belief
//! dynamics, reputation payoff bounds and equilibrium constructions.

pub mod bounds;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod game;
pub mod geometry;
pub mod io;
pub mod samples;

pub use error::{Error, Result};

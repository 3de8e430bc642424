//! Correct-by-construction switching control for a constant on-time buck
//! converter whose measurements are event-triggered and out of date.
//!
//! The pipeline runs bottom-up through the modules:
//!
//! 1. [`plant`] discretizes the circuit; [`zonogeom`] propagates reachable
//!    sets as zonotopes.
//! 2. [`raw`] partitions the state space and abstracts one on-cycle (action 1)
//!    and one off step (action 2) into a finite transition system.
//! 3. [`belief`] groups raw states the controller cannot distinguish.
//! 4. [`game`] solves the reach-avoid-stay game on the belief system.
//! 5. [`runtime`] and [`sim`] run the resulting controller in closed loop;
//!    [`ltl`] checks the words it produces.
//!
//! [`baseline`] implements the open-loop periodic design used for comparison,
//! [`config`], [`io`] and [`pipeline`] provide the command-line plumbing.

pub mod baseline;
pub mod belief;
pub mod config;
pub mod error;
pub mod game;
pub mod hybrid;
pub mod io;
pub mod ltl;
pub mod pipeline;
pub mod plant;
pub mod raw;
pub mod runtime;
pub mod sim;
pub mod zonogeom;

pub use error::{Error, Result};
pub use hybrid::Action;
pub use plant::Switch;

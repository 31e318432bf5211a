//! Synchronous three-state excitable automata on molecular graphs.
//!
//! A molecule (or any undirected graph) is turned into a network of
//! resting/excited/refractory cells that all update at once. The crate
//! covers graph ingestion and statistics ([`graph`]), the packed update
//! kernel ([`automaton`]), exact attractor detection ([`trajectory`]),
//! batch sweeps ([`experiments`]) and ring-based memory mechanics
//! ([`rings`]).
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled and runs sequentially otherwise. Results
//! never depend on which path was taken.

pub mod automaton;
mod error;
pub mod experiments;
pub mod graph;
pub mod par;
pub mod rings;
pub mod trajectory;

pub use automaton::{Configuration, ExcitationRule, NodeState, Scenario, StimulationSpec};
pub use error::{Error, Result};
pub use graph::{AtomRecord, BondMode, GraphStats, MolecularGraph};
pub use trajectory::{Termination, TrajectoryResult};

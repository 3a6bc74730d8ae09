//! Solver toolkit for the bi-objective travelling thief problem.
//!
//! A tour fixes the route; [`pwt::dp_front`] then computes every
//! non-dominated (reward, weight) packing outcome for that route exactly.
//! [`ibea`] evolves tours, scoring each one by how much its DP front
//! contributes to the surface of the whole population's fronts.

pub mod error;
pub mod format;
pub mod front;
pub mod ibea;
pub mod instance;
pub mod pwt;
pub mod rng;
pub mod tour;

pub use error::{Error, Result};
pub use front::{hypervolume, pareto_filter, surface, IndicatorKind, ObjectivePoint, Surface};
pub use ibea::{run_ibea, run_ibea_with, IbeaConfig, RunRecord, RunResult, SelectionScheme};
pub use instance::{parse_instance, write_instance, Instance, InstanceData, Item};
pub use pwt::{best_reward, brute_force_front, dp_front, evaluate, DpFront, Packing};
pub use tour::{tour_length, Tour};

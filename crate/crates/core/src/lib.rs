//! Joint network-coded scheduling and power allocation for cache-enabled
//! heterogeneous networks with device-to-device, small-cell and UAV
//! transmitters.
//!
//! The pipeline for one realization is
//! [`generate_instance`] → [`place_nodes`] → [`draw_channel`] → [`solve`],
//! and [`experiment::run_experiment`] repeats it over seeded trials.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar type for the common cases.

pub mod bits;
pub mod channel;
pub mod clique;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod model;
pub mod power;
pub mod scalar;
pub mod schedule;
pub mod scheduler;

pub use channel::{
    achievable_rate, draw_channel, draw_channel_with, place_nodes, rate_matrix, sinr, ChannelOptions, Placement,
};
pub use clique::{improve_by_transmitter, solve_exact, solve_greedy, solve_grouped, solve_heuristic, verify_clique, CliqueSolution, SolverPolicy, SolverTag};
pub use error::{Error, Result};
pub use graph::{build_graph, build_graph_with, schedule_from_clique, GraphRules, RaidncGraph, RateRule};
pub use model::{generate_instance, CachingLevel, DemandModel, Instance, Scenario, TransmitterKind};
pub use power::{power_update_step, run_ife, IfeConfig, PowerIterationReport};
pub use scalar::Scalar;
pub use schedule::{validate, Layer, Schedule, Transmission};
pub use scheduler::{solve, SchemeKind, SolveResult, SolverConfig};

pub type ChannelState = channel::ChannelState<f64>;
pub type PowerVector = channel::PowerVector<f64>;
pub type Graph = RaidncGraph<f64>;
pub type Clique = CliqueSolution<f64>;
pub type PowerReport = PowerIterationReport<f64>;
pub type ScheduleF64 = Schedule<f64>;
pub type Outcome = SolveResult<f64>;

pub type ChannelStateF32 = channel::ChannelState<f32>;
pub type PowerVectorF32 = channel::PowerVector<f32>;
pub type GraphF32 = RaidncGraph<f32>;
pub type ScheduleF32 = Schedule<f32>;
pub type OutcomeF32 = SolveResult<f32>;

//! Dynamic simulation and small-signal analysis of power systems with
//! grid-following converters whose frequency controller can be fed with
//! the compensated signal `ω̃ = ω - K ρ`.

pub mod cig;
pub mod cli;
pub mod complex_frequency;
pub mod dae;
pub mod error;
pub mod machines;
pub mod network;
pub mod report;
pub mod scenario;
pub mod smallsignal;

pub use dae::{simulate, step_trapezoidal, Simulation, SystemModel, SystemState, TimeSeries};
pub use error::{Error, Result};
pub use network::{parse_case, solve_power_flow, Event, EventKind, Network, PfSolution};
pub use scenario::Scenario;

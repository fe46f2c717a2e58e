//! Compressive sampling of spatially sparse fields with Radon-like random
//! projections, and the grid sensor-network machinery needed to gather those
//! projections in-network.
//!
//! The crate is organised by capability:
//!
//! - [`field`] synthesizes pulse-stream fields, adds measurement noise and
//!   scores reconstructions.
//! - [`sensing`] builds the sparse Radon-like measurement matrix together with
//!   the random-sampling and dense Gaussian baselines.
//! - [`rip`] runs Monte-Carlo concentration diagnostics on the measurement
//!   energy.
//! - [`reconstruction`] recovers fields with CoSaMP and a pulse-stream
//!   model-based variant.
//! - [`netsim`] builds slot-level TDMA gathering schedules on an odd grid and
//!   simulates in-network accumulation of the projections.
//! - [`analytics`] holds closed-form bandwidth/energy models for the
//!   conventional, random-sensing and Radon-like schemes.
//! - [`experiment`] is the configuration-driven runner and [`cli`] the
//!   argument layer of the `radoncs` binary.
//!
//! Runnable walkthroughs for each capability live in `examples/`:
//!
//! ```bash
//! cargo run --release --example pulse_field
//! cargo run --release --example radon_sensing
//! cargo run --release --example reconstruct
//! cargo run --release --example rip_concentration
//! cargo run --release --example gather_trace
//! cargo run --release --example scheme_comparison
//! cargo run --release --example table1
//! ```

pub mod analytics;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod field;
mod linalg;
pub mod netsim;
pub mod reconstruction;
pub mod report;
pub mod rip;
pub mod sensing;

pub use error::{Error, Result};
pub(crate) mod rng;

//! Channel tracing and resource allocation for indoor optical wireless
//! (visible light) downlinks with RYGB laser-diode access points and
//! angle diversity receivers.
//!
//! The pipeline is:
//!
//! 1. [`scene`]: describe a room, its transmitters and receiver stations,
//!    then mesh the surfaces into reflection elements.
//! 2. [`channel`]: trace line-of-sight plus first and second order diffuse
//!    reflections into impulse responses and a received-power matrix.
//! 3. [`allocation`]: turn received powers into signal / noise terms and pick
//!    the access point, wavelength and receiver branch of every user so that
//!    the sum of SINRs is maximal; optionally export the big-M MILP.
//! 4. [`report`]: derive data rates and emit tables and bar charts.

// `!(x >= y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod channel;
mod dims;
mod error;
pub mod geometry;
pub mod radiometry;
pub mod report;
pub mod scene;

pub use allocation::{
    AllocationProblem, AllocationResult, Assignment, Choice, Feasibility, MilpModel, SolveOutcome,
};
pub use channel::{Bandwidth3Db, ChannelMatrix, ImpulseResponse, TraceParams};
pub use dims::Dims;
pub use error::{Error, Result};
pub use geometry::Vec3;
pub use radiometry::{NoiseParams, ResponsivityTable};
pub use report::UserReportRow;
pub use scene::{ScenarioConfig, Scene};

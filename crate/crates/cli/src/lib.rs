//! Command layer for the lamination laboratory: deterministic experiment
//! reports over the core train-track and lamination primitives.

pub mod cache;
pub mod commands;
pub mod pushforward;
pub mod report;

pub use commands::{
    cmd_discontinuity_report, cmd_fiber_bound, cmd_flaring_check, cmd_laminations_agree,
    cmd_traintrack_report, Overrides, RunContext,
};
pub use report::{Outcome, RunReport, Verdict};

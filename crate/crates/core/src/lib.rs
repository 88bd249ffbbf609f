//! Core library for the time-series treatment of Bell-test data.
//!
//! A time-stamped Bell experiment produces, per time slot, one outcome at
//! each of two stations. Because the two local settings per station cannot
//! be applied during the same slot, the raw record is a 4-row grid (rows
//! `a`, `b`, `a'`, `b'`) in which half of the cells were never measured.
//! This crate models those grids and everything one computes from them:
//!
//! * [`table`] — run tables, quarter profiles, schedule normalization,
//!   the Sica-condition check and table condensation;
//! * [`estimators`] — pair correlations, the CHSH parameter `S`, the
//!   Clauser-Horne count combination `J`, detector efficiencies;
//! * [`reorder`] — decides whether a recorded table admits a legitimate
//!   reordering (one that preserves within-slot pair correlations) into
//!   Sica form, with an explicit assignment or an infeasibility witness;
//! * [`completion`] — fills the never-measured cells with counterfactual
//!   outcomes so that the completed table satisfies the Sica condition,
//!   and enumerates the whole constructor family;
//! * [`simulator`] — seeded quantum-correlated and local-hidden-variable
//!   pair sources plus a detection-efficiency channel;
//! * [`fixtures`] — small embedded demonstration tables used by the test
//!   suite and the `fixtures` CLI command.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats and the CLI live
//! in the companion `sica-cli` crate.

#![no_std]

extern crate alloc;

pub mod completion;
pub mod error;
pub mod estimators;
pub mod fixtures;
mod math;
pub mod outcome;
pub mod reorder;
pub mod schedule;
pub mod simulator;
pub mod table;

pub use error::Error;
pub use outcome::{Cell, Outcome, Provenance};
pub use schedule::{AliceSetting, BobSetting, SettingLabels, SettingPair, SettingSchedule};
pub use table::{CompleteTable, CondensedTable, QuarterProfile, RunTable, SicaReport};

/// Convenient alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

//! Steady states and dynamics of a V-type three-level atom driven by a pump
//! and a probe, with spontaneous-emission interference between the two
//! excited levels.
//!
//! The main entry points are [`floquet::probe_absorption`] for probe
//! spectra, [`master::steady_state_pump_only`] and [`dressed::to_trap_basis`]
//! for the pump-dressed populations, [`master::integrate`] for transients,
//! and the closed forms in [`analytic`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod check;
pub mod dressed;
pub mod error;
pub mod floquet;
mod linalg;
pub mod master;
pub mod model;
pub mod ode;
pub mod presets;
pub mod scan;

pub use error::{Error, Result};
pub use model::{make_params, parse_config, DensityMatrix, ReferenceRate, SystemParams};
pub use presets::Preset;
pub use scan::ScanResult;

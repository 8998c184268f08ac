//! Beam squint simulation and removal for wideband phased-array
//! receivers.
//!
//! A uniform linear array steered with carrier-frequency phase shifts
//! points off-carrier tones away from the commanded angle. This crate
//! simulates that squint, and implements the compensation scheme under
//! study: a per-element baseband true-time delay (integer plus an
//! optimized fractional part, realized as FIR filters) combined with
//! the usual carrier phase shift. The fractional delay is found by grid
//! search over the total squint across the signal band.

pub mod array_model;
pub mod beamformers;
pub mod cli_io;
pub mod delay_filters;
pub mod error;
pub mod optimizer;
pub mod squint_analysis;

pub use array_model::{element_delay, synthesize_received, ArrayConfig, ElementSignals, ToneSource};
pub use beamformers::{
    combine_phase_only, combine_ttd, phase_weights, BeamformerSpec, BeamformerVariant,
    CombinedOutput,
};
pub use delay_filters::{
    apply_delay, decompose_delay, design_fractional, measure_phase_delay, DelayDecomposition,
    FractionalDelayFilter, IntegerDelayFilter,
};
pub use error::{Error, Result};
pub use optimizer::{optimize_delay, total_squint_cost, DelaySearchSpec, OptimizationTrace};
pub use squint_analysis::{
    analytic_squint_approx, analytic_steered_exact, beam_pattern, squint_table, steered_angle,
    tracked_steered_angles, BeamPattern, ScanParams, SquintRow,
};

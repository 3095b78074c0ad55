//! Shared fixtures for the benchmarks.

use hypflow::{preset, CurveTrajectory, SolitonParams, SolitonState};

/// Initial state and parameters of the fig1 soliton on `[-s_max, s_max]`.
pub fn fig1_setup(s_max: f64) -> (SolitonState, SolitonParams) {
    let p = preset("fig1").expect("fig1 preset");
    (p.initial, SolitonParams::symmetric(1.0, 1, s_max))
}

/// Reconstructed fig1 curve sampled every `ds` on `[-s_max, s_max]`.
pub fn fig1_curve(s_max: f64, ds: f64) -> CurveTrajectory {
    preset("fig1").expect("fig1 preset").run_window(s_max, ds).expect("fig1 reconstructs").curve
}

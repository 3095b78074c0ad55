//! Self-similar solutions of curve shortening flow in the hyperbolic plane,
//! worked in the hyperboloid model: the soliton ODE, curve reconstruction,
//! classification of the ends, flow simulation and figure output.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod disk;
pub mod error;
pub mod export;
pub mod flow;
pub mod frame;
pub mod minkowski;
pub mod ode;
pub mod pipeline;
pub mod soliton;
pub mod svg;
pub mod verify;

pub use classify::{classify, CaseLabel, ClassificationReport, End, EndBehavior, Verdict};
pub use disk::{lift_from_disk, project_to_disk, DiskPoint};
pub use error::{Error, Result};
pub use export::TrajectoryExport;
pub use flow::{DiscreteCurve, Scheme};
pub use frame::{reconstruct, reconstruct_soliton, CurveTrajectory};
pub use minkowski::{inner, CausalType, FrenetFrame, HyperboloidPoint, LorentzIsometry, MinkowskiVector};
pub use pipeline::{preset, presets, Preset, SolitonRun, Window};
pub use soliton::{integrate, SolitonParams, SolitonState, SolitonTrajectory};
pub use svg::{render_figure, FigureSpec};
pub use verify::CriterionResult;

//! Integrate, reconstruct and classify in one call; the figure presets.

use serde::Serialize;

use crate::classify::{classify, CaseLabel, ClassificationReport};
use crate::error::{Error, Result};
use crate::frame::{reconstruct_soliton, CurveTrajectory};
use crate::minkowski::MinkowskiVector;
use crate::soliton::{
    integrate, normalize_input, stable_manifold_seed, NormalizedVelocity, SolitonParams, SolitonState,
    SolitonTrajectory,
};

/// `ṽ = a v`: with `a` given, `v` is the normalized direction of `vtilde`
/// (or `vtilde` itself when null) and `vtilde` is rescaled to `a v`.
pub fn resolve_velocity(vtilde: MinkowskiVector, a: Option<f64>) -> Result<NormalizedVelocity> {
    let norm = normalize_input(vtilde)?;
    match a {
        None => Ok(norm),
        Some(a) if a > 0.0 && a.is_finite() => Ok(NormalizedVelocity { a, ..norm }),
        Some(a) => Err(Error::InvalidParameter(format!("a must be positive, got {a}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub s_min: f64,
    pub s_max: f64,
    pub ds: f64,
    pub s_anchor: f64,
    /// Narrower range for the curve itself. Along a geodesic end the
    /// ambient coordinates grow like `e^s` and the frame stops being
    /// representable long before the ODE state does.
    pub curve: Option<(f64, f64)>,
}

impl Window {
    pub fn symmetric(s_max: f64) -> Self {
        Self { s_min: -s_max, s_max, ds: 0.01, s_anchor: 0.0, curve: None }
    }

    fn curve_params(&self, params: &SolitonParams) -> SolitonParams {
        match self.curve {
            None => *params,
            Some((lo, hi)) => {
                let (lo, hi) = (lo.max(self.s_min), hi.min(self.s_max));
                let mut p = *params;
                p.s_min = lo;
                p.s_max = hi;
                p.with_anchor(self.s_anchor.clamp(lo, hi))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolitonRun {
    pub vtilde: MinkowskiVector,
    pub velocity: NormalizedVelocity,
    pub params: SolitonParams,
    pub trajectory: SolitonTrajectory,
    pub curve: CurveTrajectory,
}

impl SolitonRun {
    pub fn new(vtilde: MinkowskiVector, a: Option<f64>, initial: SolitonState, window: Window) -> Result<Self> {
        let velocity = resolve_velocity(vtilde, a)?;
        let params = SolitonParams::new(velocity.a, velocity.epsilon, window.s_min, window.s_max)
            .with_ds(window.ds)
            .with_anchor(window.s_anchor);
        let trajectory = integrate(initial, &params)?;
        let curve = reconstruct_soliton(velocity.v, &trajectory, &window.curve_params(&params))?;
        Ok(Self { vtilde: velocity.v * velocity.a, velocity, params, trajectory, curve })
    }

    pub fn classify(&self) -> Result<ClassificationReport> {
        classify(self.vtilde, &self.trajectory)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub caption: &'static str,
    pub vtilde: MinkowskiVector,
    pub initial: SolitonState,
    pub window: Window,
    pub expected: CaseLabel,
}

impl Preset {
    pub fn run(&self) -> Result<SolitonRun> {
        SolitonRun::new(self.vtilde, None, self.initial, self.window)
    }

    /// Same initial data on a different symmetric window.
    pub fn run_window(&self, s_max: f64, ds: f64) -> Result<SolitonRun> {
        let w = Window {
            s_min: -s_max,
            s_max,
            ds,
            s_anchor: self.window.s_anchor.clamp(-s_max, s_max),
            curve: self.window.curve,
        };
        SolitonRun::new(self.vtilde, None, self.initial, w)
    }
}

const SEED_DELTA: f64 = 1e-6;

pub fn presets() -> Vec<Preset> {
    let v = |x, y, z| MinkowskiVector::new(x, y, z);
    let st = SolitonState::new;
    let w30 = Window::symmetric(30.0);
    vec![
        Preset {
            name: "fig1",
            caption: "spacelike v, mu has a positive minimum; the curve stays on one side of the geodesic",
            vtilde: v(0.0, 1.0, 0.0),
            // oriented so the extremum of tau is a valley
            initial: st(0.0, -(1.25f64.sqrt()), 0.5),
            window: w30,
            expected: CaseLabel::SpacelikeMin_4_6_i,
        },
        Preset {
            name: "fig2",
            caption: "spacelike v, mu has a negative maximum",
            vtilde: v(0.0, 1.0, 0.0),
            initial: st(0.0, -(1.25f64.sqrt()), -0.5),
            window: w30,
            expected: CaseLabel::SpacelikeMax_4_6_ii,
        },
        Preset {
            name: "fig3",
            caption: "spacelike v, one end converges to the geodesic orthogonal to v",
            vtilde: v(0.0, 1.0, 0.0),
            initial: stable_manifold_seed(1.0, SEED_DELTA),
            window: Window { s_anchor: 30.0, curve: Some((-30.0, 10.0)), ..w30 },
            expected: CaseLabel::Spacelike_4_6_iii_converging,
        },
        Preset {
            name: "fig4",
            caption: "spacelike v, mu has a single zero and diverges at both ends",
            vtilde: v(0.6, 0.8, 0.0),
            initial: st(0.6, 0.8, 0.0),
            window: w30,
            expected: CaseLabel::Spacelike_4_6_iii_crossing,
        },
        Preset {
            name: "fig5",
            caption: "timelike v",
            vtilde: v(0.0, 0.0, 1.0),
            initial: st(0.0, 1.0f64.sinh(), -(1.0f64.cosh())),
            window: w30,
            expected: CaseLabel::Timelike_4_7,
        },
        Preset {
            name: "fig6",
            caption: "timelike v, the curve passes through the origin where mu is maximal",
            vtilde: v(0.0, 0.0, 1.0),
            initial: st(0.0, 0.0, -1.0),
            window: w30,
            expected: CaseLabel::Timelike_4_7,
        },
        Preset {
            name: "fig7",
            caption: "null v",
            vtilde: v(0.0, 1.0, 1.0),
            initial: st(0.0, 1.0, -1.0),
            window: w30,
            expected: CaseLabel::Null_4_8_max,
        },
    ]
}

pub fn preset(name: &str) -> Option<Preset> {
    presets().into_iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::ExtremumKind;
    use crate::soliton::vector_field;

    #[test]
    fn presets_classify_as_labelled() {
        for p in presets() {
            let run = p.run().unwrap();
            let r = run.classify().unwrap_or_else(|e| panic!("{}: {e}", p.name));
            assert_eq!(r.case_label, p.expected, "{}", p.name);
        }
    }

    #[test]
    fn fig1_tau_has_one_valley() {
        let run = preset("fig1").unwrap().run().unwrap();
        // sign changes of tau' away from the flat tails
        let samples = &run.trajectory.samples;
        let dtau: Vec<f64> = samples.iter().map(|p| vector_field(p.state, 1.0)[0]).collect();
        let turns: Vec<usize> =
            (0..dtau.len() - 1).filter(|&i| dtau[i].abs() > 1e-6 && dtau[i] * dtau[i + 1] < 0.0).collect();
        assert_eq!(turns.len(), 1);
        let i = turns[0];
        assert!(dtau[i] < 0.0 && samples[i].state.tau < 0.0);
        let lowest = samples.iter().map(|p| p.state.tau).fold(f64::INFINITY, f64::min);
        assert!((samples[i].state.tau - lowest).abs() < 1e-3);
        let c = run.classify().unwrap().mu_critical.unwrap();
        assert_eq!(c.kind, ExtremumKind::Min);
    }

    #[test]
    fn explicit_scale_overrides_the_norm() {
        let v = resolve_velocity(MinkowskiVector::new(0.0, 3.0, 0.0), Some(2.0)).unwrap();
        assert_eq!((v.a, v.v, v.epsilon), (2.0, MinkowskiVector::E2, 1));
        let n = resolve_velocity(MinkowskiVector::new(0.0, 1.0, 1.0), Some(0.5)).unwrap();
        assert_eq!((n.a, n.epsilon), (0.5, 0));
        assert!(resolve_velocity(MinkowskiVector::E2, Some(-1.0)).is_err());
    }

    #[test]
    fn unknown_preset() {
        assert!(preset("fig8").is_none());
    }
}

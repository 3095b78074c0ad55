//! Curves realizing a soliton: Frenet–Serret integration in the hyperboloid
//! plus the closed-form horocycles and hypercycles used as references.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::minkowski::{inner, reorthonormalize, FrenetFrame, HyperboloidPoint, MinkowskiVector};
use crate::ode;
use crate::soliton::{conserved_epsilon, SolitonParams, SolitonState, SolitonTrajectory};

/// Re-orthonormalize after this many accepted steps.
pub const N_CORR: usize = 16;
pub const TOL_FRAME_DRIFT: f64 = 1e-6;

/// Flat derivatives `(T', N', X') = (κ N + X, -κ T, T)`.
pub fn frenet_rhs(f: &FrenetFrame, kappa_g: f64) -> (MinkowskiVector, MinkowskiVector, MinkowskiVector) {
    (f.n * kappa_g + f.x, f.t * -kappa_g, f.t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveSample {
    pub s: f64,
    pub frame: FrenetFrame,
    pub kappa_g: f64,
    pub tau_check: f64,
    pub nu_check: f64,
    pub mu_check: f64,
}

impl CurveSample {
    pub fn new(s: f64, frame: FrenetFrame, v: MinkowskiVector, a: f64) -> Self {
        let tau = inner(frame.t, v);
        Self { s, frame, kappa_g: a * tau, tau_check: tau, nu_check: inner(frame.n, v), mu_check: inner(frame.x, v) }
    }

    pub fn state(&self) -> SolitonState {
        SolitonState::new(self.tau_check, self.nu_check, self.mu_check)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveTrajectory {
    pub v: MinkowskiVector,
    pub a: f64,
    pub samples: Vec<CurveSample>,
    /// Largest orthonormality residual seen just before a correction.
    pub max_precorrection_residual: f64,
}

impl CurveTrajectory {
    /// Wrap exact frames (closed forms, isometry images) as a trajectory.
    pub fn from_frames(v: MinkowskiVector, a: f64, frames: impl IntoIterator<Item = (f64, FrenetFrame)>) -> Self {
        let samples = frames.into_iter().map(|(s, f)| CurveSample::new(s, f, v, a)).collect();
        Self { v, a, samples, max_precorrection_residual: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn points(&self) -> Vec<MinkowskiVector> {
        self.samples.iter().map(|p| p.frame.x).collect()
    }

    pub fn max_orthonormality_residual(&self) -> f64 {
        self.samples.iter().map(|p| p.frame.orthonormality_residual()).fold(0.0, f64::max)
    }

    /// Largest `|(⟨T,v⟩, ⟨N,v⟩, ⟨X,v⟩) - (τ, ν, μ)|` against a soliton run on
    /// the same grid, restricted to `|s| ≤ s_cap`.
    pub fn max_state_mismatch(&self, traj: &SolitonTrajectory, s_cap: f64) -> f64 {
        self.samples
            .iter()
            .filter(|p| p.s.abs() <= s_cap)
            .map(|p| p.state().max_abs_diff(traj.state_at(p.s)))
            .fold(0.0, f64::max)
    }
}

fn frame_field(v: MinkowskiVector, a: f64) -> impl Fn(f64, &[f64; 9]) -> [f64; 9] {
    move |_s, y| {
        let f = FrenetFrame::from_array(y);
        let k = a * inner(f.t, v);
        let (dt, dn, dx) = frenet_rhs(&f, k);
        [dt.x, dt.y, dt.z, dn.x, dn.y, dn.z, dx.x, dx.y, dx.z]
    }
}

/// Integrate the Frenet–Serret system with `κ_g = a⟨T, v⟩` computed from the
/// live frame. `params` supplies `a`, the window, the sample spacing and the
/// anchor arclength at which `initial` is imposed.
pub fn reconstruct(v: MinkowskiVector, initial: &FrenetFrame, params: &SolitonParams) -> Result<CurveTrajectory> {
    initial.validate(1e-8)?;
    if !v.is_finite() {
        return Err(Error::NonFinite("v"));
    }
    if !(params.s_min < params.s_max) || !(params.ds > 0.0) || !(params.a > 0.0) {
        return Err(Error::InvalidParameter("reconstruction window".into()));
    }
    let grid = ode::uniform_grid(params.s_min, params.s_max, params.ds);
    let opts = params.ode_options();
    let mut accepted = 0usize;
    let mut worst_pre: f64 = 0.0;
    let states =
        ode::sample_on_grid(frame_field(v, params.a), params.s_anchor, initial.to_array(), &grid, &opts, |step| {
            accepted += 1;
            if !accepted.is_multiple_of(N_CORR) {
                return Ok(None);
            }
            let raw = FrenetFrame::from_array(&step.y1);
            worst_pre = worst_pre.max(raw.orthonormality_residual());
            let fixed = reorthonormalize(&raw)?;
            let residual = fixed.scaled_orthonormality_residual();
            if residual > TOL_FRAME_DRIFT {
                return Err(Error::FrameDrift { s: step.t1, residual });
            }
            Ok(Some(fixed.to_array()))
        })?;
    let mut samples = Vec::with_capacity(grid.len());
    for (s, y) in grid.into_iter().zip(states) {
        let frame = FrenetFrame::from_array(&y);
        let residual = frame.scaled_orthonormality_residual();
        if residual > TOL_FRAME_DRIFT {
            return Err(Error::FrameDrift { s, residual });
        }
        samples.push(CurveSample::new(s, frame, v, params.a));
    }
    Ok(CurveTrajectory { v, a: params.a, samples, max_precorrection_residual: worst_pre })
}

/// Reconstruct the curve belonging to a soliton trajectory: seed the canonical
/// frame at the anchor and integrate over the same window.
pub fn reconstruct_soliton(
    v: MinkowskiVector,
    traj: &SolitonTrajectory,
    params: &SolitonParams,
) -> Result<CurveTrajectory> {
    let seed = traj.state_at(params.s_anchor);
    let frame = frame_from_state(v, seed)?;
    reconstruct(v, &frame, params)
}

/// Hyperboloid point `(sinh ψ û, cosh ψ)` in the plane spanned by `e₃` and `v`
/// that satisfies `⟨X, v⟩ = μ` with the smallest height.
fn lowest_point_with_height(v: MinkowskiVector, mu: f64) -> Result<MinkowskiVector> {
    let h = v.x.hypot(v.y);
    let vz = v.z;
    let scale = h * h + vz * vz;
    if h <= 1e-14 * scale.sqrt() {
        if vz == 0.0 {
            return Err(Error::ZeroVector);
        }
        let z = -mu / vz;
        if z < 1.0 - 1e-9 {
            return Err(Error::Inconsistent(format!("mu = {mu} needs height {z} < 1")));
        }
        let z = z.max(1.0);
        return Ok(MinkowskiVector::new((z * z - 1.0).sqrt(), 0.0, z));
    }
    let (ux, uy) = (v.x / h, v.y / h);
    let q = h * h - vz * vz;
    let psi = if q.abs() <= 1e-9 * scale {
        // null: h (sinh ψ - sgn(v_z) cosh ψ) = μ
        let arg = if vz > 0.0 { -mu / h } else { mu / h };
        if !(arg > 0.0) {
            return Err(Error::Inconsistent(format!("mu = {mu} has the wrong sign for a null v")));
        }
        if vz > 0.0 {
            -arg.ln()
        } else {
            arg.ln()
        }
    } else if q > 0.0 {
        let r = q.sqrt();
        (vz / h).atanh() + (mu / r).asinh()
    } else {
        let r = (-q).sqrt();
        let psi1 = (h / vz).atanh();
        let c = -mu * vz.signum() / r;
        if c < 1.0 - 1e-9 {
            return Err(Error::Inconsistent(format!("mu = {mu} is not reachable for timelike v")));
        }
        let d = c.max(1.0).acosh();
        if (psi1 - d).abs() < (psi1 + d).abs() {
            psi1 - d
        } else {
            psi1 + d
        }
    };
    Ok(MinkowskiVector::new(psi.sinh() * ux, psi.sinh() * uy, psi.cosh()))
}

/// A frame with `(⟨T,v⟩, ⟨N,v⟩, ⟨X,v⟩) = state`.
///
/// `X` is the lowest point of the hyperboloid with `⟨X,v⟩ = μ`. With
/// `e` the unit tangential part of `v` at `X` and `f = e ⊠ X`, the frame is
/// `T = (τe - νf)/r`, `N = (νe + τf)/r` where `r² = τ² + ν²`. When `r = 0`,
/// `T` is the normalized tangential part of `e₁`.
pub fn frame_from_state(v: MinkowskiVector, state: SolitonState) -> Result<FrenetFrame> {
    let mismatch = conserved_epsilon(state) - v.norm_sq();
    let scale = 1.0 + state.mu * state.mu;
    if mismatch.abs() > 1e-8 * scale {
        return Err(Error::Inconsistent(format!(
            "tau^2+nu^2-mu^2 = {} but <v,v> = {}",
            conserved_epsilon(state),
            v.norm_sq()
        )));
    }
    let x = lowest_point_with_height(v, state.mu)?;
    let r = state.tau.hypot(state.nu);
    let vt = v + x * inner(v, x);
    let rt = vt.norm_sq().max(0.0).sqrt();
    let frame = if r <= 1e-12 || rt <= 1e-12 {
        let e1 = MinkowskiVector::E1;
        let t = e1 + x * inner(e1, x);
        let t = t / t.norm_sq().sqrt();
        FrenetFrame::new(t, t.cross(x), x)
    } else {
        let e = vt / rt;
        let f = e.cross(x);
        let t = (e * state.tau - f * state.nu) / r;
        let n = (e * state.nu + f * state.tau) / r;
        FrenetFrame::new(t, n, x)
    };
    Ok(frame)
}

/// Horocycle through the apex tangent to the disk boundary at `(1, 0)`,
/// parametrized by arclength. `N` is `T ⊠ X`, which makes `κ_g = +1`.
pub fn horocycle_point(varpi: f64, s: f64) -> Result<(HyperboloidPoint, FrenetFrame)> {
    if !(varpi > 0.0 && varpi < 1.0) {
        return Err(Error::InvalidParameter(format!("varpi must lie in (0, 1), got {varpi}")));
    }
    let d = 2.0 * varpi * (1.0 - varpi);
    let w2 = varpi * varpi * s * s;
    let k = varpi * s / (1.0 - varpi);
    let x = MinkowskiVector::new((w2 + 2.0 * varpi - 1.0) / d, s, (w2 + 1.0) / d - 1.0);
    let t = MinkowskiVector::new(k, 1.0, k);
    let n =
        MinkowskiVector::new(-(w2 - 2.0 * varpi * varpi + 2.0 * varpi - 1.0) / d, -s, -(w2 - 2.0 * varpi + 1.0) / d);
    Ok((HyperboloidPoint::new(x, 1e-9 * (1.0 + x.z * x.z))?, FrenetFrame::new(t, n, x)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hypercycle {
    pub varpi: f64,
    pub c: f64,
}

impl Hypercycle {
    pub fn new(varpi: f64, c: f64) -> Result<Self> {
        if !(varpi > 0.0) || !(c > 0.0) || !(c < 1.0 + varpi) || !(c + varpi > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "hypercycle needs varpi > 0, 0 < c < 1 + varpi, c + varpi > 1 (got {varpi}, {c})"
            )));
        }
        Ok(Self { varpi, c })
    }

    /// Open interval of `t` whose disk image lies inside the unit disk:
    /// `cos(t/c) < (1 - ϖ² - c²) / (2ϖc)`.
    pub fn window(&self) -> Option<(f64, f64)> {
        let k = (1.0 - self.varpi * self.varpi - self.c * self.c) / (2.0 * self.varpi * self.c);
        if k <= -1.0 {
            return None;
        }
        let th = if k >= 1.0 { 0.0 } else { k.acos() };
        Some((self.c * th, self.c * (std::f64::consts::TAU - th)))
    }

    pub fn point(&self, t: f64) -> Result<HyperboloidPoint> {
        let (w, c) = (self.varpi, self.c);
        let (sn, cs) = (t / c).sin_cos();
        let den = 1.0 - c * c - w * w - 2.0 * c * w * cs;
        if !(den > 0.0) {
            return Err(Error::OutsideDisk { t });
        }
        let p = MinkowskiVector::new(
            2.0 * (w + c * cs) / den,
            2.0 * c * sn / den,
            (1.0 + c * c + w * w + 2.0 * c * w * cs) / den,
        );
        HyperboloidPoint::new(p, 1e-12 * (1.0 + p.z * p.z))
    }

    /// Residual of `2ϖ(x + 1/ϖ) + (c² - ϖ² - 1)(z + 1) = 0`.
    pub fn plane_residual(&self, p: MinkowskiVector) -> f64 {
        let (w, c) = (self.varpi, self.c);
        2.0 * w * (p.x + 1.0 / w) + (c * c - w * w - 1.0) * (p.z + 1.0)
    }

    /// Geodesic curvature, from the distance of the cutting plane to the
    /// origin: `|κ_g| = |d| / sqrt(1 + d²)` with `d = ⟨X, m̂⟩` constant.
    pub fn curvature(&self) -> f64 {
        let (w, c) = (self.varpi, self.c);
        let m = MinkowskiVector::new(2.0 * w, 0.0, -(c * c - w * w - 1.0));
        let d = -(c * c - w * w + 1.0) / m.norm_sq().sqrt();
        d.abs() / (1.0 + d * d).sqrt()
    }
}

pub fn hypercycle_point(varpi: f64, c: f64, t: f64) -> Result<HyperboloidPoint> {
    Hypercycle::new(varpi, c)?.point(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmbientResidual {
    pub s: f64,
    /// Sign of `⟨∇_T T, ∇_T T⟩`.
    pub epsilon: i8,
    pub kappa: f64,
    pub residual: f64,
}

/// Fourth-order finite-difference derivative of uniformly spaced vectors at
/// index `i` (one-sided stencils near the ends). Needs at least 5 points.
pub(crate) fn fd4(vals: &[MinkowskiVector], h: f64, i: usize) -> MinkowskiVector {
    let n = vals.len();
    let f = |k: usize| vals[k];
    let w = 12.0 * h;
    if i == 0 {
        (f(0) * -25.0 + f(1) * 48.0 - f(2) * 36.0 + f(3) * 16.0 - f(4) * 3.0) / w
    } else if i == 1 {
        (f(0) * -3.0 - f(1) * 10.0 + f(2) * 18.0 - f(3) * 6.0 + f(4)) / w
    } else if i + 2 == n {
        -(f(n - 1) * -3.0 - f(n - 2) * 10.0 + f(n - 3) * 18.0 - f(n - 4) * 6.0 + f(n - 5)) / w
    } else if i + 1 == n {
        -(f(n - 1) * -25.0 + f(n - 2) * 48.0 - f(n - 3) * 36.0 + f(n - 4) * 16.0 - f(n - 5) * 3.0) / w
    } else {
        (f(i - 2) - f(i - 1) * 8.0 + f(i + 1) * 8.0 - f(i + 2)) / w
    }
}

/// `|κ_g² - (εκ² + 1)|` per sample, with `∇_T T` from fourth-order finite
/// differences of `T`. Samples are assumed uniformly spaced in `s`.
pub fn ambient_curvature_check(traj: &CurveTrajectory) -> Vec<AmbientResidual> {
    let n = traj.samples.len();
    if n < 5 {
        return Vec::new();
    }
    let h = (traj.samples[n - 1].s - traj.samples[0].s) / (n - 1) as f64;
    let ts: Vec<MinkowskiVector> = traj.samples.iter().map(|p| p.frame.t).collect();
    (0..n)
        .map(|i| {
            let dt = fd4(&ts, h, i);
            let q = dt.norm_sq();
            let tol = 1e-9 * dt.euclidean_norm().powi(2).max(1.0);
            let epsilon = if q > tol {
                1
            } else if q < -tol {
                -1
            } else {
                0
            };
            let kg = traj.samples[i].kappa_g;
            AmbientResidual {
                s: traj.samples[i].s,
                epsilon,
                kappa: q.abs().sqrt(),
                residual: (kg * kg - (q + 1.0)).abs(),
            }
        })
        .collect()
}

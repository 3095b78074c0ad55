//! The autonomous system `τ' = aτν + μ, ν' = -aτ², μ' = τ` satisfied by
//! `(τ, ν, μ) = (⟨T,v⟩, ⟨N,v⟩, ⟨X,v⟩)` along a soliton with velocity `ṽ = a v`.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minkowski::{causal_type, CausalType, MinkowskiVector, TOL_CAUSAL};
use crate::ode::{self, Dopri5Options};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolitonState {
    pub tau: f64,
    pub nu: f64,
    pub mu: f64,
}

impl SolitonState {
    pub const fn new(tau: f64, nu: f64, mu: f64) -> Self {
        Self { tau, nu, mu }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.tau, self.nu, self.mu]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn max_abs_diff(self, o: Self) -> f64 {
        (self.tau - o.tau).abs().max((self.nu - o.nu).abs()).max((self.mu - o.mu).abs())
    }

    /// The image under `s -> -s`, which flips the signs of `ν` and `μ`.
    pub fn time_reversed(self) -> Self {
        Self::new(self.tau, -self.nu, -self.mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    pub a: f64,
    pub epsilon: i8,
    pub s_min: f64,
    pub s_max: f64,
    /// Output sample spacing.
    pub ds: f64,
    /// Arclength at which the initial state is imposed.
    pub s_anchor: f64,
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
}

impl SolitonParams {
    pub fn new(a: f64, epsilon: i8, s_min: f64, s_max: f64) -> Self {
        let (rtol, atol) = default_tolerances();
        Self { a, epsilon, s_min, s_max, ds: 0.01, s_anchor: 0.0, rtol, atol, h_init: None }
    }

    pub fn symmetric(a: f64, epsilon: i8, s_max: f64) -> Self {
        Self::new(a, epsilon, -s_max, s_max)
    }

    pub fn with_ds(mut self, ds: f64) -> Self {
        self.ds = ds;
        self
    }

    pub fn with_anchor(mut self, s: f64) -> Self {
        self.s_anchor = s;
        self
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) || !self.a.is_finite() {
            return Err(Error::InvalidParameter(format!("a must be positive, got {}", self.a)));
        }
        if !(self.s_min < self.s_max) {
            return Err(Error::InvalidParameter(format!("s_min {} must be below s_max {}", self.s_min, self.s_max)));
        }
        if !(self.ds > 0.0) {
            return Err(Error::InvalidParameter(format!("ds must be positive, got {}", self.ds)));
        }
        if !matches!(self.epsilon, -1..=1) {
            return Err(Error::InvalidParameter(format!("epsilon must be -1, 0 or 1, got {}", self.epsilon)));
        }
        if !self.s_anchor.is_finite() {
            return Err(Error::InvalidParameter("s_anchor must be finite".into()));
        }
        Ok(())
    }

    pub(crate) fn ode_options(&self) -> Dopri5Options {
        Dopri5Options { rtol: self.rtol, atol: self.atol, h_init: self.h_init, h_max: 0.5, ..Default::default() }
    }
}

/// Integrator tolerances, overridable through `HYPFLOW_TOL`.
pub fn default_tolerances() -> (f64, f64) {
    let tol = std::env::var("HYPFLOW_TOL")
        .ok()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|t| *t > 0.0 && t.is_finite())
        .unwrap_or(1e-12);
    (tol, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonSample {
    pub s: f64,
    pub state: SolitonState,
    pub kappa_g: f64,
    pub epsilon_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonTrajectory {
    pub a: f64,
    pub epsilon: i8,
    pub samples: Vec<SolitonSample>,
}

impl SolitonTrajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn s(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|p| p.s)
    }

    pub fn first(&self) -> &SolitonSample {
        &self.samples[0]
    }

    pub fn last(&self) -> &SolitonSample {
        &self.samples[self.samples.len() - 1]
    }

    /// Largest `|ε(s) - ε| / (1 + |s|)`.
    pub fn max_scaled_epsilon_drift(&self) -> f64 {
        self.samples.iter().map(|p| p.epsilon_residual.abs() / (1.0 + p.s.abs())).fold(0.0, f64::max)
    }

    /// Cubic Hermite value of the state at `s`, using the vector field for
    /// derivatives. Clamped to the sampled window.
    pub fn state_at(&self, s: f64) -> SolitonState {
        let n = self.samples.len();
        if n == 1 || s <= self.samples[0].s {
            return self.samples[0].state;
        }
        if s >= self.samples[n - 1].s {
            return self.samples[n - 1].state;
        }
        let i = self.samples.partition_point(|p| p.s <= s) - 1;
        hermite(&self.samples[i], &self.samples[i + 1], self.a, s)
    }
}

pub(crate) fn hermite(p: &SolitonSample, q: &SolitonSample, a: f64, s: f64) -> SolitonState {
    let h = q.s - p.s;
    let th = (s - p.s) / h;
    let (y0, y1) = (p.state.to_array(), q.state.to_array());
    let (d0, d1) = (vector_field(p.state, a), vector_field(q.state, a));
    let h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th);
    let h10 = th * (1.0 - th) * (1.0 - th);
    let h01 = th * th * (3.0 - 2.0 * th);
    let h11 = th * th * (th - 1.0);
    SolitonState::from_array(std::array::from_fn(|i| h00 * y0[i] + h10 * h * d0[i] + h01 * y1[i] + h11 * h * d1[i]))
}

pub fn vector_field(st: SolitonState, a: f64) -> [f64; 3] {
    [a * st.tau * st.nu + st.mu, -a * st.tau * st.tau, st.tau]
}

pub fn conserved_epsilon(st: SolitonState) -> f64 {
    st.tau * st.tau + st.nu * st.nu - st.mu * st.mu
}

pub fn jacobian(st: SolitonState, a: f64) -> Matrix3<f64> {
    Matrix3::new(a * st.nu, a * st.tau, 1.0, -2.0 * a * st.tau, 0.0, 0.0, 1.0, 0.0, 0.0)
}

/// `+e₂` or `-e₂` in `(τ, ν, μ)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedPoint {
    PlusE2,
    MinusE2,
}

impl FixedPoint {
    pub fn state(self) -> SolitonState {
        match self {
            FixedPoint::PlusE2 => SolitonState::new(0.0, 1.0, 0.0),
            FixedPoint::MinusE2 => SolitonState::new(0.0, -1.0, 0.0),
        }
    }
}

/// Roots `(a ± sqrt(a² + 4)) / 2` of `λ² - aλ - 1`, as `(λ₊, λ₋)`.
pub fn saddle_eigenvalues(a: f64) -> (f64, f64) {
    let r = (a * a + 4.0).sqrt();
    let lp = 0.5 * (a + r);
    // λ₊ λ₋ = -1 avoids cancellation
    (lp, -1.0 / lp)
}

/// The fixed points `±e₂` on the level set `ε = 1`, each with eigenvalues
/// `{0, λ₊, λ₋}` (negated at `-e₂`).
pub fn fixed_points(a: f64) -> Vec<(SolitonState, [f64; 3])> {
    let (lp, lm) = saddle_eigenvalues(a);
    vec![(FixedPoint::PlusE2.state(), [0.0, lp, lm]), (FixedPoint::MinusE2.state(), [0.0, -lp, -lm])]
}

/// Unit eigenvector for the negative eigenvalue at the given fixed point.
pub fn stable_eigenvector(a: f64, at: FixedPoint) -> [f64; 3] {
    let (lp, lm) = saddle_eigenvalues(a);
    let first = match at {
        FixedPoint::PlusE2 => lm,
        FixedPoint::MinusE2 => -lp,
    };
    let n = (first * first + 1.0).sqrt();
    [first / n, 0.0, 1.0 / n]
}

/// Eigenvalues of a general 3×3 real matrix that has real spectrum, via
/// nalgebra's Schur form. Used to cross-check the closed forms.
pub fn numeric_eigenvalues(m: &Matrix3<f64>) -> Vec<f64> {
    let ev = m.complex_eigenvalues();
    let mut out: Vec<f64> = ev.iter().map(|c| c.re).collect();
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizedVelocity {
    pub a: f64,
    pub v: MinkowskiVector,
    pub epsilon: i8,
}

/// Split `ṽ = a v` with `⟨v,v⟩ ∈ {-1, 0, 1}`; null vectors keep `a = 1`.
pub fn normalize_input(vtilde: MinkowskiVector) -> Result<NormalizedVelocity> {
    if !vtilde.is_finite() {
        return Err(Error::NonFinite("vtilde"));
    }
    let kind = causal_type(vtilde, TOL_CAUSAL)?;
    Ok(match kind {
        CausalType::Null => NormalizedVelocity { a: 1.0, v: vtilde, epsilon: 0 },
        _ => {
            let a = vtilde.norm_sq().abs().sqrt();
            NormalizedVelocity { a, v: vtilde / a, epsilon: kind.epsilon() }
        }
    })
}

fn near_fixed_point(st: SolitonState) -> bool {
    const SNAP: f64 = 1e-12;
    st.tau.abs() < SNAP && st.mu.abs() < SNAP && ((st.nu - 1.0).abs() < SNAP || (st.nu + 1.0).abs() < SNAP)
}

pub fn integrate(initial: SolitonState, params: &SolitonParams) -> Result<SolitonTrajectory> {
    params.validate()?;
    let st = initial.to_array();
    if st.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial state"));
    }
    let eps = params.epsilon as f64;
    let mismatch = (conserved_epsilon(initial) - eps).abs();
    if mismatch > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "initial state has tau^2+nu^2-mu^2 = {} but epsilon = {}",
            conserved_epsilon(initial),
            params.epsilon
        )));
    }

    let grid = ode::uniform_grid(params.s_min, params.s_max, params.ds);
    let states: Vec<SolitonState> = if near_fixed_point(initial) {
        vec![SolitonState::new(0.0, initial.nu.signum(), 0.0); grid.len()]
    } else {
        let a = params.a;
        let f = move |_s: f64, y: &[f64; 3]| vector_field(SolitonState::from_array(*y), a);
        ode::sample_on_grid(f, params.s_anchor, st, &grid, &params.ode_options(), |step| {
            let residual = conserved_epsilon(SolitonState::from_array(step.y1)) - eps;
            if residual.abs() > 1e-6 {
                return Err(Error::ConstraintViolation { s: step.t1, residual });
            }
            Ok(None)
        })?
        .into_iter()
        .map(SolitonState::from_array)
        .collect()
    };

    let samples = grid
        .iter()
        .zip(states)
        .map(|(&s, state)| SolitonSample {
            s,
            state,
            kappa_g: params.a * state.tau,
            epsilon_residual: conserved_epsilon(state) - eps,
        })
        .collect();
    Ok(SolitonTrajectory { a: params.a, epsilon: params.epsilon, samples })
}

/// Two-angle chart on the level set `τ² + ν² - μ² = ε`.
///
/// * `ε = 1`: `(cosh χ cos φ, cosh χ sin φ, sinh χ)`.
/// * `ε = -1`: `(sinh χ cos φ, sinh χ sin φ, σ cosh χ)`.
/// * `ε = 0`: `(e^χ cos φ, e^χ sin φ, σ e^χ)`.
///
/// `sheet` picks `σ = ±1` and is ignored for `ε = 1`.
pub fn level_set_point(epsilon: i8, chi: f64, phi: f64, sheet: f64) -> SolitonState {
    let (s, c) = phi.sin_cos();
    let sigma = if sheet < 0.0 { -1.0 } else { 1.0 };
    match epsilon {
        1 => SolitonState::new(chi.cosh() * c, chi.cosh() * s, chi.sinh()),
        -1 => SolitonState::new(chi.sinh() * c, chi.sinh() * s, sigma * chi.cosh()),
        _ => {
            let r = chi.exp();
            SolitonState::new(r * c, r * s, sigma * r)
        }
    }
}

/// Initial state sitting on the stable manifold of `+e₂`, displaced by
/// `delta` along the stable eigenvector and corrected back to `ε = 1`.
pub fn stable_manifold_seed(a: f64, delta: f64) -> SolitonState {
    let (_, lm) = saddle_eigenvalues(a);
    let tau = delta * lm;
    let mu = delta;
    let nu = (1.0 + mu * mu - tau * tau).sqrt();
    SolitonState::new(tau, nu, mu)
}

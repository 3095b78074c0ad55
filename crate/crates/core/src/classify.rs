//! Qualitative classification of soliton trajectories: the critical point and
//! zero of `μ`, the asymptotic type of each end, the case label, and an audit
//! for self-intersections.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::CurveTrajectory;
use crate::minkowski::{hyperbolic_distance, CausalType, MinkowskiVector};
use crate::soliton::{hermite, normalize_input, vector_field, SolitonSample, SolitonState, SolitonTrajectory};

pub const TOL_GEO: f64 = 1e-2;
pub const TOL_HORO: f64 = 1e-2;
/// Minimum `|s|` reached at each end before end verdicts are attempted.
pub const MIN_END_REACH: f64 = 20.0;
pub const FIT_FRACTION: f64 = 0.25;
pub const RATE_TOLERANCE: f64 = 0.2;
pub const PROXIMITY: f64 = 1e-6;

/// Below this, sign changes are treated as rounding noise.
const NOISE_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExtremumKind {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuCritical {
    pub s: f64,
    pub kind: ExtremumKind,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum End {
    PlusInfinity,
    MinusInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    GeodesicAsymptote,
    HorocycleAsymptote,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndEvidence {
    pub abs_tau: f64,
    pub abs_mu: f64,
    /// Least-squares slope of `ln|μ|` against `s` over the fit window.
    pub fitted_rate: f64,
    /// Slope expected for a geodesic approach with the observed limit of `ν`.
    pub expected_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndBehavior {
    pub end: End,
    pub verdict: Verdict,
    pub evidence: EndEvidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
#[allow(non_camel_case_types)]
pub enum CaseLabel {
    SpacelikeMin_4_6_i,
    SpacelikeMax_4_6_ii,
    Spacelike_4_6_iii_converging,
    Spacelike_4_6_iii_crossing,
    /// No critical point, no zero in the window and no end settled on a
    /// geodesic: the window is too short to tell the two subcases apart.
    Spacelike_4_6_iii_unresolved,
    Timelike_4_7,
    Null_4_8_max,
    Null_4_8_nocrit,
    Geodesic,
    Horocycle,
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        f.write_str(&s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub causal_type: CausalType,
    pub a: f64,
    pub mu_critical: Option<MuCritical>,
    pub mu_zero: Option<f64>,
    pub ends: [EndBehavior; 2],
    pub case_label: CaseLabel,
    pub theorem_checks: Vec<TheoremCheck>,
    pub consistent: bool,
}

impl ClassificationReport {
    pub fn failed_checks(&self) -> Vec<String> {
        self.theorem_checks.iter().filter(|c| !c.passed).map(|c| format!("{} ({})", c.name, c.detail)).collect()
    }

    pub fn end(&self, end: End) -> &EndBehavior {
        match end {
            End::PlusInfinity => &self.ends[0],
            End::MinusInfinity => &self.ends[1],
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Signed roots of a sampled quantity, refined on the Hermite interpolant of
/// the trajectory.
fn sign_change_roots(traj: &SolitonTrajectory, component: usize) -> Vec<f64> {
    let get = |p: &SolitonSample| p.state.to_array()[component];
    let mut roots = Vec::new();
    let sm = &traj.samples;
    let mut i = 0;
    while i < sm.len() {
        let y = get(&sm[i]);
        if y == 0.0 {
            // exact zero on a sample: count it once if the sign really changes
            let prev = if i > 0 { get(&sm[i - 1]) } else { 0.0 };
            let next = sm.get(i + 1).map(get).unwrap_or(0.0);
            if prev * next < 0.0 || (i == 0 || i + 1 == sm.len()) {
                roots.push(sm[i].s);
            }
            i += 1;
            continue;
        }
        if i + 1 < sm.len() {
            let z = get(&sm[i + 1]);
            if z != 0.0 && y.signum() != z.signum() && y.abs().max(z.abs()) > NOISE_FLOOR {
                roots.push(refine_root(&sm[i], &sm[i + 1], traj.a, component));
            }
        }
        i += 1;
    }
    roots
}

fn refine_root(p: &SolitonSample, q: &SolitonSample, a: f64, component: usize) -> f64 {
    let (mut lo, mut hi) = (p.s, q.s);
    let f_lo = p.state.to_array()[component];
    for _ in 0..200 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let v = hermite(p, q, a, mid).to_array()[component];
        if v == 0.0 {
            return mid;
        }
        if v.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The critical point of `μ`, i.e. the sign change of `τ = μ'`.
pub fn find_mu_critical(traj: &SolitonTrajectory) -> Result<Option<MuCritical>> {
    let roots = sign_change_roots(traj, 0);
    match roots.len() {
        0 => Ok(None),
        1 => {
            let s = roots[0];
            let mu = traj.state_at(s).mu;
            let kind = if mu > 0.0 { ExtremumKind::Min } else { ExtremumKind::Max };
            Ok(Some(MuCritical { s, kind, mu }))
        }
        count => Err(Error::MultipleCriticalPoints { count }),
    }
}

pub fn find_mu_zero(traj: &SolitonTrajectory) -> Result<Option<f64>> {
    let roots = sign_change_roots(traj, 2);
    match roots.len() {
        0 => Ok(None),
        1 => Ok(Some(roots[0])),
        count => Err(Error::MultipleZeros { count }),
    }
}

/// Slope of `ln|μ|` near a geodesic end where `ν → ν∞`: the eigenvalue of
/// the linearization at `(0, ν∞, 0)` that decays toward that end.
pub fn geodesic_decay_rate(a: f64, nu_inf: f64, end: End) -> f64 {
    let r = (a * a * nu_inf * nu_inf + 4.0).sqrt();
    match end {
        End::PlusInfinity => 0.5 * (a * nu_inf - r),
        End::MinusInfinity => 0.5 * (a * nu_inf + r),
    }
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndOptions {
    pub tol_geo: f64,
    pub tol_horo: f64,
    pub fit_fraction: f64,
    pub min_reach: f64,
}

impl Default for EndOptions {
    fn default() -> Self {
        Self { tol_geo: TOL_GEO, tol_horo: TOL_HORO, fit_fraction: FIT_FRACTION, min_reach: MIN_END_REACH }
    }
}

/// Verdicts for the `+∞` and `-∞` ends, in that order.
pub fn end_behavior(traj: &SolitonTrajectory, a: f64, opts: &EndOptions) -> Result<[EndBehavior; 2]> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let (lo, hi) = (traj.first().s, traj.last().s);
    if hi < opts.min_reach {
        return Err(Error::WindowTooShort { needed: opts.min_reach, got: hi });
    }
    if lo > -opts.min_reach {
        return Err(Error::WindowTooShort { needed: opts.min_reach, got: lo.abs() });
    }
    let mid = 0.5 * (lo + hi);
    Ok([
        one_end(traj, a, End::PlusInfinity, hi - opts.fit_fraction * (hi - mid), opts),
        one_end(traj, a, End::MinusInfinity, lo + opts.fit_fraction * (mid - lo), opts),
    ])
}

fn one_end(traj: &SolitonTrajectory, a: f64, end: End, cut: f64, opts: &EndOptions) -> EndBehavior {
    let mut window: Vec<&SolitonSample> = traj
        .samples
        .iter()
        .filter(|p| match end {
            End::PlusInfinity => p.s >= cut,
            End::MinusInfinity => p.s <= cut,
        })
        .collect();
    if end == End::MinusInfinity {
        window.reverse();
    }
    // window now runs toward the end
    let last = window[window.len() - 1].state;
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        window.iter().filter(|p| p.state.mu != 0.0).map(|p| (p.s, p.state.mu.abs().ln())).unzip();
    let fitted_rate = if xs.len() >= 2 { least_squares_slope(&xs, &ys) } else { 0.0 };
    let expected_rate = geodesic_decay_rate(a, last.nu, end);
    let evidence = EndEvidence { abs_tau: last.tau.abs(), abs_mu: last.mu.abs(), fitted_rate, expected_rate };

    let decreasing = |f: fn(&SolitonState) -> f64| {
        let first = f(&window[0].state);
        let stop = f(&last);
        stop < first
    };
    let geodesic = evidence.abs_mu < opts.tol_geo
        && evidence.abs_tau < opts.tol_geo
        && decreasing(|s| s.mu.abs())
        && decreasing(|s| s.tau.abs())
        && (fitted_rate - expected_rate).abs() <= RATE_TOLERANCE * expected_rate.abs();
    let horocycle = (evidence.abs_tau - 1.0 / a).abs() < opts.tol_horo;
    let verdict = if geodesic {
        Verdict::GeodesicAsymptote
    } else if horocycle {
        Verdict::HorocycleAsymptote
    } else {
        Verdict::Undetermined
    };
    EndBehavior { end, verdict, evidence }
}

fn check(name: &str, passed: bool, detail: impl Into<String>) -> TheoremCheck {
    TheoremCheck { name: name.to_owned(), passed, detail: detail.into() }
}

/// Classify a trajectory integrated for `vtilde` (normalized internally).
/// Any failed consistency check turns the result into
/// [`Error::InconsistentWithTheorem`].
pub fn classify(vtilde: MinkowskiVector, traj: &SolitonTrajectory) -> Result<ClassificationReport> {
    classify_with(vtilde, traj, &EndOptions::default())
}

pub fn classify_with(
    vtilde: MinkowskiVector,
    traj: &SolitonTrajectory,
    opts: &EndOptions,
) -> Result<ClassificationReport> {
    let norm = normalize_input(vtilde)?;
    let causal_type = match norm.epsilon {
        1 => CausalType::Spacelike,
        -1 => CausalType::Timelike,
        _ => CausalType::Null,
    };
    // a null vtilde fixes no scale, so the trajectory's a is taken as given
    if causal_type != CausalType::Null && (norm.a - traj.a).abs() > 1e-9 * norm.a {
        return Err(Error::InvalidParameter(format!(
            "trajectory was integrated with a = {} but vtilde has a = {}",
            traj.a, norm.a
        )));
    }
    let a = traj.a;
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }

    let max_tau = traj.samples.iter().map(|p| p.state.tau.abs()).fold(0.0, f64::max);
    if max_tau < 1e-10 {
        let first = traj.first().state;
        let evidence = EndEvidence { abs_tau: 0.0, abs_mu: first.mu.abs(), fitted_rate: 0.0, expected_rate: 0.0 };
        return Ok(ClassificationReport {
            causal_type,
            a,
            mu_critical: None,
            mu_zero: None,
            ends: [
                EndBehavior { end: End::PlusInfinity, verdict: Verdict::GeodesicAsymptote, evidence },
                EndBehavior { end: End::MinusInfinity, verdict: Verdict::GeodesicAsymptote, evidence },
            ],
            case_label: CaseLabel::Geodesic,
            theorem_checks: Vec::new(),
            consistent: true,
        });
    }

    let mut checks = Vec::new();
    let crit = find_mu_critical(traj);
    let zero = find_mu_zero(traj);
    let crit_count = match &crit {
        Ok(c) => c.is_some() as usize,
        Err(Error::MultipleCriticalPoints { count }) => *count,
        Err(_) => unreachable!(),
    };
    let zero_count = match &zero {
        Ok(z) => z.is_some() as usize,
        Err(Error::MultipleZeros { count }) => *count,
        Err(_) => unreachable!(),
    };
    checks.push(check(
        "L4.1",
        crit_count <= 1 && zero_count <= 1,
        format!("{crit_count} critical point(s), {zero_count} zero(s) of mu"),
    ));
    let mu_critical = crit.ok().flatten();
    let mu_zero = zero.ok().flatten();

    let tau0 = traj.first().state.tau;
    let horocycle =
        traj.samples.iter().all(|p| (p.state.tau - tau0).abs() < 1e-9) && (tau0.abs() - 1.0 / a).abs() < 1e-9;

    // the exact horocycle is its own asymptote, on any window
    let ends = if horocycle {
        [End::PlusInfinity, End::MinusInfinity].map(|end| {
            let p = if end == End::PlusInfinity { traj.last() } else { traj.first() };
            let evidence = EndEvidence {
                abs_tau: p.state.tau.abs(),
                abs_mu: p.state.mu.abs(),
                fitted_rate: 0.0,
                expected_rate: 0.0,
            };
            EndBehavior { end, verdict: Verdict::HorocycleAsymptote, evidence }
        })
    } else {
        end_behavior(traj, a, opts)?
    };
    let geodesic_ends = ends.iter().filter(|e| e.verdict == Verdict::GeodesicAsymptote).count();

    let case_label = if horocycle {
        CaseLabel::Horocycle
    } else {
        match causal_type {
            CausalType::Spacelike => match (mu_critical, mu_zero) {
                (Some(c), _) if c.kind == ExtremumKind::Min => CaseLabel::SpacelikeMin_4_6_i,
                (Some(_), _) => CaseLabel::SpacelikeMax_4_6_ii,
                (None, Some(_)) => CaseLabel::Spacelike_4_6_iii_crossing,
                (None, None) if geodesic_ends == 1 => CaseLabel::Spacelike_4_6_iii_converging,
                (None, None) => CaseLabel::Spacelike_4_6_iii_unresolved,
            },
            CausalType::Timelike => CaseLabel::Timelike_4_7,
            CausalType::Null => {
                if mu_critical.is_some() {
                    CaseLabel::Null_4_8_max
                } else {
                    CaseLabel::Null_4_8_nocrit
                }
            }
        }
    };

    checks.push(check("T1.2-i", geodesic_ends < 2, format!("{geodesic_ends} geodesic end(s)")));
    if causal_type == CausalType::Timelike {
        checks.push(check("T1.2-ii", geodesic_ends == 0, format!("{geodesic_ends} geodesic end(s) for timelike v")));
    }
    if mu_critical.is_some() {
        checks.push(check(
            "T1.2-iii",
            geodesic_ends == 0,
            format!("{geodesic_ends} geodesic end(s) with a critical point of mu"),
        ));
    }
    if mu_zero.is_some() {
        checks.push(check("T1.2-iv", geodesic_ends == 0, format!("{geodesic_ends} geodesic end(s) with a zero of mu")));
    }

    let mut worst_rise: f64 = 0.0;
    for w in traj.samples.windows(2) {
        let rise = w[1].state.nu - w[0].state.nu;
        let slack = 1e-12 * (1.0 + w[0].state.nu.abs());
        if rise > slack {
            worst_rise = worst_rise.max(rise);
        }
    }
    checks.push(check("L4.2", worst_rise == 0.0, format!("largest increase of nu {worst_rise:e}")));

    let (bound_ok, bound_detail) = curvature_bound_check(traj, a);
    checks.push(check("L4.4", bound_ok, bound_detail));

    if causal_type == CausalType::Timelike {
        let ok = mu_critical.is_some()
            && ends.iter().all(|e| e.verdict == Verdict::HorocycleAsymptote)
            && mu_critical.map(|c| c.mu.abs() >= 1.0 - 1e-9).unwrap_or(false);
        checks.push(check("L4.7", ok, "one extremum of mu with |mu| >= 1 and horocycle ends"));
    }

    let consistent = checks.iter().all(|c| c.passed);
    let report = ClassificationReport {
        causal_type,
        a,
        mu_critical,
        mu_zero,
        ends,
        case_label,
        theorem_checks: checks,
        consistent,
    };
    if consistent {
        Ok(report)
    } else {
        Err(Error::InconsistentWithTheorem(Box::new(report)))
    }
}

/// Tail bound on `|τ|`: once `aν + 2 < 0` and `τ`, `μ` keep one sign up to
/// the `+∞` end, `|τ| ≤ max(|τ(s₁)|, 2ν(s₁)/(aν(s₁)+2))` from `s₁` on. The
/// `-∞` end uses the reflected system `(s, ν, μ) → (-s, -ν, -μ)`.
fn curvature_bound_check(traj: &SolitonTrajectory, a: f64) -> (bool, String) {
    if !traj.samples.iter().all(|p| p.state.tau.is_finite() && p.state.nu.is_finite() && p.state.mu.is_finite()) {
        return (false, "non-finite state".into());
    }
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, forward) in [("+", true), ("-", false)] {
        let tail: Vec<SolitonState> = if forward {
            traj.samples.iter().map(|p| p.state).collect()
        } else {
            traj.samples.iter().rev().map(|p| SolitonState::new(p.state.tau, -p.state.nu, -p.state.mu)).collect()
        };
        // first index from which the hypotheses hold up to the end
        let mut start = None;
        for i in (0..tail.len()).rev() {
            let st = tail[i];
            let good = a * st.nu + 2.0 < 0.0 && st.tau != 0.0 && st.tau.signum() == st.mu.signum();
            let same = start.is_none_or(|j: usize| tail[j].tau.signum() == st.tau.signum());
            if good && same {
                start = Some(i);
            } else {
                break;
            }
        }
        match start {
            Some(i) => {
                let s1 = tail[i];
                let bound = s1.tau.abs().max(2.0 * s1.nu / (a * s1.nu + 2.0));
                let worst = tail[i..].iter().map(|st| st.tau.abs()).fold(0.0, f64::max);
                let pass = worst <= bound * (1.0 + 1e-9);
                ok &= pass;
                parts.push(format!("{label}: max |tau| {worst:.6} <= {bound:.6}"));
            }
            None => parts.push(format!("{label}: bound not applicable")),
        }
    }
    (ok, parts.join("; "))
}

/// `∫ τ ds` over one sample interval by the trapezoid rule with the
/// endpoint-derivative correction, fourth order in the spacing.
fn tau_integral(p: &SolitonSample, q: &SolitonSample, a: f64) -> f64 {
    let h = q.s - p.s;
    let dp = vector_field(p.state, a)[0];
    let dq = vector_field(q.state, a)[0];
    0.5 * h * (p.state.tau + q.state.tau) + h * h / 12.0 * (dp - dq)
}

/// `|μ(s₂) - μ(s₁) - ∫_{s₁}^{s₂} τ ds|` with `s₁, s₂` snapped to samples.
pub fn mu_identity_residual(traj: &SolitonTrajectory, s1: f64, s2: f64) -> f64 {
    let idx = |s: f64| {
        let i = traj.samples.partition_point(|p| p.s < s);
        i.min(traj.samples.len() - 1)
    };
    let (i, j) = {
        let (i, j) = (idx(s1), idx(s2));
        if i <= j {
            (i, j)
        } else {
            (j, i)
        }
    };
    let integral: f64 = traj.samples[i..=j].windows(2).map(|w| tau_integral(&w[0], &w[1], traj.a)).sum();
    (traj.samples[j].state.mu - traj.samples[i].state.mu - integral).abs()
}

/// Largest identity residual between the first sample and every later one.
pub fn max_mu_identity_residual(traj: &SolitonTrajectory) -> f64 {
    let mut integral = 0.0;
    let mut worst: f64 = 0.0;
    let mu0 = traj.first().state.mu;
    for w in traj.samples.windows(2) {
        integral += tau_integral(&w[0], &w[1], traj.a);
        worst = worst.max((w[1].state.mu - mu0 - integral).abs());
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfIntersection {
    pub s1: f64,
    pub s2: f64,
    pub distance: f64,
    /// `(1/a) ∮ κ_g ds` between the two parameters.
    pub loop_integral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddednessAudit {
    pub self_intersections: Vec<SelfIntersection>,
    /// Largest `|μ(s) - μ(s₀) - (1/a)∫κ_g|` along the curve.
    pub gauss_bonnet_residual: f64,
    pub segments_compared: usize,
}

fn on_chord(p: MinkowskiVector, q: MinkowskiVector, t: f64) -> MinkowskiVector {
    let m = p * (1.0 - t) + q * t;
    m / (-m.norm_sq()).sqrt()
}

/// Minimum distance between two short geodesic chords, by nested ternary
/// search (the distance is convex along geodesics in negative curvature).
fn chord_distance(
    p0: MinkowskiVector,
    p1: MinkowskiVector,
    q0: MinkowskiVector,
    q1: MinkowskiVector,
) -> (f64, f64, f64) {
    let inner_min = |x: MinkowskiVector| {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if hyperbolic_distance(x, on_chord(q0, q1, m1)) < hyperbolic_distance(x, on_chord(q0, q1, m2)) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let v = 0.5 * (lo + hi);
        (hyperbolic_distance(x, on_chord(q0, q1, v)), v)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if inner_min(on_chord(p0, p1, m1)).0 < inner_min(on_chord(p0, p1, m2)).0 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let u = 0.5 * (lo + hi);
    let (d, v) = inner_min(on_chord(p0, p1, u));
    (d, u, v)
}

/// Sweep non-adjacent segment pairs for hyperbolic distance below
/// [`PROXIMITY`]. Candidate pairs come from a uniform grid in disk
/// coordinates, where a hyperbolic length `ℓ` shrinks to at most `ℓ/2`;
/// pairs whose midpoints are farther apart than the two half-lengths plus
/// the threshold are dropped before the exact chord search.
pub fn embeddedness_audit(curve: &CurveTrajectory) -> EmbeddednessAudit {
    let pts = curve.points();
    let n = pts.len();
    let gauss_bonnet_residual = curve_mu_identity_residual(curve);
    if n < 4 {
        return EmbeddednessAudit { self_intersections: Vec::new(), gauss_bonnet_residual, segments_compared: 0 };
    }
    let disk: Vec<(f64, f64)> = pts.iter().map(|p| (p.x / (1.0 + p.z), p.y / (1.0 + p.z))).collect();
    let mids: Vec<MinkowskiVector> = pts.windows(2).map(|w| on_chord(w[0], w[1], 0.5)).collect();
    let half: Vec<f64> = pts.windows(2).map(|w| 0.5 * hyperbolic_distance(w[0], w[1])).collect();
    let margin = PROXIMITY;
    let seg_len = disk.windows(2).map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1)).fold(0.0, f64::max);
    let cell = (seg_len + margin).max(1e-9);
    let key = |x: f64, y: f64| ((x / cell).floor() as i64, (y / cell).floor() as i64);

    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for i in 0..n - 1 {
        let (a, b) = (disk[i], disk[i + 1]);
        let (x0, x1) = (a.0.min(b.0) - margin, a.0.max(b.0) + margin);
        let (y0, y1) = (a.1.min(b.1) - margin, a.1.max(b.1) + margin);
        let (k0, k1) = (key(x0, y0), key(x1, y1));
        for kx in k0.0..=k1.0 {
            for ky in k0.1..=k1.1 {
                grid.entry((kx, ky)).or_default().push(i);
            }
        }
    }

    let mut seen = std::collections::HashSet::new();
    let mut found = Vec::new();
    let mut compared = 0usize;
    let mut cells: Vec<_> = grid.into_iter().collect();
    cells.sort_by_key(|(k, _)| *k);
    for (_, segs) in cells {
        for (ii, &i) in segs.iter().enumerate() {
            for &j in &segs[ii + 1..] {
                let (i, j) = (i.min(j), i.max(j));
                if j <= i + 1 || !seen.insert((i, j)) {
                    continue;
                }
                if hyperbolic_distance(mids[i], mids[j]) - half[i] - half[j] > PROXIMITY {
                    continue;
                }
                compared += 1;
                let (d, u, v) = chord_distance(pts[i], pts[i + 1], pts[j], pts[j + 1]);
                if d < PROXIMITY {
                    let sm = &curve.samples;
                    let s1 = sm[i].s + u * (sm[i + 1].s - sm[i].s);
                    let s2 = sm[j].s + v * (sm[j + 1].s - sm[j].s);
                    let loop_integral: f64 =
                        sm[i..=j].windows(2).map(|w| 0.5 * (w[1].s - w[0].s) * (w[0].tau_check + w[1].tau_check)).sum();
                    found.push(SelfIntersection { s1, s2, distance: d, loop_integral });
                }
            }
        }
    }
    found.sort_by(|a, b| a.s1.total_cmp(&b.s1));
    EmbeddednessAudit { self_intersections: found, gauss_bonnet_residual, segments_compared: compared }
}

fn curve_mu_identity_residual(curve: &CurveTrajectory) -> f64 {
    let sm = &curve.samples;
    if sm.len() < 2 {
        return 0.0;
    }
    let a = curve.a;
    let mut integral = 0.0;
    let mut worst: f64 = 0.0;
    for w in sm.windows(2) {
        let h = w[1].s - w[0].s;
        let d0 = vector_field(w[0].state(), a)[0];
        let d1 = vector_field(w[1].state(), a)[0];
        integral += 0.5 * h * (w[0].tau_check + w[1].tau_check) + h * h / 12.0 * (d0 - d1);
        worst = worst.max((w[1].mu_check - sm[0].mu_check - integral).abs());
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepCase {
    pub causal_type: CausalType,
    pub a: f64,
    pub vtilde: MinkowskiVector,
    pub initial: SolitonState,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutcome {
    pub case: SweepCase,
    pub case_label: Option<CaseLabel>,
    pub consistent: bool,
    pub failure: Option<String>,
}

/// Deterministic grid over the level sets, `per_type` initial conditions for
/// each causal type, cycling `a` through `a_values`. Timelike and null cases
/// alternate sheets and pick the time orientation of `v` that matches.
pub fn sweep_cases(per_type: usize, a_values: &[f64]) -> Vec<SweepCase> {
    assert!(!a_values.is_empty());
    let n_chi = (per_type as f64).sqrt().ceil() as usize;
    let mut out = Vec::with_capacity(3 * per_type);
    for (eps, causal_type) in [(1i8, CausalType::Spacelike), (-1, CausalType::Timelike), (0, CausalType::Null)] {
        for k in 0..per_type {
            let a = a_values[k % a_values.len()];
            let frac = (k % n_chi) as f64 / (n_chi.max(2) - 1) as f64;
            // spacelike states need both signs of μ = sinh χ
            let chi = if eps == 1 { -1.5 + 3.0 * frac } else { 0.05 + 1.45 * frac };
            let phi =
                std::f64::consts::TAU * ((k / n_chi) as f64 + 0.5 * (k % 2) as f64) / (per_type.div_ceil(n_chi)) as f64;
            let sheet = if k % 2 == 0 { -1.0 } else { 1.0 };
            let initial = crate::soliton::level_set_point(eps, chi, phi, sheet);
            let v = match eps {
                1 => MinkowskiVector::E2,
                -1 => MinkowskiVector::new(0.0, 0.0, -sheet),
                _ => MinkowskiVector::new(0.0, 1.0, -sheet),
            };
            out.push(SweepCase { causal_type, a, vtilde: v * a, initial });
        }
    }
    out
}

/// Integrate and classify every case in parallel; output order matches input.
pub fn run_sweep(cases: &[SweepCase], s_max: f64) -> Vec<SweepOutcome> {
    use rayon::prelude::*;
    cases
        .par_iter()
        .map(|case| {
            let eps = match case.causal_type {
                CausalType::Spacelike => 1,
                CausalType::Timelike => -1,
                CausalType::Null => 0,
            };
            let params = crate::soliton::SolitonParams::symmetric(case.a, eps, s_max);
            let result = crate::soliton::integrate(case.initial, &params).and_then(|tr| classify(case.vtilde, &tr));
            match result {
                Ok(r) => SweepOutcome { case: *case, case_label: Some(r.case_label), consistent: true, failure: None },
                Err(Error::InconsistentWithTheorem(r)) => SweepOutcome {
                    case: *case,
                    case_label: Some(r.case_label),
                    consistent: false,
                    failure: Some(r.failed_checks().join(", ")),
                },
                Err(e) => {
                    SweepOutcome { case: *case, case_label: None, consistent: false, failure: Some(e.to_string()) }
                }
            }
        })
        .collect()
}

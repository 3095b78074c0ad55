//! The acceptance suite: twelve pass/fail criteria with pinned tolerances.

use std::fmt::Write;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::classify::{classify, embeddedness_audit, max_mu_identity_residual, run_sweep, sweep_cases, End, Verdict};
use crate::error::Result;
use crate::flow::{
    csf_residual, curvature_profile_invariance, hypercycle_curvature_law, oracle_compare, DiscreteCurve, OracleOptions,
    Scheme,
};
use crate::frame::{ambient_curvature_check, horocycle_point, reconstruct, CurveTrajectory};
use crate::minkowski::{CausalType, FrenetFrame, MinkowskiVector};
use crate::pipeline::{preset, presets, SolitonRun};
use crate::soliton::{
    integrate, jacobian, numeric_eigenvalues, saddle_eigenvalues, FixedPoint, SolitonParams, SolitonState,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub expected: String,
    pub got: String,
    pub tol: String,
    pub pass: bool,
    pub seconds: f64,
}

pub const CRITERIA: [(u8, &str); 12] = [
    (1, "horocycle exactness"),
    (2, "conservation"),
    (3, "fixed-point eigenvalues"),
    (4, "reconstruction fidelity"),
    (5, "classification invariants"),
    (6, "stable-manifold geodesic end"),
    (7, "csf equivalence"),
    (8, "curvature-profile invariance"),
    (9, "oracle agreement"),
    (10, "hypercycle law"),
    (11, "embeddedness audit"),
    (12, "ambient curvature relation"),
];

struct Outcome {
    expected: String,
    got: String,
    tol: String,
    pass: bool,
}

fn outcome(expected: impl Into<String>, got: impl Into<String>, tol: impl Into<String>, pass: bool) -> Outcome {
    Outcome { expected: expected.into(), got: got.into(), tol: tol.into(), pass }
}

pub fn run_criterion(id: u8) -> Option<CriterionResult> {
    let name = CRITERIA.iter().find(|c| c.0 == id)?.1;
    let start = Instant::now();
    let res = match id {
        1 => horocycle_exactness(),
        2 => conservation(),
        3 => eigenvalues(),
        4 => reconstruction(),
        5 => classification_invariants(),
        6 => stable_manifold_end(),
        7 => csf_equivalence(),
        8 => profile_invariance(),
        9 => oracle_agreement(),
        10 => hypercycle_law(),
        11 => embeddedness(),
        _ => ambient_curvature(),
    };
    let seconds = start.elapsed().as_secs_f64();
    let o = res.unwrap_or_else(|e| outcome("no error", format!("error: {e}"), "-", false));
    Some(CriterionResult { id, name, expected: o.expected, got: o.got, tol: o.tol, pass: o.pass, seconds })
}

pub fn run_all() -> Vec<CriterionResult> {
    CRITERIA.iter().filter_map(|c| run_criterion(c.0)).collect()
}

/// Fixed-format table: one line per criterion, then a summary line.
pub fn table(results: &[CriterionResult]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<3} {:<30} {:<34} {:<40} {:<22} {:>8}  RESULT",
        "id", "name", "expected", "got", "tol", "time[s]"
    );
    for r in results {
        let _ = writeln!(out, "{}", line(r));
    }
    let passed = results.iter().filter(|r| r.pass).count();
    let _ = writeln!(out, "{passed}/{} criteria passed", results.len());
    out
}

pub fn line(r: &CriterionResult) -> String {
    format!(
        "{:<3} {:<30} {:<34} {:<40} {:<22} {:>8.2}  {}",
        r.id,
        r.name,
        r.expected,
        r.got,
        r.tol,
        r.seconds,
        if r.pass { "PASS" } else { "FAIL" }
    )
}

fn e(v: f64) -> String {
    format!("{v:.3e}")
}

fn within(elapsed: Duration, limit: f64) -> bool {
    elapsed.as_secs_f64() < limit
}

fn horocycle_exactness() -> Result<Outcome> {
    let start = Instant::now();
    let tr = integrate(SolitonState::new(1.0, 0.0, 0.0), &SolitonParams::symmetric(1.0, 1, 10.0))?;
    let dev = tr.samples.iter().map(|p| p.state.max_abs_diff(SolitonState::new(1.0, -p.s, p.s))).fold(0.0, f64::max);
    let t = start.elapsed();
    Ok(outcome(
        "(1,-s,s) on [-10,10], < 1 s",
        format!("{} in {:.3}s", e(dev), t.as_secs_f64()),
        "1e-8",
        dev <= 1e-8 && within(t, 1.0),
    ))
}

fn acceptance_runs() -> Result<Vec<SolitonRun>> {
    let mut runs: Vec<SolitonRun> = presets().iter().map(|p| p.run()).collect::<Result<_>>()?;
    runs.push(SolitonRun::new(
        MinkowskiVector::E2,
        Some(1.0),
        SolitonState::new(1.0, 0.0, 0.0),
        crate::pipeline::Window::symmetric(30.0),
    )?);
    Ok(runs)
}

fn conservation() -> Result<Outcome> {
    let runs = acceptance_runs()?;
    let worst = runs.iter().map(|r| r.trajectory.max_scaled_epsilon_drift()).fold(0.0, f64::max);
    Ok(outcome(format!("|eps drift|/(1+|s|), {} runs", runs.len()), e(worst), "1e-9", worst <= 1e-9))
}

fn eigenvalues() -> Result<Outcome> {
    let s5 = 5f64.sqrt();
    let s2 = 2f64.sqrt();
    let cases = [(1.0, [0.0, 0.5 * (1.0 + s5), 0.5 * (1.0 - s5)]), (2.0, [0.0, 1.0 + s2, 1.0 - s2])];
    let mut worst: f64 = 0.0;
    for (a, want) in cases {
        let mut want = want.to_vec();
        want.sort_by(f64::total_cmp);
        let got = numeric_eigenvalues(&jacobian(FixedPoint::PlusE2.state(), a));
        let (lp, lm) = saddle_eigenvalues(a);
        let mut closed = vec![0.0, lp, lm];
        closed.sort_by(f64::total_cmp);
        for ((g, w), c) in got.iter().zip(&want).zip(&closed) {
            worst = worst.max((g - w).abs()).max((c - w).abs());
        }
    }
    Ok(outcome("a=1 {0,1.618..,-0.618..}; a=2 {0,1±√2}", e(worst), "1e-10", worst <= 1e-10))
}

fn reconstruction() -> Result<Outcome> {
    let (_, f0) = horocycle_point(0.5, 0.0)?;
    let params = SolitonParams::symmetric(1.0, 1, 5.0);
    let rec = reconstruct(MinkowskiVector::E2, &f0, &params)?;
    let mut closed = 0.0f64;
    for p in &rec.samples {
        let (_, f) = horocycle_point(0.5, p.s)?;
        closed = closed.max(p.frame.max_abs_diff(&f));
    }
    let orth = rec.max_orthonormality_residual();
    let mut mismatch = 0.0f64;
    for name in ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7"] {
        let run = preset(name).expect("preset").run()?;
        mismatch = mismatch.max(run.curve.max_state_mismatch(&run.trajectory, 20.0));
    }
    Ok(outcome(
        "closed form; orthonormal; ODE cross-check",
        format!("{} / {} / {}", e(closed), e(orth), e(mismatch)),
        "1e-7 / 1e-8 / 1e-6",
        closed <= 1e-7 && orth <= 1e-8 && mismatch <= 1e-6,
    ))
}

fn classification_invariants() -> Result<Outcome> {
    let start = Instant::now();
    let cases = sweep_cases(100, &[0.5, 1.0, 2.0]);
    let outcomes = run_sweep(&cases, 30.0);
    let t = start.elapsed();
    let per_type = [CausalType::Spacelike, CausalType::Timelike, CausalType::Null]
        .map(|c| cases.iter().filter(|k| k.causal_type == c).count());
    let violations = outcomes.iter().filter(|o| !o.consistent).count();
    Ok(outcome(
        "0 violations, >=100/type, < 60 s",
        format!("{violations} of {:?} in {:.2}s", per_type, t.as_secs_f64()),
        "0",
        violations == 0 && per_type.iter().all(|&n| n >= 100) && within(t, 60.0),
    ))
}

fn stable_manifold_end() -> Result<Outcome> {
    let run = preset("fig3").expect("preset").run()?;
    let r = classify(run.vtilde, &run.trajectory)?;
    let plus = r.end(End::PlusInfinity);
    let minus = r.end(End::MinusInfinity);
    let (_, lm) = saddle_eigenvalues(1.0);
    let rate = plus.evidence.fitted_rate;
    let rel = ((rate - lm) / lm).abs();
    let pass = plus.verdict == Verdict::GeodesicAsymptote && minus.verdict == Verdict::HorocycleAsymptote && rel <= 0.2;
    Ok(outcome(
        format!("+inf geodesic rate {lm:.4}, -inf horocycle"),
        format!("{:?} {rate:.4}, {:?}", plus.verdict, minus.verdict),
        "20%",
        pass,
    ))
}

fn csf_equivalence() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for name in ["fig1", "fig5", "fig7"] {
        let run = preset(name).expect("preset").run()?;
        let r = csf_residual(&run.curve, run.vtilde, 1e-4)?;
        worst = worst.max(r.max_residual);
        parts.push(format!("{name} {}", e(r.max_residual)));
    }
    Ok(outcome("spacelike, timelike, null", parts.join(" "), "1e-5", worst <= 1e-5))
}

fn profile_invariance() -> Result<Outcome> {
    let run = preset("fig1").expect("preset").run()?;
    let times: Vec<f64> = (0..=10).map(|k| 0.05 * k as f64).collect();
    let d = curvature_profile_invariance(&DiscreteCurve::from_trajectory(&run.curve), run.vtilde, &times)?;
    Ok(outcome("fig1, t in [0, 0.5]", e(d), "1e-4", d <= 1e-4))
}

fn oracle_curve(h: f64) -> Result<CurveTrajectory> {
    let p = preset("fig1").expect("preset");
    Ok(p.run_window(4.0, h)?.curve)
}

fn oracle_agreement() -> Result<Outcome> {
    let v = MinkowskiVector::E2;
    let coarse = oracle_compare(&oracle_curve(1e-2)?, v, 0.01, 1e-4, Scheme::SemiImplicit)?;
    let fine = oracle_compare(&oracle_curve(5e-3)?, v, 0.01, 2.5e-5, Scheme::SemiImplicit)?;
    let ratio = coarse.hausdorff / fine.hausdorff;
    Ok(outcome(
        "d <= 1e-3 at t=0.01; ratio ~4",
        format!("{} / {} ratio {ratio:.2}", e(coarse.hausdorff), e(fine.hausdorff)),
        "1e-3, ratio in [3,5]",
        coarse.hausdorff <= 1e-3 && (3.0..=5.0).contains(&ratio),
    ))
}

// 0.70711 is the quoted five-digit reference value, not a stand-in for 1/√2
#[allow(clippy::approx_constant)]
fn hypercycle_law() -> Result<Outcome> {
    let start = Instant::now();
    let grid: Vec<f64> = (0..=10).map(|k| 0.02 * k as f64).collect();
    let law = hypercycle_curvature_law(-1.0, &grid, &OracleOptions::default())?;
    let t = start.elapsed();
    let worst = law.iter().map(|p| p.relative_error()).fold(0.0, f64::max);
    let k0 = law[0].predicted;
    let k2 = law[law.len() - 1].predicted;
    let printed = (k0 - 0.70711).abs() <= 1e-2 * 0.70711 && (k2 - 0.63354).abs() <= 1e-2 * 0.63354;
    Ok(outcome(
        "A=-1, k(0)=0.70711 k(0.2)=0.63354",
        format!("rel {} k {k0:.5}/{k2:.5} in {:.1}s", e(worst), t.as_secs_f64()),
        "1%, < 120 s",
        worst <= 1e-2 && printed && within(t, 120.0),
    ))
}

fn embeddedness() -> Result<Outcome> {
    let runs = acceptance_runs()?;
    let mut crossings = 0;
    let mut identity = 0.0f64;
    for r in &runs {
        crossings += embeddedness_audit(&r.curve).self_intersections.len();
        identity = identity.max(max_mu_identity_residual(&r.trajectory));
    }
    Ok(outcome(
        format!("0 crossings over {} curves; mu identity", runs.len()),
        format!("{crossings} / {}", e(identity)),
        "0 / 1e-8",
        crossings == 0 && identity <= 1e-8,
    ))
}

fn max_ambient(c: &CurveTrajectory) -> f64 {
    ambient_curvature_check(c).iter().map(|r| r.residual).fold(0.0, f64::max)
}

fn ambient_curvature() -> Result<Outcome> {
    let h = 0.01;
    let grid = |half: f64| (-(half / h).round() as i64..=(half / h).round() as i64).map(move |k| k as f64 * h);
    let geodesic = CurveTrajectory::from_frames(
        MinkowskiVector::E2,
        1.0,
        grid(3.0).map(|s| {
            let (t, x) = (MinkowskiVector::new(s.cosh(), 0.0, s.sinh()), MinkowskiVector::new(s.sinh(), 0.0, s.cosh()));
            (s, FrenetFrame::new(t, t.cross(x), x))
        }),
    );
    let horocycle = CurveTrajectory::from_frames(
        MinkowskiVector::E2,
        1.0,
        grid(3.0).map(|s| (s, horocycle_point(0.5, s).expect("varpi in range").1)),
    );
    let timelike = preset("fig5").expect("preset").run()?.curve;
    let (g, ho, ti) = (max_ambient(&geodesic), max_ambient(&horocycle), max_ambient(&timelike));
    Ok(outcome(
        "geodesic / horocycle / timelike",
        format!("{} / {} / {}", e(g), e(ho), e(ti)),
        "1e-6 / 1e-6 / 1e-4",
        g <= 1e-6 && ho <= 1e-6 && ti <= 1e-4,
    ))
}

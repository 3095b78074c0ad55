//! Four-panel SVG figures: the curve in the Poincaré disk, then τ, ν and μ
//! against arclength. Output is a pure function of its inputs.

use std::fmt::Write;

use serde::Serialize;

use crate::classify::CaseLabel;
use crate::disk::{project_vector, DiskPoint};
use crate::error::{Error, Result};
use crate::minkowski::{causal_type, inner, CausalType, MinkowskiVector, TOL_CAUSAL};
use crate::pipeline::SolitonRun;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quantity {
    Tau,
    Nu,
    Mu,
}

impl Quantity {
    fn symbol(self) -> &'static str {
        match self {
            Quantity::Tau => "τ",
            Quantity::Nu => "ν",
            Quantity::Mu => "μ",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Panel {
    DiskCurve,
    Graph(Quantity),
}

pub const LAYOUT: [Panel; 4] =
    [Panel::DiskCurve, Panel::Graph(Quantity::Tau), Panel::Graph(Quantity::Nu), Panel::Graph(Quantity::Mu)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Style {
    pub panel: f64,
    pub margin: f64,
    pub header: f64,
    pub curve_width: f64,
    pub axis_width: f64,
    pub geodesic_width: f64,
}

impl Default for Style {
    fn default() -> Self {
        Self { panel: 320.0, margin: 24.0, header: 36.0, curve_width: 1.6, axis_width: 0.8, geodesic_width: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Annotations {
    pub title: String,
    pub case_label: Option<CaseLabel>,
    pub vtilde: MinkowskiVector,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureSpec {
    pub panels: [Panel; 4],
    pub style: Style,
    pub annotations: Annotations,
}

impl FigureSpec {
    pub fn for_run(run: &SolitonRun, title: impl Into<String>, case_label: Option<CaseLabel>) -> Self {
        Self {
            panels: LAYOUT,
            style: Style::default(),
            annotations: Annotations { title: title.into(), case_label, vtilde: run.vtilde, a: run.trajectory.a },
        }
    }
}

/// Curve points in disk coordinates.
pub fn disk_path(run: &SolitonRun) -> Vec<DiskPoint> {
    run.curve.samples.iter().map(|c| project_vector(c.frame.x)).collect()
}

/// `Γ_v = {X : ⟨X, v⟩ = 0}` for spacelike `v`, sampled as
/// `cosh r e + sinh r f` with `e`, `f` orthonormal in `v^⊥`.
pub fn geodesic_gamma(v: MinkowskiVector, r_max: f64, n: usize) -> Option<Vec<DiskPoint>> {
    if causal_type(v, TOL_CAUSAL).ok()? != CausalType::Spacelike {
        return None;
    }
    let vh = v / v.norm_sq().sqrt();
    let p = MinkowskiVector::E3 - vh * inner(MinkowskiVector::E3, vh);
    let e = p / (-p.norm_sq()).sqrt();
    let f = vh.cross(e);
    let f = f / f.norm_sq().sqrt();
    Some(
        (0..=n)
            .map(|i| {
                let r = -r_max + 2.0 * r_max * i as f64 / n as f64;
                project_vector(e * r.cosh() + f * r.sinh())
            })
            .collect(),
    )
}

pub fn render_figure(spec: &FigureSpec, run: &SolitonRun) -> Result<String> {
    if run.curve.is_empty() || run.trajectory.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if spec.panels != LAYOUT {
        return Err(Error::InvalidParameter("figure panels must be disk, tau, nu, mu in that order".into()));
    }
    let st = &spec.style;
    let width = 4.0 * st.panel + 5.0 * st.margin;
    let height = st.panel + 2.0 * st.margin + st.header;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="12">"#,
        num(width),
        num(height),
        num(width),
        num(height)
    );
    let _ = writeln!(out, r#"<rect width="{}" height="{}" fill="white"/>"#, num(width), num(height));
    let an = &spec.annotations;
    let v = an.vtilde;
    let mut title =
        format!("{}   ṽ = ({}, {}, {})   a = {}", an.title, short(v.x), short(v.y), short(v.z), short(an.a));
    if let Some(label) = an.case_label {
        let _ = write!(title, "   {label}");
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="14">{}</text>"#,
        num(st.margin),
        num(st.margin),
        escape(&title)
    );

    for (k, panel) in spec.panels.iter().enumerate() {
        let x0 = st.margin + k as f64 * (st.panel + st.margin);
        let y0 = st.margin + st.header;
        match panel {
            Panel::DiskCurve => disk_panel(&mut out, st, x0, y0, run),
            Panel::Graph(q) => graph_panel(&mut out, st, x0, y0, run, *q),
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn disk_panel(out: &mut String, st: &Style, x0: f64, y0: f64, run: &SolitonRun) {
    let r = st.panel / 2.0;
    let (cx, cy) = (x0 + r, y0 + r);
    let map = |d: &DiskPoint| (cx + r * d.u, cy - r * d.w);
    let _ = writeln!(
        out,
        r#"<circle cx="{}" cy="{}" r="{}" fill="none" stroke="black" stroke-width="{}"/>"#,
        num(cx),
        num(cy),
        num(r),
        num(st.axis_width)
    );
    if let Some(gamma) = geodesic_gamma(run.velocity.v, 12.0, 480) {
        let pts: Vec<(f64, f64)> = gamma.iter().map(map).collect();
        polyline(out, &pts, "gray", st.geodesic_width, Some("4 3"));
    }
    let pts: Vec<(f64, f64)> = disk_path(run).iter().filter(|d| d.u.is_finite() && d.w.is_finite()).map(map).collect();
    polyline(out, &pts, "crimson", st.curve_width, None);
    let _ = writeln!(out, r#"<text x="{}" y="{}">Poincaré disk</text>"#, num(x0), num(y0 + st.panel + 16.0));
}

fn graph_panel(out: &mut String, st: &Style, x0: f64, y0: f64, run: &SolitonRun, q: Quantity) {
    let samples = &run.trajectory.samples;
    let value = |i: usize| {
        let s = samples[i].state;
        match q {
            Quantity::Tau => s.tau,
            Quantity::Nu => s.nu,
            Quantity::Mu => s.mu,
        }
    };
    let (s0, s1) = (samples[0].s, samples[samples.len() - 1].s);
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for i in 0..samples.len() {
        let y = value(i);
        if y.is_finite() {
            lo = lo.min(y);
            hi = hi.max(y);
        }
    }
    if hi - lo < 1e-12 {
        hi += 0.5;
        lo -= 0.5;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let sx = |s: f64| x0 + st.panel * (s - s0) / (s1 - s0).max(f64::MIN_POSITIVE);
    let sy = |y: f64| y0 + st.panel * (hi - y) / (hi - lo);

    let _ = writeln!(
        out,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black" stroke-width="{}"/>"#,
        num(x0),
        num(y0),
        num(st.panel),
        num(st.panel),
        num(st.axis_width)
    );
    let (zx, zy) = (sx(0.0_f64.clamp(s0, s1)), sy(0.0));
    let _ = writeln!(
        out,
        r#"<path d="M{} {}H{}M{} {}V{}" stroke="gray" stroke-width="{}"/>"#,
        num(x0),
        num(zy),
        num(x0 + st.panel),
        num(zx),
        num(y0),
        num(y0 + st.panel),
        num(st.axis_width)
    );
    let pts: Vec<(f64, f64)> =
        (0..samples.len()).filter(|&i| value(i).is_finite()).map(|i| (sx(samples[i].s), sy(value(i)))).collect();
    polyline(out, &pts, "navy", st.curve_width, None);
    let label = format!(
        "{}(s)   s ∈ [{}, {}]   range [{}, {}]",
        q.symbol(),
        short(s0),
        short(s1),
        short(lo + pad),
        short(hi - pad)
    );
    let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, num(x0), num(y0 + st.panel + 16.0), escape(&label));
}

/// Drops points closer than a quarter pixel to the last kept one.
fn polyline(out: &mut String, pts: &[(f64, f64)], color: &str, width: f64, dash: Option<&str>) {
    let mut kept: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for (i, &p) in pts.iter().enumerate() {
        let keep = match kept.last() {
            None => true,
            Some(&(x, y)) => (p.0 - x).hypot(p.1 - y) >= 0.25 || i + 1 == pts.len(),
        };
        if keep {
            kept.push(p);
        }
    }
    if kept.is_empty() {
        return;
    }
    let mut d = String::new();
    for (i, (x, y)) in kept.iter().enumerate() {
        let _ = write!(d, "{}{} {}", if i == 0 { "M" } else { "L" }, num(*x), num(*y));
    }
    let dash = dash.map(|s| format!(r#" stroke-dasharray="{s}""#)).unwrap_or_default();
    let _ = writeln!(out, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="{}"{dash}/>"#, num(width));
}

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn short(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

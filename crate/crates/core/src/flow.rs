//! Time evolution of curves: the isometry flow generated by `ṽ`, checks of
//! the curve shortening equation against it, and an independent
//! semi-discrete CSF solver used as an oracle.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::{fd4, CurveSample, CurveTrajectory};
use crate::minkowski::{hyperbolic_distance, one_parameter_subgroup, MinkowskiVector};

/// Explicit steps must satisfy `dt ≤ C_STAB · h²`.
pub const C_STAB: f64 = 0.25;
pub const DT_FD: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteCurve {
    pub points: Vec<MinkowskiVector>,
    pub closed: bool,
    pub t: f64,
}

impl DiscreteCurve {
    pub fn new(points: Vec<MinkowskiVector>, closed: bool) -> Result<Self> {
        for p in &points {
            if !p.is_finite() {
                return Err(Error::NonFinite("curve point"));
            }
            let residual = (p.norm_sq() + 1.0).abs();
            if residual > 1e-9 * p.z * p.z || p.z <= 0.0 {
                return Err(Error::OffHyperboloid { residual });
            }
        }
        Ok(Self { points, closed, t: 0.0 })
    }

    pub fn from_trajectory(curve: &CurveTrajectory) -> Self {
        Self { points: curve.points(), closed: false, t: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Hyperbolic lengths of consecutive segments (including the closing one).
    pub fn spacings(&self) -> Vec<f64> {
        let n = self.points.len();
        let mut out: Vec<f64> = self.points.windows(2).map(|w| hyperbolic_distance(w[0], w[1])).collect();
        if self.closed && n > 1 {
            out.push(hyperbolic_distance(self.points[n - 1], self.points[0]));
        }
        out
    }

    pub fn length(&self) -> f64 {
        self.spacings().iter().sum()
    }
}

/// Apply `exp(t B(ṽ))` to every point.
pub fn evolve_by_isometry(curve0: &DiscreteCurve, vtilde: MinkowskiVector, t: f64) -> DiscreteCurve {
    let g = one_parameter_subgroup(vtilde, t);
    DiscreteCurve {
        points: curve0.points.iter().map(|&p| g.apply(p)).collect(),
        closed: curve0.closed,
        t: curve0.t + t,
    }
}

/// Isometry image of a reconstructed curve, frames included.
pub fn evolve_trajectory(curve: &CurveTrajectory, vtilde: MinkowskiVector, t: f64) -> CurveTrajectory {
    let g = one_parameter_subgroup(vtilde, t);
    CurveTrajectory {
        v: curve.v,
        a: curve.a,
        samples: curve.samples.iter().map(|p| CurveSample { frame: g.apply_frame(&p.frame), ..*p }).collect(),
        max_precorrection_residual: curve.max_precorrection_residual,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CsfResidual {
    /// `max |⟨∂X/∂t, N⟩ - κ_g|`, with `κ_g = ⟨dT/ds, N⟩` measured on the curve.
    pub max_residual: f64,
    /// `max |⟨∂X/∂t, N⟩ - ⟨T, ṽ⟩|`.
    pub max_identity_residual: f64,
    pub worst_s: f64,
}

/// Compare the normal velocity of the isometry flow (central differences in
/// `t`) with the geodesic curvature measured from the frame data (fourth
/// order in `s`). Samples must be uniformly spaced.
pub fn csf_residual(curve0: &CurveTrajectory, vtilde: MinkowskiVector, dt_fd: f64) -> Result<CsfResidual> {
    let n = curve0.samples.len();
    if n < 5 {
        return Err(Error::TooFewPoints { needed: 5, got: n });
    }
    let h = (curve0.samples[n - 1].s - curve0.samples[0].s) / (n - 1) as f64;
    let ts: Vec<MinkowskiVector> = curve0.samples.iter().map(|p| p.frame.t).collect();
    let plus = one_parameter_subgroup(vtilde, dt_fd);
    let minus = one_parameter_subgroup(vtilde, -dt_fd);
    let mut out = CsfResidual { max_residual: 0.0, max_identity_residual: 0.0, worst_s: curve0.samples[0].s };
    for (i, p) in curve0.samples.iter().enumerate() {
        let f = &p.frame;
        let vel = (plus.apply(f.x) - minus.apply(f.x)) / (2.0 * dt_fd);
        let normal_speed = vel.inner(f.n);
        let kappa = fd4(&ts, h, i).inner(f.n);
        let r = (normal_speed - kappa).abs();
        if r > out.max_residual {
            out.max_residual = r;
            out.worst_s = p.s;
        }
        out.max_identity_residual = out.max_identity_residual.max((normal_speed - f.t.inner(vtilde)).abs());
    }
    Ok(out)
}

/// Same identity for an arbitrary smooth curve: `⟨∂X/∂t, N⟩ = ⟨T, ṽ⟩` with
/// `T`, `N` from finite differences of the points. Returns the max residual.
pub fn isometry_normal_speed_identity(curve: &DiscreteCurve, vtilde: MinkowskiVector, dt_fd: f64) -> Result<f64> {
    let geo = discrete_curvature(curve)?;
    let plus = evolve_by_isometry(curve, vtilde, dt_fd);
    let minus = evolve_by_isometry(curve, vtilde, -dt_fd);
    Ok(geo
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let vel = (plus.points[i] - minus.points[i]) / (2.0 * dt_fd);
            (vel.inner(g.n) - g.t.inner(vtilde)).abs()
        })
        .fold(0.0, f64::max))
}

/// Finite-difference weights for derivatives `0..=m` at `z` on `nodes`.
fn fornberg(z: f64, nodes: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] *= c4 / c3;
        }
        c1 = c2;
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscreteGeometry {
    /// Signed geodesic curvature, `⟨X'' - X, N⟩`.
    pub kappa: f64,
    pub t: MinkowskiVector,
    pub n: MinkowskiVector,
    /// Cumulative hyperbolic arclength of the node.
    pub s: f64,
}

/// Geodesic curvature from five-point finite differences in ambient
/// coordinates against hyperbolic arclength. `κN = X'' - X` after removing
/// the `X` and `T` components; `N = T ⊠ X` fixes the sign. Chord lengths
/// understate arclength by `κ²d³/24`; one correction pass removes that bias.
pub fn discrete_curvature(curve: &DiscreteCurve) -> Result<Vec<DiscreteGeometry>> {
    let n = curve.points.len();
    if n < 5 {
        return Err(Error::TooFewPoints { needed: 5, got: n });
    }
    let chords = curve.spacings();
    let first = curvature_pass(curve, &chords)?;
    let corrected: Vec<f64> = chords
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let k = 0.5 * (first[i].kappa + first[(i + 1) % n].kappa);
            d * (1.0 + k * k * d * d / 24.0)
        })
        .collect();
    curvature_pass(curve, &corrected)
}

fn curvature_pass(curve: &DiscreteCurve, sp: &[f64]) -> Result<Vec<DiscreteGeometry>> {
    let n = curve.points.len();
    let mut s = vec![0.0; n];
    for i in 1..n {
        s[i] = s[i - 1] + sp[i - 1];
    }
    let total: f64 = sp.iter().sum();
    let pts = &curve.points;
    (0..n)
        .map(|i| {
            let (nodes, vals): (Vec<f64>, Vec<MinkowskiVector>) = if curve.closed {
                (-2i64..=2)
                    .map(|k| {
                        let j = i as i64 + k;
                        let wrapped = j.rem_euclid(n as i64) as usize;
                        let shift = if j < 0 {
                            -total
                        } else if j >= n as i64 {
                            total
                        } else {
                            0.0
                        };
                        (s[wrapped] + shift, pts[wrapped])
                    })
                    .unzip()
            } else {
                let lo = i.saturating_sub(2).min(n - 5);
                (lo..lo + 5).map(|j| (s[j], pts[j])).unzip()
            };
            let w = fornberg(s[i], &nodes, 2);
            let mut d1 = MinkowskiVector::ZERO;
            let mut d2 = MinkowskiVector::ZERO;
            for (k, v) in vals.iter().enumerate() {
                d1 += *v * w[1][k];
                d2 += *v * w[2][k];
            }
            let x = pts[i];
            let mut t = d1 + x * d1.inner(x);
            let tn = t.norm_sq();
            if !(tn > 0.0) {
                return Err(Error::DegenerateFrame("zero tangent in discrete curvature"));
            }
            t = t / tn.sqrt();
            let k = d2 - x;
            let k = k + x * k.inner(x) - t * k.inner(t);
            let nv = t.cross(x);
            Ok(DiscreteGeometry { kappa: k.inner(nv), t, n: nv, s: s[i] })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scheme {
    /// Backward Euler in the arclength Laplacian; unconditionally stable.
    SemiImplicit,
    /// Forward Euler; requires `dt ≤ C_STAB · h_min²`.
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    /// Endpoints placed at the given positions after the step.
    Pinned { first: MinkowskiVector, last: MinkowskiVector },
    /// Endpoints follow their neighbours.
    Free,
}

fn to_sheet(p: MinkowskiVector) -> Result<MinkowskiVector> {
    let q = -p.norm_sq();
    if !(q > 0.0) || p.z <= 0.0 || !p.is_finite() {
        return Err(Error::OffHyperboloid { residual: (q - 1.0).abs() });
    }
    Ok(p / q.sqrt())
}

/// Thomas algorithm for a tridiagonal system with vector right-hand side.
fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[MinkowskiVector]) -> Vec<MinkowskiVector> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![MinkowskiVector::ZERO; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / m } else { 0.0 };
        d[i] = (rhs[i] - d[i - 1] * lower[i]) / m;
    }
    for i in (0..n - 1).rev() {
        d[i] = d[i] - d[i + 1] * c[i];
    }
    d
}

/// Cyclic tridiagonal solve via Sherman-Morrison.
fn solve_cyclic(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[MinkowskiVector]) -> Vec<MinkowskiVector> {
    let n = diag.len();
    let alpha = upper[n - 1];
    let beta = lower[0];
    let gamma = -diag[0];
    let mut bb = diag.to_vec();
    bb[0] = diag[0] - gamma;
    bb[n - 1] = diag[n - 1] - alpha * beta / gamma;
    let x = solve_tridiagonal(lower, &bb, upper, rhs);
    let mut u = vec![MinkowskiVector::ZERO; n];
    u[0] = MinkowskiVector::new(gamma, gamma, gamma);
    u[n - 1] = MinkowskiVector::new(alpha, alpha, alpha);
    let z = solve_tridiagonal(lower, &bb, upper, &u);
    let factor = |x0: f64, xn: f64, z0: f64, zn: f64| (x0 + beta * xn / gamma) / (1.0 + z0 + beta * zn / gamma);
    let fx = factor(x[0].x, x[n - 1].x, z[0].x, z[n - 1].x);
    let fy = factor(x[0].y, x[n - 1].y, z[0].y, z[n - 1].y);
    let fz = factor(x[0].z, x[n - 1].z, z[0].z, z[n - 1].z);
    x.iter().zip(&z).map(|(a, b)| MinkowskiVector::new(a.x - fx * b.x, a.y - fy * b.y, a.z - fz * b.z)).collect()
}

/// One step of `X_t = X_ss - X` (which is `κ_g N` for arclength `s`), then
/// projection onto the sheet and, if any spacing has left
/// `[h̄/2, 3h̄/2]`, uniform resampling.
pub fn discrete_csf_step(curve: &DiscreteCurve, dt: f64, boundary: &Boundary, scheme: Scheme) -> Result<DiscreteCurve> {
    let n = curve.points.len();
    let needed = if curve.closed { 4 } else { 3 };
    if n < needed {
        return Err(Error::TooFewPoints { needed, got: n });
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let sp = curve.spacings();
    let pts = &curve.points;
    // (h_{i-1}, h_i) around node i
    let gaps = |i: usize| -> Option<(f64, f64)> {
        if curve.closed {
            Some((sp[(i + n - 1) % n], sp[i % n]))
        } else if i == 0 || i + 1 == n {
            None
        } else {
            Some((sp[i - 1], sp[i]))
        }
    };
    let nb = |i: usize, k: i64| pts[(i as i64 + k).rem_euclid(n as i64) as usize];

    let mut next: Vec<MinkowskiVector> = match scheme {
        Scheme::Explicit => {
            let h_min = sp.iter().cloned().fold(f64::INFINITY, f64::min);
            let bound = C_STAB * h_min * h_min;
            if dt > bound {
                return Err(Error::StabilityViolation { dt, bound });
            }
            let mut vel = vec![MinkowskiVector::ZERO; n];
            for (i, v) in vel.iter_mut().enumerate() {
                if let Some((hl, hr)) = gaps(i) {
                    let x = pts[i];
                    let lap = ((nb(i, 1) - x) / hr - (x - nb(i, -1)) / hl) * (2.0 / (hl + hr));
                    let tang = nb(i, 1) - nb(i, -1);
                    let tang = tang + x * tang.inner(x);
                    let tang = tang / tang.norm_sq().sqrt();
                    let k = lap - x;
                    // normal part only
                    *v = k + x * k.inner(x) - tang * k.inner(tang);
                }
            }
            if !curve.closed {
                vel[0] = vel[1];
                vel[n - 1] = vel[n - 2];
            }
            pts.iter().zip(&vel).map(|(&x, &v)| x + v * dt).collect()
        }
        Scheme::SemiImplicit => {
            let mut lower = vec![0.0; n];
            let mut diag = vec![1.0; n];
            let mut upper = vec![0.0; n];
            let rhs = pts.clone();
            for i in 0..n {
                match gaps(i) {
                    Some((hl, hr)) => {
                        let c = 2.0 * dt / (hl + hr);
                        lower[i] = -c / hl;
                        upper[i] = -c / hr;
                        diag[i] = 1.0 + dt + c / hl + c / hr;
                    }
                    None => {
                        // open ends: the end moves rigidly with its neighbour
                        if i == 0 {
                            upper[0] = -1.0;
                        } else {
                            lower[i] = -1.0;
                        }
                    }
                }
            }
            if curve.closed {
                solve_cyclic(&lower, &diag, &upper, &rhs)
            } else {
                let mut rhs = rhs;
                rhs[0] = pts[0] - pts[1];
                rhs[n - 1] = pts[n - 1] - pts[n - 2];
                solve_tridiagonal(&lower, &diag, &upper, &rhs)
            }
        }
    };

    if let (Boundary::Pinned { first, last }, false) = (boundary, curve.closed) {
        next[0] = *first;
        next[n - 1] = *last;
    }
    let next = next.into_iter().map(to_sheet).collect::<Result<Vec<_>>>()?;
    let mut out = DiscreteCurve { points: next, closed: curve.closed, t: curve.t + dt };
    let sp = out.spacings();
    let mean = sp.iter().sum::<f64>() / sp.len() as f64;
    if sp.iter().any(|&h| h < 0.5 * mean || h > 1.5 * mean) {
        out = resample_uniform(&out)?;
    }
    Ok(out)
}

/// Resample to uniform hyperbolic arclength with the same node count,
/// interpolating with Catmull-Rom in ambient coordinates and projecting.
pub fn resample_uniform(curve: &DiscreteCurve) -> Result<DiscreteCurve> {
    let n = curve.points.len();
    if n < 4 {
        return Err(Error::TooFewPoints { needed: 4, got: n });
    }
    let sp = curve.spacings();
    let mut s = vec![0.0; sp.len() + 1];
    for i in 0..sp.len() {
        s[i + 1] = s[i] + sp[i];
    }
    let total = s[sp.len()];
    let pts = &curve.points;
    let m = sp.len();
    let at = |k: i64| -> MinkowskiVector {
        if curve.closed {
            pts[k.rem_euclid(n as i64) as usize]
        } else {
            pts[k.clamp(0, n as i64 - 1) as usize]
        }
    };
    let count = if curve.closed { n } else { n - 1 };
    let mut out = Vec::with_capacity(n);
    let mut seg = 0usize;
    for k in 0..n {
        let target = total * k as f64 / count as f64;
        if !curve.closed && k == n - 1 {
            out.push(pts[n - 1]);
            break;
        }
        while seg + 1 < m && s[seg + 1] < target {
            seg += 1;
        }
        let u = if sp[seg] > 0.0 { ((target - s[seg]) / sp[seg]).clamp(0.0, 1.0) } else { 0.0 };
        let (p0, p1, p2, p3) = (at(seg as i64 - 1), at(seg as i64), at(seg as i64 + 1), at(seg as i64 + 2));
        let u2 = u * u;
        let u3 = u2 * u;
        let p = (p1 * 2.0
            + (p2 - p0) * u
            + (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * u2
            + (p1 * 3.0 - p0 - p2 * 3.0 + p3) * u3)
            * 0.5;
        out.push(to_sheet(p)?);
    }
    Ok(DiscreteCurve { points: out, closed: curve.closed, t: curve.t })
}

/// Distance from `x` to the geodesic segment `[p, q]`.
pub fn point_segment_distance(x: MinkowskiVector, p: MinkowskiVector, q: MinkowskiVector) -> f64 {
    let nrm = p.cross(q);
    let nn = nrm.norm_sq();
    let ends = hyperbolic_distance(x, p).min(hyperbolic_distance(x, q));
    if !(nn > 0.0) {
        return ends;
    }
    let nh = nrm / nn.sqrt();
    let c = x.inner(nh);
    let foot = x - nh * c;
    // foot lies between p and q iff it splits the oriented angle
    let inside = p.cross(foot).inner(nh) >= 0.0 && foot.cross(q).inner(nh) >= 0.0;
    if inside {
        c.abs().asinh().min(ends)
    } else {
        ends
    }
}

fn directed_hausdorff(a: &[MinkowskiVector], b: &[MinkowskiVector]) -> f64 {
    a.iter()
        .map(|&x| {
            if b.len() == 1 {
                return hyperbolic_distance(x, b[0]);
            }
            b.windows(2).map(|w| point_segment_distance(x, w[0], w[1])).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between two polylines of geodesic segments.
pub fn hausdorff_distance(a: &[MinkowskiVector], b: &[MinkowskiVector]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

/// Hausdorff distance restricted to the middle fraction of each polyline
/// (points from the middle, distances to the whole of the other curve).
pub fn middle_hausdorff(a: &[MinkowskiVector], b: &[MinkowskiVector], keep: f64) -> f64 {
    let mid = |v: &[MinkowskiVector]| -> Vec<MinkowskiVector> {
        let n = v.len();
        let drop = ((1.0 - keep) * 0.5 * n as f64).floor() as usize;
        v[drop..n - drop].to_vec()
    };
    directed_hausdorff(&mid(a), b).max(directed_hausdorff(&mid(b), a))
}

/// Arclength and curvature profile of a curve, with the origin moved to the
/// zero of `μ = ⟨X, ṽ⟩` (or its extremum when `μ` keeps one sign).
fn registered_profile(curve: &DiscreteCurve, vtilde: MinkowskiVector) -> Result<(Vec<f64>, Vec<f64>)> {
    let geo = discrete_curvature(curve)?;
    let mu: Vec<f64> = curve.points.iter().map(|p| p.inner(vtilde)).collect();
    let s: Vec<f64> = geo.iter().map(|g| g.s).collect();
    let kappa: Vec<f64> = geo.iter().map(|g| g.kappa).collect();
    let scale = mu.iter().map(|m| m.abs()).fold(0.0, f64::max);
    let marker = if scale < 1e-12 {
        0.0
    } else if let Some(i) = mu.windows(2).position(|w| w[0] == 0.0 || w[0].signum() != w[1].signum()) {
        let (m0, m1) = (mu[i], mu[i + 1]);
        if m0 == m1 {
            s[i]
        } else {
            s[i] + (s[i + 1] - s[i]) * m0 / (m0 - m1)
        }
    } else {
        let sign = mu[0].signum();
        let i = (0..mu.len()).min_by(|&a, &b| (sign * mu[a]).total_cmp(&(sign * mu[b]))).unwrap();
        if i == 0 || i + 1 == mu.len() {
            s[i]
        } else {
            // vertex of the parabola through three samples
            let (y0, y1, y2) = (mu[i - 1], mu[i], mu[i + 1]);
            let (h0, h1) = (s[i] - s[i - 1], s[i + 1] - s[i]);
            let d = h1 * (y0 - y1) + h0 * (y2 - y1);
            if d == 0.0 {
                s[i]
            } else {
                s[i] + 0.5 * (h1 * h1 * (y0 - y1) - h0 * h0 * (y2 - y1)) / d
            }
        }
    };
    Ok((s.iter().map(|x| x - marker).collect(), kappa))
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    if x < xs[0] || x > xs[xs.len() - 1] {
        return None;
    }
    let i = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[i - 1], xs[i]);
    let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
    Some(ys[i - 1] + t * (ys[i] - ys[i - 1]))
}

/// `sup |κ_g(s, t) - κ_g(s, 0)|` over the middle half of the arc, after
/// re-registering each slice on the `μ` marker.
pub fn curvature_profile_invariance(curve0: &DiscreteCurve, vtilde: MinkowskiVector, times: &[f64]) -> Result<f64> {
    let (s0, k0) = registered_profile(curve0, vtilde)?;
    let (lo, hi) = (s0[0], s0[s0.len() - 1]);
    let (a, b) = (lo + 0.25 * (hi - lo), lo + 0.75 * (hi - lo));
    let mut worst: f64 = 0.0;
    for &t in times {
        let (st, kt) = registered_profile(&evolve_by_isometry(curve0, vtilde, t), vtilde)?;
        for (x, k) in s0.iter().zip(&k0).filter(|(x, _)| **x >= a && **x <= b) {
            match interp(&st, &kt, *x) {
                Some(v) => worst = worst.max((v - k).abs()),
                None => {
                    return Err(Error::Inconsistent(format!("registered profile at t = {t} does not cover s = {x}")))
                }
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowDiagnostic {
    pub t: f64,
    pub csf_residual: f64,
    pub curvature_profile_distance: f64,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowRun {
    pub initial: DiscreteCurve,
    pub vtilde: MinkowskiVector,
    pub diagnostics: Vec<FlowDiagnostic>,
}

impl FlowRun {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,csf_residual,curvature_profile_distance,length\n");
        for d in &self.diagnostics {
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e}",
                d.t, d.csf_residual, d.curvature_profile_distance, d.length
            )
            .unwrap();
        }
        out
    }

    pub fn max_csf_residual(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.csf_residual).fold(0.0, f64::max)
    }

    pub fn max_profile_distance(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.curvature_profile_distance).fold(0.0, f64::max)
    }
}

/// Evolve a reconstructed soliton by its isometry flow and record the CSF
/// residual, curvature-profile distance and length at each output time.
pub fn flow_run(curve: &CurveTrajectory, vtilde: MinkowskiVector, times: &[f64], dt_fd: f64) -> Result<FlowRun> {
    let initial = DiscreteCurve::from_trajectory(curve);
    let diagnostics = times
        .iter()
        .map(|&t| {
            let moved = evolve_trajectory(curve, vtilde, t);
            Ok(FlowDiagnostic {
                t,
                csf_residual: csf_residual(&moved, vtilde, dt_fd)?.max_residual,
                curvature_profile_distance: curvature_profile_invariance(&initial, vtilde, &[t])?,
                length: evolve_by_isometry(&initial, vtilde, t).length(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FlowRun { initial, vtilde, diagnostics })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleReport {
    pub t: f64,
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
    pub hausdorff: f64,
}

/// Run the semi-discrete solver from a reconstructed soliton (sampled at the
/// spacing `h` of its samples) with ends pinned to the isometry image, and
/// measure the Hausdorff distance to the isometry image at `t_end` over the
/// middle half of the arc.
pub fn oracle_compare(
    curve: &CurveTrajectory,
    vtilde: MinkowskiVector,
    t_end: f64,
    dt: f64,
    scheme: Scheme,
) -> Result<OracleReport> {
    let initial = DiscreteCurve::from_trajectory(curve);
    let n = initial.len();
    if n < 5 {
        return Err(Error::TooFewPoints { needed: 5, got: n });
    }
    let h = (curve.samples[n - 1].s - curve.samples[0].s) / (n - 1) as f64;
    let steps = (t_end / dt).round() as usize;
    let (p0, p1) = (initial.points[0], initial.points[n - 1]);
    let mut c = initial.clone();
    for k in 1..=steps {
        let g = one_parameter_subgroup(vtilde, k as f64 * dt);
        c = discrete_csf_step(&c, dt, &Boundary::Pinned { first: g.apply(p0), last: g.apply(p1) }, scheme)?;
    }
    let reference = evolve_by_isometry(&initial, vtilde, steps as f64 * dt);
    Ok(OracleReport {
        t: steps as f64 * dt,
        h,
        dt,
        steps,
        hausdorff: middle_hausdorff(&c.points, &reference.points, 0.5),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LawPoint {
    pub t: f64,
    pub simulated: f64,
    pub predicted: f64,
}

impl LawPoint {
    pub fn relative_error(&self) -> f64 {
        ((self.simulated - self.predicted) / self.predicted).abs()
    }
}

/// `κ_g(t) = 1 / sqrt(1 - A e^{2t})`.
pub fn predicted_curvature(a_const: f64, t: f64) -> f64 {
    1.0 / (1.0 - a_const * (2.0 * t).exp()).sqrt()
}

/// Exact CSF family with curvature `1/sqrt(1 - A e^{2t})`: equidistant
/// curves for `A < 0` (`sinh r = e^{-t}/sqrt(-A)`), a horocycle for `A = 0`
/// and geodesic circles for `A > 0` (`cosh R = e^{-t}/sqrt(A)`). `u` is
/// arclength at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantCurvatureFamily {
    pub a_const: f64,
}

impl ConstantCurvatureFamily {
    pub fn closed(&self) -> bool {
        self.a_const > 0.0
    }

    /// Distance parameter (`r` or `R`) at time `t`; unused for `A = 0`.
    fn radius(&self, t: f64) -> f64 {
        let a = self.a_const;
        if a < 0.0 {
            ((-t).exp() / (-a).sqrt()).asinh()
        } else {
            ((-t).exp() / a.sqrt()).acosh()
        }
    }

    /// Speed `|dX/du|` at `t = 0`, so that `u / speed` is the native parameter.
    fn speed0(&self) -> f64 {
        let a = self.a_const;
        if a < 0.0 {
            self.radius(0.0).cosh()
        } else if a > 0.0 {
            self.radius(0.0).sinh()
        } else {
            1.0
        }
    }

    pub fn point(&self, t: f64, u: f64) -> MinkowskiVector {
        let a = self.a_const;
        let w = u / self.speed0();
        if a < 0.0 {
            let r = self.radius(t);
            MinkowskiVector::new(r.sinh(), r.cosh() * w.sinh(), r.cosh() * w.cosh())
        } else if a > 0.0 {
            let r = self.radius(t);
            MinkowskiVector::new(r.sinh() * w.cos(), r.sinh() * w.sin(), r.cosh())
        } else {
            // the horocycle is a soliton for ṽ = e₂: its isometry image
            // differs from the normal flow only by reparametrization
            let g = one_parameter_subgroup(MinkowskiVector::E2, t);
            let (x, _) = crate::frame::horocycle_point(0.5, u).expect("valid parameter");
            g.apply(x.vector())
        }
    }

    pub fn circumference0(&self) -> f64 {
        std::f64::consts::TAU * self.radius(0.0).sinh()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub h: f64,
    pub dt: f64,
    /// Arclength of the open window (ignored for closed circles).
    pub length: f64,
    pub scheme: Scheme,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { h: 5e-3, dt: 1e-5, length: 3.0, scheme: Scheme::SemiImplicit }
    }
}

/// Simulate the exact constant-curvature curve with `κ_g(0) = 1/sqrt(1-A)`
/// under the semi-discrete flow (ends pinned to the exact family) and report
/// the mean interior curvature against the predicted law at each grid time.
pub fn hypercycle_curvature_law(a_const: f64, t_grid: &[f64], opts: &OracleOptions) -> Result<Vec<LawPoint>> {
    if !a_const.is_finite() || !(opts.h > 0.0) || !(opts.dt > 0.0) {
        return Err(Error::InvalidParameter("A, h and dt must be finite with h, dt > 0".into()));
    }
    for &t in t_grid {
        if 1.0 - a_const * (2.0 * t).exp() <= 0.0 {
            return Err(Error::BlowupWindow { t });
        }
    }
    let fam = ConstantCurvatureFamily { a_const };
    let (curve0, u_ends) = if fam.closed() {
        let l = fam.circumference0();
        let n = (l / opts.h).round().max(8.0) as usize;
        let pts = (0..n).map(|k| fam.point(0.0, l * k as f64 / n as f64)).collect();
        (DiscreteCurve { points: pts, closed: true, t: 0.0 }, None)
    } else {
        let n = (opts.length / opts.h).round() as usize + 1;
        let half = 0.5 * opts.length;
        let pts = (0..n).map(|k| fam.point(0.0, -half + opts.length * k as f64 / (n - 1) as f64)).collect();
        (DiscreteCurve { points: pts, closed: false, t: 0.0 }, Some(half))
    };

    let mut grid: Vec<f64> = t_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(grid.len());
    let mut c = curve0;
    let mut step = 0usize;
    for &t in &grid {
        let target = (t / opts.dt).round() as usize;
        while step < target {
            step += 1;
            let tn = step as f64 * opts.dt;
            let boundary = match u_ends {
                Some(half) => Boundary::Pinned { first: fam.point(tn, -half), last: fam.point(tn, half) },
                None => Boundary::Free,
            };
            c = discrete_csf_step(&c, opts.dt, &boundary, opts.scheme)?;
        }
        let geo = discrete_curvature(&c)?;
        let n = geo.len();
        let interior: Vec<f64> = if c.closed {
            geo.iter().map(|g| g.kappa.abs()).collect()
        } else {
            geo[n / 4..n - n / 4].iter().map(|g| g.kappa.abs()).collect()
        };
        let simulated = interior.iter().sum::<f64>() / interior.len() as f64;
        out.push(LawPoint { t, simulated, predicted: predicted_curvature(a_const, t) });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{horocycle_point, reconstruct_soliton, Hypercycle};
    use crate::minkowski::{rot_z, FrenetFrame, HyperboloidPoint};
    use crate::soliton::{integrate, SolitonParams, SolitonState};
    use proptest::prelude::*;

    fn v3(x: f64, y: f64, z: f64) -> MinkowskiVector {
        MinkowskiVector::new(x, y, z)
    }

    fn horocycle_traj(half: f64, h: f64) -> CurveTrajectory {
        let n = (half / h).round() as i64;
        CurveTrajectory::from_frames(
            v3(0.0, 1.0, 0.0),
            1.0,
            (-n..=n).map(|k| {
                let s = k as f64 * h;
                (s, horocycle_point(0.5, s).unwrap().1)
            }),
        )
    }

    fn geodesic_curve(half: f64, h: f64) -> DiscreteCurve {
        let n = (half / h).round() as i64;
        let pts = (-n..=n).map(|k| {
            let s = k as f64 * h;
            v3(s.sinh(), 0.0, s.cosh())
        });
        DiscreteCurve::new(pts.collect(), false).unwrap()
    }

    fn fig1(s_max: f64, ds: f64) -> CurveTrajectory {
        let p = SolitonParams::symmetric(1.0, 1, s_max).with_ds(ds);
        let tr = integrate(SolitonState::new(0.0, 1.25f64.sqrt(), 0.5), &p).unwrap();
        reconstruct_soliton(v3(0.0, 1.0, 0.0), &tr, &p).unwrap()
    }

    #[test]
    fn isometry_examples() {
        let c = DiscreteCurve::from_trajectory(&horocycle_traj(3.0, 0.1));
        assert_eq!(evolve_by_isometry(&c, v3(0.3, -0.2, 0.5), 0.0).points, c.points);
        let rotated = evolve_by_isometry(&c, v3(0.0, 0.0, 1.0), std::f64::consts::FRAC_PI_2);
        let r = rot_z(std::f64::consts::FRAC_PI_2);
        for (p, q) in rotated.points.iter().zip(&c.points) {
            assert!(p.max_abs_diff(r.apply(*q)) < 1e-12 * q.z);
        }
        let moved = evolve_by_isometry(&c, v3(0.0, 1.0, 0.0), 1.0);
        let k0 = discrete_curvature(&c).unwrap();
        let k1 = discrete_curvature(&moved).unwrap();
        for (a, b) in k0.iter().zip(&k1) {
            assert!((a.kappa - b.kappa).abs() < 1e-9);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn isometry_preserves_distances(vx in -1.0f64..1.0, vy in -1.0f64..1.0, vz in -1.0f64..1.0, t in -1.5f64..1.5,
                                        xs in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 6)) {
            let pts: Vec<_> = xs.iter().map(|&(x, y)| HyperboloidPoint::from_xy(x, y).vector()).collect();
            let c = DiscreteCurve::new(pts, false).unwrap();
            let m = evolve_by_isometry(&c, v3(vx, vy, vz), t);
            for i in 0..c.len() {
                for j in 0..c.len() {
                    let d0 = hyperbolic_distance(c.points[i], c.points[j]);
                    let d1 = hyperbolic_distance(m.points[i], m.points[j]);
                    prop_assert!((d0 - d1).abs() < 1e-10 * (1.0 + d0), "{d0} {d1}");
                }
            }
        }
    }

    #[test]
    fn csf_residual_examples() {
        let r = csf_residual(&horocycle_traj(10.0, 0.01), v3(0.0, 1.0, 0.0), DT_FD).unwrap();
        assert!(r.max_residual <= 1e-6, "{r:?}");

        // geodesic x = 0 is orthogonal to v = e₁; any multiple of e₁ gives zero
        let geo = CurveTrajectory::from_frames(
            v3(1.0, 0.0, 0.0),
            2.0,
            (-500..=500).map(|k| {
                let s = k as f64 * 0.01;
                let x = v3(0.0, s.sinh(), s.cosh());
                let t = v3(0.0, s.cosh(), s.sinh());
                (s, FrenetFrame::new(t, t.cross(x), x))
            }),
        );
        let r = csf_residual(&geo, v3(2.0, 0.0, 0.0), DT_FD).unwrap();
        assert!(r.max_residual < 1e-8 && r.max_identity_residual < 1e-8, "{r:?}");

        let vt = v3(0.0, 0.0, 1.0);
        let p = SolitonParams::symmetric(1.0, -1, 10.0);
        let tr = integrate(SolitonState::new(0.0, 0.0, -1.0), &p).unwrap();
        let c = reconstruct_soliton(vt, &tr, &p).unwrap();
        let r = csf_residual(&c, vt, DT_FD).unwrap();
        assert!(r.max_residual <= 1e-5, "{r:?}");
    }

    #[test]
    fn normal_speed_identity_on_a_random_curve() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let coeffs: Vec<f64> = (0..6).map(|_| rng.random_range(-0.5..0.5)).collect();
        let pts = (0..=800).map(|k| {
            let u = -2.0 + 4.0 * k as f64 / 800.0;
            let x = u + coeffs[0] * (2.0 * u).sin() + coeffs[1] * u * u;
            let y = coeffs[2] * u + coeffs[3] * (1.5 * u).cos() + coeffs[4] * u * u * u;
            HyperboloidPoint::from_xy(x, y).vector()
        });
        let c = DiscreteCurve::new(pts.collect(), false).unwrap();
        for vt in [v3(0.3, -0.7, 0.2), v3(0.1, 0.2, 1.1), v3(0.0, 1.0, 1.0)] {
            let r = isometry_normal_speed_identity(&c, vt, DT_FD).unwrap();
            assert!(r < 1e-7, "{vt:?}: {r}");
        }
    }

    #[test]
    fn profile_invariance_examples() {
        let horo = DiscreteCurve::from_trajectory(&horocycle_traj(8.0, 0.01));
        let times: Vec<f64> = (1..=10).map(|k| 0.1 * k as f64).collect();
        assert!(curvature_profile_invariance(&horo, v3(0.0, 1.0, 0.0), &times).unwrap() <= 1e-5);

        let geo = geodesic_curve(4.0, 0.01);
        let d = curvature_profile_invariance(&geo, v3(0.0, 1.0, 0.0), &[0.2, 0.7]).unwrap();
        assert!(d < 1e-9, "{d}");

        let c = DiscreteCurve::from_trajectory(&fig1(5.0, 0.01));
        let times: Vec<f64> = (0..=10).map(|k| 0.05 * k as f64).collect();
        assert!(curvature_profile_invariance(&c, v3(0.0, 1.0, 0.0), &times).unwrap() <= 1e-4);
    }

    #[test]
    fn discrete_curvature_examples() {
        let geo = discrete_curvature(&geodesic_curve(3.0, 0.01)).unwrap();
        assert!(geo.iter().all(|g| g.kappa.abs() <= 1e-6));

        let horo = discrete_curvature(&DiscreteCurve::from_trajectory(&horocycle_traj(5.0, 0.01))).unwrap();
        assert!(horo.iter().all(|g| (g.kappa - 1.0).abs() <= 1e-5));

        let hc = Hypercycle::new(0.3, 0.9).unwrap();
        let (lo, hi) = hc.window().unwrap();
        let pts: Vec<_> =
            (0..=600).map(|k| hc.point(lo + (hi - lo) * (0.3 + 0.4 * k as f64 / 600.0)).unwrap().vector()).collect();
        let g = discrete_curvature(&DiscreteCurve::new(pts, false).unwrap()).unwrap();
        let interior: Vec<f64> = g[5..g.len() - 5].iter().map(|g| g.kappa.abs()).collect();
        let mean = interior.iter().sum::<f64>() / interior.len() as f64;
        let var = interior.iter().map(|k| (k - mean).powi(2)).sum::<f64>() / interior.len() as f64;
        assert!(var <= 1e-6, "{var}");
        assert!((mean - hc.curvature()).abs() < 1e-4, "{mean} vs {}", hc.curvature());

        let few = DiscreteCurve::new(geodesic_curve(0.02, 0.01).points, false).unwrap();
        assert!(discrete_curvature(&few).is_ok());
        let four = DiscreteCurve::new(few.points[..4].to_vec(), false).unwrap();
        assert!(matches!(discrete_curvature(&four), Err(Error::TooFewPoints { needed: 5, got: 4 })));
    }

    #[test]
    fn fornberg_matches_central_stencil() {
        let w = fornberg(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let expect = [-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w[2].iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn geodesic_is_fixed_by_the_step() {
        let c = geodesic_curve(2.0, 0.01);
        let ends = Boundary::Pinned { first: c.points[0], last: c.points[c.len() - 1] };
        for (scheme, dt) in [(Scheme::SemiImplicit, 1e-4), (Scheme::Explicit, 2e-5)] {
            let next = discrete_csf_step(&c, dt, &ends, scheme).unwrap();
            // distance to the geodesic x = 0 ... plane y = 0
            let off = next.points.iter().map(|p| p.y.abs().asinh()).fold(0.0, f64::max);
            assert!(off <= 1e-10, "{scheme:?}: {off}");
            assert!(hausdorff_distance(&next.points, &c.points) <= 1e-10);
        }
    }

    #[test]
    fn explicit_step_enforces_stability() {
        let c = geodesic_curve(1.0, 0.01);
        let r = discrete_csf_step(&c, 1e-4, &Boundary::Free, Scheme::Explicit);
        assert!(matches!(r, Err(Error::StabilityViolation { .. })));
    }

    #[test]
    fn oracle_tracks_the_isometry_flow() {
        let c = fig1(4.0, 0.01);
        let r = oracle_compare(&c, v3(0.0, 1.0, 0.0), 0.01, 1e-4, Scheme::SemiImplicit).unwrap();
        assert_eq!(r.steps, 100);
        assert!(r.hausdorff <= 1e-3, "{r:?}");
    }

    #[test]
    fn pinned_arc_shortens() {
        let mut c = DiscreteCurve::from_trajectory(&horocycle_traj(1.0, 0.02));
        let ends = Boundary::Pinned { first: c.points[0], last: c.points[c.len() - 1] };
        let mut last = c.length();
        for _ in 0..50 {
            c = discrete_csf_step(&c, 1e-4, &ends, Scheme::SemiImplicit).unwrap();
            let l = c.length();
            assert!(l < last, "{l} !< {last}");
            last = l;
        }
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn curvature_law_examples() {
        let opts = OracleOptions { h: 1e-2, dt: 1e-4, length: 2.0, scheme: Scheme::SemiImplicit };
        for p in hypercycle_curvature_law(0.0, &[0.0, 0.1], &opts).unwrap() {
            assert!((p.simulated - 1.0).abs() < 1e-3 && p.predicted == 1.0);
        }
        let law = hypercycle_curvature_law(-1.0, &[0.0, 0.2], &opts).unwrap();
        assert!((law[0].predicted - 0.70711).abs() < 1e-5);
        // 1/sqrt(1 + e^0.4) = 0.633492...; the rounded 0.63354 is within 1%
        assert!((law[1].predicted - 0.633492).abs() < 1e-6);
        assert!((law[1].predicted - 0.63354).abs() < 1e-2 * 0.63354);
        assert!(law.iter().all(|p| p.relative_error() < 1e-2));
        // closed circles shrink
        let law = hypercycle_curvature_law(0.2, &[0.0, 0.1], &opts).unwrap();
        assert!(law.iter().all(|p| p.relative_error() < 1e-2));
        assert!(matches!(hypercycle_curvature_law(0.5, &[0.0, 0.5], &opts), Err(Error::BlowupWindow { .. })));
        assert!(predicted_curvature(0.3, 0.1) > predicted_curvature(0.3, 0.0));
        assert!(predicted_curvature(-0.3, 0.1) < predicted_curvature(-0.3, 0.0));
    }

    #[test]
    fn family_points_have_the_stated_curvature() {
        for a in [-1.0, -0.3, 0.4] {
            let fam = ConstantCurvatureFamily { a_const: a };
            for t in [0.0, 0.3] {
                let pts = (0..200).map(|k| fam.point(t, -0.5 + k as f64 * 0.005)).collect();
                let g = discrete_curvature(&DiscreteCurve::new(pts, false).unwrap()).unwrap();
                assert!((g[100].kappa.abs() - predicted_curvature(a, t)).abs() < 1e-6, "{a} {t}");
            }
        }
    }

    #[test]
    fn hausdorff_basics() {
        let c = geodesic_curve(1.0, 0.1);
        assert_eq!(hausdorff_distance(&c.points, &c.points), 0.0);
        // sliding along itself only uncovers the ends
        let shifted: Vec<_> = c.points.iter().map(|&p| crate::minkowski::boost_x(1e-3).apply(p)).collect();
        let d = hausdorff_distance(&c.points, &shifted);
        assert!((d - 1e-3).abs() < 1e-6, "{d}");
        // a point over the middle of a long segment
        let p = v3(0.0, 0.0, 1.0);
        let (a, b) = (
            v3(1.0f64.sinh(), 0.5f64.sinh() * 1.0f64.cosh(), 0.0),
            v3(-(1.0f64.sinh()), 0.5f64.sinh() * 1.0f64.cosh(), 0.0),
        );
        let a = a + v3(0.0, 0.0, (1.0 + a.x * a.x + a.y * a.y).sqrt());
        let b = b + v3(0.0, 0.0, (1.0 + b.x * b.x + b.y * b.y).sqrt());
        assert!((point_segment_distance(p, a, b) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn flow_run_csv() {
        let run = flow_run(&horocycle_traj(3.0, 0.01), v3(0.0, 1.0, 0.0), &[0.0, 0.5], DT_FD).unwrap();
        let csv = run.to_csv();
        assert!(csv.starts_with("t,csf_residual,curvature_profile_distance,length\n"));
        assert_eq!(csv.lines().count(), 3);
        assert!(run.max_csf_residual() < 1e-6);
        assert!((run.diagnostics[1].length - run.diagnostics[0].length).abs() < 1e-9);
    }
}

//! Minkowski 3-space `(R^3, diag(1, 1, -1))`, the upper sheet of the unit
//! hyperboloid, and the proper orthochronous Lorentz group acting on it.
//!
//! Frames are stored column-wise as `(T, N, X)`. The orientation used
//! throughout the crate is `N = T ⊠ X`, where `u ⊠ w = η(u × w)` is the
//! Lorentz cross product; equivalently `det[T N X] = -1` and `{T, N, -X}` is
//! positively oriented. With this choice a curve whose geodesic curvature is
//! `⟨T, ṽ⟩` moves by curve shortening flow under `exp(t B(ṽ))`.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat3 = Matrix3<f64>;

pub const TOL_GROUP: f64 = 1e-10;
pub const TOL_CONSTRAINT: f64 = 1e-10;
pub const TOL_CAUSAL: f64 = 1e-9;

/// The metric `η = diag(1, 1, -1)`.
pub fn eta() -> Mat3 {
    Mat3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MinkowskiVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl MinkowskiVector {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0);
    pub const E1: Self = Self::new(1.0, 0.0, 0.0);
    pub const E2: Self = Self::new(0.0, 1.0, 0.0);
    pub const E3: Self = Self::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Checked constructor; rejects NaN and infinities.
    pub fn try_new(x: f64, y: f64, z: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() && z.is_finite() {
            Ok(Self { x, y, z })
        } else {
            Err(Error::NonFinite("MinkowskiVector"))
        }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn inner(self, other: Self) -> f64 {
        inner(self, other)
    }

    pub fn norm_sq(self) -> f64 {
        inner(self, self)
    }

    pub fn euclidean_norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Lorentz cross product `η(u × w)`; satisfies `⟨u ⊠ w, p⟩ = det[u w p]`.
    pub fn cross(self, w: Self) -> Self {
        Self::new(self.y * w.z - self.z * w.y, self.z * w.x - self.x * w.z, -(self.x * w.y - self.y * w.x))
    }

    pub fn max_abs_diff(self, other: Self) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs()).max((self.z - other.z).abs())
    }

    pub(crate) fn to_na(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub(crate) fn from_na(v: Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl Add for MinkowskiVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for MinkowskiVector {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for MinkowskiVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for MinkowskiVector {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl Neg for MinkowskiVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for MinkowskiVector {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Mul<MinkowskiVector> for f64 {
    type Output = MinkowskiVector;
    fn mul(self, v: MinkowskiVector) -> MinkowskiVector {
        v * self
    }
}

impl Div<f64> for MinkowskiVector {
    type Output = Self;
    fn div(self, k: f64) -> Self {
        Self::new(self.x / k, self.y / k, self.z / k)
    }
}

/// `⟨u, w⟩_η = u.x w.x + u.y w.y - u.z w.z`.
pub fn inner(u: MinkowskiVector, w: MinkowskiVector) -> f64 {
    u.x * w.x + u.y * w.y - u.z * w.z
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CausalType {
    Spacelike,
    Timelike,
    Null,
}

impl CausalType {
    pub fn epsilon(self) -> i8 {
        match self {
            CausalType::Spacelike => 1,
            CausalType::Timelike => -1,
            CausalType::Null => 0,
        }
    }
}

pub fn causal_type(v: MinkowskiVector, tol: f64) -> Result<CausalType> {
    if v.euclidean_norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    let q = v.norm_sq();
    Ok(if q > tol {
        CausalType::Spacelike
    } else if q < -tol {
        CausalType::Timelike
    } else {
        CausalType::Null
    })
}

/// A point of the upper sheet `x² + y² - z² = -1, z ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperboloidPoint(MinkowskiVector);

impl HyperboloidPoint {
    pub const APEX: Self = Self(MinkowskiVector::E3);

    pub fn new(p: MinkowskiVector, tol: f64) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::NonFinite("HyperboloidPoint"));
        }
        let residual = (p.norm_sq() + 1.0).abs();
        if residual > tol || p.z < 1.0 - tol {
            return Err(Error::OffHyperboloid { residual });
        }
        Ok(Self(p))
    }

    /// Lift `(x, y)` to the sheet, `z = sqrt(1 + x² + y²)`.
    pub fn from_xy(x: f64, y: f64) -> Self {
        Self(MinkowskiVector::new(x, y, (1.0 + x * x + y * y).sqrt()))
    }

    /// Rescale an arbitrary future-timelike vector onto the sheet.
    pub fn project(p: MinkowskiVector) -> Result<Self> {
        let q = -p.norm_sq();
        if !(q > 0.0) || p.z <= 0.0 {
            return Err(Error::OffHyperboloid { residual: (q - 1.0).abs() });
        }
        Ok(Self(p / q.sqrt()))
    }

    pub fn vector(self) -> MinkowskiVector {
        self.0
    }

    /// Hyperbolic distance, computed as `2 asinh(|p - q|_η / 2)` which stays
    /// accurate for nearby points.
    pub fn distance(self, other: Self) -> f64 {
        hyperbolic_distance(self.0, other.0)
    }
}

pub fn hyperbolic_distance(p: MinkowskiVector, q: MinkowskiVector) -> f64 {
    let d = p - q;
    let chord = d.norm_sq().max(0.0).sqrt();
    2.0 * (0.5 * chord).asinh()
}

/// Proper orthochronous element of `O(2, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzIsometry {
    m: Mat3,
}

impl LorentzIsometry {
    pub fn identity() -> Self {
        Self { m: Mat3::identity() }
    }

    pub fn from_matrix(m: Mat3, tol: f64) -> Result<Self> {
        let residual = Self::group_residual(&m);
        if !m.iter().all(|v| v.is_finite())
            || residual > tol
            || (m.determinant() - 1.0).abs() > tol
            || m[(2, 2)] < 1.0 - tol
        {
            return Err(Error::NotLorentz { residual });
        }
        Ok(Self { m })
    }

    /// `‖mᵀ η m - η‖_max`.
    pub fn group_residual(m: &Mat3) -> f64 {
        (m.transpose() * eta() * m - eta()).amax()
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.m
    }

    pub fn apply(&self, v: MinkowskiVector) -> MinkowskiVector {
        MinkowskiVector::from_na(self.m * v.to_na())
    }

    pub fn apply_point(&self, p: HyperboloidPoint) -> HyperboloidPoint {
        HyperboloidPoint(self.apply(p.0))
    }

    pub fn apply_frame(&self, f: &FrenetFrame) -> FrenetFrame {
        FrenetFrame::new(self.apply(f.t), self.apply(f.n), self.apply(f.x))
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self { m: self.m * other.m }
    }

    /// `η mᵀ η`.
    pub fn inverse(&self) -> Self {
        Self { m: eta() * self.m.transpose() * eta() }
    }
}

impl Mul for LorentzIsometry {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        self.compose(&o)
    }
}

pub fn boost_x(zeta: f64) -> LorentzIsometry {
    let (s, c) = (zeta.sinh(), zeta.cosh());
    LorentzIsometry { m: Mat3::new(c, 0.0, -s, 0.0, 1.0, 0.0, -s, 0.0, c) }
}

pub fn boost_y(xi: f64) -> LorentzIsometry {
    let (s, c) = (xi.sinh(), xi.cosh());
    LorentzIsometry { m: Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, -s, c) }
}

pub fn rot_z(theta: f64) -> LorentzIsometry {
    let (s, c) = theta.sin_cos();
    LorentzIsometry { m: Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorKind {
    BoostX,
    BoostY,
    RotZ,
}

/// Derivative at the identity of the corresponding one-parameter family.
pub fn generator(kind: GeneratorKind) -> Mat3 {
    match kind {
        GeneratorKind::BoostX => Mat3::new(0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0),
        GeneratorKind::BoostY => Mat3::new(0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, -1.0, 0.0),
        GeneratorKind::RotZ => Mat3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0),
    }
}

/// Rates `(ζ̇, ξ̇, θ̇)` of the x-boost, y-boost and z-rotation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GeneratorVelocity {
    pub zeta_dot: f64,
    pub xi_dot: f64,
    pub theta_dot: f64,
}

/// `ṽ = (ζ̇, -ξ̇, θ̇)`.
pub fn velocity_to_vtilde(g: GeneratorVelocity) -> MinkowskiVector {
    MinkowskiVector::new(g.zeta_dot, -g.xi_dot, g.theta_dot)
}

pub fn vtilde_to_velocity(v: MinkowskiVector) -> GeneratorVelocity {
    GeneratorVelocity { zeta_dot: v.x, xi_dot: -v.y, theta_dot: v.z }
}

/// Tangent at the identity of the isometry family with velocity `ṽ`:
/// `[[0, -θ̇, -ξ̇], [θ̇, 0, -ζ̇], [-ξ̇, -ζ̇, 0]]`. Acting on `u` it equals
/// `ṽ ⊠ u`.
pub fn generator_matrix_of(vtilde: MinkowskiVector) -> Mat3 {
    let g = vtilde_to_velocity(vtilde);
    Mat3::new(0.0, -g.theta_dot, -g.xi_dot, g.theta_dot, 0.0, -g.zeta_dot, -g.xi_dot, -g.zeta_dot, 0.0)
}

/// Coefficients `(f1, f2)` with `exp(tB) = I + f1 B + f2 B²` where `B³ = q B`.
fn exp_coefficients(q: f64, t: f64) -> (f64, f64) {
    let x = q * t * t;
    if x.abs() < 1e-6 {
        // Taylor expansion, uniform across the three classes.
        let t2 = t * t;
        let f1 = t * (1.0 + x / 6.0 + x * x / 120.0 + x * x * x / 5040.0);
        let f2 = t2 * (0.5 + x / 24.0 + x * x / 720.0 + x * x * x / 40320.0);
        (f1, f2)
    } else if q > 0.0 {
        let w = q.sqrt();
        ((w * t).sinh() / w, ((w * t).cosh() - 1.0) / q)
    } else {
        let w = (-q).sqrt();
        ((w * t).sin() / w, (1.0 - (w * t).cos()) / -q)
    }
}

/// `exp(t B(ṽ))`, evaluated in closed form: hyperbolic for spacelike `ṽ`,
/// trigonometric for timelike and the quadratic polynomial for null.
pub fn one_parameter_subgroup(vtilde: MinkowskiVector, t: f64) -> LorentzIsometry {
    let b = generator_matrix_of(vtilde);
    let q = vtilde.norm_sq();
    let (f1, f2) = exp_coefficients(q, t);
    LorentzIsometry { m: Mat3::identity() + b * f1 + b * b * f2 }
}

/// Parameters of `A₁(ζ) A₂(ξ) A₃(θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EulerAngles {
    pub zeta: f64,
    pub xi: f64,
    pub theta: f64,
}

impl EulerAngles {
    pub fn compose(&self) -> LorentzIsometry {
        boost_x(self.zeta) * boost_y(self.xi) * rot_z(self.theta)
    }
}

/// Decompose an arbitrary proper orthochronous isometry as `A₁(ζ) A₂(ξ) A₃(θ)`.
pub fn euler_angles_of(iso: &LorentzIsometry) -> EulerAngles {
    let m = iso.matrix();
    // Third column of A₁(ζ)A₂(ξ)A₃(θ) is (-sinh ζ cosh ξ, -sinh ξ, cosh ζ cosh ξ).
    let xi = (-m[(1, 2)]).asinh();
    let zeta = (-m[(0, 2)] / xi.cosh()).asinh();
    let r = boost_y(-xi).matrix() * boost_x(-zeta).matrix() * m;
    let theta = r[(1, 0)].atan2(r[(0, 0)]);
    EulerAngles { zeta, xi, theta }
}

/// Angles of the isometry carrying `from` onto `to` (column by column).
pub fn euler_decompose(from: &FrenetFrame, to: &FrenetFrame) -> Result<EulerAngles> {
    from.validate(1e-9)?;
    to.validate(1e-9)?;
    let f = from.matrix();
    let f_inv = eta() * f.transpose() * eta();
    let m = to.matrix() * f_inv;
    // rounding in the product grows with the size of the entries
    let tol = 1e-12 * m.amax().max(1.0).powi(2);
    let iso = LorentzIsometry::from_matrix(m, tol.max(TOL_GROUP))?;
    Ok(euler_angles_of(&iso))
}

/// Ordered frame `(T, N, X)` along a curve in the hyperboloid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrenetFrame {
    pub t: MinkowskiVector,
    pub n: MinkowskiVector,
    pub x: MinkowskiVector,
}

impl FrenetFrame {
    pub fn new(t: MinkowskiVector, n: MinkowskiVector, x: MinkowskiVector) -> Self {
        Self { t, n, x }
    }

    /// The frame at the apex with `T = e₁`.
    pub fn apex() -> Self {
        let t = MinkowskiVector::E1;
        let x = MinkowskiVector::E3;
        Self::new(t, t.cross(x), x)
    }

    /// Columns `[T N X]`.
    pub fn matrix(&self) -> Mat3 {
        Mat3::from_columns(&[self.t.to_na(), self.n.to_na(), self.x.to_na()])
    }

    pub fn to_array(&self) -> [f64; 9] {
        let (t, n, x) = (self.t, self.n, self.x);
        [t.x, t.y, t.z, n.x, n.y, n.z, x.x, x.y, x.z]
    }

    pub fn from_array(a: &[f64; 9]) -> Self {
        Self::new(
            MinkowskiVector::new(a[0], a[1], a[2]),
            MinkowskiVector::new(a[3], a[4], a[5]),
            MinkowskiVector::new(a[6], a[7], a[8]),
        )
    }

    /// Largest deviation of the Gram matrix from `diag(1, 1, -1)`.
    pub fn orthonormality_residual(&self) -> f64 {
        let (t, n, x) = (self.t, self.n, self.x);
        [
            (t.norm_sq() - 1.0).abs(),
            (n.norm_sq() - 1.0).abs(),
            (x.norm_sq() + 1.0).abs(),
            inner(t, n).abs(),
            inner(t, x).abs(),
            inner(n, x).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Residual divided by the squared largest entry (at least 1): rounding
    /// in the Gram matrix grows with the size of the entries.
    pub fn scaled_orthonormality_residual(&self) -> f64 {
        let amax = self.matrix().amax().max(1.0);
        self.orthonormality_residual() / (amax * amax)
    }

    pub fn is_oriented(&self) -> bool {
        self.matrix().determinant() < 0.0 && self.x.z > 0.0
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let residual = self.orthonormality_residual();
        if !(residual <= tol) || !self.is_oriented() {
            return Err(Error::NotOrthonormal { residual });
        }
        Ok(())
    }

    pub fn point(&self) -> HyperboloidPoint {
        HyperboloidPoint(self.x)
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        self.t.max_abs_diff(o.t).max(self.n.max_abs_diff(o.n)).max(self.x.max_abs_diff(o.x))
    }
}

/// η-Gram–Schmidt: normalize `X` onto the future sheet, make `T` a unit
/// vector orthogonal to it, then complete with `N = T ⊠ X`.
pub fn reorthonormalize(frame: &FrenetFrame) -> Result<FrenetFrame> {
    const MIN_DENOM: f64 = 1e-6;
    let qx = -frame.x.norm_sq();
    if !(qx >= MIN_DENOM) {
        return Err(Error::DegenerateFrame("X is not timelike"));
    }
    let x = frame.x / qx.sqrt();
    if x.z <= 0.0 {
        return Err(Error::DegenerateFrame("X is past-directed"));
    }
    let t = frame.t + x * inner(frame.t, x);
    let qt = t.norm_sq();
    if !(qt >= MIN_DENOM) {
        return Err(Error::DegenerateFrame("T is degenerate after projection"));
    }
    let t = t / qt.sqrt();
    let n = t.cross(x);
    if inner(n, frame.n) <= 0.0 {
        return Err(Error::DegenerateFrame("N has the wrong orientation"));
    }
    Ok(FrenetFrame::new(t, n, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn v(x: f64, y: f64, z: f64) -> MinkowskiVector {
        MinkowskiVector::new(x, y, z)
    }

    fn mat_close(a: &Mat3, b: &Mat3, tol: f64) -> bool {
        (a - b).amax() <= tol
    }

    #[test]
    fn inner_product_examples() {
        assert_eq!(inner(v(0.0, 0.0, 1.0), v(0.0, 0.0, 1.0)), -1.0);
        assert_eq!(inner(v(1.0, 0.0, 0.0), v(1.0, 0.0, 0.0)), 1.0);
        assert_eq!(inner(v(0.0, 1.0, 1.0), v(0.0, 1.0, 1.0)), 0.0);
    }

    #[test]
    fn causal_types() {
        assert_eq!(causal_type(v(0.0, 1.0, 0.0), TOL_CAUSAL).unwrap(), CausalType::Spacelike);
        assert_eq!(causal_type(v(0.0, 0.0, 1.0), TOL_CAUSAL).unwrap(), CausalType::Timelike);
        assert_eq!(causal_type(v(0.0, 1.0, 1.0), TOL_CAUSAL).unwrap(), CausalType::Null);
        assert!(matches!(causal_type(MinkowskiVector::ZERO, TOL_CAUSAL), Err(Error::ZeroVector)));
    }

    #[test]
    fn try_new_rejects_nan() {
        assert!(MinkowskiVector::try_new(f64::NAN, 0.0, 0.0).is_err());
        assert!(MinkowskiVector::try_new(0.0, f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn boost_and_rotation_actions() {
        let z = 0.7;
        let p = boost_x(z).apply(MinkowskiVector::E3);
        assert_abs_diff_eq!(p.x, -z.sinh(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.y, 0.0);
        assert_abs_diff_eq!(p.z, z.cosh(), epsilon = 1e-15);

        let q = rot_z(std::f64::consts::FRAC_PI_2).apply(MinkowskiVector::E1);
        assert!(q.max_abs_diff(MinkowskiVector::E2) < 1e-15);
        assert_eq!(*boost_y(0.0).matrix(), Mat3::identity());
    }

    #[test]
    fn generators_match_tabulated_matrices() {
        assert_eq!(generator(GeneratorKind::BoostX), Mat3::new(0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0));
        assert_eq!(generator(GeneratorKind::RotZ), Mat3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn generators_are_central_differences_of_families() {
        let h = 1e-5;
        type Family = (GeneratorKind, fn(f64) -> LorentzIsometry);
        let families: [Family; 3] =
            [(GeneratorKind::BoostX, boost_x), (GeneratorKind::BoostY, boost_y), (GeneratorKind::RotZ, rot_z)];
        for (kind, fam) in families {
            let fd = (fam(h).matrix() - fam(-h).matrix()) / (2.0 * h);
            assert!(mat_close(&fd, &generator(kind), 1e-9), "{kind:?}");
        }
    }

    #[test]
    fn vtilde_velocity_bijection() {
        let g = GeneratorVelocity { zeta_dot: 1.0, xi_dot: 0.0, theta_dot: 0.0 };
        assert_eq!(velocity_to_vtilde(g), v(1.0, 0.0, 0.0));
        let g = GeneratorVelocity { zeta_dot: 0.0, xi_dot: -1.0, theta_dot: 0.0 };
        assert_eq!(velocity_to_vtilde(g), v(0.0, 1.0, 0.0));
        let g = GeneratorVelocity { zeta_dot: 0.3, xi_dot: -0.7, theta_dot: 2.1 };
        assert_eq!(vtilde_to_velocity(velocity_to_vtilde(g)), g);
    }

    #[test]
    fn generator_matrix_examples() {
        assert_eq!(generator_matrix_of(v(0.0, 1.0, 0.0)), Mat3::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0));
        assert_eq!(generator_matrix_of(v(1.0, 0.0, 0.0)), Mat3::new(0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, -1.0, 0.0));
        assert_eq!(generator_matrix_of(v(0.0, 0.0, 1.0)), Mat3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0));
        // ηB antisymmetric
        let b = generator_matrix_of(v(0.3, -1.2, 0.8));
        let eb = eta() * b;
        assert!(mat_close(&eb, &(-eb.transpose()), 0.0));
    }

    #[test]
    fn generator_acts_as_lorentz_cross_product() {
        let w = v(0.3, -1.2, 0.8);
        let u = v(-0.4, 2.0, 1.5);
        let bu = MinkowskiVector::from_na(generator_matrix_of(w) * u.to_na());
        assert!(bu.max_abs_diff(w.cross(u)) < 1e-15);
    }

    #[test]
    fn null_generator_is_nilpotent() {
        let b = generator_matrix_of(v(0.0, 1.0, 1.0));
        assert!(b * b != Mat3::zeros());
        assert_eq!(b * b * b, Mat3::zeros());
        let b = generator_matrix_of(v(0.6, 0.8, 1.0));
        assert!((b * b * b).amax() < 1e-15);
    }

    #[test]
    fn exponentials_reproduce_coordinate_families() {
        // Entry (1,2)/(2,1) of B holds ζ̇ and (0,2)/(2,0) holds -ξ̇, so
        // ṽ = e₁ generates y-boosts and ṽ = e₂ generates x-boosts backwards.
        for t in [-2.0, -0.3, 0.0, 0.9, 3.0] {
            let a = one_parameter_subgroup(v(1.0, 0.0, 0.0), t);
            assert!(mat_close(a.matrix(), boost_y(t).matrix(), 1e-12));
            let a = one_parameter_subgroup(v(0.0, 1.0, 0.0), t);
            assert!(mat_close(a.matrix(), boost_x(-t).matrix(), 1e-12));
            let a = one_parameter_subgroup(v(0.0, 0.0, 1.0), t);
            assert!(mat_close(a.matrix(), rot_z(t).matrix(), 1e-12));
        }
        assert_eq!(*one_parameter_subgroup(v(0.2, 0.5, 0.1), 0.0).matrix(), Mat3::identity());
    }

    #[test]
    fn null_exponential_is_quadratic_polynomial() {
        let vt = v(0.0, 1.0, 1.0);
        let b = generator_matrix_of(vt);
        let t = 1.7;
        let expected = Mat3::identity() + b * t + b * b * (t * t / 2.0);
        assert!(mat_close(one_parameter_subgroup(vt, t).matrix(), &expected, 1e-14));
    }

    #[test]
    fn exponential_matches_truncated_series() {
        // Independent route: scaling and squaring of a long Taylor series.
        for vt in [v(0.4, -0.9, 0.2), v(0.1, 0.2, 1.3), v(0.6, 0.8, 1.0)] {
            let t = 1.3;
            let b = generator_matrix_of(vt) * (t / 64.0);
            let mut term = Mat3::identity();
            let mut sum = Mat3::identity();
            for k in 1..30 {
                term = term * b / k as f64;
                sum += term;
            }
            for _ in 0..6 {
                sum = sum * sum;
            }
            assert!(mat_close(one_parameter_subgroup(vt, t).matrix(), &sum, 1e-12));
        }
    }

    #[test]
    fn subgroup_derivative_is_generator_times_element() {
        let vt = v(0.7, 0.2, -1.1);
        let t = 0.8;
        let h = 1e-5;
        let fd = (one_parameter_subgroup(vt, t + h).matrix() - one_parameter_subgroup(vt, t - h).matrix()) / (2.0 * h);
        let expected = generator_matrix_of(vt) * one_parameter_subgroup(vt, t).matrix();
        assert!(mat_close(&fd, &expected, 1e-8));
    }

    #[test]
    fn euler_decompose_identity_and_rotation() {
        let f = FrenetFrame::apex();
        let a = euler_decompose(&f, &f).unwrap();
        assert_abs_diff_eq!(a.zeta, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.xi, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.theta, 0.0, epsilon = 1e-15);

        let g = rot_z(0.4).apply_frame(&f);
        let a = euler_decompose(&f, &g).unwrap();
        assert_abs_diff_eq!(a.zeta, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(a.xi, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(a.theta, 0.4, epsilon = 1e-14);
    }

    #[test]
    fn euler_decompose_rejects_non_frames() {
        let f = FrenetFrame::apex();
        let bad = FrenetFrame::new(f.t * 1.1, f.n, f.x);
        assert!(matches!(euler_decompose(&f, &bad), Err(Error::NotOrthonormal { .. })));
        let flipped = FrenetFrame::new(f.t, -f.n, f.x);
        assert!(euler_decompose(&flipped, &f).is_err());
    }

    #[test]
    fn reorthonormalize_examples() {
        let f = FrenetFrame::apex();
        let g = reorthonormalize(&f).unwrap();
        assert!(g.max_abs_diff(&f) < 1e-14);

        let scaled = FrenetFrame::new(f.t, f.n, f.x * 1.001);
        let g = reorthonormalize(&scaled).unwrap();
        assert_abs_diff_eq!(g.x.norm_sq(), -1.0, epsilon = 1e-15);

        let iso = boost_x(1.3) * rot_z(0.2) * boost_y(-0.4);
        let h = iso.apply_frame(&f);
        let g = reorthonormalize(&h).unwrap();
        assert!(g.max_abs_diff(&h) < 1e-13);
        let gg = reorthonormalize(&g).unwrap();
        assert!(gg.max_abs_diff(&g) < 1e-14);
    }

    #[test]
    fn reorthonormalize_rejects_degenerate_input() {
        let f = FrenetFrame::apex();
        let bad = FrenetFrame::new(f.x, f.n, f.x);
        assert!(matches!(reorthonormalize(&bad), Err(Error::DegenerateFrame(_))));
        let bad = FrenetFrame::new(f.t, f.n, MinkowskiVector::E1);
        assert!(matches!(reorthonormalize(&bad), Err(Error::DegenerateFrame(_))));
        let bad = FrenetFrame::new(f.t, -f.n, f.x);
        assert!(matches!(reorthonormalize(&bad), Err(Error::DegenerateFrame(_))));
    }

    #[test]
    fn hyperboloid_point_checks() {
        assert!(HyperboloidPoint::new(v(2.0, 2.0, 3.0), TOL_CONSTRAINT).is_ok());
        assert!(HyperboloidPoint::new(v(2.0, 2.0, -3.0), TOL_CONSTRAINT).is_err());
        assert!(HyperboloidPoint::new(v(2.0, 2.0, 3.1), TOL_CONSTRAINT).is_err());
        let p = HyperboloidPoint::from_xy(0.3, -4.0);
        assert_abs_diff_eq!(p.vector().norm_sq(), -1.0, epsilon = 1e-13);
        let a = HyperboloidPoint::APEX;
        let b = HyperboloidPoint::from_xy(1.5f64.sinh(), 0.0);
        assert_abs_diff_eq!(a.distance(b), 1.5, epsilon = 1e-14);
    }

    fn arb_iso() -> impl Strategy<Value = LorentzIsometry> {
        (-3.0..3.0f64, -3.0..3.0f64, -3.2..3.2f64).prop_map(|(z, x, t)| boost_x(z) * boost_y(x) * rot_z(t))
    }

    fn arb_vec() -> impl Strategy<Value = MinkowskiVector> {
        (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y, z)| v(x, y, z))
    }

    proptest! {
        #[test]
        fn families_preserve_eta(p in -10.0..10.0f64) {
            for m in [boost_x(p), boost_y(p), rot_z(p)] {
                let scale = m.matrix().amax().powi(2);
                prop_assert!(LorentzIsometry::group_residual(m.matrix()) <= 1e-12 * scale.max(1.0));
            }
        }

        #[test]
        fn group_preserves_inner_product(a in arb_iso(), u in arb_vec(), w in arb_vec()) {
            let lhs = inner(a.apply(u), a.apply(w));
            let scale = a.matrix().amax().powi(2) * u.euclidean_norm() * w.euclidean_norm();
            prop_assert!((lhs - inner(u, w)).abs() <= 1e-12 * scale.max(1.0));
            prop_assert!(LorentzIsometry::from_matrix(*a.matrix(), 1e-8).is_ok());
        }

        #[test]
        fn group_preserves_hyperboloid(a in arb_iso(), x in -3.0..3.0f64, y in -3.0..3.0f64) {
            let p = a.apply_point(HyperboloidPoint::from_xy(x, y)).vector();
            let tol = 1e-13 * p.z * p.z;
            prop_assert!(HyperboloidPoint::new(p, tol.max(1e-10)).is_ok());
        }

        #[test]
        fn subgroup_is_homomorphism(vt in arb_vec(), s in -5.0..5.0f64, t in -5.0..5.0f64) {
            // keep |ṽ| moderate so entries stay O(1e4)
            let vt = vt * 0.3;
            let lhs = one_parameter_subgroup(vt, s + t);
            let (a, b) = (one_parameter_subgroup(vt, s), one_parameter_subgroup(vt, t));
            let rhs = a * b;
            // the product cancels entries of size ‖A_s‖‖A_t‖
            let scale = (a.matrix().amax() * b.matrix().amax()).max(1.0);
            prop_assert!((lhs.matrix() - rhs.matrix()).amax() <= 1e-10 * scale);
        }

        #[test]
        fn euler_recomposition_reproduces_map(a in arb_iso(), b in arb_iso()) {
            let from = a.apply_frame(&FrenetFrame::apex());
            let to = b.apply_frame(&FrenetFrame::apex());
            let ang = euler_decompose(&from, &to).unwrap();
            let img = ang.compose().apply_frame(&from);
            let scale = (to.matrix().amax() * from.matrix().amax()).powi(2);
            prop_assert!(img.max_abs_diff(&to) <= 1e-9 * scale);
        }
    }
}

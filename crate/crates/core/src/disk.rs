//! Poincaré disk coordinates `(u, w) = (x, y) / (1 + z)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::minkowski::{HyperboloidPoint, MinkowskiVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiskPoint {
    pub u: f64,
    pub w: f64,
}

impl DiskPoint {
    pub fn new(u: f64, w: f64) -> Self {
        Self { u, w }
    }

    pub fn radius_sq(self) -> f64 {
        self.u * self.u + self.w * self.w
    }
}

pub fn project_to_disk(p: HyperboloidPoint) -> DiskPoint {
    project_vector(p.vector())
}

/// Projection of a raw vector assumed to lie on the sheet.
pub fn project_vector(p: MinkowskiVector) -> DiskPoint {
    let d = 1.0 + p.z;
    DiskPoint { u: p.x / d, w: p.y / d }
}

pub fn lift_from_disk(d: DiskPoint) -> Result<HyperboloidPoint> {
    let r2 = d.radius_sq();
    if !d.u.is_finite() || !d.w.is_finite() || r2 >= 1.0 {
        return Err(Error::OnOrOutsideBoundary { u: d.u, w: d.w });
    }
    let k = 1.0 - r2;
    let p = MinkowskiVector::new(2.0 * d.u / k, 2.0 * d.w / k, (1.0 + r2) / k);
    HyperboloidPoint::new(p, 1e-9 * (1.0 + p.z * p.z))
}

/// Horocycle tangent to the boundary at `(1, 0)` with Euclidean centre
/// `(ϖ, 0)`, in its disk parametrization.
pub fn horocycle_disk(varpi: f64, rho: f64) -> DiskPoint {
    let r = 1.0 - varpi;
    DiskPoint { u: varpi + r * (rho / r).cos(), w: r * (rho / r).sin() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::horocycle_point;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn examples() {
        assert_eq!(project_to_disk(HyperboloidPoint::APEX), DiskPoint::new(0.0, 0.0));
        let p = HyperboloidPoint::new(MinkowskiVector::new(2.0, 2.0, 3.0), 1e-12).unwrap();
        assert_eq!(project_to_disk(p), DiskPoint::new(0.5, 0.5));
        assert_eq!(lift_from_disk(DiskPoint::new(0.0, 0.0)).unwrap().vector(), MinkowskiVector::E3);
        let q = lift_from_disk(DiskPoint::new(0.5, 0.5)).unwrap().vector();
        assert!(q.max_abs_diff(MinkowskiVector::new(2.0, 2.0, 3.0)) < 1e-14);
        // the closed-form horocycle point at s = 2 is the same (2, 2, 3)
        assert!(horocycle_point(0.5, 2.0).unwrap().0.vector().max_abs_diff(q) < 1e-14);
    }

    #[test]
    fn horocycle_parametrizations_agree() {
        // ρ = π(1 - ϖ) is the point opposite the tangency; it lifts to s = 0
        let d = horocycle_disk(0.5, std::f64::consts::FRAC_PI_2);
        let lifted = lift_from_disk(d).unwrap().vector();
        let closed = horocycle_point(0.5, 0.0).unwrap().0.vector();
        assert!(lifted.max_abs_diff(closed) < 1e-12);
        // ρ = 0 is the tangency point on the boundary itself
        assert!(matches!(lift_from_disk(horocycle_disk(0.5, 0.0)), Err(Error::OnOrOutsideBoundary { .. })));
        // every closed-form point projects onto the disk circle
        for s in [-3.0, -0.4, 1.0, 7.5] {
            let p = project_to_disk(horocycle_point(0.5, s).unwrap().0);
            assert!(((p.u - 0.5).powi(2) + p.w * p.w - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_is_rejected() {
        for d in [DiskPoint::new(1.0, 0.0), DiskPoint::new(0.8, 0.8), DiskPoint::new(f64::NAN, 0.0)] {
            assert!(lift_from_disk(d).is_err());
        }
    }

    #[test]
    fn round_trips_on_random_points() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let r: f64 = rng.random_range(0.0..0.99f64).sqrt();
            let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let d = DiskPoint::new(r * th.cos(), r * th.sin());
            let back = project_to_disk(lift_from_disk(d).unwrap());
            assert!((back.u - d.u).abs() < 1e-12 && (back.w - d.w).abs() < 1e-12);

            let (x, y) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let p = HyperboloidPoint::from_xy(x, y);
            let q = lift_from_disk(project_to_disk(p)).unwrap();
            assert!(q.vector().max_abs_diff(p.vector()) < 1e-12 * p.vector().z);
        }
    }

    proptest! {
        #[test]
        fn image_tends_to_the_boundary(th in 0.0f64..std::f64::consts::TAU, r in 1.0f64..30.0) {
            let p = HyperboloidPoint::from_xy(r.sinh() * th.cos(), r.sinh() * th.sin());
            let d = project_to_disk(p);
            prop_assert!(d.radius_sq() < 1.0);
            // |image| = tanh(r/2)
            prop_assert!((d.radius_sq().sqrt() - (r / 2.0).tanh()).abs() < 1e-12);
        }
    }
}

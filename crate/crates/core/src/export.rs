//! Trajectory export: one flat record per sample, as JSON or CSV.

use std::io;

use serde::{Deserialize, Serialize};

use crate::disk::project_vector;
use crate::error::{Error, Result};
use crate::pipeline::SolitonRun;
use crate::soliton::conserved_epsilon;

pub const COLUMNS: [&str; 11] = ["s", "tau", "nu", "mu", "kappa_g", "x", "y", "z", "u", "w", "eps_residual"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExportSample {
    pub s: f64,
    pub tau: f64,
    pub nu: f64,
    pub mu: f64,
    pub kappa_g: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub u: f64,
    pub w: f64,
    pub eps_residual: f64,
}

impl ExportSample {
    fn values(&self) -> [f64; 11] {
        [self.s, self.tau, self.nu, self.mu, self.kappa_g, self.x, self.y, self.z, self.u, self.w, self.eps_residual]
    }

    fn from_values(v: [f64; 11]) -> Self {
        let [s, tau, nu, mu, kappa_g, x, y, z, u, w, eps_residual] = v;
        Self { s, tau, nu, mu, kappa_g, x, y, z, u, w, eps_residual }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryExport {
    pub vtilde: [f64; 3],
    pub a: f64,
    pub epsilon: i8,
    pub samples: Vec<ExportSample>,
}

impl TrajectoryExport {
    /// Samples on the curve grid; `(τ, ν, μ)` come from the soliton ODE at
    /// the same arclength, the ambient point from the reconstructed frame.
    pub fn from_run(run: &SolitonRun) -> Self {
        let traj = &run.trajectory;
        let eps = f64::from(traj.epsilon);
        let samples = run
            .curve
            .samples
            .iter()
            .map(|c| {
                let st = traj.state_at(c.s);
                let p = c.frame.x;
                let d = project_vector(p);
                ExportSample {
                    s: c.s,
                    tau: st.tau,
                    nu: st.nu,
                    mu: st.mu,
                    kappa_g: traj.a * st.tau,
                    x: p.x,
                    y: p.y,
                    z: p.z,
                    u: d.u,
                    w: d.w,
                    eps_residual: conserved_epsilon(st) - eps,
                }
            })
            .collect();
        Self { vtilde: run.vtilde.to_array(), a: traj.a, epsilon: traj.epsilon, samples }
    }

    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        self.write_json(&mut out).expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("JSON output is UTF-8")
    }

    pub fn write_json<W: io::Write>(&self, w: W) -> Result<()> {
        let mut ser = serde_json::Serializer::with_formatter(w, SignificantDigits);
        self.serialize(&mut ser).map_err(io::Error::from)?;
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidParameter(format!("trajectory JSON: {e}")))
    }

    /// Same columns as the JSON samples; the header carries no metadata.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(COLUMNS).expect("in-memory CSV");
        for p in &self.samples {
            w.write_record(p.values().iter().map(|v| fmt17(*v))).expect("in-memory CSV");
        }
        String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("CSV output is UTF-8")
    }

    pub fn samples_from_csv(s: &str) -> Result<Vec<ExportSample>> {
        let mut r = csv::Reader::from_reader(s.as_bytes());
        let bad = |e: csv::Error| Error::InvalidParameter(format!("trajectory CSV: {e}"));
        let header = r.headers().map_err(bad)?.clone();
        if header.iter().ne(COLUMNS) {
            return Err(Error::InvalidParameter(format!("trajectory CSV: unexpected header {header:?}")));
        }
        r.deserialize::<[f64; 11]>().map(|row| row.map(ExportSample::from_values).map_err(bad)).collect()
    }
}

fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "NaN".into()
    }
}

/// Writes every float with 17 significant digits.
struct SignificantDigits;

impl serde_json::ser::Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(format!("{v:.16e}").as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::MinkowskiVector;
    use crate::pipeline::Window;
    use crate::soliton::SolitonState;

    fn horocycle() -> TrajectoryExport {
        let run =
            SolitonRun::new(MinkowskiVector::E2, Some(1.0), SolitonState::new(1.0, 0.0, 0.0), Window::symmetric(2.0))
                .unwrap();
        TrajectoryExport::from_run(&run)
    }

    #[test]
    fn json_schema_and_round_trip() {
        let e = horocycle();
        let json = e.to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let keys: Vec<&str> = v["samples"][0].as_object().unwrap().keys().map(String::as_str).collect();
        let mut want = COLUMNS.to_vec();
        want.sort_unstable();
        let mut got = keys.clone();
        got.sort_unstable();
        assert_eq!(got, want);
        assert_eq!(v["epsilon"], 1);
        assert!(json.contains("\"a\":1.0000000000000000e0"));
        assert_eq!(TrajectoryExport::from_json(&json).unwrap(), e);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let e = horocycle();
        let csv = e.to_csv();
        assert!(csv.starts_with("s,tau,nu,mu,kappa_g,x,y,z,u,w,eps_residual\n"));
        assert_eq!(TrajectoryExport::samples_from_csv(&csv).unwrap(), e.samples);
        assert!(TrajectoryExport::samples_from_csv("a,b\n1,2\n").is_err());
    }

    #[test]
    fn horocycle_samples() {
        for p in horocycle().samples {
            assert!((p.tau - 1.0).abs() < 1e-12 && (p.nu + p.s).abs() < 1e-9 && (p.mu - p.s).abs() < 1e-9);
            assert!((p.u * p.u + p.w * p.w) < 1.0);
            assert!(p.eps_residual.abs() < 1e-9);
        }
    }
}

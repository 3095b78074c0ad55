//! Dormand–Prince 5(4) with the 4th-order continuous extension.
//!
//! The driver hands every accepted step to an observer closure, which may
//! replace the end state (used for frame re-orthonormalization). Integration
//! runs in either direction of `t`.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];

// b - b̂
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step magnitude; estimated when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-10, h_init: None, h_max: f64::INFINITY, max_steps: 1_000_000 }
    }
}

/// One accepted step with its interpolant.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    pub f0: [f64; N],
    pub f1: [f64; N],
    cont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn h(&self) -> f64 {
        self.t1 - self.t0
    }

    /// Does `t` fall in the closed step interval?
    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = if self.t0 <= self.t1 { (self.t0, self.t1) } else { (self.t1, self.t0) };
        t >= lo && t <= hi
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h();
        let th1 = 1.0 - th;
        let [c0, c1, c2, c3, c4] = &self.cont;
        std::array::from_fn(|i| c0[i] + th * (c1[i] + th1 * (c2[i] + th * (c3[i] + th1 * c4[i]))))
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, coeffs: &[f64], ks: &[[f64; N]]) -> [f64; N] {
    std::array::from_fn(|i| {
        let mut acc = 0.0;
        for (c, k) in coeffs.iter().zip(ks) {
            acc += c * k[i];
        }
        y[i] + h * acc
    })
}

fn error_norm<const N: usize>(y0: &[f64; N], y1: &[f64; N], err: &[f64; N], o: &Dopri5Options) -> f64 {
    let mut sum = 0.0;
    for i in 0..N {
        let sc = o.atol + o.rtol * y0[i].abs().max(y1[i].abs());
        sum += (err[i] / sc).powi(2);
    }
    (sum / N as f64).sqrt()
}

fn rms_scaled<const N: usize>(v: &[f64; N], y: &[f64; N], o: &Dopri5Options) -> f64 {
    let mut sum = 0.0;
    for i in 0..N {
        let sc = o.atol + o.rtol * y[i].abs();
        sum += (v[i] / sc).powi(2);
    }
    (sum / N as f64).sqrt()
}

/// Starting step heuristic (Hairer, Nørsett & Wanner, II.4).
fn initial_step<const N: usize, F>(f: &F, t0: f64, y0: &[f64; N], f0: &[f64; N], dir: f64, o: &Dopri5Options) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let d0 = rms_scaled(y0, y0, o);
    let d1 = rms_scaled(f0, y0, o);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(o.h_max);
    let y1: [f64; N] = std::array::from_fn(|i| y0[i] + dir * h0 * f0[i]);
    let f1 = f(t0 + dir * h0, &y1);
    let df: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = rms_scaled(&df, y0, o) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1).min(o.h_max)
}

/// Integrate `y' = f(t, y)` from `t0` to `t_end`.
///
/// `observe` is called once per accepted step; returning `Some(y)` replaces
/// the state at `step.t1`. Returns the final state.
pub fn integrate<const N: usize, F, G>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &Dopri5Options,
    mut observe: G,
) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    G: FnMut(&DenseStep<N>) -> Result<Option<[f64; N]>>,
{
    if t_end == t0 {
        return Ok(y0);
    }
    let dir = (t_end - t0).signum();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = match opts.h_init {
        Some(h) => h.abs().min(opts.h_max),
        None => initial_step(&f, t, &y, &k1, dir, opts),
    };
    let mut rejected_last = false;
    let mut steps = 0usize;

    loop {
        let remaining = (t_end - t) * dir;
        if remaining <= 0.0 {
            return Ok(y);
        }
        if steps >= opts.max_steps {
            return Err(Error::TooManySteps { s: t });
        }
        let last = h >= remaining;
        let hs = if last { remaining * dir } else { h * dir };
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { s: t });
        }

        let mut ks = [[0.0; N]; 7];
        ks[0] = k1;
        for s in 1..7 {
            let yi = axpy(&y, hs, &A[s][..s], &ks[..s]);
            ks[s] = f(t + C[s] * hs, &yi);
        }
        let y_new = axpy(&y, hs, &B[..6], &ks[..6]);
        let k7 = f(t + hs, &y_new);
        ks[6] = k7;
        let err_vec: [f64; N] = std::array::from_fn(|i| {
            let mut acc = 0.0;
            for s in 0..7 {
                acc += E[s] * ks[s][i];
            }
            hs * acc
        });
        let err = error_norm(&y, &y_new, &err_vec, opts);
        if !err.is_finite() {
            h *= 0.25;
            rejected_last = true;
            steps += 1;
            continue;
        }

        if err <= 1.0 {
            let ydiff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
            let c2: [f64; N] = std::array::from_fn(|i| hs * k1[i] - ydiff[i]);
            let c3: [f64; N] = std::array::from_fn(|i| ydiff[i] - hs * k7[i] - c2[i]);
            let c4: [f64; N] = std::array::from_fn(|i| {
                let mut acc = 0.0;
                for s in 0..7 {
                    acc += D[s] * ks[s][i];
                }
                hs * acc
            });
            let t_new = if last { t_end } else { t + hs };
            let step = DenseStep { t0: t, t1: t_new, y0: y, y1: y_new, f0: k1, f1: k7, cont: [y, ydiff, c2, c3, c4] };
            match observe(&step)? {
                Some(reset) => {
                    y = reset;
                    k1 = f(t_new, &y);
                }
                None => {
                    y = y_new;
                    k1 = k7;
                }
            }
            t = t_new;
            let mut fac = 0.9 * err.max(1e-10).powf(-0.2);
            fac = fac.clamp(0.2, 5.0);
            if rejected_last {
                fac = fac.min(1.0);
            }
            h = (h * fac).min(opts.h_max);
            rejected_last = false;
        } else {
            let fac = (0.9 * err.powf(-0.2)).max(0.2);
            h *= fac;
            rejected_last = true;
        }
        steps += 1;
    }
}

/// `n + 1` points from `lo` to `hi` with spacing close to `ds`; the last point
/// is exactly `hi`.
pub fn uniform_grid(lo: f64, hi: f64, ds: f64) -> Vec<f64> {
    let n = (((hi - lo) / ds).round() as usize).max(1);
    (0..=n).map(|k| if k == n { hi } else { lo + k as f64 * ds }).collect()
}

/// Integrate outward from `anchor` in both directions and return the state at
/// every point of the ascending `grid`. `hook` sees every accepted step of
/// both legs, as in [`integrate`].
pub fn sample_on_grid<const N: usize, F, G>(
    f: F,
    anchor: f64,
    y0: [f64; N],
    grid: &[f64],
    opts: &Dopri5Options,
    mut hook: G,
) -> Result<Vec<[f64; N]>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    G: FnMut(&DenseStep<N>) -> Result<Option<[f64; N]>>,
{
    let mut out: Vec<Option<[f64; N]>> = vec![None; grid.len()];
    for (k, &s) in grid.iter().enumerate() {
        if s == anchor {
            out[k] = Some(y0);
        }
    }
    let (Some(&lo), Some(&hi)) = (grid.first(), grid.last()) else {
        return Ok(Vec::new());
    };
    if hi > anchor {
        let mut cursor = grid.partition_point(|&g| g <= anchor);
        integrate(&f, anchor, y0, hi, opts, |step| {
            while cursor < grid.len() && grid[cursor] <= step.t1 {
                let g = grid[cursor];
                out[cursor] = Some(if g == step.t1 { step.y1 } else { step.eval(g) });
                cursor += 1;
            }
            hook(step)
        })?;
    }
    if lo < anchor {
        let mut cursor = grid.partition_point(|&g| g < anchor);
        integrate(&f, anchor, y0, lo, opts, |step| {
            while cursor > 0 && grid[cursor - 1] >= step.t1 {
                let g = grid[cursor - 1];
                out[cursor - 1] = Some(if g == step.t1 { step.y1 } else { step.eval(g) });
                cursor -= 1;
            }
            hook(step)
        })?;
    }
    Ok(out.into_iter().map(|y| y.expect("grid point not reached")).collect())
}

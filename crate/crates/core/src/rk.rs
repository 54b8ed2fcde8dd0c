//! Dormand-Prince 5(4) with a fallible right-hand side.
//!
//! A failing RHS is treated like an oversized error estimate: the step is
//! rejected and shrunk. Once the step falls below `h_min` the integration
//! stops and the last accepted state is returned together with the reason.

use crate::error::Error;

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights are row 6 of A; these are the error weights (b5 - b4)
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            h_init: 1e-3,
            h_max: 1e-2,
            h_min: 1e-12,
            max_steps: 200_000,
        }
    }
}

/// Accepted states, starting with the initial condition.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    /// `None` when `t_end` was reached.
    pub stopped: Option<Error>,
}

/// Integrates `y' = f(t, y)` from `t0` towards `t_end` (either direction).
/// `accept` can veto a state after a successful step, which ends the run.
pub fn integrate<const N: usize, F, V>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &Options,
    mut accept: V,
) -> Trajectory<N>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], Error>,
    V: FnMut(f64, &[f64; N]) -> Result<(), Error>,
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut out = Trajectory {
        t: vec![t0],
        y: vec![y0],
        stopped: None,
    };
    let (mut t, mut y) = (t0, y0);
    let mut h = opts.h_init.min(opts.h_max);
    let mut k0 = match f(t, &y) {
        Ok(k) => k,
        Err(e) => {
            out.stopped = Some(e);
            return out;
        }
    };
    let mut last_err: Option<Error> = None;
    for _ in 0..opts.max_steps {
        let remaining = (t_end - t) * dir;
        if remaining <= 1e-15 * t_end.abs().max(1.0) {
            return out;
        }
        if h < opts.h_min {
            out.stopped = Some(last_err.unwrap_or(Error::DegenerateOde { s: t }));
            return out;
        }
        let step = h.min(remaining);
        match try_step(&mut f, t, &y, &k0, step * dir) {
            Ok((y_new, k_new, err_vec)) => {
                let err = err_vec
                    .iter()
                    .zip(y.iter().zip(&y_new))
                    .map(|(e, (a, b))| {
                        let sc = opts.atol + opts.rtol * a.abs().max(b.abs());
                        (e / sc).powi(2)
                    })
                    .sum::<f64>()
                    / N as f64;
                let err = err.sqrt();
                if err <= 1.0 {
                    let t_new = t + step * dir;
                    if let Err(e) = accept(t_new, &y_new) {
                        out.stopped = Some(e);
                        return out;
                    }
                    t = t_new;
                    y = y_new;
                    k0 = k_new;
                    out.t.push(t);
                    out.y.push(y);
                    let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    h = (step * fac).min(opts.h_max);
                    last_err = None;
                } else {
                    h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                }
            }
            Err(e) => {
                last_err = Some(e);
                h = step * 0.25;
            }
        }
    }
    out.stopped = Some(Error::Invalid("step budget exhausted".into()));
    out
}

type StepOut<const N: usize> = ([f64; N], [f64; N], [f64; N]);

fn try_step<const N: usize, F>(f: &mut F, t: f64, y: &[f64; N], k0: &[f64; N], h: f64) -> Result<StepOut<N>, Error>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], Error>,
{
    let mut k = [[0.0; N]; 7];
    k[0] = *k0;
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[s] = f(t + C[s] * h, &ys)?;
        if s == 6 {
            // stage 7 is evaluated at the fifth-order solution
            let mut err = [0.0; N];
            for i in 0..N {
                err[i] = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            }
            if ys.iter().any(|v| !v.is_finite()) {
                return Err(Error::DegenerateOde { s: t + h });
            }
            return Ok((ys, k[6], err));
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let traj = integrate(
            |_, y: &[f64; 2]| Ok([y[1], -y[0]]),
            0.0,
            [0.0, 1.0],
            3.0,
            &Options::default(),
            |_, _| Ok(()),
        );
        assert!(traj.stopped.is_none());
        let y = traj.y.last().unwrap();
        assert_eq!(*traj.t.last().unwrap(), 3.0);
        assert!((y[0] - 3.0_f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn backwards_exponential() {
        let traj = integrate(|_, y: &[f64; 1]| Ok([y[0]]), 0.0, [1.0], -1.0, &Options::default(), |_, _| Ok(()));
        assert!((traj.y.last().unwrap()[0] - (-1.0_f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn failing_rhs_truncates() {
        // RHS refuses t >= 0.5
        let traj = integrate(
            |t, _: &[f64; 1]| {
                if t >= 0.5 {
                    Err(Error::DegenerateOde { s: t })
                } else {
                    Ok([1.0])
                }
            },
            0.0,
            [0.0],
            1.0,
            &Options::default(),
            |_, _| Ok(()),
        );
        assert!(matches!(traj.stopped, Some(Error::DegenerateOde { .. })));
        assert!(*traj.t.last().unwrap() < 0.5);
        assert!(*traj.t.last().unwrap() > 0.49);
    }
}

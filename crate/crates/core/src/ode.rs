//! Adaptive Dormand–Prince 5(4) integrator with event location.
//!
//! Integration runs forward or backward in time. Events are located by
//! re-stepping from the start of the accepted step that brackets the sign
//! change, so located states carry the same local accuracy as ordinary steps.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on |h|.
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 200_000,
        }
    }
}

impl OdeOptions {
    pub fn with_h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Result of an integration with an event function.
#[derive(Debug, Clone, PartialEq)]
pub enum EventOutcome {
    Hit { t: f64, y: Vec<f64> },
    Reached { y: Vec<f64> },
}

struct Stepper<F> {
    f: F,
    dim: usize,
    k: Vec<Vec<f64>>,
    tmp: Vec<f64>,
}

impl<F: FnMut(f64, &[f64], &mut [f64])> Stepper<F> {
    fn new(f: F, dim: usize) -> Self {
        Stepper {
            f,
            dim,
            k: vec![vec![0.0; dim]; 7],
            tmp: vec![0.0; dim],
        }
    }

    /// One trial step; returns the 5th-order solution and the scaled error.
    fn step(&mut self, t: f64, y: &[f64], h: f64, opts: &OdeOptions) -> (Vec<f64>, f64) {
        let n = self.dim;
        (self.f)(t, y, &mut self.k[0]);
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, a) in A[s].iter().enumerate().take(s) {
                    acc += h * a * self.k[j][i];
                }
                self.tmp[i] = acc;
            }
            (self.f)(t + C[s] * h, &self.tmp, &mut self.k[s]);
        }
        let mut y5 = vec![0.0; n];
        let mut err = 0.0;
        for i in 0..n {
            let mut s5 = 0.0;
            let mut s4 = 0.0;
            for s in 0..7 {
                s5 += B5[s] * self.k[s][i];
                s4 += B4[s] * self.k[s][i];
            }
            y5[i] = y[i] + h * s5;
            let sc = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
            let e = h * (s5 - s4) / sc;
            err += e * e;
        }
        (y5, (err / n as f64).sqrt())
    }
}

fn initial_step(span: f64, opts: &OdeOptions) -> f64 {
    (span.abs() * 1e-3).clamp(1e-8, opts.h_max.min(0.1))
}

fn all_finite(y: &[f64]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Integrate `y' = f(t, y)` from `t0` to `t1` (either direction).
pub fn integrate<F>(f: F, t0: f64, y0: &[f64], t1: f64, opts: &OdeOptions) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    match integrate_with_event(f, t0, y0, t1, |_, _| 1.0, opts)? {
        EventOutcome::Reached { y } | EventOutcome::Hit { y, .. } => Ok(y),
    }
}

/// Integrate until `event(t, y)` changes sign from positive to non-positive
/// or `t1` is reached.
pub fn integrate_with_event<F, E>(
    f: F,
    t0: f64,
    y0: &[f64],
    t1: f64,
    mut event: E,
    opts: &OdeOptions,
) -> Result<EventOutcome>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    E: FnMut(f64, &[f64]) -> f64,
{
    let dim = y0.len();
    let mut st = Stepper::new(f, dim);
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0.to_vec();
    if t1 == t0 {
        return Ok(EventOutcome::Reached { y });
    }
    let mut g = event(t, &y);
    let mut h = initial_step(t1 - t0, opts) * dir;
    let mut steps = 0;
    loop {
        if steps >= opts.max_steps {
            return Err(Error::IntegrationFailure(format!(
                "step budget {} exhausted at t = {t}",
                opts.max_steps
            )));
        }
        steps += 1;
        let last = (t + h - t1) * dir >= 0.0;
        if last {
            h = t1 - t;
        }
        let (y_new, err) = st.step(t, &y, h, opts);
        if err <= 1.0 && all_finite(&y_new) {
            let t_new = if last { t1 } else { t + h };
            let g_new = event(t_new, &y_new);
            if g > 0.0 && g_new <= 0.0 {
                return locate(&mut st, t, &y, g, t_new - t, g_new, &mut event, opts);
            }
            t = t_new;
            y = y_new;
            g = g_new;
            if last {
                return Ok(EventOutcome::Reached { y });
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * fac).abs().min(opts.h_max) * dir;
        } else {
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.5) } else { 0.1 };
            h *= fac;
        }
        if h.abs() <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::IntegrationFailure(format!("step size underflow at t = {t}")));
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn locate<F, E>(
    st: &mut Stepper<F>,
    t: f64,
    y: &[f64],
    g0: f64,
    h: f64,
    g1: f64,
    event: &mut E,
    opts: &OdeOptions,
) -> Result<EventOutcome>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    E: FnMut(f64, &[f64]) -> f64,
{
    // Illinois regula falsi on the step fraction.
    let (mut a, mut ga) = (0.0, g0);
    let (mut b, mut gb) = (h, g1);
    let mut yb = st.step(t, y, h, opts).0;
    let mut side = 0;
    for _ in 0..100 {
        if (b - a).abs() <= 1e-15 * (t.abs() + h.abs()).max(1.0) {
            break;
        }
        let mut c = b - gb * (b - a) / (gb - ga);
        if !(c.is_finite()) || (c - a) * (c - b) >= 0.0 {
            c = 0.5 * (a + b);
        }
        let yc = st.step(t, y, c, opts).0;
        let gc = event(t + c, &yc);
        if gc > 0.0 {
            a = c;
            ga = gc;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            gb = gc;
            yb = yc;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
            if gc == 0.0 {
                break;
            }
        }
    }
    Ok(EventOutcome::Hit { t: t + b, y: yb })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_round_trip() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let opts = OdeOptions::default();
        let y = integrate(f, 0.0, &[1.0, 0.0], 10.0, &opts).unwrap();
        assert!((y[0] - 10f64.cos()).abs() < 1e-9);
        assert!((y[1] + 10f64.sin()).abs() < 1e-9);
        let back = integrate(f, 10.0, &y, 0.0, &opts).unwrap();
        assert!((back[0] - 1.0).abs() < 1e-9 && back[1].abs() < 1e-9);
    }

    #[test]
    fn event_is_located_precisely() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let out = integrate_with_event(f, 0.0, &[1.0, 0.0], 10.0, |_, y| y[0], &OdeOptions::default())
            .unwrap();
        match out {
            EventOutcome::Hit { t, .. } => assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-10),
            _ => panic!("event missed"),
        }
    }

    #[test]
    fn backward_exponential() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0];
        let y = integrate(f, 0.0, &[1.0], -3.0, &OdeOptions::default()).unwrap();
        assert!((y[0] - (-3f64).exp()).abs() < 1e-11);
    }
}

//! Adaptive Dormand–Prince 5(4) stepping for two-dimensional first-order systems.

pub(crate) type State = [f64; 2];

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub(crate) struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

pub(crate) enum Control {
    Continue,
    Stop,
}

/// Integrates from (t0, y0) up to t_end. `on_step` sees every accepted step
/// (t, y) and may stop the integration. Returns the last accepted (t, y).
pub(crate) fn integrate<F, S>(f: F, t0: f64, y0: State, t_end: f64, tol: &Tolerance, mut on_step: S) -> (f64, State)
where
    F: Fn(f64, &State) -> State,
    S: FnMut(f64, &State) -> Control,
{
    let mut t = t0;
    let mut y = y0;
    let mut h = 1e-3 * (t_end - t0).abs().min(1.0);
    let mut k = [[0.0; 2]; 7];
    k[0] = f(t, &y);
    while t < t_end {
        if t + h > t_end {
            h = t_end - t;
        }
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                ys[0] += h * A[s][j] * kj[0];
                ys[1] += h * A[s][j] * kj[1];
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y_new = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            y_new[0] += h * A[6][j] * kj[0];
            y_new[1] += h * A[6][j] * kj[1];
        }
        let mut err: f64 = 0.0;
        for d in 0..2 {
            let e: f64 = h * (0..7).map(|j| E[j] * k[j][d]).sum::<f64>();
            let sc = tol.atol + tol.rtol * y[d].abs().max(y_new[d].abs());
            err = err.max((e / sc).abs());
        }
        if err <= 1.0 || h.abs() < 1e-14 {
            t += h;
            y = y_new;
            // FSAL: the last stage is the derivative at the new point
            k[0] = k[6];
            if let Control::Stop = on_step(t, &y) {
                break;
            }
            if !y[0].is_finite() || !y[1].is_finite() {
                break;
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    (t, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let tol = Tolerance { rtol: 1e-11, atol: 1e-13 };
        let (t, y) = integrate(|_, y| [y[1], -y[0]], 0.0, [1.0, 0.0], 2.0 * std::f64::consts::PI, &tol, |_, _| Control::Continue);
        assert!((t - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((y[0] - 1.0).abs() < 1e-9);
        assert!(y[1].abs() < 1e-9);
    }

    #[test]
    fn stop_callback_halts_integration() {
        let tol = Tolerance { rtol: 1e-9, atol: 1e-12 };
        let (t, y) = integrate(|_, y| [y[1], -y[0]], 0.0, [1.0, 0.0], 10.0, &tol, |_, y| {
            if y[0] < 0.0 {
                Control::Stop
            } else {
                Control::Continue
            }
        });
        assert!(y[0] < 0.0);
        assert!(t > std::f64::consts::FRAC_PI_2 && t < 2.5);
    }
}

//! Dormand-Prince 5(4) embedded Runge-Kutta step with first-same-as-last reuse.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the fifth and fourth order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Approximate extent of the DP5 stability region along the negative real axis.
pub const REAL_STABILITY_BOUNDARY: f64 = 3.3;

/// Scratch storage for one system size.
#[derive(Debug, Clone)]
pub struct Dp5 {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    /// Fifth-order solution of the last step.
    pub y_new: Vec<f64>,
    /// Derivative at `y_new`; becomes the first stage of the next step.
    pub f_new: Vec<f64>,
    err: Vec<f64>,
}

impl Dp5 {
    pub fn new(dim: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; dim]),
            tmp: vec![0.0; dim],
            y_new: vec![0.0; dim],
            f_new: vec![0.0; dim],
            err: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.tmp.len()
    }

    /// Attempts a step of size `h` from `(t, y)` where `f0 = f(t, y)`.
    ///
    /// Leaves the candidate in `y_new`, `f_new` and returns the max-norm of
    /// the scaled error estimate (accept when `<= 1`).
    pub fn step<F>(&mut self, f: &mut F, t: f64, y: &[f64], f0: &[f64], h: f64, rtol: f64, atol: f64) -> f64
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y.len();
        self.k[0].copy_from_slice(f0);

        macro_rules! stage {
            ($out:expr, $c:expr, $($coef:expr => $idx:expr),+) => {{
                for i in 0..n {
                    self.tmp[i] = y[i] + h * (0.0 $(+ $coef * self.k[$idx][i])+);
                }
                let (tmp, k) = (&self.tmp, &mut self.k[$out]);
                f(t + $c * h, tmp, k);
            }};
        }

        stage!(1, C2, A21 => 0);
        stage!(2, C3, A31 => 0, A32 => 1);
        stage!(3, C4, A41 => 0, A42 => 1, A43 => 2);
        stage!(4, C5, A51 => 0, A52 => 1, A53 => 2, A54 => 3);
        stage!(5, 1.0, A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4);
        for i in 0..n {
            self.y_new[i] = y[i]
                + h * (A71 * self.k[0][i]
                    + A73 * self.k[2][i]
                    + A74 * self.k[3][i]
                    + A75 * self.k[4][i]
                    + A76 * self.k[5][i]);
        }
        f(t + h, &self.y_new, &mut self.f_new);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let e = h
                * (E1 * self.k[0][i]
                    + E3 * self.k[2][i]
                    + E4 * self.k[3][i]
                    + E5 * self.k[4][i]
                    + E6 * self.k[5][i]
                    + E7 * self.f_new[i]);
            self.err[i] = e;
            let scale = atol + rtol * y[i].abs().max(self.y_new[i].abs());
            let ratio = (e / scale).abs();
            worst = if ratio.is_nan() { f64::INFINITY } else { worst.max(ratio) };
        }
        worst
    }

    /// Per-component error estimate of the last step (unscaled).
    pub fn error_estimate(&self) -> &[f64] {
        &self.err
    }
}

/// Step-size factor from a scaled error norm, with the usual safety and limits.
pub fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        5.0
    } else if !err.is_finite() {
        0.2
    } else {
        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate<F: FnMut(f64, &[f64], &mut [f64])>(mut f: F, y0: &[f64], t_end: f64, h: f64) -> Vec<f64> {
        let mut dp = Dp5::new(y0.len());
        let mut y = y0.to_vec();
        let mut f0 = vec![0.0; y0.len()];
        f(0.0, &y, &mut f0);
        let steps = (t_end / h).round() as usize;
        for s in 0..steps {
            dp.step(&mut f, s as f64 * h, &y, &f0, h, 1e-8, 1e-8);
            y.copy_from_slice(&dp.y_new);
            f0.copy_from_slice(&dp.f_new);
        }
        y
    }

    #[test]
    fn harmonic_oscillator_is_fifth_order() {
        let rhs = |_t: f64, y: &[f64], d: &mut [f64]| {
            d[0] = y[1];
            d[1] = -y[0];
        };
        let err = |h: f64| {
            let y = integrate(rhs, &[1.0, 0.0], 2.0, h);
            ((y[0] - 2f64.cos()).powi(2) + (y[1] + 2f64.sin()).powi(2)).sqrt()
        };
        let order = (err(0.1) / err(0.05)).log2();
        assert!(order > 4.7 && order < 5.5, "observed order {order}");
    }

    #[test]
    fn time_dependent_rhs_uses_stage_times() {
        let y = integrate(|t, _y, d| d[0] = 3.0 * t * t, &[0.0], 1.0, 0.25);
        assert!((y[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn error_estimate_flags_large_steps() {
        let mut dp = Dp5::new(1);
        let mut f = |_t: f64, y: &[f64], d: &mut [f64]| d[0] = -50.0 * y[0];
        let small = dp.step(&mut f, 0.0, &[1.0], &[-50.0], 1e-3, 1e-6, 1e-6);
        let large = dp.step(&mut f, 0.0, &[1.0], &[-50.0], 1e-1, 1e-6, 1e-6);
        assert!(small < 1.0 && large > 1.0);
        assert!(step_factor(large) < 1.0 && step_factor(small) > 1.0);
    }
}

//! Dormand-Prince 5(4) embedded Runge-Kutta stepping over a fixed-size
//! complex state.

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std inherents when std is in the graph
use num_traits::Float;

use crate::error::{KmrError, Result};

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
// fifth-order weights are the last row of A (FSAL); these are the differences
// between the fifth- and fourth-order solutions
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DormandPrince {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for DormandPrince {
    fn default() -> Self {
        DormandPrince {
            rtol: 1e-12,
            atol: 1e-13,
            max_steps: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

impl DormandPrince {
    pub fn with_tolerance(tol: f64) -> Self {
        DormandPrince {
            rtol: tol,
            atol: tol * 0.1,
            ..Default::default()
        }
    }

    /// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
    pub fn integrate<const N: usize, F>(
        &self,
        mut f: F,
        t0: f64,
        t1: f64,
        y0: [Complex64; N],
    ) -> Result<([Complex64; N], OdeStats)>
    where
        F: FnMut(f64, &[Complex64; N]) -> [Complex64; N],
    {
        let mut stats = OdeStats {
            accepted: 0,
            rejected: 0,
        };
        if t0 == t1 {
            return Ok((y0, stats));
        }
        let span = t1 - t0;
        let dir = span.signum();
        let mut t = t0;
        let mut y = y0;
        let mut k0 = f(t, &y);
        let mut h = initial_step(&k0, &y, self.rtol, self.atol, span.abs()) * dir;
        let h_floor = span.abs() * 1e-14;

        while (t1 - t) * dir > 0.0 {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(KmrError::Transport { at: t, step: h });
            }
            if (t + h - t1) * dir > 0.0 {
                h = t1 - t;
            }
            let mut k = [[Complex64::new(0.0, 0.0); N]; 7];
            k[0] = k0;
            for s in 1..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        for i in 0..N {
                            ys[i] += kj[i] * (a * h);
                        }
                    }
                }
                k[s] = f(t + C[s] * h, &ys);
            }
            let mut y_new = y;
            for (j, kj) in k.iter().enumerate().take(6) {
                let b = A[6][j];
                if b != 0.0 {
                    for i in 0..N {
                        y_new[i] += kj[i] * (b * h);
                    }
                }
            }
            // k[6] was evaluated at y_new, so it doubles as next step's k0
            let mut err: f64 = 0.0;
            for i in 0..N {
                let mut e = Complex64::new(0.0, 0.0);
                for (j, kj) in k.iter().enumerate() {
                    if E[j] != 0.0 {
                        e += kj[i] * E[j];
                    }
                }
                let scale = self.atol + self.rtol * y[i].norm().max(y_new[i].norm());
                err = err.max((e * h).norm() / scale);
            }
            if !err.is_finite() {
                stats.rejected += 1;
                h *= 0.1;
                if h.abs() < h_floor {
                    return Err(KmrError::Transport { at: t, step: h });
                }
                continue;
            }
            if err <= 1.0 {
                t += h;
                y = y_new;
                k0 = k[6];
                stats.accepted += 1;
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                h *= factor;
            } else {
                stats.rejected += 1;
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h.abs() < h_floor {
                    return Err(KmrError::Transport { at: t, step: h });
                }
            }
        }
        Ok((y, stats))
    }
}

fn initial_step<const N: usize>(
    k0: &[Complex64; N],
    y0: &[Complex64; N],
    rtol: f64,
    atol: f64,
    span: f64,
) -> f64 {
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for i in 0..N {
        let sc = atol + rtol * y0[i].norm();
        d0 = d0.max(y0[i].norm() / sc);
        d1 = d1.max(k0[i].norm() / sc);
    }
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h.min(span).max(span * 1e-10)
}

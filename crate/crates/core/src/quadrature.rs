//! Adaptive composite Gauss-Legendre quadrature.
//!
//! Each panel is integrated with an `n`-point Gauss-Legendre rule and compared
//! against the sum over its two halves; panels are bisected until the local
//! discrepancy falls below the tolerance share of the panel. Integrands with
//! square-root endpoint singularities are expected to be regularized by the
//! caller (typically with a trigonometric substitution) before they get here.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by std inherents when std is in the graph
use num_traits::Float;

use crate::error::{KmrError, Result};

/// Nodes and weights of an `n`-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "Gauss-Legendre rule needs at least two nodes");
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes_weights(&self) -> (&[f64], &[f64]) {
        (&self.nodes, &self.weights)
    }

    /// Single-panel estimate of the integral over [a, b].
    pub fn panel<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// Returns (P_n(x), P_n'(x)).
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    (p1, n * (x * p1 - p0) / (x * x - 1.0))
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Adaptive integrator with an absolute tolerance over the whole interval.
#[derive(Debug, Clone)]
pub struct AdaptiveGauss {
    rule: GaussLegendre,
    pub tolerance: f64,
    pub max_depth: u32,
    /// Bisections allowed before giving up.
    pub max_splits: usize,
}

impl Default for AdaptiveGauss {
    fn default() -> Self {
        Self::new(1e-11)
    }
}

impl AdaptiveGauss {
    pub fn new(tolerance: f64) -> Self {
        AdaptiveGauss {
            rule: GaussLegendre::new(20),
            tolerance,
            max_depth: 40,
            max_splits: 1 << 16,
        }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Result<Quadrature> {
        if a == b {
            return Ok(Quadrature {
                value: 0.0,
                error: 0.0,
                panels: 0,
            });
        }
        let whole = self.rule.panel(&mut f, a, b);
        let mut stack: Vec<(f64, f64, f64, u32)> = Vec::new();
        stack.push((a, b, whole, 0));
        let width = (b - a).abs();
        let mut value = 0.0;
        let mut error = 0.0;
        let mut panels = 0;
        let mut failed = false;
        let mut splits = 0;
        while let Some((lo, hi, coarse, depth)) = stack.pop() {
            splits += 1;
            if splits > self.max_splits {
                return Err(KmrError::Quadrature {
                    achieved: error + (self.rule.panel(&mut f, lo, hi) - coarse).abs(),
                    requested: self.tolerance,
                });
            }
            let mid = 0.5 * (lo + hi);
            let left = self.rule.panel(&mut f, lo, mid);
            let right = self.rule.panel(&mut f, mid, hi);
            let fine = left + right;
            let diff = (fine - coarse).abs();
            let share = self.tolerance * ((hi - lo).abs() / width).max(1e-3);
            if !fine.is_finite() {
                return Err(KmrError::Quadrature {
                    achieved: f64::INFINITY,
                    requested: self.tolerance,
                });
            }
            if diff <= share || depth >= self.max_depth {
                if depth >= self.max_depth && diff > share {
                    failed = true;
                }
                value += fine;
                error += diff;
                panels += 1;
            } else {
                stack.push((lo, mid, left, depth + 1));
                stack.push((mid, hi, right, depth + 1));
            }
        }
        if failed && error > self.tolerance {
            return Err(KmrError::Quadrature {
                achieved: error,
                requested: self.tolerance,
            });
        }
        Ok(Quadrature {
            value,
            error,
            panels,
        })
    }
}

/// Convenience wrapper: adaptive Gauss-Legendre at the given absolute tolerance.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tolerance: f64) -> Result<f64> {
    AdaptiveGauss::new(tolerance).integrate(f, a, b).map(|q| q.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rule_weights_sum_to_two() {
        for n in [2, 5, 20, 31] {
            let g = GaussLegendre::new(n);
            let s: f64 = g.weights.iter().sum();
            assert_relative_eq!(s, 2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn polynomials_are_exact() {
        let g = GaussLegendre::new(5);
        // degree 9 is the highest exact degree for 5 nodes
        let v = g.panel(&mut |x: f64| x.powi(8) + x.powi(9), -1.0, 1.0);
        assert_relative_eq!(v, 2.0 / 9.0, epsilon = 1e-14);
    }

    #[test]
    fn smooth_periodic_integrand() {
        let v = integrate(|x: f64| x.sin().exp(), 0.0, 2.0 * PI, 1e-13).unwrap();
        // 2 pi I_0(1)
        assert_relative_eq!(v, 7.954_926_521_012_845, epsilon = 1e-12);
    }

    #[test]
    fn substituted_endpoint_singularity() {
        // int_0^1 ds / sqrt(1 - s^2) = pi/2 after s = sin(phi)
        let v = integrate(|_phi: f64| 1.0, 0.0, PI / 2.0, 1e-13).unwrap();
        assert_relative_eq!(v, PI / 2.0, epsilon = 1e-14);
        // sharp Lorentzian peak needs many bisections
        let eps: f64 = 1e-4;
        let v = integrate(|x: f64| eps / (x * x + eps * eps), -1.0, 1.0, 1e-11).unwrap();
        assert_relative_eq!(v, 2.0 * (1.0 / eps).atan(), epsilon = 1e-10);
    }

    #[test]
    fn reversed_interval_changes_sign() {
        let a = integrate(|x: f64| x * x, 0.0, 3.0, 1e-12).unwrap();
        let b = integrate(|x: f64| x * x, 3.0, 0.0, 1e-12).unwrap();
        assert_relative_eq!(a, 9.0, epsilon = 1e-12);
        assert_relative_eq!(a, -b, epsilon = 1e-12);
    }
}

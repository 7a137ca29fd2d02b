//! The map `φ(θ, α) = (h, a)` and its inverse.
//!
//! Newton runs in the coordinates `s = ln tan θ` and `α` taken modulo `π`,
//! so the iterate never leaves the open parameter domain: `s ∈ ℝ` covers
//! `θ ∈ (0, π/2)` and the seam `α = ±π/2` is crossed by wrapping.

pub mod limits;

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

#[allow(unused_imports)] // shadowed by std inherents when std is in the graph
use num_traits::Float;

use crate::error::{KmrError, Result};
use crate::graph::{strip_of_params, MarkedStrip};
use crate::weierstrass::{period_t, reduce_half, wrap_alpha, SurfaceParams};

/// `φ(θ, α)` as a marked strip. Fails if the periods give an infeasible
/// strip, which would contradict the construction.
pub fn phi(theta: f64, alpha: f64) -> Result<MarkedStrip> {
    strip_of_params(&SurfaceParams::new(theta, alpha)?)
}

/// `(|T3|/4, T1/4 mod 1)` without the feasibility check.
pub fn phi_values(theta: f64, alpha: f64) -> Result<(f64, f64)> {
    let p = SurfaceParams::new(theta, wrap_alpha(alpha))?;
    let t = period_t(&p)?;
    Ok((0.25 * t.x3().abs(), reduce_half(0.25 * t.x1())))
}

/// Residual `φ(θ, α) - (h, a)` with the `a` component taken on the circle.
fn residual(value: (f64, f64), target: (f64, f64)) -> [f64; 2] {
    [value.0 - target.0, reduce_half(value.1 - target.1)]
}

fn norm(r: [f64; 2]) -> f64 {
    r[0].hypot(r[1])
}

fn theta_of_s(s: f64) -> f64 {
    s.exp().atan()
}

fn s_of_theta(theta: f64) -> f64 {
    theta.tan().ln()
}

pub const SEED_THETA_RANGE: (f64, f64) = (2e-3, 1.55);
pub const SEED_SIZE: usize = 16;

/// Seeding grid over the parameter rectangle with cached `φ` values.
///
/// `θ` is log-spaced because `h` grows like `-ln θ / π` near `θ = 0`. The
/// `α` nodes are `-π/2 + (j+1)π/16`, so `α = 0` and `α = π/2` are both
/// present and `-π/2` is covered by the seam.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterDomain {
    pub thetas: Vec<f64>,
    pub alphas: Vec<f64>,
    values: Vec<Option<(f64, f64)>>,
}

impl ParameterDomain {
    pub fn seed_thetas() -> Vec<f64> {
        let (lo, hi) = SEED_THETA_RANGE;
        (0..SEED_SIZE)
            .map(|i| lo * (hi / lo).powf(i as f64 / (SEED_SIZE - 1) as f64))
            .collect()
    }

    pub fn seed_alphas() -> Vec<f64> {
        (0..SEED_SIZE)
            .map(|j| {
                if j + 1 == SEED_SIZE {
                    FRAC_PI_2
                } else {
                    -FRAC_PI_2 + (j + 1) as f64 * PI / SEED_SIZE as f64
                }
            })
            .collect()
    }

    /// Grid nodes in row-major order (`θ` outer), for external evaluation.
    pub fn grid_points() -> Vec<(f64, f64)> {
        let alphas = Self::seed_alphas();
        Self::seed_thetas()
            .into_iter()
            .flat_map(|t| alphas.iter().map(move |&a| (t, a)))
            .collect()
    }

    /// Sequential evaluation of the whole grid.
    pub fn new() -> Self {
        let values = Self::grid_points().into_iter().map(|(t, a)| phi_values(t, a).ok()).collect();
        Self::from_values(values).expect("grid size matches")
    }

    /// Wraps values computed elsewhere, in [`grid_points`](Self::grid_points)
    /// order. Failed nodes are `None`.
    pub fn from_values(values: Vec<Option<(f64, f64)>>) -> Result<Self> {
        if values.len() != SEED_SIZE * SEED_SIZE {
            return Err(KmrError::Configuration(alloc::format!(
                "expected {} grid values, got {}",
                SEED_SIZE * SEED_SIZE,
                values.len()
            )));
        }
        Ok(ParameterDomain {
            thetas: Self::seed_thetas(),
            alphas: Self::seed_alphas(),
            values,
        })
    }

    pub fn get(&self, i: usize, j: usize) -> Option<(f64, f64)> {
        self.values.get(i * self.alphas.len() + j).copied().flatten()
    }

    /// Grid nodes sorted by residual against `(h, a)`, best first.
    pub fn seeds(&self, h: f64, a: f64) -> Vec<(f64, f64, f64)> {
        let mut out: Vec<(f64, f64, f64)> = Vec::new();
        for (i, &t) in self.thetas.iter().enumerate() {
            for (j, &al) in self.alphas.iter().enumerate() {
                if let Some(v) = self.get(i, j) {
                    out.push((t, al, norm(residual(v, (h, a)))));
                }
            }
        }
        out.sort_by(|x, y| x.2.total_cmp(&y.2));
        out
    }
}

impl Default for ParameterDomain {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub fd_step: f64,
    pub max_iterations: usize,
    /// Number of grid seeds tried before giving up.
    pub max_seeds: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-6,
            fd_step: 1e-5,
            max_iterations: 50,
            max_seeds: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveResult {
    pub theta: f64,
    pub alpha: f64,
    /// `‖φ(θ, α) - (h, a)‖` with `a` compared modulo 1.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `φ(θ, α)` at the returned point.
    pub h: f64,
    pub a: f64,
}

/// Finds `(θ, α)` whose graph solves the Jenkins-Serrin problem on `S(h, a)`.
/// Builds the seeding grid on every call; see [`solve_strip_with`] to reuse one.
pub fn solve_strip(h: f64, a: f64, tol: f64) -> Result<SolveResult> {
    let domain = ParameterDomain::new();
    solve_strip_with(
        &domain,
        h,
        a,
        SolveOptions {
            tol,
            ..SolveOptions::default()
        },
    )
}

pub fn solve_strip_with(domain: &ParameterDomain, h: f64, a: f64, opts: SolveOptions) -> Result<SolveResult> {
    if !(h.is_finite() && a.is_finite()) {
        return Err(KmrError::Domain {
            name: "h",
            value: if h.is_finite() { a } else { h },
            domain: "finite",
        });
    }
    if !(opts.tol > 0.0) {
        return Err(KmrError::Domain {
            name: "tol",
            value: opts.tol,
            domain: "(0, inf)",
        });
    }
    let strip = MarkedStrip::new(h, a)?;
    if !strip.feasible() {
        return Err(KmrError::Infeasible { h, a: strip.a });
    }
    let target = (strip.h, strip.a);
    let mut best: Option<SolveResult> = None;
    let mut total = 0;
    for (theta, alpha, _) in domain.seeds(target.0, target.1).into_iter().take(opts.max_seeds.max(1)) {
        let r = newton(theta, alpha, target, &opts);
        total += r.iterations;
        if r.converged {
            return Ok(SolveResult { iterations: total, ..r });
        }
        if best.is_none_or(|b| r.residual < b.residual) {
            best = Some(r);
        }
    }
    let b = best.ok_or_else(|| KmrError::Inconsistent("the seeding grid has no finite values".into()))?;
    Err(KmrError::NoConvergence {
        theta: b.theta,
        alpha: b.alpha,
        residual: b.residual,
        iterations: total,
    })
}

struct Iterate {
    s: f64,
    alpha: f64,
    value: (f64, f64),
    r: [f64; 2],
    norm: f64,
}

fn eval(s: f64, alpha: f64, target: (f64, f64)) -> Option<Iterate> {
    let alpha = wrap_alpha(alpha);
    let theta = theta_of_s(s);
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return None;
    }
    let value = phi_values(theta, alpha).ok()?;
    let r = residual(value, target);
    Some(Iterate {
        s,
        alpha,
        value,
        r,
        norm: norm(r),
    })
}

// Largest accepted step in (s, α).
const MAX_STEP: [f64; 2] = [2.0, 0.5];

fn newton(theta0: f64, alpha0: f64, target: (f64, f64), opts: &SolveOptions) -> SolveResult {
    let result = |x: &Iterate, it: usize, tol: f64| SolveResult {
        theta: theta_of_s(x.s),
        alpha: x.alpha,
        residual: x.norm,
        iterations: it,
        converged: x.norm <= tol,
        h: x.value.0,
        a: x.value.1,
    };
    let Some(mut x) = eval(s_of_theta(theta0), alpha0, target) else {
        return SolveResult {
            theta: theta0,
            alpha: alpha0,
            residual: f64::INFINITY,
            iterations: 0,
            converged: false,
            h: f64::NAN,
            a: f64::NAN,
        };
    };
    // iterate past `tol` while it still pays, so the parameters settle too
    let goal = 1e-3 * opts.tol;
    let step = opts.fd_step;
    for it in 1..=opts.max_iterations {
        if x.norm <= goal {
            return result(&x, it - 1, opts.tol);
        }
        let (Some(xs), Some(xa)) = (eval(x.s + step, x.alpha, target), eval(x.s, x.alpha + step, target)) else {
            return result(&x, it, opts.tol);
        };
        let j = [
            [(xs.r[0] - x.r[0]) / step, (xa.r[0] - x.r[0]) / step],
            [(xs.r[1] - x.r[1]) / step, (xa.r[1] - x.r[1]) / step],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !(det.abs() > 0.0) || !det.is_finite() {
            return result(&x, it, opts.tol);
        }
        let mut d = [
            (j[1][1] * x.r[0] - j[0][1] * x.r[1]) / det,
            (-j[1][0] * x.r[0] + j[0][0] * x.r[1]) / det,
        ];
        let scale = (d[0].abs() / MAX_STEP[0]).max(d[1].abs() / MAX_STEP[1]).max(1.0);
        d[0] /= scale;
        d[1] /= scale;
        let mut damping = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            if let Some(y) = eval(x.s - damping * d[0], x.alpha - damping * d[1], target) {
                if y.norm < x.norm {
                    accepted = Some(y);
                    break;
                }
            }
            damping *= 0.5;
        }
        match accepted {
            Some(y) => x = y,
            None => return result(&x, it, opts.tol),
        }
    }
    result(&x, opts.max_iterations, opts.tol)
}

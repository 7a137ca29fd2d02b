//! Machine-readable reports. Field names are the public schema; see
//! `schemas/` for the JSON Schema of each report.

use serde::Serialize;

use kmr_core::graph::{EdgeLabel, GraphReport, Row};
use kmr_core::solver::limits::{LimitReport, Regime};
use kmr_core::solver::SolveResult;
use kmr_core::weierstrass::{flux_around_end, periods_report, EndLabel, SurfaceParams};
use kmr_core::{Result, Vec3};

/// Tolerance for the invariants rechecked by `params`.
pub const INVARIANT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamsReport {
    pub theta: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub mu: f64,
    /// Period at the end `A`.
    #[serde(rename = "P")]
    pub p: [f64; 3],
    /// Period along `γ̃`, oriented from `D'''` to `D`.
    #[serde(rename = "T")]
    pub t: [f64; 3],
    #[serde(rename = "flux_A")]
    pub flux_a: [f64; 3],
    pub h: f64,
    pub a: f64,
    pub feasible: bool,
    pub invariants: Invariants,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Invariants {
    /// `max |P - (2,0,0)| / 2`.
    pub end_period_error: f64,
    /// Largest deviation of the four end fluxes from `±(0,-2,0)`.
    pub flux_error: f64,
    pub t2: f64,
    pub ok: bool,
}

impl ParamsReport {
    pub fn compute(params: &SurfaceParams) -> Result<Self> {
        let r = periods_report(params)?;
        let end_period_error = (r.p - Vec3::new(2.0, 0.0, 0.0)).max_abs() / 2.0;
        let mut flux_error: f64 = 0.0;
        for label in EndLabel::ALL {
            let f = if label == EndLabel::A { r.flux_a } else { flux_around_end(label, params)? };
            let expected = Vec3::new(0.0, -2.0, 0.0) * label.flux_sign();
            flux_error = flux_error.max((f - expected).max_abs());
        }
        let t2 = r.t.x2();
        let ok = end_period_error <= INVARIANT_TOL && flux_error <= INVARIANT_TOL && t2.abs() <= INVARIANT_TOL;
        Ok(ParamsReport {
            theta: params.theta,
            alpha: params.alpha,
            lambda: params.torus.lambda,
            mu: params.mu,
            p: r.p.0,
            t: r.t.0,
            flux_a: r.flux_a.0,
            h: r.h,
            a: r.a,
            feasible: r.feasible(),
            invariants: Invariants {
                end_period_error,
                flux_error,
                t2,
                ok,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    /// Requested strip, as given.
    pub h: f64,
    pub a: f64,
    pub tol: f64,
    pub converged: bool,
    pub theta: f64,
    pub alpha: f64,
    pub residual: f64,
    pub iterations: usize,
    /// `φ(θ, α)` at the returned point.
    pub phi: [f64; 2],
}

impl SolveReport {
    pub fn new(h: f64, a: f64, tol: f64, r: &SolveResult) -> Self {
        SolveReport {
            h,
            a,
            tol,
            converged: r.converged,
            theta: r.theta,
            alpha: r.alpha,
            residual: r.residual,
            iterations: r.iterations,
            phi: [r.h, r.a],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub theta: f64,
    pub alpha: f64,
    pub resolution: [usize; 2],
    pub all_ok: bool,
    pub quarter_sphere_ok: bool,
    pub sigma_injective_ok: bool,
    pub projection_collisions: usize,
    pub boundary_label_ok: bool,
    pub min_n2: f64,
    pub normal_arc: f64,
    pub c1_monotone: bool,
    pub c2_monotone: bool,
    pub c3_monotone: bool,
    pub sigma_crossings: usize,
    pub c2_c3_offset_error: f64,
    pub folds: usize,
    pub strip: [f64; 2],
    pub edges: Vec<EdgeReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeReport {
    pub row: &'static str,
    pub n: i64,
    pub expected: &'static str,
    pub x1: f64,
    pub x2: [f64; 3],
    pub rates: [f64; 2],
    pub ok: bool,
}

impl VerifyReport {
    pub fn new(params: &SurfaceParams, resolution: [usize; 2], g: &GraphReport) -> Self {
        let d = &g.details;
        VerifyReport {
            theta: params.theta,
            alpha: params.alpha,
            resolution,
            all_ok: g.all_ok(),
            quarter_sphere_ok: g.quarter_sphere_ok,
            sigma_injective_ok: g.sigma_injective_ok,
            projection_collisions: g.projection_collisions,
            boundary_label_ok: g.boundary_label_ok,
            min_n2: d.min_n2,
            normal_arc: d.normal_arc,
            c1_monotone: d.c1_monotone,
            c2_monotone: d.c2_monotone,
            c3_monotone: d.c3_monotone,
            sigma_crossings: d.sigma_crossings,
            c2_c3_offset_error: d.c2_c3_offset_error,
            folds: d.folds,
            strip: [d.strip.h, d.strip.a],
            edges: d
                .edges
                .iter()
                .map(|e| EdgeReport {
                    row: match e.row {
                        Row::Bottom => "bottom",
                        Row::Top => "top",
                    },
                    n: e.n,
                    expected: match e.expected {
                        EdgeLabel::PlusInfinity => "+inf",
                        EdgeLabel::MinusInfinity => "-inf",
                    },
                    x1: e.x1,
                    x2: e.x2,
                    rates: e.rates,
                    ok: e.ok,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitsReport {
    pub regime: &'static str,
    pub alpha_inf: Option<f64>,
    pub decreasing: bool,
    pub samples: Vec<LimitSampleReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitSampleReport {
    pub theta: f64,
    pub alpha: f64,
    pub distance: f64,
    pub alternation: Option<bool>,
}

impl From<&LimitReport> for LimitsReport {
    fn from(r: &LimitReport) -> Self {
        LimitsReport {
            regime: r.regime.name(),
            alpha_inf: match r.regime {
                Regime::Scherk2p { alpha_inf } => Some(alpha_inf),
                _ => None,
            },
            decreasing: r.decreasing,
            samples: r
                .samples
                .iter()
                .map(|s| LimitSampleReport {
                    theta: s.theta,
                    alpha: s.alpha,
                    distance: s.distance,
                    alternation: s.alternation,
                })
                .collect(),
        }
    }
}

//! Weierstrass data of the surfaces `M_{θ,α,π/2}`: Gauss map, height
//! differential, position integrals, periods and fluxes.
//!
//! With `ζ = e^{iα} z` the Gauss map is `g = -i(ζ+i)/(ζ-i)` and the height
//! differential is `dh = μ dz/w = μ du`. The three form densities per `du` are
//!
//! ```text
//! φ1 = ½(1/g - g)μ  = iμ(ζ²-1)/(ζ²+1)
//! φ2 = ½i(1/g + g)μ = 2iμζ/(ζ²+1)
//! φ3 = μ
//! ```
//!
//! so everything is integrated in the flat chart and the only singularities
//! are the four Scherk ends `ζ = ±i`.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std inherents when std is in the graph
use num_traits::Float;

use crate::curve::{build_flat_chart, ChartPath, CurvePoint, FlatChart, Segment, TorusParams};
use crate::error::{KmrError, Result};
use crate::geom::Vec3;
use crate::quadrature::AdaptiveGauss;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default end-exclusion radius as a fraction of `min(ω_h, ω_v)`.
pub const EPS_END_FACTOR: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceParams {
    pub theta: f64,
    pub alpha: f64,
    /// Fixed at `π/2` for the whole family handled here.
    pub beta: f64,
    pub mu: f64,
    pub torus: TorusParams,
    pub chart: FlatChart,
    pub ends: EndPoints,
}

/// Value of the stereographic Gauss map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaussValue {
    Finite(Complex64),
    Infinity,
}

impl GaussValue {
    /// Inverse stereographic projection `(2Re g, 2Im g, |g|²-1)/(|g|²+1)`.
    pub fn normal(&self) -> Vec3 {
        match *self {
            GaussValue::Infinity => Vec3::new(0.0, 0.0, 1.0),
            GaussValue::Finite(g) => {
                let n2 = g.norm_sqr();
                let d = n2 + 1.0;
                Vec3::new(2.0 * g.re / d, 2.0 * g.im / d, (n2 - 1.0) / d)
            }
        }
    }

    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            GaussValue::Finite(g) => Some(g),
            GaussValue::Infinity => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EndLabel {
    A,
    Ap,
    App,
    Appp,
}

impl EndLabel {
    pub const ALL: [EndLabel; 4] = [EndLabel::A, EndLabel::Ap, EndLabel::App, EndLabel::Appp];

    pub fn name(&self) -> &'static str {
        match self {
            EndLabel::A => "A",
            EndLabel::Ap => "A'",
            EndLabel::App => "A''",
            EndLabel::Appp => "A'''",
        }
    }

    /// Ends where `g` has a pole (`A`, `A''`).
    pub fn is_pole(&self) -> bool {
        matches!(self, EndLabel::A | EndLabel::App)
    }

    pub fn side(&self) -> Side {
        match self {
            EndLabel::A | EndLabel::Appp => Side::Left,
            EndLabel::Ap | EndLabel::App => Side::Right,
        }
    }

    /// Sign `s` with `Per = s·(2,0,0)`.
    pub fn period_sign(&self) -> f64 {
        match self {
            EndLabel::A | EndLabel::Ap => 1.0,
            EndLabel::App | EndLabel::Appp => -1.0,
        }
    }

    /// Sign `s` with `Fl = s·(0,-2,0)`.
    pub fn flux_sign(&self) -> f64 {
        match self.side() {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct End {
    pub label: EndLabel,
    pub point: CurvePoint,
    /// Chart coordinate in the cell `Re u ∈ {±ω_h/2}`.
    pub u: Complex64,
}

/// The four Scherk ends. `A, A'` sit on the column `Re u = -ω_h/2`,
/// `A'', A'''` on `Re u = ω_h/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndPoints {
    pub a: End,
    pub ap: End,
    pub app: End,
    pub appp: End,
}

impl EndPoints {
    pub fn get(&self, label: EndLabel) -> &End {
        match label {
            EndLabel::A => &self.a,
            EndLabel::Ap => &self.ap,
            EndLabel::App => &self.app,
            EndLabel::Appp => &self.appp,
        }
    }

    pub fn all(&self) -> [End; 4] {
        [self.a, self.ap, self.app, self.appp]
    }
}

/// `μ = 2√(1 - sin²θ cos²α)/(π sin θ)`, the value making the end period `(2,0,0)`.
pub fn normalize_mu(theta: f64, alpha: f64) -> f64 {
    let s = theta.sin();
    let c = alpha.cos();
    2.0 * (1.0 - s * s * c * c).sqrt() / (PI * s)
}

/// First component of the end period for a given `μ`.
pub fn end_period_closed_form(theta: f64, alpha: f64, mu: f64) -> f64 {
    let s = theta.sin();
    let c = alpha.cos();
    mu * PI * s / (1.0 - s * s * c * c).sqrt()
}

/// Maps `α` into `(-π/2, π/2]`.
pub fn wrap_alpha(alpha: f64) -> f64 {
    let mut a = alpha - PI * ((alpha - FRAC_PI_2) / PI).ceil();
    if a <= -FRAC_PI_2 {
        a += PI;
    }
    a
}

impl SurfaceParams {
    /// `θ ∈ (0, π/2)`, `α ∈ [-π/2, π/2]`; `α = -π/2` is identified with `π/2`.
    pub fn new(theta: f64, alpha: f64) -> Result<Self> {
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&alpha) {
            return Err(KmrError::Domain {
                name: "alpha",
                value: alpha,
                domain: "(-pi/2, pi/2]",
            });
        }
        let alpha = if alpha == -FRAC_PI_2 { FRAC_PI_2 } else { alpha };
        let torus = TorusParams::new(theta)?;
        let chart = build_flat_chart(torus)?;
        let mu = normalize_mu(theta, alpha);
        let ends = locate_ends(&chart, alpha)?;
        Ok(SurfaceParams {
            theta,
            alpha,
            beta: FRAC_PI_2,
            mu,
            torus,
            chart,
            ends,
        })
    }

    pub fn eps_end(&self) -> f64 {
        EPS_END_FACTOR * self.chart.min_omega()
    }

    pub fn rotation(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.alpha)
    }

    /// All lattice translates of the ends within `radius` of `u`.
    ///
    /// The end set is invariant under `u ↦ u + 2ω_h` and `u ↦ u + iω_v`
    /// (the latter swapping `A ↔ A'` and `A'' ↔ A'''`).
    pub fn ends_near(&self, u: Complex64, radius: f64) -> Vec<(EndLabel, Complex64)> {
        let oh = self.chart.omega_h;
        let ov = self.chart.omega_v;
        let mut out = Vec::new();
        for base in [self.ends.ap, self.ends.app] {
            let k0 = ((u.re - radius - base.u.re) / (2.0 * oh)).floor() as i64;
            let k1 = ((u.re + radius - base.u.re) / (2.0 * oh)).ceil() as i64;
            let m0 = ((u.im - radius - base.u.im) / ov).floor() as i64;
            let m1 = ((u.im + radius - base.u.im) / ov).ceil() as i64;
            for k in k0..=k1 {
                for m in m0..=m1 {
                    let p = base.u + Complex64::new(2.0 * oh * k as f64, ov * m as f64);
                    if (p - u).norm() <= radius {
                        let odd = m.rem_euclid(2) == 1;
                        let label = match (base.label, odd) {
                            (EndLabel::Ap, false) => EndLabel::Ap,
                            (EndLabel::Ap, true) => EndLabel::A,
                            (_, false) => EndLabel::App,
                            (_, true) => EndLabel::Appp,
                        };
                        out.push((label, p));
                    }
                }
            }
        }
        out
    }

    /// Nearest end to `u` (over all lattice translates) and its distance.
    pub fn nearest_end(&self, u: Complex64) -> (EndLabel, Complex64, f64) {
        let reach = self.chart.omega_h + self.chart.omega_v;
        self.ends_near(u, reach)
            .into_iter()
            .map(|(l, p)| (l, p, (p - u).norm()))
            .fold((EndLabel::A, u, f64::INFINITY), |best, x| if x.2 < best.2 { x } else { best })
    }

    fn check_path_ends(&self, path: &ChartPath, eps: f64) -> Result<()> {
        for seg in &path.segments {
            let mid = seg.point(0.5);
            for (label, p) in self.ends_near(mid, seg.length() + eps) {
                let d = seg.distance_to(p);
                if d < eps {
                    return Err(KmrError::NearEnd {
                        end: label.name(),
                        distance: d,
                        radius: eps,
                    });
                }
            }
        }
        Ok(())
    }
}

fn locate_ends(chart: &FlatChart, alpha: f64) -> Result<EndPoints> {
    let oh = chart.omega_h;
    let up = chart.circle_height(FRAC_PI_2 + alpha)?;
    let um = chart.circle_height(FRAC_PI_2 - alpha)?;
    let z_pole = I * Complex64::from_polar(1.0, -alpha);
    let z_zero = -z_pole;
    let mk = |label: EndLabel, u: Complex64, z: Complex64| -> Result<End> {
        let t = chart.z_of_u(u)?;
        if (t.z - z).norm() > 1e-8 * (1.0 + z.norm()) {
            return Err(KmrError::Inconsistent(alloc::format!(
                "end {} expected z = {}, transported z = {}",
                label.name(),
                z,
                t.z
            )));
        }
        Ok(End {
            label,
            point: CurvePoint::new(z, t.w),
            u,
        })
    };
    Ok(EndPoints {
        a: mk(EndLabel::A, Complex64::new(-0.5 * oh, up), z_pole)?,
        ap: mk(EndLabel::Ap, Complex64::new(-0.5 * oh, -um), z_zero)?,
        app: mk(EndLabel::App, Complex64::new(0.5 * oh, um), z_pole)?,
        appp: mk(EndLabel::Appp, Complex64::new(0.5 * oh, -up), z_zero)?,
    })
}

/// `g(z) = -i + 2/(e^{iα}z - i)`.
pub fn gauss_map(p: &CurvePoint, params: &SurfaceParams) -> GaussValue {
    gauss_of_z(p.z, params.alpha)
}

pub fn gauss_of_z(z: Complex64, alpha: f64) -> GaussValue {
    let zeta = Complex64::from_polar(1.0, alpha) * z;
    let den = zeta - I;
    if den.norm() <= 1e-300 {
        GaussValue::Infinity
    } else {
        GaussValue::Finite(-I * (zeta + I) / den)
    }
}

/// Form densities per `du` at `z`, no singularity check.
#[inline]
pub fn forms_of_z(z: Complex64, rot: Complex64, mu: f64) -> [Complex64; 3] {
    let zeta = rot * z;
    let z2 = zeta * zeta;
    let inv = 1.0 / (z2 + 1.0);
    [
        I * mu * (z2 - 1.0) * inv,
        I * (2.0 * mu) * zeta * inv,
        Complex64::new(mu, 0.0),
    ]
}

/// Weierstrass form densities per `du`.
pub fn integrand(p: &CurvePoint, params: &SurfaceParams) -> Result<[Complex64; 3]> {
    let zeta = params.rotation() * p.z;
    if (zeta * zeta + 1.0).norm() < 1e-12 {
        return Err(KmrError::SingularPoint(p.z));
    }
    Ok(forms_of_z(p.z, params.rotation(), params.mu))
}

/// Real (or imaginary, for the conjugate) part of a complex 3-vector.
pub fn project(v: &[Complex64; 3], conjugate: bool) -> Vec3 {
    if conjugate {
        Vec3::new(v[0].im, v[1].im, v[2].im)
    } else {
        Vec3::new(v[0].re, v[1].re, v[2].re)
    }
}

/// Complex integral of the forms along `path` starting from `start`
/// (which must be the curve point at the path's first vertex).
pub fn integrate_forms_from(
    params: &SurfaceParams,
    path: &ChartPath,
    start: CurvePoint,
) -> Result<crate::curve::Transported> {
    integrate_forms_near(params, path, start, params.eps_end())
}

/// As [`integrate_forms_from`] with an explicit end-exclusion radius.
pub fn integrate_forms_near(
    params: &SurfaceParams,
    path: &ChartPath,
    start: CurvePoint,
    eps: f64,
) -> Result<crate::curve::Transported> {
    params.check_path_ends(path, eps)?;
    let rot = params.rotation();
    let mu = params.mu;
    params.chart.transport_with(path, start, |z| forms_of_z(z, rot, mu))
}

/// Complex integral of the forms along `path`, starting point located by
/// transport from the base point.
pub fn integrate_forms(params: &SurfaceParams, path: &ChartPath) -> Result<[Complex64; 3]> {
    let Some(u0) = path.start() else {
        return Ok([Complex64::new(0.0, 0.0); 3]);
    };
    let start = params.chart.z_of_u(u0)?;
    integrate_forms_from(params, path, start).map(|t| t.integrals)
}

/// `Re ∫` (or `Im ∫` with `conjugate`) of the forms along `path`.
pub fn integrate_position(path: &ChartPath, params: &SurfaceParams, conjugate: bool) -> Result<Vec3> {
    integrate_forms(params, path).map(|v| project(&v, conjugate))
}

/// `Im ∫` of the forms along a path or loop.
pub fn flux_along(path: &ChartPath, params: &SurfaceParams) -> Result<Vec3> {
    integrate_position(path, params, true)
}

/// Counterclockwise circle of radius `r` around an end, starting on the side
/// facing the line `Re u = 0`.
pub fn end_loop(params: &SurfaceParams, label: EndLabel, r: f64) -> ChartPath {
    let e = params.ends.get(label).u;
    let start = if e.re < 0.0 { 0.0 } else { PI };
    let mut p = ChartPath::new();
    p.push(Segment::Arc {
        center: e,
        radius: r,
        start,
        end: start + 2.0 * PI,
    });
    p
}

/// Loop integral of the forms around an end, `∮` counterclockwise.
/// `r` must lie in `(ε_end, 2ε_end]`-ish; anything enclosing a second end or
/// a pole of `z` is rejected.
pub fn loop_around_end(params: &SurfaceParams, label: EndLabel, r: f64) -> Result<[Complex64; 3]> {
    let eps = params.eps_end();
    if !(r > 0.0 && r.is_finite()) {
        return Err(KmrError::Configuration(alloc::format!("loop radius {r} must be positive")));
    }
    let e = params.ends.get(label).u;
    let others = params.ends_near(e, r + eps);
    if others.len() > 1 || !params.chart.poles_near(e, r + params.chart.eps_pole()).is_empty() {
        return Err(KmrError::Configuration(alloc::format!(
            "loop of radius {r} around {} encloses another singularity",
            label.name()
        )));
    }
    let path = end_loop(params, label, r);
    let start = params.chart.z_of_u(path.start().unwrap_or(e))?;
    let rot = params.rotation();
    let mu = params.mu;
    // the loop is at distance r from its own end, so only the pole check applies
    params
        .chart
        .transport_with(&path, start, |z| forms_of_z(z, rot, mu))
        .map(|t| t.integrals)
}

/// `Re ∮` of the forms around an end on a loop of radius `1.5·ε_end`.
pub fn period_around_end(label: EndLabel, params: &SurfaceParams) -> Result<Vec3> {
    loop_around_end(params, label, 1.5 * params.eps_end()).map(|v| project(&v, false))
}

/// `Im ∮` of the forms around an end on a loop of radius `1.5·ε_end`.
pub fn flux_around_end(label: EndLabel, params: &SurfaceParams) -> Result<Vec3> {
    loop_around_end(params, label, 1.5 * params.eps_end()).map(|v| project(&v, true))
}

/// The horizontal chart line through `D'''` and `D`, from `Re u = -ω_h` to
/// `Re u = ω_h`, with half-circle detours of radius `2ε_end` around ends that
/// come closer than `ε_end`. Detours pass on the side away from the end; an
/// end exactly on the line is passed below on the left column and above on
/// the right column.
pub fn gamma_tilde(params: &SurfaceParams) -> ChartPath {
    let oh = params.chart.omega_h;
    let y0 = -0.5 * params.chart.omega_v;
    let eps = params.eps_end();
    let r = 2.0 * eps;
    let mut detours: Vec<(f64, f64)> = Vec::new();
    for x in [-0.5 * oh, 0.5 * oh] {
        for (_, p) in params.ends_near(Complex64::new(x, y0), eps) {
            let off = p.im - y0;
            let tie = 1e-9 * params.chart.omega_v;
            // +1: pass above the end, -1: pass below
            let side = if off > tie {
                -1.0
            } else if off < -tie {
                1.0
            } else if p.re < 0.0 {
                -1.0
            } else {
                1.0
            };
            detours.push((p.re, side));
        }
    }
    detours.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut path = ChartPath::new();
    let mut x = -oh;
    for (xe, side) in detours {
        path.push(Segment::Line {
            from: Complex64::new(x, y0),
            to: Complex64::new(xe - r, y0),
        });
        // from angle π to 0 through π/2 (above) or -π/2 (below)
        let (start, end) = if side > 0.0 { (PI, 0.0) } else { (-PI, 0.0) };
        path.push(Segment::Arc {
            center: Complex64::new(xe, y0),
            radius: r,
            start,
            end,
        });
        x = xe + r;
    }
    path.push(Segment::Line {
        from: Complex64::new(x, y0),
        to: Complex64::new(oh, y0),
    });
    path
}

/// Period along `γ̃`, traversed left to right in the chart.
pub fn period_t(params: &SurfaceParams) -> Result<Vec3> {
    period_t_with(params, &params.chart.ode)
}

/// Same as [`period_t`] with a caller-chosen transport tolerance.
pub fn period_t_with(params: &SurfaceParams, ode: &crate::ode::DormandPrince) -> Result<Vec3> {
    Ok(project(&gamma_tilde_integrals(params, ode)?, false))
}

/// Flux along `γ̃`.
pub fn flux_t(params: &SurfaceParams) -> Result<Vec3> {
    Ok(project(&gamma_tilde_integrals(params, &params.chart.ode)?, true))
}

/// Integrals of the forms along `γ̃`, computed as two legs transported
/// outwards from `D'''` at `Re u = 0`. Near `D` the curve is badly
/// conditioned when `λ` is large (`|z| = λ`, `w = 0`), so no leg may carry
/// errors picked up there into the rest of the path.
fn gamma_tilde_integrals(params: &SurfaceParams, ode: &crate::ode::DormandPrince) -> Result<[Complex64; 3]> {
    let path = gamma_tilde(params);
    let mut left = ChartPath::new();
    let mut right = ChartPath::new();
    for seg in &path.segments {
        match *seg {
            Segment::Line { from, to } if from.re < 0.0 && to.re > 0.0 => {
                let mid = Complex64::new(0.0, from.im);
                left.push(Segment::Line { from, to: mid });
                right.push(Segment::Line { from: mid, to });
            }
            _ if seg.point(0.5).re < 0.0 => left.push(*seg),
            _ => right.push(*seg),
        }
    }
    let mut chart = params.chart.clone();
    chart.ode = *ode;
    let start = chart.z_of_u(Complex64::new(0.0, -0.5 * params.chart.omega_v))?;
    let rot = params.rotation();
    let mu = params.mu;
    let forms = |z| forms_of_z(z, rot, mu);
    let r = chart.transport_with(&right, start, forms)?.integrals;
    let l = chart.transport_with(&left.reversed(), start, forms)?.integrals;
    Ok([r[0] - l[0], r[1] - l[1], r[2] - l[2]])
}

/// `T_1` by a real quadrature along the branch row instead of transport:
/// `T_1 = 4μ sin 2α ∫_0^{π/2} s/Q(s) dφ` with `Q = 1 - 2s²cos 2α + s⁴` and
/// `s² = λ⁻²cos²φ + λ²sin²φ`. At `α = 0` the integral degenerates and the
/// limit `T_1 = 2` is returned.
pub fn t1_quadrature(params: &SurfaceParams) -> Result<f64> {
    let alpha = params.alpha;
    if alpha == 0.0 {
        return Ok(2.0);
    }
    let l = params.torus.lambda;
    let li = params.torus.lambda_inv();
    let c2 = (2.0 * alpha).cos();
    let s2a = (2.0 * alpha).sin();
    let quad = AdaptiveGauss::new(1e-13);
    let f = |phi: f64| {
        let (sn, cs) = phi.sin_cos();
        let s2 = li * li * cs * cs + l * l * sn * sn;
        let q = (s2 - c2) * (s2 - c2) + s2a * s2a;
        s2.sqrt() / q
    };
    // the integrand peaks where s = 1 with width ~ sin 2α; split there
    let phi1 = ((1.0 - li * li) / (l * l - li * li)).sqrt().asin();
    let a = quad.integrate(f, 0.0, phi1)?.value;
    let b = quad.integrate(f, phi1, FRAC_PI_2)?.value;
    Ok(4.0 * params.mu * s2a * (a + b))
}

/// Closed form `T_3 = 2μω_h`.
pub fn t3_closed_form(params: &SurfaceParams) -> f64 {
    2.0 * params.mu * params.chart.omega_h
}

/// Reduces `x` modulo 1 into `(-1/2, 1/2]`.
pub fn reduce_half(x: f64) -> f64 {
    let mut r = x - x.round();
    if r <= -0.5 {
        r += 1.0;
    }
    if r > 0.5 {
        r -= 1.0;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodsReport {
    pub p: Vec3,
    pub t: Vec3,
    pub flux_a: Vec3,
    pub h: f64,
    pub a: f64,
}

impl PeriodsReport {
    pub fn feasible(&self) -> bool {
        self.a * self.a + self.h * self.h > 0.25
    }
}

/// Periods at `A`, along `γ̃`, flux at `A`, and the strip `(h, a)`.
///
/// `a` keeps the sign of `T_1`: `a = T_1/4` reduced into `(-1/2, 1/2]`.
pub fn periods_report(params: &SurfaceParams) -> Result<PeriodsReport> {
    let loop_a = loop_around_end(params, EndLabel::A, 1.5 * params.eps_end())?;
    let t = period_t(params)?;
    Ok(PeriodsReport {
        p: project(&loop_a, false),
        t,
        flux_a: project(&loop_a, true),
        h: 0.25 * t.x3().abs(),
        a: reduce_half(0.25 * t.x1()),
    })
}

/// The cycle `γ`: up the line `Re u = 0` over one vertical period, with a
/// clockwise rectangular excursion around the left-column end closest to
/// `Im u = 0`. `delta` scales the excursion (fraction of the half-periods).
pub fn gamma_cycle(params: &SurfaceParams, delta: f64) -> ChartPath {
    let oh = params.chart.omega_h;
    let ov = params.chart.omega_v;
    let y_ap = params.ends.ap.u.im;
    let y_e = if y_ap + ov < -y_ap { y_ap + ov } else { y_ap };
    let dy = delta * ov;
    let x_far = -0.5 * oh - delta * oh;
    ChartPath::polyline(&[
        Complex64::new(0.0, -ov),
        Complex64::new(0.0, y_e - dy),
        Complex64::new(x_far, y_e - dy),
        Complex64::new(x_far, y_e + dy),
        Complex64::new(0.0, y_e + dy),
        Complex64::new(0.0, ov),
    ])
}

/// `‖Re ∮_γ forms‖_∞` for the standard vanishing cycle.
pub fn vanishing_period_check(params: &SurfaceParams) -> Result<f64> {
    vanishing_period_with(params, 0.25)
}

pub fn vanishing_period_with(params: &SurfaceParams, delta: f64) -> Result<f64> {
    let path = gamma_cycle(params, delta);
    let v = integrate_forms(params, &path)?;
    Ok(project(&v, false).max_abs())
}

//! The spectral curve `w^2 = (z^2 + λ^2)(z^2 + λ^-2)` and its flat chart.
//!
//! The chart coordinate is `u = ∫ dz/w`. Instead of integrating `dz/w`,
//! which is singular at the branch points, points are transported with the
//! polynomial system `z' = w`, `w' = 2z^3 + cz` (`c = λ^2 + λ^-2`), which is
//! regular everywhere except at the poles of `z`. The sheet of `w` is then
//! carried along automatically.
//!
//! Chart conventions (lattice generated by `2ω_h` and `2iω_v`):
//! * `u = 0` is the point `(z, w) = (0, 1)`;
//! * `Re u = 0` is the segment `z ∈ i[-1/λ, 1/λ]`;
//! * `Re u = ±ω_h/2` is the unit circle;
//! * `Im u = ±ω_v/2` are the segments between the branch points on the
//!   imaginary axis;
//! * the poles of `z` sit at `(2k+1)ω_h + i m ω_v`;
//! * `u ↦ u + iω_v` acts as `(z, w) ↦ (-z, -w)`.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std inherents when std is in the graph
use num_traits::Float;

use crate::error::{KmrError, Result};
use crate::ode::DormandPrince;
use crate::quadrature::AdaptiveGauss;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative tolerance of the curve-equation residual.
pub const CURVE_RTOL: f64 = 1e-10;

/// Tolerance of the half-period quadratures.
const PERIOD_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusParams {
    pub theta: f64,
    pub lambda: f64,
}

impl TorusParams {
    pub fn new(theta: f64) -> Result<Self> {
        Ok(TorusParams {
            theta,
            lambda: lambda_of_theta(theta)?,
        })
    }

    pub fn lambda_inv(&self) -> f64 {
        1.0 / self.lambda
    }

    /// `λ^2 + λ^-2`, equal to `4/sin^2 θ - 2`.
    pub fn c(&self) -> f64 {
        let s = self.theta.sin();
        4.0 / (s * s) - 2.0
    }
}

/// `cot(θ/2)` on the open interval `0 < θ < π/2`.
pub fn lambda_of_theta(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(KmrError::Domain {
            name: "theta",
            value: theta,
            domain: "(0, pi/2)",
        });
    }
    Ok(1.0 / (0.5 * theta).tan())
}

pub fn w_squared(z: Complex64, params: &TorusParams) -> Complex64 {
    let l2 = params.lambda * params.lambda;
    let z2 = z * z;
    (z2 + l2) * (z2 + 1.0 / l2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub z: Complex64,
    pub w: Complex64,
}

impl CurvePoint {
    pub const fn new(z: Complex64, w: Complex64) -> Self {
        CurvePoint { z, w }
    }

    /// Scaled residual `|w^2 - P(z)| / (1 + |z|^4 λ^2)`.
    pub fn residual(&self, params: &TorusParams) -> f64 {
        let r = (self.w * self.w - w_squared(self.z, params)).norm();
        r / (1.0 + self.z.norm_sqr() * self.z.norm_sqr() * params.lambda * params.lambda)
    }

    pub fn on_curve(&self, params: &TorusParams) -> bool {
        self.residual(params) <= CURVE_RTOL
    }

    /// The other point over the same `z`.
    pub fn deck(&self) -> CurvePoint {
        CurvePoint::new(self.z, -self.w)
    }
}

/// One piece of a path in the chart, parametrized over `s ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Line {
        from: Complex64,
        to: Complex64,
    },
    /// Circular arc `center + radius·e^{iφ}`, `φ` running from `start` to `end`.
    Arc {
        center: Complex64,
        radius: f64,
        start: f64,
        end: f64,
    },
}

impl Segment {
    pub fn point(&self, s: f64) -> Complex64 {
        match *self {
            Segment::Line { from, to } => from + (to - from) * s,
            Segment::Arc {
                center,
                radius,
                start,
                end,
            } => center + Complex64::from_polar(radius, start + (end - start) * s),
        }
    }

    /// `du/ds`.
    pub fn velocity(&self, s: f64) -> Complex64 {
        match *self {
            Segment::Line { from, to } => to - from,
            Segment::Arc {
                radius, start, end, ..
            } => I * Complex64::from_polar(radius, start + (end - start) * s) * (end - start),
        }
    }

    pub fn start(&self) -> Complex64 {
        self.point(0.0)
    }

    pub fn end(&self) -> Complex64 {
        self.point(1.0)
    }

    pub fn reversed(&self) -> Segment {
        match *self {
            Segment::Line { from, to } => Segment::Line { from: to, to: from },
            Segment::Arc {
                center,
                radius,
                start,
                end,
            } => Segment::Arc {
                center,
                radius,
                start: end,
                end: start,
            },
        }
    }

    /// Smallest distance from the segment to the point `p`.
    pub fn distance_to(&self, p: Complex64) -> f64 {
        match *self {
            Segment::Line { from, to } => {
                let d = to - from;
                let len2 = d.norm_sqr();
                if len2 == 0.0 {
                    return (p - from).norm();
                }
                let s = ((p - from) * d.conj()).re / len2;
                (p - self.point(s.clamp(0.0, 1.0))).norm()
            }
            Segment::Arc {
                center,
                radius,
                start,
                end,
            } => {
                let rel = p - center;
                let ang = rel.arg();
                let (lo, hi) = if start <= end { (start, end) } else { (end, start) };
                // bring the angle of p into [lo, lo + 2π)
                let mut a = ang;
                while a < lo {
                    a += 2.0 * PI;
                }
                while a >= lo + 2.0 * PI {
                    a -= 2.0 * PI;
                }
                if a <= hi {
                    (rel.norm() - radius).abs()
                } else {
                    (p - self.start()).norm().min((p - self.end()).norm())
                }
            }
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { from, to } => (to - from).norm(),
            Segment::Arc {
                radius, start, end, ..
            } => radius * (end - start).abs(),
        }
    }
}

/// A connected chain of segments in the chart.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChartPath {
    pub segments: Vec<Segment>,
}

impl ChartPath {
    pub fn new() -> Self {
        ChartPath::default()
    }

    /// Polyline through the given waypoints.
    pub fn polyline(points: &[Complex64]) -> Self {
        let segments = points
            .windows(2)
            .map(|w| Segment::Line {
                from: w[0],
                to: w[1],
            })
            .collect();
        ChartPath { segments }
    }

    pub fn line_to(mut self, to: Complex64) -> Self {
        let from = self.end().expect("line_to on an empty path needs a start");
        self.segments.push(Segment::Line { from, to });
        self
    }

    pub fn push(&mut self, seg: Segment) {
        self.segments.push(seg);
    }

    pub fn start(&self) -> Option<Complex64> {
        self.segments.first().map(Segment::start)
    }

    pub fn end(&self) -> Option<Complex64> {
        self.segments.last().map(Segment::end)
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn reversed(&self) -> ChartPath {
        ChartPath {
            segments: self.segments.iter().rev().map(Segment::reversed).collect(),
        }
    }

    pub fn concat(mut self, other: &ChartPath) -> ChartPath {
        self.segments.extend_from_slice(&other.segments);
        self
    }

    /// Checks that consecutive segments join up.
    pub fn is_connected(&self, tol: f64) -> bool {
        self.segments
            .windows(2)
            .all(|w| (w[0].end() - w[1].start()).norm() <= tol)
    }

    pub fn distance_to(&self, p: Complex64) -> f64 {
        self.segments
            .iter()
            .map(|s| s.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoint {
    pub point: CurvePoint,
    pub u: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoints {
    /// `z = -iλ`
    pub d: BranchPoint,
    /// `z = iλ`
    pub dp: BranchPoint,
    /// `z = i/λ`
    pub dpp: BranchPoint,
    /// `z = -i/λ`
    pub dppp: BranchPoint,
}

impl BranchPoints {
    pub fn all(&self) -> [BranchPoint; 4] {
        [self.d, self.dp, self.dpp, self.dppp]
    }
}

/// Result of transporting a point (and optionally three form integrals)
/// along a chart path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transported {
    pub point: CurvePoint,
    pub integrals: [Complex64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatChart {
    pub params: TorusParams,
    pub omega_h: f64,
    pub omega_v: f64,
    pub base: CurvePoint,
    pub ode: DormandPrince,
}

/// Builds the rectangular flat chart from the two real half-period integrals.
///
/// `ω_h = ∫_{1/λ}^{λ} ds/√((λ²-s²)(s²-λ⁻²))` with `s² = λ⁻²cos²φ + λ²sin²φ`,
/// `ω_v = 2∫_0^{1/λ} ds/√((λ²-s²)(λ⁻²-s²))` with `s = sin(φ)/λ`.
pub fn build_flat_chart(params: TorusParams) -> Result<FlatChart> {
    let (omega_h, omega_v) = half_periods(&params)?;
    Ok(FlatChart {
        params,
        omega_h,
        omega_v,
        base: CurvePoint::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
        ode: DormandPrince::default(),
    })
}

fn half_periods(params: &TorusParams) -> Result<(f64, f64)> {
    let l = params.lambda;
    let li = params.lambda_inv();
    let quad = AdaptiveGauss::new(PERIOD_TOL);
    let h = quad.integrate(
        |phi: f64| {
            let (s, c) = phi.sin_cos();
            1.0 / (li * li * c * c + l * l * s * s).sqrt()
        },
        0.0,
        FRAC_PI_2,
    )?;
    let v = quad.integrate(
        |phi: f64| {
            let s = phi.sin() * li;
            1.0 / (l * l - s * s).sqrt()
        },
        0.0,
        FRAC_PI_2,
    )?;
    let omega_h = h.value;
    let omega_v = 2.0 * v.value;
    if !(omega_h.is_finite() && omega_v.is_finite() && omega_h > 0.0 && omega_v > 0.0) {
        return Err(KmrError::Quadrature {
            achieved: h.error.max(v.error),
            requested: PERIOD_TOL,
        });
    }
    Ok((omega_h, omega_v))
}

impl FlatChart {
    pub fn new(theta: f64) -> Result<Self> {
        build_flat_chart(TorusParams::new(theta)?)
    }

    pub fn lambda(&self) -> f64 {
        self.params.lambda
    }

    pub fn min_omega(&self) -> f64 {
        self.omega_h.min(self.omega_v)
    }

    /// Exclusion radius around poles of `z`.
    pub fn eps_pole(&self) -> f64 {
        1e-3 * self.min_omega()
    }

    pub fn branch_points(&self) -> BranchPoints {
        let l = self.params.lambda;
        let li = self.params.lambda_inv();
        let zero = Complex64::new(0.0, 0.0);
        let bp = |z: Complex64, u: Complex64| BranchPoint {
            point: CurvePoint::new(z, zero),
            u,
        };
        let (h, v) = (self.omega_h, self.omega_v);
        BranchPoints {
            d: bp(Complex64::new(0.0, -l), Complex64::new(h, -0.5 * v)),
            dp: bp(Complex64::new(0.0, l), Complex64::new(h, 0.5 * v)),
            dpp: bp(Complex64::new(0.0, li), Complex64::new(0.0, 0.5 * v)),
            dppp: bp(Complex64::new(0.0, -li), Complex64::new(0.0, -0.5 * v)),
        }
    }

    /// Chart height `v(ψ) = ∫_0^ψ dψ'/√(c + 2cos 2ψ')` of the unit-circle
    /// point with angle parameter `ψ` on the columns `Re u = ±ω_h/2`.
    ///
    /// On the right column `z = e^{iψ}`, on the left column `z = -e^{-iψ}`.
    pub fn circle_height(&self, psi: f64) -> Result<f64> {
        let c = self.params.c();
        AdaptiveGauss::new(1e-14)
            .integrate(|p: f64| 1.0 / (c + 2.0 * (2.0 * p).cos()).sqrt(), 0.0, psi)
            .map(|q| q.value)
    }

    /// Translates `u` by lattice vectors into `Re ∈ [-ω_h, ω_h)`,
    /// `Im ∈ [-ω_v, ω_v)`. Returns the reduced point.
    pub fn reduce(&self, u: Complex64) -> Complex64 {
        let ph = 2.0 * self.omega_h;
        let pv = 2.0 * self.omega_v;
        let re = u.re - ph * ((u.re + self.omega_h) / ph).floor();
        let im = u.im - pv * ((u.im + self.omega_v) / pv).floor();
        Complex64::new(re, im)
    }

    /// Nearest pole of `z` to `u` and its distance.
    pub fn nearest_pole(&self, u: Complex64) -> (Complex64, f64) {
        let k = ((u.re / self.omega_h - 1.0) / 2.0).round();
        let m = (u.im / self.omega_v).round();
        let mut best = (Complex64::new(0.0, 0.0), f64::INFINITY);
        for dk in -1..=1 {
            let p = Complex64::new((2.0 * (k + dk as f64) + 1.0) * self.omega_h, m * self.omega_v);
            let d = (u - p).norm();
            if d < best.1 {
                best = (p, d);
            }
        }
        best
    }

    /// Poles of `z` within `radius` of `u`.
    pub fn poles_near(&self, u: Complex64, radius: f64) -> Vec<Complex64> {
        let mut out = Vec::new();
        let k0 = ((u.re - radius) / self.omega_h).floor() as i64 - 1;
        let k1 = ((u.re + radius) / self.omega_h).ceil() as i64 + 1;
        let m0 = ((u.im - radius) / self.omega_v).floor() as i64 - 1;
        let m1 = ((u.im + radius) / self.omega_v).ceil() as i64 + 1;
        for k in k0..=k1 {
            if k.rem_euclid(2) != 1 {
                continue;
            }
            for m in m0..=m1 {
                let p = Complex64::new(k as f64 * self.omega_h, m as f64 * self.omega_v);
                if (p - u).norm() <= radius {
                    out.push(p);
                }
            }
        }
        out
    }

    fn check_segment_poles(&self, seg: &Segment) -> Result<()> {
        let eps = self.eps_pole();
        let mid = seg.point(0.5);
        let reach = seg.length() + eps;
        for p in self.poles_near(mid, reach) {
            let d = seg.distance_to(p);
            if d < eps {
                return Err(KmrError::NearPole { pole: p, distance: d });
            }
        }
        Ok(())
    }

    /// Transports `start` along `path`, integrating the forms `f(z)·du`
    /// alongside. The path must avoid the poles of `z` and the singularities
    /// of `f`.
    pub fn transport_with<F>(&self, path: &ChartPath, start: CurvePoint, forms: F) -> Result<Transported>
    where
        F: Fn(Complex64) -> [Complex64; 3],
    {
        let c = self.params.c();
        let mut y = [
            start.z,
            start.w,
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        for seg in &path.segments {
            self.check_segment_poles(seg)?;
            let rhs = |s: f64, y: &[Complex64; 5]| {
                let du = seg.velocity(s);
                let z = y[0];
                let f = forms(z);
                [
                    y[1] * du,
                    (z * z * 2.0 + c) * z * du,
                    f[0] * du,
                    f[1] * du,
                    f[2] * du,
                ]
            };
            y = self.ode.integrate(rhs, 0.0, 1.0, y)?.0;
            if y.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
                return Err(KmrError::Transport {
                    at: 1.0,
                    step: 0.0,
                });
            }
        }
        Ok(Transported {
            point: CurvePoint::new(y[0], y[1]),
            integrals: [y[2], y[3], y[4]],
        })
    }

    pub fn transport(&self, path: &ChartPath, start: CurvePoint) -> Result<CurvePoint> {
        let zero = Complex64::new(0.0, 0.0);
        self.transport_with(path, start, |_| [zero; 3]).map(|t| t.point)
    }

    /// Standard route from the base point: up the line `Re u = 0`, then
    /// horizontally. `u` should already be reduced.
    pub fn standard_route(&self, u: Complex64) -> ChartPath {
        let corner = Complex64::new(0.0, u.im);
        let mut pts = Vec::with_capacity(3);
        pts.push(Complex64::new(0.0, 0.0));
        if corner.im != 0.0 {
            pts.push(corner);
        }
        if u.re != 0.0 {
            pts.push(u);
        }
        ChartPath::polyline(&pts)
    }

    /// The curve point at chart coordinate `u`.
    pub fn z_of_u(&self, u: Complex64) -> Result<CurvePoint> {
        let r = self.reduce(u);
        let (pole, d) = self.nearest_pole(r);
        if d < self.eps_pole() {
            return Err(KmrError::NearPole { pole, distance: d });
        }
        let path = self.standard_route(r);
        if path.is_empty() {
            return Ok(self.base);
        }
        self.transport(&path, self.base)
    }

    /// Integrates `du = dz/w` along the straight `z`-segment from
    /// `start.z` to `z_end`, following the sheet of `start.w` by
    /// continuity. Returns the end point and `Δu`.
    ///
    /// The segment must stay away from the branch values `±iλ, ±i/λ`.
    pub fn integrate_dz_over_w(&self, start: CurvePoint, z_end: Complex64) -> Result<(CurvePoint, Complex64)> {
        let l = self.params.lambda;
        let li = self.params.lambda_inv();
        let branch = [
            Complex64::new(0.0, l),
            Complex64::new(0.0, -l),
            Complex64::new(0.0, li),
            Complex64::new(0.0, -li),
        ];
        let seg = Segment::Line {
            from: start.z,
            to: z_end,
        };
        let guard = 1e-3 * li;
        for b in branch {
            let d = seg.distance_to(b);
            if d < guard {
                return Err(KmrError::SingularPoint(b));
            }
        }
        let coarse = dz_over_w_panels(self, start, z_end, 64)?;
        let fine = dz_over_w_panels(self, start, z_end, 128)?;
        let err = (coarse.1 - fine.1).norm();
        if err > 1e-10 * (1.0 + fine.1.norm()) {
            return Err(KmrError::Quadrature {
                achieved: err,
                requested: 1e-10,
            });
        }
        Ok(fine)
    }
}

fn dz_over_w_panels(
    chart: &FlatChart,
    start: CurvePoint,
    z_end: Complex64,
    panels: usize,
) -> Result<(CurvePoint, Complex64)> {
    use crate::quadrature::GaussLegendre;
    let rule = GaussLegendre::new(16);
    let (nodes, weights) = rule.nodes_weights();
    let dz = z_end - start.z;
    let mut w_prev = start.w;
    let mut total = Complex64::new(0.0, 0.0);
    let follow = |z: Complex64, prev: Complex64| {
        let r = w_squared(z, &chart.params).sqrt();
        if (r - prev).norm() <= (r + prev).norm() {
            r
        } else {
            -r
        }
    };
    // nodes are returned in descending order; walk them ascending
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|a, b| nodes[*a].total_cmp(&nodes[*b]));
    for p in 0..panels {
        let a = p as f64 / panels as f64;
        let b = (p + 1) as f64 / panels as f64;
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = Complex64::new(0.0, 0.0);
        for &k in &order {
            let s = mid + half * nodes[k];
            let z = start.z + dz * s;
            let w = follow(z, w_prev);
            w_prev = w;
            acc += dz / w * weights[k];
        }
        total += acc * half;
        let z = start.z + dz * b;
        w_prev = follow(z, w_prev);
    }
    if !(total.re.is_finite() && total.im.is_finite()) {
        return Err(KmrError::SingularPoint(z_end));
    }
    Ok((CurvePoint::new(z_end, w_prev), total))
}

//! Limit probes: the graph compared with singly periodic Scherk, doubly
//! periodic Scherk and helicoid reference patches along rays to the
//! boundary of the parameter domain.
//!
//! Distances are sampled Hausdorff distances between point clouds on a
//! fixed window. Graph clouds share their base points with the reference
//! where the frames allow it, so the number is also a sup-norm bound.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std inherents when std is in the graph
use num_traits::Float;

use crate::error::{KmrError, Result};
use crate::geom::{hausdorff_distance, Vec3};
use crate::graph::{strip_of_params, GraphFunction};
use crate::surface::position_at;
use crate::weierstrass::SurfaceParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// `θ → 0`: singly periodic Scherk along each boundary line.
    Scherk1p,
    /// `θ → π/2` with `α → α∞ ≠ 0`: doubly periodic Scherk over rhombi.
    Scherk2p { alpha_inf: f64 },
    /// `θ → π/2`, `α → 0`: helicoids after dilation by `1/μ`.
    Helicoid,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Scherk1p => "scherk1p",
            Regime::Scherk2p { .. } => "scherk2p",
            Regime::Helicoid => "helicoid",
        }
    }

    /// Point on the ray at distance `closeness` from the limit.
    pub fn ray_point(&self, closeness: f64) -> Result<(f64, f64)> {
        self.check()?;
        let c = closeness;
        let (theta, alpha) = match *self {
            Regime::Scherk1p => (c, SCHERK1P_ALPHA),
            Regime::Scherk2p { alpha_inf } => (FRAC_PI_2 - c, alpha_inf),
            Regime::Helicoid => (FRAC_PI_2 - c, 0.5 * c),
        };
        if !(theta > 0.0 && theta < FRAC_PI_2 && c > 0.0) {
            return Err(KmrError::Domain {
                name: "closeness",
                value: c,
                domain: "(0, pi/2)",
            });
        }
        Ok((theta, alpha))
    }

    /// `α∞` must be a nonzero angle in `(-π/2, π/2]`; `α∞ = 0` is the
    /// helicoid regime.
    fn check(&self) -> Result<()> {
        if let Regime::Scherk2p { alpha_inf } = *self {
            if !(alpha_inf > -FRAC_PI_2 && alpha_inf <= FRAC_PI_2 && alpha_inf != 0.0) {
                return Err(KmrError::Domain {
                    name: "alpha_inf",
                    value: alpha_inf,
                    domain: "(-pi/2, pi/2] without 0",
                });
            }
        }
        Ok(())
    }

    /// The four ray points used by the default series, farthest first.
    pub fn default_ray(&self) -> Vec<(f64, f64)> {
        match *self {
            Regime::Scherk1p => [0.4, 0.2, 0.1, 0.05].iter().map(|&t| (t, SCHERK1P_ALPHA)).collect(),
            Regime::Scherk2p { alpha_inf } => [1.3, 1.4, 1.5, 1.55].iter().map(|&t| (t, alpha_inf)).collect(),
            Regime::Helicoid => [(1.53, 0.02), (1.55, 0.01), (1.56, 0.005), (1.565, 0.0025)].to_vec(),
        }
    }
}

pub const SCHERK1P_ALPHA: f64 = 0.7;
pub const SCHERK2P_DEFAULT_ALPHA: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitSample {
    pub theta: f64,
    pub alpha: f64,
    pub distance: f64,
    /// Doubly periodic regime only: the normalized heights near the bottom
    /// edges of two neighbouring rhombi have the signs of their labels.
    pub alternation: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub regime: Regime,
    pub samples: Vec<LimitSample>,
    /// Distances strictly decrease along the ray.
    pub decreasing: bool,
}

pub fn limit_probe(regime: Regime, closeness: f64) -> Result<LimitSample> {
    let (theta, alpha) = regime.ray_point(closeness)?;
    limit_distance(regime, theta, alpha)
}

pub fn limit_series(regime: Regime, points: &[(f64, f64)]) -> Result<LimitReport> {
    let samples = points
        .iter()
        .map(|&(t, a)| limit_distance(regime, t, a))
        .collect::<Result<Vec<_>>>()?;
    let decreasing = samples.windows(2).all(|w| w[1].distance < w[0].distance);
    Ok(LimitReport {
        regime,
        samples,
        decreasing,
    })
}

pub fn limit_distance(regime: Regime, theta: f64, alpha: f64) -> Result<LimitSample> {
    regime.check()?;
    let params = SurfaceParams::new(theta, alpha)?;
    match regime {
        Regime::Scherk1p => scherk1p_distance(&params),
        Regime::Scherk2p { alpha_inf } => scherk2p_distance(&params, alpha_inf),
        Regime::Helicoid => helicoid_distance(&params),
    }
}

/// Singly periodic Scherk graph over `x3 > 0` with `±∞` alternating on the
/// unit edges of `x3 = 0`: `sinh(π x2) sinh(π x3) = sin(π x1)`.
pub fn scherk1p_height(x1: f64, x3: f64) -> f64 {
    ((PI * x1).sin() / (PI * x3).sinh()).asinh() / PI
}

/// Window in the frame translated by `(a, 0, h)`: one period in `x1` and
/// the unit height above the bottom line.
const SCHERK1P_X1: (f64, f64, usize) = (0.0, 2.0, 33);
const SCHERK1P_X3: [f64; 8] = [0.05, 0.1, 0.2, 0.35, 0.5, 0.65, 0.8, 1.0];

fn scherk1p_distance(params: &SurfaceParams) -> Result<LimitSample> {
    let strip = strip_of_params(params)?;
    let graph = GraphFunction::new(params)?;
    let (lo, hi, n) = SCHERK1P_X1;
    let xs: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
    let mut ours = Vec::new();
    let mut reference = Vec::new();
    for &x3p in &SCHERK1P_X3 {
        if x3p >= 2.0 * strip.h {
            return Err(KmrError::Range {
                value: x3p,
                limit: 2.0 * strip.h,
            });
        }
        let x1s: Vec<f64> = xs.iter().map(|x| x - strip.a).collect();
        let vals = graph.row(x3p - strip.h, &x1s)?;
        for (&x, v) in xs.iter().zip(vals) {
            ours.push(Vec3::new(x, v, x3p));
            reference.push(Vec3::new(x, scherk1p_height(x, x3p), x3p));
        }
    }
    Ok(LimitSample {
        theta: params.theta,
        alpha: params.alpha,
        distance: hausdorff_distance(&ours, &reference),
        alternation: None,
    })
}

/// Doubly periodic Scherk graph over the unit rhombus with vertices
/// `0, 1, e^{iγ}, 1 + e^{iγ}` (complex `x1 + i x3`), `+∞` on the two
/// horizontal sides and `-∞` on the slanted ones, normalized to vanish at
/// the centre.
///
/// Weierstrass data on the unit disk: `g = ζ`,
/// `dh = i ζ dζ / (ζ⁴ - 2 cos 2β ζ² + 1)` with `β = (π - γ)/2`. The
/// ends `±e^{±iβ}` go to the sides and the arcs between them to vertical
/// lines over the vertices. All integrals are sums of logarithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScherkRhombus {
    pub gamma: f64,
    beta: f64,
    poles: [Complex64; 4],
    // residue factors c / P'(p)
    res: [Complex64; 4],
    // horizontal map x1 + i x3 = lin·conj(H) + shift, scale = |lin|
    lin: Complex64,
    shift: Complex64,
    scale: f64,
}

impl ScherkRhombus {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < PI) {
            return Err(KmrError::Domain {
                name: "gamma",
                value: gamma,
                domain: "(0, pi)",
            });
        }
        let beta = 0.5 * (PI - gamma);
        let poles = [
            Complex64::from_polar(1.0, beta),
            Complex64::from_polar(1.0, PI - beta),
            Complex64::from_polar(1.0, PI + beta),
            Complex64::from_polar(1.0, -beta),
        ];
        let c2 = (2.0 * beta).cos();
        let i = Complex64::new(0.0, 1.0);
        let res = poles.map(|p| i / (4.0 * p * p * p - 4.0 * c2 * p));
        let mut s = ScherkRhombus {
            gamma,
            beta,
            poles,
            res,
            lin: Complex64::new(1.0, 0.0),
            shift: Complex64::new(0.0, 0.0),
            scale: 1.0,
        };
        // vertex over the arc through -i goes to 0, the one through 1 to 1
        let v0 = s.horizontal(Complex64::new(0.0, -1.0));
        let v1 = s.horizontal(Complex64::new(1.0, 0.0));
        let lin = Complex64::new(1.0, 0.0) / (v1 - v0).conj();
        s.lin = lin;
        s.scale = lin.norm();
        s.shift = -lin * v0.conj();
        Ok(s)
    }

    fn horizontal(&self, z: Complex64) -> Complex64 {
        let mut f = Complex64::new(0.0, 0.0);
        let mut g = Complex64::new(0.0, 0.0);
        for (p, r) in self.poles.iter().zip(&self.res) {
            let l = (1.0 - z / p).ln();
            f += r * l;
            g += r * p * p * l;
        }
        0.5 * (f.conj() - g)
    }

    fn height_raw(&self, z: Complex64) -> f64 {
        let mut h = Complex64::new(0.0, 0.0);
        for (p, r) in self.poles.iter().zip(&self.res) {
            h += r * p * (1.0 - z / p).ln();
        }
        h.re
    }

    /// Point of the graph over the disk parameter `z`, in `(x1, x2, x3)`.
    pub fn point(&self, z: Complex64) -> Vec3 {
        let b = self.lin * self.horizontal(z).conj() + self.shift;
        Vec3::new(b.re, self.scale * self.height_raw(z), b.im)
    }

    pub fn vertices(&self) -> [Complex64; 4] {
        [Complex64::new(0.0, -1.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0)]
            .map(|z| self.lin * self.horizontal(z).conj() + self.shift)
    }

    pub fn centre(&self) -> Complex64 {
        0.5 * (Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, self.gamma))
    }

    /// Height over the base point `x1 + i x3` inside the rhombus.
    pub fn height(&self, base: Complex64) -> Result<f64> {
        // H(z) = q; continuation from the centre (z = 0)
        let q = ((base - self.shift) / self.lin).conj();
        let q0 = self.horizontal(Complex64::new(0.0, 0.0));
        let mut z = Complex64::new(0.0, 0.0);
        const STAGES: usize = 8;
        for k in 1..=STAGES {
            let target = q0 + (q - q0) * (k as f64 / STAGES as f64);
            let mut converged = false;
            for _ in 0..50 {
                let r = target - self.horizontal(z);
                if r.norm() < 1e-14 {
                    converged = true;
                    break;
                }
                let den = z * z * z * z - 2.0 * (2.0 * self.beta).cos() * z * z + 1.0;
                let fp = Complex64::new(0.0, 1.0) / den;
                let a = -0.5 * fp * z * z;
                let b = 0.5 * fp.conj();
                let det = a.norm_sqr() - b.norm_sqr();
                let mut d = (a.conj() * r - b * r.conj()) / det;
                // stay inside the disk
                while (z + d).norm() >= 1.0 {
                    d *= 0.5;
                }
                z += d;
            }
            if !converged && (target - self.horizontal(z)).norm() > 1e-10 {
                return Err(KmrError::Inconsistent(alloc::format!(
                    "rhombus inversion failed at {base}"
                )));
            }
        }
        Ok(self.scale * self.height_raw(z))
    }
}

/// Rhombus coordinates of the window, `ξ, η ∈ [1/4, 3/4]`.
const RHOMBUS_WINDOW: (f64, f64, usize) = (0.25, 0.75, 9);

fn scherk2p_distance(params: &SurfaceParams, alpha_inf: f64) -> Result<LimitSample> {
    if alpha_inf == 0.0 || !(alpha_inf.abs() <= FRAC_PI_2) {
        return Err(KmrError::Domain {
            name: "alpha_inf",
            value: alpha_inf,
            domain: "[-pi/2, 0) U (0, pi/2]",
        });
    }
    let gamma = if alpha_inf > 0.0 { alpha_inf } else { PI + alpha_inf };
    let reference = ScherkRhombus::new(gamma)?;
    let strip = strip_of_params(params)?;
    let graph = GraphFunction::new(params)?;
    // rhombus 0 of the strip: p0 = (-a, -h), q0 = (a, h); centre (1/2, 0)
    let p0 = Complex64::new(-strip.a, -strip.h);
    let e2 = Complex64::new(2.0 * strip.a, 2.0 * strip.h);
    let r0 = Complex64::from_polar(1.0, gamma);
    let ref_origin = Complex64::new(0.5, 0.0) - reference.centre();
    let (lo, hi, n) = RHOMBUS_WINDOW;
    let ts: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
    let centre_value = |shift: f64| graph.value(0.5 + shift, 0.0);
    let c0 = centre_value(0.0)?;
    let c1 = centre_value(1.0)?;
    let mut ours = [Vec::new(), Vec::new()];
    let mut refs = [Vec::new(), Vec::new()];
    for &eta in &ts {
        let base_row: Vec<Complex64> = ts.iter().map(|&xi| p0 + xi + eta * e2).collect();
        let x3 = base_row[0].im;
        let x1s: Vec<f64> = base_row.iter().map(|b| b.re).collect();
        let x1s_next: Vec<f64> = x1s.iter().map(|x| x + 1.0).collect();
        let v0 = graph.row(x3, &x1s)?;
        let v1 = graph.row(x3, &x1s_next)?;
        for (k, &xi) in ts.iter().enumerate() {
            let rb = ref_origin + xi + eta * r0;
            let f = reference.height(rb - ref_origin)?;
            ours[0].push(Vec3::new(x1s[k], v0[k] - c0, x3));
            ours[1].push(Vec3::new(x1s[k], -(v1[k] - c1), x3));
            refs[0].push(Vec3::new(rb.re, f, rb.im));
            refs[1].push(Vec3::new(rb.re, f, rb.im));
        }
    }
    let distance = hausdorff_distance(&ours[0], &refs[0]).max(hausdorff_distance(&ours[1], &refs[1]));
    // heights just above the middle of the bottom edges of rhombi 0 and 1
    let probe = p0 + 0.5 + 0.1 * e2;
    let s = graph.row(probe.im, &[probe.re, probe.re + 1.0])?;
    let alternation = s[0] - c0 > 0.0 && s[1] - c1 < 0.0;
    Ok(LimitSample {
        theta: params.theta,
        alpha: params.alpha,
        distance,
        alternation: Some(alternation),
    })
}

/// Helicoid in the chart parameter `u = x + iy`:
/// `(½ sinh 2y cos 2x, -½ sinh 2y sin 2x, x)`, the limit of the dilated
/// surface `(X(u) - X(0))/μ`.
pub fn helicoid_point(u: Complex64) -> Vec3 {
    let (s2x, c2x) = (2.0 * u.re).sin_cos();
    let r = 0.5 * (2.0 * u.im).sinh();
    Vec3::new(r * c2x, -r * s2x, u.re)
}

const HELICOID_WINDOW: (f64, usize) = (0.5, 11);

fn helicoid_distance(params: &SurfaceParams) -> Result<LimitSample> {
    let (w, n) = HELICOID_WINDOW;
    if w >= 0.5 * params.chart.omega_h {
        return Err(KmrError::Range {
            value: w,
            limit: 0.5 * params.chart.omega_h,
        });
    }
    let origin = position_at(params, Complex64::new(0.0, 0.0), false)?.x;
    let inv_mu = 1.0 / params.mu;
    let mut ours = Vec::with_capacity(n * n);
    let mut reference = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let u = Complex64::new(
                -w + 2.0 * w * i as f64 / (n - 1) as f64,
                -w + 2.0 * w * j as f64 / (n - 1) as f64,
            );
            let x = position_at(params, u, false)?.x;
            ours.push((x - origin) * inv_mu);
            reference.push(helicoid_point(u));
        }
    }
    Ok(LimitSample {
        theta: params.theta,
        alpha: params.alpha,
        distance: hausdorff_distance(&ours, &reference),
        alternation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rhombus_vertices_and_side() {
        for gamma in [0.4, FRAC_PI_2, 2.2] {
            let r = ScherkRhombus::new(gamma).unwrap();
            let v = r.vertices();
            let want = [
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, gamma),
                Complex64::from_polar(1.0, gamma),
            ];
            for (a, b) in v.iter().zip(&want) {
                assert!((a - b).norm() < 1e-12, "{gamma}: {a} vs {b}");
            }
            // unscaled side length is π / (4 sin γ)
            assert!((1.0 / r.scale - PI / (4.0 * gamma.sin())).abs() < 1e-12);
            assert!(r.height(r.centre()).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn rhombus_signs_at_sides() {
        let r = ScherkRhombus::new(1.0).unwrap();
        let e2 = Complex64::from_polar(1.0, 1.0);
        let bottom = r.height(0.5 + 0.02 * e2).unwrap();
        let top = r.height(0.5 + 0.98 * e2).unwrap();
        let left = r.height(0.02 + 0.5 * e2).unwrap();
        assert!(bottom > 0.5 && top > 0.5 && left < -0.5, "{bottom} {top} {left}");
        // logarithmic growth towards a side
        let closer = r.height(0.5 + 0.0002 * e2).unwrap();
        assert!(closer > bottom + 1.0, "{closer}");
    }

    #[test]
    fn rhombus_inversion_round_trip() {
        let r = ScherkRhombus::new(0.8).unwrap();
        for z in [Complex64::new(0.3, 0.2), Complex64::new(-0.6, 0.5), Complex64::new(0.1, -0.9)] {
            let p = r.point(z);
            let h = r.height(Complex64::new(p.x1(), p.x3())).unwrap();
            assert!((h - p.x2()).abs() < 1e-10);
        }
    }

    #[test]
    fn scherk1p_reference_is_odd_and_decays() {
        assert!(scherk1p_height(0.5, 0.01) > 1.0);
        assert!(scherk1p_height(1.5, 0.01) < -1.0);
        assert!((scherk1p_height(0.3, 0.7) + scherk1p_height(-0.3, 0.7)).abs() < 1e-15);
        assert!(scherk1p_height(0.5, 5.0) < 1e-6);
    }

    #[test]
    fn ray_points() {
        assert_eq!(Regime::Scherk1p.ray_point(0.05).unwrap(), (0.05, SCHERK1P_ALPHA));
        assert!(Regime::Helicoid.ray_point(2.0).is_err());
        assert!(Regime::Scherk2p { alpha_inf: 0.7 }.ray_point(0.0).is_err());
    }
}

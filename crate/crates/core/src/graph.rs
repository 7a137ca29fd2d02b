//! Marked strips `S(h, a)`, the Jenkins-Serrin checks on sampled graph
//! pieces, and the explicit first coordinate along `σ = c3 ∪ c1 ∪ c2`.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, LN_2, PI};

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std inherents when std is in the graph
use num_traits::Float;

use crate::error::{KmrError, Result};
use crate::geom::Vec3;
use crate::quadrature::AdaptiveGauss;
use crate::surface::{position_at, position_at_near, step, Isometry, State, SurfaceMesh};
use crate::weierstrass::{forms_of_z, period_t, project, reduce_half, t3_closed_form, SurfaceParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Row {
    /// `x3 = -h`, points `p_n = (n - a, 0, -h)`
    Bottom,
    /// `x3 = h`, points `q_n = (n + a, 0, h)`
    Top,
}

/// Boundary value on a unit edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeLabel {
    PlusInfinity,
    MinusInfinity,
}

impl EdgeLabel {
    pub fn sign(&self) -> f64 {
        match self {
            EdgeLabel::PlusInfinity => 1.0,
            EdgeLabel::MinusInfinity => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkedStrip {
    pub h: f64,
    pub a: f64,
}

impl MarkedStrip {
    /// `h > 0`; `a` is reduced modulo 1 into `(-1/2, 1/2]`.
    pub fn new(h: f64, a: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(KmrError::Domain {
                name: "h",
                value: h,
                domain: "(0, inf)",
            });
        }
        if !a.is_finite() {
            return Err(KmrError::Domain {
                name: "a",
                value: a,
                domain: "(-1/2, 1/2]",
            });
        }
        Ok(MarkedStrip { h, a: reduce_half(a) })
    }

    pub fn feasible(&self) -> bool {
        self.a * self.a + self.h * self.h > 0.25
    }

    pub fn p(&self, n: i64) -> Vec3 {
        Vec3::new(n as f64 - self.a, 0.0, -self.h)
    }

    pub fn q(&self, n: i64) -> Vec3 {
        Vec3::new(n as f64 + self.a, 0.0, self.h)
    }

    /// Label of the edge `(p_n, p_{n+1})` or `(q_n, q_{n+1})`.
    pub fn edge_label(&self, _row: Row, n: i64) -> EdgeLabel {
        if n.rem_euclid(2) == 0 {
            EdgeLabel::PlusInfinity
        } else {
            EdgeLabel::MinusInfinity
        }
    }

    /// Index `n` of the edge of `row` containing the abscissa `x1`.
    pub fn edge_at(&self, row: Row, x1: f64) -> i64 {
        match row {
            Row::Bottom => (x1 + self.a).floor() as i64,
            Row::Top => (x1 - self.a).floor() as i64,
        }
    }
}

/// The strip of a surface: `h = |T3|/4`, `a = T1/4` reduced into `(-1/2, 1/2]`.
pub fn strip_of_params(params: &SurfaceParams) -> Result<MarkedStrip> {
    let t = period_t(params)?;
    let strip = MarkedStrip::new(0.25 * t.x3().abs(), 0.25 * t.x1())?;
    if !strip.feasible() {
        return Err(KmrError::Inconsistent(alloc::format!(
            "periods give an infeasible strip: h = {}, a = {} (T = {:?})",
            strip.h,
            strip.a,
            t.0
        )));
    }
    Ok(strip)
}

/// `x1` along `σ = {z = it}` measured from `D'''` (`t = -1/λ`).
///
/// On `c1` (`|t| ≤ 1/λ`) this is `μ∫_{-1/λ}^{t} (1-s⁴)/(Q(s)√((λ²-s²)(λ⁻²-s²))) ds`
/// with `Q = 1 - 2s²cos 2α + s⁴`. On `c2` (`t > 1/λ`) and `c3` (`t < -1/λ`)
/// the row integrals `1 - J(t)` and `-J(|t|)` are used, with
/// `J(t) = 2μ sin 2α ∫_0^{ψ(t)} s/Q dψ`, `s² = λ⁻²cos²ψ + λ²sin²ψ`.
pub fn x1_along_sigma(t: f64, params: &SurfaceParams) -> Result<f64> {
    if !(t > -1.0 && t < 1.0) {
        return Err(KmrError::Domain {
            name: "t",
            value: t,
            domain: "(-1, 1)",
        });
    }
    let l = params.torus.lambda;
    let li = params.torus.lambda_inv();
    if t.abs() <= li {
        return c1_integral(params, (l * t).clamp(-1.0, 1.0).asin());
    }
    let j = row_integral(params, t.abs())?;
    if t > 0.0 {
        Ok(c1_integral(params, FRAC_PI_2)? - j)
    } else {
        Ok(-j)
    }
}

fn c1_integral(params: &SurfaceParams, phi_end: f64) -> Result<f64> {
    let l = params.torus.lambda;
    let c2 = (2.0 * params.alpha).cos();
    let quad = AdaptiveGauss::new(1e-13);
    let v = quad.integrate(
        |phi: f64| {
            let s = phi.sin() / l;
            let s2 = s * s;
            (1.0 - s2 * s2) / ((1.0 - 2.0 * s2 * c2 + s2 * s2) * (l * l - s2).sqrt())
        },
        -FRAC_PI_2,
        phi_end,
    )?;
    Ok(params.mu * v.value)
}

fn row_integral(params: &SurfaceParams, t: f64) -> Result<f64> {
    let l = params.torus.lambda;
    let li = params.torus.lambda_inv();
    let c2 = (2.0 * params.alpha).cos();
    let s2a = (2.0 * params.alpha).sin();
    if s2a == 0.0 {
        return Ok(0.0);
    }
    let psi_end = (((t * t - li * li) / (l * l - li * li)).clamp(0.0, 1.0)).sqrt().asin();
    let quad = AdaptiveGauss::new(1e-13);
    let f = |psi: f64| {
        let (sn, cs) = psi.sin_cos();
        let s2 = li * li * cs * cs + l * l * sn * sn;
        s2.sqrt() / ((s2 - c2) * (s2 - c2) + s2a * s2a)
    };
    // peak near s = 1 of width ~ sin 2α
    let psi1 = ((1.0 - li * li) / (l * l - li * li)).sqrt().asin().min(psi_end);
    let v = quad.integrate(f, 0.0, psi1)?.value + quad.integrate(f, psi1, psi_end)?.value;
    Ok(2.0 * params.mu * s2a * v)
}

/// Outcome of the Jenkins-Serrin checks on a sampled graph piece.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphReport {
    pub quarter_sphere_ok: bool,
    pub sigma_injective_ok: bool,
    pub projection_collisions: usize,
    pub boundary_label_ok: bool,
    pub details: GraphDetails,
}

impl GraphReport {
    pub fn all_ok(&self) -> bool {
        self.quarter_sphere_ok
            && self.sigma_injective_ok
            && self.projection_collisions == 0
            && self.boundary_label_ok
            && self.details.folds == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphDetails {
    /// Smallest `N2` over the samples of `ℛ`.
    pub min_n2: f64,
    /// Angular width of the `(N1, N3)` directions of `ℛ`'s normals.
    pub normal_arc: f64,
    /// Sample `(i, j)` indices with `N2 < -1e-10`.
    pub negative_n2: Vec<(usize, usize)>,
    pub c1_monotone: bool,
    pub c2_monotone: bool,
    pub c3_monotone: bool,
    pub sigma_crossings: usize,
    /// `max |Π(c2) - Π(c3) - (1,0,0)|` over sampled columns.
    pub c2_c3_offset_error: f64,
    /// Projected triangles whose orientation disagrees with the majority.
    pub folds: usize,
    /// Grid indices (row index over piece plus translate) of colliding samples.
    pub collisions: Vec<(usize, usize)>,
    pub edges: Vec<EdgeDivergence>,
    pub strip: MarkedStrip,
}

const MAX_REPORTED: usize = 32;

/// Runs the graph checks on a base-window mesh (not conjugate).
pub fn verify_graph(mesh: &SurfaceMesh, params: &SurfaceParams) -> Result<GraphReport> {
    if mesh.conjugate || mesh.shift != 0 {
        return Err(KmrError::Configuration(
            "verify_graph expects the base window of the graph piece".into(),
        ));
    }
    let strip = strip_of_params(params)?;

    // quarter sphere on ℛ = {Re u ≤ 0}
    let cols = mesh.left_half_columns();
    let mut min_n2 = f64::INFINITY;
    let mut negative_n2 = Vec::new();
    let mut angles = Vec::new();
    for j in 0..mesh.nv {
        for i in cols.clone() {
            if let Some(s) = mesh.get(i, j) {
                min_n2 = min_n2.min(s.n.x2());
                if s.n.x2() < -1e-10 && negative_n2.len() < MAX_REPORTED {
                    negative_n2.push((i, j));
                }
                if s.n.x1().hypot(s.n.x3()) > 1e-9 {
                    angles.push(s.n.x3().atan2(s.n.x1()));
                }
            }
        }
    }
    for s in &mesh.seam {
        min_n2 = min_n2.min(s.n.x2());
    }
    let normal_arc = arc_width(&mut angles);
    let quarter_sphere_ok = min_n2 >= -1e-10 && normal_arc <= PI + 1e-9;

    let sigma = sigma_polylines(mesh);
    let mono_inc = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
    let mono_dec = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let c1_x1: Vec<f64> = sigma.c1.iter().map(|p| p.0).collect();
    let c2_x3: Vec<f64> = sigma.c2.iter().map(|p| p.1).collect();
    let c3_x3: Vec<f64> = sigma.c3.iter().map(|p| p.1).collect();
    let c1_monotone = mono_inc(&c1_x1) || mono_dec(&c1_x1);
    let c2_monotone = mono_inc(&c2_x3) || mono_dec(&c2_x3);
    let c3_monotone = mono_inc(&c3_x3) || mono_dec(&c3_x3);
    let sigma_crossings = polyline_crossings(&sigma.c1, &sigma.c2, true)
        + polyline_crossings(&sigma.c1, &sigma.c3, true)
        + polyline_crossings(&sigma.c2, &sigma.c3, false);
    let c2_c3_offset_error = sigma
        .c2
        .iter()
        .zip(&sigma.c3)
        .map(|(a, b)| ((a.0 - b.0 - 1.0).abs()).max((a.1 - b.1).abs()))
        .fold(0.0, f64::max);
    let sigma_injective_ok = c1_monotone && c2_monotone && c3_monotone && sigma_crossings == 0;

    let translate = mesh.apply_isometry(Isometry::R3);
    let proj = ProjectionCheck::new(&[mesh, &translate]);
    let (folds, collisions) = proj.run();

    let edges = boundary_divergence_check(params, &strip, mesh.truncation)?;
    let boundary_label_ok = edges.iter().all(|e| e.ok);
    Ok(GraphReport {
        quarter_sphere_ok,
        sigma_injective_ok,
        projection_collisions: collisions.len(),
        boundary_label_ok,
        details: GraphDetails {
            min_n2,
            normal_arc,
            negative_n2,
            c1_monotone,
            c2_monotone,
            c3_monotone,
            sigma_crossings,
            c2_c3_offset_error,
            folds,
            collisions: collisions.into_iter().take(MAX_REPORTED).collect(),
            edges,
            strip,
        },
    })
}

/// Collision and fold counts of `Π` over one or more meshes stacked as
/// consecutive vertical windows.
pub fn projection_collisions(meshes: &[&SurfaceMesh]) -> (usize, usize) {
    let (folds, coll) = ProjectionCheck::new(meshes).run();
    (folds, coll.len())
}

/// Smallest arc containing all angles (radians), as `2π - largest gap`.
fn arc_width(angles: &mut [f64]) -> f64 {
    if angles.len() < 2 {
        return 0.0;
    }
    angles.sort_by(f64::total_cmp);
    let mut gap = angles[0] + 2.0 * PI - angles[angles.len() - 1];
    for w in angles.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    2.0 * PI - gap
}

struct Sigma {
    /// `(x1, x3)` from `D'''` to `D''`
    c1: Vec<(f64, f64)>,
    /// from `D''` along the top row towards `Re u = -ω_h/2`
    c2: Vec<(f64, f64)>,
    /// from `D'''` along the bottom row towards `Re u = -ω_h/2`
    c3: Vec<(f64, f64)>,
}

fn sigma_polylines(mesh: &SurfaceMesh) -> Sigma {
    let pi = |x: Vec3| (x.x1(), x.x3());
    let c1 = mesh.seam.iter().map(|s| pi(s.x)).collect();
    let row = |j: usize, seam: Vec3| {
        let mut v = alloc::vec![pi(seam)];
        for i in mesh.left_half_columns().rev() {
            if let Some(s) = mesh.get(i, j) {
                if s.u.re < 0.0 {
                    v.push(pi(s.x));
                }
            }
        }
        v
    };
    let top = mesh.nv - 1;
    Sigma {
        c1,
        c2: row(top, mesh.seam[top].x),
        c3: row(0, mesh.seam[0].x),
    }
}

/// Proper crossings between two polylines. With `shared_start`, the first
/// vertex of `b` is an endpoint of `a` and the segments touching it are
/// not compared against each other.
fn polyline_crossings(a: &[(f64, f64)], b: &[(f64, f64)], shared_start: bool) -> usize {
    let mut n = 0;
    for (ia, sa) in a.windows(2).enumerate() {
        for (ib, sb) in b.windows(2).enumerate() {
            if shared_start && ib == 0 && (ia == 0 || ia == a.len() - 2) {
                continue;
            }
            if segments_cross(sa[0], sa[1], sb[0], sb[1]) {
                n += 1;
            }
        }
    }
    n
}

fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn segments_cross(p1: (f64, f64), p2: (f64, f64), q1: (f64, f64), q2: (f64, f64)) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

struct ProjectionCheck {
    /// `(x1, x3)`, global column, global row
    verts: Vec<((f64, f64), i64, i64)>,
    tris: Vec<[usize; 3]>,
    bucket: f64,
}

impl ProjectionCheck {
    fn new(meshes: &[&SurfaceMesh]) -> Self {
        let mut verts = Vec::new();
        let mut tris = Vec::new();
        let mut row0 = 0i64;
        let mut res = 16usize;
        for m in meshes {
            res = res.max(m.nu).max(m.nv);
            let mut index = alloc::vec![usize::MAX; m.nu * m.nv];
            for j in 0..m.nv {
                for i in 0..m.nu {
                    if let Some(s) = m.get(i, j) {
                        index[j * m.nu + i] = verts.len();
                        verts.push(((s.x.x1(), s.x.x3()), i as i64, row0 + j as i64));
                    }
                }
            }
            for q in m.quads() {
                let [a, b, c, d] = q.map(|k| index[k]);
                tris.push([a, b, c]);
                tris.push([a, c, d]);
            }
            // consecutive windows share a row
            row0 += m.nv as i64 - 1;
        }
        ProjectionCheck {
            verts,
            tris,
            bucket: 1.0 / (4.0 * res as f64),
        }
    }

    fn key(&self, x: f64, y: f64) -> (i64, i64) {
        ((x / self.bucket).floor() as i64, (y / self.bucket).floor() as i64)
    }

    fn area(&self, t: &[usize; 3]) -> f64 {
        let [a, b, c] = t.map(|k| self.verts[k].0);
        0.5 * orient(a, b, c)
    }

    /// Returns the fold count and the colliding vertices.
    fn run(&self) -> (usize, Vec<(usize, usize)>) {
        let floor_area = 1e-6 * self.bucket * self.bucket;
        let (mut pos, mut neg) = (0usize, 0usize);
        for t in &self.tris {
            let ar = self.area(t);
            if ar > floor_area {
                pos += 1;
            } else if ar < -floor_area {
                neg += 1;
            }
        }
        let folds = pos.min(neg);

        let mut entries: Vec<((i64, i64), u32)> = Vec::new();
        for (k, t) in self.tris.iter().enumerate() {
            if self.area(t).abs() <= floor_area {
                continue;
            }
            let pts = t.map(|v| self.verts[v].0);
            let (x0, x1) = (pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min), pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max));
            let (y0, y1) = (pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min), pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max));
            let (b0, c0) = self.key(x0, y0);
            let (b1, c1) = self.key(x1, y1);
            for bx in b0..=b1 {
                for by in c0..=c1 {
                    entries.push(((bx, by), k as u32));
                }
            }
        }
        entries.sort_unstable();

        let mut hits = Vec::new();
        for &(p, gi, gj) in &self.verts {
            let key = self.key(p.0, p.1);
            let lo = entries.partition_point(|e| e.0 < key);
            let hi = entries.partition_point(|e| e.0 <= key);
            let mut hit = false;
            for e in &entries[lo..hi] {
                let t = &self.tris[e.1 as usize];
                let far = t.iter().all(|&v| {
                    let (_, ti, tj) = self.verts[v];
                    (ti - gi).abs().max((tj - gj).abs()) > 2
                });
                if far && self.strictly_inside(t, p) {
                    hit = true;
                    break;
                }
            }
            if hit {
                hits.push((gi as usize, gj as usize));
            }
        }
        (folds, hits)
    }

    fn strictly_inside(&self, t: &[usize; 3], p: (f64, f64)) -> bool {
        let [a, b, c] = t.map(|k| self.verts[k].0);
        let total = orient(a, b, c);
        let l0 = orient(b, c, p) / total;
        let l1 = orient(c, a, p) / total;
        let l2 = orient(a, b, p) / total;
        let tol = 1e-9;
        l0 > tol && l1 > tol && l2 > tol
    }
}

/// Divergence of the graph height near one boundary edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeDivergence {
    pub row: Row,
    pub n: i64,
    pub expected: EdgeLabel,
    /// Chart coordinate of the end over this edge.
    pub end_u: Complex64,
    /// `x1` of the probe points (on the edge's interior).
    pub x1: f64,
    /// `x2` at distances `ε`, `ε/2`, `ε/4` from the end.
    pub x2: [f64; 3],
    /// `(|x2(ε/2)| - |x2(ε)|)/log 2` and the same for `ε/4`.
    pub rates: [f64; 2],
    pub ok: bool,
}

/// For each of the four ends over the piece and its `R3`-translate, samples
/// the graph height along the chart ray from the end towards `Re u = 0` at
/// distances `ε, ε/2, ε/4` and checks sign and logarithmic growth against
/// the edge label. Abscissas are taken after [`placement_shift`].
pub fn boundary_divergence_check(params: &SurfaceParams, strip: &MarkedStrip, eps: f64) -> Result<Vec<EdgeDivergence>> {
    let shift = placement_shift(params)?;
    let oh = params.chart.omega_h;
    let ov = params.chart.omega_v;
    let mut ends: Vec<Complex64> = Vec::new();
    for x in [-0.5 * oh, 0.5 * oh] {
        for (_, p) in params.ends_near(Complex64::new(x, 0.5 * ov), ov) {
            if (p.re - x).abs() < 1e-12 && p.im >= -0.5 * ov && p.im < 1.5 * ov {
                ends.push(p);
            }
        }
    }
    ends.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut out = Vec::with_capacity(ends.len());
    for e in ends {
        let dir = if e.re < 0.0 { 1.0 } else { -1.0 };
        let mut x2 = [0.0; 3];
        let mut x1 = 0.0;
        for (k, d) in [eps, 0.5 * eps, 0.25 * eps].into_iter().enumerate() {
            let s = position_at_near(params, e + Complex64::new(dir * d, 0.0), false, 0.2 * eps)?;
            x2[k] = s.x.x2();
            x1 = s.x.x1();
        }
        let row = if e.re < 0.0 { Row::Bottom } else { Row::Top };
        // edge index in the placement that solves S(h, a) exactly
        let n = strip.edge_at(row, x1 + shift);
        let expected = strip.edge_label(row, n);
        let r1 = (x2[1].abs() - x2[0].abs()) / LN_2;
        let r2 = (x2[2].abs() - x2[1].abs()) / LN_2;
        let sign_ok = x2.iter().all(|v| v.signum() == expected.sign());
        let ok = sign_ok && r1 > 0.0 && r2 > 0.0 && (r1 - r2).abs() <= 0.2 * r2;
        out.push(EdgeDivergence {
            row,
            n,
            expected,
            end_u: e,
            x1,
            x2,
            rates: [r1, r2],
            ok,
        });
    }
    Ok(out)
}

/// Translation along `x1` taking the `D''`-anchored piece onto the graph
/// that solves `S(h, a)` with the labels as stated, `0` or `1`. A unit
/// shift swaps the two label classes. It is needed when `T1 < 0` and again
/// whenever reducing `T1/4` into `(-1/2, 1/2]` wraps by one.
pub fn placement_shift(params: &SurfaceParams) -> Result<f64> {
    let q = 0.25 * period_t(params)?.x1();
    let wrap = (q - reduce_half(q)).round() as i64;
    let flip = i64::from(q < 0.0);
    Ok((wrap + flip).rem_euclid(2) as f64)
}

/// The graph `x2 = f(x1, x3)` over the strip, placed so that it solves
/// `S(h, a)` with the labels of [`MarkedStrip`].
///
/// A row `x3 = const` is the chart line `Re u = x3/μ`; along it `x1` is
/// strictly monotone and gains the period `±2` over `2ω_v`. Values are
/// found by a bracketed Newton iteration in `Im u` from a tabulated sweep.
pub struct GraphFunction<'a> {
    params: &'a SurfaceParams,
    shift: f64,
    h: f64,
}

const ROW_TABLE: usize = 48;

impl<'a> GraphFunction<'a> {
    pub fn new(params: &'a SurfaceParams) -> Result<Self> {
        Ok(GraphFunction {
            params,
            shift: placement_shift(params)?,
            h: 0.25 * t3_closed_form(params).abs(),
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn value(&self, x1: f64, x3: f64) -> Result<f64> {
        Ok(self.row(x3, &[x1])?[0])
    }

    /// `f(x1, x3)` for every abscissa in `x1s`.
    pub fn row(&self, x3: f64, x1s: &[f64]) -> Result<Vec<f64>> {
        if !(x3.abs() < self.h) {
            return Err(KmrError::Range {
                value: x3,
                limit: self.h,
            });
        }
        let params = self.params;
        let ov = params.chart.omega_v;
        let re = x3 / params.mu;
        let u0 = Complex64::new(re, -ov);
        let s0 = position_at(params, u0, false)?;
        let origin = s0.x + Vec3::new(self.shift, 0.0, 0.0);
        let mut table = Vec::with_capacity(ROW_TABLE + 1);
        let mut cur = State {
            u: u0,
            point: s0.point,
            f: [Complex64::new(0.0, 0.0); 3],
        };
        table.push((cur, origin));
        for k in 1..=ROW_TABLE {
            let u = Complex64::new(re, -ov + 2.0 * ov * k as f64 / ROW_TABLE as f64);
            cur = step(params, &cur, u)?;
            table.push((cur, origin + project(&cur.f, false)));
        }
        let period = table[ROW_TABLE].1.x1() - table[0].1.x1();
        let dir = period.signum();
        if table.windows(2).any(|w| dir * (w[1].1.x1() - w[0].1.x1()) <= 0.0) {
            return Err(KmrError::Inconsistent(alloc::format!(
                "x1 is not monotone along Re u = {re}"
            )));
        }
        let rot = params.rotation();
        let mut out = Vec::with_capacity(x1s.len());
        for &t in x1s {
            // reduce into the tabulated period
            let x_first = table[0].1.x1();
            let k = ((t - x_first) / period).floor();
            let t0 = t - k * period;
            let j = table
                .windows(2)
                .position(|w| dir * (w[1].1.x1() - t0) >= 0.0)
                .unwrap_or(ROW_TABLE - 1);
            let (base, base_x) = table[j];
            let (mut lo, mut hi) = (base.u.im, table[j + 1].0.u.im);
            let (x_lo, x_hi) = (base_x.x1(), table[j + 1].1.x1());
            let mut y = lo + (hi - lo) * (t0 - x_lo) / (x_hi - x_lo);
            let mut x = base_x;
            for _ in 0..60 {
                let st = step(params, &base, Complex64::new(re, y))?;
                x = origin + project(&st.f, false);
                let g = x.x1() - t0;
                if g.abs() <= 1e-13 * (1.0 + t0.abs()) {
                    break;
                }
                if dir * g > 0.0 {
                    hi = y;
                } else {
                    lo = y;
                }
                let d = -forms_of_z(st.point.z, rot, params.mu)[0].im;
                let mut next = y - g / d;
                if !(next > lo && next < hi) || !next.is_finite() {
                    next = 0.5 * (lo + hi);
                }
                if (next - y).abs() <= 1e-15 * (1.0 + y.abs()) {
                    break;
                }
                y = next;
            }
            out.push(x.x2());
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn strip_basics() {
        let s = MarkedStrip::new(0.4, -0.5).unwrap();
        assert_eq!(s.a, 0.5);
        assert!(s.feasible());
        assert_relative_eq!((s.p(1) - s.p(0)).norm(), 1.0);
        assert_eq!(s.edge_label(Row::Bottom, 0), EdgeLabel::PlusInfinity);
        assert_eq!(s.edge_label(Row::Top, -1), EdgeLabel::MinusInfinity);
        assert!(!MarkedStrip::new(0.3, 0.1).unwrap().feasible());
        assert!(MarkedStrip::new(-0.1, 0.1).is_err());
        assert_eq!(s.edge_at(Row::Bottom, 0.7), 1);
    }

    #[test]
    fn arc_width_cases() {
        let mut a = [0.1, 0.2, 3.0];
        assert_relative_eq!(arc_width(&mut a), 2.9, epsilon = 1e-15);
        let mut b = [-3.0, 3.0];
        assert_relative_eq!(arc_width(&mut b), 2.0 * PI - 6.0, epsilon = 1e-15);
    }

    #[test]
    fn crossing_detection() {
        let a = [(0.0, 0.0), (1.0, 1.0)];
        let b = [(0.0, 1.0), (1.0, 0.0)];
        assert_eq!(polyline_crossings(&a, &b, false), 1);
        let c = [(0.0, 0.0), (1.0, 0.0)];
        assert_eq!(polyline_crossings(&a, &c, false), 0);
    }
}

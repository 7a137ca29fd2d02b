//! Meshes of the graph piece over one vertical window of the chart band
//! `-ω_h/2 ≤ Re u ≤ ω_h/2`, its conjugate, the isometries `S3`, `Deck`,
//! `R3`, level curves and a discrete mean-curvature probe.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::curve::{ChartPath, CurvePoint, Segment};
use crate::error::{KmrError, Result};
use crate::geom::Vec3;
use crate::weierstrass::{forms_of_z, gauss_map, project, t3_closed_form, SurfaceParams};

/// Options for [`build_graph_piece`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    pub nu: usize,
    pub nv: usize,
    pub conjugate: bool,
    /// End-exclusion radius; `None` uses the default `1e-2·min(ω_h, ω_v)`.
    pub eps_end: Option<f64>,
    /// Window index `k`: the window is `Im u ∈ [(k-½)ω_v, (k+½)ω_v]`,
    /// i.e. the `k`-th `R3`-translate of the base window.
    pub shift: i32,
}

impl MeshOptions {
    pub fn new(nu: usize, nv: usize) -> Self {
        MeshOptions {
            nu,
            nv,
            conjugate: false,
            eps_end: None,
            shift: 0,
        }
    }

    pub fn conjugate(mut self, on: bool) -> Self {
        self.conjugate = on;
        self
    }

    pub fn eps_end(mut self, eps: f64) -> Self {
        self.eps_end = Some(eps);
        self
    }

    pub fn shift(mut self, k: i32) -> Self {
        self.shift = k;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub u: Complex64,
    pub point: CurvePoint,
    pub x: Vec3,
    pub n: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsometryKind {
    S3,
    Deck,
    R3,
}

/// An isometry of `R^3` from the symmetry group of the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Isometry {
    /// `π`-rotation about the line `{x1 = x1_axis, x3 = x3_axis}` (parallel to `x2`).
    S3 { x1_axis: f64, x3_axis: f64 },
    /// `x ↦ -x`
    Deck,
    /// `(x1, x2, x3) ↦ (x1 + 1, -x2, x3)`
    R3,
}

impl Isometry {
    /// The `S3` rotation about the bottom boundary line with smallest `|x1|`,
    /// which sits at `x1 = -a`, `x3 = -h`.
    pub fn s3_for(params: &SurfaceParams, a: f64) -> Isometry {
        let h = 0.25 * t3_closed_form(params).abs();
        Isometry::S3 {
            x1_axis: -a,
            x3_axis: -h,
        }
    }

    pub fn kind(&self) -> IsometryKind {
        match self {
            Isometry::S3 { .. } => IsometryKind::S3,
            Isometry::Deck => IsometryKind::Deck,
            Isometry::R3 => IsometryKind::R3,
        }
    }

    pub fn apply(&self, x: Vec3) -> Vec3 {
        match *self {
            Isometry::S3 { x1_axis, x3_axis } => Vec3::new(2.0 * x1_axis - x.x1(), x.x2(), 2.0 * x3_axis - x.x3()),
            Isometry::Deck => -x,
            Isometry::R3 => Vec3::new(x.x1() + 1.0, -x.x2(), x.x3()),
        }
    }

    /// Action of the linear part, used for normals.
    pub fn apply_linear(&self, v: Vec3) -> Vec3 {
        match *self {
            Isometry::S3 { .. } => Vec3::new(-v.x1(), v.x2(), -v.x3()),
            Isometry::Deck => -v,
            Isometry::R3 => Vec3::new(v.x1(), -v.x2(), v.x3()),
        }
    }

    pub fn det(&self) -> f64 {
        match self {
            Isometry::S3 { .. } => 1.0,
            Isometry::Deck | Isometry::R3 => -1.0,
        }
    }

    /// Unit normal of the image, keeping the orientation of the chart grid.
    pub fn apply_normal(&self, n: Vec3) -> Vec3 {
        self.apply_linear(n) * self.det()
    }
}

/// Sampled graph piece. Samples are stored row-major: row `j` is the chart
/// line `Im u = const`, column `i` is `Re u = const`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    pub params: SurfaceParams,
    pub nu: usize,
    pub nv: usize,
    pub conjugate: bool,
    pub shift: i32,
    /// Truncation radius around the ends.
    pub truncation: f64,
    /// Translation subtracted from the raw integrals so that `D''` is the origin.
    pub anchor: Vec3,
    /// `None` where the sample falls inside the end-exclusion disk.
    pub samples: Vec<Option<Sample>>,
    /// Points on the line `Re u = 0` at each row height.
    pub seam: Vec<Sample>,
    pub applied: Vec<IsometryKind>,
}

impl SurfaceMesh {
    pub fn get(&self, i: usize, j: usize) -> Option<&Sample> {
        self.samples[j * self.nu + i].as_ref()
    }

    pub fn du(&self) -> f64 {
        self.params.chart.omega_h / (self.nu - 1) as f64
    }

    pub fn dv(&self) -> f64 {
        self.params.chart.omega_v / (self.nv - 1) as f64
    }

    pub fn u_at(&self, i: usize, j: usize) -> Complex64 {
        grid_u(&self.params, self.nu, self.nv, self.shift, i, j)
    }

    pub fn vertex_count(&self) -> usize {
        self.samples.iter().filter(|s| s.is_some()).count()
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.samples.iter().flatten().map(|s| s.x).collect()
    }

    /// Quads `(i, j)` whose four corners are present.
    pub fn quads(&self) -> Vec<[usize; 4]> {
        let mut out = Vec::new();
        for j in 0..self.nv - 1 {
            for i in 0..self.nu - 1 {
                let q = [
                    j * self.nu + i,
                    j * self.nu + i + 1,
                    (j + 1) * self.nu + i + 1,
                    (j + 1) * self.nu + i,
                ];
                if q.iter().all(|&k| self.samples[k].is_some()) {
                    out.push(q);
                }
            }
        }
        out
    }

    /// Applies an isometry to every sample.
    pub fn apply_isometry(&self, iso: Isometry) -> SurfaceMesh {
        let mut out = self.clone();
        for s in out.samples.iter_mut().flatten().chain(out.seam.iter_mut()) {
            s.x = iso.apply(s.x);
            s.n = iso.apply_normal(s.n);
        }
        out.applied.push(iso.kind());
        out
    }

    /// Column index range of the region `Re u ≤ 0`.
    pub fn left_half_columns(&self) -> core::ops::Range<usize> {
        let oh = self.params.chart.omega_h;
        let n = (0..self.nu)
            .take_while(|&i| -0.5 * oh + i as f64 * self.du() <= 1e-12 * oh)
            .count();
        0..n
    }
}

fn grid_u(params: &SurfaceParams, nu: usize, nv: usize, shift: i32, i: usize, j: usize) -> Complex64 {
    let oh = params.chart.omega_h;
    let ov = params.chart.omega_v;
    let re = if i == nu - 1 {
        0.5 * oh
    } else {
        -0.5 * oh + i as f64 * oh / (nu - 1) as f64
    };
    let im = if j == nv - 1 {
        (shift as f64 + 0.5) * ov
    } else {
        (shift as f64 - 0.5) * ov + j as f64 * ov / (nv - 1) as f64
    };
    Complex64::new(re, im)
}

/// Integrals of the forms from the base point to `D''`.
pub fn anchor_integrals(params: &SurfaceParams) -> Result<[Complex64; 3]> {
    let path = ChartPath::polyline(&[Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.5 * params.chart.omega_v)]);
    let rot = params.rotation();
    let mu = params.mu;
    params
        .chart
        .transport_with(&path, params.chart.base, |z| forms_of_z(z, rot, mu))
        .map(|t| t.integrals)
}

/// Position on the anchored surface (or its conjugate) at chart point `u`,
/// reached by the route up `Re u = 0` and then horizontally.
pub fn position_at(params: &SurfaceParams, u: Complex64, conjugate: bool) -> Result<Sample> {
    position_at_near(params, u, conjugate, params.eps_end())
}

/// As [`position_at`], allowing the route to come within `eps` of an end.
pub fn position_at_near(params: &SurfaceParams, u: Complex64, conjugate: bool, eps: f64) -> Result<Sample> {
    let anchor = project(&anchor_integrals(params)?, conjugate);
    let path = params.chart.standard_route(u);
    let (point, f) = if path.is_empty() {
        (params.chart.base, [Complex64::new(0.0, 0.0); 3])
    } else {
        let t = crate::weierstrass::integrate_forms_near(params, &path, params.chart.base, eps)?;
        (t.point, t.integrals)
    };
    Ok(Sample {
        u,
        point,
        x: project(&f, conjugate) - anchor,
        n: gauss_map(&point, params).normal(),
    })
}

#[derive(Clone, Copy)]
pub(crate) struct State {
    pub(crate) u: Complex64,
    pub(crate) point: CurvePoint,
    pub(crate) f: [Complex64; 3],
}

pub(crate) fn step(params: &SurfaceParams, from: &State, to: Complex64) -> Result<State> {
    let rot = params.rotation();
    let mu = params.mu;
    let mut path = ChartPath::new();
    path.push(Segment::Line { from: from.u, to });
    let t = params.chart.transport_with(&path, from.point, |z| forms_of_z(z, rot, mu))?;
    Ok(State {
        u: to,
        point: t.point,
        f: [from.f[0] + t.integrals[0], from.f[1] + t.integrals[1], from.f[2] + t.integrals[2]],
    })
}

/// Seam states and mesh bookkeeping shared by sequential and parallel
/// builders.
pub struct MeshPlan {
    params: SurfaceParams,
    opts: MeshOptions,
    eps: f64,
    anchor: [Complex64; 3],
    seam: Vec<State>,
}

impl MeshPlan {
    pub fn new(params: &SurfaceParams, opts: MeshOptions) -> Result<Self> {
        if opts.nu < 16 || opts.nv < 16 {
            return Err(KmrError::Configuration(alloc::format!(
                "mesh resolution {}x{} is below the 16x16 minimum",
                opts.nu,
                opts.nv
            )));
        }
        let eps = opts.eps_end.unwrap_or_else(|| params.eps_end());
        if !(eps > 0.0 && eps < 0.25 * params.chart.min_omega()) {
            return Err(KmrError::Configuration(alloc::format!(
                "end truncation {eps} must lie in (0, {})",
                0.25 * params.chart.min_omega()
            )));
        }
        let anchor = anchor_integrals(params)?;
        // seam: transport up/down Re u = 0 from the base point to each row
        let mut seam = Vec::with_capacity(opts.nv);
        let base = State {
            u: Complex64::new(0.0, 0.0),
            point: params.chart.base,
            f: [Complex64::new(0.0, 0.0); 3],
        };
        let heights: Vec<f64> = (0..opts.nv)
            .map(|j| grid_u(params, opts.nu, opts.nv, opts.shift, 0, j).im)
            .collect();
        // start from the row closest to 0 and walk outward both ways
        let j0 = heights
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |b, (j, y)| if y.abs() < b.1 { (j, y.abs()) } else { b })
            .0;
        let mut states: Vec<Option<State>> = alloc::vec![None; opts.nv];
        let first = step(params, &base, Complex64::new(0.0, heights[j0]))?;
        states[j0] = Some(first);
        let mut cur = first;
        for j in j0 + 1..opts.nv {
            cur = step(params, &cur, Complex64::new(0.0, heights[j]))?;
            states[j] = Some(cur);
        }
        cur = first;
        for j in (0..j0).rev() {
            cur = step(params, &cur, Complex64::new(0.0, heights[j]))?;
            states[j] = Some(cur);
        }
        seam.extend(states.into_iter().flatten());
        Ok(MeshPlan {
            params: params.clone(),
            opts,
            eps,
            anchor,
            seam,
        })
    }

    pub fn rows(&self) -> usize {
        self.opts.nv
    }

    fn sample_of(&self, s: &State) -> Sample {
        let conj = self.opts.conjugate;
        Sample {
            u: s.u,
            point: s.point,
            x: project(&s.f, conj) - project(&self.anchor, conj),
            n: gauss_map(&s.point, &self.params).normal(),
        }
    }

    fn near_end(&self, u: Complex64) -> bool {
        !self.params.ends_near(u, self.eps).is_empty()
    }

    /// Transports one row outward from the seam. Independent across rows.
    pub fn row(&self, j: usize) -> Result<Vec<Option<Sample>>> {
        let nu = self.opts.nu;
        let mut out: Vec<Option<Sample>> = alloc::vec![None; nu];
        let seam = self.seam[j];
        let us: Vec<Complex64> = (0..nu)
            .map(|i| grid_u(&self.params, nu, self.opts.nv, self.opts.shift, i, j))
            .collect();
        let mut cur = seam;
        for i in 0..nu {
            if us[i].re < 0.0 {
                continue;
            }
            if self.near_end(us[i]) {
                break;
            }
            cur = if us[i] == cur.u { cur } else { step(&self.params, &cur, us[i])? };
            out[i] = Some(self.sample_of(&cur));
        }
        cur = seam;
        for i in (0..nu).rev() {
            if us[i].re >= 0.0 {
                continue;
            }
            if self.near_end(us[i]) {
                break;
            }
            cur = step(&self.params, &cur, us[i])?;
            out[i] = Some(self.sample_of(&cur));
        }
        Ok(out)
    }

    /// Assembles the mesh from rows computed by [`MeshPlan::row`].
    pub fn assemble(self, rows: Vec<Vec<Option<Sample>>>) -> SurfaceMesh {
        let seam: Vec<Sample> = self.seam.iter().map(|s| self.sample_of(s)).collect();
        let conj = self.opts.conjugate;
        SurfaceMesh {
            nu: self.opts.nu,
            nv: self.opts.nv,
            conjugate: conj,
            shift: self.opts.shift,
            truncation: self.eps,
            anchor: project(&self.anchor, conj),
            samples: rows.into_iter().flatten().collect(),
            seam,
            applied: Vec::new(),
            params: self.params,
        }
    }
}

/// Builds the mesh of the graph piece (or its conjugate) over the window
/// selected by `opts.shift`, anchored so that `D''` is the origin.
pub fn build_graph_piece(params: &SurfaceParams, opts: MeshOptions) -> Result<SurfaceMesh> {
    let plan = MeshPlan::new(params, opts)?;
    let rows = (0..plan.rows()).map(|j| plan.row(j)).collect::<Result<Vec<_>>>()?;
    Ok(plan.assemble(rows))
}

/// Level curve `x3 = x3_value` over one vertical chart period, sampled at
/// `n + 1` points. The endpoint gap is the period `±(2, 0, 0)`.
pub fn level_curve(params: &SurfaceParams, x3_value: f64, n: usize) -> Result<Vec<Vec3>> {
    level_curve_with(params, x3_value, n, false)
}

pub fn level_curve_with(params: &SurfaceParams, x3_value: f64, n: usize, conjugate: bool) -> Result<Vec<Vec3>> {
    let h = 0.25 * t3_closed_form(params).abs();
    if !(x3_value.abs() < h) {
        return Err(KmrError::Range {
            value: x3_value,
            limit: h,
        });
    }
    let ov = params.chart.omega_v;
    let re = x3_value / params.mu;
    let start_u = Complex64::new(re, -ov);
    let start = position_at(params, start_u, conjugate)?;
    let mut cur = State {
        u: start_u,
        point: start.point,
        f: [Complex64::new(0.0, 0.0); 3],
    };
    let n = n.max(2);
    let mut out = Vec::with_capacity(n + 1);
    out.push(start.x);
    for k in 1..=n {
        let u = Complex64::new(re, -ov + 2.0 * ov * k as f64 / n as f64);
        cur = step(params, &cur, u)?;
        out.push(start.x + project(&cur.f, conjugate));
    }
    Ok(out)
}

/// Mean-curvature magnitude at interior samples from the cotangent
/// Laplacian on the triangulated grid, `|H| = |Δx| / 2` with the mixed
/// (barycentric) area. Returns `(i, j, |H|)` for samples whose 8-neighbours
/// all exist.
pub fn discrete_mean_curvature(mesh: &SurfaceMesh) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    let nu = mesh.nu;
    let nv = mesh.nv;
    let at = |i: usize, j: usize| mesh.get(i, j).map(|s| s.x);
    for j in 1..nv - 1 {
        for i in 1..nu - 1 {
            let Some(p) = at(i, j) else { continue };
            // one-ring in counterclockwise order for the diagonal split
            // (i,j)-(i+1,j+1)
            let ring_idx = [(1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)];
            let mut ring = [Vec3::ZERO; 6];
            let mut ok = true;
            for (k, (di, dj)) in ring_idx.iter().enumerate() {
                match at((i as i64 + di) as usize, (j as i64 + dj) as usize) {
                    Some(q) => ring[k] = q,
                    None => ok = false,
                }
            }
            if !ok {
                continue;
            }
            let mut lap = Vec3::ZERO;
            let mut area = 0.0;
            for k in 0..6 {
                let prev = ring[(k + 5) % 6];
                let q = ring[k];
                let next = ring[(k + 1) % 6];
                let cot_a = cot(prev, p, q);
                let cot_b = cot(next, p, q);
                lap += (q - p) * (0.5 * (cot_a + cot_b));
                area += (q - p).cross(&(next - p)).norm() / 6.0;
            }
            out.push((i, j, 0.5 * lap.norm() / area));
        }
    }
    out
}

/// Cotangent of the angle at `apex` in the triangle `(apex, a, b)`.
fn cot(apex: Vec3, a: Vec3, b: Vec3) -> f64 {
    let e1 = a - apex;
    let e2 = b - apex;
    e1.dot(&e2) / e1.cross(&e2).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn isometry_actions() {
        let x = Vec3::new(0.3, -1.2, 0.4);
        assert_eq!(Isometry::Deck.apply(Isometry::Deck.apply(x)), x);
        let r2 = Isometry::R3.apply(Isometry::R3.apply(x));
        assert_relative_eq!(r2.x1(), x.x1() + 2.0);
        assert_eq!(r2.x2(), x.x2());
        let s = Isometry::S3 {
            x1_axis: -0.2,
            x3_axis: -0.5,
        };
        let on_axis = Vec3::new(-0.2, 7.0, -0.5);
        assert_eq!(s.apply(on_axis), on_axis);
        assert!(s.apply(s.apply(x)).distance(&x) < 1e-15);
    }

    #[test]
    fn coarse_mesh_rejected() {
        let p = SurfaceParams::new(1.0, 0.7).unwrap();
        assert!(build_graph_piece(&p, MeshOptions::new(8, 32)).is_err());
    }

    #[test]
    fn grid_hits_window_edges() {
        let p = SurfaceParams::new(1.0, 0.7).unwrap();
        let u = grid_u(&p, 17, 17, 1, 16, 16);
        assert_eq!(u.re, 0.5 * p.chart.omega_h);
        assert_eq!(u.im, 1.5 * p.chart.omega_v);
    }
}

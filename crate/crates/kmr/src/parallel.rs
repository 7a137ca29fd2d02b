//! Rayon-backed builders. Results are collected in index order, so output
//! does not depend on the thread count.

use rayon::prelude::*;

use kmr_core::solver::{phi_values, ParameterDomain};
use kmr_core::surface::{MeshOptions, MeshPlan, SurfaceMesh};
use kmr_core::weierstrass::SurfaceParams;
use kmr_core::Result;

pub const THREADS_ENV: &str = "KMR_THREADS";

/// Thread count from `KMR_THREADS`; `None` when unset (rayon default).
pub fn threads_from_env() -> std::result::Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(format!("{THREADS_ENV}: {e}")),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got {s:?}")),
        },
    }
}

pub fn thread_pool(threads: Option<usize>) -> std::result::Result<rayon::ThreadPool, String> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| e.to_string())
}

/// Same mesh as `kmr_core::surface::build_graph_piece`, rows in parallel.
pub fn build_graph_piece_par(params: &SurfaceParams, opts: MeshOptions) -> Result<SurfaceMesh> {
    let plan = MeshPlan::new(params, opts)?;
    let rows = (0..plan.rows())
        .into_par_iter()
        .map(|j| plan.row(j))
        .collect::<Result<Vec<_>>>()?;
    Ok(plan.assemble(rows))
}

/// The solver's seeding grid, evaluated in parallel.
pub fn parameter_domain_par() -> Result<ParameterDomain> {
    let values = ParameterDomain::grid_points()
        .into_par_iter()
        .map(|(t, a)| phi_values(t, a).ok())
        .collect();
    ParameterDomain::from_values(values)
}

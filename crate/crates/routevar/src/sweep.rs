use rayon::prelude::*;
use routevar_core::chaos::VariationConfig;
use routevar_core::icmap::{GridSpec, ICMap, MapBuilder, MapError};

/// Parallel [`routevar_core::icmap::build_map`]. Cells are collected in grid
/// order, so the result is identical to the serial build.
pub fn build_map_parallel(
    spec: GridSpec,
    cfg: &VariationConfig,
    n: usize,
) -> Result<ICMap, MapError> {
    let builder = MapBuilder::new(spec, cfg, n)?;
    let cells = (0..builder.cell_count())
        .into_par_iter()
        .map(|i| builder.evaluate(i))
        .collect();
    Ok(builder.finish(cells))
}

/// [`build_map_parallel`] on a dedicated pool of `threads` workers.
pub fn build_map_with_threads(
    spec: GridSpec,
    cfg: &VariationConfig,
    n: usize,
    threads: usize,
) -> Result<ICMap, MapError> {
    match rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
    {
        Ok(pool) => pool.install(|| build_map_parallel(spec, cfg, n)),
        Err(_) => build_map_parallel(spec, cfg, n),
    }
}

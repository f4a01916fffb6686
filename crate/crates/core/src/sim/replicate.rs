use rayon::prelude::*;

use super::{simulate, RunOptions, SimError, SimReport};
use crate::model::SystemConfig;

/// Runs `replications` independent runs with seeds `base_seed + r` and
/// aggregates them. Runs execute in parallel; the result does not depend on
/// scheduling.
pub fn run_replications(
    config: &SystemConfig,
    horizon: f64,
    warmup: f64,
    base_seed: u64,
    replications: usize,
) -> Result<SimReport, SimError> {
    if replications < 2 {
        return Err(SimError::TooFewReplications(replications));
    }
    let runs = (0..replications)
        .into_par_iter()
        .map(|r| {
            let opts = RunOptions::new(horizon, base_seed.wrapping_add(r as u64)).with_warmup(warmup);
            simulate(config, &opts).map(|o| o.stats)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SimReport::aggregate(runs, base_seed))
}

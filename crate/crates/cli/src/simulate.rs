use std::path::Path;

use gsq_core::sim::trace_to_csv;
use gsq_core::{run_replications, simulate, RunOptions, SimError};

use crate::input::{load_config, write_file, Failure};
use crate::RunArgs;

pub fn check_run_args(run: &RunArgs) -> Result<(), Failure> {
    if run.replications < 2 {
        return Err(Failure::usage(anyhow::anyhow!(
            "--replications {}: need >= 2 for CIs",
            run.replications
        )));
    }
    if !(run.warmup >= 0.0 && run.horizon > run.warmup && run.horizon.is_finite()) {
        return Err(Failure::usage(anyhow::anyhow!(
            "--horizon {} / --warmup {}: need horizon > warmup >= 0",
            run.horizon,
            run.warmup
        )));
    }
    Ok(())
}

pub fn sim_failure(e: SimError) -> Failure {
    match e {
        SimError::InvalidConfig(_) | SimError::WrongModel(_) => Failure::invalid(e),
        SimError::InvalidOptions(_) | SimError::TooFewReplications(_) => Failure::usage(e),
    }
}

pub fn run(config: &Path, run: &RunArgs, output: Option<&Path>, trace: Option<&Path>) -> Result<(), Failure> {
    check_run_args(run)?;
    let cfg = load_config(config)?;
    let report = run_replications(&cfg, run.horizon, run.warmup, run.seed, run.replications).map_err(sim_failure)?;
    if let Some(path) = trace {
        let opts = RunOptions::new(run.horizon, run.seed)
            .with_warmup(run.warmup)
            .with_trace();
        let out = simulate(&cfg, &opts).map_err(sim_failure)?;
        write_file(path, &trace_to_csv(&out.trace.unwrap_or_default()))?;
    }
    match output {
        Some(path) => {
            write_file(path, &report.to_csv())?;
            print!("{}", report.to_pretty());
        }
        None => print!("{}", report.to_csv()),
    }
    Ok(())
}

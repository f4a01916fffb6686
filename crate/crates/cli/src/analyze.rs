use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use gsq_core::qbd::{
    build_generator, expected_power_rate, gamma_moments, loss_probability, reward_vector, stationary_distribution,
    GammaOptions,
};
use gsq_core::sim::GroupMode;
use gsq_core::{QbdError, QbdParams, QbdState};

use crate::input::{load_config, write_file, Failure};
use crate::Initial;

fn qbd_failure(e: QbdError) -> Failure {
    match e {
        QbdError::InvalidArgument(_) => Failure::usage(e),
        _ => Failure::invalid(e),
    }
}

pub fn summary_path(output: &Path) -> PathBuf {
    output.with_extension("summary.csv")
}

pub fn run(config: &Path, xs: &[f64], moments: u32, initial: Initial, output: Option<&Path>) -> Result<(), Failure> {
    if let Some(&bad) = xs.iter().find(|&&x| !(x.is_finite() && x > 0.0)) {
        return Err(Failure::usage(anyhow::anyhow!("--x {bad}: x must be > 0")));
    }
    if moments < 1 {
        return Err(Failure::usage(anyhow::anyhow!("--moments {moments}: r must be >= 1")));
    }
    let cfg = load_config(config)?;
    let (params, rates) = QbdParams::from_config(&cfg).map_err(qbd_failure)?;
    let model = build_generator(&params).map_err(qbd_failure)?;
    let pi = stationary_distribution(&model.generator).map_err(qbd_failure)?;
    let f = reward_vector(&model.space, &rates).map_err(qbd_failure)?;
    let power = expected_power_rate(&pi, &f).map_err(qbd_failure)?;
    let loss = loss_probability(&model, &pi).map_err(qbd_failure)?;

    let mut table = String::from("level,phase,i,l1,j,pi,f\n");
    for (idx, (level, phase, s)) in model.space.iter().enumerate() {
        let _ = writeln!(
            table,
            "{level},{phase},{},{},{},{},{}",
            s.group0_busy,
            s.mode_letter(),
            s.group1_count,
            pi[idx],
            f.values[idx]
        );
    }

    let pi0 = match initial {
        Initial::Stationary => pi.clone(),
        Initial::Empty => {
            let mut v = vec![0.0; model.len()];
            let empty = model
                .space
                .index_of(QbdState::new(0, GroupMode::Sleep, 0))
                .expect("empty state exists");
            v[empty] = 1.0;
            v
        }
    };
    let mut summary = String::from("quantity,x,value\n");
    let _ = writeln!(summary, "power_rate,,{power}");
    let _ = writeln!(summary, "loss_probability,,{loss}");
    let opts = GammaOptions::default();
    for &x in xs {
        let values = gamma_moments(&model.generator, &f.values, &pi0, x, moments, &opts).map_err(qbd_failure)?;
        for g in values {
            let _ = writeln!(summary, "gamma_moment_{},{x},{}", g.order, g.value);
        }
    }

    match output {
        Some(path) => {
            write_file(path, &table)?;
            let side = summary_path(path);
            write_file(&side, &summary)?;
            println!(
                "{} states; power rate {power:.6}; loss probability {loss:.6e}",
                model.len()
            );
            println!("wrote {} and {}", path.display(), side.display());
        }
        None => print!("{table}\n{summary}"),
    }
    Ok(())
}

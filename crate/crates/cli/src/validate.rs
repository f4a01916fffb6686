use gsq_core::oracles::{brute_force_ctmc, erlang_b, erlang_b_sum};
use gsq_core::qbd::{
    build_generator, expected_power_rate, loss_probability, reward_vector, stationary_distribution,
};
use gsq_core::sim::GroupMode;
use gsq_core::{run_replications, simulate, QbdParams, QbdState, RunOptions, SystemConfig};

use crate::input::Failure;
use crate::Suite;

const INSTANCES: [(usize, usize, usize); 4] = [(1, 1, 1), (2, 2, 2), (4, 4, 3), (3, 5, 4)];

struct Check {
    name: String,
    outcome: Result<String, String>,
}

fn check(name: impl Into<String>, outcome: Result<String, String>) -> Check {
    Check {
        name: name.into(),
        outcome,
    }
}

fn generator_checks() -> Vec<Check> {
    INSTANCES
        .iter()
        .map(|&(n, m, k)| {
            let outcome = build_generator(&QbdParams::new(n, m, k, 7.0, 2.0, 1.5))
                .map_err(|e| e.to_string())
                .and_then(|model| {
                    let row_sum = model.max_row_sum();
                    if row_sum > 1e-12 {
                        Err(format!("max |row sum| {row_sum:e}"))
                    } else if !model.off_diagonals_nonnegative() {
                        Err("negative off-diagonal rate".into())
                    } else if !model.is_block_tridiagonal() {
                        Err("not block-tridiagonal".into())
                    } else {
                        Ok(format!(
                            "{} states in {} levels, max |row sum| {row_sum:.1e}",
                            model.len(),
                            model.levels()
                        ))
                    }
                });
            check(format!("generator ({n},{m},{k})"), outcome)
        })
        .collect()
}

fn dual_construction(n: usize, m: usize, k: usize) -> Result<String, String> {
    let params = QbdParams::new(n, m, k, 7.0, 2.0, 1.5);
    let model = build_generator(&params).map_err(|e| e.to_string())?;
    let oracle = brute_force_ctmc(&params).map_err(|e| e.to_string())?;
    if oracle.len() != model.len() {
        return Err(format!("{} vs {} states", model.len(), oracle.len()));
    }
    let pi = stationary_distribution(&model.generator).map_err(|e| e.to_string())?;
    let pi_oracle = oracle.stationary();
    let mut worst = 0.0f64;
    for (idx, &(i, awake, j)) in oracle.states.iter().enumerate() {
        let mode = if awake { GroupMode::WorkOn } else { GroupMode::Sleep };
        let Some(ours) = model.space.index_of(QbdState::new(i, mode, j)) else {
            return Err(format!("oracle state ({i},{awake},{j}) missing"));
        };
        worst = worst.max((pi[ours] - pi_oracle[idx]).abs());
    }
    if worst <= 1e-10 {
        Ok(format!("max |pi difference| {worst:.1e}"))
    } else {
        Err(format!("max |pi difference| {worst:.1e}"))
    }
}

fn oracle_checks() -> Vec<Check> {
    let mut checks = Vec::new();
    let worst = (1..=30u32)
        .flat_map(|c| [0.5, 4.0, 25.0].map(|a| (erlang_b(c, a) - erlang_b_sum(c, a)).abs()))
        .fold(0.0f64, f64::max);
    checks.push(check(
        "Erlang-B recursion vs summation",
        if worst < 1e-12 {
            Ok(format!("max difference {worst:.1e}"))
        } else {
            Err(format!("max difference {worst:.1e}"))
        },
    ));
    let reduction = build_generator(&QbdParams::new(2, 2, 1, 4.0, 1.0, 1.0))
        .and_then(|model| {
            let pi = stationary_distribution(&model.generator)?;
            loss_probability(&model, &pi)
        })
        .map_err(|e| e.to_string())
        .and_then(|loss| {
            let exact = erlang_b(4, 4.0);
            if (loss - exact).abs() <= 1e-10 {
                Ok(format!("loss {loss:.10} = B(4,4)"))
            } else {
                Err(format!("loss {loss} vs B(4,4) = {exact}"))
            }
        });
    checks.push(check("analytic loss reduces to Erlang-B", reduction));
    for &(n, m, k) in &INSTANCES {
        checks.push(check(format!("generator vs state-space walk ({n},{m},{k})"), dual_construction(n, m, k)));
    }
    checks
}

fn crosscheck_checks() -> Vec<Check> {
    let cfg = SystemConfig::two_group_unilateral(4, 4, 3, 10.0, 5.0, 4.0, 1.0, 1.0, 0.2);
    let analytic = || -> Result<(f64, f64), String> {
        let (params, rates) = QbdParams::from_config(&cfg).map_err(|e| e.to_string())?;
        let model = build_generator(&params).map_err(|e| e.to_string())?;
        let pi = stationary_distribution(&model.generator).map_err(|e| e.to_string())?;
        let f = reward_vector(&model.space, &rates).map_err(|e| e.to_string())?;
        let power = expected_power_rate(&pi, &f).map_err(|e| e.to_string())?;
        let loss = loss_probability(&model, &pi).map_err(|e| e.to_string())?;
        Ok((power, loss))
    };
    let (power, loss) = match analytic() {
        Ok(v) => v,
        Err(e) => return vec![check("analytic reference", Err(e))],
    };
    let power_check = simulate(&cfg, &RunOptions::new(1e5, 1).with_warmup(0.0).with_power())
        .map_err(|e| e.to_string())
        .and_then(|out| {
            let sim = out.power_trajectory().map(|p| p.average_rate()).unwrap_or(f64::NAN);
            let rel = (sim / power - 1.0).abs();
            let msg = format!("Phi(T)/T {sim:.5} vs pi f {power:.5} ({:.2}%)", 100.0 * rel);
            if rel <= 0.02 {
                Ok(msg)
            } else {
                Err(msg)
            }
        });
    let loss_check = run_replications(&cfg, 1e4, 1e3, 1, 20)
        .map_err(|e| e.to_string())
        .and_then(|report| {
            let m = report.get("loss_probability").expect("metric present").clone();
            let msg = format!("CI [{:.5}, {:.5}] vs analytic {loss:.5}", m.ci_low, m.ci_high);
            if m.contains(loss) {
                Ok(msg)
            } else {
                Err(msg)
            }
        });
    vec![
        check("simulated vs analytic power rate", power_check),
        check("simulated vs analytic loss probability", loss_check),
    ]
}

pub fn run(suite: Suite) -> Result<(), Failure> {
    let mut checks = Vec::new();
    if matches!(suite, Suite::Generator | Suite::All) {
        checks.extend(generator_checks());
    }
    if matches!(suite, Suite::Oracle | Suite::All) {
        checks.extend(oracle_checks());
    }
    if matches!(suite, Suite::Crosscheck | Suite::All) {
        checks.extend(crosscheck_checks());
    }
    let mut failed = 0;
    for c in &checks {
        match &c.outcome {
            Ok(detail) => println!("PASS {}: {detail}", c.name),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}: {detail}", c.name);
            }
        }
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::invalid(anyhow::anyhow!("{failed} check(s) failed")))
    }
}

use super::OracleError;

/// Erlang-B blocking probability of `servers` servers offered `load`
/// erlangs, by the recursion `B(k) = a B(k-1) / (k + a B(k-1))`.
pub fn erlang_b(servers: u32, load: f64) -> f64 {
    let mut b = 1.0;
    for k in 1..=servers {
        b = load * b / (f64::from(k) + load * b);
    }
    b
}

/// Erlang-B by the explicit ratio `(a^c / c!) / sum_k a^k / k!`.
pub fn erlang_b_sum(servers: u32, load: f64) -> f64 {
    let mut term = 1.0;
    let mut total = 1.0;
    for k in 1..=servers {
        term *= load / f64::from(k);
        total += term;
    }
    term / total
}

/// Expected number in system of an M/M/c queue (requires `lambda < c mu`).
pub fn mmc_expected_count(lambda: f64, servers: u32, mu: f64) -> f64 {
    let c = f64::from(servers);
    let a = lambda / mu;
    let rho = a / c;
    // Erlang-C from Erlang-B
    let b = erlang_b(servers, a);
    let wait_prob = b / (1.0 - rho * (1.0 - b));
    wait_prob * rho / (1.0 - rho) + a
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErlangAMetrics {
    pub expected_count: f64,
    pub expected_queue: f64,
    pub expected_busy: f64,
    /// Fraction of arrivals that abandon, `theta E[queue] / lambda`.
    pub abandonment_fraction: f64,
    pub tail_mass: f64,
}

/// Stationary metrics of M/M/c+M (exponential patience at rate `theta`)
/// from the birth-death chain truncated at `truncation` customers.
pub fn erlang_a_truncated(
    lambda: f64,
    servers: u32,
    mu: f64,
    theta: f64,
    truncation: usize,
) -> Result<ErlangAMetrics, OracleError> {
    if !(lambda > 0.0 && mu > 0.0 && theta >= 0.0 && servers >= 1) {
        return Err(OracleError::InvalidParameters(format!(
            "lambda {lambda}, c {servers}, mu {mu}, theta {theta}"
        )));
    }
    let c = servers as usize;
    let mut weights = Vec::with_capacity(truncation + 1);
    let mut w = 1.0f64;
    weights.push(w);
    for k in 1..=truncation {
        let death = k.min(c) as f64 * mu + k.saturating_sub(c) as f64 * theta;
        w *= lambda / death;
        weights.push(w);
        if !w.is_finite() {
            return Err(OracleError::InvalidParameters("birth-death weights overflow".into()));
        }
    }
    let total: f64 = weights.iter().sum();
    let p: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let tail_mass = *p.last().expect("nonempty");
    if tail_mass >= 1e-10 {
        return Err(OracleError::InsufficientTruncation {
            level: truncation,
            tail_mass,
        });
    }
    let expected_count = p.iter().enumerate().map(|(k, pk)| k as f64 * pk).sum();
    let expected_queue = p
        .iter()
        .enumerate()
        .map(|(k, pk)| k.saturating_sub(c) as f64 * pk)
        .sum::<f64>();
    let expected_busy = p.iter().enumerate().map(|(k, pk)| k.min(c) as f64 * pk).sum();
    Ok(ErlangAMetrics {
        expected_count,
        expected_queue,
        expected_busy,
        abandonment_fraction: theta * expected_queue / lambda,
        tail_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert!((erlang_b(1, 1.0) - 0.5).abs() < 1e-15);
        assert!((erlang_b(2, 1.0) - 0.2).abs() < 1e-15);
        // 4^4/4! / (1 + 4 + 8 + 32/3 + 32/3) = (32/3) / (103/3)
        assert!((erlang_b(4, 4.0) - 32.0 / 103.0).abs() < 1e-15);
        assert!((erlang_b(4, 4.0) - 0.3107).abs() < 5e-5);
    }

    #[test]
    fn recursion_matches_summation() {
        for c in 1..=20 {
            for a in [0.1, 0.5, 1.0, 4.0, 12.5, 30.0] {
                let (r, s) = (erlang_b(c, a), erlang_b_sum(c, a));
                assert!((r - s).abs() <= 1e-12, "c={c} a={a}: {r} vs {s}");
            }
        }
    }

    #[test]
    fn erlang_a_reference_case() {
        // lambda = 3, c = 2, mu = 2, theta = 1: p_k proportional to
        // 1, 3/2, 9/8, then 9/8 * prod 3/(4 + i)
        let m = erlang_a_truncated(3.0, 2, 2.0, 1.0, 80).unwrap();
        let mut w = vec![1.0, 1.5, 1.125];
        for k in 3..=80usize {
            let prev = w[k - 1];
            w.push(prev * 3.0 / (4.0 + (k - 2) as f64));
        }
        let total: f64 = w.iter().sum();
        let expected: f64 = w.iter().enumerate().map(|(k, x)| k as f64 * x).sum::<f64>() / total;
        assert!((m.expected_count - expected).abs() < 1e-12);
        assert!((m.expected_busy + m.expected_queue - m.expected_count).abs() < 1e-12);
        // flow balance: lambda = mu E[busy] + theta E[queue]
        assert!((3.0 - 2.0 * m.expected_busy - m.expected_queue).abs() < 1e-10);
    }

    #[test]
    fn huge_patience_rate_empties_the_queue() {
        let m = erlang_a_truncated(20.0, 4, 5.0, 1e6, 60).unwrap();
        assert!(m.expected_queue < 1e-5);
    }

    #[test]
    fn zero_theta_reduces_to_mmc() {
        let m = erlang_a_truncated(3.0, 2, 2.0, 0.0, 400).unwrap();
        assert!((m.expected_count - mmc_expected_count(3.0, 2, 2.0)).abs() < 1e-9);
        // M/M/2 with a = 1.5, rho = 0.75: L = 24/7
        assert!((mmc_expected_count(3.0, 2, 2.0) - 24.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn detects_short_truncation() {
        assert!(matches!(
            erlang_a_truncated(3.0, 2, 2.0, 0.0, 10),
            Err(OracleError::InsufficientTruncation { .. })
        ));
    }
}

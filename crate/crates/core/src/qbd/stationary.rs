use nalgebra::{DMatrix, DVector};

use super::{QbdError, QbdModel, QbdState};
use crate::sim::GroupMode;

const RESIDUAL_TOL: f64 = 1e-10;

/// Solves `pi Q = 0`, `pi e = 1` for an irreducible generator by replacing
/// the last balance equation with the normalization and LU-factorizing.
pub fn stationary_distribution(q: &DMatrix<f64>) -> Result<Vec<f64>, QbdError> {
    let n = q.nrows();
    if n == 0 || q.ncols() != n {
        return Err(QbdError::DimensionMismatch {
            expected: n,
            got: q.ncols(),
        });
    }
    let mut a = q.transpose();
    a.row_mut(n - 1).fill(1.0);
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let solution = a.lu().solve(&b).ok_or(QbdError::Singular {
        residual: f64::INFINITY,
    })?;
    let pi: Vec<f64> = solution.iter().copied().collect();

    let row = DVector::from_column_slice(&pi).transpose() * q;
    let residual = row.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let mass: f64 = pi.iter().sum();
    if residual > RESIDUAL_TOL || residual.is_nan() || (mass - 1.0).abs() > 1e-12 {
        return Err(QbdError::Singular { residual });
    }
    // roundoff can leave entries at -1e-18
    Ok(pi.into_iter().map(|p| p.max(0.0)).collect())
}

/// Blocking probability: mass of the full state `(W,n;W,m)` (arrivals are
/// Poisson, so they see time averages).
pub fn loss_probability(model: &QbdModel, pi: &[f64]) -> Result<f64, QbdError> {
    if pi.len() != model.len() {
        return Err(QbdError::DimensionMismatch {
            expected: model.len(),
            got: pi.len(),
        });
    }
    let full = QbdState::new(model.params.n, GroupMode::WorkOn, model.params.m);
    Ok(pi[model.space.index_of(full).expect("full state exists")])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::erlang_b;
    use crate::qbd::{build_generator, QbdParams};

    #[test]
    fn two_state_chain() {
        let q = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 2.0, -2.0]);
        let pi = stationary_distribution(&q).unwrap();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((pi[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn two_server_loss_system() {
        let model = build_generator(&QbdParams::new(1, 1, 1, 1.0, 1.0, 1.0)).unwrap();
        let pi = stationary_distribution(&model.generator).unwrap();
        let mut by_count = [0.0; 3];
        for (idx, (_, _, s)) in model.space.iter().enumerate() {
            by_count[s.group0_busy + s.group1_count] += pi[idx];
        }
        assert!((by_count[0] - 8.0 / 20.0).abs() < 1e-14);
        assert!((by_count[1] - 8.0 / 20.0).abs() < 1e-14);
        assert!((by_count[2] - 4.0 / 20.0).abs() < 1e-14);
        assert!((loss_probability(&model, &pi).unwrap() - 0.2).abs() < 1e-14);
    }

    #[test]
    fn k_one_equal_rates_reduce_to_erlang_b() {
        for (n, m, lambda) in [(2, 2, 4.0), (3, 5, 6.5), (1, 4, 0.7)] {
            let model = build_generator(&QbdParams::new(n, m, 1, lambda, 1.0, 1.0)).unwrap();
            let pi = stationary_distribution(&model.generator).unwrap();
            let lp = loss_probability(&model, &pi).unwrap();
            let eb = erlang_b((n + m) as u32, lambda);
            assert!((lp - eb).abs() < 1e-10, "{lp} vs {eb}");
        }
    }

    #[test]
    fn reducible_generator_is_reported() {
        // two absorbing states: singular
        let q = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 1.0, -2.0, 1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(stationary_distribution(&q), Err(QbdError::Singular { .. })));
    }
}

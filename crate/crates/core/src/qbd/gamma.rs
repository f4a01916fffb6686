//! Moments of the first time `Gamma(x)` at which cumulative power
//! `Phi(t) = int_0^t f(X(u)) du` reaches `x`.
//!
//! Write `D = diag(f)^{-1}` and `M(r,k) = d^r/ds^r [(Q - sI) D]^k` at
//! `s = 0`, so that `M(0,0) = I`, `M(r,0) = 0` for `r >= 1` and
//! `M(r,k) = Q D M(r,k-1) - r D M(r-1,k-1)`. Then
//!
//! ```text
//! E[Gamma(x)^r] = (-1)^r (pi0 D) sum_k x^k / k! M(r,k) f
//! ```
//!
//! which [`gamma_moment_taylor`] evaluates term by term. The Taylor series
//! cancels catastrophically once `x` times the spectral radius of `Q D`
//! exceeds a few tens, so [`gamma_moment`] evaluates the same derivative
//! through the time-changed chain `G = D Q`, uniformized as
//! `G = c (P - I)` with `P` stochastic:
//!
//! ```text
//! E[Gamma(x)^r] = sum_k Poisson(k; c x) pi0 y_r(k),
//! y_0(k) = e,  y_r(0) = 0,  y_r(k) = P y_r(k-1) + (r / c) D y_{r-1}(k-1).
//! ```
//!
//! Every quantity there is nonnegative, so no cancellation occurs.

use nalgebra::DMatrix;

use super::QbdError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaOptions {
    /// Stop once a term is below `tolerance * |partial sum|` for three
    /// consecutive indices.
    pub tolerance: f64,
    /// Hard cap on the number of series terms.
    pub max_terms: usize,
}

impl Default for GammaOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-14,
            max_terms: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaMoment {
    pub order: u32,
    pub value: f64,
    /// Index of the last series term used.
    pub terms: usize,
}

const CONFIRMATIONS: usize = 3;

fn check_inputs(q: &DMatrix<f64>, f: &[f64], pi0: &[f64], x: f64, order: u32) -> Result<(), QbdError> {
    let n = q.nrows();
    if q.ncols() != n {
        return Err(QbdError::DimensionMismatch {
            expected: n,
            got: q.ncols(),
        });
    }
    for len in [f.len(), pi0.len()] {
        if len != n {
            return Err(QbdError::DimensionMismatch { expected: n, got: len });
        }
    }
    if !(x.is_finite() && x > 0.0) {
        return Err(QbdError::InvalidArgument(format!("x must be > 0 (got {x})")));
    }
    if order < 1 {
        return Err(QbdError::InvalidArgument("moment order r must be >= 1".into()));
    }
    if let Some(idx) = f.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(QbdError::NonInvertibleReward(idx));
    }
    let mass: f64 = pi0.iter().sum();
    if pi0.iter().any(|&p| p < 0.0 || p.is_nan()) || (mass - 1.0).abs() > 1e-9 {
        return Err(QbdError::InvalidArgument(
            "initial distribution must be a probability vector".into(),
        ));
    }
    Ok(())
}

/// Sparse rows `(column, value)` of the uniformized transition matrix.
fn uniformize(q: &DMatrix<f64>, f: &[f64]) -> (Vec<Vec<(usize, f64)>>, f64) {
    let n = q.nrows();
    let rate = (0..n)
        .map(|i| -q[(i, i)] / f[i])
        .fold(0.0f64, f64::max);
    let c = if rate > 0.0 { rate } else { 1.0 };
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .filter_map(|j| {
                    let g = q[(i, j)] / f[i] / c;
                    let v = if i == j { 1.0 + g } else { g };
                    (v != 0.0).then_some((j, v))
                })
                .collect()
        })
        .collect();
    (rows, c)
}

fn sparse_mul(rows: &[Vec<(usize, f64)>], v: &[f64], out: &mut [f64]) {
    for (o, row) in out.iter_mut().zip(rows) {
        *o = row.iter().map(|&(j, p)| p * v[j]).sum();
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `E[Gamma(x)^r]` for `r = 1..=max_order`, by the uniformized series.
///
/// `q` is the generator, `f` the (strictly positive) reward vector and
/// `pi0` the initial distribution.
pub fn gamma_moments(
    q: &DMatrix<f64>,
    f: &[f64],
    pi0: &[f64],
    x: f64,
    max_order: u32,
    opts: &GammaOptions,
) -> Result<Vec<GammaMoment>, QbdError> {
    check_inputs(q, f, pi0, x, max_order)?;
    let n = q.nrows();
    let orders = max_order as usize;
    let (p, c) = uniformize(q, f);
    let inv_f: Vec<f64> = f.iter().map(|v| 1.0 / v).collect();

    let mut y: Vec<Vec<f64>> = vec![vec![0.0; n]; orders + 1];
    y[0].fill(1.0);
    let mut scratch = vec![0.0; n];
    let mut sums = vec![0.0; orders + 1];
    let mut streak = vec![0usize; orders + 1];
    let mut last_term = 0.0;

    let mean = c * x;
    let ln_mean = mean.ln();
    let mut ln_weight = -mean;

    for k in 1..=opts.max_terms {
        for r in (1..=orders).rev() {
            sparse_mul(&p, &y[r], &mut scratch);
            let scale = r as f64 / c;
            let (lower, upper) = y.split_at_mut(r);
            let prev = &lower[r - 1];
            for ((out, s), (d, yl)) in upper[0].iter_mut().zip(&scratch).zip(inv_f.iter().zip(prev)) {
                *out = s + scale * d * yl;
            }
        }
        ln_weight += ln_mean - (k as f64).ln();
        let weight = ln_weight.exp();
        let past_mode = k as f64 > mean;
        for r in 1..=orders {
            let term = weight * dot(pi0, &y[r]);
            sums[r] += term;
            if past_mode && term.abs() <= opts.tolerance * sums[r].abs() {
                streak[r] += 1;
            } else {
                streak[r] = 0;
            }
            if r == orders {
                last_term = term;
            }
        }
        if streak[1..].iter().all(|&s| s >= CONFIRMATIONS) {
            return Ok((1..=orders)
                .map(|r| GammaMoment {
                    order: r as u32,
                    value: sums[r],
                    terms: k,
                })
                .collect());
        }
    }
    Err(QbdError::NotConverged {
        partial: sums[orders],
        terms: opts.max_terms,
        last_term,
    })
}

/// `E[Gamma(x)^r]` by the uniformized series.
pub fn gamma_moment(
    q: &DMatrix<f64>,
    f: &[f64],
    pi0: &[f64],
    x: f64,
    r: u32,
    opts: &GammaOptions,
) -> Result<GammaMoment, QbdError> {
    let mut all = gamma_moments(q, f, pi0, x, r, opts)?;
    Ok(all.pop().expect("r >= 1"))
}

/// `E[Gamma(x)^r]` from the Taylor series in `M(r,k)`, carried as the
/// vectors `x^k / k! M(r,k) f`. Accurate only while `x * ||Q D||` is small.
pub fn gamma_moment_taylor(
    q: &DMatrix<f64>,
    f: &[f64],
    pi0: &[f64],
    x: f64,
    r: u32,
    opts: &GammaOptions,
) -> Result<GammaMoment, QbdError> {
    check_inputs(q, f, pi0, x, r)?;
    let n = q.nrows();
    let orders = r as usize;
    let inv_f: Vec<f64> = f.iter().map(|v| 1.0 / v).collect();
    let weights: Vec<f64> = pi0.iter().zip(&inv_f).map(|(p, d)| p * d).collect();
    let sign = if orders.is_multiple_of(2) { 1.0 } else { -1.0 };

    let mut v: Vec<Vec<f64>> = vec![vec![0.0; n]; orders + 1];
    v[0].copy_from_slice(f);
    let mut scaled = vec![0.0; n];
    let mut sum = 0.0;
    let mut streak = 0;
    let mut term = 0.0;

    for k in 1..=opts.max_terms {
        let step = x / k as f64;
        for s in (0..=orders).rev() {
            for (out, (vi, d)) in scaled.iter_mut().zip(v[s].iter().zip(&inv_f)) {
                *out = vi * d;
            }
            let b_v = q * nalgebra::DVector::from_column_slice(&scaled);
            for i in 0..n {
                let lower = if s > 0 { s as f64 * inv_f[i] * v[s - 1][i] } else { 0.0 };
                v[s][i] = step * (b_v[i] - lower);
            }
        }
        term = sign * dot(&weights, &v[orders]);
        sum += term;
        if k > orders && term.abs() <= opts.tolerance * sum.abs() {
            streak += 1;
            if streak >= CONFIRMATIONS {
                return Ok(GammaMoment {
                    order: r,
                    value: sum,
                    terms: k,
                });
            }
        } else {
            streak = 0;
        }
    }
    Err(QbdError::NotConverged {
        partial: sum,
        terms: opts.max_terms,
        last_term: term,
    })
}

/// The matrix `M(r,k)` built from its recursion.
pub fn series_matrix(q: &DMatrix<f64>, f: &[f64], r: usize, k: usize) -> Result<DMatrix<f64>, QbdError> {
    let n = q.nrows();
    if f.len() != n {
        return Err(QbdError::DimensionMismatch {
            expected: n,
            got: f.len(),
        });
    }
    if let Some(idx) = f.iter().position(|&v| v == 0.0) {
        return Err(QbdError::NonInvertibleReward(idx));
    }
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, f.iter().map(|v| 1.0 / v)));
    let b = q * &d;
    // column over r for the current k
    let mut col: Vec<DMatrix<f64>> = (0..=r)
        .map(|s| if s == 0 { DMatrix::identity(n, n) } else { DMatrix::zeros(n, n) })
        .collect();
    for _ in 0..k {
        let mut next = Vec::with_capacity(r + 1);
        for s in 0..=r {
            let mut m = &b * &col[s];
            if s > 0 {
                m -= (s as f64) * (&d * &col[s - 1]);
            }
            next.push(m);
        }
        col = next;
    }
    Ok(col.swap_remove(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(c: f64) -> (DMatrix<f64>, Vec<f64>, Vec<f64>) {
        (DMatrix::zeros(1, 1), vec![c], vec![1.0])
    }

    #[test]
    fn single_state_is_exact() {
        let opts = GammaOptions::default();
        for (c, x) in [(2.0, 3.0), (0.5, 10.0), (7.0, 0.1)] {
            let (q, f, pi0) = single(c);
            for r in 1..=2u32 {
                let exact = (x / c).powi(r as i32);
                let t = gamma_moment_taylor(&q, &f, &pi0, x, r, &opts).unwrap().value;
                assert!((t - exact).abs() <= 4.0 * f64::EPSILON * exact, "taylor r={r}: {t} vs {exact}");
                let u = gamma_moment(&q, &f, &pi0, x, r, &opts).unwrap().value;
                assert!((u - exact).abs() <= 1e-13 * exact, "uniformized r={r}: {u} vs {exact}");
            }
        }
    }

    #[test]
    fn recursion_base_cases() {
        let q = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 2.0, -2.0]);
        let f = [2.0, 4.0];
        let id = DMatrix::<f64>::identity(2, 2);
        assert_eq!(series_matrix(&q, &f, 0, 0).unwrap(), id);
        for r in 1..4 {
            assert_eq!(series_matrix(&q, &f, r, 0).unwrap(), DMatrix::zeros(2, 2));
        }
        let d = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.25]);
        assert_eq!(series_matrix(&q, &f, 1, 1).unwrap(), -&d);
        let b = &q * &d;
        let m03 = series_matrix(&q, &f, 0, 3).unwrap();
        assert!((m03 - &b * &b * &b).abs().max() < 1e-15);
        // M(r,k) = 0 for r > k: [(Q - sI) D]^k is a degree-k polynomial in s
        assert_eq!(series_matrix(&q, &f, 3, 2).unwrap(), DMatrix::zeros(2, 2));
    }

    /// `E_i[Gamma(x)]` of a two-state chain by RK4 on the backward equation.
    fn two_state_mean_by_ode(alpha: f64, beta: f64, fa: f64, fb: f64, x: f64) -> [f64; 2] {
        // h_i(x) = E_i[Gamma(x)] solves h' = D (e + Q h), h(0) = 0
        let steps = 200_000;
        let dx = x / steps as f64;
        let mut h = [0.0f64; 2];
        let deriv = |h: [f64; 2]| -> [f64; 2] {
            [
                (1.0 + alpha * (h[1] - h[0])) / fa,
                (1.0 + beta * (h[0] - h[1])) / fb,
            ]
        };
        for _ in 0..steps {
            let k1 = deriv(h);
            let k2 = deriv([h[0] + 0.5 * dx * k1[0], h[1] + 0.5 * dx * k1[1]]);
            let k3 = deriv([h[0] + 0.5 * dx * k2[0], h[1] + 0.5 * dx * k2[1]]);
            let k4 = deriv([h[0] + dx * k3[0], h[1] + dx * k3[1]]);
            for i in 0..2 {
                h[i] += dx / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        h
    }

    #[test]
    fn two_state_mean_matches_backward_equation() {
        let (alpha, beta, fa, fb) = (1.5, 0.5, 1.0, 4.0);
        let q = DMatrix::from_row_slice(2, 2, &[-alpha, alpha, beta, -beta]);
        let f = [fa, fb];
        let opts = GammaOptions::default();
        for x in [0.5, 2.0, 8.0] {
            let h = two_state_mean_by_ode(alpha, beta, fa, fb, x);
            for (i, pi0) in [[1.0, 0.0], [0.0, 1.0]].iter().enumerate() {
                let u = gamma_moment(&q, &f, pi0, x, 1, &opts).unwrap().value;
                let t = gamma_moment_taylor(&q, &f, pi0, x, 1, &opts).unwrap().value;
                assert!((u - h[i]).abs() < 1e-9, "x={x} i={i}: {u} vs {}", h[i]);
                assert!((t - h[i]).abs() < 1e-9, "x={x} i={i}: {t} vs {}", h[i]);
            }
        }
    }

    #[test]
    fn routes_agree_on_second_moment() {
        let q = DMatrix::from_row_slice(3, 3, &[-2.0, 1.5, 0.5, 1.0, -3.0, 2.0, 0.2, 0.8, -1.0]);
        let f = [1.0, 2.5, 0.7];
        let pi0 = [0.2, 0.5, 0.3];
        let opts = GammaOptions::default();
        for x in [0.3, 1.0, 4.0] {
            let u = gamma_moment(&q, &f, &pi0, x, 2, &opts).unwrap().value;
            let t = gamma_moment_taylor(&q, &f, &pi0, x, 2, &opts).unwrap().value;
            assert!((u - t).abs() <= 1e-10 * u, "x={x}: {u} vs {t}");
            let mean = gamma_moment(&q, &f, &pi0, x, 1, &opts).unwrap().value;
            assert!(u >= mean * mean);
        }
    }

    #[test]
    fn input_errors() {
        let (q, f, pi0) = single(1.0);
        let opts = GammaOptions::default();
        assert!(matches!(gamma_moment(&q, &f, &pi0, 0.0, 1, &opts), Err(QbdError::InvalidArgument(_))));
        assert!(matches!(gamma_moment(&q, &f, &pi0, 1.0, 0, &opts), Err(QbdError::InvalidArgument(_))));
        assert!(matches!(
            gamma_moment(&q, &[0.0], &pi0, 1.0, 1, &opts),
            Err(QbdError::NonInvertibleReward(0))
        ));
        assert!(matches!(
            gamma_moment(&q, &f, &[0.5], 1.0, 1, &opts),
            Err(QbdError::InvalidArgument(_))
        ));
        let tight = GammaOptions {
            tolerance: 1e-14,
            max_terms: 5,
        };
        assert!(matches!(
            gamma_moment(&q, &f, &pi0, 100.0, 1, &tight),
            Err(QbdError::NotConverged { terms: 5, .. })
        ));
    }
}

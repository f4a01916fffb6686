//! Across-replication confidence intervals.

use statrs::distribution::{ContinuousCDF, StudentsT};

/// Sample mean with a two-sided Student-t interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub mean: f64,
    pub half_width: f64,
}

impl Interval {
    pub fn low(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn high(&self) -> f64 {
        self.mean + self.half_width
    }

    pub fn contains(&self, value: f64) -> bool {
        self.low() <= value && value <= self.high()
    }
}

/// Two-sided Student-t quantile `t_{1 - alpha/2, df}`.
pub fn student_t_quantile(confidence: f64, df: usize) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1");
    dist.inverse_cdf(0.5 + confidence / 2.0)
}

/// Mean and `confidence`-level interval. Needs at least 2 samples; with
/// fewer the half width is NaN.
pub fn confidence_interval(samples: &[f64], confidence: f64) -> Interval {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return Interval {
            mean,
            half_width: f64::NAN,
        };
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let half_width = student_t_quantile(confidence, n - 1) * (var / n as f64).sqrt();
    Interval { mean, half_width }
}

use rand::Rng;
use rand_distr::{Distribution, Exp};

/// Nonnegative distribution used for interarrival, service and patience
/// times.
///
/// Erlang `rate` is the per-phase rate, so the mean is `shape / rate`.
/// The two-phase hyperexponential draws from `rate1` with probability `p`
/// and from `rate2` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ServiceDistribution {
    Exponential { rate: f64 },
    Deterministic { value: f64 },
    Erlang { shape: u32, rate: f64 },
    HyperExponential2 { rate1: f64, rate2: f64, p: f64 },
}

impl ServiceDistribution {
    pub fn exponential(rate: f64) -> Self {
        Self::Exponential { rate }
    }

    pub fn deterministic(value: f64) -> Self {
        Self::Deterministic { value }
    }

    pub fn erlang(shape: u32, rate: f64) -> Self {
        Self::Erlang { shape, rate }
    }

    pub fn hyperexponential(rate1: f64, rate2: f64, p: f64) -> Self {
        Self::HyperExponential2 { rate1, rate2, p }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Exponential { .. } => "exponential",
            Self::Deterministic { .. } => "deterministic",
            Self::Erlang { .. } => "erlang",
            Self::HyperExponential2 { .. } => "hyperexponential2",
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::Deterministic { value } => value,
            Self::Erlang { shape, rate } => f64::from(shape) / rate,
            Self::HyperExponential2 { rate1, rate2, p } => p / rate1 + (1.0 - p) / rate2,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Self::Exponential { rate } => 1.0 / (rate * rate),
            Self::Deterministic { .. } => 0.0,
            Self::Erlang { shape, rate } => f64::from(shape) / (rate * rate),
            Self::HyperExponential2 { rate1, rate2, p } => {
                let second = 2.0 * p / (rate1 * rate1) + 2.0 * (1.0 - p) / (rate2 * rate2);
                let mean = self.mean();
                second - mean * mean
            }
        }
    }

    /// Stationary rate, `1 / mean`.
    pub fn rate(&self) -> f64 {
        1.0 / self.mean()
    }

    /// The rate parameter if this is an exponential distribution.
    pub fn exponential_rate(&self) -> Option<f64> {
        match *self {
            Self::Exponential { rate } => Some(rate),
            _ => None,
        }
    }

    /// Same shape, rescaled so that the stationary rate equals `rate`.
    pub fn with_rate(&self, rate: f64) -> Self {
        let factor = rate / self.rate();
        match *self {
            Self::Exponential { .. } => Self::Exponential { rate },
            Self::Deterministic { value } => Self::Deterministic { value: value / factor },
            Self::Erlang { shape, rate: r } => Self::Erlang { shape, rate: r * factor },
            Self::HyperExponential2 { rate1, rate2, p } => Self::HyperExponential2 {
                rate1: rate1 * factor,
                rate2: rate2 * factor,
                p,
            },
        }
    }

    /// Parameter violations, one message per broken constraint.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let positive = |name: &str, v: f64, out: &mut Vec<String>| {
            if !(v.is_finite() && v > 0.0) {
                out.push(format!("{name} must be a positive finite number (got {v})"));
            }
        };
        match *self {
            Self::Exponential { rate } => positive("rate", rate, &mut out),
            Self::Deterministic { value } => positive("value", value, &mut out),
            Self::Erlang { shape, rate } => {
                if shape < 1 {
                    out.push("shape must be at least 1".to_string());
                }
                positive("rate", rate, &mut out);
            }
            Self::HyperExponential2 { rate1, rate2, p } => {
                positive("rate", rate1, &mut out);
                positive("rate2", rate2, &mut out);
                if !(0.0..=1.0).contains(&p) {
                    out.push(format!("p must lie in [0, 1] (got {p})"));
                }
            }
        }
        out
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Exponential { rate } => exp_draw(rate, rng),
            Self::Deterministic { value } => value,
            Self::Erlang { shape, rate } => (0..shape).map(|_| exp_draw(rate, rng)).sum(),
            Self::HyperExponential2 { rate1, rate2, p } => {
                if rng.random::<f64>() < p {
                    exp_draw(rate1, rng)
                } else {
                    exp_draw(rate2, rng)
                }
            }
        }
    }
}

fn exp_draw<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    Exp::new(rate)
        .expect("rate validated before sampling")
        .sample(rng)
}

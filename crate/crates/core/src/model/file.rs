//! Plain-text configuration files.
//!
//! ```text
//! # comment
//! [arrival]
//! kind = exponential          # exponential | deterministic | erlang | hyperexponential2
//! rate = 30
//!
//! [buffer]
//! kind = loss                 # loss | impatient
//! theta = 1.0                 # impatient only
//! residual = restart          # restart | resume (default restart)
//!
//! [group.0]
//! m = 4
//! kind = exponential
//! rate = 5
//! p_work = 1.0
//!
//! [group.1]
//! m = 4
//! kind = exponential
//! rate = 4
//! L = 2
//! K = 3
//! p_work = 1.0
//! p_sleep = 0.2
//! ```
//!
//! Distribution parameters by kind: `exponential` uses `rate`;
//! `deterministic` uses `value`; `erlang` uses `shape` and `rate` (per
//! phase); `hyperexponential2` uses `rate`, `rate2` and `p` (probability of
//! drawing from `rate`). Groups must be numbered `0..=N` without gaps.
//! `L`, `K` and `p_sleep` are not accepted in `[group.0]`. Unknown sections,
//! unknown keys, duplicate keys and parameters unused by the chosen kind are
//! errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{BufferPolicy, GroupSpec, ResidualPolicy, ServiceDistribution, SystemConfig, ThresholdPair};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown section [{section}]")]
    UnknownSection { line: usize, section: String },
    #[error("line {line}: unknown key `{key}` in [{section}]")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("line {line}: duplicate key `{key}` in [{section}]")]
    DuplicateKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("line {line}: duplicate section [{section}]")]
    DuplicateSection { line: usize, section: String },
    #[error("missing key `{key}` in [{section}]")]
    MissingKey { section: String, key: String },
    #[error("missing section [{0}]")]
    MissingSection(String),
    #[error("line {line}: invalid value `{value}` for key `{key}`: {message}")]
    InvalidValue {
        line: usize,
        key: String,
        value: String,
        message: String,
    },
}

const DIST_KEYS: [&str; 6] = ["kind", "rate", "value", "shape", "rate2", "p"];

#[derive(Debug, Default)]
struct Section {
    line: usize,
    entries: BTreeMap<String, (usize, String)>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn require(&mut self, name: &str, key: &str) -> Result<(usize, String), ConfigError> {
        self.take(key).ok_or_else(|| ConfigError::MissingKey {
            section: name.to_string(),
            key: key.to_string(),
        })
    }
}

fn invalid(line: usize, key: &str, value: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        line,
        key: key.to_string(),
        value: value.to_string(),
        message: message.into(),
    }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    value
        .parse::<f64>()
        .map_err(|_| invalid(line, key, value, "expected a number"))
}

fn parse_u32(line: usize, key: &str, value: &str) -> Result<u32, ConfigError> {
    value
        .parse::<u32>()
        .map_err(|_| invalid(line, key, value, "expected a nonnegative integer"))
}

fn allowed_keys(section: &str) -> &'static [&'static str] {
    match section {
        "arrival" => &DIST_KEYS,
        "buffer" => &["kind", "theta", "residual"],
        "group.0" => &["m", "kind", "rate", "value", "shape", "rate2", "p", "p_work"],
        _ => &[
            "m", "kind", "rate", "value", "shape", "rate2", "p", "p_work", "p_sleep", "L", "K",
        ],
    }
}

fn group_index(section: &str) -> Option<usize> {
    let idx = section.strip_prefix("group.")?;
    if idx.is_empty() || (idx.len() > 1 && idx.starts_with('0')) {
        return None;
    }
    idx.parse().ok()
}

fn parse_distribution(name: &str, sec: &mut Section) -> Result<ServiceDistribution, ConfigError> {
    let (kline, kind) = sec.require(name, "kind")?;
    let num = |sec: &mut Section, key: &str| -> Result<f64, ConfigError> {
        let (line, v) = sec.require(name, key)?;
        parse_f64(line, key, &v)
    };
    let dist = match kind.as_str() {
        "exponential" => ServiceDistribution::Exponential {
            rate: num(sec, "rate")?,
        },
        "deterministic" => ServiceDistribution::Deterministic {
            value: num(sec, "value")?,
        },
        "erlang" => {
            let (line, v) = sec.require(name, "shape")?;
            let shape = parse_u32(line, "shape", &v)?;
            ServiceDistribution::Erlang {
                shape,
                rate: num(sec, "rate")?,
            }
        }
        "hyperexponential2" => ServiceDistribution::HyperExponential2 {
            rate1: num(sec, "rate")?,
            rate2: num(sec, "rate2")?,
            p: num(sec, "p")?,
        },
        other => {
            return Err(invalid(
                kline,
                "kind",
                other,
                "expected exponential, deterministic, erlang or hyperexponential2",
            ))
        }
    };
    // any distribution key still present is not used by this kind
    for key in &DIST_KEYS[1..] {
        if let Some((line, v)) = sec.take(key) {
            return Err(invalid(line, key, &v, format!("not used by kind {kind}")));
        }
    }
    Ok(dist)
}

/// Parses a configuration file. Only syntax and shape are checked here;
/// run [`super::validate`] for the model invariants.
pub fn parse_config(text: &str) -> Result<SystemConfig, ConfigError> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::Syntax {
                    line: line_no,
                    message: format!("unterminated section header `{line}`"),
                })?
                .trim()
                .to_string();
            if name != "arrival" && name != "buffer" && group_index(&name).is_none() {
                return Err(ConfigError::UnknownSection {
                    line: line_no,
                    section: name,
                });
            }
            if sections.contains_key(&name) {
                return Err(ConfigError::DuplicateSection {
                    line: line_no,
                    section: name,
                });
            }
            sections.insert(
                name.clone(),
                Section {
                    line: line_no,
                    entries: BTreeMap::new(),
                },
            );
            current = Some(name);
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let Some(section_name) = current.as_ref() else {
            return Err(ConfigError::Syntax {
                line: line_no,
                message: format!("key `{key}` appears before any section header"),
            });
        };
        if !allowed_keys(section_name).contains(&key) {
            return Err(ConfigError::UnknownKey {
                line: line_no,
                section: section_name.clone(),
                key: key.to_string(),
            });
        }
        let section = sections.get_mut(section_name).expect("section registered");
        if section.entries.contains_key(key) {
            return Err(ConfigError::DuplicateKey {
                line: line_no,
                section: section_name.clone(),
                key: key.to_string(),
            });
        }
        section
            .entries
            .insert(key.to_string(), (line_no, value.to_string()));
    }

    let mut take_section = |name: &str| {
        sections
            .remove(name)
            .ok_or_else(|| ConfigError::MissingSection(name.to_string()))
    };

    let mut arrival_sec = take_section("arrival")?;
    let arrival = parse_distribution("arrival", &mut arrival_sec)?;

    let (buffer, residual) = {
        let mut sec = take_section("buffer")?;
        let (kline, kind) = sec.require("buffer", "kind")?;
        let theta = sec.take("theta");
        let buffer = match kind.as_str() {
            "loss" => {
                if let Some((line, v)) = theta {
                    return Err(invalid(line, "theta", &v, "only valid with kind = impatient"));
                }
                BufferPolicy::Loss
            }
            "impatient" => {
                let (line, v) = theta.ok_or_else(|| ConfigError::MissingKey {
                    section: "buffer".into(),
                    key: "theta".into(),
                })?;
                BufferPolicy::InfiniteWithImpatience {
                    theta: parse_f64(line, "theta", &v)?,
                }
            }
            other => return Err(invalid(kline, "kind", other, "expected loss or impatient")),
        };
        let residual = match sec.take("residual") {
            None => ResidualPolicy::Restart,
            Some((_, v)) if v == "restart" => ResidualPolicy::Restart,
            Some((_, v)) if v == "resume" => ResidualPolicy::Resume,
            Some((line, v)) => return Err(invalid(line, "residual", &v, "expected restart or resume")),
        };
        (buffer, residual)
    };

    let mut groups = Vec::new();
    for j in 0.. {
        let name = format!("group.{j}");
        let Some(mut sec) = sections.remove(&name) else {
            break;
        };
        let (line, v) = sec.require(&name, "m")?;
        let size = parse_u32(line, "m", &v)?;
        let (line, v) = sec.require(&name, "p_work")?;
        let power_work = parse_f64(line, "p_work", &v)?;
        let service = parse_distribution(&name, &mut sec)?;
        let group = if j == 0 {
            GroupSpec::base(size, service, power_work)
        } else {
            let (line, v) = sec.require(&name, "L")?;
            let sleep_below = parse_u32(line, "L", &v)?;
            let (line, v) = sec.require(&name, "K")?;
            let wake_at = parse_u32(line, "K", &v)?;
            let (line, v) = sec.require(&name, "p_sleep")?;
            let power_sleep = parse_f64(line, "p_sleep", &v)?;
            GroupSpec::switchable(
                size,
                service,
                ThresholdPair::new(sleep_below, wake_at),
                power_work,
                power_sleep,
            )
        };
        groups.push(group);
    }
    if groups.is_empty() {
        return Err(ConfigError::MissingSection("group.0".into()));
    }
    if let Some((name, sec)) = sections.into_iter().next() {
        return Err(ConfigError::Syntax {
            line: sec.line,
            message: format!("section [{name}] is out of sequence (groups must be numbered 0..=N)"),
        });
    }

    Ok(SystemConfig {
        groups,
        arrival,
        buffer,
        residual,
    })
}

fn render_distribution(out: &mut String, dist: &ServiceDistribution) {
    let _ = writeln!(out, "kind = {}", dist.kind_name());
    match *dist {
        ServiceDistribution::Exponential { rate } => {
            let _ = writeln!(out, "rate = {rate}");
        }
        ServiceDistribution::Deterministic { value } => {
            let _ = writeln!(out, "value = {value}");
        }
        ServiceDistribution::Erlang { shape, rate } => {
            let _ = writeln!(out, "shape = {shape}\nrate = {rate}");
        }
        ServiceDistribution::HyperExponential2 { rate1, rate2, p } => {
            let _ = writeln!(out, "rate = {rate1}\nrate2 = {rate2}\np = {p}");
        }
    }
}

/// Renders `config` in the file grammar. `parse_config(render_config(c))`
/// reproduces `c` exactly.
pub fn render_config(config: &SystemConfig) -> String {
    let mut out = String::new();
    out.push_str("[arrival]\n");
    render_distribution(&mut out, &config.arrival);

    out.push_str("\n[buffer]\n");
    match config.buffer {
        BufferPolicy::Loss => out.push_str("kind = loss\n"),
        BufferPolicy::InfiniteWithImpatience { theta } => {
            let _ = writeln!(out, "kind = impatient\ntheta = {theta}");
        }
    }
    let residual = match config.residual {
        ResidualPolicy::Restart => "restart",
        ResidualPolicy::Resume => "resume",
    };
    let _ = writeln!(out, "residual = {residual}");

    for (j, g) in config.groups.iter().enumerate() {
        let _ = writeln!(out, "\n[group.{j}]\nm = {}", g.size);
        render_distribution(&mut out, &g.service);
        let _ = writeln!(out, "p_work = {}", g.power_work);
        if j > 0 {
            let _ = writeln!(
                out,
                "L = {}\nK = {}\np_sleep = {}",
                g.thresholds.sleep_below, g.thresholds.wake_at, g.power_sleep
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SAMPLE: &str = "\
# three groups
[arrival]
kind = exponential
rate = 30

[buffer]
kind = impatient
theta = 1.0
residual = resume

[group.0]
m = 4
kind = exponential
rate = 5
p_work = 1.0

[group.1]
m = 4
kind = erlang
shape = 2
rate = 8
L = 2
K = 3
p_work = 1.0
p_sleep = 0.2   # per server
";

    #[test]
    fn parses_sample() {
        let cfg = parse_config(SAMPLE).unwrap();
        assert_eq!(cfg.groups.len(), 2);
        assert_eq!(cfg.arrival, ServiceDistribution::exponential(30.0));
        assert_eq!(cfg.buffer, BufferPolicy::InfiniteWithImpatience { theta: 1.0 });
        assert_eq!(cfg.residual, ResidualPolicy::Resume);
        assert_eq!(cfg.groups[1].service, ServiceDistribution::erlang(2, 8.0));
        assert_eq!(cfg.groups[1].thresholds, ThresholdPair::new(2, 3));
        assert_eq!(cfg.groups[0].thresholds, ThresholdPair::NONE);
    }

    #[test]
    fn unknown_key_is_named() {
        let text = SAMPLE.replace("p_sleep = 0.2", "p_slep = 0.2");
        let err = parse_config(&text).unwrap_err();
        assert!(matches!(&err, ConfigError::UnknownKey { key, .. } if key == "p_slep"));
        assert!(err.to_string().contains("p_slep"));
    }

    #[test]
    fn thresholds_rejected_in_base_group() {
        let text = SAMPLE.replace("rate = 5\n", "rate = 5\nK = 2\n");
        assert!(matches!(
            parse_config(&text),
            Err(ConfigError::UnknownKey { key, .. }) if key == "K"
        ));
    }

    #[test]
    fn missing_and_invalid_values() {
        let text = SAMPLE.replace("L = 2\n", "");
        assert!(matches!(
            parse_config(&text),
            Err(ConfigError::MissingKey { key, .. }) if key == "L"
        ));
        let text = SAMPLE.replace("m = 4\nkind = erlang", "m = four\nkind = erlang");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("`m`"), "{err}");
        let text = SAMPLE.replace("kind = loss", "kind = lossy").replace("kind = impatient", "kind = lossy");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn unused_distribution_parameter() {
        let text = SAMPLE.replace("rate = 30", "rate = 30\nshape = 2");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("shape"), "{err}");
    }

    #[test]
    fn group_numbering_must_be_contiguous() {
        let text = SAMPLE.replace("[group.1]", "[group.2]");
        assert!(matches!(parse_config(&text), Err(ConfigError::Syntax { .. })));
        let text = SAMPLE.replace("[group.1]", "[group.01]");
        assert!(matches!(parse_config(&text), Err(ConfigError::UnknownSection { .. })));
    }

    #[test]
    fn duplicates() {
        let text = SAMPLE.replace("rate = 30", "rate = 30\nrate = 31");
        assert!(matches!(parse_config(&text), Err(ConfigError::DuplicateKey { .. })));
        let text = format!("{SAMPLE}\n[arrival]\n");
        assert!(matches!(parse_config(&text), Err(ConfigError::DuplicateSection { .. })));
    }

    fn dist_strategy() -> impl Strategy<Value = ServiceDistribution> {
        prop_oneof![
            (1e-3f64..1e3).prop_map(ServiceDistribution::exponential),
            (1e-3f64..1e3).prop_map(ServiceDistribution::deterministic),
            (1u32..10, 1e-3f64..1e3).prop_map(|(k, r)| ServiceDistribution::erlang(k, r)),
            (1e-3f64..1e3, 1e-3f64..1e3, 0.0f64..=1.0)
                .prop_map(|(a, b, p)| ServiceDistribution::hyperexponential(a, b, p)),
        ]
    }

    fn config_strategy() -> impl Strategy<Value = SystemConfig> {
        let group = (1u32..20, dist_strategy(), 0.01f64..10.0, 0.0f64..1.0, 0u32..20);
        (
            dist_strategy(),
            prop::option::of(0.0f64..5.0),
            any::<bool>(),
            (1u32..20, dist_strategy(), 0.0f64..10.0),
            prop::collection::vec(group, 1..4),
        )
            .prop_map(|(arrival, theta, resume, base, rest)| {
                let mut groups = vec![GroupSpec::base(base.0, base.1, base.2)];
                for (m, dist, pw, frac, seed) in rest {
                    let k = 1 + seed % m;
                    let l = seed % (k + 1);
                    groups.push(GroupSpec::switchable(
                        m,
                        dist,
                        ThresholdPair::new(l, k),
                        pw,
                        pw * frac.max(1e-3),
                    ));
                }
                SystemConfig {
                    groups,
                    arrival,
                    buffer: theta.map_or(BufferPolicy::Loss, |theta| {
                        BufferPolicy::InfiniteWithImpatience { theta }
                    }),
                    residual: if resume {
                        ResidualPolicy::Resume
                    } else {
                        ResidualPolicy::Restart
                    },
                }
            })
    }

    proptest! {
        #[test]
        fn render_then_parse_is_identity(cfg in config_strategy()) {
            let text = render_config(&cfg);
            prop_assert_eq!(parse_config(&text).unwrap(), cfg);
        }
    }
}

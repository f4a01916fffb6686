use std::fmt::Write as _;

/// Cumulative power consumption of one run as a piecewise-linear curve.
///
/// `breakpoints[i] = (t_i, phi_i, slope_i)`: on `[t_i, t_{i+1})` the
/// curve is `phi_i + slope_i * (t - t_i)`. The last breakpoint is the end
/// of the run.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTrajectory {
    breakpoints: Vec<(f64, f64, f64)>,
}

impl PowerTrajectory {
    pub(crate) fn start(rate: f64) -> Self {
        Self {
            breakpoints: vec![(0.0, 0.0, rate)],
        }
    }

    /// Records that the slope becomes `rate` at `time`.
    pub(crate) fn set_rate(&mut self, time: f64, rate: f64) {
        let &(t0, phi0, slope0) = self.breakpoints.last().expect("nonempty");
        if slope0 == rate {
            return;
        }
        let phi = phi0 + slope0 * (time - t0);
        if time == t0 {
            self.breakpoints.pop();
        }
        self.breakpoints.push((time, phi, rate));
    }

    pub(crate) fn finish(&mut self, time: f64) {
        let &(t0, phi0, slope0) = self.breakpoints.last().expect("nonempty");
        if time > t0 {
            self.breakpoints.push((time, phi0 + slope0 * (time - t0), slope0));
        }
    }

    pub fn breakpoints(&self) -> &[(f64, f64, f64)] {
        &self.breakpoints
    }

    pub fn end_time(&self) -> f64 {
        self.breakpoints.last().map_or(0.0, |b| b.0)
    }

    /// `Phi(t)`, clamped to the recorded span.
    pub fn value_at(&self, t: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|b| b.0 <= t);
        if idx == 0 {
            return 0.0;
        }
        let (t0, phi0, slope) = self.breakpoints[idx - 1];
        let t = t.min(self.end_time());
        phi0 + slope * (t - t0)
    }

    /// First time `Phi` reaches `x`, if it does within the run.
    pub fn first_passage(&self, x: f64) -> Option<f64> {
        if x <= 0.0 {
            return Some(0.0);
        }
        let idx = self.breakpoints.partition_point(|b| b.1 < x);
        if idx == 0 {
            return Some(0.0);
        }
        let (t0, phi0, slope) = self.breakpoints[idx - 1];
        if slope <= 0.0 {
            return self.breakpoints.get(idx).map(|b| b.0);
        }
        let t = t0 + (x - phi0) / slope;
        if t <= self.end_time() {
            Some(t)
        } else {
            None
        }
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.breakpoints.windows(2).all(|w| w[1].1 >= w[0].1) && self.breakpoints[0].1 == 0.0
    }

    /// `Phi(T) / T` over the whole run.
    pub fn average_rate(&self) -> f64 {
        let &(t, phi, _) = self.breakpoints.last().expect("nonempty");
        if t > 0.0 {
            phi / t
        } else {
            self.breakpoints[0].2
        }
    }
}

/// One line of the optional event trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub time: f64,
    pub event_kind: &'static str,
    /// Group involved in the event; absent for lost arrivals and buffer events.
    pub group: Option<usize>,
    pub system_count: usize,
    pub buffer_count: usize,
    pub power_rate: f64,
}

pub fn trace_to_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from("time,event_kind,group,system_count,buffer_count,power_rate\n");
    for r in rows {
        let group = r.group.map(|g| g.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.time, r.event_kind, group, r.system_count, r.buffer_count, r.power_rate
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PowerTrajectory {
        let mut p = PowerTrajectory::start(2.0);
        p.set_rate(1.0, 4.0);
        p.set_rate(1.0, 5.0);
        p.set_rate(3.0, 5.0);
        p.set_rate(4.0, 1.0);
        p.finish(10.0);
        p
    }

    #[test]
    fn piecewise_values() {
        let p = sample();
        assert_eq!(p.value_at(0.0), 0.0);
        assert_eq!(p.value_at(0.5), 1.0);
        assert_eq!(p.value_at(2.0), 7.0);
        assert_eq!(p.value_at(4.0), 17.0);
        assert_eq!(p.value_at(10.0), 23.0);
        assert_eq!(p.breakpoints().len(), 4);
        assert!(p.is_nondecreasing());
        assert!((p.average_rate() - 2.3).abs() < 1e-15);
    }

    #[test]
    fn first_passage_inverts_phi() {
        let p = sample();
        for x in [0.5, 2.0, 7.0, 12.0, 17.0, 20.0, 23.0] {
            let t = p.first_passage(x).unwrap();
            assert!((p.value_at(t) - x).abs() < 1e-12, "x={x}");
        }
        assert_eq!(p.first_passage(23.5), None);
    }

    #[test]
    fn trace_csv_columns() {
        let rows = vec![TraceRow {
            time: 0.25,
            event_kind: "arrival",
            group: None,
            system_count: 0,
            buffer_count: 0,
            power_rate: 1.5,
        }];
        assert_eq!(
            trace_to_csv(&rows),
            "time,event_kind,group,system_count,buffer_count,power_rate\n0.25,arrival,,0,0,1.5\n"
        );
    }
}

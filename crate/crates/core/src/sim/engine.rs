use std::collections::{HashMap, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::event::{CustomerId, EventKind, EventQueue};
use super::trajectory::{PowerTrajectory, TraceRow};
use super::{RunOptions, RunOutcome, RunStats, SimError};
use crate::model::{validate, BufferPolicy, ResidualPolicy, SystemConfig};

/// Power state shared by every server of a group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupMode {
    WorkOn,
    Sleep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Location {
    Group(usize),
    Buffer,
}

#[derive(Debug, Clone)]
struct Customer {
    arrival_time: f64,
    /// Service requirement of the current attempt (Restart) or of the
    /// whole job (Resume).
    requirement: Option<f64>,
    accrued: f64,
    /// Total time spent in service over all attempts.
    in_service_total: f64,
    service_start: Option<f64>,
    patience_deadline: Option<f64>,
    epoch: u32,
    location: Location,
}

#[derive(Debug, Clone)]
struct GroupState {
    mode: GroupMode,
    /// Customers in service (work-on) or held at the servers (sleep).
    members: Vec<CustomerId>,
}

/// One random stream each for arrivals, patience and every group's services.
struct Streams {
    arrivals: ChaCha8Rng,
    patience: ChaCha8Rng,
    services: Vec<ChaCha8Rng>,
}

impl Streams {
    fn new(seed: u64, groups: usize) -> Self {
        let stream = |k: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            rng
        };
        Self {
            arrivals: stream(0),
            patience: stream(1),
            services: (0..groups as u64).map(|j| stream(2 + j)).collect(),
        }
    }
}

#[derive(Debug, Default)]
struct Accumulators {
    system: f64,
    groups: Vec<f64>,
    buffer: f64,
    held: f64,
    power: f64,
}

#[derive(Debug, Default, Clone, Copy)]
struct Counters {
    arrivals: u64,
    losses: u64,
    completions: u64,
    abandonments: u64,
    sojourn_sum: f64,
    service_sum: f64,
    departed_time_sum: f64,
}

struct Engine<'a> {
    cfg: &'a SystemConfig,
    opts: &'a RunOptions,
    loss: bool,
    theta: f64,
    now: f64,
    last: f64,
    queue: EventQueue,
    customers: HashMap<CustomerId, Customer>,
    next_id: CustomerId,
    groups: Vec<GroupState>,
    buffer: VecDeque<CustomerId>,
    streams: Streams,
    acc: Accumulators,
    window: Counters,
    total: Counters,
    events: u64,
    power_rate: f64,
    power: Option<PowerTrajectory>,
    trace: Option<Vec<TraceRow>>,
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a SystemConfig, opts: &'a RunOptions) -> Self {
        let groups = cfg
            .groups
            .iter()
            .enumerate()
            .map(|(j, _)| GroupState {
                mode: if j == 0 { GroupMode::WorkOn } else { GroupMode::Sleep },
                members: Vec::new(),
            })
            .collect();
        let theta = match cfg.buffer {
            BufferPolicy::Loss => 0.0,
            BufferPolicy::InfiniteWithImpatience { theta } => theta,
        };
        let power_rate = cfg.idle_power_rate();
        Self {
            cfg,
            opts,
            loss: cfg.is_loss(),
            theta,
            now: 0.0,
            last: 0.0,
            queue: EventQueue::new(),
            customers: HashMap::new(),
            next_id: 0,
            groups,
            buffer: VecDeque::new(),
            streams: Streams::new(opts.seed, cfg.groups.len()),
            acc: Accumulators {
                groups: vec![0.0; cfg.groups.len()],
                ..Default::default()
            },
            window: Counters::default(),
            total: Counters::default(),
            events: 0,
            power_rate,
            power: opts.record_power.then(|| PowerTrajectory::start(power_rate)),
            trace: opts.record_trace.then(Vec::new),
        }
    }

    fn in_window(&self) -> bool {
        self.now >= self.opts.warmup
    }

    fn size(&self, j: usize) -> usize {
        self.cfg.groups[j].size as usize
    }

    fn sleep_threshold(&self, j: usize) -> usize {
        // an empty switchable group always sleeps, so L = 0 means "sleep when empty"
        (self.cfg.groups[j].thresholds.sleep_below as usize).max(1)
    }

    fn wake_threshold(&self, j: usize) -> usize {
        self.cfg.groups[j].thresholds.wake_at as usize
    }

    fn held_count(&self) -> usize {
        self.groups
            .iter()
            .filter(|g| g.mode == GroupMode::Sleep)
            .map(|g| g.members.len())
            .sum()
    }

    fn current_power_rate(&self) -> f64 {
        self.cfg
            .groups
            .iter()
            .zip(&self.groups)
            .map(|(spec, st)| {
                let per = match st.mode {
                    GroupMode::WorkOn => spec.power_work,
                    GroupMode::Sleep => spec.power_sleep,
                };
                f64::from(spec.size) * per
            })
            .sum()
    }

    /// Integrates time-average quantities up to `t`, clipped to the
    /// observation window.
    fn advance(&mut self, t: f64) {
        let a = self.last.max(self.opts.warmup);
        let b = t.min(self.opts.horizon);
        if b > a {
            let dt = b - a;
            self.acc.system += dt * self.customers.len() as f64;
            for (acc, g) in self.acc.groups.iter_mut().zip(&self.groups) {
                *acc += dt * g.members.len() as f64;
            }
            self.acc.buffer += dt * self.buffer.len() as f64;
            self.acc.held += dt * self.held_count() as f64;
            self.acc.power += dt * self.power_rate;
        }
        self.last = t;
    }

    fn schedule_arrival(&mut self) {
        let gap = self.cfg.arrival.sample(&mut self.streams.arrivals);
        self.queue.schedule(self.now + gap, EventKind::Arrival);
    }

    fn start_service(&mut self, id: CustomerId, j: usize) {
        let resample = match self.cfg.residual {
            ResidualPolicy::Restart => true,
            ResidualPolicy::Resume => self.customers[&id].requirement.is_none(),
        };
        let fresh = resample.then(|| self.cfg.groups[j].service.sample(&mut self.streams.services[j]));
        let now = self.now;
        let c = self.customers.get_mut(&id).expect("customer present");
        if let Some(req) = fresh {
            c.requirement = Some(req);
            c.accrued = 0.0;
        }
        let remaining = (c.requirement.expect("requirement set") - c.accrued).max(0.0);
        c.epoch += 1;
        c.service_start = Some(now);
        c.location = Location::Group(j);
        let epoch = c.epoch;
        self.queue
            .schedule(now + remaining, EventKind::ServiceCompletion { customer: id, epoch });
    }

    /// Stops service in progress, crediting the elapsed time.
    fn interrupt(&mut self, id: CustomerId) {
        let now = self.now;
        let c = self.customers.get_mut(&id).expect("customer present");
        if let Some(start) = c.service_start.take() {
            let elapsed = now - start;
            c.accrued += elapsed;
            c.in_service_total += elapsed;
            c.epoch += 1;
        }
    }

    fn enter_buffer(&mut self, id: CustomerId) {
        let deadline = (self.theta > 0.0).then(|| {
            let wait = Exp::new(self.theta)
                .expect("theta validated")
                .sample(&mut self.streams.patience);
            self.now + wait
        });
        let c = self.customers.get_mut(&id).expect("customer present");
        c.epoch += 1;
        c.location = Location::Buffer;
        c.patience_deadline = deadline;
        let epoch = c.epoch;
        if let Some(t) = deadline {
            self.queue
                .schedule(t, EventKind::Abandonment { customer: id, epoch });
        }
    }

    fn leave_buffer(&mut self, id: CustomerId) {
        let c = self.customers.get_mut(&id).expect("customer present");
        c.epoch += 1;
        c.patience_deadline = None;
    }

    /// Puts `id` at a server of group `j`: into service if the group is
    /// working, otherwise held until the group wakes.
    fn place(&mut self, id: CustomerId, j: usize) {
        self.groups[j].members.push(id);
        if self.groups[j].mode == GroupMode::WorkOn {
            self.start_service(id, j);
        } else {
            let c = self.customers.get_mut(&id).expect("customer present");
            c.location = Location::Group(j);
        }
    }

    fn record_departure(&mut self, c: &Customer, completed: bool) {
        let time_in_system = self.now - c.arrival_time;
        let window = self.in_window();
        for (counters, on) in [(&mut self.total, true), (&mut self.window, window)] {
            if !on {
                continue;
            }
            counters.departed_time_sum += time_in_system;
            if completed {
                counters.completions += 1;
                counters.sojourn_sum += time_in_system;
                counters.service_sum += c.in_service_total;
            } else {
                counters.abandonments += 1;
            }
        }
    }

    fn on_arrival(&mut self) -> Option<usize> {
        self.schedule_arrival();
        self.total.arrivals += 1;
        if self.in_window() {
            self.window.arrivals += 1;
        }
        let id = self.next_id;
        self.next_id += 1;
        let customer = Customer {
            arrival_time: self.now,
            requirement: None,
            accrued: 0.0,
            in_service_total: 0.0,
            service_start: None,
            patience_deadline: None,
            epoch: 0,
            location: Location::Buffer,
        };

        if self.loss {
            let target = (0..self.groups.len()).find(|&j| self.groups[j].members.len() < self.size(j));
            let Some(j) = target else {
                self.total.losses += 1;
                if self.in_window() {
                    self.window.losses += 1;
                }
                return None;
            };
            self.customers.insert(id, customer);
            self.place(id, j);
            self.settle_loss();
            Some(j)
        } else {
            self.customers.insert(id, customer);
            let target = self.idle_working_group();
            match target {
                Some(j) => self.place(id, j),
                None => {
                    self.buffer.push_back(id);
                    self.enter_buffer(id);
                }
            }
            self.settle_buffer();
            target
        }
    }

    fn on_completion(&mut self, id: CustomerId) -> Option<usize> {
        let mut c = self.customers.remove(&id).expect("validated event");
        let Location::Group(j) = c.location else {
            unreachable!("completion for a customer outside service")
        };
        let members = &mut self.groups[j].members;
        let pos = members.iter().position(|&m| m == id).expect("member of its group");
        members.remove(pos);
        if let Some(start) = c.service_start.take() {
            c.in_service_total += self.now - start;
        }
        self.record_departure(&c, true);
        if self.loss {
            self.settle_loss();
        } else {
            self.settle_buffer();
        }
        Some(j)
    }

    fn on_abandonment(&mut self, id: CustomerId) {
        let c = self.customers.remove(&id).expect("validated event");
        let pos = self.buffer.iter().position(|&b| b == id).expect("waiting in buffer");
        self.buffer.remove(pos);
        self.record_departure(&c, false);
        self.settle_buffer();
    }

    fn is_current(&self, kind: &EventKind) -> bool {
        match *kind {
            EventKind::Arrival => true,
            EventKind::ServiceCompletion { customer, epoch } => self
                .customers
                .get(&customer)
                .is_some_and(|c| c.epoch == epoch && c.service_start.is_some()),
            EventKind::Abandonment { customer, epoch } => self
                .customers
                .get(&customer)
                .is_some_and(|c| c.epoch == epoch && c.location == Location::Buffer),
        }
    }

    /// Sleep rule, then concentrative transfer of held customers, then wake
    /// rule, repeated until nothing changes.
    fn settle_loss(&mut self) {
        let n = self.groups.len();
        loop {
            let mut changed = false;

            for j in 1..n {
                if self.groups[j].mode == GroupMode::WorkOn
                    && self.groups[j].members.len() < self.sleep_threshold(j)
                {
                    self.groups[j].mode = GroupMode::Sleep;
                    for id in self.groups[j].members.clone() {
                        self.interrupt(id);
                    }
                    changed = true;
                }
            }

            loop {
                let holders = (1..n)
                    .rev()
                    .find(|&j| self.groups[j].mode == GroupMode::Sleep && !self.groups[j].members.is_empty());
                let room = (0..n).find(|&j| self.groups[j].members.len() < self.size(j));
                let (Some(from), Some(to)) = (holders, room) else {
                    break;
                };
                if to >= from {
                    break;
                }
                let free = self.size(to) - self.groups[to].members.len();
                let mut moving = std::mem::take(&mut self.groups[from].members);
                moving.sort_unstable();
                let stay = moving.split_off(free.min(moving.len()));
                self.groups[from].members = stay;
                for id in moving {
                    self.place(id, to);
                }
                changed = true;
            }

            for j in 1..n {
                if self.groups[j].mode == GroupMode::Sleep
                    && self.groups[j].members.len() >= self.wake_threshold(j)
                {
                    self.wake_with_members(j);
                    changed = true;
                }
            }

            if !changed {
                break;
            }
        }
    }

    fn wake_with_members(&mut self, j: usize) {
        self.groups[j].mode = GroupMode::WorkOn;
        let mut ids = self.groups[j].members.clone();
        ids.sort_unstable();
        self.groups[j].members = ids.clone();
        for id in ids {
            self.start_service(id, j);
        }
    }

    fn idle_working_group(&self) -> Option<usize> {
        (0..self.groups.len()).find(|&j| {
            self.groups[j].mode == GroupMode::WorkOn && self.groups[j].members.len() < self.size(j)
        })
    }

    fn take_from_buffer_into(&mut self, j: usize) {
        let id = self.buffer.pop_front().expect("nonempty buffer");
        self.leave_buffer(id);
        self.place(id, j);
    }

    /// Sleep rule (occupants go back to the buffer head), then buffer
    /// allocation to idle work-on servers, then wake rule, repeated until
    /// nothing changes.
    fn settle_buffer(&mut self) {
        let n = self.groups.len();
        loop {
            let mut changed = false;

            let mut returned = Vec::new();
            for j in 1..n {
                if self.groups[j].mode == GroupMode::WorkOn
                    && self.groups[j].members.len() < self.sleep_threshold(j)
                {
                    self.groups[j].mode = GroupMode::Sleep;
                    let members = std::mem::take(&mut self.groups[j].members);
                    for id in members {
                        self.interrupt(id);
                        returned.push(id);
                    }
                    changed = true;
                }
            }
            if !returned.is_empty() {
                returned.sort_unstable();
                for &id in returned.iter().rev() {
                    self.buffer.push_front(id);
                }
                for id in returned {
                    self.enter_buffer(id);
                }
            }

            while !self.buffer.is_empty() {
                let Some(j) = self.idle_working_group() else {
                    break;
                };
                self.take_from_buffer_into(j);
                changed = true;
            }

            let mut left_full = true;
            for j in 0..n {
                if j > 0
                    && self.groups[j].mode == GroupMode::Sleep
                    && left_full
                    && self.buffer.len() >= self.wake_threshold(j)
                {
                    self.groups[j].mode = GroupMode::WorkOn;
                    let take = self.buffer.len().min(self.size(j));
                    for _ in 0..take {
                        self.take_from_buffer_into(j);
                    }
                    changed = true;
                }
                left_full &= self.groups[j].mode == GroupMode::WorkOn
                    && self.groups[j].members.len() == self.size(j);
            }

            if !changed {
                break;
            }
        }
    }

    /// Structural invariants of a settled state.
    fn consistent(&self) -> bool {
        let placed: usize = self.groups.iter().map(|g| g.members.len()).sum();
        if placed + self.buffer.len() != self.customers.len() || self.groups[0].mode != GroupMode::WorkOn {
            return false;
        }
        let mut left_full = true;
        for (j, g) in self.groups.iter().enumerate() {
            if g.members.len() > self.size(j) {
                return false;
            }
            let serving = g.mode == GroupMode::WorkOn;
            if g.members.iter().any(|id| self.customers[id].service_start.is_some() != serving) {
                return false;
            }
            if j > 0 {
                let ok = match g.mode {
                    GroupMode::WorkOn => g.members.len() >= self.sleep_threshold(j),
                    GroupMode::Sleep if self.loss => {
                        g.members.len() < self.wake_threshold(j) && (g.members.is_empty() || left_full)
                    }
                    GroupMode::Sleep => {
                        g.members.is_empty() && !(left_full && self.buffer.len() >= self.wake_threshold(j))
                    }
                };
                if !ok {
                    return false;
                }
            }
            left_full &= g.members.len() == self.size(j);
        }
        self.buffer.is_empty() || self.idle_working_group().is_none()
    }

    fn run(mut self) -> RunOutcome {
        self.schedule_arrival();
        while let Some(ev) = self.queue.pop() {
            if ev.time >= self.opts.horizon {
                break;
            }
            if !self.is_current(&ev.kind) {
                continue;
            }
            self.advance(ev.time);
            self.now = ev.time;
            self.events += 1;
            let group = match ev.kind {
                EventKind::Arrival => self.on_arrival(),
                EventKind::ServiceCompletion { customer, .. } => self.on_completion(customer),
                EventKind::Abandonment { customer, .. } => {
                    self.on_abandonment(customer);
                    None
                }
            };
            debug_assert!(self.consistent(), "inconsistent state after {:?} at {}", ev.kind, self.now);
            let rate = self.current_power_rate();
            if rate != self.power_rate {
                self.power_rate = rate;
                if let Some(p) = self.power.as_mut() {
                    p.set_rate(self.now, rate);
                }
            }
            if let Some(trace) = self.trace.as_mut() {
                trace.push(TraceRow {
                    time: self.now,
                    event_kind: ev.kind.label(),
                    group,
                    system_count: self.customers.len(),
                    buffer_count: self.buffer.len(),
                    power_rate: self.power_rate,
                });
            }
        }
        self.advance(self.opts.horizon);
        self.now = self.opts.horizon;
        if let Some(p) = self.power.as_mut() {
            p.finish(self.opts.horizon);
        }
        self.finish()
    }

    fn finish(self) -> RunOutcome {
        let window = self.opts.horizon - self.opts.warmup;
        let avg = |x: f64| x / window;
        let w = self.window;
        let stats = RunStats {
            loss_model: self.loss,
            window,
            mean_system_count: avg(self.acc.system),
            mean_group_count: self.acc.groups.iter().map(|&x| avg(x)).collect(),
            mean_buffer_count: avg(self.acc.buffer),
            mean_held_count: avg(self.acc.held),
            mean_power_rate: avg(self.acc.power),
            arrivals: w.arrivals,
            losses: w.losses,
            completions: w.completions,
            abandonments: w.abandonments,
            sojourn_sum: w.sojourn_sum,
            service_sum: w.service_sum,
            departed_time_sum: w.departed_time_sum,
            total_arrivals: self.total.arrivals,
            total_losses: self.total.losses,
            total_completions: self.total.completions,
            total_abandonments: self.total.abandonments,
            in_system_at_end: self.customers.len() as u64,
            events: self.events,
        };
        RunOutcome {
            stats,
            power: self.power,
            trace: self.trace,
        }
    }
}

fn check_options(opts: &RunOptions) -> Result<(), SimError> {
    if !(opts.horizon.is_finite() && opts.warmup.is_finite()) {
        return Err(SimError::InvalidOptions("horizon and warmup must be finite".into()));
    }
    if !(opts.warmup >= 0.0 && opts.horizon > opts.warmup) {
        return Err(SimError::InvalidOptions(format!(
            "need horizon > warmup >= 0 (horizon {}, warmup {})",
            opts.horizon, opts.warmup
        )));
    }
    Ok(())
}

fn run_checked(config: &SystemConfig, opts: &RunOptions) -> Result<RunOutcome, SimError> {
    let report = validate(config);
    if !report.is_ok() {
        return Err(SimError::InvalidConfig(report));
    }
    check_options(opts)?;
    Ok(Engine::new(config, opts).run())
}

/// One run of the loss queue.
pub fn simulate_loss(config: &SystemConfig, opts: &RunOptions) -> Result<RunOutcome, SimError> {
    if !config.is_loss() {
        return Err(SimError::WrongModel("simulate_loss needs a loss configuration"));
    }
    run_checked(config, opts)
}

/// One run of the infinite-buffer queue with impatient customers.
pub fn simulate_buffer(config: &SystemConfig, opts: &RunOptions) -> Result<RunOutcome, SimError> {
    if config.is_loss() {
        return Err(SimError::WrongModel(
            "simulate_buffer needs an infinite-buffer configuration",
        ));
    }
    run_checked(config, opts)
}

/// One run of whichever model `config` describes.
pub fn simulate(config: &SystemConfig, opts: &RunOptions) -> Result<RunOutcome, SimError> {
    run_checked(config, opts)
}

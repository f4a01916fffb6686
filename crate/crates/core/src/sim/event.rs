use std::cmp::Ordering;
use std::collections::BinaryHeap;

pub type CustomerId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// `epoch` must still match the customer's epoch when the event fires;
    /// otherwise the service was interrupted and the event is stale.
    ServiceCompletion { customer: CustomerId, epoch: u32 },
    Abandonment { customer: CustomerId, epoch: u32 },
    Arrival,
}

impl EventKind {
    /// Simultaneous events fire completions first, then abandonments, then
    /// arrivals.
    pub fn priority_rank(&self) -> u8 {
        match self {
            EventKind::ServiceCompletion { .. } => 0,
            EventKind::Abandonment { .. } => 1,
            EventKind::Arrival => 2,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            EventKind::ServiceCompletion { .. } => "completion",
            EventKind::Abandonment { .. } => "abandonment",
            EventKind::Arrival => "arrival",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EventRecord {
    pub time: f64,
    pub kind: EventKind,
    pub seq: u64,
}

impl EventRecord {
    fn key(&self) -> (f64, u8, u64) {
        (self.time, self.kind.priority_rank(), self.seq)
    }
}

impl PartialEq for EventRecord {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for EventRecord {}

impl PartialOrd for EventRecord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EventRecord {
    /// Total order by (time, priority rank, sequence number).
    fn cmp(&self, other: &Self) -> Ordering {
        let (t1, r1, s1) = self.key();
        let (t2, r2, s2) = other.key();
        t1.total_cmp(&t2).then(r1.cmp(&r2)).then(s1.cmp(&s2))
    }
}

/// Future event list: a min-heap over [`EventRecord`] order.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<std::cmp::Reverse<EventRecord>>,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn schedule(&mut self, time: f64, kind: EventKind) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(std::cmp::Reverse(EventRecord { time, kind, seq }));
    }

    pub fn pop(&mut self) -> Option<EventRecord> {
        self.heap.pop().map(|r| r.0)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

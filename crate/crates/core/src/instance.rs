//! Stations, requests, task vertices and the FIFO pickup queues.
//!
//! Vertex numbering: `0` is the start, pickups are `1..=n`, the delivery of
//! request `i` is `i + n`, and `2n + 1` is the positionless end vertex.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{KinematicsError, RgvParams};
use crate::tolerances::HORIZON_MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "N")]
    North,
    #[serde(rename = "S")]
    South,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Endpoint {
    pub pos: u32,
    pub side: Side,
}

impl Endpoint {
    pub fn new(pos: u32, side: Side) -> Self {
        Endpoint { pos, side }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: usize,
    pub origin: Endpoint,
    pub dest: Endpoint,
    pub q: u32,
    #[serde(default)]
    pub arrival: f64,
    #[serde(default)]
    pub e: f64,
    #[serde(default = "default_late")]
    pub l: f64,
}

fn default_late() -> f64 {
    HORIZON_MAX
}

impl Request {
    pub fn has_deadline(&self) -> bool {
        self.l < HORIZON_MAX
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RequestType {
    T1,
    T2,
    T3,
    T4,
}

impl RequestType {
    pub const ALL: [RequestType; 4] = [RequestType::T1, RequestType::T2, RequestType::T3, RequestType::T4];

    pub fn from_sides(origin: Side, dest: Side) -> Self {
        match (origin, dest) {
            (Side::North, Side::North) => RequestType::T1,
            (Side::South, Side::South) => RequestType::T2,
            (Side::North, Side::South) => RequestType::T3,
            (Side::South, Side::North) => RequestType::T4,
        }
    }

    pub fn sides(self) -> (Side, Side) {
        match self {
            RequestType::T1 => (Side::North, Side::North),
            RequestType::T2 => (Side::South, Side::South),
            RequestType::T3 => (Side::North, Side::South),
            RequestType::T4 => (Side::South, Side::North),
        }
    }
}

pub fn classify(req: &Request) -> RequestType {
    RequestType::from_sides(req.origin.side, req.dest.side)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexKind {
    Start,
    Pickup(usize),
    Delivery(usize),
    End,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("field n = {declared} but {actual} requests are listed")]
    CountMismatch { declared: usize, actual: usize },
    #[error("request at index {index} has id {id}; ids must run 1..n in order")]
    BadId { index: usize, id: usize },
    #[error("request {0}: load must be at least 1")]
    ZeroLoad(usize),
    #[error("request {id}: load {q} exceeds capacity {capacity}")]
    OverCapacity { id: usize, q: u32, capacity: u32 },
    #[error("request {0}: station outside 1..m")]
    BadStation(usize),
    #[error("request {0}: time window has e > l or a non-finite bound")]
    BadWindow(usize),
    #[error("request {0}: negative arrival time")]
    BadArrival(usize),
    #[error("start position {0} outside 1..m")]
    BadStart(u32),
    #[error("unit_length and service_time must be finite, unit_length > 0, service_time >= 0")]
    BadScale,
    #[error("virtual prefix {0} exceeds the request count")]
    BadVirtualPrefix(usize),
    #[error("virtual request {0} must be a same-side request")]
    BadVirtualType(usize),
    #[error(transparent)]
    Rgv(#[from] KinematicsError),
}

/// A static problem instance. Construct directly and call [`Instance::validate`],
/// or deserialize (which validates).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct Instance {
    pub m: u32,
    pub unit_length: f64,
    pub capacity: u32,
    pub start_pos: u32,
    pub rgv: RgvParams,
    pub service_time: f64,
    pub requests: Vec<Request>,
    /// Requests `1..=virtual_prefix` stand for containers already on the deck.
    /// They are picked up at the start position in index order, cost no
    /// service time and belong to no station queue.
    pub virtual_prefix: usize,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    m: u32,
    unit_length: f64,
    #[serde(rename = "Q")]
    capacity: u32,
    start_pos: u32,
    rgv: RgvParams,
    service_time: f64,
    requests: Vec<Request>,
    #[serde(default, skip_serializing_if = "is_zero")]
    virtual_prefix: usize,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

impl TryFrom<InstanceFile> for Instance {
    type Error = InstanceError;

    fn try_from(f: InstanceFile) -> Result<Self, Self::Error> {
        if f.n != f.requests.len() {
            return Err(InstanceError::CountMismatch {
                declared: f.n,
                actual: f.requests.len(),
            });
        }
        let inst = Instance {
            m: f.m,
            unit_length: f.unit_length,
            capacity: f.capacity,
            start_pos: f.start_pos,
            rgv: f.rgv,
            service_time: f.service_time,
            requests: f.requests,
            virtual_prefix: f.virtual_prefix,
        };
        inst.validate()?;
        Ok(inst)
    }
}

impl From<Instance> for InstanceFile {
    fn from(i: Instance) -> Self {
        InstanceFile {
            n: i.requests.len(),
            m: i.m,
            unit_length: i.unit_length,
            capacity: i.capacity,
            start_pos: i.start_pos,
            rgv: i.rgv,
            service_time: i.service_time,
            requests: i.requests,
            virtual_prefix: i.virtual_prefix,
        }
    }
}

impl Instance {
    /// An instance with default vehicle parameters and no requests.
    pub fn empty(m: u32, capacity: u32, start_pos: u32) -> Self {
        Instance {
            m,
            unit_length: 1.0,
            capacity,
            start_pos,
            rgv: RgvParams::default(),
            service_time: 0.5,
            requests: Vec::new(),
            virtual_prefix: 0,
        }
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        self.rgv.validate()?;
        if !(self.unit_length.is_finite() && self.unit_length > 0.0)
            || !(self.service_time.is_finite() && self.service_time >= 0.0)
        {
            return Err(InstanceError::BadScale);
        }
        if self.start_pos < 1 || self.start_pos > self.m {
            return Err(InstanceError::BadStart(self.start_pos));
        }
        if self.virtual_prefix > self.requests.len() {
            return Err(InstanceError::BadVirtualPrefix(self.virtual_prefix));
        }
        for (index, r) in self.requests.iter().enumerate() {
            if r.id != index + 1 {
                return Err(InstanceError::BadId { index, id: r.id });
            }
            if r.q == 0 {
                return Err(InstanceError::ZeroLoad(r.id));
            }
            if r.q > self.capacity {
                return Err(InstanceError::OverCapacity {
                    id: r.id,
                    q: r.q,
                    capacity: self.capacity,
                });
            }
            let on_track = |p: u32| p >= 1 && p <= self.m;
            if !on_track(r.origin.pos) || !on_track(r.dest.pos) {
                return Err(InstanceError::BadStation(r.id));
            }
            if !(r.e.is_finite() && r.l.is_finite() && r.e <= r.l) {
                return Err(InstanceError::BadWindow(r.id));
            }
            if !(r.arrival.is_finite() && r.arrival >= 0.0) {
                return Err(InstanceError::BadArrival(r.id));
            }
            if r.id <= self.virtual_prefix {
                let t = classify(r);
                if !matches!(t, RequestType::T1 | RequestType::T2) {
                    return Err(InstanceError::BadVirtualType(r.id));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.requests.len()
    }

    pub fn end_vertex(&self) -> usize {
        2 * self.n() + 1
    }

    pub fn vertex_count(&self) -> usize {
        2 * self.n() + 2
    }

    /// Request `i`, 1-based.
    pub fn request(&self, i: usize) -> &Request {
        &self.requests[i - 1]
    }

    pub fn request_type(&self, i: usize) -> RequestType {
        classify(self.request(i))
    }

    pub fn is_virtual(&self, i: usize) -> bool {
        i >= 1 && i <= self.virtual_prefix
    }

    pub fn kind(&self, v: usize) -> VertexKind {
        let n = self.n();
        if v == 0 {
            VertexKind::Start
        } else if v <= n {
            VertexKind::Pickup(v)
        } else if v <= 2 * n {
            VertexKind::Delivery(v - n)
        } else {
            VertexKind::End
        }
    }

    /// Request served by a task vertex.
    pub fn request_of(&self, v: usize) -> Option<usize> {
        match self.kind(v) {
            VertexKind::Pickup(i) | VertexKind::Delivery(i) => Some(i),
            _ => None,
        }
    }

    pub fn position(&self, v: usize) -> Option<u32> {
        match self.kind(v) {
            VertexKind::Start => Some(self.start_pos),
            VertexKind::Pickup(i) => Some(self.request(i).origin.pos),
            VertexKind::Delivery(i) => Some(self.request(i).dest.pos),
            VertexKind::End => None,
        }
    }

    /// Service time s_v. Zero for the virtual vertices and for virtual pickups.
    pub fn service(&self, v: usize) -> f64 {
        match self.kind(v) {
            VertexKind::Start | VertexKind::End => 0.0,
            VertexKind::Pickup(i) if self.is_virtual(i) => 0.0,
            _ => self.service_time,
        }
    }

    /// Signed load change q_v.
    pub fn load_delta(&self, v: usize) -> i64 {
        match self.kind(v) {
            VertexKind::Pickup(i) => self.request(i).q as i64,
            VertexKind::Delivery(i) => -(self.request(i).q as i64),
            _ => 0,
        }
    }

    /// Track distance between two vertices; the end vertex is at distance 0 from everything.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        match (self.position(i), self.position(j)) {
            (Some(a), Some(b)) => a.abs_diff(b) as f64 * self.unit_length,
            _ => 0.0,
        }
    }

    pub fn travel_time(&self, i: usize, j: usize) -> f64 {
        self.rgv.travel_time_unchecked(self.distance(i, j))
    }

    /// Energy of traversing arc (i, j) while carrying `load` units.
    pub fn arc_energy(&self, i: usize, j: usize, load: f64) -> f64 {
        self.rgv.energy_coefficient_unchecked(self.distance(i, j)) * (self.rgv.w_rgv + load)
    }

    pub fn has_deadlines(&self) -> bool {
        self.requests.iter().any(Request::has_deadline)
    }

    pub fn queue_relations(&self) -> QueueRelations {
        QueueRelations::new(self)
    }
}

/// FIFO pickup queues: one per (station, side), ordered by arrival then id.
/// Virtual requests belong to no queue.
#[derive(Clone, Debug, PartialEq)]
pub struct QueueRelations {
    succ: Vec<Option<usize>>,
    pred: Vec<Option<usize>>,
    queue_of: Vec<Option<usize>>,
    rank: Vec<usize>,
    queues: Vec<Vec<usize>>,
}

impl QueueRelations {
    pub fn new(inst: &Instance) -> Self {
        let n = inst.n();
        let mut groups: BTreeMap<(u32, Side), Vec<usize>> = BTreeMap::new();
        for r in &inst.requests {
            if inst.is_virtual(r.id) {
                continue;
            }
            groups.entry((r.origin.pos, r.origin.side)).or_default().push(r.id);
        }
        let mut rel = QueueRelations {
            succ: vec![None; n + 1],
            pred: vec![None; n + 1],
            queue_of: vec![None; n + 1],
            rank: vec![0; n + 1],
            queues: Vec::with_capacity(groups.len()),
        };
        for (_, mut ids) in groups {
            ids.sort_by(|&a, &b| {
                let (ra, rb) = (inst.request(a), inst.request(b));
                ra.arrival.total_cmp(&rb.arrival).then(a.cmp(&b))
            });
            let q = rel.queues.len();
            for (k, &id) in ids.iter().enumerate() {
                rel.queue_of[id] = Some(q);
                rel.rank[id] = k;
                if k > 0 {
                    rel.pred[id] = Some(ids[k - 1]);
                    rel.succ[ids[k - 1]] = Some(id);
                }
            }
            rel.queues.push(ids);
        }
        rel
    }

    /// The request queued immediately behind `i`.
    pub fn succ(&self, i: usize) -> Option<usize> {
        self.succ[i]
    }

    pub fn pred(&self, i: usize) -> Option<usize> {
        self.pred[i]
    }

    /// True when `i` is queued somewhere in front of `j`.
    pub fn precedes(&self, i: usize, j: usize) -> bool {
        i != j && self.queue_of[i].is_some() && self.queue_of[i] == self.queue_of[j] && self.rank[i] < self.rank[j]
    }

    pub fn is_head(&self, i: usize) -> bool {
        self.queue_of[i].is_some() && self.pred[i].is_none()
    }

    pub fn is_tail(&self, i: usize) -> bool {
        self.queue_of[i].is_some() && self.succ[i].is_none()
    }

    pub fn in_queue(&self, i: usize) -> bool {
        self.queue_of[i].is_some()
    }

    pub fn queues(&self) -> &[Vec<usize>] {
        &self.queues
    }

    /// Number of requests queued behind `i`.
    pub fn behind(&self, i: usize) -> usize {
        match self.queue_of[i] {
            Some(q) => self.queues[q].len() - 1 - self.rank[i],
            None => 0,
        }
    }
}

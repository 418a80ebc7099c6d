//! Scalar, loop-based reference implementations used as test oracles.
//!
//! Nothing here depends on `forage-core`: every routine works on plain
//! slices and tuples and is written from the model equations directly, so a
//! bug in the engine cannot leak into the expected values.

use std::f64::consts::PI;

/// One agent slot as plain data.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentRecord {
    pub active: bool,
    pub uid: u64,
    pub pos: [f64; 2],
    pub vel: [f64; 2],
    pub energy: f64,
    pub rates: Vec<f64>,
    pub params: Vec<f64>,
}

impl AgentRecord {
    pub fn empty(n_neurons: usize, param_len: usize) -> Self {
        AgentRecord {
            active: false,
            uid: 0,
            pos: [0.0; 2],
            vel: [0.0; 2],
            energy: 0.0,
            rates: vec![0.0; n_neurons],
            params: vec![0.0; param_len],
        }
    }
}

/// Leaky tanh rate update and mean readout, written with explicit indices.
/// Returns `(new_rates, control)`.
pub fn policy_step(
    n: usize,
    obs_dim: usize,
    out_dim: usize,
    params: &[f64],
    rates: &[f64],
    obs: &[f64],
    dt: f64,
) -> (Vec<f64>, Vec<f64>) {
    let off_in = n * n;
    let off_b = off_in + n * obs_dim;
    let off_out = off_b + n;
    let tau = params[off_out + out_dim * n];
    let mut next = vec![0.0; n];
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            acc += params[i * n + j] * rates[j];
        }
        for k in 0..obs_dim {
            acc += params[off_in + i * obs_dim + k] * obs[k];
        }
        acc += params[off_b + i];
        next[i] = rates[i] + dt / tau * (-rates[i] + acc.tanh());
    }
    let mut u = vec![0.0; out_dim];
    for o in 0..out_dim {
        let mut acc = 0.0;
        for i in 0..n {
            acc += params[off_out + o * n + i] * next[i];
        }
        u[o] = acc / n as f64;
    }
    (next, u)
}

/// Periodic minimum-image component by repeated shifting.
pub fn min_image(mut d: f64, l: f64) -> f64 {
    while d > l / 2.0 {
        d -= l;
    }
    while d < -l / 2.0 {
        d += l;
    }
    d
}

pub fn displacement(from: [f64; 2], to: [f64; 2], periodic: Option<[f64; 2]>) -> [f64; 2] {
    let mut d = [to[0] - from[0], to[1] - from[1]];
    if let Some(ext) = periodic {
        d[0] = min_image(d[0], ext[0]);
        d[1] = min_image(d[1], ext[1]);
    }
    d
}

pub fn kernel(d: [f64; 2], gain: f64, scale: f64, cutoff: f64) -> f64 {
    let dist = (d[0] * d[0] + d[1] * d[1]).sqrt();
    if dist <= cutoff {
        gain / (1.0 + (dist / scale).powi(2))
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug)]
pub struct HarvestParams {
    pub epsilon: f64,
    pub alpha: f64,
    pub gain: f64,
    pub scale: f64,
    pub cutoff: f64,
    pub dt: f64,
    /// World extent when the boundary is periodic.
    pub periodic: Option<[f64; 2]>,
}

#[derive(Clone, Debug)]
pub struct HarvestResult {
    pub values: Vec<f64>,
    pub extracted: Vec<f64>,
    pub credit: Vec<f64>,
}

/// Double loop over every (resource, agent) pair with an explicit rate table.
/// `resources` are `(active, pos, s)`, `agents` are `(active, pos)`.
pub fn harvest(resources: &[(bool, [f64; 2], f64)], agents: &[(bool, [f64; 2])], p: &HarvestParams) -> HarvestResult {
    let nr = resources.len();
    let na = agents.len();
    let mut rate = vec![vec![0.0; na]; nr];
    for (n, &(ra, rp, _)) in resources.iter().enumerate() {
        for (m, &(aa, ap)) in agents.iter().enumerate() {
            if ra && aa {
                rate[n][m] = kernel(displacement(rp, ap, p.periodic), p.gain, p.scale, p.cutoff);
            }
        }
    }
    let mut values = vec![0.0; nr];
    let mut extracted = vec![0.0; nr];
    let mut credit = vec![0.0; na];
    for n in 0..nr {
        let (active, _, s) = resources[n];
        if !active {
            continue;
        }
        let demand: f64 = rate[n].iter().sum();
        let available = (s + p.dt * (p.epsilon * s - p.alpha * s * s)).max(0.0);
        let e = (p.dt * demand).min(available);
        values[n] = available - e;
        extracted[n] = e;
        if demand > 0.0 {
            for m in 0..na {
                credit[m] += e * rate[n][m] / demand;
            }
        }
    }
    HarvestResult {
        values,
        extracted,
        credit,
    }
}

/// Ray/segment distance from the implicit line equation of the segment,
/// with the hit point checked by projection onto the segment.
pub fn ray_segment(origin: [f64; 2], dir: [f64; 2], seg: [f64; 4]) -> Option<f64> {
    let (ax, ay, bx, by) = (seg[0], seg[1], seg[2], seg[3]);
    // line: a x + b y = c
    let a = by - ay;
    let b = ax - bx;
    let c = a * ax + b * ay;
    let denom = a * dir[0] + b * dir[1];
    if denom.abs() < 1e-14 {
        return None;
    }
    let t = (c - a * origin[0] - b * origin[1]) / denom;
    if t < 0.0 {
        return None;
    }
    let hx = origin[0] + t * dir[0];
    let hy = origin[1] + t * dir[1];
    let len2 = (bx - ax).powi(2) + (by - ay).powi(2);
    let proj = ((hx - ax) * (bx - ax) + (hy - ay) * (by - ay)) / len2;
    (-1e-12..=1.0 + 1e-12).contains(&proj).then_some(t)
}

/// Minimum over all segments, capped at `max_range`.
pub fn ray_cast(origin: [f64; 2], dir: [f64; 2], segments: &[[f64; 4]], max_range: f64) -> f64 {
    let mut best = max_range;
    for &s in segments {
        if let Some(t) = ray_segment(origin, dir, s) {
            if t < best {
                best = t;
            }
        }
    }
    best
}

pub fn world_faces(extent: [f64; 2]) -> [[f64; 4]; 4] {
    let (w, h) = (extent[0], extent[1]);
    [
        [0.0, 0.0, w, 0.0],
        [w, 0.0, w, h],
        [w, h, 0.0, h],
        [0.0, h, 0.0, 0.0],
    ]
}

#[derive(Clone, Debug)]
pub struct SensorParams {
    pub n_rays: usize,
    pub max_range: f64,
    pub scale: f64,
    pub cutoff: f64,
    pub extent: [f64; 2],
    pub periodic: bool,
    pub walls: Vec<[f64; 4]>,
}

/// Observation row for one agent:
/// rays, signal, gradient (2), velocity (2), energy.
pub fn observe(
    pos: [f64; 2],
    vel: [f64; 2],
    energy: f64,
    resources: &[(bool, [f64; 2], f64)],
    p: &SensorParams,
) -> Vec<f64> {
    let mut segments = p.walls.clone();
    if !p.periodic {
        segments.extend_from_slice(&world_faces(p.extent));
    }
    let speed = (vel[0] * vel[0] + vel[1] * vel[1]).sqrt();
    let base = if speed < 1e-9 { 0.0 } else { vel[1].atan2(vel[0]) };
    let mut row = Vec::new();
    for k in 0..p.n_rays {
        let theta = base + 2.0 * PI * k as f64 / p.n_rays as f64;
        row.push(ray_cast(pos, [theta.cos(), theta.sin()], &segments, p.max_range));
    }
    let periodic = p.periodic.then_some(p.extent);
    let mut signal = 0.0;
    let mut grad = [0.0; 2];
    for &(active, rp, s) in resources {
        if !active {
            continue;
        }
        let d = displacement(rp, pos, periodic);
        let q = kernel(d, 1.0, p.scale, p.cutoff);
        if q == 0.0 {
            continue;
        }
        signal += s * q;
        for axis in 0..2 {
            grad[axis] -= 2.0 * s * q * q * d[axis] / (p.scale * p.scale);
        }
    }
    row.push(signal);
    row.extend_from_slice(&grad);
    row.extend_from_slice(&vel);
    row.push(energy);
    row
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    Reflective,
    Clamped,
}

/// Boundary law for one axis, by repeated single reflections/shifts.
pub fn bound_axis(mut x: f64, mut v: f64, l: f64, mode: Boundary) -> (f64, f64) {
    match mode {
        Boundary::Periodic => {
            while x < 0.0 {
                x += l;
            }
            while x >= l {
                x -= l;
            }
            (x, v)
        }
        Boundary::Reflective => {
            loop {
                if x < 0.0 {
                    x = -x;
                    v = -v;
                } else if x > l {
                    x = 2.0 * l - x;
                    v = -v;
                } else {
                    return (x, v);
                }
            }
        }
        Boundary::Clamped => {
            if x < 0.0 {
                (0.0, 0.0)
            } else if x > l {
                (l, 0.0)
            } else {
                (x, v)
            }
        }
    }
}

/// Exact constant-acceleration position `x0 + v0 t + u t^2 / 2`.
pub fn constant_acceleration(x0: f64, v0: f64, u: f64, t: f64) -> f64 {
    x0 + v0 * t + 0.5 * u * t * t
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Selector {
    EnergyBelow(f64),
    EnergyAbove(f64),
    UidEquals(u64),
    InRegion([f64; 4]),
}

pub fn select(slots: &[AgentRecord], sel: Selector) -> Vec<bool> {
    let mut out = Vec::with_capacity(slots.len());
    for a in slots {
        let hit = match sel {
            Selector::EnergyBelow(t) => a.energy < t,
            Selector::EnergyAbove(t) => a.energy > t,
            Selector::UidEquals(u) => a.uid == u,
            Selector::InRegion(b) => a.pos[0] >= b[0] && a.pos[1] >= b[1] && a.pos[0] <= b[2] && a.pos[1] <= b[3],
        };
        out.push(a.active && hit);
    }
    out
}

pub fn remove(slots: &[AgentRecord], mask: &[bool]) -> Vec<AgentRecord> {
    slots
        .iter()
        .zip(mask)
        .map(|(a, &m)| {
            if m && a.active {
                AgentRecord::empty(a.rates.len(), a.params.len())
            } else {
                a.clone()
            }
        })
        .collect()
}

/// Insertion sort (stable) of the active records by `key`, active first,
/// padded with empty records to the original length.
pub fn stable_sort(slots: &[AgentRecord], key: impl Fn(&AgentRecord) -> f64, descending: bool) -> Vec<AgentRecord> {
    let mut list: Vec<AgentRecord> = Vec::new();
    for a in slots.iter().filter(|a| a.active) {
        let k = key(a);
        let mut at = list.len();
        while at > 0 {
            let prev = key(&list[at - 1]);
            let out_of_order = if descending { prev < k } else { prev > k };
            if out_of_order {
                at -= 1;
            } else {
                break;
            }
        }
        list.insert(at, a.clone());
    }
    let (n, p) = slots
        .first()
        .map(|a| (a.rates.len(), a.params.len()))
        .unwrap_or((0, 0));
    while list.len() < slots.len() {
        list.push(AgentRecord::empty(n, p));
    }
    list
}

/// Growable-list model of the agent population: no slots, no padding.
#[derive(Clone, Debug, Default)]
pub struct ListModel {
    pub agents: Vec<AgentRecord>,
    pub next_uid: u64,
    pub capacity: usize,
    pub overflow: u64,
}

impl ListModel {
    pub fn new(capacity: usize) -> Self {
        ListModel {
            agents: Vec::new(),
            next_uid: 1,
            capacity,
            overflow: 0,
        }
    }

    /// Adds up to the remaining capacity; returns the number accepted.
    pub fn add(&mut self, spawns: &[AgentRecord]) -> usize {
        let room = self.capacity - self.agents.len();
        let accepted = spawns.len().min(room);
        for s in &spawns[..accepted] {
            let mut a = s.clone();
            a.active = true;
            a.uid = self.next_uid;
            self.next_uid += 1;
            self.agents.push(a);
        }
        self.overflow += (spawns.len() - accepted) as u64;
        accepted
    }

    pub fn remove_uids(&mut self, uids: &[u64]) {
        self.agents.retain(|a| !uids.contains(&a.uid));
    }

    /// Agents ordered by uid, for multiset comparison.
    pub fn sorted(&self) -> Vec<AgentRecord> {
        let mut v = self.agents.clone();
        v.sort_by_key(|a| a.uid);
        v
    }
}

/// Death then birth rules on plain records. Mutated child parameters are
/// supplied by the caller per parent slot (`child_params(slot)`), so the
/// oracle checks the bookkeeping, not the random draws.
pub fn population_step(
    slots: &[AgentRecord],
    next_uid: u64,
    threshold: f64,
    fraction: f64,
    child_params: impl Fn(usize) -> Vec<f64>,
) -> (Vec<AgentRecord>, u64, usize) {
    let mut out: Vec<AgentRecord> = slots
        .iter()
        .map(|a| {
            if a.active && a.energy <= 0.0 {
                AgentRecord::empty(a.rates.len(), a.params.len())
            } else {
                a.clone()
            }
        })
        .collect();
    let parents: Vec<usize> = (0..out.len())
        .filter(|&i| out[i].active && out[i].energy >= threshold)
        .collect();
    let mut uid = next_uid;
    let mut dropped = 0;
    for parent in parents {
        let Some(free) = out.iter().position(|a| !a.active) else {
            dropped += 1;
            continue;
        };
        let child_energy = fraction * out[parent].energy;
        let child = AgentRecord {
            active: true,
            uid,
            pos: out[parent].pos,
            vel: [0.0; 2],
            energy: child_energy,
            rates: vec![0.0; out[parent].rates.len()],
            params: child_params(parent),
        };
        uid += 1;
        out[parent].energy -= child_energy;
        out[free] = child;
    }
    (out, uid, dropped)
}

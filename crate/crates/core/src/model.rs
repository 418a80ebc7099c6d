//! Constant-shape agent and resource storage.
//!
//! Both sets are structure-of-arrays with a capacity fixed at construction.
//! Absent entities occupy all-zero slots (`active = false`, uid 0), so every
//! array keeps its shape through any sequence of operations. Mutable access
//! is handed out only as slices, which cannot change length.

use crate::config::SimConfig;
use crate::error::{ForageError, Result};
use crate::geometry::{Vec2, WorldGeometry};
use crate::policy::{policy_init, PolicyLayout};
use crate::rng::{self, Phase};

/// Array lengths of an [`AgentSet`], used by the shape audit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AgentShape {
    pub capacity: usize,
    pub n_neurons: usize,
    pub param_len: usize,
    pub active: usize,
    pub uid: usize,
    pub position: usize,
    pub velocity: usize,
    pub energy: usize,
    pub rates: usize,
    pub params: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentSet {
    capacity: usize,
    n_neurons: usize,
    param_len: usize,
    pub(crate) active: Vec<bool>,
    pub(crate) uid: Vec<u64>,
    position: Vec<Vec2>,
    velocity: Vec<Vec2>,
    energy: Vec<f64>,
    rates: Vec<f64>,
    params: Vec<f64>,
    pub(crate) next_uid: u64,
    pub(crate) overflow_count: u64,
}

impl AgentSet {
    pub fn new(capacity: usize, n_neurons: usize, param_len: usize) -> Self {
        AgentSet {
            capacity,
            n_neurons,
            param_len,
            active: vec![false; capacity],
            uid: vec![0; capacity],
            position: vec![Vec2::ZERO; capacity],
            velocity: vec![Vec2::ZERO; capacity],
            energy: vec![0.0; capacity],
            rates: vec![0.0; capacity * n_neurons],
            params: vec![0.0; capacity * param_len],
            next_uid: 1,
            overflow_count: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }
    pub fn n_neurons(&self) -> usize {
        self.n_neurons
    }
    pub fn param_len(&self) -> usize {
        self.param_len
    }
    pub fn next_uid(&self) -> u64 {
        self.next_uid
    }
    pub fn overflow_count(&self) -> u64 {
        self.overflow_count
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }
    pub fn is_active(&self, slot: usize) -> bool {
        self.active[slot]
    }
    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }
    pub fn active_slots(&self) -> impl Iterator<Item = usize> + '_ {
        self.active
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| a.then_some(i))
    }
    pub fn free_slots(&self) -> usize {
        self.capacity - self.active_count()
    }

    pub fn uid(&self) -> &[u64] {
        &self.uid
    }
    pub fn position(&self) -> &[Vec2] {
        &self.position
    }
    pub fn position_mut(&mut self) -> &mut [Vec2] {
        &mut self.position
    }
    pub fn velocity(&self) -> &[Vec2] {
        &self.velocity
    }
    pub fn velocity_mut(&mut self) -> &mut [Vec2] {
        &mut self.velocity
    }
    pub fn energy(&self) -> &[f64] {
        &self.energy
    }
    pub fn energy_mut(&mut self) -> &mut [f64] {
        &mut self.energy
    }

    /// All firing rates, `capacity x n_neurons` row-major.
    pub fn rates_flat(&self) -> &[f64] {
        &self.rates
    }
    pub fn rates_flat_mut(&mut self) -> &mut [f64] {
        &mut self.rates
    }
    pub fn rates(&self, slot: usize) -> &[f64] {
        &self.rates[slot * self.n_neurons..(slot + 1) * self.n_neurons]
    }
    pub fn rates_mut(&mut self, slot: usize) -> &mut [f64] {
        &mut self.rates[slot * self.n_neurons..(slot + 1) * self.n_neurons]
    }

    /// All policy parameters, `capacity x param_len` row-major.
    pub fn params_flat(&self) -> &[f64] {
        &self.params
    }
    pub fn params_flat_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }
    pub fn params(&self, slot: usize) -> &[f64] {
        &self.params[slot * self.param_len..(slot + 1) * self.param_len]
    }
    pub fn params_mut(&mut self, slot: usize) -> &mut [f64] {
        &mut self.params[slot * self.param_len..(slot + 1) * self.param_len]
    }

    /// Mutable views of the motion fields together, for the integrator.
    pub(crate) fn motion_mut(&mut self) -> (&[bool], &[u64], &mut [Vec2], &mut [Vec2]) {
        (&self.active, &self.uid, &mut self.position, &mut self.velocity)
    }

    pub(crate) fn policy_views_mut(&mut self) -> (&[bool], &[u64], &[f64], &mut [f64]) {
        (&self.active, &self.uid, &self.params, &mut self.rates)
    }

    pub fn shape(&self) -> AgentShape {
        AgentShape {
            capacity: self.capacity,
            n_neurons: self.n_neurons,
            param_len: self.param_len,
            active: self.active.len(),
            uid: self.uid.len(),
            position: self.position.len(),
            velocity: self.velocity.len(),
            energy: self.energy.len(),
            rates: self.rates.len(),
            params: self.params.len(),
        }
    }

    /// Shape expected for the given construction parameters.
    pub fn expected_shape(capacity: usize, n_neurons: usize, param_len: usize) -> AgentShape {
        AgentShape {
            capacity,
            n_neurons,
            param_len,
            active: capacity,
            uid: capacity,
            position: capacity,
            velocity: capacity,
            energy: capacity,
            rates: capacity * n_neurons,
            params: capacity * param_len,
        }
    }

    /// Slots that are inactive yet hold any nonzero field.
    pub fn padding_violations(&self) -> Vec<usize> {
        (0..self.capacity)
            .filter(|&i| !self.active[i] && !self.slot_is_zero(i))
            .collect()
    }

    pub(crate) fn slot_is_zero(&self, i: usize) -> bool {
        self.uid[i] == 0
            && self.position[i] == Vec2::ZERO
            && self.velocity[i] == Vec2::ZERO
            && self.energy[i] == 0.0
            && self.rates(i).iter().all(|&v| v == 0.0)
            && self.params(i).iter().all(|&v| v == 0.0)
    }

    pub(crate) fn zero_slot(&mut self, i: usize) {
        self.active[i] = false;
        self.uid[i] = 0;
        self.position[i] = Vec2::ZERO;
        self.velocity[i] = Vec2::ZERO;
        self.energy[i] = 0.0;
        let (n, p) = (self.n_neurons, self.param_len);
        self.rates[i * n..(i + 1) * n].fill(0.0);
        self.params[i * p..(i + 1) * p].fill(0.0);
    }

    /// Writes a live agent into slot `i` with a freshly issued uid.
    pub(crate) fn fill_slot(
        &mut self,
        i: usize,
        position: Vec2,
        velocity: Vec2,
        energy: f64,
        rates: &[f64],
        params: &[f64],
    ) -> u64 {
        debug_assert!(!self.active[i]);
        let uid = self.next_uid;
        self.next_uid = self
            .next_uid
            .checked_add(1)
            .expect("64-bit uid counter exhausted");
        self.active[i] = true;
        self.uid[i] = uid;
        self.position[i] = position;
        self.velocity[i] = velocity;
        self.energy[i] = energy;
        self.rates_mut(i).copy_from_slice(rates);
        self.params_mut(i).copy_from_slice(params);
        uid
    }

    /// Moves slot `src` of `other` into slot `dst` of `self` verbatim.
    pub(crate) fn copy_slot_from(&mut self, dst: usize, other: &AgentSet, src: usize) {
        self.active[dst] = other.active[src];
        self.uid[dst] = other.uid[src];
        self.position[dst] = other.position[src];
        self.velocity[dst] = other.velocity[src];
        self.energy[dst] = other.energy[src];
        let (n, p) = (self.n_neurons, self.param_len);
        self.rates[dst * n..(dst + 1) * n].copy_from_slice(other.rates(src));
        self.params[dst * p..(dst + 1) * p].copy_from_slice(other.params(src));
    }

    pub(crate) fn from_raw_parts(parts: AgentSetParts) -> Result<Self> {
        let set = AgentSet {
            capacity: parts.capacity,
            n_neurons: parts.n_neurons,
            param_len: parts.param_len,
            active: parts.active,
            uid: parts.uid,
            position: parts.position,
            velocity: parts.velocity,
            energy: parts.energy,
            rates: parts.rates,
            params: parts.params,
            next_uid: parts.next_uid,
            overflow_count: parts.overflow_count,
        };
        if set.shape() != Self::expected_shape(set.capacity, set.n_neurons, set.param_len) {
            return Err(ForageError::Checkpoint("agent arrays have inconsistent shapes".into()));
        }
        Ok(set)
    }
}

pub(crate) struct AgentSetParts {
    pub capacity: usize,
    pub n_neurons: usize,
    pub param_len: usize,
    pub active: Vec<bool>,
    pub uid: Vec<u64>,
    pub position: Vec<Vec2>,
    pub velocity: Vec<Vec2>,
    pub energy: Vec<f64>,
    pub rates: Vec<f64>,
    pub params: Vec<f64>,
    pub next_uid: u64,
    pub overflow_count: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResourceSet {
    pub(crate) active: Vec<bool>,
    pub(crate) position: Vec<Vec2>,
    pub(crate) value: Vec<f64>,
}

impl ResourceSet {
    pub fn new(capacity: usize) -> Self {
        ResourceSet {
            active: vec![false; capacity],
            position: vec![Vec2::ZERO; capacity],
            value: vec![0.0; capacity],
        }
    }

    /// Builds a set whose first `entries.len()` slots are active.
    pub fn from_entries(capacity: usize, entries: &[(Vec2, f64)]) -> Result<Self> {
        if entries.len() > capacity {
            return Err(ForageError::Capacity {
                requested: entries.len(),
                free: capacity,
            });
        }
        let mut set = ResourceSet::new(capacity);
        for (i, &(p, s)) in entries.iter().enumerate() {
            set.active[i] = true;
            set.position[i] = p;
            set.value[i] = s.max(0.0);
        }
        Ok(set)
    }

    pub fn capacity(&self) -> usize {
        self.active.len()
    }
    pub fn active(&self) -> &[bool] {
        &self.active
    }
    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }
    pub fn position(&self) -> &[Vec2] {
        &self.position
    }
    pub fn value(&self) -> &[f64] {
        &self.value
    }
    /// Sum of active values in slot order.
    pub fn total_value(&self) -> f64 {
        self.value.iter().sum()
    }

    pub fn padding_violations(&self) -> Vec<usize> {
        (0..self.capacity())
            .filter(|&i| !self.active[i] && (self.position[i] != Vec2::ZERO || self.value[i] != 0.0))
            .collect()
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.active.len(), self.position.len(), self.value.len()]
    }
}

/// Builds the initial agent set, resource set and world for a validated config.
///
/// Agent slot `i` draws its position and policy parameters from the stream
/// keyed `(seed, 0, InitAgents, i)`, resource slot `j` from
/// `(seed, 0, InitResources, j)`. Positions are uniform over the world, agent
/// velocities zero, resource values start at the carrying capacity.
pub fn state_init(config: &SimConfig) -> Result<(AgentSet, ResourceSet, WorldGeometry)> {
    let m0 = config.initial_agents();
    let n0 = config.initial_resources();
    if m0 > config.max_agents {
        return Err(ForageError::Capacity {
            requested: m0,
            free: config.max_agents,
        });
    }
    if n0 > config.max_resources {
        return Err(ForageError::Capacity {
            requested: n0,
            free: config.max_resources,
        });
    }

    let world = config.world();
    let layout: PolicyLayout = config.policy_layout();
    let mut agents = AgentSet::new(config.max_agents, config.n_neurons, layout.len());
    let zero_rates = vec![0.0; config.n_neurons];
    for slot in 0..m0 {
        let mut rng = rng::stream(config.seed, 0, Phase::InitAgents, slot as u64);
        let p = uniform_point(&mut rng, world.extent);
        let params = policy_init(&mut rng, layout, config.policy_gain, config.tau).to_flat();
        agents.fill_slot(slot, p, Vec2::ZERO, config.init_energy, &zero_rates, &params);
    }

    let s0 = config.carrying_capacity();
    let entries: Vec<(Vec2, f64)> = (0..n0)
        .map(|slot| {
            let mut rng = rng::stream(config.seed, 0, Phase::InitResources, slot as u64);
            (uniform_point(&mut rng, world.extent), s0)
        })
        .collect();
    let resources = ResourceSet::from_entries(config.max_resources, &entries)?;
    Ok((agents, resources, world))
}

fn uniform_point(rng: &mut rng::Stream, extent: Vec2) -> Vec2 {
    let x = rng::uniform(rng) * extent.x;
    let y = rng::uniform(rng) * extent.y;
    Vec2::new(x, y)
}

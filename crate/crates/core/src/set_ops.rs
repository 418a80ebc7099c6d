//! Select, sort, add and remove on an [`AgentSet`] without changing any
//! array shape. Predicates and sort keys form closed registries so that a
//! manipulation can be named, logged and replayed.

use crate::config::OverflowPolicy;
use crate::error::{ForageError, Result};
use crate::geometry::Vec2;
use crate::model::AgentSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotMask(Vec<bool>);

impl SlotMask {
    pub fn none(capacity: usize) -> Self {
        SlotMask(vec![false; capacity])
    }
    pub fn from_vec(bits: Vec<bool>) -> Self {
        SlotMask(bits)
    }
    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
    pub fn set(&mut self, slot: usize, value: bool) {
        self.0[slot] = value;
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Predicate {
    EnergyBelow(f64),
    EnergyAbove(f64),
    UidEquals(u64),
    /// Inclusive axis-aligned box.
    InRegion { min: Vec2, max: Vec2 },
}

impl Predicate {
    pub const NAMES: [&'static str; 4] = ["energy_below", "energy_above", "uid_equals", "in_region"];

    /// Looks a predicate up in the registry by name.
    pub fn from_name(name: &str, args: &[f64]) -> Result<Self> {
        let arity = |expected: usize, name: &'static str| {
            if args.len() == expected {
                Ok(())
            } else {
                Err(ForageError::PredicateArity {
                    name,
                    expected,
                    got: args.len(),
                })
            }
        };
        match name {
            "energy_below" => arity(1, "energy_below").map(|_| Predicate::EnergyBelow(args[0])),
            "energy_above" => arity(1, "energy_above").map(|_| Predicate::EnergyAbove(args[0])),
            "uid_equals" => arity(1, "uid_equals").map(|_| Predicate::UidEquals(args[0] as u64)),
            "in_region" => arity(4, "in_region").map(|_| Predicate::InRegion {
                min: Vec2::new(args[0], args[1]),
                max: Vec2::new(args[2], args[3]),
            }),
            other => Err(ForageError::UnknownPredicate(other.to_string())),
        }
    }

    fn holds(&self, set: &AgentSet, slot: usize) -> bool {
        match *self {
            Predicate::EnergyBelow(t) => set.energy()[slot] < t,
            Predicate::EnergyAbove(t) => set.energy()[slot] > t,
            Predicate::UidEquals(uid) => set.uid()[slot] == uid,
            Predicate::InRegion { min, max } => {
                let p = set.position()[slot];
                p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y
            }
        }
    }
}

/// Mask that is true exactly on active slots satisfying `predicate`.
pub fn select(set: &AgentSet, predicate: &Predicate) -> SlotMask {
    SlotMask(
        (0..set.capacity())
            .map(|slot| set.is_active(slot) && predicate.holds(set, slot))
            .collect(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SortKey {
    Energy,
    Uid,
    PositionX,
    PositionY,
}

impl SortKey {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "energy" => Ok(SortKey::Energy),
            "uid" => Ok(SortKey::Uid),
            "position_x" => Ok(SortKey::PositionX),
            "position_y" => Ok(SortKey::PositionY),
            other => Err(ForageError::UnknownSortKey(other.to_string())),
        }
    }

    fn value(self, set: &AgentSet, slot: usize) -> f64 {
        match self {
            SortKey::Energy => set.energy()[slot],
            SortKey::Uid => set.uid()[slot] as f64,
            SortKey::PositionX => set.position()[slot].x,
            SortKey::PositionY => set.position()[slot].y,
        }
    }
}

/// Stable sort of the active agents by `key`, packed to the front; inactive
/// slots follow as zero padding. Ties keep their slot order in both
/// directions.
pub fn sort(set: &mut AgentSet, key: SortKey, descending: bool) {
    let mut order: Vec<usize> = set.active_slots().collect();
    match key {
        // uids exceed f64's exact integer range long before they run out
        SortKey::Uid => order.sort_by_key(|&s| set.uid()[s]),
        _ => order.sort_by(|&a, &b| key.value(set, a).total_cmp(&key.value(set, b))),
    }
    if descending {
        // reverse, then restore slot order within runs of equal keys
        order.reverse();
        let mut start = 0;
        while start < order.len() {
            let mut end = start + 1;
            while end < order.len() && keys_equal(set, key, order[start], order[end]) {
                end += 1;
            }
            order[start..end].reverse();
            start = end;
        }
    }

    let source = set.clone();
    for (dst, &src) in order.iter().enumerate() {
        set.copy_slot_from(dst, &source, src);
    }
    for dst in order.len()..set.capacity() {
        set.zero_slot(dst);
    }
}

fn keys_equal(set: &AgentSet, key: SortKey, a: usize, b: usize) -> bool {
    match key {
        SortKey::Uid => set.uid()[a] == set.uid()[b],
        _ => key.value(set, a).total_cmp(&key.value(set, b)).is_eq(),
    }
}

/// Initial state for a group of new agents, with a fixed entry capacity.
#[derive(Clone, Debug, PartialEq)]
pub struct SpawnBatch {
    k_max: usize,
    n_neurons: usize,
    param_len: usize,
    count: usize,
    active: Vec<bool>,
    position: Vec<Vec2>,
    velocity: Vec<Vec2>,
    energy: Vec<f64>,
    rates: Vec<f64>,
    params: Vec<f64>,
}

impl SpawnBatch {
    pub fn new(k_max: usize, n_neurons: usize, param_len: usize) -> Self {
        SpawnBatch {
            k_max,
            n_neurons,
            param_len,
            count: 0,
            active: vec![false; k_max],
            position: vec![Vec2::ZERO; k_max],
            velocity: vec![Vec2::ZERO; k_max],
            energy: vec![0.0; k_max],
            rates: vec![0.0; k_max * n_neurons],
            params: vec![0.0; k_max * param_len],
        }
    }

    pub fn len(&self) -> usize {
        self.count
    }
    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Appends a spawn with zero policy state.
    pub fn push(&mut self, position: Vec2, velocity: Vec2, energy: f64, params: &[f64]) -> Result<()> {
        self.push_with_rates(position, velocity, energy, None, params)
    }

    pub fn push_with_rates(
        &mut self,
        position: Vec2,
        velocity: Vec2,
        energy: f64,
        rates: Option<&[f64]>,
        params: &[f64],
    ) -> Result<()> {
        if self.count == self.k_max {
            return Err(ForageError::InvalidBatch(format!("batch is full ({} entries)", self.k_max)));
        }
        if params.len() != self.param_len {
            return Err(ForageError::InvalidBatch(format!(
                "expected {} parameters, got {}",
                self.param_len,
                params.len()
            )));
        }
        let i = self.count;
        if let Some(r) = rates {
            if r.len() != self.n_neurons {
                return Err(ForageError::InvalidBatch(format!(
                    "expected {} rates, got {}",
                    self.n_neurons,
                    r.len()
                )));
            }
            self.rates[i * self.n_neurons..(i + 1) * self.n_neurons].copy_from_slice(r);
        }
        self.active[i] = true;
        self.position[i] = position;
        self.velocity[i] = velocity;
        self.energy[i] = energy;
        self.params[i * self.param_len..(i + 1) * self.param_len].copy_from_slice(params);
        self.count += 1;
        Ok(())
    }

    fn rates(&self, i: usize) -> &[f64] {
        &self.rates[i * self.n_neurons..(i + 1) * self.n_neurons]
    }
    fn params(&self, i: usize) -> &[f64] {
        &self.params[i * self.param_len..(i + 1) * self.param_len]
    }
}

/// Places the batch into the lowest-index free slots, in batch order, issuing
/// fresh uids. Returns how many spawns were accepted.
///
/// When the batch does not fit, `Strict` fails without touching the set and
/// `DropAndCount` places what fits and adds the rest to `overflow_count`.
pub fn add(set: &mut AgentSet, batch: &SpawnBatch, policy: OverflowPolicy) -> Result<usize> {
    if batch.n_neurons != set.n_neurons() || batch.param_len != set.param_len() {
        return Err(ForageError::InvalidBatch("batch shape does not match the agent set".into()));
    }
    let free = set.free_slots();
    let k = batch.count;
    if k > free && policy == OverflowPolicy::Strict {
        return Err(ForageError::Capacity { requested: k, free });
    }
    let accepted = k.min(free);
    let mut slots = (0..set.capacity()).filter(|&s| !set.is_active(s));
    let targets: Vec<usize> = slots.by_ref().take(accepted).collect();
    for (i, &slot) in targets.iter().enumerate() {
        set.fill_slot(
            slot,
            batch.position[i],
            batch.velocity[i],
            batch.energy[i],
            batch.rates(i),
            batch.params(i),
        );
    }
    set.overflow_count += (k - accepted) as u64;
    Ok(accepted)
}

/// Deactivates and zeroes every masked active slot.
pub fn remove(set: &mut AgentSet, mask: &SlotMask) {
    assert_eq!(mask.len(), set.capacity(), "mask shape must match capacity");
    for slot in 0..set.capacity() {
        if mask.0[slot] && set.is_active(slot) {
            set.zero_slot(slot);
        }
    }
}

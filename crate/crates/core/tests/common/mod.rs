#![allow(dead_code)]

use forage_core::config::OverflowPolicy;
use forage_core::rng::{self, Phase, Stream};
use forage_core::set_ops::{self, SlotMask, SpawnBatch};
use forage_core::{AgentSet, ResourceSet, Vec2};
use forage_oracles::AgentRecord;

pub fn rng(seed: u64, case: u64) -> Stream {
    rng::stream(seed, case, Phase::User, 0)
}

pub fn uniform(r: &mut Stream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng::uniform(r)
}

pub fn below(r: &mut Stream, n: usize) -> usize {
    ((rng::uniform(r) * n as f64) as usize).min(n.saturating_sub(1))
}

pub fn normal(r: &mut Stream) -> f64 {
    rng::normal(r)
}

pub fn point(r: &mut Stream, extent: Vec2) -> Vec2 {
    Vec2::new(uniform(r, 0.0, extent.x), uniform(r, 0.0, extent.y))
}

/// Random agent set with roughly `fill` of the slots active and holes
/// scattered through the array.
pub fn random_agents(r: &mut Stream, capacity: usize, n_neurons: usize, param_len: usize, extent: Vec2, fill: f64) -> AgentSet {
    let mut set = AgentSet::new(capacity, n_neurons, param_len);
    let mut batch = SpawnBatch::new(capacity, n_neurons, param_len);
    for _ in 0..capacity {
        let rates: Vec<f64> = (0..n_neurons).map(|_| uniform(r, -1.0, 1.0)).collect();
        let mut params: Vec<f64> = (0..param_len).map(|_| 0.3 * normal(r)).collect();
        if let Some(tau) = params.last_mut() {
            *tau = uniform(r, 0.5, 2.0);
        }
        let vel = Vec2::new(normal(r), normal(r));
        batch
            .push_with_rates(point(r, extent), vel, uniform(r, 0.0, 30.0), Some(&rates), &params)
            .unwrap();
    }
    set_ops::add(&mut set, &batch, OverflowPolicy::Strict).unwrap();
    let holes: Vec<bool> = (0..capacity).map(|_| rng::uniform(r) >= fill).collect();
    set_ops::remove(&mut set, &SlotMask::from_vec(holes));
    set
}

pub fn random_resources(r: &mut Stream, capacity: usize, extent: Vec2, max_value: f64, fill: f64) -> ResourceSet {
    let count = ((capacity as f64 * fill).round() as usize).min(capacity);
    let entries: Vec<(Vec2, f64)> = (0..count)
        .map(|_| (point(r, extent), uniform(r, 0.0, max_value)))
        .collect();
    ResourceSet::from_entries(capacity, &entries).unwrap()
}

pub fn records(set: &AgentSet) -> Vec<AgentRecord> {
    (0..set.capacity())
        .map(|s| AgentRecord {
            active: set.is_active(s),
            uid: set.uid()[s],
            pos: [set.position()[s].x, set.position()[s].y],
            vel: [set.velocity()[s].x, set.velocity()[s].y],
            energy: set.energy()[s],
            rates: set.rates(s).to_vec(),
            params: set.params(s).to_vec(),
        })
        .collect()
}

pub fn resource_tuples(set: &ResourceSet) -> Vec<(bool, [f64; 2], f64)> {
    (0..set.capacity())
        .map(|n| (set.active()[n], [set.position()[n].x, set.position()[n].y], set.value()[n]))
        .collect()
}

pub fn agent_tuples(set: &AgentSet) -> Vec<(bool, [f64; 2])> {
    (0..set.capacity())
        .map(|m| (set.is_active(m), [set.position()[m].x, set.position()[m].y]))
        .collect()
}

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!(close(a, b, tol), "{what}: {a} vs {b} (tol {tol})");
}

//! Property tests over random inputs for the constant-shape contract.

mod common;

use common::*;
use forage_core::config::OverflowPolicy;
use forage_core::dynamics::{apply_boundary, integrate};
use forage_core::resources::{resource_step, HarvestKernel, ResourceDynamics};
use forage_core::set_ops::{self, SlotMask, SortKey, SpawnBatch};
use forage_core::{AgentSet, BoundaryMode, Vec2, WorldGeometry};
use proptest::prelude::*;

fn mode() -> impl Strategy<Value = BoundaryMode> {
    prop_oneof![
        Just(BoundaryMode::Periodic),
        Just(BoundaryMode::Reflective),
        Just(BoundaryMode::Clamped)
    ]
}

#[derive(Clone, Debug)]
enum Op {
    Add(usize),
    Remove(Vec<bool>),
    Sort(u8, bool),
    Move(f64),
}

fn op(cap: usize) -> impl Strategy<Value = Op> {
    prop_oneof![
        (0..cap + 3).prop_map(Op::Add),
        prop::collection::vec(any::<bool>(), cap).prop_map(Op::Remove),
        (0u8..4, any::<bool>()).prop_map(|(k, d)| Op::Sort(k, d)),
        (-50.0..50.0f64).prop_map(Op::Move),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn resources_stay_nonnegative(
        seed in 0u64..1_000_000,
        dt in 1e-3..5.0f64,
        eps in 0.0..3.0f64,
        alpha in 1e-4..1.0f64,
        gain in 0.0..100.0f64,
        cutoff in 0.0..30.0f64,
        mode in mode(),
    ) {
        let mut r = rng(20, seed);
        let extent = Vec2::new(20.0, 20.0);
        let world = WorldGeometry::new(extent, mode, vec![]);
        let agents = random_agents(&mut r, 30, 1, 2, extent, 0.9);
        let mut res = random_resources(&mut r, 20, extent, 1000.0, 0.8);
        let dynamics = ResourceDynamics { epsilon: eps, alpha, kernel: HarvestKernel { gain, scale: 1.0, cutoff } };
        for _ in 0..5 {
            let report = resource_step(&mut res, &agents, &dynamics, &world, dt);
            prop_assert!(res.value().iter().all(|&s| s >= 0.0));
            prop_assert!(report.per_agent.iter().all(|&c| c >= 0.0));
        }
        prop_assert!(res.padding_violations().is_empty());
    }

    /// Any sequence of set operations keeps shapes fixed and inactive slots zero.
    #[test]
    fn set_ops_preserve_shape_and_padding(
        cap in 1usize..16,
        ops in prop::collection::vec(op(16), 1..30),
        mode in mode(),
    ) {
        let (n, p) = (3, 4);
        let mut set = AgentSet::new(cap, n, p);
        let expected = AgentSet::expected_shape(cap, n, p);
        let world = WorldGeometry::new(Vec2::new(10.0, 10.0), mode, vec![]);
        let mut next = 0.0;
        for op in ops {
            match op {
                Op::Add(k) => {
                    let mut batch = SpawnBatch::new(k.max(1), n, p);
                    for i in 0..k {
                        next += 1.0;
                        batch.push_with_rates(
                            Vec2::new(next % 10.0, (i as f64) % 10.0),
                            Vec2::new(1.0, -1.0),
                            next,
                            Some(&[0.1, 0.2, 0.3]),
                            &[1.0, 2.0, 3.0, 1.0],
                        ).unwrap();
                    }
                    set_ops::add(&mut set, &batch, OverflowPolicy::DropAndCount).unwrap();
                }
                Op::Remove(bits) => {
                    let mut mask = bits;
                    mask.resize(cap, false);
                    set_ops::remove(&mut set, &SlotMask::from_vec(mask));
                }
                Op::Sort(k, desc) => {
                    let key = [SortKey::Energy, SortKey::Uid, SortKey::PositionX, SortKey::PositionY][k as usize];
                    set_ops::sort(&mut set, key, desc);
                }
                Op::Move(u) => {
                    let controls = vec![Vec2::new(u, -u); cap];
                    integrate(&mut set, &controls, 0.1, f64::INFINITY, 0).unwrap();
                    apply_boundary(&mut set, &world);
                    for s in set.active_slots() {
                        prop_assert!(world.contains(set.position()[s]));
                    }
                }
            }
            prop_assert_eq!(set.shape(), expected);
            prop_assert!(set.padding_violations().is_empty());
            let mut uids: Vec<u64> = set.active_slots().map(|s| set.uid()[s]).collect();
            prop_assert!(uids.iter().all(|&u| u > 0 && u < set.next_uid()));
            uids.sort_unstable();
            uids.dedup();
            prop_assert_eq!(uids.len(), set.active_count());
        }
    }
}

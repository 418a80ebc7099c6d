mod common;

use common::*;
use forage_core::resources::{resource_step, HarvestKernel, ResourceDynamics};
use forage_core::{BoundaryMode, ResourceSet, Vec2, WorldGeometry};

fn random_case(seed: u64) -> (f64, f64) {
    let mut r = rng(10, seed);
    let mode = [BoundaryMode::Periodic, BoundaryMode::Reflective, BoundaryMode::Clamped][(seed % 3) as usize];
    let extent = Vec2::new(uniform(&mut r, 2.0, 40.0), uniform(&mut r, 2.0, 40.0));
    let world = WorldGeometry::new(extent, mode, vec![]);
    let m = below(&mut r, 101);
    let n = below(&mut r, 101);
    let agents = random_agents(&mut r, m.max(1), 1, 2, extent, if m == 0 { 0.0 } else { 0.8 });
    let mut res = random_resources(&mut r, n.max(1), extent, 200.0, if n == 0 { 0.0 } else { 0.9 });
    let dynamics = ResourceDynamics {
        epsilon: uniform(&mut r, 0.0, 2.0),
        alpha: uniform(&mut r, 1e-4, 0.1),
        kernel: HarvestKernel {
            gain: uniform(&mut r, 0.01, 20.0),
            scale: uniform(&mut r, 0.1, 5.0),
            cutoff: uniform(&mut r, 0.1, 20.0),
        },
    };
    let dt = uniform(&mut r, 1e-3, 2.0);
    let report = resource_step(&mut res, &agents, &dynamics, &world, dt);
    assert!(res.value().iter().all(|&s| s >= 0.0), "negative resource (case {seed})");
    (report.total_extracted, report.total_credited())
}

#[test]
fn extraction_equals_credit() {
    for case in 0..1000 {
        let (extracted, credited) = random_case(case);
        let scale = extracted.abs().max(credited.abs());
        assert!(
            (extracted - credited).abs() <= 1e-9 * scale.max(f64::MIN_POSITIVE),
            "case {case}: extracted {extracted} credited {credited}"
        );
    }
}

#[test]
fn carrying_capacity_is_exact_fixed_point() {
    let world = WorldGeometry::new(Vec2::new(10.0, 10.0), BoundaryMode::Periodic, vec![]);
    let agents = forage_core::AgentSet::new(4, 1, 2);
    for (eps, alpha) in [(0.5, 0.005), (1.0, 0.3), (0.7, 0.013), (2.0, 1e-4)] {
        let k = eps / alpha;
        let mut res = ResourceSet::from_entries(3, &[(Vec2::new(1.0, 1.0), k), (Vec2::new(5.0, 5.0), k)]).unwrap();
        let dynamics = ResourceDynamics {
            epsilon: eps,
            alpha,
            kernel: HarvestKernel {
                gain: 1.0,
                scale: 1.0,
                cutoff: 5.0,
            },
        };
        for _ in 0..100 {
            resource_step(&mut res, &agents, &dynamics, &world, 0.1);
        }
        assert_eq!(res.value()[0], k);
        assert_eq!(res.value()[1], k);
        assert_eq!(res.value()[2], 0.0);
    }
}

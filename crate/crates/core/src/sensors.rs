//! Per-agent observations.
//!
//! Layout of one observation row (`obs_dim = n_rays + 6`), frozen because the
//! policy input weights index into it:
//!
//! | index          | content                                   |
//! |----------------|-------------------------------------------|
//! | `0..K`         | ray distances, fan relative to heading    |
//! | `K`            | resource signal `sum_n s_n w(x_n, x)/c`   |
//! | `K+1`, `K+2`   | gradient of the signal w.r.t. position    |
//! | `K+3`, `K+4`   | own velocity                              |
//! | `K+5`          | own energy                                |

use std::f64::consts::TAU;

use crate::geometry::{BoundaryMode, Segment, Vec2, WorldGeometry};
use crate::grid::CellGrid;
use crate::model::{AgentSet, ResourceSet};
use crate::par::*;
use crate::resources::HarvestKernel;

/// Speeds below this leave the ray fan anchored to the +x axis.
pub const HEADING_EPS: f64 = 1e-9;

pub const fn obs_dim(n_rays: usize) -> usize {
    n_rays + 6
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensorConfig {
    pub n_rays: usize,
    pub max_range: f64,
    pub kernel: HarvestKernel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub ray_distances: Vec<f64>,
    pub resource_signal: f64,
    pub resource_gradient: Vec2,
    pub own_velocity: Vec2,
    pub own_energy: f64,
}

impl Observation {
    pub fn zeros(n_rays: usize) -> Self {
        Observation {
            ray_distances: vec![0.0; n_rays],
            resource_signal: 0.0,
            resource_gradient: Vec2::ZERO,
            own_velocity: Vec2::ZERO,
            own_energy: 0.0,
        }
    }

    pub fn write_row(&self, row: &mut [f64]) {
        let k = self.ray_distances.len();
        row[..k].copy_from_slice(&self.ray_distances);
        row[k] = self.resource_signal;
        row[k + 1] = self.resource_gradient.x;
        row[k + 2] = self.resource_gradient.y;
        row[k + 3] = self.own_velocity.x;
        row[k + 4] = self.own_velocity.y;
        row[k + 5] = self.own_energy;
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut row = vec![0.0; obs_dim(self.ray_distances.len())];
        self.write_row(&mut row);
        row
    }
}

/// Observations for every slot, `capacity x obs_dim` row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Observations {
    obs_dim: usize,
    data: Vec<f64>,
}

impl Observations {
    pub fn zeros(capacity: usize, obs_dim: usize) -> Self {
        Observations {
            obs_dim,
            data: vec![0.0; capacity * obs_dim],
        }
    }
    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }
    pub fn row(&self, slot: usize) -> &[f64] {
        &self.data[slot * self.obs_dim..(slot + 1) * self.obs_dim]
    }
    pub fn row_mut(&mut self, slot: usize) -> &mut [f64] {
        &mut self.data[slot * self.obs_dim..(slot + 1) * self.obs_dim]
    }
    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }
}

/// Parameter `t >= 0` at which the ray `origin + t * dir` meets `seg`, if any.
/// Collinear overlap reports the nearest overlapping point.
pub fn ray_segment(origin: Vec2, dir: Vec2, seg: &Segment) -> Option<f64> {
    let e = seg.b - seg.a;
    let w = seg.a - origin;
    let denom = dir.cross(e);
    let scale = dir.norm() * e.norm();
    if denom.abs() <= 1e-12 * scale {
        // Parallel: only a collinear segment can be hit.
        if w.cross(dir).abs() > 1e-12 * w.norm().max(1.0) {
            return None;
        }
        let ta = w.dot(dir);
        let tb = (seg.b - origin).dot(dir);
        let (lo, hi) = if ta <= tb { (ta, tb) } else { (tb, ta) };
        return if hi < 0.0 {
            None
        } else {
            Some(lo.max(0.0))
        };
    }
    let t = w.cross(e) / denom;
    let s = w.cross(dir) / denom;
    (t >= 0.0 && (0.0..=1.0).contains(&s)).then_some(t)
}

/// Distance along a unit direction to the nearest wall, or to a world face
/// when the boundary is not periodic; `max_range` when nothing is hit.
/// Rays do not wrap across periodic boundaries.
pub fn ray_cast(origin: Vec2, dir: Vec2, world: &WorldGeometry, max_range: f64) -> f64 {
    let mut best = max_range;
    let mut consider = |seg: &Segment| {
        if let Some(t) = ray_segment(origin, dir, seg) {
            if t < best {
                best = t;
            }
        }
    };
    world.walls.iter().for_each(&mut consider);
    if world.boundary_mode != BoundaryMode::Periodic {
        world.faces().iter().for_each(&mut consider);
    }
    best
}

/// Resource signal at `pos` and its analytic gradient with respect to `pos`.
///
/// Each active resource contributes `s_n / (1 + d^2/sigma^2)` within the
/// cutoff, i.e. the harvest kernel divided by its gain.
pub fn resource_field(
    pos: Vec2,
    resources: &ResourceSet,
    kernel: &HarvestKernel,
    world: &WorldGeometry,
) -> (f64, Vec2) {
    field_over(pos, resources, kernel, world, 0..resources.capacity())
}

fn field_over(
    pos: Vec2,
    resources: &ResourceSet,
    kernel: &HarvestKernel,
    world: &WorldGeometry,
    slots: impl Iterator<Item = usize>,
) -> (f64, Vec2) {
    let inv_s2 = 1.0 / (kernel.scale * kernel.scale);
    let r2 = kernel.cutoff * kernel.cutoff;
    let mut signal = 0.0;
    let mut grad = Vec2::ZERO;
    for n in slots {
        if !resources.active[n] {
            continue;
        }
        let delta = world.displacement(resources.position[n], pos);
        let d2 = delta.norm_sq();
        if d2 > r2 {
            continue;
        }
        let q = 1.0 / (1.0 + d2 * inv_s2);
        let s = resources.value[n];
        signal += s * q;
        grad += delta * (-2.0 * s * q * q * inv_s2);
    }
    (signal, grad)
}

/// Heading used to orient the ray fan.
pub fn heading(velocity: Vec2) -> f64 {
    if velocity.norm() < HEADING_EPS {
        0.0
    } else {
        velocity.y.atan2(velocity.x)
    }
}

/// Observation of one agent at `pos` moving with `velocity`.
pub fn observe_one(
    pos: Vec2,
    velocity: Vec2,
    energy: f64,
    resources: &ResourceSet,
    world: &WorldGeometry,
    sensors: &SensorConfig,
) -> Observation {
    observe_with(pos, velocity, energy, resources, world, sensors, None)
}

fn observe_with(
    pos: Vec2,
    velocity: Vec2,
    energy: f64,
    resources: &ResourceSet,
    world: &WorldGeometry,
    sensors: &SensorConfig,
    grid: Option<&CellGrid>,
) -> Observation {
    let base = heading(velocity);
    let k = sensors.n_rays;
    let ray_distances = (0..k)
        .map(|i| {
            let dir = Vec2::from_angle(base + TAU * i as f64 / k as f64);
            ray_cast(pos, dir, world, sensors.max_range)
        })
        .collect();
    let (resource_signal, resource_gradient) = match grid {
        Some(grid) => {
            let mut near = Vec::new();
            grid.candidates(pos, &mut near);
            field_over(pos, resources, &sensors.kernel, world, near.into_iter())
        }
        None => resource_field(pos, resources, &sensors.kernel, world),
    };
    Observation {
        ray_distances,
        resource_signal,
        resource_gradient,
        own_velocity: velocity,
        own_energy: energy,
    }
}

/// Observations for all slots; inactive slots get all-zero rows.
pub fn observe(
    agents: &AgentSet,
    resources: &ResourceSet,
    world: &WorldGeometry,
    sensors: &SensorConfig,
) -> Observations {
    let dim = obs_dim(sensors.n_rays);
    let mut out = Observations::zeros(agents.capacity(), dim);
    let grid = CellGrid::build(&resources.position, |n| resources.active[n], world, sensors.kernel.cutoff);
    out.data
        .par_chunks_mut(dim)
        .enumerate()
        .for_each(|(slot, row)| {
            if agents.is_active(slot) {
                observe_with(
                    agents.position()[slot],
                    agents.velocity()[slot],
                    agents.energy()[slot],
                    resources,
                    world,
                    sensors,
                    grid.as_ref(),
                )
                .write_row(row);
            }
        });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open_world(mode: BoundaryMode) -> WorldGeometry {
        WorldGeometry::new(Vec2::new(10.0, 10.0), mode, vec![])
    }

    #[test]
    fn perpendicular_wall_hit() {
        let mut world = open_world(BoundaryMode::Periodic);
        world.walls.push(Segment::new(Vec2::new(5.0, -1.0), Vec2::new(5.0, 1.0)));
        let d = ray_cast(Vec2::ZERO, Vec2::new(1.0, 0.0), &world, 100.0);
        assert_eq!(d, 5.0);
    }

    #[test]
    fn boundary_face_when_not_periodic() {
        let world = open_world(BoundaryMode::Reflective);
        assert_eq!(ray_cast(Vec2::new(5.0, 5.0), Vec2::new(1.0, 0.0), &world, 100.0), 5.0);
        let world = open_world(BoundaryMode::Periodic);
        assert_eq!(ray_cast(Vec2::new(5.0, 5.0), Vec2::new(1.0, 0.0), &world, 100.0), 100.0);
    }

    #[test]
    fn misses_and_range_cap() {
        let seg = Segment::new(Vec2::new(5.0, 1.0), Vec2::new(5.0, 2.0));
        assert_eq!(ray_segment(Vec2::ZERO, Vec2::new(1.0, 0.0), &seg), None);
        let behind = Segment::new(Vec2::new(-5.0, -1.0), Vec2::new(-5.0, 1.0));
        assert_eq!(ray_segment(Vec2::ZERO, Vec2::new(1.0, 0.0), &behind), None);
        let mut world = open_world(BoundaryMode::Periodic);
        world.walls.push(Segment::new(Vec2::new(50.0, -1.0), Vec2::new(50.0, 1.0)));
        assert_eq!(ray_cast(Vec2::ZERO, Vec2::new(1.0, 0.0), &world, 10.0), 10.0);
    }

    #[test]
    fn collinear_segment_reports_nearest_point() {
        let seg = Segment::new(Vec2::new(7.0, 0.0), Vec2::new(3.0, 0.0));
        assert_eq!(ray_segment(Vec2::ZERO, Vec2::new(1.0, 0.0), &seg), Some(3.0));
        let around = Segment::new(Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0));
        assert_eq!(ray_segment(Vec2::ZERO, Vec2::new(1.0, 0.0), &around), Some(0.0));
    }

    #[test]
    fn vacuum_observation() {
        let world = open_world(BoundaryMode::Periodic);
        let sensors = SensorConfig {
            n_rays: 8,
            max_range: 10.0,
            kernel: HarvestKernel {
                gain: 1.0,
                scale: 1.0,
                cutoff: 5.0,
            },
        };
        let obs = observe_one(
            Vec2::new(5.0, 5.0),
            Vec2::ZERO,
            3.0,
            &ResourceSet::new(2),
            &world,
            &sensors,
        );
        assert_eq!(obs.ray_distances, vec![10.0; 8]);
        assert_eq!(obs.resource_signal, 0.0);
        assert_eq!(obs.resource_gradient, Vec2::ZERO);
        assert_eq!(obs.to_vec().len(), 14);
        assert_eq!(obs.to_vec()[13], 3.0);
    }

    #[test]
    fn resource_peak_is_stationary() {
        let world = open_world(BoundaryMode::Reflective);
        let res = ResourceSet::from_entries(1, &[(Vec2::new(4.0, 4.0), 37.0)]).unwrap();
        let kernel = HarvestKernel {
            gain: 2.5,
            scale: 1.0,
            cutoff: 5.0,
        };
        let (s, g) = resource_field(Vec2::new(4.0, 4.0), &res, &kernel, &world);
        assert_eq!(s, 37.0);
        assert_eq!(g.norm(), 0.0);
    }
}

//! Double-integrator motion, one independent integrator per axis, and
//! boundary enforcement.

use crate::error::{ForageError, Result};
use crate::geometry::{BoundaryMode, Vec2, WorldGeometry};
use crate::model::AgentSet;
use crate::par::*;

/// Semi-implicit Euler: `v' = v + u dt`, then `x' = x + v' dt`.
///
/// With a finite `max_speed`, `v'` is rescaled onto that speed before the
/// position update. Inactive slots are left untouched.
pub fn integrate(agents: &mut AgentSet, controls: &[Vec2], dt: f64, max_speed: f64, step: u64) -> Result<()> {
    let (active, uids, pos, vel) = agents.motion_mut();
    assert_eq!(controls.len(), active.len());
    pos.par_iter_mut()
        .zip(vel.par_iter_mut())
        .enumerate()
        .for_each(|(slot, (x, v))| {
            if !active[slot] {
                return;
            }
            let (nx, nv) = integrate_one(*x, *v, controls[slot], dt, max_speed);
            *x = nx;
            *v = nv;
        });
    for slot in 0..active.len() {
        if active[slot] && !(pos[slot].is_finite() && vel[slot].is_finite()) {
            return Err(ForageError::NonFinite {
                what: "motion state",
                uid: uids[slot],
                step,
            });
        }
    }
    Ok(())
}

#[inline]
pub fn integrate_one(x: Vec2, v: Vec2, u: Vec2, dt: f64, max_speed: f64) -> (Vec2, Vec2) {
    let mut v = v + u * dt;
    if max_speed.is_finite() {
        let speed = v.norm();
        if speed > max_speed {
            v = v * (max_speed / speed);
        }
    }
    (x + v * dt, v)
}

/// Brings every active agent back inside the world.
///
/// * periodic: positions wrap modulo the extent, into `[0, L)`.
/// * reflective: positions fold back across the faces (repeatedly, for large
///   overshoots); each fold negates that velocity component.
/// * clamped: positions clip to `[0, L]` and the clipped velocity component
///   is zeroed.
///
/// In-bounds agents are left bit-for-bit unchanged.
pub fn apply_boundary(agents: &mut AgentSet, world: &WorldGeometry) {
    let (active, _, pos, vel) = agents.motion_mut();
    pos.par_iter_mut()
        .zip(vel.par_iter_mut())
        .enumerate()
        .for_each(|(slot, (x, v))| {
            if active[slot] {
                let (nx, nv) = bound_one(*x, *v, world.extent, world.boundary_mode);
                *x = nx;
                *v = nv;
            }
        });
}

pub fn bound_one(mut x: Vec2, mut v: Vec2, extent: Vec2, mode: BoundaryMode) -> (Vec2, Vec2) {
    for axis in 0..2 {
        let (p, vel) = bound_axis(x.get(axis), v.get(axis), extent.get(axis), mode);
        x.set(axis, p);
        v.set(axis, vel);
    }
    (x, v)
}

fn bound_axis(p: f64, v: f64, l: f64, mode: BoundaryMode) -> (f64, f64) {
    match mode {
        BoundaryMode::Periodic => {
            if (0.0..l).contains(&p) {
                return (p, v);
            }
            let w = p.rem_euclid(l);
            // rem_euclid can round up to l for tiny negative inputs.
            (if w >= l { 0.0 } else { w }, v)
        }
        BoundaryMode::Reflective => {
            if (0.0..=l).contains(&p) {
                return (p, v);
            }
            let folds = (p / l).floor();
            let r = (p - folds * l).clamp(0.0, l);
            if folds.rem_euclid(2.0) == 0.0 {
                (r, v)
            } else {
                (l - r, -v)
            }
        }
        BoundaryMode::Clamped => {
            if p < 0.0 {
                (0.0, 0.0)
            } else if p > l {
                (l, 0.0)
            } else {
                (p, v)
            }
        }
    }
}

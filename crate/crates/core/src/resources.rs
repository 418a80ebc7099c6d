//! Logistic resource regrowth with rationed agent harvesting.
//!
//! Per step and resource `n` (all sums in slot-index order):
//!
//! ```text
//! g_n = alpha * s_n * (eps/alpha - s_n)        (= eps s_n - alpha s_n^2)
//! A_n = max(0, s_n + dt g_n)                   available after growth
//! D_n = sum_m w(x_n, x_m)                      demand of active agents
//! E_n = min(dt D_n, A_n)                       extracted
//! s_n' = A_n - E_n
//! ```
//!
//! Agent `m` receives `dt w(x_n, x_m) * E_n / (dt D_n)` from each resource, so
//! oversubscribed resources are shared in proportion to demand and what
//! leaves the resources is exactly what the agents are credited.

use crate::geometry::{Vec2, WorldGeometry};
use crate::grid::CellGrid;
use crate::model::{AgentSet, ResourceSet};
use crate::par::*;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarvestKernel {
    /// Peak rate `c` at zero distance.
    pub gain: f64,
    /// Distance `sigma` at which the rate halves.
    pub scale: f64,
    /// Rate is zero beyond this distance.
    pub cutoff: f64,
}

impl HarvestKernel {
    /// `c / (1 + d^2/sigma^2)` for `d^2 <= R^2`, else 0.
    #[inline]
    pub fn rate_at_sq(&self, d2: f64) -> f64 {
        if d2 <= self.cutoff * self.cutoff {
            self.gain / (1.0 + d2 / (self.scale * self.scale))
        } else {
            0.0
        }
    }
}

/// Harvest rate of an agent at `agent` on a resource at `resource`.
pub fn harvest_rate(resource: Vec2, agent: Vec2, kernel: &HarvestKernel, world: &WorldGeometry) -> f64 {
    kernel.rate_at_sq(world.displacement(resource, agent).norm_sq())
}

#[derive(Clone, Debug, PartialEq)]
pub struct HarvestReport {
    /// Resource units credited to each agent slot this step.
    pub per_agent: Vec<f64>,
    /// Resource units extracted from each resource slot this step.
    pub per_resource: Vec<f64>,
    /// Sum of `per_resource` in slot order.
    pub total_extracted: f64,
}

impl HarvestReport {
    /// Sum of `per_agent` in slot order.
    pub fn total_credited(&self) -> f64 {
        self.per_agent.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResourceDynamics {
    pub epsilon: f64,
    pub alpha: f64,
    pub kernel: HarvestKernel,
}

/// Advances every resource by one step and reports the transfer to agents.
pub fn resource_step(
    resources: &mut ResourceSet,
    agents: &AgentSet,
    dynamics: &ResourceDynamics,
    world: &WorldGeometry,
    dt: f64,
) -> HarvestReport {
    let kernel = dynamics.kernel;
    let capacity_k = dynamics.epsilon / dynamics.alpha;
    let agent_pos = agents.position();
    let agent_active = agents.active();

    // Per resource: (extracted, fraction of demand served).
    let mut rows = vec![(0.0, 0.0); resources.capacity()];
    let agent_grid = CellGrid::build(agent_pos, |m| agent_active[m], world, kernel.cutoff);
    {
        let res_active = &resources.active;
        let res_pos = &resources.position;
        resources
            .value
            .par_iter_mut()
            .zip(rows.par_iter_mut())
            .enumerate()
            .for_each(|(n, (s, row))| {
                if !res_active[n] {
                    return;
                }
                let xn = res_pos[n];
                let mut demand = 0.0;
                let mut add = |m: usize| {
                    if agent_active[m] {
                        demand += kernel.rate_at_sq(world.displacement(xn, agent_pos[m]).norm_sq());
                    }
                };
                match &agent_grid {
                    Some(grid) => {
                        let mut near = Vec::new();
                        grid.candidates(xn, &mut near);
                        near.into_iter().for_each(&mut add);
                    }
                    None => (0..agent_pos.len()).for_each(&mut add),
                }
                let growth = dynamics.alpha * *s * (capacity_k - *s);
                let available = (*s + dt * growth).max(0.0);
                let wanted = dt * demand;
                let (extracted, served) = if wanted <= available {
                    (wanted, 1.0)
                } else {
                    (available, available / wanted)
                };
                *s = available - extracted;
                *row = (extracted, served);
            });
    }

    let mut per_agent = vec![0.0; agents.capacity()];
    let res_active = &resources.active;
    let res_pos = &resources.position;
    let res_grid = CellGrid::build(res_pos, |n| res_active[n], world, kernel.cutoff);
    per_agent.par_iter_mut().enumerate().for_each(|(m, credit)| {
        if !agent_active[m] {
            return;
        }
        let xm = agent_pos[m];
        let mut total = 0.0;
        let mut add = |n: usize| {
            let served = rows[n].1;
            if res_active[n] && served > 0.0 {
                total += dt * kernel.rate_at_sq(world.displacement(res_pos[n], xm).norm_sq()) * served;
            }
        };
        match &res_grid {
            Some(grid) => {
                let mut near = Vec::new();
                grid.candidates(xm, &mut near);
                near.into_iter().for_each(&mut add);
            }
            None => (0..res_pos.len()).for_each(&mut add),
        }
        *credit = total;
    });

    let per_resource: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let total_extracted = per_resource.iter().sum();
    HarvestReport {
        per_agent,
        per_resource,
        total_extracted,
    }
}

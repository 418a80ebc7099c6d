//! Browser bindings: a small live simulation plus two pure helpers for
//! plotting the harvest kernel and the agent-free resource trajectory.

use forage_core::engine::{self, SimState};
use forage_core::resources::HarvestKernel;
use forage_core::{BoundaryMode, SimConfig};
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// A running simulation held on the wasm side.
#[wasm_bindgen]
pub struct Demo {
    config: SimConfig,
    state: SimState,
}

#[wasm_bindgen]
impl Demo {
    /// Builds a scenario on a `size x size` world. `boundary` is one of
    /// `periodic`, `reflective`, `clamped`.
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, agents: u32, resources: u32, size: f64, boundary: &str) -> Result<Demo, JsError> {
        let boundary_mode = match boundary {
            "periodic" => BoundaryMode::Periodic,
            "reflective" => BoundaryMode::Reflective,
            "clamped" => BoundaryMode::Clamped,
            other => return Err(JsError::new(&format!("unknown boundary mode {other:?}"))),
        };
        let config = SimConfig {
            seed: seed as u64,
            world_extent: [size, size],
            boundary_mode,
            max_agents: (agents as usize).max(1) * 2,
            initial_agents: Some(agents as usize),
            max_resources: (resources as usize).max(1),
            initial_resources: Some(resources as usize),
            n_neurons: 16,
            ..SimConfig::default()
        };
        Self::from_config(config)
    }

    /// Builds a scenario from config text in the CLI's format.
    #[wasm_bindgen(js_name = fromConfig)]
    pub fn from_config_text(text: &str) -> Result<Demo, JsError> {
        Self::from_config(SimConfig::from_toml_str(text).map_err(js_err)?)
    }

    fn from_config(config: SimConfig) -> Result<Demo, JsError> {
        config.validate().map_err(js_err)?;
        let state = SimState::new(&config).map_err(js_err)?;
        Ok(Demo { config, state })
    }

    /// Advances `n` steps.
    pub fn advance(&mut self, n: u32) -> Result<(), JsError> {
        for _ in 0..n {
            engine::step_with(&mut self.state, &self.config, false).map_err(js_err)?;
        }
        Ok(())
    }

    pub fn step_index(&self) -> f64 {
        self.state.step as f64
    }

    pub fn world_size(&self) -> Vec<f64> {
        self.config.world_extent.to_vec()
    }

    pub fn carrying_capacity(&self) -> f64 {
        self.config.carrying_capacity()
    }

    /// Active agents as `[x, y, vx, vy, energy]` records, flattened.
    pub fn agents(&self) -> Vec<f64> {
        let a = &self.state.agents;
        a.active_slots()
            .flat_map(|s| {
                let (p, v) = (a.position()[s], a.velocity()[s]);
                [p.x, p.y, v.x, v.y, a.energy()[s]]
            })
            .collect()
    }

    /// Active resources as `[x, y, value]` records, flattened.
    pub fn resources(&self) -> Vec<f64> {
        let r = &self.state.resources;
        (0..r.capacity())
            .filter(|&n| r.active()[n])
            .flat_map(|n| [r.position()[n].x, r.position()[n].y, r.value()[n]])
            .collect()
    }

    /// `[active agents, total resource, births, deaths, total harvested]`.
    pub fn stats(&self) -> Vec<f64> {
        let s = &self.state.stats;
        vec![
            self.state.agents.active_count() as f64,
            self.state.resources.total_value(),
            s.births as f64,
            s.deaths as f64,
            s.total_harvested,
        ]
    }
}

/// Harvest rate `gain / (1 + d^2 / scale^2)` (zero beyond `cutoff`) sampled
/// at `samples` distances evenly spaced over `[0, max_distance]`.
#[wasm_bindgen]
pub fn kernel_profile(gain: f64, scale: f64, cutoff: f64, max_distance: f64, samples: u32) -> Vec<f64> {
    let k = HarvestKernel { gain, scale, cutoff };
    let n = samples.max(2) as usize;
    (0..n)
        .map(|i| {
            let d = max_distance * i as f64 / (n - 1) as f64;
            k.rate_at_sq(d * d)
        })
        .collect()
}

/// Resource value of a single agent-free resource over `steps` steps of
/// logistic growth, starting from `s0` (`steps + 1` values).
#[wasm_bindgen]
pub fn logistic_trajectory(epsilon: f64, alpha: f64, s0: f64, dt: f64, steps: u32) -> Vec<f64> {
    let mut s = s0.max(0.0);
    let k = epsilon / alpha;
    let mut out = Vec::with_capacity(steps as usize + 1);
    out.push(s);
    for _ in 0..steps {
        s = (s + dt * alpha * s * (k - s)).max(0.0);
        out.push(s);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_steps_and_reports() {
        let mut d = Demo::new(1, 20, 10, 50.0, "periodic").ok().unwrap();
        assert_eq!(d.agents().len(), 20 * 5);
        assert_eq!(d.resources().len(), 10 * 3);
        d.advance(5).ok().unwrap();
        assert_eq!(d.step_index(), 5.0);
        assert_eq!(d.stats().len(), 5);
    }

    #[test]
    fn kernel_profile_endpoints() {
        let p = kernel_profile(2.0, 1.0, 3.0, 4.0, 5);
        assert_eq!(p, vec![2.0, 1.0, 0.4, 0.2, 0.0]);
    }

    #[test]
    fn logistic_trajectory_settles_at_capacity() {
        let t = logistic_trajectory(0.5, 0.005, 1.0, 0.1, 20_000);
        assert!((t.last().unwrap() - 100.0).abs() < 1e-9);
        assert!(t.windows(2).all(|w| w[1] >= w[0]));
    }
}

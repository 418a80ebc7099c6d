//! Scenario configuration: a flat TOML document whose keys are exactly the
//! fields of [`SimConfig`]. Absent keys take the defaults documented in
//! `docs/config.md`; unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ForageError, Result};
use crate::evolution::EvolutionConfig;
use crate::geometry::{BoundaryMode, Segment, Vec2, WorldGeometry};
use crate::policy::PolicyLayout;
use crate::resources::HarvestKernel;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverflowPolicy {
    Strict,
    #[default]
    DropAndCount,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub n_steps: u64,
    pub world_extent: [f64; 2],
    pub boundary_mode: BoundaryMode,
    /// Interior wall segments as `[x1, y1, x2, y2]`.
    pub walls: Vec<[f64; 4]>,
    pub max_agents: usize,
    pub max_resources: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_agents: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_resources: Option<usize>,
    pub n_neurons: usize,
    pub n_rays: usize,
    pub ray_max_range: f64,
    pub tau: f64,
    pub policy_gain: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub kernel_gain: f64,
    pub kernel_scale: f64,
    pub kernel_cutoff: f64,
    pub harvest_efficiency: f64,
    pub metabolic_cost: f64,
    pub move_cost: f64,
    /// Speed limit applied after each velocity update; `inf` disables it.
    pub max_speed: f64,
    pub init_energy: f64,
    pub reproduce_threshold: f64,
    pub offspring_energy_fraction: f64,
    pub mutation_std: f64,
    pub es_pop_size: usize,
    pub es_generations: usize,
    pub es_sigma: f64,
    pub es_learning_rate: f64,
    pub seed: u64,
    pub overflow_policy: OverflowPolicy,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 0.1,
            n_steps: 1000,
            world_extent: [100.0, 100.0],
            boundary_mode: BoundaryMode::Reflective,
            walls: Vec::new(),
            max_agents: 1000,
            max_resources: 300,
            initial_agents: None,
            initial_resources: None,
            n_neurons: 50,
            n_rays: 8,
            ray_max_range: 10.0,
            tau: 1.0,
            policy_gain: 1.0,
            epsilon: 0.5,
            alpha: 0.005,
            kernel_gain: 1.0,
            kernel_scale: 1.0,
            kernel_cutoff: 5.0,
            harvest_efficiency: 0.5,
            metabolic_cost: 0.1,
            move_cost: 0.01,
            max_speed: f64::INFINITY,
            init_energy: 10.0,
            reproduce_threshold: 20.0,
            offspring_energy_fraction: 0.5,
            mutation_std: 0.02,
            es_pop_size: 32,
            es_generations: 200,
            es_sigma: 0.1,
            es_learning_rate: 0.02,
            seed: 0,
            overflow_policy: OverflowPolicy::DropAndCount,
        }
    }
}

impl SimConfig {
    /// Parses and validates a config document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: SimConfig = toml::from_str(text).map_err(|e| ForageError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ForageError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("a validated config always serializes")
    }

    /// Copy with every optional field resolved to its effective value.
    pub fn effective(&self) -> SimConfig {
        SimConfig {
            initial_agents: Some(self.initial_agents()),
            initial_resources: Some(self.initial_resources()),
            ..self.clone()
        }
    }

    pub fn initial_agents(&self) -> usize {
        self.initial_agents.unwrap_or(self.max_agents)
    }

    pub fn initial_resources(&self) -> usize {
        self.initial_resources.unwrap_or(self.max_resources)
    }

    /// SHA-256 of the canonical serialized form.
    pub fn hash(&self) -> [u8; 32] {
        Sha256::digest(self.to_toml_string().as_bytes()).into()
    }

    pub fn world(&self) -> WorldGeometry {
        let walls = self
            .walls
            .iter()
            .map(|w| Segment::new(Vec2::new(w[0], w[1]), Vec2::new(w[2], w[3])))
            .collect();
        WorldGeometry::new(
            Vec2::new(self.world_extent[0], self.world_extent[1]),
            self.boundary_mode,
            walls,
        )
    }

    pub fn kernel(&self) -> HarvestKernel {
        HarvestKernel {
            gain: self.kernel_gain,
            scale: self.kernel_scale,
            cutoff: self.kernel_cutoff,
        }
    }

    pub fn policy_layout(&self) -> PolicyLayout {
        PolicyLayout::new(self.n_neurons, crate::sensors::obs_dim(self.n_rays), 2)
    }

    pub fn evolution(&self) -> EvolutionConfig {
        EvolutionConfig {
            mutation_std: self.mutation_std,
            reproduce_threshold: self.reproduce_threshold,
            offspring_energy_fraction: self.offspring_energy_fraction,
            es_pop_size: self.es_pop_size,
            es_generations: self.es_generations,
            es_sigma: self.es_sigma,
            es_learning_rate: self.es_learning_rate,
        }
    }

    /// Carrying capacity `epsilon / alpha` of an agent-free resource.
    pub fn carrying_capacity(&self) -> f64 {
        self.epsilon / self.alpha
    }

    pub fn validate(&self) -> Result<()> {
        use ForageError as E;

        fn finite(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(E::validation(field, format!("must be finite, got {v}")))
            }
        }
        fn positive(field: &'static str, v: f64) -> Result<()> {
            finite(field, v)?;
            if v > 0.0 {
                Ok(())
            } else {
                Err(E::validation(field, format!("must be > 0, got {v}")))
            }
        }
        fn non_negative(field: &'static str, v: f64) -> Result<()> {
            finite(field, v)?;
            if v >= 0.0 {
                Ok(())
            } else {
                Err(E::validation(field, format!("must be >= 0, got {v}")))
            }
        }
        fn at_least_one(field: &'static str, v: usize) -> Result<()> {
            if v >= 1 {
                Ok(())
            } else {
                Err(E::validation(field, "must be >= 1"))
            }
        }

        positive("dt", self.dt)?;
        positive("world_extent", self.world_extent[0])?;
        positive("world_extent", self.world_extent[1])?;
        for (i, w) in self.walls.iter().enumerate() {
            if w.iter().any(|v| !v.is_finite()) {
                return Err(E::validation("walls", format!("segment {i} has a non-finite endpoint")));
            }
            if w[0] == w[2] && w[1] == w[3] {
                return Err(E::validation("walls", format!("segment {i} has identical endpoints")));
            }
        }
        at_least_one("max_agents", self.max_agents)?;
        at_least_one("max_resources", self.max_resources)?;
        if self.initial_agents() > self.max_agents {
            return Err(E::validation("initial_agents", "must not exceed max_agents"));
        }
        if self.initial_resources() > self.max_resources {
            return Err(E::validation("initial_resources", "must not exceed max_resources"));
        }
        at_least_one("n_neurons", self.n_neurons)?;
        positive("ray_max_range", self.ray_max_range)?;
        positive("tau", self.tau)?;
        non_negative("policy_gain", self.policy_gain)?;
        non_negative("epsilon", self.epsilon)?;
        positive("alpha", self.alpha)?;
        non_negative("kernel_gain", self.kernel_gain)?;
        positive("kernel_scale", self.kernel_scale)?;
        non_negative("kernel_cutoff", self.kernel_cutoff)?;
        non_negative("harvest_efficiency", self.harvest_efficiency)?;
        if self.harvest_efficiency > 1.0 {
            return Err(E::validation("harvest_efficiency", "must be in [0, 1]"));
        }
        non_negative("metabolic_cost", self.metabolic_cost)?;
        non_negative("move_cost", self.move_cost)?;
        if self.max_speed.is_nan() || self.max_speed <= 0.0 {
            return Err(E::validation("max_speed", "must be > 0 (inf disables the limit)"));
        }
        finite("init_energy", self.init_energy)?;
        positive("reproduce_threshold", self.reproduce_threshold)?;
        finite("offspring_energy_fraction", self.offspring_energy_fraction)?;
        if !(self.offspring_energy_fraction > 0.0 && self.offspring_energy_fraction < 1.0) {
            return Err(E::validation("offspring_energy_fraction", "must be in (0, 1)"));
        }
        non_negative("mutation_std", self.mutation_std)?;
        if self.es_pop_size < 2 || self.es_pop_size % 2 != 0 {
            return Err(E::validation("es_pop_size", "must be even and >= 2 (mirrored sampling)"));
        }
        at_least_one("es_generations", self.es_generations)?;
        non_negative("es_sigma", self.es_sigma)?;
        positive("es_learning_rate", self.es_learning_rate)?;
        if self.seed > i64::MAX as u64 {
            return Err(E::validation("seed", "must be < 2^63"));
        }
        Ok(())
    }
}

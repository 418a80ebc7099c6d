//! Gradient-free adaptation: continual birth/death with mutation, and an
//! offline mirrored-sampling evolution strategy.

use crate::config::{OverflowPolicy, SimConfig};
use crate::error::{ForageError, Result};
use crate::geometry::Vec2;
use crate::model::AgentSet;
use crate::par::*;
use crate::rng::{self, Phase};
use crate::set_ops::{self, SlotMask, SpawnBatch};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionConfig {
    pub mutation_std: f64,
    pub reproduce_threshold: f64,
    pub offspring_energy_fraction: f64,
    pub es_pop_size: usize,
    pub es_generations: usize,
    pub es_sigma: f64,
    pub es_learning_rate: f64,
}

/// Gaussian perturbation `params + std * xi`. The component at `tau_index`
/// is then clamped to at least `min_tau`.
pub fn mutate(params: &[f64], std: f64, tau_index: usize, min_tau: f64, rng: &mut impl rand::Rng) -> Vec<f64> {
    let mut child: Vec<f64> = if std == 0.0 {
        params.to_vec()
    } else {
        params.iter().map(|&p| p + std * rng::normal(rng)).collect()
    };
    if let Some(tau) = child.get_mut(tau_index) {
        *tau = tau.max(min_tau);
    }
    child
}

/// Birth/death rules applied once per step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PopulationRules {
    pub reproduce_threshold: f64,
    pub offspring_energy_fraction: f64,
    pub mutation_std: f64,
    /// Lower bound for a mutated policy time constant.
    pub min_tau: f64,
    pub overflow_policy: OverflowPolicy,
}

impl PopulationRules {
    pub fn from_config(config: &SimConfig) -> Self {
        PopulationRules {
            reproduce_threshold: config.reproduce_threshold,
            offspring_energy_fraction: config.offspring_energy_fraction,
            mutation_std: config.mutation_std,
            min_tau: config.dt,
            overflow_policy: config.overflow_policy,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PopulationReport {
    pub deaths: usize,
    pub births: usize,
    /// Spawns that found no free slot.
    pub dropped: usize,
    /// Energy held by the agents that died, summed in slot order.
    pub dead_energy: f64,
}

/// Deaths, then births.
///
/// Agents with energy `<= 0` are removed. Every surviving agent with energy
/// `>= reproduce_threshold` then spawns one child at its own position with
/// zero velocity, zero policy state and mutated parameters (stream
/// `(seed, step, Birth, parent_slot)`). The child takes
/// `offspring_energy_fraction` of the parent's energy; parents whose child was
/// dropped for lack of space keep all of theirs.
pub fn step_population(agents: &mut AgentSet, rules: &PopulationRules, seed: u64, step: u64) -> Result<PopulationReport> {
    let mut report = PopulationReport::default();

    let dead = SlotMask::from_vec(
        (0..agents.capacity())
            .map(|s| agents.is_active(s) && agents.energy()[s] <= 0.0)
            .collect(),
    );
    report.deaths = dead.count();
    report.dead_energy = (0..agents.capacity())
        .filter(|&s| dead.as_slice()[s])
        .map(|s| agents.energy()[s])
        .sum();
    set_ops::remove(agents, &dead);

    let parents: Vec<usize> = agents
        .active_slots()
        .filter(|&s| agents.energy()[s] >= rules.reproduce_threshold)
        .collect();
    if parents.is_empty() {
        return Ok(report);
    }

    // Spawns beyond the free capacity are rejected by `add` anyway; skip
    // building them, since mutation dominates the cost of a crowded step.
    let free = agents.free_slots();
    if parents.len() > free && rules.overflow_policy == OverflowPolicy::Strict {
        return Err(ForageError::Capacity {
            requested: parents.len(),
            free,
        });
    }
    let rejected = parents.len().saturating_sub(free);
    agents.overflow_count += rejected as u64;

    let tau_index = agents.param_len() - 1;
    let mut batch = SpawnBatch::new(agents.capacity(), agents.n_neurons(), agents.param_len());
    let mut child_energy = Vec::with_capacity(parents.len());
    for &parent in parents.iter().take(free) {
        let mut rng = rng::stream(seed, step, Phase::Birth, parent as u64);
        let params = mutate(agents.params(parent), rules.mutation_std, tau_index, rules.min_tau, &mut rng);
        let energy = rules.offspring_energy_fraction * agents.energy()[parent];
        batch.push(agents.position()[parent], Vec2::ZERO, energy, &params)?;
        child_energy.push(energy);
    }
    let accepted = set_ops::add(agents, &batch, rules.overflow_policy)?;
    for (&parent, &child) in parents.iter().zip(&child_energy).take(accepted) {
        let e = &mut agents.energy_mut()[parent];
        *e -= child;
    }
    report.births = accepted;
    report.dropped = parents.len() - accepted;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EsGeneration {
    pub generation: usize,
    /// Fitness at the search mean before this generation's update.
    pub center_fitness: f64,
    /// Mean fitness of the perturbed population.
    pub mean_fitness: f64,
    /// Best fitness among the perturbed population.
    pub max_fitness: f64,
    /// Best fitness seen so far, including this generation.
    pub best_fitness: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EsOutcome {
    pub best_params: Vec<f64>,
    pub best_fitness: f64,
    pub history: Vec<EsGeneration>,
    /// Search mean before the first and after every generation.
    pub means: Vec<Vec<f64>>,
}

impl EsOutcome {
    pub fn final_mean(&self) -> &[f64] {
        self.means.last().expect("means always holds the initial point")
    }
}

/// Centered ranks in `[-0.5, 0.5]`; tied values share their average rank.
pub fn centered_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]].total_cmp(&values[order[start]]).is_eq() {
            end += 1;
        }
        let avg = (start + end - 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg / (n - 1) as f64 - 0.5;
        }
        start = end;
    }
    ranks
}

/// Maximizes `objective` with mirrored-sampling evolution strategies.
///
/// Each generation draws `pop/2` directions `xi_i` (stream
/// `(seed, generation, Evolution, i)`), evaluates `f(mu + sigma xi_i)` and
/// `f(mu - sigma xi_i)`, converts the `pop` fitnesses to centered ranks `w`
/// and ascends `mu += lr * sum_i (w_i+ - w_i-) xi_i / (pop * sigma)`.
/// Because only ranks enter the update, the trajectory of `mu` is unchanged
/// by any strictly increasing transform of the objective.
pub fn es_train<F>(objective: F, init: &[f64], config: &EvolutionConfig, seed: u64) -> Result<EsOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let pop = config.es_pop_size;
    if pop < 2 || pop % 2 != 0 {
        return Err(ForageError::validation("es_pop_size", "must be even and >= 2 (mirrored sampling)"));
    }
    let half = pop / 2;
    let sigma = config.es_sigma;
    let dim = init.len();

    let mut mean = init.to_vec();
    let mut means = vec![mean.clone()];
    let mut history = Vec::with_capacity(config.es_generations);
    let mut best_params = mean.clone();
    let mut best_fitness = f64::NEG_INFINITY;

    for generation in 0..config.es_generations {
        let center_fitness = objective(&mean);
        if !center_fitness.is_finite() {
            return Err(ForageError::NonFiniteFitness { generation });
        }
        if center_fitness > best_fitness {
            best_fitness = center_fitness;
            best_params.clone_from(&mean);
        }

        let noise: Vec<Vec<f64>> = (0..half)
            .map(|i| {
                let mut rng = rng::stream(seed, generation as u64, Phase::Evolution, i as u64);
                (0..dim).map(|_| rng::normal(&mut rng)).collect()
            })
            .collect();
        let perturbed = |xi: &[f64], sign: f64| -> Vec<f64> {
            mean.iter().zip(xi).map(|(m, x)| m + sign * sigma * x).collect()
        };
        let fitness: Vec<(f64, f64)> = noise
            .par_iter()
            .map(|xi| (objective(&perturbed(xi, 1.0)), objective(&perturbed(xi, -1.0))))
            .collect();
        if fitness.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(ForageError::NonFiniteFitness { generation });
        }

        let flat: Vec<f64> = fitness.iter().flat_map(|&(a, b)| [a, b]).collect();
        for (k, &f) in flat.iter().enumerate() {
            if f > best_fitness {
                best_fitness = f;
                best_params = perturbed(&noise[k / 2], if k % 2 == 0 { 1.0 } else { -1.0 });
            }
        }

        if sigma > 0.0 {
            let ranks = centered_ranks(&flat);
            let mut grad = vec![0.0; dim];
            for (i, xi) in noise.iter().enumerate() {
                let w = ranks[2 * i] - ranks[2 * i + 1];
                for (g, x) in grad.iter_mut().zip(xi) {
                    *g += w * x;
                }
            }
            let scale = config.es_learning_rate / (pop as f64 * sigma);
            for (m, g) in mean.iter_mut().zip(&grad) {
                *m += scale * g;
            }
        }
        means.push(mean.clone());

        history.push(EsGeneration {
            generation,
            center_fitness,
            mean_fitness: flat.iter().sum::<f64>() / pop as f64,
            max_fitness: flat.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            best_fitness,
        });
    }

    Ok(EsOutcome {
        best_params,
        best_fitness,
        history,
        means,
    })
}

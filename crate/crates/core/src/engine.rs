//! Step composition, the run loop and benchmarking.
//!
//! One step runs these phases in order, each reading the output of the
//! previous one:
//!
//! 1. observe
//! 2. policy update, producing accelerations
//! 3. integrate
//! 4. boundary enforcement
//! 5. resource regrowth and harvest (at post-movement positions)
//! 6. energy: `E' = E + eta * harvest - dt * (metabolic_cost + move_cost * |u|)`
//! 7. deaths, then births
//! 8. statistics
//!
//! Every cross-slot sum runs in slot-index order and every random draw comes
//! from a stream keyed by `(seed, step, phase, slot)`, so a trajectory depends
//! only on the config, never on the worker count.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::checkpoint;
use crate::config::SimConfig;
use crate::dynamics;
use crate::error::{ForageError, Result};
use crate::evolution::{self, PopulationRules};
use crate::geometry::WorldGeometry;
use crate::model::{self, AgentSet, ResourceSet};
use crate::policy;
use crate::records::{self, StepRecord};
use crate::resources::{self, ResourceDynamics};
use crate::sensors::{self, SensorConfig};

/// Cumulative counters since the start of the run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunStats {
    pub births: u64,
    pub deaths: u64,
    /// Spawns dropped for lack of capacity.
    pub dropped: u64,
    /// Resource units extracted by agents.
    pub total_harvested: f64,
    /// Agent energy credited from harvesting (`eta` times the per-agent harvest).
    pub harvest_energy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    /// Number of completed steps.
    pub step: u64,
    pub seed: u64,
    pub agents: AgentSet,
    pub resources: ResourceSet,
    pub world: WorldGeometry,
    pub stats: RunStats,
}

impl SimState {
    pub fn new(config: &SimConfig) -> Result<Self> {
        let (agents, resources, world) = model::state_init(config)?;
        Ok(SimState {
            step: 0,
            seed: config.seed,
            agents,
            resources,
            world,
            stats: RunStats::default(),
        })
    }
}

/// Checks every invariant the constant-shape contract promises.
pub fn audit(state: &SimState, phase: &str) -> Result<()> {
    let a = &state.agents;
    let expected = AgentSet::expected_shape(a.capacity(), a.n_neurons(), a.param_len());
    if a.shape() != expected {
        return Err(ForageError::Audit(format!("{phase}: agent shape changed to {:?}", a.shape())));
    }
    if let Some(&slot) = a.padding_violations().first() {
        return Err(ForageError::Audit(format!("{phase}: inactive agent slot {slot} is not zero")));
    }
    let r = &state.resources;
    if r.shape() != [r.capacity(); 3] {
        return Err(ForageError::Audit(format!("{phase}: resource shape changed to {:?}", r.shape())));
    }
    if let Some(&slot) = r.padding_violations().first() {
        return Err(ForageError::Audit(format!("{phase}: inactive resource slot {slot} is not zero")));
    }
    if let Some(n) = r.value().iter().position(|&s| !(s >= 0.0)) {
        return Err(ForageError::Audit(format!("{phase}: resource {n} has value {}", r.value()[n])));
    }
    let mut seen = std::collections::HashSet::new();
    for slot in a.active_slots() {
        let uid = a.uid()[slot];
        if uid == 0 || uid >= a.next_uid() || !seen.insert(uid) {
            return Err(ForageError::Audit(format!("{phase}: bad uid {uid} in slot {slot}")));
        }
    }
    Ok(())
}

fn audit_containment(state: &SimState, phase: &str) -> Result<()> {
    for slot in state.agents.active_slots() {
        let p = state.agents.position()[slot];
        if !state.world.contains(p) {
            return Err(ForageError::Audit(format!(
                "{phase}: agent uid {} at ({}, {}) is outside the world",
                state.agents.uid()[slot],
                p.x,
                p.y
            )));
        }
    }
    Ok(())
}

/// Advances one step. Audits the state after every phase in debug builds.
pub fn step(state: &mut SimState, config: &SimConfig) -> Result<StepRecord> {
    step_with(state, config, cfg!(debug_assertions))
}

pub fn step_with(state: &mut SimState, config: &SimConfig, audit_phases: bool) -> Result<StepRecord> {
    let clock = Clock::start();
    let index = state.step;
    let dt = config.dt;
    let layout = config.policy_layout();
    let check = |state: &SimState, phase: &str| if audit_phases { audit(state, phase) } else { Ok(()) };

    let sensors = SensorConfig {
        n_rays: config.n_rays,
        max_range: config.ray_max_range,
        kernel: config.kernel(),
    };
    let obs = sensors::observe(&state.agents, &state.resources, &state.world, &sensors);

    let controls = policy::step_batch(&mut state.agents, layout, &obs, dt, index)?;
    check(state, "policy")?;

    dynamics::integrate(&mut state.agents, &controls, dt, config.max_speed, index)?;
    dynamics::apply_boundary(&mut state.agents, &state.world);
    check(state, "motion")?;
    if audit_phases {
        audit_containment(state, "boundary")?;
    }

    let dynamics = ResourceDynamics {
        epsilon: config.epsilon,
        alpha: config.alpha,
        kernel: config.kernel(),
    };
    let harvest = resources::resource_step(&mut state.resources, &state.agents, &dynamics, &state.world, dt);
    check(state, "harvest")?;

    let eta = config.harvest_efficiency;
    let mut credited = 0.0;
    for slot in 0..state.agents.capacity() {
        if !state.agents.is_active(slot) {
            continue;
        }
        let gain = eta * harvest.per_agent[slot];
        credited += gain;
        let cost = dt * (config.metabolic_cost + config.move_cost * controls[slot].norm());
        let e = &mut state.agents.energy_mut()[slot];
        *e += gain - cost;
        if !e.is_finite() {
            return Err(ForageError::NonFinite {
                what: "energy",
                uid: state.agents.uid()[slot],
                step: index,
            });
        }
    }

    let population = evolution::step_population(
        &mut state.agents,
        &PopulationRules::from_config(config),
        state.seed,
        index,
    )?;
    check(state, "population")?;

    state.step += 1;
    state.stats.births += population.births as u64;
    state.stats.deaths += population.deaths as u64;
    state.stats.dropped += population.dropped as u64;
    state.stats.total_harvested += harvest.total_extracted;
    state.stats.harvest_energy += credited;

    let mut record = StepRecord::observe(state);
    record.births = population.births as u64;
    record.deaths = population.deaths as u64;
    record.dropped = population.dropped as u64;
    record.harvested = harvest.total_extracted;
    record.seconds = clock.elapsed();
    Ok(record)
}

/// Where and how often a run writes its artifacts.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SinkConfig {
    pub out_dir: Option<PathBuf>,
    /// Emit a record every this many steps; 0 disables records.
    pub record_every: u64,
    /// Emit a frame every this many steps, starting at step 0; 0 disables frames.
    pub frame_every: u64,
    /// Write `checkpoint.bin` after the last step.
    pub checkpoint: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub state: SimState,
    pub records: Vec<StepRecord>,
}

pub const RECORDS_FILE: &str = "records.csv";
pub const TIMING_FILE: &str = "timing.csv";
pub const FRAMES_DIR: &str = "frames";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";

/// Runs `config.n_steps` steps from the initial state.
pub fn run(config: &SimConfig, sinks: &SinkConfig) -> Result<RunOutcome> {
    let state = SimState::new(config)?;
    run_from(state, config, sinks, config.n_steps)
}

/// Continues `state` for `steps` more steps. The state is never reset.
///
/// A record aggregates births, deaths, drops and harvest over the steps since
/// the previous record.
pub fn run_from(mut state: SimState, config: &SimConfig, sinks: &SinkConfig, steps: u64) -> Result<RunOutcome> {
    let mut out = match &sinks.out_dir {
        Some(dir) => Some(RunFiles::create(dir, sinks.frame_every > 0)?),
        None => None,
    };
    let mut records = Vec::new();

    if let Some(files) = out.as_mut() {
        if sinks.frame_every > 0 && state.step % sinks.frame_every == 0 {
            files.frame(&state, sinks.frame_every)?;
        }
    }

    let mut pending = StepRecord::default();
    for _ in 0..steps {
        let rec = step(&mut state, config)?;
        pending.births += rec.births;
        pending.deaths += rec.deaths;
        pending.dropped += rec.dropped;
        pending.harvested += rec.harvested;
        pending.seconds += rec.seconds;

        if sinks.record_every > 0 && state.step % sinks.record_every == 0 {
            let record = StepRecord {
                births: pending.births,
                deaths: pending.deaths,
                dropped: pending.dropped,
                harvested: pending.harvested,
                seconds: pending.seconds,
                ..rec
            };
            pending = StepRecord::default();
            if let Some(files) = out.as_mut() {
                files.record(&record)?;
            }
            records.push(record);
        }
        if let Some(files) = out.as_mut() {
            if sinks.frame_every > 0 && state.step % sinks.frame_every == 0 {
                files.frame(&state, sinks.frame_every)?;
            }
        }
    }

    if let Some(files) = out.as_mut() {
        files.finish()?;
        if sinks.checkpoint {
            checkpoint::save(&files.dir.join(CHECKPOINT_FILE), &state, config)?;
        }
    }
    Ok(RunOutcome { state, records })
}

struct RunFiles {
    dir: PathBuf,
    records: BufWriter<File>,
    timing: BufWriter<File>,
}

impl RunFiles {
    fn create(dir: &Path, frames: bool) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| ForageError::io(dir, e))?;
        if frames {
            let frames_dir = dir.join(FRAMES_DIR);
            fs::create_dir_all(&frames_dir).map_err(|e| ForageError::io(&frames_dir, e))?;
        }
        let open = |name: &str, header: &str| -> Result<BufWriter<File>> {
            let path = dir.join(name);
            let mut w = BufWriter::new(File::create(&path).map_err(|e| ForageError::io(&path, e))?);
            writeln!(w, "{header}").map_err(|e| ForageError::io(&path, e))?;
            Ok(w)
        };
        Ok(RunFiles {
            dir: dir.to_path_buf(),
            records: open(RECORDS_FILE, records::RECORD_HEADER)?,
            timing: open(TIMING_FILE, records::TIMING_HEADER)?,
        })
    }

    fn record(&mut self, record: &StepRecord) -> Result<()> {
        let dir = &self.dir;
        writeln!(self.records, "{}", record.csv_row()).map_err(|e| ForageError::io(dir.join(RECORDS_FILE), e))?;
        writeln!(self.timing, "{},{}", record.step, record.seconds).map_err(|e| ForageError::io(dir.join(TIMING_FILE), e))
    }

    fn frame(&mut self, state: &SimState, every: u64) -> Result<()> {
        let path = self.dir.join(FRAMES_DIR).join(records::frame_file_name(state.step / every));
        records::write_frame(&path, state)
    }

    fn finish(&mut self) -> Result<()> {
        self.records
            .flush()
            .map_err(|e| ForageError::io(self.dir.join(RECORDS_FILE), e))?;
        self.timing
            .flush()
            .map_err(|e| ForageError::io(self.dir.join(TIMING_FILE), e))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchReport {
    pub warmup_steps: u64,
    pub measured_steps: u64,
    pub seconds: f64,
    pub steps_per_sec: f64,
    pub agent_steps_per_sec: f64,
    pub mean_active_agents: f64,
    /// Projected wall time of a 10^6-step run at the measured rate.
    pub extrapolated_seconds_1e6: f64,
    /// False when nothing was measured.
    pub valid: bool,
}

/// Times `n_steps` engine steps after `warmup` untimed ones, with no I/O and
/// no auditing.
pub fn bench(config: &SimConfig, n_steps: u64, warmup: u64) -> Result<BenchReport> {
    let mut state = SimState::new(config)?;
    for _ in 0..warmup {
        step_with(&mut state, config, false)?;
    }
    let mut agent_steps = 0u64;
    let clock = Clock::start();
    for _ in 0..n_steps {
        agent_steps += state.agents.active_count() as u64;
        step_with(&mut state, config, false)?;
    }
    let seconds = clock.elapsed();
    let valid = n_steps > 0 && seconds > 0.0;
    let steps_per_sec = if valid { n_steps as f64 / seconds } else { 0.0 };
    Ok(BenchReport {
        warmup_steps: warmup,
        measured_steps: n_steps,
        seconds,
        steps_per_sec,
        agent_steps_per_sec: if valid { agent_steps as f64 / seconds } else { 0.0 },
        mean_active_agents: if n_steps > 0 {
            agent_steps as f64 / n_steps as f64
        } else {
            0.0
        },
        extrapolated_seconds_1e6: if valid { 1e6 / steps_per_sec } else { f64::INFINITY },
        valid,
    })
}

/// Fitness of a shared policy: every initial agent gets `params`, the
/// scenario runs for `horizon` steps, and the score is the mean over steps of
/// the total energy held by the population.
#[derive(Clone, Debug)]
pub struct ScenarioFitness {
    pub config: SimConfig,
    pub horizon: u64,
}

impl ScenarioFitness {
    pub fn evaluate(&self, params: &[f64]) -> f64 {
        let Ok(mut state) = SimState::new(&self.config) else {
            return f64::NAN;
        };
        let slots: Vec<usize> = state.agents.active_slots().collect();
        for slot in slots {
            state.agents.params_mut(slot).copy_from_slice(params);
        }
        let mut total = 0.0;
        for _ in 0..self.horizon {
            if step_with(&mut state, &self.config, false).is_err() {
                return f64::NAN;
            }
            total += state.agents.energy().iter().sum::<f64>();
        }
        if self.horizon == 0 {
            0.0
        } else {
            total / self.horizon as f64
        }
    }
}

/// Wall-clock timer; reads zero where no monotonic clock exists (wasm).
struct Clock {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Clock {
    fn start() -> Self {
        Clock {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    fn elapsed(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        {
            self.start.elapsed().as_secs_f64()
        }
        #[cfg(target_arch = "wasm32")]
        {
            0.0
        }
    }
}

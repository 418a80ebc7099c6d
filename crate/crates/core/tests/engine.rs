mod common;

use std::fs;

use common::*;
use forage_core::engine::{self, SinkConfig, RECORDS_FILE, CHECKPOINT_FILE, FRAMES_DIR};
use forage_core::records::{self, RECORD_HEADER};
use forage_core::{checkpoint, run, run_from, step, SimConfig, SimState};

fn small() -> SimConfig {
    SimConfig {
        n_steps: 200,
        world_extent: [30.0, 30.0],
        max_agents: 60,
        initial_agents: Some(40),
        max_resources: 30,
        n_neurons: 10,
        n_rays: 6,
        reproduce_threshold: 10.5,
        init_energy: 10.0,
        seed: 11,
        ..SimConfig::default()
    }
}

fn sinks(dir: &std::path::Path) -> SinkConfig {
    SinkConfig {
        out_dir: Some(dir.to_path_buf()),
        record_every: 10,
        frame_every: 50,
        checkpoint: true,
    }
}

fn with_threads<R: Send>(n: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(f)
}

#[test]
fn empty_population_only_grows_resources() {
    let config = SimConfig {
        initial_agents: Some(0),
        initial_resources: Some(5),
        ..small()
    };
    let mut state = SimState::new(&config).unwrap();
    for slot in 0..5 {
        assert!(state.resources.value()[slot] > 0.0);
    }
    let agents_before = state.agents.clone();
    let before: Vec<f64> = state.resources.value().to_vec();
    step(&mut state, &config).unwrap();
    assert_eq!(state.agents, agents_before);
    for (n, s) in before.iter().enumerate() {
        let growth = config.alpha * s * (config.epsilon / config.alpha - s);
        assert_eq!(state.resources.value()[n], s + config.dt * growth);
    }
}

#[test]
fn linear_drain_kills_at_predicted_step() {
    let config = SimConfig {
        dt: 0.25,
        metabolic_cost: 1.0,
        move_cost: 0.0,
        init_energy: 2.0,
        policy_gain: 0.0,
        max_agents: 1,
        initial_agents: None,
        initial_resources: Some(0),
        ..small()
    };
    let death_step = (config.init_energy / (config.dt * config.metabolic_cost)).ceil() as u64;
    assert_eq!(death_step, 8);
    let mut state = SimState::new(&config).unwrap();
    for k in 1..=death_step {
        let rec = step(&mut state, &config).unwrap();
        if k < death_step {
            assert_eq!(rec.active_agents, 1);
            assert_eq!(state.agents.energy()[0], 2.0 - 0.25 * k as f64);
        } else {
            assert_eq!(rec.deaths, 1);
            assert_eq!(rec.active_agents, 0);
        }
    }
}

#[test]
fn null_run_keeps_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    let config = SimConfig { n_steps: 0, ..small() };
    let out = run(&config, &sinks(dir.path())).unwrap();
    assert_eq!(out.state, SimState::new(&config).unwrap());
    let text = fs::read_to_string(dir.path().join(RECORDS_FILE)).unwrap();
    assert_eq!(text.trim_end(), RECORD_HEADER);
}

#[test]
fn record_and_frame_cadence() {
    let dir = tempfile::tempdir().unwrap();
    let config = SimConfig { n_steps: 100, ..small() };
    let out = run(&config, &sinks(dir.path())).unwrap();
    let steps: Vec<u64> = out.records.iter().map(|r| r.step).collect();
    assert_eq!(steps, (1..=10).map(|k| 10 * k).collect::<Vec<_>>());
    let text = fs::read_to_string(dir.path().join(RECORDS_FILE)).unwrap();
    assert_eq!(text.lines().count(), 11);
    let mut frames: Vec<String> = fs::read_dir(dir.path().join(FRAMES_DIR))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    frames.sort();
    assert_eq!(frames, ["frame_000000.csv", "frame_000001.csv", "frame_000002.csv"]);
    // event totals in records add up to the run counters
    let births: u64 = out.records.iter().map(|r| r.births).sum();
    let deaths: u64 = out.records.iter().map(|r| r.deaths).sum();
    assert_eq!(births, out.state.stats.births);
    assert_eq!(deaths, out.state.stats.deaths);
}

#[test]
fn identical_across_worker_counts() {
    let config = small();
    let outputs: Vec<(Vec<u8>, String)> = [1, 4, 1]
        .iter()
        .map(|&n| {
            let dir = tempfile::tempdir().unwrap();
            with_threads(n, || run(&config, &sinks(dir.path())).unwrap());
            (
                fs::read(dir.path().join(CHECKPOINT_FILE)).unwrap(),
                fs::read_to_string(dir.path().join(RECORDS_FILE)).unwrap(),
            )
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn resume_from_checkpoint_matches_uninterrupted_run() {
    let config = small();
    let full = run(&config, &SinkConfig::default()).unwrap().state;

    let dir = tempfile::tempdir().unwrap();
    let half = SimConfig { n_steps: 100, ..config.clone() };
    run(&half, &sinks(dir.path())).unwrap();
    let (saved_config, state) = checkpoint::load(&dir.path().join(CHECKPOINT_FILE)).unwrap();
    assert_eq!(state.step, 100);
    let resumed = run_from(state, &saved_config, &SinkConfig::default(), 100).unwrap().state;
    assert_eq!(resumed, full);
    assert_eq!(checkpoint::encode(&resumed, &config), checkpoint::encode(&full, &config));
}

#[test]
fn harvest_energy_ledger() {
    let config = SimConfig { n_steps: 300, ..small() };
    let stats = run(&config, &SinkConfig::default()).unwrap().state.stats;
    assert!(stats.total_harvested > 0.0);
    assert_close(
        stats.total_harvested * config.harvest_efficiency,
        stats.harvest_energy,
        1e-9,
        "harvest ledger",
    );
}

#[test]
fn audited_run_stays_consistent() {
    let config = small();
    let mut state = SimState::new(&config).unwrap();
    for _ in 0..200 {
        engine::step_with(&mut state, &config, true).unwrap();
        engine::audit(&state, "test").unwrap();
        for s in state.agents.active_slots() {
            assert!(state.world.contains(state.agents.position()[s]));
        }
    }
}

#[test]
fn frames_read_back() {
    let config = small();
    let state = SimState::new(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join(records::frame_file_name(0));
    records::write_frame(&path, &state).unwrap();
    let frame = records::read_frame(&path).unwrap();
    assert_eq!(frame, records::Frame::from_state(&state));
    assert_eq!(frame.agents.len(), 40);
    assert_eq!(frame.resources.len(), 30);
}

#[test]
fn malformed_frame_reports_line() {
    let text = format!("{}\nagent,1,0,0,0,0,1,\nagent,2,zero,0,0,0,1,\n", records::FRAME_HEADER);
    let (line, _) = records::parse_frame(&text).unwrap_err();
    assert_eq!(line, 3);
}

#[test]
fn config_round_trip_over_random_configs() {
    for case in 0..100 {
        let mut r = rng(50, case);
        let mut c = SimConfig {
            dt: uniform(&mut r, 1e-3, 1.0),
            n_steps: below(&mut r, 10_000) as u64,
            world_extent: [uniform(&mut r, 1.0, 500.0), uniform(&mut r, 1.0, 500.0)],
            max_agents: 1 + below(&mut r, 2000),
            max_resources: 1 + below(&mut r, 500),
            n_neurons: 1 + below(&mut r, 100),
            n_rays: below(&mut r, 16),
            epsilon: uniform(&mut r, 0.0, 2.0),
            alpha: uniform(&mut r, 1e-4, 1.0),
            kernel_cutoff: uniform(&mut r, 0.0, 20.0),
            harvest_efficiency: uniform(&mut r, 0.0, 1.0),
            mutation_std: uniform(&mut r, 0.0, 0.5),
            seed: below(&mut r, 1 << 30) as u64,
            walls: (0..below(&mut r, 3)).map(|i| [0.0, i as f64, 5.0, 1.0 + i as f64]).collect(),
            ..SimConfig::default()
        };
        if case % 2 == 0 {
            c.initial_agents = Some(below(&mut r, c.max_agents + 1));
            c.max_speed = uniform(&mut r, 0.1, 10.0);
        }
        c.validate().unwrap();
        let back = SimConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c, "case {case}");
        assert_eq!(back.hash(), c.hash());
    }
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use forage_core::records::{self, Frame, FrameAgent};
use forage_core::{SimConfig, Vec2};
use forage_cli::render::{AGENT, BACKGROUND, HEADING};

const SMALL: &str = r#"
dt = 0.1
n_steps = 60
world_extent = [40.0, 40.0]
max_agents = 30
max_resources = 20
n_neurons = 8
n_rays = 4
reproduce_threshold = 10.5
seed = 3
"#;

fn forage(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forage"))
        .args(args)
        .env_remove("FORAGE_THREADS")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.cfg", SMALL);
    let out = dir.path().join("out");
    let o = forage(&["run", "--config", s(&cfg), "--steps", "40", "--seed", "7", "--output", s(&out), "--frame-every", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["manifest.toml", "records.csv", "timing.csv", "checkpoint.bin", "frames/frame_000000.csv", "frames/frame_000002.csv"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let manifest: toml::Table = fs::read_to_string(out.join("manifest.toml")).unwrap().parse().unwrap();
    assert_eq!(manifest["seed"].as_integer(), Some(7));
    assert_eq!(manifest["n_steps"].as_integer(), Some(40));
    let records = fs::read_to_string(out.join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 1 + 4);
    let (_, state) = forage_core::checkpoint::load(&out.join("checkpoint.bin")).unwrap();
    assert_eq!(state.step, 40);
    assert_eq!(state.seed, 7);
}

#[test]
fn missing_config_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let o = forage(&["run", "--config", s(&dir.path().join("nope.cfg")), "--output", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
    assert!(!o.stderr.is_empty());
}

#[test]
fn invalid_override_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.cfg", SMALL);
    let out = dir.path().join("never");
    let o = forage(&["run", "--config", s(&cfg), "--seed", "18446744073709551615", "--output", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.cfg", SMALL);
    let read = |name: &str, threads: &str| {
        let out = dir.path().join(format!("{name}-{threads}"));
        let o = forage(&["run", "--config", s(&cfg), "--output", s(&out), "--record-every", "5", "--frame-every", "30", "--threads", threads]);
        assert_eq!(o.status.code(), Some(0));
        ["records.csv", "checkpoint.bin", "manifest.toml", "frames/frame_000001.csv"].map(|f| fs::read(out.join(f)).unwrap())
    };
    let a = read("a", "1");
    assert_eq!(a, read("b", "1"));
    assert_eq!(a, read("c", "4"));
}

#[test]
fn validate_echoes_every_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "min.cfg", "dt = 0.2\n");
    let o = forage(&["validate", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let echoed: toml::Table = text.parse().unwrap();
    let all: toml::Table = SimConfig::default().effective().to_toml_string().parse().unwrap();
    for key in all.keys() {
        assert!(echoed.contains_key(key), "validate output lacks {key}");
    }
    assert_eq!(echoed["dt"].as_float(), Some(0.2));
    // the echo is itself a valid config describing the same run
    assert_eq!(SimConfig::from_toml_str(&text).unwrap(), SimConfig::from_toml_str("dt = 0.2").unwrap().effective());
}

#[test]
fn validate_names_the_bad_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "alpha = -1.0\n");
    let o = forage(&["validate", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
}

/// Deterministic xorshift for fuzzing config text.
struct Fuzz(u64);

impl Fuzz {
    fn next(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }
    fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        &xs[(self.next() % xs.len() as u64) as usize]
    }
}

#[test]
fn validate_agrees_with_library_on_fuzzed_configs() {
    let dir = tempfile::tempdir().unwrap();
    let base = SimConfig::default().effective().to_toml_string();
    let keys: Vec<String> = base.lines().filter_map(|l| l.split_once(" = ").map(|(k, _)| k.to_string())).collect();
    let values = [
        "-1", "0", "1", "2.5", "-0.5", "1e400", "nan", "inf", "-inf", "\"text\"", "true", "[1.0, 2.0]", "[]", "[0.0]", "3",
        "9223372036854775807", "\"periodic\"", "\"clamped\"", "\"strict\"", "0.999", "[[0.0, 0.0, 1.0, 1.0]]",
    ];
    let mut rng = Fuzz(0x9E37_79B9_7F4A_7C15);
    let (mut accepted, mut rejected) = (0, 0);
    for case in 0..500 {
        let mut lines: Vec<String> = base.lines().map(str::to_string).collect();
        for _ in 0..1 + rng.next() % 3 {
            match rng.next() % 6 {
                0 => {
                    let i = (rng.next() % lines.len() as u64) as usize;
                    lines.remove(i);
                }
                1 => lines.push(format!("unknown_{} = 1", rng.next() % 5)),
                2 => lines.push("this is not toml".into()),
                _ => {
                    let key = rng.pick(&keys).clone();
                    let value = rng.pick(&values);
                    lines.retain(|l| !l.starts_with(&format!("{key} =")));
                    lines.push(format!("{key} = {value}"));
                }
            }
        }
        let text = lines.join("\n");
        let cfg = write(dir.path(), &format!("fuzz{case}.cfg"), &text);
        let lib_ok = SimConfig::load(&cfg).is_ok();
        let code = forage(&["validate", "--config", s(&cfg)]).status.code();
        assert_eq!(code, Some(if lib_ok { 0 } else { 1 }), "case {case}:\n{text}");
        if lib_ok {
            accepted += 1
        } else {
            rejected += 1
        }
    }
    assert!(accepted > 20 && rejected > 20, "{accepted} accepted, {rejected} rejected");
}

fn render_one(frame: &Frame, size: u32) -> (Output, Option<image::RgbImage>) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "w.cfg", "world_extent = [100.0, 100.0]\n");
    let frames = dir.path().join("frames");
    fs::create_dir(&frames).unwrap();
    fs::write(frames.join("frame_000000.csv"), frame.to_text()).unwrap();
    let size_arg = size.to_string();
    let o = forage(&["render", "--config", s(&cfg), "--frames", s(&frames), "--size", &size_arg]);
    let img = image::open(frames.join("frame_000000.png")).ok().map(|i| i.to_rgb8());
    (o, img)
}

#[test]
fn render_empty_frame_is_blank() {
    let (o, img) = render_one(&Frame::default(), 64);
    assert_eq!(o.status.code(), Some(0));
    let img = img.unwrap();
    assert_eq!(img.dimensions(), (64, 64));
    assert!(img.pixels().all(|p| *p == BACKGROUND));
}

#[test]
fn render_center_agent_with_rightward_tick() {
    let frame = Frame {
        agents: vec![FrameAgent {
            uid: 1,
            position: Vec2::new(50.0, 50.0),
            velocity: Vec2::new(1.0, 0.0),
            energy: 1.0,
        }],
        resources: vec![],
    };
    let (o, img) = render_one(&frame, 1024);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let img = img.unwrap();
    // marker covers the image center
    assert_eq!(*img.get_pixel(511, 511), AGENT);
    // tick runs to the right of the marker and not to the left
    // the tick lies on y = 512, the edge between pixel rows 511 and 512
    assert!([511, 512].iter().any(|&row| *img.get_pixel(512 + 7, row) == HEADING));
    assert_eq!(*img.get_pixel(512 - 7, 511), BACKGROUND);
    assert_eq!(*img.get_pixel(511, 512 + 7), BACKGROUND);
}

#[test]
fn render_malformed_frame_names_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "w.cfg", "");
    let bad = write(dir.path(), "frame_000003.csv", &format!("{}\nagent,1,1,1,0,0,1,\nagent,x,1,1,0,0,1,\n", records::FRAME_HEADER));
    let o = forage(&["render", "--config", s(&cfg), "--frames", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("frame_000003.csv") && err.contains('3'), "{err}");
}

fn bench_value(stdout: &[u8], key: &str) -> String {
    let text = String::from_utf8_lossy(stdout);
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .to_string()
}

#[test]
fn bench_with_no_steps_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.cfg", SMALL);
    let o = forage(&["bench", "--config", s(&cfg), "--steps", "0", "--warmup", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(bench_value(&o.stdout, "valid"), "false");
    assert_eq!(bench_value(&o.stdout, "measured_steps"), "0");
}

#[test]
fn bench_time_scales_linearly() {
    // fixed population so every step costs the same
    let config = SimConfig {
        world_extent: [50.0, 50.0],
        max_agents: 200,
        max_resources: 60,
        n_neurons: 20,
        metabolic_cost: 0.0,
        move_cost: 0.0,
        init_energy: 5.0,
        reproduce_threshold: 1e9,
        ..SimConfig::default()
    };
    let time = |steps: u64| {
        (0..3)
            .map(|_| {
                let r = forage_core::bench(&config, steps, 20).unwrap();
                assert!(r.valid);
                r.seconds
            })
            .fold(f64::INFINITY, f64::min)
    };
    let one = time(150);
    let two = time(300);
    let ratio = two / one;
    assert!((1.6..=2.4).contains(&ratio), "ratio {ratio} ({one}s vs {two}s)");
}

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use forage_core::engine::{self, SinkConfig};
use forage_core::records;
use forage_core::{ForageError, SimConfig, Vec2};

use crate::manifest::{Manifest, MANIFEST_FILE};
use crate::render::{render_frame, RenderStats, RenderStyle};
use crate::{EXIT_INVALID, EXIT_OK, EXIT_RUNTIME, THREADS_ENV};

#[derive(Debug, Parser)]
#[command(name = "forage", version, about = "Multi-agent foraging simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario and write records, frames, a checkpoint and a manifest.
    Run(RunArgs),
    /// Time the step loop without I/O.
    Bench(BenchArgs),
    /// Parse a config and print the effective (fully defaulted) config.
    Validate(ValidateArgs),
    /// Rasterize frame files to PNG images.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct Overrides {
    /// Scenario config file.
    #[arg(long)]
    pub config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the config step count.
    #[arg(long)]
    pub steps: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, env = THREADS_ENV, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Overrides,
    /// Output directory.
    #[arg(long, short, default_value = "out")]
    pub output: PathBuf,
    /// Write a step record every N steps (0 disables).
    #[arg(long, default_value_t = 10)]
    pub record_every: u64,
    /// Write a snapshot frame every N steps, starting at step 0 (0 disables).
    #[arg(long, default_value_t = 1000)]
    pub frame_every: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Overrides,
    /// Untimed steps before measuring.
    #[arg(long, default_value_t = 100)]
    pub warmup: u64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Config of the run that produced the frames (supplies the world extent).
    #[arg(long)]
    pub config: PathBuf,
    /// Directory holding `frame_*.csv` files, or a single frame file.
    #[arg(long)]
    pub frames: PathBuf,
    /// Image output directory; defaults to the frames directory.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Canvas width and height in pixels.
    #[arg(long, default_value_t = 1024)]
    pub size: u32,
}

/// Parses `args` (including the program name) and executes the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Bench(args) => cmd_bench(&args),
        Command::Validate(args) => cmd_validate(&args),
        Command::Render(args) => cmd_render(&args),
    }
}

fn fail(code: i32, err: impl std::fmt::Display) -> i32 {
    eprintln!("error: {err}");
    code
}

fn runtime_code(err: &ForageError) -> i32 {
    if err.is_validation() {
        EXIT_INVALID
    } else {
        EXIT_RUNTIME
    }
}

/// Loads the config and applies overrides; any failure is an input error.
fn load_config(path: &Path, seed: Option<u64>, steps: Option<u64>) -> Result<SimConfig, ForageError> {
    let mut config = SimConfig::load(path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(steps) = steps {
        config.n_steps = steps;
    }
    config.validate()?;
    Ok(config.effective())
}

fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R, String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| format!("cannot start worker pool: {e}"))?;
    Ok(pool.install(f))
}

fn cmd_run(args: &RunArgs) -> i32 {
    let c = &args.common;
    let config = match load_config(&c.config, c.seed, c.steps) {
        Ok(config) => config,
        Err(e) => return fail(EXIT_INVALID, e),
    };
    if let Err(e) = fs::create_dir_all(&args.output) {
        return fail(EXIT_RUNTIME, format!("cannot create {}: {e}", args.output.display()));
    }
    let manifest = Manifest::new(&config, args.record_every, args.frame_every);
    let manifest_path = args.output.join(MANIFEST_FILE);
    if let Err(e) = fs::write(&manifest_path, manifest.to_toml_string()) {
        return fail(EXIT_RUNTIME, format!("cannot write {}: {e}", manifest_path.display()));
    }
    let sinks = SinkConfig {
        out_dir: Some(args.output.clone()),
        record_every: args.record_every,
        frame_every: args.frame_every,
        checkpoint: true,
    };
    match with_threads(c.threads, || engine::run(&config, &sinks)) {
        Ok(Ok(outcome)) => {
            let s = &outcome.state;
            println!(
                "ran {} steps: {} agents, {} births, {} deaths, {} dropped; outputs in {}",
                s.step,
                s.agents.active_count(),
                s.stats.births,
                s.stats.deaths,
                s.stats.dropped,
                args.output.display()
            );
            EXIT_OK
        }
        Ok(Err(e)) => fail(runtime_code(&e), e),
        Err(e) => fail(EXIT_RUNTIME, e),
    }
}

fn cmd_bench(args: &BenchArgs) -> i32 {
    let c = &args.common;
    let config = match load_config(&c.config, c.seed, c.steps) {
        Ok(config) => config,
        Err(e) => return fail(EXIT_INVALID, e),
    };
    let steps = config.n_steps;
    match with_threads(c.threads, || engine::bench(&config, steps, args.warmup)) {
        Ok(Ok(report)) => {
            println!("{}", format_bench(&report));
            EXIT_OK
        }
        Ok(Err(e)) => fail(runtime_code(&e), e),
        Err(e) => fail(EXIT_RUNTIME, e),
    }
}

pub fn format_bench(r: &engine::BenchReport) -> String {
    format!(
        "valid = {}\nwarmup_steps = {}\nmeasured_steps = {}\nseconds = {:.6}\nsteps_per_sec = {:.3}\n\
         agent_steps_per_sec = {:.1}\nmean_active_agents = {:.2}\nextrapolated_minutes_1e6_steps = {:.2}",
        r.valid,
        r.warmup_steps,
        r.measured_steps,
        r.seconds,
        r.steps_per_sec,
        r.agent_steps_per_sec,
        r.mean_active_agents,
        r.extrapolated_seconds_1e6 / 60.0
    )
}

fn cmd_validate(args: &ValidateArgs) -> i32 {
    match SimConfig::load(&args.config) {
        Ok(config) => {
            print!("{}", config.effective().to_toml_string());
            EXIT_OK
        }
        Err(e) => fail(EXIT_INVALID, e),
    }
}

/// Frame files under `path` (or `path` itself), sorted by name.
pub fn frame_files(path: &Path) -> std::io::Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|e| e == "csv")
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("frame_"))
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Renders one frame file to `out_dir/<stem>.png`.
pub fn render_file(frame_path: &Path, out_dir: &Path, extent: Vec2, style: &RenderStyle) -> Result<RenderStats, ForageError> {
    let frame = records::read_frame(frame_path)?;
    let (img, stats) = render_frame(&frame, extent, style);
    let stem = frame_path.file_stem().unwrap_or_default();
    let out = out_dir.join(stem).with_extension("png");
    img.save(&out).map_err(|e| ForageError::Io {
        path: out.clone(),
        source: std::io::Error::other(e),
    })?;
    Ok(stats)
}

fn cmd_render(args: &RenderArgs) -> i32 {
    let config = match SimConfig::load(&args.config) {
        Ok(config) => config,
        Err(e) => return fail(EXIT_INVALID, e),
    };
    if args.size == 0 {
        return fail(EXIT_INVALID, "--size must be positive");
    }
    let files = match frame_files(&args.frames) {
        Ok(files) => files,
        Err(e) => return fail(EXIT_INVALID, format!("cannot read {}: {e}", args.frames.display())),
    };
    let out_dir = match &args.output {
        Some(dir) => dir.clone(),
        None if args.frames.is_file() => args.frames.parent().map(Path::to_path_buf).unwrap_or_default(),
        None => args.frames.clone(),
    };
    if let Err(e) = fs::create_dir_all(&out_dir) {
        return fail(EXIT_RUNTIME, format!("cannot create {}: {e}", out_dir.display()));
    }
    let world = config.world();
    let style = RenderStyle::new(args.size, config.carrying_capacity());
    for file in &files {
        match render_file(file, &out_dir, world.extent, &style) {
            Ok(stats) => println!(
                "{}: {} agents, {} resources",
                file.display(),
                stats.agents_drawn,
                stats.resources_drawn
            ),
            Err(e) => return fail(EXIT_RUNTIME, e),
        }
    }
    EXIT_OK
}

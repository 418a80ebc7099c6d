//! Columnar text output: step records and snapshot frames.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a file
//! is a pure function of the simulation state.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::engine::SimState;
use crate::error::{ForageError, Result};
use crate::geometry::Vec2;

pub const RECORD_HEADER: &str =
    "step,active_agents,active_resources,mean_energy,min_energy,max_energy,total_resource,births,deaths,dropped,harvested";
pub const TIMING_HEADER: &str = "step,seconds";
pub const FRAME_HEADER: &str = "kind,uid,x,y,vx,vy,energy,value";

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepRecord {
    pub step: u64,
    pub active_agents: usize,
    pub active_resources: usize,
    /// Energy statistics over active agents; 0 when there are none.
    pub mean_energy: f64,
    pub min_energy: f64,
    pub max_energy: f64,
    pub total_resource: f64,
    pub births: u64,
    pub deaths: u64,
    pub dropped: u64,
    pub harvested: f64,
    /// Wall-clock time; kept out of `records.csv` so that file stays reproducible.
    pub seconds: f64,
}

impl StepRecord {
    /// Population and resource statistics of `state`; event counters zero.
    pub fn observe(state: &SimState) -> Self {
        let agents = &state.agents;
        let mut count = 0usize;
        let mut sum = 0.0;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for slot in agents.active_slots() {
            let e = agents.energy()[slot];
            count += 1;
            sum += e;
            min = min.min(e);
            max = max.max(e);
        }
        let (mean, min, max) = if count == 0 {
            (0.0, 0.0, 0.0)
        } else {
            (sum / count as f64, min, max)
        };
        StepRecord {
            step: state.step,
            active_agents: count,
            active_resources: state.resources.active_count(),
            mean_energy: mean,
            min_energy: min,
            max_energy: max,
            total_resource: state.resources.total_value(),
            ..StepRecord::default()
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.step,
            self.active_agents,
            self.active_resources,
            self.mean_energy,
            self.min_energy,
            self.max_energy,
            self.total_resource,
            self.births,
            self.deaths,
            self.dropped,
            self.harvested
        )
    }
}

pub fn frame_file_name(index: u64) -> String {
    format!("frame_{index:06}.csv")
}

/// Active agents then active resources, each in slot order.
pub fn frame_text(state: &SimState) -> String {
    Frame::from_state(state).to_text()
}

pub fn write_frame(path: &Path, state: &SimState) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| ForageError::io(path, e))?;
    f.write_all(frame_text(state).as_bytes())
        .map_err(|e| ForageError::io(path, e))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameAgent {
    pub uid: u64,
    pub position: Vec2,
    pub velocity: Vec2,
    pub energy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameResource {
    pub position: Vec2,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Frame {
    pub agents: Vec<FrameAgent>,
    pub resources: Vec<FrameResource>,
}

impl Frame {
    /// CSV text in the frame file format.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(64 * (1 + self.agents.len() + self.resources.len()));
        out.push_str(FRAME_HEADER);
        out.push('\n');
        for a in &self.agents {
            let (p, v) = (a.position, a.velocity);
            out.push_str(&format!("agent,{},{},{},{},{},{},\n", a.uid, p.x, p.y, v.x, v.y, a.energy));
        }
        for r in &self.resources {
            let p = r.position;
            out.push_str(&format!("resource,,{},{},,,,{}\n", p.x, p.y, r.value));
        }
        out
    }

    pub fn from_state(state: &SimState) -> Self {
        let a = &state.agents;
        let r = &state.resources;
        Frame {
            agents: a
                .active_slots()
                .map(|s| FrameAgent {
                    uid: a.uid()[s],
                    position: a.position()[s],
                    velocity: a.velocity()[s],
                    energy: a.energy()[s],
                })
                .collect(),
            resources: (0..r.capacity())
                .filter(|&n| r.active()[n])
                .map(|n| FrameResource {
                    position: r.position()[n],
                    value: r.value()[n],
                })
                .collect(),
        }
    }
}

pub fn read_frame(path: &Path) -> Result<Frame> {
    let text = fs::read_to_string(path).map_err(|e| ForageError::io(path, e))?;
    parse_frame(&text).map_err(|(line, reason)| ForageError::Frame {
        path: path.to_path_buf(),
        line,
        reason,
    })
}

/// Parses frame text; errors carry the 1-based line number.
pub fn parse_frame(text: &str) -> std::result::Result<Frame, (u64, String)> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == FRAME_HEADER => {}
        Some((_, header)) => return Err((1, format!("expected header `{FRAME_HEADER}`, found `{header}`"))),
        None => return Err((1, "empty file".into())),
    }
    let mut frame = Frame::default();
    for (i, line) in lines {
        let lineno = i as u64 + 1;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err((lineno, format!("expected 8 fields, found {}", fields.len())));
        }
        let num = |idx: usize| -> std::result::Result<f64, (u64, String)> {
            let v: f64 = fields[idx]
                .parse()
                .map_err(|_| (lineno, format!("field {} is not a number: `{}`", idx + 1, fields[idx])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err((lineno, format!("field {} is not finite", idx + 1)))
            }
        };
        match fields[0] {
            "agent" => {
                let uid = fields[1]
                    .parse()
                    .map_err(|_| (lineno, format!("bad uid `{}`", fields[1])))?;
                frame.agents.push(FrameAgent {
                    uid,
                    position: Vec2::new(num(2)?, num(3)?),
                    velocity: Vec2::new(num(4)?, num(5)?),
                    energy: num(6)?,
                });
            }
            "resource" => frame.resources.push(FrameResource {
                position: Vec2::new(num(2)?, num(3)?),
                value: num(7)?,
            }),
            other => return Err((lineno, format!("unknown row kind `{other}`"))),
        }
    }
    Ok(frame)
}

//! Versioned binary checkpoint of a [`SimState`].
//!
//! All integers are little-endian `u64` unless noted, floats are IEEE-754
//! bit patterns stored as little-endian `u64`, flags are single bytes.
//!
//! ```text
//! magic        8 bytes  "FGXCKPT\0"
//! version      u32      1
//! config_hash  32 bytes SHA-256 of the config text below
//! config_len   u64, then config_len bytes of config TOML (UTF-8)
//! step, seed
//! stats        births, deaths, dropped, total_harvested (f64), harvest_energy (f64)
//! agents       capacity, n_neurons, param_len, next_uid, overflow_count,
//!              active[capacity] (u8), uid[capacity],
//!              position[capacity] (x, y), velocity[capacity] (x, y),
//!              energy[capacity], rates[capacity*n_neurons], params[capacity*param_len]
//! resources    capacity, active[capacity] (u8), position[capacity] (x, y), value[capacity]
//! world        extent (x, y), boundary_mode (u8: 0 periodic, 1 reflective, 2 clamped),
//!              wall_count, walls[wall_count] (ax, ay, bx, by)
//! ```

use std::path::Path;

use crate::config::SimConfig;
use crate::engine::{RunStats, SimState};
use crate::error::{ForageError, Result};
use crate::geometry::{BoundaryMode, Segment, Vec2, WorldGeometry};
use crate::model::{AgentSet, AgentSetParts, ResourceSet};

pub const MAGIC: &[u8; 8] = b"FGXCKPT\0";
pub const VERSION: u32 = 1;

pub fn encode(state: &SimState, config: &SimConfig) -> Vec<u8> {
    let config_text = config.to_toml_string();
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.0.extend_from_slice(&VERSION.to_le_bytes());
    w.0.extend_from_slice(&config.hash());
    w.u64(config_text.len() as u64);
    w.0.extend_from_slice(config_text.as_bytes());

    w.u64(state.step);
    w.u64(state.seed);
    let s = &state.stats;
    w.u64(s.births);
    w.u64(s.deaths);
    w.u64(s.dropped);
    w.f64(s.total_harvested);
    w.f64(s.harvest_energy);

    let a = &state.agents;
    w.u64(a.capacity() as u64);
    w.u64(a.n_neurons() as u64);
    w.u64(a.param_len() as u64);
    w.u64(a.next_uid());
    w.u64(a.overflow_count());
    a.active().iter().for_each(|&b| w.0.push(b as u8));
    a.uid().iter().for_each(|&u| w.u64(u));
    a.position().iter().for_each(|&p| w.vec2(p));
    a.velocity().iter().for_each(|&v| w.vec2(v));
    a.energy().iter().for_each(|&e| w.f64(e));
    a.rates_flat().iter().for_each(|&r| w.f64(r));
    a.params_flat().iter().for_each(|&p| w.f64(p));

    let r = &state.resources;
    w.u64(r.capacity() as u64);
    r.active().iter().for_each(|&b| w.0.push(b as u8));
    r.position().iter().for_each(|&p| w.vec2(p));
    r.value().iter().for_each(|&v| w.f64(v));

    let world = &state.world;
    w.vec2(world.extent);
    w.0.push(world.boundary_mode.code());
    w.u64(world.walls.len() as u64);
    for seg in &world.walls {
        w.vec2(seg.a);
        w.vec2(seg.b);
    }
    w.0
}

pub fn decode(bytes: &[u8]) -> Result<(SimConfig, SimState)> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(bad("missing magic bytes"));
    }
    let version = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let hash: [u8; 32] = r.take(32)?.try_into().unwrap();
    let len = r.len()?;
    let text = std::str::from_utf8(r.take(len)?).map_err(|_| bad("config is not UTF-8"))?;
    let config = SimConfig::from_toml_str(text)?;
    if config.hash() != hash {
        return Err(bad("config hash mismatch"));
    }

    let step = r.u64()?;
    let seed = r.u64()?;
    let stats = RunStats {
        births: r.u64()?,
        deaths: r.u64()?,
        dropped: r.u64()?,
        total_harvested: r.f64()?,
        harvest_energy: r.f64()?,
    };

    let capacity = r.len()?;
    let n_neurons = r.len()?;
    let param_len = r.len()?;
    let next_uid = r.u64()?;
    let overflow_count = r.u64()?;
    let active = r.flags(capacity)?;
    let uid = r.many(capacity, Reader::u64)?;
    let position = r.many(capacity, Reader::vec2)?;
    let velocity = r.many(capacity, Reader::vec2)?;
    let energy = r.many(capacity, Reader::f64)?;
    let rates = r.many(capacity * n_neurons, Reader::f64)?;
    let params = r.many(capacity * param_len, Reader::f64)?;
    let agents = AgentSet::from_raw_parts(AgentSetParts {
        capacity,
        n_neurons,
        param_len,
        active,
        uid,
        position,
        velocity,
        energy,
        rates,
        params,
        next_uid,
        overflow_count,
    })?;

    let res_capacity = r.len()?;
    let resources = ResourceSet {
        active: r.flags(res_capacity)?,
        position: r.many(res_capacity, Reader::vec2)?,
        value: r.many(res_capacity, Reader::f64)?,
    };

    let extent = r.vec2()?;
    let code = r.take(1)?[0];
    let boundary_mode = BoundaryMode::from_code(code).ok_or_else(|| bad(format!("unknown boundary mode {code}")))?;
    let n_walls = r.len()?;
    let walls = r.many(n_walls, |r| Ok(Segment::new(r.vec2()?, r.vec2()?)))?;
    if r.pos != bytes.len() {
        return Err(bad("trailing bytes"));
    }

    let state = SimState {
        step,
        seed,
        agents,
        resources,
        world: WorldGeometry::new(extent, boundary_mode, walls),
        stats,
    };
    Ok((config, state))
}

pub fn save(path: &Path, state: &SimState, config: &SimConfig) -> Result<()> {
    std::fs::write(path, encode(state, config)).map_err(|e| ForageError::io(path, e))
}

pub fn load(path: &Path) -> Result<(SimConfig, SimState)> {
    let bytes = std::fs::read(path).map_err(|e| ForageError::io(path, e))?;
    decode(&bytes)
}

fn bad(msg: impl Into<String>) -> ForageError {
    ForageError::Checkpoint(msg.into())
}

struct Writer(Vec<u8>);

impl Writer {
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }
    fn vec2(&mut self, v: Vec2) {
        self.f64(v.x);
        self.f64(v.y);
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| bad("truncated"))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn len(&mut self) -> Result<usize> {
        let v = self.u64()?;
        // a count can never exceed the bytes left to describe it
        if v > (self.bytes.len() - self.pos) as u64 {
            return Err(bad("length field exceeds file size"));
        }
        Ok(v as usize)
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }
    fn vec2(&mut self) -> Result<Vec2> {
        Ok(Vec2::new(self.f64()?, self.f64()?))
    }
    fn flags(&mut self, n: usize) -> Result<Vec<bool>> {
        self.take(n)?
            .iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                _ => Err(bad("flag byte is neither 0 nor 1")),
            })
            .collect()
    }
    fn many<T>(&mut self, n: usize, mut f: impl FnMut(&mut Self) -> Result<T>) -> Result<Vec<T>> {
        (0..n).map(|_| f(self)).collect()
    }
}

//! Rate-based recurrent population policy.
//!
//! Each agent carries `n` leaky rate units driven by its observation:
//!
//! ```text
//! r' = r + (dt / tau) * (-r + tanh(W_rec r + W_in obs + b))
//! u  = (1 / n) * W_out r'
//! ```
//!
//! so each control output is the mean over neurons of their readout
//! contributions. Parameters live flattened inside the agent set in the
//! frozen order `W_rec` (row-major `n x n`), `W_in` (row-major `n x obs_dim`),
//! `b` (`n`), `W_out` (row-major `out_dim x n`), `tau`.

use std::ops::Range;

use crate::error::{ForageError, Result};
use crate::geometry::Vec2;
use crate::model::AgentSet;
use crate::par::*;
use crate::rng;
use crate::sensors::Observations;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PolicyLayout {
    pub n_neurons: usize,
    pub obs_dim: usize,
    pub out_dim: usize,
}

impl PolicyLayout {
    pub const fn new(n_neurons: usize, obs_dim: usize, out_dim: usize) -> Self {
        PolicyLayout {
            n_neurons,
            obs_dim,
            out_dim,
        }
    }

    /// Length of the flat parameter vector.
    pub const fn len(&self) -> usize {
        let n = self.n_neurons;
        n * n + n * self.obs_dim + n + self.out_dim * n + 1
    }

    pub const fn is_empty(&self) -> bool {
        false
    }

    pub fn w_rec(&self) -> Range<usize> {
        0..self.n_neurons * self.n_neurons
    }
    pub fn w_in(&self) -> Range<usize> {
        let start = self.w_rec().end;
        start..start + self.n_neurons * self.obs_dim
    }
    pub fn bias(&self) -> Range<usize> {
        let start = self.w_in().end;
        start..start + self.n_neurons
    }
    pub fn w_out(&self) -> Range<usize> {
        let start = self.bias().end;
        start..start + self.out_dim * self.n_neurons
    }
    pub fn tau_index(&self) -> usize {
        self.len() - 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyParams {
    pub layout: PolicyLayout,
    pub w_rec: Vec<f64>,
    pub w_in: Vec<f64>,
    pub bias: Vec<f64>,
    pub w_out: Vec<f64>,
    pub tau: f64,
}

impl PolicyParams {
    pub fn zeros(layout: PolicyLayout, tau: f64) -> Self {
        let n = layout.n_neurons;
        PolicyParams {
            layout,
            w_rec: vec![0.0; n * n],
            w_in: vec![0.0; n * layout.obs_dim],
            bias: vec![0.0; n],
            w_out: vec![0.0; layout.out_dim * n],
            tau,
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.layout.len());
        flat.extend_from_slice(&self.w_rec);
        flat.extend_from_slice(&self.w_in);
        flat.extend_from_slice(&self.bias);
        flat.extend_from_slice(&self.w_out);
        flat.push(self.tau);
        flat
    }

    pub fn from_flat(layout: PolicyLayout, flat: &[f64]) -> Self {
        assert_eq!(flat.len(), layout.len(), "flat parameter length mismatch");
        PolicyParams {
            layout,
            w_rec: flat[layout.w_rec()].to_vec(),
            w_in: flat[layout.w_in()].to_vec(),
            bias: flat[layout.bias()].to_vec(),
            w_out: flat[layout.w_out()].to_vec(),
            tau: flat[layout.tau_index()],
        }
    }
}

/// Random initialization: `W_rec ~ N(0, (gain/sqrt n)^2)`,
/// `W_in ~ N(0, (gain/sqrt obs_dim)^2)`, `W_out ~ N(0, (gain/sqrt n)^2)`,
/// zero bias. Draws are taken in that order, row-major.
pub fn policy_init(rng: &mut impl rand::Rng, layout: PolicyLayout, gain: f64, tau: f64) -> PolicyParams {
    let mut p = PolicyParams::zeros(layout, tau);
    let rec_std = gain / (layout.n_neurons as f64).sqrt();
    let in_std = gain / (layout.obs_dim as f64).sqrt();
    for w in p.w_rec.iter_mut() {
        *w = rec_std * rng::normal(rng);
    }
    for w in p.w_in.iter_mut() {
        *w = in_std * rng::normal(rng);
    }
    for w in p.w_out.iter_mut() {
        *w = rec_std * rng::normal(rng);
    }
    p
}

/// One Euler step of the rate dynamics for a single agent, updating `rates`
/// in place and writing the control into `control` (length `out_dim`).
/// Returns `false` if any result is non-finite.
pub fn policy_step(
    layout: PolicyLayout,
    params: &[f64],
    rates: &mut [f64],
    obs: &[f64],
    dt: f64,
    control: &mut [f64],
) -> bool {
    let n = layout.n_neurons;
    let m = layout.obs_dim;
    debug_assert_eq!(params.len(), layout.len());
    debug_assert_eq!(rates.len(), n);
    debug_assert_eq!(obs.len(), m);
    debug_assert_eq!(control.len(), layout.out_dim);

    let w_rec = &params[layout.w_rec()];
    let w_in = &params[layout.w_in()];
    let bias = &params[layout.bias()];
    let w_out = &params[layout.w_out()];
    let leak = dt / params[layout.tau_index()];

    // Drive is computed from the pre-update rates before any are overwritten.
    let mut drive = vec![0.0; n];
    for (i, d) in drive.iter_mut().enumerate() {
        let rec = dot(&w_rec[i * n..(i + 1) * n], rates);
        let inp = dot(&w_in[i * m..(i + 1) * m], obs);
        *d = (rec + inp + bias[i]).tanh();
    }
    for (r, d) in rates.iter_mut().zip(&drive) {
        *r += leak * (d - *r);
    }

    let inv_n = 1.0 / n as f64;
    let mut finite = rates.iter().all(|r| r.is_finite());
    for (o, u) in control.iter_mut().enumerate() {
        *u = inv_n * dot(&w_out[o * n..(o + 1) * n], rates);
        finite &= u.is_finite();
    }
    finite
}

/// Dot product with four independent partial sums, so the additions pipeline
/// instead of forming one long dependency chain. The reduction order is fixed,
/// which keeps results reproducible.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0; 4];
    let (a4, a_tail) = a.split_at(a.len() / 4 * 4);
    let (b4, b_tail) = b.split_at(a4.len());
    for (x, y) in a4.chunks_exact(4).zip(b4.chunks_exact(4)) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in a_tail.iter().zip(b_tail) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Applies [`policy_step`] to every active slot. Inactive slots get zero
/// control and keep their zero rates.
pub fn step_batch(
    agents: &mut AgentSet,
    layout: PolicyLayout,
    obs: &Observations,
    dt: f64,
    step: u64,
) -> Result<Vec<Vec2>> {
    assert_eq!(layout.out_dim, 2, "the engine drives planar agents");
    assert_eq!(obs.obs_dim(), layout.obs_dim);
    let n = agents.n_neurons();
    let p = layout.len();
    let (active, uids, params, rates) = agents.policy_views_mut();

    let mut controls = vec![Vec2::ZERO; active.len()];
    let mut ok = vec![true; active.len()];
    rates
        .par_chunks_mut(n)
        .zip(controls.par_iter_mut())
        .zip(ok.par_iter_mut())
        .enumerate()
        .for_each(|(slot, ((r, u), ok))| {
            if !active[slot] {
                return;
            }
            let mut out = [0.0; 2];
            *ok = policy_step(
                layout,
                &params[slot * p..(slot + 1) * p],
                r,
                obs.row(slot),
                dt,
                &mut out,
            );
            *u = Vec2::new(out[0], out[1]);
        });

    if let Some(slot) = ok.iter().position(|&f| !f) {
        return Err(ForageError::NonFinite {
            what: "policy output",
            uid: uids[slot],
            step,
        });
    }
    Ok(controls)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Phase};

    #[test]
    fn flat_length_matches_layout_arithmetic() {
        let layout = PolicyLayout::new(50, 12, 2);
        assert_eq!(layout.len(), 3251);
        let p = policy_init(&mut stream(3, 0, Phase::User, 0), layout, 1.0, 1.0);
        assert_eq!(p.to_flat().len(), 3251);
        assert_eq!(PolicyParams::from_flat(layout, &p.to_flat()), p);
    }

    #[test]
    fn zero_gain_gives_zero_weights() {
        let layout = PolicyLayout::new(7, 4, 2);
        let p = policy_init(&mut stream(3, 0, Phase::User, 0), layout, 0.0, 1.0);
        assert_eq!(p, PolicyParams::zeros(layout, 1.0));
    }

    #[test]
    fn init_is_deterministic_per_stream() {
        let layout = PolicyLayout::new(6, 3, 2);
        let a = policy_init(&mut stream(11, 0, Phase::User, 4), layout, 1.0, 1.0);
        let b = policy_init(&mut stream(11, 0, Phase::User, 4), layout, 1.0, 1.0);
        let c = policy_init(&mut stream(11, 0, Phase::User, 5), layout, 1.0, 1.0);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.bias.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn origin_is_a_fixed_point() {
        let layout = PolicyLayout::new(4, 3, 2);
        let params = PolicyParams::zeros(layout, 1.0).to_flat();
        let mut r = vec![0.0; 4];
        let mut u = [1.0; 2];
        assert!(policy_step(layout, &params, &mut r, &[0.0; 3], 0.1, &mut u));
        assert_eq!(r, vec![0.0; 4]);
        assert_eq!(u, [0.0, 0.0]);
    }

    #[test]
    fn pure_leak_decays_by_dt_over_tau() {
        let layout = PolicyLayout::new(3, 2, 2);
        let params = PolicyParams::zeros(layout, 1.0).to_flat();
        let r0 = [0.5, -2.0, 1.0];
        let mut r = r0.to_vec();
        let mut u = [0.0; 2];
        policy_step(layout, &params, &mut r, &[0.3, 0.7], 0.1, &mut u);
        for (a, b) in r.iter().zip(r0) {
            assert!((a - 0.9 * b).abs() < 1e-15);
        }
    }

    #[test]
    fn readout_is_mean_of_contributions() {
        let layout = PolicyLayout::new(2, 1, 2);
        let mut p = PolicyParams::zeros(layout, 1.0);
        p.w_out = vec![1.0, 3.0, -2.0, 0.0];
        let params = p.to_flat();
        let mut r = vec![1.0, 1.0];
        let mut u = [0.0; 2];
        // dt = 0: rates do not move, so u is the readout of r itself.
        policy_step(layout, &params, &mut r, &[0.0], 0.0, &mut u);
        assert_eq!(u, [2.0, -1.0]);
    }
}

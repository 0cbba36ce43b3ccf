//! Quantum-jump (Monte Carlo wave-function) unraveling of the master equation.
//!
//! Between jumps the state evolves under H_eff = Ĥ − (i/2) Σ_c r_c L_c†L_c.
//! Since H_eff is time independent it is diagonalised once per parameter set,
//! and each waiting time is the exact root of ‖e^{−iH_eff t}ψ‖² = u for a
//! uniform threshold u, located by bracketing and a safeguarded Newton
//! iteration.

mod blinking;
mod ft;
mod stats;

pub use blinking::{blink_threshold, blinking_segments, Phase, Segment};
pub use ft::{empirical_ft, window_counts, FtRow, FtTable};
pub use stats::{
    bimodality_ratio, ensemble_stats, histogram, net_activity, net_count, Binning,
    EnsembleStats, Histogram,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::linalg::{self, c};
use crate::liouvillian::{all_channels, collective_pair, JumpChannel};
use crate::spectral::{stationary_limit, steady_state};
use crate::spin_algebra::{self, ModelParams, DIM};
use crate::{CMat, Error, Result, C64};

/// A trajectory whose no-jump norm stays above its threshold this long is
/// declared trapped in the dark subspace.
pub const STALL_TIME: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    MaxTime(f64),
    Jumps(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    /// Index into the channel table of [`build_channels`].
    pub channel: u8,
    pub weight: i8,
}

#[derive(Debug, Clone)]
pub struct JumpRecord {
    pub seed: u64,
    pub stream: u64,
    pub initial_state: Vec<C64>,
    pub events: Vec<JumpEvent>,
    pub total_time: f64,
    pub dark_trapped: bool,
    pub params: ModelParams,
}

/// Channels with nonzero rate, in the fixed order collective emission,
/// collective absorption, then per-site emission/absorption.
pub fn build_channels(p: &ModelParams) -> Vec<JumpChannel> {
    all_channels(p).into_iter().filter(|ch| ch.rate > 0.0).collect()
}

/// H_eff = Ĥ − (i/2) Σ_c r_c L_c†L_c.
pub fn effective_hamiltonian(p: &ModelParams) -> CMat {
    let mut h = spin_algebra::build_hamiltonian(p).matrix;
    for ch in build_channels(p) {
        let ldl = &linalg::adjoint(&ch.operator.matrix) * &ch.operator.matrix;
        h -= linalg::scale(&ldl, c(0.0, 0.5 * ch.rate));
    }
    h
}

type Vec8 = [C64; DIM];
type Mat8 = [[C64; DIM]; DIM];

fn to_array(m: &CMat) -> Mat8 {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

fn apply8(m: &Mat8, v: &Vec8) -> Vec8 {
    std::array::from_fn(|i| m[i].iter().zip(v).map(|(a, b)| a * b).sum())
}

fn norm_sq8(v: &Vec8) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// e^{−iH_eff t} in the eigenbasis of H_eff.
#[derive(Debug, Clone)]
struct NoJumpPropagator {
    eigvals: Vec8,
    vecs: Mat8,
    inv: Mat8,
    /// Gram matrix V†V, so that ‖V b‖² = b†Gb.
    gram: Mat8,
    /// Initial bracketing step for waiting times.
    step: f64,
}

impl NoJumpPropagator {
    fn new(heff: &CMat) -> Result<Self> {
        let (eigvals, vecs) = linalg::eigen(heff)?;
        let inv = linalg::inverse(&vecs);
        let diag = CMat::from_fn(DIM, DIM, |i, j| if i == j { eigvals[i] } else { c(0.0, 0.0) });
        let err = linalg::max_abs_diff(&(&vecs * &diag * &inv), heff);
        if !(err <= 1e-8 * linalg::max_abs(heff).max(1.0)) {
            return Err(Error::Propagator(format!(
                "eigendecomposition residual {err:e}"
            )));
        }
        let fastest = eigvals.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let step = if fastest > 0.0 { 0.1 / fastest } else { 1.0 };
        let gram = linalg::adjoint(&vecs) * &vecs;
        Ok(Self {
            eigvals: std::array::from_fn(|i| eigvals[i]),
            vecs: to_array(&vecs),
            inv: to_array(&inv),
            gram: to_array(&gram),
            step,
        })
    }

    fn coefficients(&self, psi: &Vec8) -> Vec8 {
        apply8(&self.inv, psi)
    }

    fn phased(&self, coeffs: &Vec8, t: f64) -> Vec8 {
        std::array::from_fn(|i| coeffs[i] * (c(0.0, -t) * self.eigvals[i]).exp())
    }

    fn evolve(&self, coeffs: &Vec8, t: f64) -> Vec8 {
        apply8(&self.vecs, &self.phased(coeffs, t))
    }

    /// Squared norm at time t and its time derivative.
    fn norm_sq(&self, coeffs: &Vec8, t: f64) -> (f64, f64) {
        let b = self.phased(coeffs, t);
        let (mut n, mut dn) = (0.0, 0.0);
        for i in 0..DIM {
            let bi = b[i].conj();
            let li = self.eigvals[i].conj();
            for j in 0..DIM {
                let term = bi * self.gram[i][j] * b[j];
                n += term.re;
                // d/dt of conj(b_i) b_j is i(conj λ_i − λ_j) conj(b_i) b_j
                dn += (term * c(0.0, 1.0) * (li - self.eigvals[j])).re;
            }
        }
        (n, dn)
    }

    /// Time at which the squared norm falls to `threshold`, if before `horizon`.
    fn crossing(&self, coeffs: &Vec8, threshold: f64, horizon: f64) -> Option<f64> {
        if horizon <= 0.0 || self.norm_sq(coeffs, horizon).0 > threshold {
            return None;
        }
        let mut lo = 0.0;
        // first guess: exponential decay at the initial loss rate
        let (n0, dn0) = self.norm_sq(coeffs, 0.0);
        let guess = if dn0 < 0.0 { (n0 / threshold).ln() / (-dn0 / n0) } else { 0.0 };
        let mut hi = if guess.is_finite() && guess > 0.0 { guess } else { self.step }.min(horizon);
        while self.norm_sq(coeffs, hi).0 > threshold {
            lo = hi;
            hi = (2.0 * hi).min(horizon);
        }
        // Newton on the bracket, falling back to bisection when a step leaves it
        let mut t = 0.5 * (lo + hi);
        for _ in 0..200 {
            let (n, dn) = self.norm_sq(coeffs, t);
            let f = n - threshold;
            if f.abs() <= 1e-15 {
                return Some(t);
            }
            if f > 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let newton = t - f / dn;
            let next = if dn < 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - t).abs() <= 1e-13 * t.max(f64::MIN_POSITIVE) || hi - lo <= 1e-13 * hi {
                return Some(next);
            }
            t = next;
        }
        Some(t)
    }
}

/// ChaCha8 generator keyed by the master seed, one stream per trajectory.
pub fn trajectory_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Haar-random pure state on the 8-dimensional space.
pub fn haar_state<R: Rng + ?Sized>(rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..DIM)
        .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let n = linalg::vec_norm(&v);
    v.into_iter().map(|z| z / n).collect()
}

/// Reusable sampler holding the channel table and the no-jump propagator.
#[derive(Debug, Clone)]
pub struct TrajectorySampler {
    params: ModelParams,
    channels: Vec<JumpChannel>,
    operators: Vec<Mat8>,
    propagator: NoJumpPropagator,
}

impl TrajectorySampler {
    pub fn new(p: &ModelParams) -> Result<Self> {
        p.validate()?;
        let channels = build_channels(p);
        Ok(Self {
            params: *p,
            operators: channels.iter().map(|ch| to_array(&ch.operator.matrix)).collect(),
            channels,
            propagator: NoJumpPropagator::new(&effective_hamiltonian(p))?,
        })
    }

    pub fn channels(&self) -> &[JumpChannel] {
        &self.channels
    }

    /// Trajectory from a Haar-random initial state drawn from the same stream.
    pub fn sample(&self, master_seed: u64, stream: u64, stop: Stop) -> Result<JumpRecord> {
        let mut rng = trajectory_rng(master_seed, stream);
        let psi0 = haar_state(&mut rng);
        self.sample_from(&psi0, &mut rng, master_seed, stream, stop)
    }

    pub fn sample_from<R: Rng + ?Sized>(
        &self,
        psi0: &[C64],
        rng: &mut R,
        master_seed: u64,
        stream: u64,
        stop: Stop,
    ) -> Result<JumpRecord> {
        match stop {
            Stop::MaxTime(t) if !(t > 0.0) => {
                return Err(Error::InvalidParameter {
                    name: "t_max",
                    reason: format!("must be > 0 (got {t})"),
                })
            }
            Stop::Jumps(0) => {
                return Err(Error::InvalidParameter {
                    name: "n_jumps",
                    reason: "must be > 0".into(),
                })
            }
            _ => {}
        }
        if psi0.len() != DIM {
            return Err(Error::DimensionMismatch {
                expected: DIM.to_string(),
                found: psi0.len().to_string(),
            });
        }
        let n0 = linalg::vec_norm(psi0);
        let psi: Vec8 = std::array::from_fn(|i| psi0[i] / n0);
        let mut coeffs = self.propagator.coefficients(&psi);
        let mut now = 0.0;
        let mut events = Vec::new();
        if let Stop::Jumps(n) = stop {
            events.reserve(n);
        }
        let mut dark_trapped = false;

        let total_time = loop {
            let threshold = 1.0 - rng.random::<f64>();
            let horizon = match stop {
                Stop::MaxTime(t_max) => (t_max - now).min(STALL_TIME),
                Stop::Jumps(_) => STALL_TIME,
            };
            let Some(wait) = self.propagator.crossing(&coeffs, threshold, horizon) else {
                if horizon >= STALL_TIME {
                    dark_trapped = true;
                    break now + STALL_TIME;
                }
                dark_trapped = self.propagator.norm_sq(&coeffs, STALL_TIME).0 > threshold;
                break match stop {
                    Stop::MaxTime(t_max) => t_max,
                    Stop::Jumps(_) => unreachable!(),
                };
            };
            now += wait;
            let state = self.propagator.evolve(&coeffs, wait);
            let images: Vec<Vec8> = self.operators.iter().map(|l| apply8(l, &state)).collect();
            let weights: Vec<f64> = self
                .channels
                .iter()
                .zip(&images)
                .map(|(ch, img)| ch.rate * norm_sq8(img))
                .collect();
            let total: f64 = weights.iter().sum();
            if !(total > 0.0) {
                return Err(Error::Propagator(
                    "norm decayed while every jump rate vanishes".into(),
                ));
            }
            let mut pick = rng.random::<f64>() * total;
            let mut chosen = weights.len() - 1;
            for (i, w) in weights.iter().enumerate() {
                if pick < *w {
                    chosen = i;
                    break;
                }
                pick -= w;
            }
            let jumped = &images[chosen];
            let n = norm_sq8(jumped).sqrt();
            let psi: Vec8 = std::array::from_fn(|i| jumped[i] / n);
            coeffs = self.propagator.coefficients(&psi);
            events.push(JumpEvent {
                time: now,
                channel: chosen as u8,
                weight: self.channels[chosen].count_weight,
            });
            if let Stop::Jumps(n) = stop {
                if events.len() >= n {
                    break now;
                }
            }
        };

        Ok(JumpRecord {
            seed: master_seed,
            stream,
            initial_state: psi.to_vec(),
            events,
            total_time,
            dark_trapped,
            params: self.params,
        })
    }
}

/// Mean total jump rate Σ_c r_c tr(L_c†L_c ρ) in the stationary state. With
/// γ = 0 the state is the active-phase limit reached from the range of σ₋.
pub fn stationary_jump_rate(p: &ModelParams) -> Result<f64> {
    let rho = if p.gamma_single > 0.0 {
        steady_state(p)?.rho.matrix
    } else {
        let (lower, raise) = collective_pair(p);
        let seed = &lower.matrix * &raise.matrix;
        let tr = linalg::trace(&seed).re;
        stationary_limit(p, &linalg::scale_re(&seed, 1.0 / tr))?.0
    };
    Ok(build_channels(p)
        .iter()
        .map(|ch| {
            let ldl = &linalg::adjoint(&ch.operator.matrix) * &ch.operator.matrix;
            ch.rate * linalg::trace(&(&ldl * &rho)).re
        })
        .sum())
}

/// Fixed horizon holding `n_jumps` events on average in the stationary state.
///
/// Stopping at a fixed time keeps the net-rate estimate K/T unbiased;
/// stopping at the n-th jump makes T random and biases K/T upwards.
pub fn matched_horizon(p: &ModelParams, n_jumps: usize) -> Result<Stop> {
    let rate = stationary_jump_rate(p)?;
    if !(rate > 0.0) {
        return Err(Error::InvalidParameter {
            name: "n_jumps",
            reason: "no jumps occur in the stationary state".into(),
        });
    }
    Ok(Stop::MaxTime(n_jumps as f64 / rate))
}

/// Single trajectory on stream 0 of `seed`.
pub fn sample_trajectory(p: &ModelParams, seed: u64, stop: Stop) -> Result<JumpRecord> {
    TrajectorySampler::new(p)?.sample(seed, 0, stop)
}

/// `n` independent trajectories; trajectory i uses stream i of the master
/// seed, so the output does not depend on the number of worker threads.
pub fn sample_ensemble(
    p: &ModelParams,
    n: usize,
    master_seed: u64,
    stop: Stop,
) -> Result<Vec<JumpRecord>> {
    let sampler = TrajectorySampler::new(p)?;
    (0..n as u64)
        .into_par_iter()
        .map(|i| sampler.sample(master_seed, i, stop))
        .collect()
}

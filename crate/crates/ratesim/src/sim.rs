//! Deterministic simulation: slot-mode and packet-mode runs, pseudo-regret
//! accounting, and seed-indexed Monte-Carlo aggregation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::env::Environment;
use crate::policy::RatePolicy;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("horizon must be at least 1")]
    EmptyHorizon,
    #[error("packet size must be positive")]
    BadPacketSize,
    #[error("history length {history} does not match expectation {expected}")]
    LengthMismatch { history: usize, expected: usize },
}

/// One recorded transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotRecord {
    /// Slot at which the transmission started (1-based).
    pub slot: u64,
    pub decision: usize,
    pub success: bool,
    /// Realized reward: the decision's rate on success, 0 otherwise.
    pub reward: f64,
}

/// Full record of one run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimHistory {
    pub records: Vec<SlotRecord>,
}

impl SimHistory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Pull counts per decision.
    pub fn pull_counts(&self, arms: usize) -> Vec<u64> {
        let mut counts = vec![0u64; arms];
        for r in &self.records {
            counts[r.decision] += 1;
        }
        counts
    }
}

/// Default slot duration, in microseconds (0.5 ms).
pub const SLOT_MICROS: f64 = 500.0;
/// Default packet size: 1500-byte packets.
pub const DEFAULT_PACKET_BITS: f64 = 12_000.0;

/// Slot-mode run: one decision per slot, `horizon` slots, fully
/// deterministic in the seed.
pub fn run_slots(
    policy: &mut dyn RatePolicy,
    env: &Environment,
    horizon: u64,
    seed: u64,
) -> Result<SimHistory, SimError> {
    if horizon == 0 {
        return Err(SimError::EmptyHorizon);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(horizon as usize);
    for slot in 1..=horizon {
        let decision = policy.select(slot, &mut rng);
        let success = env.sample_outcome(slot, decision, &mut rng);
        policy.update(decision, success);
        let reward = if success { env.rates.get(decision) } else { 0.0 };
        records.push(SlotRecord { slot, decision, success, reward });
    }
    Ok(SimHistory { records })
}

/// Packet-mode run on a continuous microsecond clock: each transmission at
/// rate `r` Mbit/s occupies `packet_bits / r` microseconds; the policy is
/// consulted once per packet; the run stops once the clock passes
/// `wall_slots` slots of [`SLOT_MICROS`] each.
pub fn run_packets(
    policy: &mut dyn RatePolicy,
    env: &Environment,
    wall_slots: u64,
    packet_bits: f64,
    seed: u64,
) -> Result<SimHistory, SimError> {
    if wall_slots == 0 {
        return Err(SimError::EmptyHorizon);
    }
    if packet_bits <= 0.0 {
        return Err(SimError::BadPacketSize);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    let wall_micros = wall_slots as f64 * SLOT_MICROS;
    let mut clock = 0.0f64;
    while clock < wall_micros {
        let slot = (clock / SLOT_MICROS) as u64 + 1;
        let decision = policy.select(slot, &mut rng);
        let success = env.sample_outcome(slot, decision, &mut rng);
        policy.update(decision, success);
        let reward = if success { env.rates.get(decision) } else { 0.0 };
        records.push(SlotRecord { slot, decision, success, reward });
        clock += packet_bits / env.rates.get(decision);
    }
    Ok(SimHistory { records })
}

/// Cumulative pseudo-regret: per-record gap between the optimal and the
/// chosen mean reward, evaluated on the true success probabilities.
pub fn pseudo_regret(history: &SimHistory, env: &Environment) -> Vec<f64> {
    let mut series = Vec::with_capacity(history.len());
    let mut acc = 0.0;
    for r in &history.records {
        let best = env.best_arm(r.slot);
        acc += env.mean_reward(r.slot, best) - env.mean_reward(r.slot, r.decision);
        series.push(acc);
    }
    series
}

/// Cumulative realized regret: optimal mean reward minus the realized
/// reward actually obtained.
pub fn realized_regret(history: &SimHistory, env: &Environment) -> Vec<f64> {
    let mut series = Vec::with_capacity(history.len());
    let mut acc = 0.0;
    for r in &history.records {
        let best = env.best_arm(r.slot);
        acc += env.mean_reward(r.slot, best) - r.reward;
        series.push(acc);
    }
    series
}

/// Trailing moving average of realized reward per record.
pub fn windowed_throughput(history: &SimHistory, window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut series = Vec::with_capacity(history.len());
    let mut acc = 0.0;
    for (i, r) in history.records.iter().enumerate() {
        acc += r.reward;
        if i >= window {
            acc -= history.records[i - window].reward;
        }
        series.push(acc / window.min(i + 1) as f64);
    }
    series
}

/// Pointwise mean and standard error of a regret series at the requested
/// checkpoint slots.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretSummary {
    pub checkpoints: Vec<u64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub runs: u64,
}

impl RegretSummary {
    pub fn at(&self, slot: u64) -> Option<(f64, f64)> {
        self.checkpoints
            .iter()
            .position(|&s| s == slot)
            .map(|i| (self.mean[i], self.stderr[i]))
    }
}

/// Monte-Carlo aggregation over seeds `base_seed .. base_seed + n_runs`.
///
/// Runs execute in parallel but are combined sequentially in seed order, so
/// the output is bit-identical regardless of thread count. When
/// `realized` is false the averaged series is the pseudo-regret.
pub fn monte_carlo(
    make_policy: &(dyn Fn() -> Box<dyn RatePolicy> + Sync),
    env: &Environment,
    horizon: u64,
    n_runs: u64,
    base_seed: u64,
    checkpoints: &[u64],
    realized: bool,
) -> Result<RegretSummary, SimError> {
    if horizon == 0 {
        return Err(SimError::EmptyHorizon);
    }
    let checkpoints: Vec<u64> =
        checkpoints.iter().copied().filter(|&s| s >= 1 && s <= horizon).collect();
    let per_run: Vec<Vec<f64>> = (0..n_runs)
        .into_par_iter()
        .map(|i| {
            let mut policy = make_policy();
            let history = run_slots(policy.as_mut(), env, horizon, base_seed + i)
                .expect("horizon checked above");
            let series = if realized {
                realized_regret(&history, env)
            } else {
                pseudo_regret(&history, env)
            };
            checkpoints.iter().map(|&s| series[(s - 1) as usize]).collect()
        })
        .collect();
    Ok(summarize(checkpoints, &per_run, n_runs))
}

/// Seed-order reduction of per-run checkpoint values into mean and
/// standard error.
fn summarize(checkpoints: Vec<u64>, per_run: &[Vec<f64>], n_runs: u64) -> RegretSummary {
    let m = checkpoints.len();
    let mut sum = vec![0.0; m];
    let mut sumsq = vec![0.0; m];
    for run in per_run {
        for j in 0..m {
            sum[j] += run[j];
            sumsq[j] += run[j] * run[j];
        }
    }
    let n = n_runs as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let stderr: Vec<f64> = (0..m)
        .map(|j| {
            if n_runs < 2 {
                0.0
            } else {
                let var = (sumsq[j] - sum[j] * sum[j] / n) / (n - 1.0);
                (var.max(0.0) / n).sqrt()
            }
        })
        .collect();
    RegretSummary { checkpoints, mean, stderr, runs: n_runs }
}

/// Packet-mode counterpart of [`monte_carlo`]: checkpoints are wall-clock
/// slots, and each run's series is sampled at the last packet started on or
/// before the checkpoint (0 before the first packet).
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_packets(
    make_policy: &(dyn Fn() -> Box<dyn RatePolicy> + Sync),
    env: &Environment,
    wall_slots: u64,
    packet_bits: f64,
    n_runs: u64,
    base_seed: u64,
    checkpoints: &[u64],
    realized: bool,
) -> Result<RegretSummary, SimError> {
    if wall_slots == 0 {
        return Err(SimError::EmptyHorizon);
    }
    if packet_bits <= 0.0 {
        return Err(SimError::BadPacketSize);
    }
    let checkpoints: Vec<u64> =
        checkpoints.iter().copied().filter(|&s| s >= 1 && s <= wall_slots).collect();
    let per_run: Vec<Vec<f64>> = (0..n_runs)
        .into_par_iter()
        .map(|i| {
            let mut policy = make_policy();
            let history =
                run_packets(policy.as_mut(), env, wall_slots, packet_bits, base_seed + i)
                    .expect("arguments checked above");
            let series = if realized {
                realized_regret(&history, env)
            } else {
                pseudo_regret(&history, env)
            };
            checkpoints
                .iter()
                .map(|&s| {
                    let idx = history.records.partition_point(|r| r.slot <= s);
                    if idx == 0 {
                        0.0
                    } else {
                        series[idx - 1]
                    }
                })
                .collect()
        })
        .collect();
    Ok(summarize(checkpoints, &per_run, n_runs))
}

/// Checkpoints `stride, 2*stride, ..` up to and including the horizon.
pub fn stride_checkpoints(horizon: u64, stride: u64) -> Vec<u64> {
    let stride = stride.max(1);
    let mut out: Vec<u64> = (1..=horizon / stride).map(|i| i * stride).collect();
    if out.last() != Some(&horizon) {
        out.push(horizon);
    }
    out
}

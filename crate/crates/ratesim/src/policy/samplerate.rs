//! The SampleRate heuristic: pick the rate with the best windowed empirical
//! throughput, probe a random higher rate every tenth packet, and bench a
//! rate for a window after four consecutive losses.

use std::collections::VecDeque;

use rand::{Rng, RngCore};

use super::RatePolicy;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRateParams {
    /// Throughput-estimation window, in packets.
    pub window: usize,
    /// Probe cadence: explore on every `explore_every`-th packet.
    pub explore_every: u64,
    /// Consecutive losses before a rate is benched for a window length.
    pub loss_exclusion: u32,
}

impl Default for SampleRateParams {
    fn default() -> Self {
        Self { window: 500, explore_every: 10, loss_exclusion: 4 }
    }
}

#[derive(Debug, Clone)]
pub struct SampleRate {
    rates: Vec<f64>,
    params: SampleRateParams,
    buffer: VecDeque<(usize, bool)>,
    attempts: Vec<u64>,
    successes: Vec<u64>,
    consecutive_losses: Vec<u32>,
    excluded_until: Vec<u64>,
    packets: u64,
}

impl SampleRate {
    pub fn new(rates: &[f64], params: SampleRateParams) -> Self {
        let k = rates.len();
        Self {
            rates: rates.to_vec(),
            params,
            buffer: VecDeque::with_capacity(params.window + 1),
            attempts: vec![0; k],
            successes: vec![0; k],
            consecutive_losses: vec![0; k],
            excluded_until: vec![0; k],
            packets: 0,
        }
    }

    /// Windowed empirical success ratio; 0 before any attempt.
    pub fn theta_hat(&self, k: usize) -> f64 {
        if self.attempts[k] == 0 {
            0.0
        } else {
            self.successes[k] as f64 / self.attempts[k] as f64
        }
    }

    fn windowed_throughput(&self, k: usize) -> f64 {
        self.rates[k] * self.theta_hat(k)
    }

    pub fn is_excluded(&self, k: usize) -> bool {
        self.packets < self.excluded_until[k]
    }

    /// Best windowed throughput among selectable rates; cold start lands on
    /// the lowest rate because every throughput estimate is still 0.
    fn current_rate(&self) -> usize {
        let mut best = None;
        let mut best_tp = f64::NEG_INFINITY;
        for k in 0..self.rates.len() {
            if self.is_excluded(k) {
                continue;
            }
            let tp = self.windowed_throughput(k);
            if tp > best_tp {
                best_tp = tp;
                best = Some(k);
            }
        }
        match best {
            Some(k) => k,
            // every rate benched: reopen the lowest rate rather than stall
            None => 0,
        }
    }

    /// Rates strictly faster than the current rate's throughput, excluding
    /// the current rate and benched rates.
    fn exploration_candidates(&self, current: usize) -> Vec<usize> {
        let floor = self.windowed_throughput(current);
        (0..self.rates.len())
            .filter(|&k| k != current && !self.is_excluded(k) && self.rates[k] > floor)
            .collect()
    }
}

impl RatePolicy for SampleRate {
    fn name(&self) -> &str {
        "samplerate"
    }

    fn arm_count(&self) -> usize {
        self.rates.len()
    }

    fn select(&mut self, _slot: u64, rng: &mut dyn RngCore) -> usize {
        self.packets += 1;
        let current = self.current_rate();
        if self.is_excluded(current) {
            // the all-benched fallback: end the bench early so the rate is
            // genuinely selectable again
            self.excluded_until[current] = self.packets;
        }
        if self.packets % self.params.explore_every == 0 {
            let candidates = self.exploration_candidates(current);
            if !candidates.is_empty() {
                let pick = rng.gen_range(0..candidates.len());
                return candidates[pick];
            }
        }
        current
    }

    fn update(&mut self, decision: usize, success: bool) {
        self.buffer.push_back((decision, success));
        self.attempts[decision] += 1;
        self.successes[decision] += success as u64;
        if self.buffer.len() > self.params.window {
            let (old_k, old_s) = self.buffer.pop_front().unwrap();
            self.attempts[old_k] -= 1;
            self.successes[old_k] -= old_s as u64;
        }
        if success {
            self.consecutive_losses[decision] = 0;
        } else {
            self.consecutive_losses[decision] += 1;
            if self.consecutive_losses[decision] >= self.params.loss_exclusion {
                self.excluded_until[decision] = self.packets + self.params.window as u64;
                self.consecutive_losses[decision] = 0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rates8() -> Vec<f64> {
        vec![6.0, 9.0, 12.0, 18.0, 24.0, 36.0, 48.0, 54.0]
    }

    #[test]
    fn cold_start_picks_lowest_rate() {
        let mut p = SampleRate::new(&rates8(), SampleRateParams::default());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(p.select(1, &mut rng), 0);
    }

    #[test]
    fn four_losses_bench_the_rate() {
        let params = SampleRateParams { window: 50, ..Default::default() };
        let mut p = SampleRate::new(&rates8(), params);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // rate 2 looks best, then suffers 4 straight losses
        for _ in 0..5 {
            p.packets += 1;
            p.update(2, true);
        }
        for _ in 0..4 {
            p.packets += 1;
            p.update(2, false);
        }
        assert!(p.is_excluded(2));
        let until = p.excluded_until[2];
        for _ in 0..60 {
            let d = p.select(0, &mut rng);
            if p.packets < until {
                assert_ne!(d, 2);
            }
            p.update(d, true);
        }
        // bench expires after a window's worth of packets
        assert!(!p.is_excluded(2));
    }

    #[test]
    fn exploration_candidates_above_current_throughput() {
        let mut p = SampleRate::new(&rates8(), SampleRateParams::default());
        // current rate 24 Mbit/s at 90% success: throughput 21.6
        for _ in 0..10 {
            p.packets += 1;
            p.update(4, true);
        }
        p.packets += 1;
        p.update(4, false);
        let current = p.current_rate();
        assert_eq!(current, 4);
        let cands = p.exploration_candidates(current);
        // 24 * (10/11) = 21.8: rates above are 36, 48, 54; 24 is the current
        assert_eq!(cands, vec![5, 6, 7]);
    }

    #[test]
    fn explores_on_schedule() {
        let mut p = SampleRate::new(&rates8(), SampleRateParams::default());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut explored = 0;
        for n in 1..=100u64 {
            let d = p.select(n, &mut rng);
            // low rate always succeeds, everything else fails
            p.update(d, d == 0);
            if n % 10 == 0 && d != 0 {
                explored += 1;
            }
        }
        assert!(explored > 0);
    }
}

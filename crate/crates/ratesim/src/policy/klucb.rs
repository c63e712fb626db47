//! Unstructured KL upper-confidence policies over the rate set: the
//! full-history variant budgets exploration with `f(n)` at slot `n`, the
//! sliding-window variant with the constant `f(tau)`.

use rand::RngCore;

use super::stats::{History, PlayRecord};
use super::RatePolicy;
use crate::kl::{exploration_threshold, kl_ucb_index};

#[derive(Debug, Clone)]
pub struct KlRUcb {
    name: String,
    rates: Vec<f64>,
    c: f64,
    stats: History,
    selects: u64,
    tau: Option<usize>,
}

impl KlRUcb {
    pub fn new(rates: &[f64], c: f64) -> Self {
        Self {
            name: "klrucb".to_string(),
            rates: rates.to_vec(),
            c,
            stats: History::full(rates.len()),
            selects: 0,
            tau: None,
        }
    }

    pub fn sliding_window(rates: &[f64], c: f64, tau: usize) -> Self {
        Self {
            name: "sw-klrucb".to_string(),
            rates: rates.to_vec(),
            c,
            stats: History::window(rates.len(), tau),
            selects: 0,
            tau: Some(tau),
        }
    }

    pub fn stats(&self) -> &History {
        &self.stats
    }

    /// Index of arm `k` at the current slot.
    pub fn index(&self, k: usize) -> f64 {
        let threshold = match self.tau {
            Some(tau) => exploration_threshold(tau as u64, self.c),
            None => exploration_threshold(self.selects, self.c),
        };
        kl_ucb_index(self.stats.mean(k), self.stats.samples(k), threshold, self.rates[k])
            .expect("means stay within [0, r] by construction")
    }
}

impl RatePolicy for KlRUcb {
    fn name(&self) -> &str {
        &self.name
    }

    fn arm_count(&self) -> usize {
        self.rates.len()
    }

    fn select(&mut self, _slot: u64, _rng: &mut dyn RngCore) -> usize {
        self.selects += 1;
        let n = self.selects;
        if n <= self.rates.len() as u64 {
            return (n - 1) as usize;
        }
        let mut best = 0;
        let mut best_index = f64::NEG_INFINITY;
        for k in 0..self.rates.len() {
            let index = self.index(k);
            if index > best_index {
                best_index = index;
                best = k;
            }
        }
        best
    }

    fn update(&mut self, decision: usize, success: bool) {
        let reward = if success { self.rates[decision] } else { 0.0 };
        self.stats.record(PlayRecord { decision, reward, leader: None });
    }
}

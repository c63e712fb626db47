//! Clairvoyant baseline: always plays the instantaneous optimum.

use rand::RngCore;

use super::RatePolicy;
use crate::env::Environment;

#[derive(Debug, Clone)]
pub struct Oracle {
    env: Environment,
}

impl Oracle {
    pub fn new(env: Environment) -> Self {
        Self { env }
    }
}

impl RatePolicy for Oracle {
    fn name(&self) -> &str {
        "oracle"
    }

    fn arm_count(&self) -> usize {
        self.env.rates.len()
    }

    fn select(&mut self, slot: u64, _rng: &mut dyn RngCore) -> usize {
        self.env.best_arm(slot)
    }

    fn update(&mut self, _decision: usize, _success: bool) {}
}

//! Per-decision statistics shared by the index policies: full-history
//! counters and their sliding-window counterparts backed by a ring buffer.

use std::collections::VecDeque;

/// One recorded play: the decision taken, the reward observed, and the
/// leader computed at that slot (None during initialization, and for
/// policies that do not track a leader).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlayRecord {
    pub decision: usize,
    pub reward: f64,
    pub leader: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Counters {
    t: Vec<u64>,
    reward_sum: Vec<f64>,
    leader: Vec<u64>,
}

impl Counters {
    fn new(arms: usize) -> Self {
        Self { t: vec![0; arms], reward_sum: vec![0.0; arms], leader: vec![0; arms] }
    }

    fn add(&mut self, rec: &PlayRecord) {
        self.t[rec.decision] += 1;
        self.reward_sum[rec.decision] += rec.reward;
        if let Some(l) = rec.leader {
            self.leader[l] += 1;
        }
    }

    fn remove(&mut self, rec: &PlayRecord) {
        self.t[rec.decision] -= 1;
        self.reward_sum[rec.decision] -= rec.reward;
        if let Some(l) = rec.leader {
            self.leader[l] -= 1;
        }
    }
}

/// Full-history or windowed statistics behind one interface.
#[derive(Debug, Clone, PartialEq)]
pub enum History {
    Full {
        counters: Counters,
        updates: u64,
    },
    Window {
        counters: Counters,
        buffer: VecDeque<PlayRecord>,
        tau: usize,
    },
}

impl History {
    pub fn full(arms: usize) -> Self {
        Self::Full { counters: Counters::new(arms), updates: 0 }
    }

    pub fn window(arms: usize, tau: usize) -> Self {
        assert!(tau >= 1, "window size must be at least 1");
        Self::Window {
            counters: Counters::new(arms),
            buffer: VecDeque::with_capacity(tau + 1),
            tau,
        }
    }

    pub fn arms(&self) -> usize {
        match self {
            Self::Full { counters, .. } | Self::Window { counters, .. } => counters.t.len(),
        }
    }

    pub fn record(&mut self, rec: PlayRecord) {
        match self {
            Self::Full { counters, updates } => {
                counters.add(&rec);
                *updates += 1;
            }
            Self::Window { counters, buffer, tau } => {
                counters.add(&rec);
                buffer.push_back(rec);
                if buffer.len() > *tau {
                    let old = buffer.pop_front().unwrap();
                    counters.remove(&old);
                }
            }
        }
    }

    pub fn samples(&self, d: usize) -> u64 {
        self.counters().t[d]
    }

    /// Empirical mean reward; 0 when unobserved.
    pub fn mean(&self, d: usize) -> f64 {
        let c = self.counters();
        if c.t[d] == 0 {
            0.0
        } else {
            c.reward_sum[d] / c.t[d] as f64
        }
    }

    pub fn leader_count(&self, d: usize) -> u64 {
        self.counters().leader[d]
    }

    pub fn updates(&self) -> u64 {
        match self {
            Self::Full { updates, .. } => *updates,
            Self::Window { buffer, .. } => buffer.len() as u64,
        }
    }

    fn counters(&self) -> &Counters {
        match self {
            Self::Full { counters, .. } | Self::Window { counters, .. } => counters,
        }
    }

    /// From-scratch recomputation over the buffered records (windowed only);
    /// used to cross-check the incremental ring-buffer arithmetic.
    pub fn recomputed(&self) -> Option<Self> {
        match self {
            Self::Full { .. } => None,
            Self::Window { buffer, tau, counters } => {
                let mut fresh = Counters::new(counters.t.len());
                for rec in buffer {
                    fresh.add(rec);
                }
                Some(Self::Window { counters: fresh, buffer: buffer.clone(), tau: *tau })
            }
        }
    }
}

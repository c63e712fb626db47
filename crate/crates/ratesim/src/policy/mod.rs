//! Sequential decision policies behind one trait, registered by name.
//!
//! Every algorithm variant implements [`RatePolicy`] and is constructed
//! through [`build_policy`] from a [`PolicyConfig`]; [`registry`] lists the
//! available names so front ends can enumerate them.

use rand::RngCore;
use thiserror::Error;

use crate::env::Environment;
use crate::graph::{DecisionGraph, GraphError};

pub mod klucb;
pub mod leader;
pub mod oracle;
pub mod samplerate;
pub mod stats;

pub use klucb::KlRUcb;
pub use leader::LeaderPolicy;
pub use oracle::Oracle;
pub use samplerate::{SampleRate, SampleRateParams};

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("unknown policy `{0}`; known: {1}")]
    Unknown(String, String),
    #[error("policy `{0}` needs a sliding-window size (tau)")]
    MissingTau(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// The common sequential interface: one `select` per slot, followed by one
/// `update` with the observed outcome of the selected decision.
pub trait RatePolicy: Send {
    fn name(&self) -> &str;
    fn arm_count(&self) -> usize;
    /// Pick a decision for `slot` (1-based). The generator is only consumed
    /// by randomized policies, keeping deterministic policies bit-stable.
    fn select(&mut self, slot: u64, rng: &mut dyn RngCore) -> usize;
    /// Report the success flag observed for the decision just selected.
    fn update(&mut self, decision: usize, success: bool);
}

/// Construction record for any registered policy.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyConfig {
    pub name: String,
    /// Constant `c` in the exploration budget `log(l) + c log(log(l))`.
    pub c: f64,
    /// Sliding-window length, required by the `sw-*` variants.
    pub tau: Option<usize>,
    /// Forced-leader divisor override for the graphical variants.
    pub divisor: Option<u64>,
    pub samplerate: SampleRateParams,
}

impl PolicyConfig {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            c: 3.0,
            tau: None,
            divisor: None,
            samplerate: SampleRateParams::default(),
        }
    }

    pub fn with_tau(mut self, tau: usize) -> Self {
        self.tau = Some(tau);
        self
    }
}

/// Everything a constructor may need: the environment (rates; the oracle
/// also reads the profile) and an optional decision graph for the
/// graphical variants (defaults to the rate line).
pub struct BuildContext<'a> {
    pub env: &'a Environment,
    pub graph: Option<&'a DecisionGraph>,
}

impl<'a> BuildContext<'a> {
    pub fn new(env: &'a Environment) -> Self {
        Self { env, graph: None }
    }

    pub fn with_graph(mut self, graph: &'a DecisionGraph) -> Self {
        self.graph = Some(graph);
        self
    }

    fn graph_or_line(&self) -> Result<DecisionGraph, PolicyError> {
        match self.graph {
            Some(g) => Ok(g.clone()),
            None => Ok(DecisionGraph::line(self.env.rates.as_slice())?),
        }
    }
}

type Constructor = fn(&PolicyConfig, &BuildContext) -> Result<Box<dyn RatePolicy>, PolicyError>;

/// A named entry in the policy registry.
pub struct PolicyEntry {
    pub name: &'static str,
    pub summary: &'static str,
    construct: Constructor,
}

fn require_tau(cfg: &PolicyConfig) -> Result<usize, PolicyError> {
    cfg.tau.ok_or_else(|| PolicyError::MissingTau(cfg.name.clone()))
}

static REGISTRY: &[PolicyEntry] = &[
    PolicyEntry {
        name: "klrucb",
        summary: "KL upper-confidence index over rates, full history",
        construct: |cfg, ctx| Ok(Box::new(KlRUcb::new(ctx.env.rates.as_slice(), cfg.c))),
    },
    PolicyEntry {
        name: "sw-klrucb",
        summary: "KL upper-confidence index over a sliding window",
        construct: |cfg, ctx| {
            Ok(Box::new(KlRUcb::sliding_window(
                ctx.env.rates.as_slice(),
                cfg.c,
                require_tau(cfg)?,
            )))
        },
    },
    PolicyEntry {
        name: "ors",
        summary: "leader-following index policy on the rate line",
        construct: |cfg, ctx| Ok(Box::new(LeaderPolicy::ors(ctx.env.rates.as_slice(), cfg.c)?)),
    },
    PolicyEntry {
        name: "sw-ors",
        summary: "rate-line leader policy over a sliding window",
        construct: |cfg, ctx| {
            Ok(Box::new(LeaderPolicy::sw_ors(
                ctx.env.rates.as_slice(),
                cfg.c,
                require_tau(cfg)?,
            )?))
        },
    },
    PolicyEntry {
        name: "gors",
        summary: "leader-following index policy on a decision graph",
        construct: |cfg, ctx| {
            Ok(Box::new(LeaderPolicy::gors(ctx.graph_or_line()?, cfg.c, cfg.divisor)))
        },
    },
    PolicyEntry {
        name: "sw-gors",
        summary: "graphical leader policy over a sliding window",
        construct: |cfg, ctx| {
            Ok(Box::new(LeaderPolicy::sw_gors(
                ctx.graph_or_line()?,
                cfg.c,
                require_tau(cfg)?,
                cfg.divisor,
            )))
        },
    },
    PolicyEntry {
        name: "samplerate",
        summary: "windowed-throughput heuristic with periodic probing",
        construct: |cfg, ctx| {
            Ok(Box::new(SampleRate::new(ctx.env.rates.as_slice(), cfg.samplerate)))
        },
    },
    PolicyEntry {
        name: "oracle",
        summary: "clairvoyant baseline, always the instantaneous optimum",
        construct: |_cfg, ctx| Ok(Box::new(Oracle::new(ctx.env.clone()))),
    },
];

pub fn registry() -> &'static [PolicyEntry] {
    REGISTRY
}

/// Construct the policy named in the config.
pub fn build_policy(
    cfg: &PolicyConfig,
    ctx: &BuildContext,
) -> Result<Box<dyn RatePolicy>, PolicyError> {
    match REGISTRY.iter().find(|e| e.name == cfg.name) {
        Some(entry) => (entry.construct)(cfg, ctx),
        None => Err(PolicyError::Unknown(
            cfg.name.clone(),
            REGISTRY.iter().map(|e| e.name).collect::<Vec<_>>().join(", "),
        )),
    }
}

/// Which window-tuning rule to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowFlavor {
    SwKlRUcb,
    SwOrs,
}

#[derive(Debug, Error, PartialEq)]
#[error("sigma must lie in (0, 1), got {0}")]
pub struct WindowError(f64);

/// Drift-matched window length: `(K sigma / phi)^(-4/5) / 4` for the
/// unstructured variant, `sigma^(-3/4) log(1/sigma) / 8` for the
/// leader-following one. Rounded to the nearest integer, floored at 1.
pub fn recommended_window(
    sigma: f64,
    arms: usize,
    phi: f64,
    flavor: WindowFlavor,
) -> Result<usize, WindowError> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(WindowError(sigma));
    }
    let raw = match flavor {
        WindowFlavor::SwKlRUcb => (arms as f64 * sigma / phi).powf(-0.8) / 4.0,
        WindowFlavor::SwOrs => sigma.powf(-0.75) * (1.0 / sigma).ln() / 8.0,
    };
    Ok((raw.round() as usize).max(1))
}

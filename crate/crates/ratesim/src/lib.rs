//! Structured-bandit rate adaptation for 802.11-style links.
//!
//! The crate models link-rate selection as a multi-armed bandit with two
//! structural properties: transmission successes are correlated across rates
//! (a success at a high rate implies success at any lower rate) and the
//! throughput `r_k * theta_k` is unimodal in the rate order.  Policies that
//! exploit this structure (ORS, G-ORS and their sliding-window variants) are
//! provided next to unstructured KL-UCB baselines, the SampleRate heuristic,
//! and a clairvoyant oracle, all behind the common [`policy::RatePolicy`]
//! trait and selectable by name through [`policy::build_policy`].
//!
//! Supporting modules: [`kl`] (Bernoulli KL divergence and confidence
//! indexes), [`env`] (channel models and scenario presets), [`graph`]
//! (decision graphs for MIMO mode/rate selection), [`bounds`] (closed-form
//! regret lower-bound constants), [`sim`] (slot- and packet-mode simulation
//! with Monte-Carlo aggregation), and [`trace`] (trace files and
//! trace-driven environments).

pub mod bounds;
pub mod env;
pub mod graph;
pub mod kl;
pub mod policy;
pub mod sim;
pub mod trace;

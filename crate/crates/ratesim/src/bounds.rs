//! Closed-form regret lower-bound constants and non-stationary separation
//! diagnostics.

use thiserror::Error;

use crate::env::{check_correlated, check_unimodal, RateTable, SuccessProfile};
use crate::graph::{ascending_path_oracle, DecisionGraph, GraphError};
use crate::kl::bernoulli_kl;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("instance violates the correlated/unimodal structure")]
    StructureViolation,
    #[error("theta length {theta} does not match rate count {rates}")]
    LengthMismatch { theta: usize, rates: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// One summand of a lower-bound constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTerm {
    /// 0-based index of the competing decision.
    pub index: usize,
    pub gap: f64,
    pub divergence: f64,
    pub value: f64,
}

/// Lower-bound constants for one stationary instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    /// 0-based optimal arm.
    pub k_star: usize,
    /// Qualifying neighbor set of the optimum (0-based).
    pub n_kstar: Vec<usize>,
    /// 0-based first arm worth distinguishing in the unstructured bound.
    pub k0: usize,
    pub c: f64,
    pub c_prime: f64,
    pub c_terms: Vec<BoundTerm>,
    pub c_prime_terms: Vec<BoundTerm>,
}

fn throughput(rates: &RateTable, theta: &[f64], k: usize) -> f64 {
    rates.get(k) * theta[k]
}

fn argmax_throughput(rates: &RateTable, theta: &[f64]) -> usize {
    let mut best = 0;
    let mut best_mu = f64::NEG_INFINITY;
    for k in 0..rates.len() {
        let mu = throughput(rates, theta, k);
        if mu > best_mu {
            best_mu = mu;
            best = k;
        }
    }
    best
}

fn check_lengths(rates: &RateTable, theta: &[f64]) -> Result<(), BoundsError> {
    if theta.len() != rates.len() {
        return Err(BoundsError::LengthMismatch { theta: theta.len(), rates: rates.len() });
    }
    Ok(())
}

/// The neighbors of `k` still worth distinguishing from it:
/// `{k-1, k+1}` restricted to rates `r_l` at least the throughput of `k`.
pub fn neighbor_set(rates: &RateTable, theta: &[f64], k: usize) -> Vec<usize> {
    let mu_k = throughput(rates, theta, k);
    let mut out = Vec::with_capacity(2);
    if k > 0 && mu_k <= rates.get(k - 1) {
        out.push(k - 1);
    }
    if k + 1 < rates.len() && mu_k <= rates.get(k + 1) {
        out.push(k + 1);
    }
    out
}

fn bound_term(rates: &RateTable, theta: &[f64], k_star: usize, k: usize) -> BoundTerm {
    let mu_star = throughput(rates, theta, k_star);
    let gap = mu_star - throughput(rates, theta, k);
    let divergence = bernoulli_kl(theta[k], mu_star / rates.get(k))
        .expect("neighbor-set membership keeps mu_star / r_k within [0, 1]");
    BoundTerm { index: k, gap, divergence, value: gap / divergence }
}

/// Structured-bandit constant: the sum over the optimum's qualifying
/// neighbors of gap over divergence. At most two terms.
pub fn c_theta(rates: &RateTable, theta: &[f64]) -> Result<f64, BoundsError> {
    check_lengths(rates, theta)?;
    if !check_correlated(theta) || !check_unimodal(rates, theta) {
        return Err(BoundsError::StructureViolation);
    }
    let k_star = argmax_throughput(rates, theta);
    Ok(neighbor_set(rates, theta, k_star)
        .into_iter()
        .map(|k| bound_term(rates, theta, k_star, k).value)
        .sum())
}

/// 0-based `k0`: the lowest arm at or below the optimum whose raw rate
/// already reaches the optimal throughput.
pub fn k_zero(rates: &RateTable, theta: &[f64], k_star: usize) -> usize {
    let mu_star = throughput(rates, theta, k_star);
    (0..=k_star).find(|&k| mu_star / rates.get(k) <= 1.0).unwrap_or(k_star)
}

/// Independent-arms constant: the sum from `k0` to the top rate, skipping
/// the optimum itself.
pub fn c_prime_theta(rates: &RateTable, theta: &[f64]) -> Result<f64, BoundsError> {
    check_lengths(rates, theta)?;
    let k_star = argmax_throughput(rates, theta);
    let k0 = k_zero(rates, theta, k_star);
    Ok((k0..rates.len())
        .filter(|&k| k != k_star)
        .map(|k| bound_term(rates, theta, k_star, k).value)
        .sum())
}

/// Full report with per-term breakdown; structural checks as in
/// [`c_theta`].
pub fn bounds_report(rates: &RateTable, theta: &[f64]) -> Result<BoundsReport, BoundsError> {
    check_lengths(rates, theta)?;
    if !check_correlated(theta) || !check_unimodal(rates, theta) {
        return Err(BoundsError::StructureViolation);
    }
    let k_star = argmax_throughput(rates, theta);
    let n_kstar = neighbor_set(rates, theta, k_star);
    let k0 = k_zero(rates, theta, k_star);
    let c_terms: Vec<BoundTerm> =
        n_kstar.iter().map(|&k| bound_term(rates, theta, k_star, k)).collect();
    let c_prime_terms: Vec<BoundTerm> = (k0..rates.len())
        .filter(|&k| k != k_star)
        .map(|k| bound_term(rates, theta, k_star, k))
        .collect();
    Ok(BoundsReport {
        k_star,
        n_kstar,
        k0,
        c: c_terms.iter().map(|t| t.value).sum(),
        c_prime: c_prime_terms.iter().map(|t| t.value).sum(),
        c_terms,
        c_prime_terms,
    })
}

/// Graphical constant: sum over the optimum's graph neighbors whose raw
/// rate reaches the optimal throughput.
pub fn c_graph(graph: &DecisionGraph, theta: &[f64]) -> Result<f64, BoundsError> {
    if theta.len() != graph.len() {
        return Err(BoundsError::LengthMismatch { theta: theta.len(), rates: graph.len() });
    }
    let mu: Vec<f64> = (0..graph.len()).map(|d| graph.rate(d) * theta[d]).collect();
    if !graph.check_correlated_modes(theta)? || !ascending_path_oracle(graph, &mu)? {
        return Err(BoundsError::StructureViolation);
    }
    let d_star = mu
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    let mu_star = mu[d_star];
    let mut total = 0.0;
    for &d in graph.neighbors(d_star)? {
        if mu_star <= graph.rate(d) {
            let divergence = bernoulli_kl(theta[d], mu_star / graph.rate(d))
                .expect("qualifying neighbors keep the ratio within [0, 1]");
            total += (mu_star - mu[d]) / divergence;
        }
    }
    Ok(total)
}

/// Which side of the separation threshold to count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparationCount {
    /// The displayed formula: count `|gap| >= delta` triples.
    AtLeast,
    /// The complementary count: `|gap| < delta` triples.
    Below,
}

/// Count of (slot, decision, qualifying-neighbor) triples whose throughput
/// gap clears (or, under [`SeparationCount::Below`], fails to clear) the
/// separation threshold.
pub fn separation_h(
    profile: &SuccessProfile,
    rates: &RateTable,
    delta: f64,
    horizon: u64,
    count: SeparationCount,
) -> u64 {
    let k_max = rates.len();
    let mut total = 0u64;
    for n in 1..=horizon {
        let theta = profile.theta_vec(n);
        for k in 0..k_max {
            for nb in neighbor_set(rates, &theta, k) {
                let gap = (throughput(rates, &theta, k) - throughput(rates, &theta, nb)).abs();
                let hit = match count {
                    SeparationCount::AtLeast => gap >= delta,
                    SeparationCount::Below => gap < delta,
                };
                total += hit as u64;
            }
        }
    }
    total
}

/// Count of time instants, summed over sub-optimal decisions, at which the
/// decision cannot be reliably distinguished from the instantaneous
/// optimum: either the drift-inflated rewards overlap, or the inflated KL
/// divergence stays below `i_min`.
pub fn separation_g(
    profile: &SuccessProfile,
    rates: &RateTable,
    i_min: f64,
    tau: u64,
    sigma: f64,
    horizon: u64,
) -> u64 {
    let slack = tau as f64 * sigma;
    let k_max = rates.len();
    let mut total = 0u64;
    for n in 1..=horizon {
        let theta = profile.theta_vec(n);
        let k_star = argmax_throughput(rates, &theta);
        let mu_low = rates.get(k_star) * (theta[k_star] - slack);
        for k in 0..k_max {
            if k == k_star {
                continue;
            }
            let inflated = (theta[k] + slack).min(1.0);
            let overlap = rates.get(k) * inflated >= mu_low;
            let kl_small = if overlap {
                false
            } else {
                // mu_low / r_k < inflated <= 1 cannot happen here, so the
                // divergence argument stays in range
                bernoulli_kl(inflated, (mu_low / rates.get(k)).clamp(0.0, 1.0))
                    .map(|i| i < i_min)
                    .unwrap_or(false)
            };
            total += (overlap || kl_small) as u64;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{preset, SuccessProfile, STEEP_THETA};
    use approx::assert_relative_eq;

    #[test]
    fn steep_neighbor_set() {
        let rates = RateTable::dot11g();
        // optimal arm 4 (24 Mbit/s, throughput 21.6): rate 18 below, 36 above
        assert_eq!(neighbor_set(&rates, &STEEP_THETA, 4), vec![5]);
        // boundary arm has only one candidate neighbor
        assert!(neighbor_set(&rates, &STEEP_THETA, 0).len() <= 1);
        // zero-throughput arm qualifies both neighbors
        let mut theta = STEEP_THETA.to_vec();
        theta[3] = 0.0;
        assert_eq!(neighbor_set(&rates, &theta, 3), vec![2, 4]);
    }

    #[test]
    fn steep_constants() {
        let rates = RateTable::dot11g();
        let report = bounds_report(&rates, &STEEP_THETA).unwrap();
        assert_eq!(report.k_star, 4);
        assert_eq!(report.n_kstar, vec![5]);
        assert_eq!(report.k0, 4);
        let i = bernoulli_kl(0.1, 0.6).unwrap();
        assert_relative_eq!(report.c, 18.0 / i, max_relative = 1e-12);
        assert_relative_eq!(report.c, 32.688, max_relative = 1e-3);
        assert_relative_eq!(report.c_prime, 135.7, max_relative = 1e-2);
        assert_eq!(report.c_prime_terms.len(), 3);
        assert!(report.c <= report.c_prime);
    }

    #[test]
    fn empty_neighbor_set_gives_zero() {
        // K=2, theta (0.9, 0.8), rates (1, 2): optimum at arm 1 with
        // throughput 1.6 > r_0 = 1, so nothing qualifies
        let rates = RateTable::new(vec![1.0, 2.0]).unwrap();
        let theta = [0.9, 0.8];
        assert_eq!(c_theta(&rates, &theta).unwrap(), 0.0);
        let single = RateTable::new(vec![6.0]).unwrap();
        assert_eq!(c_prime_theta(&single, &[0.5]).unwrap(), 0.0);
    }

    #[test]
    fn structure_violation_rejected() {
        let rates = RateTable::dot11g();
        let increasing = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
        assert_eq!(
            c_theta(&rates, &increasing).unwrap_err(),
            BoundsError::StructureViolation
        );
    }

    #[test]
    fn line_graph_constant_matches_scalar() {
        let rates = RateTable::dot11g();
        let g = DecisionGraph::line(rates.as_slice()).unwrap();
        for name in ["steep", "gradual", "lossy"] {
            let p = preset(name).unwrap();
            let theta = match &p.profile {
                SuccessProfile::Stationary { theta } => theta.clone(),
                _ => unreachable!(),
            };
            assert_relative_eq!(
                c_graph(&g, &theta).unwrap(),
                c_theta(&rates, &theta).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn star_graph_constant() {
        use crate::graph::Decision;
        // optimum at the center with three qualifying leaves
        let vertices = vec![
            Decision { mode: 1, rate_index: 0, rate: 10.0 },
            Decision { mode: 2, rate_index: 0, rate: 10.0 },
            Decision { mode: 3, rate_index: 0, rate: 10.0 },
            Decision { mode: 4, rate_index: 0, rate: 10.0 },
        ];
        let g = DecisionGraph::new(vertices, vec![(0, 1), (0, 2), (0, 3)]).unwrap();
        let theta = [0.8, 0.5, 0.4, 0.3];
        let mu_star = 8.0;
        let expect: f64 = [1, 2, 3]
            .iter()
            .map(|&d| {
                (mu_star - 10.0 * theta[d]) / bernoulli_kl(theta[d], mu_star / 10.0).unwrap()
            })
            .sum();
        assert_relative_eq!(c_graph(&g, &theta).unwrap(), expect, max_relative = 1e-12);
    }

    #[test]
    fn separation_h_extremes() {
        let p = preset("steep").unwrap();
        let horizon = 50;
        // delta = 0: every (slot, k, neighbor) triple counts
        let per_slot: usize =
            (0..8).map(|k| neighbor_set(&p.rates, &STEEP_THETA, k).len()).sum();
        assert_eq!(
            separation_h(&p.profile, &p.rates, 0.0, horizon, SeparationCount::AtLeast),
            horizon * per_slot as u64
        );
        assert_eq!(
            separation_h(&p.profile, &p.rates, 1e9, horizon, SeparationCount::AtLeast),
            0
        );
        // the two counts partition the triples
        let lo = separation_h(&p.profile, &p.rates, 2.0, horizon, SeparationCount::Below);
        let hi = separation_h(&p.profile, &p.rates, 2.0, horizon, SeparationCount::AtLeast);
        assert_eq!(lo + hi, horizon * per_slot as u64);
    }

    #[test]
    fn separation_g_extremes() {
        let p = preset("steep").unwrap();
        let horizon = 50;
        // stationary, no drift, i_min below every divergence from the
        // optimum and no overlap: nothing counts
        assert_eq!(separation_g(&p.profile, &p.rates, 1e-9, 10, 0.0, horizon), 0);
        // huge drift slack saturates the overlap indicator
        assert_eq!(
            separation_g(&p.profile, &p.rates, 1e-9, 1000, 1.0, horizon),
            horizon * 7
        );
    }
}

//! Bernoulli KL divergence, Pinsker-style bounds, and the bounded
//! root-finding that backs every upper-confidence index in this crate.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KlError {
    #[error("probability {0} outside [0,1]")]
    OutOfRange(f64),
    #[error("pinsker bounds require 0 <= p <= q < 1, got p={p}, q={q}")]
    BadPinskerArgs { p: f64, q: f64 },
    #[error("invalid index arguments: mean={mean}, r={r}, threshold={threshold}")]
    BadIndexArgs { mean: f64, r: f64, threshold: f64 },
}

/// Exploration budget on the right-hand side of an index constraint, in nats.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct KlThreshold(f64);

impl KlThreshold {
    pub fn new(value: f64) -> Option<Self> {
        (value >= 0.0 && value.is_finite()).then_some(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// The budget `f(l) = log(l) + c*log(log(l))`, clamped to 0 for `l < 3`
/// (where the inner log is non-positive or undefined) and to 0 from below.
pub fn exploration_threshold(l: u64, c: f64) -> KlThreshold {
    if l < 3 {
        return KlThreshold(0.0);
    }
    let l = l as f64;
    KlThreshold((l.ln() + c * l.ln().ln()).max(0.0))
}

fn check_prob(x: f64) -> Result<f64, KlError> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(KlError::OutOfRange(x))
    }
}

/// KL divergence `I(p,q)` between Bernoulli(p) and Bernoulli(q).
///
/// Conventions: `0*log(0/x) = 0`, so `I(p,p) = 0` always, and the result is
/// `+inf` when `q` is 0 or 1 while `p` differs.
pub fn bernoulli_kl(p: f64, q: f64) -> Result<f64, KlError> {
    let p = check_prob(p)?;
    let q = check_prob(q)?;
    if p == q {
        return Ok(0.0);
    }
    if q == 0.0 || q == 1.0 {
        return Ok(f64::INFINITY);
    }
    let left = if p == 0.0 { 0.0 } else { p * (p / q).ln() };
    let right = if p == 1.0 {
        0.0
    } else {
        (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln()
    };
    Ok(left + right)
}

/// Lower (Pinsker) and upper bounds sandwiching `I(p,q)` for `0 <= p <= q < 1`:
/// `2(p-q)^2 <= I(p,q) <= (p-q)^2 / (q(1-q))`.
pub fn pinsker_bounds(p: f64, q: f64) -> Result<(f64, f64), KlError> {
    if !(0.0..=1.0).contains(&p) || !(0.0..1.0).contains(&q) || p > q {
        return Err(KlError::BadPinskerArgs { p, q });
    }
    let gap = q - p;
    let lower = 2.0 * gap * gap;
    let upper = if gap == 0.0 { 0.0 } else { gap * gap / (q * (1.0 - q)) };
    Ok((lower, upper))
}

/// Absolute bisection tolerance on the normalized success probability.
pub const INDEX_TOLERANCE: f64 = 1e-9;
const MAX_BISECTION_ITERS: u32 = 64;

/// Upper-confidence index: the largest `q* in [mean_est, r]` such that
/// `samples * I(mean_est/r, q*/r) <= threshold`, found by bisection on the
/// normalized probability to within [`INDEX_TOLERANCE`].
///
/// With no samples, or when the empirical mean already sits at `r`, the
/// constraint is vacuous and the index is `r` itself.
pub fn kl_ucb_index(
    mean_est: f64,
    samples: u64,
    threshold: KlThreshold,
    r: f64,
) -> Result<f64, KlError> {
    if !(r > 0.0) || !(0.0..=r).contains(&mean_est) {
        return Err(KlError::BadIndexArgs {
            mean: mean_est,
            r,
            threshold: threshold.value(),
        });
    }
    if samples == 0 || mean_est == r {
        return Ok(r);
    }
    let p = mean_est / r;
    let budget = threshold.value() / samples as f64;
    // I(p, .) is continuous and strictly increasing on [p, 1); the sup may
    // still be the closed-interval endpoint q/r = 1 when the budget exceeds
    // every finite divergence.
    let mut lo = p;
    let mut hi = 1.0;
    if bernoulli_kl(p, 1.0 - INDEX_TOLERANCE)? <= budget {
        return Ok(r);
    }
    for _ in 0..MAX_BISECTION_ITERS {
        if hi - lo <= INDEX_TOLERANCE {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if bernoulli_kl(p, mid)? <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo * r)
}

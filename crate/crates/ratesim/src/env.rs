//! Channel models: stationary and Lipschitz non-stationary success profiles,
//! structural checks (correlation, unimodality and its closure), coupled
//! Bernoulli sampling, and the named scenario presets.

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("rates must be strictly increasing and positive")]
    BadRates,
    #[error("success probability {0} outside [0,1]")]
    BadProbability(f64),
    #[error("theta length {theta} does not match rate count {rates}")]
    LengthMismatch { theta: usize, rates: usize },
    #[error("unknown scenario preset `{0}`")]
    UnknownPreset(String),
    #[error("trajectory needs at least one breakpoint")]
    EmptyTrajectory,
    #[error("scenario config: {0}")]
    Config(String),
}

/// Ordered transmission rates `r_1 < ... < r_K`, in Mbit/s.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    rates: Vec<f64>,
}

impl RateTable {
    pub fn new(rates: Vec<f64>) -> Result<Self, EnvError> {
        if rates.is_empty() || rates.windows(2).any(|w| w[0] >= w[1]) || rates[0] <= 0.0 {
            return Err(EnvError::BadRates);
        }
        Ok(Self { rates })
    }

    /// The eight 802.11g rates: 6..54 Mbit/s.
    pub fn dot11g() -> Self {
        Self::new(vec![6.0, 9.0, 12.0, 18.0, 24.0, 36.0, 48.0, 54.0]).unwrap()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.rates[k]
    }
}

/// How cross-rate outcomes are realized at a given slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampler {
    /// One uniform draw shared by all rates: success at rate k iff
    /// `U < theta_k`. With non-increasing theta this realizes the
    /// success/failure implications across rates exactly.
    #[default]
    Coupled,
    /// Independent draw per rate. The chosen-arm marginal is identical in
    /// law to the coupled sampler.
    Independent,
}

/// Success probabilities, either a fixed vector or a slot-indexed trajectory.
#[derive(Debug, Clone, PartialEq)]
pub enum SuccessProfile {
    Stationary { theta: Vec<f64> },
    Trajectory {
        /// `(slot, theta)` breakpoints with strictly increasing slots.
        points: Vec<(u64, Vec<f64>)>,
        /// Piecewise-linear between breakpoints when true, else stepwise.
        interpolate: bool,
        /// Declared per-slot Lipschitz bound.
        sigma: f64,
    },
}

fn check_theta(theta: &[f64]) -> Result<(), EnvError> {
    for &t in theta {
        if !(0.0..=1.0).contains(&t) {
            return Err(EnvError::BadProbability(t));
        }
    }
    Ok(())
}

impl SuccessProfile {
    pub fn stationary(theta: Vec<f64>) -> Result<Self, EnvError> {
        check_theta(&theta)?;
        Ok(Self::Stationary { theta })
    }

    pub fn trajectory(
        points: Vec<(u64, Vec<f64>)>,
        interpolate: bool,
    ) -> Result<Self, EnvError> {
        if points.is_empty() {
            return Err(EnvError::EmptyTrajectory);
        }
        for (_, theta) in &points {
            check_theta(theta)?;
            if theta.len() != points[0].1.len() {
                return Err(EnvError::LengthMismatch {
                    theta: theta.len(),
                    rates: points[0].1.len(),
                });
            }
        }
        let mut profile = Self::Trajectory { points, interpolate, sigma: 0.0 };
        let sigma = profile.max_step();
        if let Self::Trajectory { sigma: s, .. } = &mut profile {
            *s = sigma;
        }
        Ok(profile)
    }

    pub fn arm_count(&self) -> usize {
        match self {
            Self::Stationary { theta } => theta.len(),
            Self::Trajectory { points, .. } => points[0].1.len(),
        }
    }

    pub fn is_stationary(&self) -> bool {
        matches!(self, Self::Stationary { .. })
    }

    pub fn declared_sigma(&self) -> f64 {
        match self {
            Self::Stationary { .. } => 0.0,
            Self::Trajectory { sigma, .. } => *sigma,
        }
    }

    /// Success probability of arm `k` at `slot` (slots are 1-based).
    pub fn theta_at(&self, slot: u64, k: usize) -> f64 {
        match self {
            Self::Stationary { theta } => theta[k],
            Self::Trajectory { points, interpolate, .. } => {
                if slot <= points[0].0 {
                    return points[0].1[k];
                }
                let last = points.len() - 1;
                if slot >= points[last].0 {
                    return points[last].1[k];
                }
                let i = points.partition_point(|(s, _)| *s <= slot) - 1;
                let (s0, th0) = &points[i];
                let (s1, th1) = &points[i + 1];
                if !interpolate {
                    return th0[k];
                }
                let w = (slot - s0) as f64 / (s1 - s0) as f64;
                th0[k] + w * (th1[k] - th0[k])
            }
        }
    }

    pub fn theta_vec(&self, slot: u64) -> Vec<f64> {
        (0..self.arm_count()).map(|k| self.theta_at(slot, k)).collect()
    }

    /// Largest per-slot increment across arms and consecutive breakpoints.
    fn max_step(&self) -> f64 {
        match self {
            Self::Stationary { .. } => 0.0,
            Self::Trajectory { points, interpolate, .. } => {
                let mut worst: f64 = 0.0;
                for w in points.windows(2) {
                    let dt = (w[1].0 - w[0].0).max(1) as f64;
                    for k in 0..w[0].1.len() {
                        let dth = (w[1].1[k] - w[0].1[k]).abs();
                        // A step profile pays the whole jump in one slot.
                        let per_slot = if *interpolate { dth / dt } else { dth };
                        worst = worst.max(per_slot);
                    }
                }
                worst
            }
        }
    }
}

/// Exhaustive per-slot Lipschitz measurement over `1..=horizon`.
pub fn measure_lipschitz(profile: &SuccessProfile, horizon: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for t in 1..horizon {
        for k in 0..profile.arm_count() {
            worst = worst.max((profile.theta_at(t + 1, k) - profile.theta_at(t, k)).abs());
        }
    }
    worst
}

/// True iff theta is non-increasing (the correlated-arms structure).
pub fn check_correlated(theta: &[f64]) -> bool {
    theta.windows(2).all(|w| w[0] >= w[1])
}

/// True iff the throughputs `r_k * theta_k` strictly increase to a unique
/// peak and strictly decrease afterwards.
pub fn check_unimodal(rates: &RateTable, theta: &[f64]) -> bool {
    unimodal_products(&products(rates, theta), true)
}

/// Non-strict variant: the closure of the unimodal set (plateaus allowed).
pub fn check_unimodal_closed(rates: &RateTable, theta: &[f64]) -> bool {
    unimodal_products(&products(rates, theta), false)
}

fn products(rates: &RateTable, theta: &[f64]) -> Vec<f64> {
    rates.as_slice().iter().zip(theta).map(|(r, t)| r * t).collect()
}

fn unimodal_products(mu: &[f64], strict: bool) -> bool {
    if mu.is_empty() {
        return false;
    }
    let peak = mu
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    for i in 0..mu.len().saturating_sub(1) {
        let ok = if i < peak {
            if strict { mu[i] < mu[i + 1] } else { mu[i] <= mu[i + 1] }
        } else if strict {
            mu[i] > mu[i + 1]
        } else {
            mu[i] >= mu[i + 1]
        };
        if !ok {
            return false;
        }
    }
    true
}

/// Index of the best arm at `slot` (argmax of `r_k * theta_k(slot)`,
/// ties to the lowest index). 0-based.
pub fn best_arm(rates: &RateTable, profile: &SuccessProfile, slot: u64) -> usize {
    let mut best = 0;
    let mut best_mu = f64::NEG_INFINITY;
    for k in 0..rates.len() {
        let mu = rates.get(k) * profile.theta_at(slot, k);
        if mu > best_mu {
            best_mu = mu;
            best = k;
        }
    }
    best
}

/// All-rate outcome of one slot under the given sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotDraw {
    pub outcomes: Vec<bool>,
}

/// A rate table paired with a success profile and a sampling mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub rates: RateTable,
    pub profile: SuccessProfile,
    pub sampler: Sampler,
}

impl Environment {
    pub fn new(rates: RateTable, profile: SuccessProfile) -> Result<Self, EnvError> {
        if profile.arm_count() != rates.len() {
            return Err(EnvError::LengthMismatch {
                theta: profile.arm_count(),
                rates: rates.len(),
            });
        }
        Ok(Self { rates, profile, sampler: Sampler::Coupled })
    }

    pub fn with_sampler(mut self, sampler: Sampler) -> Self {
        self.sampler = sampler;
        self
    }

    /// Draw the full outcome vector for one slot.
    pub fn sample_slot(&self, slot: u64, rng: &mut impl Rng) -> SlotDraw {
        let k_max = self.rates.len();
        let outcomes = match self.sampler {
            Sampler::Coupled => {
                let u: f64 = rng.gen();
                (0..k_max).map(|k| u < self.profile.theta_at(slot, k)).collect()
            }
            Sampler::Independent => (0..k_max)
                .map(|k| rng.gen::<f64>() < self.profile.theta_at(slot, k))
                .collect(),
        };
        SlotDraw { outcomes }
    }

    /// Draw only the chosen arm's outcome (what a policy observes). One
    /// uniform per call, identical in law for both samplers.
    pub fn sample_outcome(&self, slot: u64, arm: usize, rng: &mut impl Rng) -> bool {
        rng.gen::<f64>() < self.profile.theta_at(slot, arm)
    }

    pub fn best_arm(&self, slot: u64) -> usize {
        best_arm(&self.rates, &self.profile, slot)
    }

    pub fn mean_reward(&self, slot: u64, arm: usize) -> f64 {
        self.rates.get(arm) * self.profile.theta_at(slot, arm)
    }
}

pub const STEEP_THETA: [f64; 8] = [0.99, 0.98, 0.96, 0.93, 0.9, 0.1, 0.06, 0.04];
pub const GRADUAL_THETA: [f64; 8] = [0.95, 0.9, 0.8, 0.65, 0.45, 0.25, 0.15, 0.1];
pub const LOSSY_THETA: [f64; 8] = [0.9, 0.8, 0.7, 0.55, 0.45, 0.35, 0.2, 0.1];

/// Default horizon for the `morph` trajectory.
pub const MORPH_DEFAULT_HORIZON: u64 = 20_000;

/// A named scenario: rate table plus success profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioPreset {
    pub name: String,
    pub rates: RateTable,
    pub profile: SuccessProfile,
}

impl ScenarioPreset {
    pub fn environment(&self) -> Environment {
        Environment::new(self.rates.clone(), self.profile.clone()).unwrap()
    }
}

pub fn preset(name: &str) -> Result<ScenarioPreset, EnvError> {
    preset_with_horizon(name, MORPH_DEFAULT_HORIZON)
}

/// The named scenarios on the 802.11g table. `morph` drifts piecewise-
/// linearly from steep to gradual to lossy, with change points at 60% and
/// 90% of the horizon.
pub fn preset_with_horizon(name: &str, horizon: u64) -> Result<ScenarioPreset, EnvError> {
    let rates = RateTable::dot11g();
    let profile = match name {
        "steep" => SuccessProfile::stationary(STEEP_THETA.to_vec())?,
        "gradual" => SuccessProfile::stationary(GRADUAL_THETA.to_vec())?,
        "lossy" => SuccessProfile::stationary(LOSSY_THETA.to_vec())?,
        "morph" => {
            let horizon = horizon.max(2);
            SuccessProfile::trajectory(
                vec![
                    (1, STEEP_THETA.to_vec()),
                    (horizon * 6 / 10, GRADUAL_THETA.to_vec()),
                    (horizon * 9 / 10, LOSSY_THETA.to_vec()),
                    (horizon, LOSSY_THETA.to_vec()),
                ],
                true,
            )?
        }
        other => return Err(EnvError::UnknownPreset(other.to_string())),
    };
    Ok(ScenarioPreset { name: name.to_string(), rates, profile })
}

/// Render a scenario as the plain-text config format.
///
/// Lines are `key=value`: `name`, `rates` (comma separated), then either
/// `theta` for stationary profiles or `sigma`, `interpolate` and one
/// `point=slot:theta,...` per breakpoint for trajectories.
pub fn render_scenario(s: &ScenarioPreset) -> String {
    let mut out = String::new();
    out.push_str(&format!("name={}\n", s.name));
    out.push_str(&format!("rates={}\n", join(s.rates.as_slice())));
    match &s.profile {
        SuccessProfile::Stationary { theta } => {
            out.push_str(&format!("theta={}\n", join(theta)));
        }
        SuccessProfile::Trajectory { points, interpolate, sigma } => {
            out.push_str(&format!("sigma={sigma}\n"));
            out.push_str(&format!(
                "interpolate={}\n",
                if *interpolate { "linear" } else { "step" }
            ));
            for (slot, theta) in points {
                out.push_str(&format!("point={slot}:{}\n", join(theta)));
            }
        }
    }
    out
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_floats(s: &str) -> Result<Vec<f64>, EnvError> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| EnvError::Config(format!("bad number `{x}`")))
        })
        .collect()
}

/// Parse the plain-text scenario config produced by [`render_scenario`].
pub fn parse_scenario(text: &str) -> Result<ScenarioPreset, EnvError> {
    let mut name = None;
    let mut rates = None;
    let mut theta = None;
    let mut interpolate = true;
    let mut points: Vec<(u64, Vec<f64>)> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| EnvError::Config(format!("line {}: missing `=`", ln + 1)))?;
        match key.trim() {
            "name" => name = Some(value.trim().to_string()),
            "rates" => rates = Some(parse_floats(value)?),
            "theta" => theta = Some(parse_floats(value)?),
            "sigma" => {} // recomputed from the breakpoints
            "interpolate" => interpolate = value.trim() != "step",
            "point" => {
                let (slot, th) = value.split_once(':').ok_or_else(|| {
                    EnvError::Config(format!("line {}: point needs `slot:theta`", ln + 1))
                })?;
                let slot = slot
                    .trim()
                    .parse::<u64>()
                    .map_err(|_| EnvError::Config(format!("bad slot `{slot}`")))?;
                points.push((slot, parse_floats(th)?));
            }
            other => return Err(EnvError::Config(format!("unknown key `{other}`"))),
        }
    }
    let name = name.ok_or_else(|| EnvError::Config("missing name".into()))?;
    let rates = RateTable::new(rates.ok_or_else(|| EnvError::Config("missing rates".into()))?)?;
    let profile = match (theta, points.is_empty()) {
        (Some(theta), true) => SuccessProfile::stationary(theta)?,
        (None, false) => {
            points.sort_by_key(|(s, _)| *s);
            SuccessProfile::trajectory(points, interpolate)?
        }
        _ => {
            return Err(EnvError::Config(
                "need exactly one of `theta` or `point` lines".into(),
            ))
        }
    };
    if profile.arm_count() != rates.len() {
        return Err(EnvError::LengthMismatch { theta: profile.arm_count(), rates: rates.len() });
    }
    Ok(ScenarioPreset { name, rates, profile })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn correlated_checks() {
        assert!(check_correlated(&[0.9, 0.8, 0.7]));
        assert!(!check_correlated(&[0.9, 0.95, 0.7]));
        assert!(check_correlated(&STEEP_THETA));
        assert!(check_correlated(&GRADUAL_THETA));
        assert!(check_correlated(&LOSSY_THETA));
    }

    #[test]
    fn unimodal_checks() {
        let rates = RateTable::dot11g();
        assert!(check_unimodal(&rates, &STEEP_THETA));
        assert!(check_unimodal(&rates, &GRADUAL_THETA));
        assert!(check_unimodal(&rates, &LOSSY_THETA));
        let two = RateTable::new(vec![1.0, 2.0]).unwrap();
        assert!(check_unimodal(&two, &[0.5, 0.5])); // products (0.5, 1.0)
        let three = RateTable::new(vec![1.0, 2.0, 4.0]).unwrap();
        // products (1.0, 0.5, 0.8): local min
        assert!(!check_unimodal(&three, &[1.0, 0.25, 0.2]));
    }

    #[test]
    fn unimodal_closure() {
        let rates = RateTable::new(vec![1.0, 2.0, 4.0]).unwrap();
        // products (1.0, 1.0, 0.5): plateau allowed only in the closure
        assert!(check_unimodal_closed(&rates, &[1.0, 0.5, 0.125]));
        assert!(!check_unimodal(&rates, &[1.0, 0.5, 0.125]));
        // products (1.0, 0.5, 1.0): dip rejected by both
        assert!(!check_unimodal_closed(&rates, &[1.0, 0.25, 0.25]));
    }

    #[test]
    fn best_arm_examples() {
        let steep = preset("steep").unwrap();
        assert_eq!(best_arm(&steep.rates, &steep.profile, 1), 4); // 24 Mbit/s
        let gradual = preset("gradual").unwrap();
        // independent products scan
        let mu: Vec<f64> = gradual
            .rates
            .as_slice()
            .iter()
            .zip(GRADUAL_THETA.iter())
            .map(|(r, t)| r * t)
            .collect();
        let expect = mu
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(best_arm(&gradual.rates, &gradual.profile, 1), expect);
        let single = RateTable::new(vec![6.0]).unwrap();
        let prof = SuccessProfile::stationary(vec![0.5]).unwrap();
        assert_eq!(best_arm(&single, &prof, 1), 0);
    }

    #[test]
    fn preset_vectors_and_morph_endpoints() {
        assert_eq!(
            preset("steep").unwrap().profile,
            SuccessProfile::stationary(STEEP_THETA.to_vec()).unwrap()
        );
        assert_eq!(
            preset("lossy").unwrap().profile,
            SuccessProfile::stationary(LOSSY_THETA.to_vec()).unwrap()
        );
        let morph = preset("morph").unwrap();
        for k in 0..8 {
            assert_eq!(morph.profile.theta_at(1, k), STEEP_THETA[k]);
            assert_eq!(morph.profile.theta_at(20_000, k), LOSSY_THETA[k]);
        }
        assert!(preset("bogus").is_err());
    }

    #[test]
    fn coupled_sampling_thresholds() {
        let steep = preset("steep").unwrap();
        let env = steep.environment();
        // u = 0.95 succeeds exactly where theta > 0.95 (arms 1..3, 0-based 0..2)
        let hits: Vec<bool> = STEEP_THETA.iter().map(|&t| 0.95 < t).collect();
        assert_eq!(hits, vec![true, true, true, false, false, false, false, false]);
        // theta = 0 never succeeds
        let prof = SuccessProfile::stationary(vec![0.0]).unwrap();
        let env0 = Environment::new(RateTable::new(vec![6.0]).unwrap(), prof).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for slot in 1..1000 {
            assert!(!env0.sample_slot(slot, &mut rng).outcomes[0]);
        }
        // coupling: failure at low rate implies failure at all higher rates
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for slot in 1..2000u64 {
            let draw = env.sample_slot(slot, &mut rng);
            for k in 0..7 {
                if !draw.outcomes[k] {
                    assert!(!draw.outcomes[k + 1]);
                }
            }
        }
    }

    #[test]
    fn marginal_frequencies_match_theta() {
        let steep = preset("steep").unwrap();
        let env = steep.environment();
        let n = 100_000u64;
        let mut counts = [0u64; 8];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for slot in 1..=n {
            let draw = env.sample_slot(slot, &mut rng);
            for (k, &hit) in draw.outcomes.iter().enumerate() {
                counts[k] += hit as u64;
            }
        }
        for k in 0..8 {
            let p = STEEP_THETA[k];
            let se = (p * (1.0 - p) / n as f64).sqrt();
            let freq = counts[k] as f64 / n as f64;
            assert!(
                (freq - p).abs() <= 3.0 * se.max(1e-4),
                "arm {k}: freq {freq} vs theta {p}"
            );
        }
    }

    #[test]
    fn lipschitz_measurements() {
        let steep = preset("steep").unwrap();
        assert_eq!(measure_lipschitz(&steep.profile, 1000), 0.0);
        let morph = preset("morph").unwrap();
        let measured = measure_lipschitz(&morph.profile, 20_000);
        assert!(measured > 0.0);
        assert!(measured <= morph.profile.declared_sigma() + 1e-12);
        // linear ramp on one arm: per-slot step 1/T
        let t_end = 1000u64;
        let ramp = SuccessProfile::trajectory(
            vec![(1, vec![0.0]), (t_end, vec![1.0])],
            true,
        )
        .unwrap();
        let m = measure_lipschitz(&ramp, t_end);
        assert!((m - 1.0 / (t_end - 1) as f64).abs() < 1e-12);
    }

    #[test]
    fn scenario_config_round_trip() {
        for name in ["steep", "gradual", "lossy", "morph"] {
            let p = preset(name).unwrap();
            let text = render_scenario(&p);
            let back = parse_scenario(&text).unwrap();
            assert_eq!(p, back, "round trip for {name}");
        }
        assert!(parse_scenario("rates=1,2\n").is_err());
        assert!(parse_scenario("name=x\nrates=2,1\ntheta=0.5,0.5\n").is_err());
    }
}

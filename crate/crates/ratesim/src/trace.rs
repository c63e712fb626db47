//! Aggregated transmission traces: parsing, rendering, synthesis, and
//! conversion into trace-driven success profiles.
//!
//! The on-disk format is one header line
//! `#rates=6,9,12,18,24,36,48,54;slot_ms=0.5` followed by CSV rows
//! `interval_start_ms,rate_id,attempts,successes`, where `rate_id` is the
//! rate value in Mbit/s.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::env::{EnvError, ScenarioPreset, SuccessProfile};

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("missing or malformed header line: {0}")]
    BadHeader(String),
    #[error("malformed row {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("row {line}: unknown rate id {rate}")]
    UnknownRate { line: usize, rate: f64 },
    #[error("row {line}: timestamp {now} ms decreases below {prev} ms")]
    DecreasingTimestamps { line: usize, prev: f64, now: f64 },
    #[error("trace has no rows")]
    Empty,
    #[error("interval at {start_ms} ms has no attempts at rate {rate}")]
    MissingRate { start_ms: f64, rate: f64 },
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// One aggregated batch: all transmissions at one rate within one interval.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub interval_start_ms: f64,
    /// Index into [`TraceFile::rates`].
    pub rate: usize,
    pub attempts: u64,
    pub successes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub rates: Vec<f64>,
    pub slot_ms: f64,
    pub rows: Vec<TraceRow>,
}

impl TraceFile {
    pub fn success_ratio(&self, row: &TraceRow) -> f64 {
        if row.attempts == 0 {
            0.0
        } else {
            row.successes as f64 / row.attempts as f64
        }
    }
}

fn parse_header(line: &str) -> Result<(Vec<f64>, f64), TraceError> {
    let bad = || TraceError::BadHeader(line.to_string());
    let body = line.strip_prefix('#').ok_or_else(bad)?;
    let mut rates = None;
    let mut slot_ms = None;
    for field in body.split(';') {
        let (key, value) = field.split_once('=').ok_or_else(bad)?;
        match key.trim() {
            "rates" => {
                let parsed: Result<Vec<f64>, _> =
                    value.split(',').map(|v| v.trim().parse::<f64>()).collect();
                rates = Some(parsed.map_err(|_| bad())?);
            }
            "slot_ms" => slot_ms = Some(value.trim().parse::<f64>().map_err(|_| bad())?),
            _ => return Err(bad()),
        }
    }
    match (rates, slot_ms) {
        (Some(r), Some(s)) if !r.is_empty() && s > 0.0 => Ok((r, s)),
        _ => Err(bad()),
    }
}

pub fn parse_trace(text: &str) -> Result<TraceFile, TraceError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| TraceError::BadHeader("<empty input>".to_string()))?;
    let (rates, slot_ms) = parse_header(header)?;
    let mut rows = Vec::new();
    let mut prev_start = f64::NEG_INFINITY;
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(TraceError::MalformedRow {
                line,
                reason: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        let num = |i: usize| {
            fields[i].parse::<f64>().map_err(|_| TraceError::MalformedRow {
                line,
                reason: format!("field {} is not a number: `{}`", i + 1, fields[i]),
            })
        };
        let count = |i: usize| {
            fields[i].parse::<u64>().map_err(|_| TraceError::MalformedRow {
                line,
                reason: format!("field {} is not a count: `{}`", i + 1, fields[i]),
            })
        };
        let start = num(0)?;
        let rate_value = num(1)?;
        let attempts = count(2)?;
        let successes = count(3)?;
        if successes > attempts {
            return Err(TraceError::MalformedRow {
                line,
                reason: format!("{successes} successes exceed {attempts} attempts"),
            });
        }
        if start < prev_start {
            return Err(TraceError::DecreasingTimestamps {
                line,
                prev: prev_start,
                now: start,
            });
        }
        prev_start = start;
        let rate = rates
            .iter()
            .position(|&r| r == rate_value)
            .ok_or(TraceError::UnknownRate { line, rate: rate_value })?;
        rows.push(TraceRow { interval_start_ms: start, rate, attempts, successes });
    }
    Ok(TraceFile { rates, slot_ms, rows })
}

pub fn render_trace(trace: &TraceFile) -> String {
    let mut out = String::new();
    let rates: Vec<String> = trace.rates.iter().map(|r| r.to_string()).collect();
    let _ = writeln!(out, "#rates={};slot_ms={}", rates.join(","), trace.slot_ms);
    for row in &trace.rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.interval_start_ms, trace.rates[row.rate], row.attempts, row.successes
        );
    }
    out
}

/// Per-interval empirical success ratios, in timestamp order. Missing
/// (interval, rate) pairs surface as errors unless `fill_gaps` carries the
/// neighboring estimate over.
pub fn trace_intervals(
    trace: &TraceFile,
    fill_gaps: bool,
) -> Result<Vec<(f64, Vec<f64>)>, TraceError> {
    if trace.rows.is_empty() {
        return Err(TraceError::Empty);
    }
    let k = trace.rates.len();
    // accumulate (attempts, successes) so duplicate rows within an interval
    // merge naturally
    let mut counts: Vec<(f64, Vec<(u64, u64)>)> = Vec::new();
    for row in &trace.rows {
        if counts.last().map(|(s, _)| *s) != Some(row.interval_start_ms) {
            counts.push((row.interval_start_ms, vec![(0, 0); k]));
        }
        let cell = &mut counts.last_mut().unwrap().1[row.rate];
        cell.0 += row.attempts;
        cell.1 += row.successes;
    }
    let intervals: Vec<(f64, Vec<Option<f64>>)> = counts
        .into_iter()
        .map(|(start, cells)| {
            let theta = cells
                .into_iter()
                .map(|(a, s)| (a > 0).then(|| s as f64 / a as f64))
                .collect();
            (start, theta)
        })
        .collect();
    let mut out = Vec::with_capacity(intervals.len());
    for (start, theta) in &intervals {
        let mut filled = Vec::with_capacity(k);
        for (rate, value) in theta.iter().enumerate() {
            match value {
                Some(v) => filled.push(*v),
                None if fill_gaps => {
                    // nearest earlier interval with data, else nearest later
                    let fallback = out
                        .iter()
                        .rev()
                        .map(|(_, th): &(f64, Vec<f64>)| th[rate])
                        .next()
                        .or_else(|| {
                            intervals
                                .iter()
                                .filter_map(|(s, th)| {
                                    (*s > *start).then_some(th[rate]).flatten()
                                })
                                .next()
                        });
                    match fallback {
                        Some(v) => filled.push(v),
                        None => {
                            return Err(TraceError::MissingRate {
                                start_ms: *start,
                                rate: trace.rates[rate],
                            })
                        }
                    }
                }
                None => {
                    return Err(TraceError::MissingRate {
                        start_ms: *start,
                        rate: trace.rates[rate],
                    })
                }
            }
        }
        out.push((*start, filled));
    }
    Ok(out)
}

/// Piecewise-constant trace-driven profile. Interval starts are mapped to
/// 1-based slots via the trace's slot duration.
pub fn trace_env(trace: &TraceFile, fill_gaps: bool) -> Result<SuccessProfile, TraceError> {
    let intervals = trace_intervals(trace, fill_gaps)?;
    let points: Vec<(u64, Vec<f64>)> = intervals
        .into_iter()
        .map(|(start_ms, theta)| ((start_ms / trace.slot_ms).round() as u64 + 1, theta))
        .collect();
    Ok(SuccessProfile::trajectory(points, false)?)
}

/// Slots aggregated into one interval by [`synth_trace`]: 100 probes of
/// each of the 8 rates.
pub const SYNTH_BATCH_SLOTS: u64 = 800;

/// Round-robin probe of every rate against the preset environment,
/// aggregated into fixed-length intervals. Deterministic in `seed`.
pub fn synth_trace(preset: &ScenarioPreset, horizon: u64, seed: u64) -> TraceFile {
    let env = preset.environment();
    let k = env.rates.len();
    let slot_ms = 0.5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut batch_start = 1u64;
    while batch_start <= horizon {
        let batch_end = (batch_start + SYNTH_BATCH_SLOTS - 1).min(horizon);
        let mut attempts = vec![0u64; k];
        let mut successes = vec![0u64; k];
        for slot in batch_start..=batch_end {
            let arm = ((slot - 1) % k as u64) as usize;
            attempts[arm] += 1;
            successes[arm] += env.sample_outcome(slot, arm, &mut rng) as u64;
        }
        let start_ms = (batch_start - 1) as f64 * slot_ms;
        for rate in 0..k {
            rows.push(TraceRow {
                interval_start_ms: start_ms,
                rate,
                attempts: attempts[rate],
                successes: successes[rate],
            });
        }
        batch_start = batch_end + 1;
    }
    TraceFile { rates: env.rates.as_slice().to_vec(), slot_ms, rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{preset, STEEP_THETA};

    const HEADER: &str = "#rates=6,9,12,18,24,36,48,54;slot_ms=0.5";

    #[test]
    fn empty_body_parses_to_empty_trace() {
        let t = parse_trace(HEADER).unwrap();
        assert_eq!(t.rates.len(), 8);
        assert_eq!(t.slot_ms, 0.5);
        assert!(t.rows.is_empty());
    }

    #[test]
    fn single_aggregated_row() {
        let text = format!("{HEADER}\n0,36,1000,700\n");
        let t = parse_trace(&text).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].rate, 5);
        assert_eq!(t.success_ratio(&t.rows[0]), 0.7);
    }

    #[test]
    fn parse_errors_are_distinct() {
        let text = format!("{HEADER}\n0,36,1000\n");
        assert!(matches!(parse_trace(&text), Err(TraceError::MalformedRow { .. })));
        let text = format!("{HEADER}\n0,7,10,5\n");
        assert!(matches!(parse_trace(&text), Err(TraceError::UnknownRate { .. })));
        let text = format!("{HEADER}\n10,36,10,5\n0,36,10,5\n");
        assert!(matches!(
            parse_trace(&text),
            Err(TraceError::DecreasingTimestamps { .. })
        ));
        let text = format!("{HEADER}\n0,36,10,20\n");
        assert!(matches!(parse_trace(&text), Err(TraceError::MalformedRow { .. })));
        assert!(matches!(parse_trace("rates=6"), Err(TraceError::BadHeader(_))));
    }

    #[test]
    fn render_parse_round_trip() {
        let p = preset("steep").unwrap();
        let t = synth_trace(&p, 4_000, 7);
        assert_eq!(parse_trace(&render_trace(&t)).unwrap(), t);
    }

    #[test]
    fn synth_is_seed_deterministic() {
        let p = preset("steep").unwrap();
        assert_eq!(synth_trace(&p, 2_000, 3), synth_trace(&p, 2_000, 3));
        assert_ne!(synth_trace(&p, 2_000, 3), synth_trace(&p, 2_000, 4));
    }

    #[test]
    fn stationary_synth_recovers_theta() {
        let p = preset("steep").unwrap();
        // 40,000 slots: 5,000 attempts per rate
        let t = synth_trace(&p, 40_000, 11);
        let mut attempts = vec![0u64; 8];
        let mut successes = vec![0u64; 8];
        for row in &t.rows {
            attempts[row.rate] += row.attempts;
            successes[row.rate] += row.successes;
        }
        for k in 0..8 {
            let n = attempts[k] as f64;
            let hat = successes[k] as f64 / n;
            let se = (STEEP_THETA[k] * (1.0 - STEEP_THETA[k]) / n).sqrt();
            assert!(
                (hat - STEEP_THETA[k]).abs() <= 4.0 * se + 1e-12,
                "rate {k}: {hat} vs {}",
                STEEP_THETA[k]
            );
        }
    }

    #[test]
    fn trace_env_builds_step_profile() {
        let text = format!(
            "{HEADER}\n\
             0,6,10,10\n0,9,10,10\n0,12,10,10\n0,18,10,10\n\
             0,24,10,9\n0,36,10,1\n0,48,10,1\n0,54,10,0\n\
             10,6,10,9\n10,9,10,9\n10,12,10,8\n10,18,10,7\n\
             10,24,10,5\n10,36,10,3\n10,48,10,2\n10,54,10,1\n"
        );
        let t = parse_trace(&text).unwrap();
        let profile = trace_env(&t, false).unwrap();
        // first interval starts at slot 1, second at 10 ms / 0.5 ms = slot 21
        assert_eq!(profile.theta_at(1, 4), 0.9);
        assert_eq!(profile.theta_at(20, 4), 0.9);
        assert_eq!(profile.theta_at(21, 4), 0.5);
        assert_eq!(profile.theta_at(500, 7), 0.1);
        assert!(!profile.is_stationary());
    }

    #[test]
    fn missing_rate_errors_unless_filled() {
        let text = format!(
            "{HEADER}\n\
             0,6,10,10\n0,9,10,10\n0,12,10,10\n0,18,10,10\n\
             0,24,10,9\n0,36,10,1\n0,48,10,1\n0,54,10,0\n\
             10,6,10,9\n10,9,10,9\n10,12,10,8\n10,18,10,7\n\
             10,24,10,5\n10,36,10,3\n10,48,10,2\n"
        );
        let t = parse_trace(&text).unwrap();
        assert!(matches!(
            trace_env(&t, false),
            Err(TraceError::MissingRate { .. })
        ));
        let profile = trace_env(&t, true).unwrap();
        // the gap at 54 Mbit/s carries the earlier interval's estimate over
        assert_eq!(profile.theta_at(21, 7), 0.0);
    }

    #[test]
    fn empty_trace_env_errors() {
        let t = parse_trace(HEADER).unwrap();
        assert_eq!(trace_env(&t, false).unwrap_err(), TraceError::Empty);
    }
}

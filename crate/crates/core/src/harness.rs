//! Throughput benchmark over replicated streams and parameter sweeps over
//! labeled streams.

use std::time::Instant;

use crate::datagen::upscale;
use crate::detector::{score_events, DetectorParams};
use crate::error::{Error, Result};
use crate::eval::{complementarity_report, ComplementarityReport, LabeledScores};
use crate::stream::Event;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub factor: u64,
    pub events: u64,
    pub wall_seconds: f64,
    pub events_per_second: f64,
}

pub const BENCH_HEADER: &str = "factor,events,wall_seconds,events_per_second";

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{}",
            self.factor, self.events, self.wall_seconds, self.events_per_second
        )
    }
}

/// Parses a power range: `P` means `0..=P`, `A..B` means `A..=B`.
pub fn parse_powers(text: &str) -> Result<Vec<u32>> {
    let bad = || Error::InvalidConfig(format!("invalid power range {text:?}; use P or A..B"));
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        ),
        None => (0, text.trim().parse().map_err(|_| bad())?),
    };
    if lo > hi || hi > 40 {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

/// Times a fresh detector over `base` replicated `2^p` times for each power.
/// Each row keeps the fastest of `repeats` runs.
pub fn bench(
    base: &[Event],
    powers: &[u32],
    params: &DetectorParams,
    repeats: usize,
) -> Result<Vec<BenchRow>> {
    if repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be positive".into()));
    }
    let mut rows = Vec::with_capacity(powers.len());
    for &p in powers {
        let factor = 1usize << p;
        let mut best = f64::INFINITY;
        let mut events = 0u64;
        for _ in 0..repeats {
            let mut detector = params.build()?;
            let mut checksum = 0.0;
            let start = Instant::now();
            events = 0;
            for event in upscale(base, factor) {
                let s = detector.process_event(&event)?;
                checksum += s.score_u + s.score_b;
                events += 1;
            }
            let elapsed = start.elapsed().as_secs_f64();
            std::hint::black_box(checksum);
            best = best.min(elapsed);
        }
        rows.push(BenchRow {
            factor: factor as u64,
            events,
            wall_seconds: best,
            events_per_second: events as f64 / best,
        });
    }
    Ok(rows)
}

/// Least-squares line through `(x, y)`: `(slope, intercept, r_squared)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InvalidConfig("need at least two points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidConfig("x values are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok((slope, intercept, r2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub num_supernodes: usize,
    pub num_functions: usize,
    pub alpha: f64,
    pub report: ComplementarityReport,
}

pub const SWEEP_HEADER: &str = "M,K,alpha,auroc_u,auroc_b,p_at_k_u,p_at_k_b";

impl SweepRow {
    pub fn to_csv(&self) -> String {
        let r = &self.report;
        format!(
            "{},{},{},{},{},{},{}",
            self.num_supernodes,
            self.num_functions,
            self.alpha,
            r.auroc_u,
            r.auroc_b,
            r.precision_u,
            r.precision_b
        )
    }
}

/// Grid settings shared by every point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub seed: u64,
    pub floor: f64,
    pub k: usize,
    pub eval_from: usize,
}

/// Scores and evaluates the stream at every `(M, K, alpha)` grid point,
/// in that nesting order.
pub fn sweep(
    events: &[Event],
    labels: &[bool],
    ms: &[usize],
    ks: &[usize],
    alphas: &[f64],
    settings: &SweepSettings,
) -> Result<Vec<SweepRow>> {
    for (name, empty) in [
        ("M", ms.is_empty()),
        ("K", ks.is_empty()),
        ("alpha", alphas.is_empty()),
    ] {
        if empty {
            return Err(Error::InvalidConfig(format!("{name} list is empty")));
        }
    }
    if labels.len() != events.len() {
        return Err(Error::LengthMismatch {
            expected: events.len(),
            got: labels.len(),
        });
    }
    let mut rows = Vec::new();
    for &m in ms {
        for &k in ks {
            for &alpha in alphas {
                let params = DetectorParams::new(m, k, alpha)
                    .with_seed(settings.seed)
                    .with_floor(settings.floor);
                let report = evaluate(&params, events, labels, settings)?;
                rows.push(SweepRow {
                    num_supernodes: m,
                    num_functions: k,
                    alpha,
                    report,
                });
            }
        }
    }
    Ok(rows)
}

/// Scores a labeled stream with one configuration and evaluates both
/// score types.
pub fn evaluate(
    params: &DetectorParams,
    events: &[Event],
    labels: &[bool],
    settings: &SweepSettings,
) -> Result<ComplementarityReport> {
    let scored = score_events(params, events)?;
    let us: Vec<f64> = scored.iter().map(|s| s.score_u).collect();
    let bs: Vec<f64> = scored.iter().map(|s| s.score_b).collect();
    let u = LabeledScores::from_slices(&us, labels, settings.eval_from)?;
    let b = LabeledScores::from_slices(&bs, labels, settings.eval_from)?;
    complementarity_report(&u, &b, settings.k)
}

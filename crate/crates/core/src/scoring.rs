//! Hyperedge anomaly scores.
//!
//! For an arriving hyperedge with supernode set `E`, every ordered pair
//! `(u, v)` in `E x E` (diagonal included) contributes
//!
//! ```text
//! d(u)^beta * ln(a(u, v) / s(u, v))
//! ```
//!
//! where `a(u, v) = m_v(e) / |e|` is the proximity observed inside the
//! hyperedge, `s(u, v)` is the proximity expected from history (the frozen
//! snapshot), and `d(u)` counts hyperedges at the current timestamp that
//! contain `u`. Unexpectedness takes the maximum with `beta = 0`;
//! burstiness takes the mean with `beta = 1`.

use crate::error::{Error, Result};
use crate::hashing::SupernodeVector;
use crate::summary::ProximityView;

pub const DEFAULT_FLOOR: f64 = 1e-12;

/// Observed/expected ratios within this relative distance of 1 score as an
/// exact match. `S / T` reproduces a repeated hyperedge's own distribution
/// only up to a few ulps of accumulated rounding.
pub const RATIO_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregator {
    Max,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreConfig {
    pub beta: f64,
    pub aggregator: Aggregator,
    /// Lower clamp on expected proximity before taking the log.
    pub floor: f64,
    /// Expected proximity for rows with no history; `None` means `1 / M`.
    pub prior: Option<f64>,
}

impl ScoreConfig {
    /// `score_U`: `beta = 0`, maximum over pairs.
    pub fn unexpectedness() -> Self {
        Self {
            beta: 0.0,
            aggregator: Aggregator::Max,
            floor: DEFAULT_FLOOR,
            prior: None,
        }
    }

    /// `score_B`: `beta = 1`, mean over pairs.
    pub fn burstiness() -> Self {
        Self {
            beta: 1.0,
            aggregator: Aggregator::Mean,
            floor: DEFAULT_FLOOR,
            prior: None,
        }
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    pub fn with_prior(mut self, prior: f64) -> Self {
        self.prior = Some(prior);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.floor > 0.0 && self.floor.is_finite()) {
            return Err(Error::InvalidConfig("delta must be positive".into()));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidConfig("beta must be non-negative".into()));
        }
        if let Some(p) = self.prior {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidConfig("prior must be in (0,1]".into()));
            }
        }
        Ok(())
    }

    fn prior_for(&self, num_supernodes: usize) -> f64 {
        self.prior.unwrap_or(1.0 / num_supernodes as f64)
    }
}

/// Per-supernode count of hyperedges seen at the current timestamp.
#[derive(Debug, Clone)]
pub struct DegreeTracker {
    current_timestamp: f64,
    counts: Vec<u32>,
    touched: Vec<u32>,
}

impl DegreeTracker {
    pub fn new(num_supernodes: usize) -> Self {
        Self {
            current_timestamp: f64::NEG_INFINITY,
            counts: vec![0; num_supernodes],
            touched: Vec::with_capacity(num_supernodes),
        }
    }

    pub fn current_timestamp(&self) -> f64 {
        self.current_timestamp
    }

    /// Registers one hyperedge. Each supernode of the hyperedge counts once,
    /// regardless of how many of its nodes fell into it. Counts reset when
    /// `t` moves past the current timestamp.
    pub fn observe(&mut self, mv: &SupernodeVector, t: f64) -> Result<()> {
        if t < self.current_timestamp || t.is_nan() {
            return Err(Error::NonMonotoneTimestamp {
                previous: self.current_timestamp,
                got: t,
            });
        }
        if mv.max_supernode() >= self.counts.len() {
            return Err(Error::InvalidConfig("supernode index out of range".into()));
        }
        if t > self.current_timestamp {
            for &u in &self.touched {
                self.counts[u as usize] = 0;
            }
            self.touched.clear();
            self.current_timestamp = t;
        }
        for u in mv.support() {
            if self.counts[u] == 0 {
                self.touched.push(u as u32);
            }
            self.counts[u] += 1;
        }
        Ok(())
    }

    #[inline]
    pub fn degree(&self, supernode: usize) -> u32 {
        self.counts[supernode]
    }

    /// Non-zero `(supernode, count)` entries in first-seen order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.touched
            .iter()
            .map(|&u| (u as usize, self.counts[u as usize]))
    }

    /// Allocated slots; fixed at `2 M` for the tracker's lifetime.
    pub fn capacity(&self) -> usize {
        self.counts.capacity() + self.touched.capacity()
    }
}

#[inline]
fn log_ratio(observed: f64, expected: f64) -> f64 {
    let ratio = observed / expected;
    if (ratio - 1.0).abs() <= RATIO_TOLERANCE {
        0.0
    } else {
        ratio.ln()
    }
}

/// Scores one vectorized hyperedge against a frozen proximity snapshot.
///
/// `tracker` must already include this hyperedge.
pub fn score(
    mv: &SupernodeVector,
    snapshot: &ProximityView,
    tracker: &DegreeTracker,
    cfg: &ScoreConfig,
) -> f64 {
    let size = f64::from(mv.size());
    let prior = cfg.prior_for(snapshot.num_supernodes());
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for (u, _) in mv.iter() {
        debug_assert!(
            tracker.degree(u) >= 1,
            "tracker must include the scored hyperedge"
        );
        let weight = if cfg.beta == 0.0 {
            1.0
        } else {
            f64::from(tracker.degree(u)).powf(cfg.beta)
        };
        let defined = snapshot.is_defined(u);
        for (v, count) in mv.iter() {
            let observed = f64::from(count) / size;
            let expected = if defined { snapshot.get(u, v) } else { prior };
            let term = weight * log_ratio(observed, expected.max(cfg.floor));
            max = max.max(term);
            sum += term;
        }
    }
    match cfg.aggregator {
        Aggregator::Max => max,
        Aggregator::Mean => {
            let pairs = mv.support_len() * mv.support_len();
            sum / pairs as f64
        }
    }
}

/// Scores a hyperedge under all K summaries and keeps the maximum of each
/// score type.
pub fn score_pair(
    mvs: &[SupernodeVector],
    snapshots: &[ProximityView],
    trackers: &[DegreeTracker],
    cfg_u: &ScoreConfig,
    cfg_b: &ScoreConfig,
) -> Result<(f64, f64)> {
    let k = mvs.len();
    if k == 0 {
        return Err(Error::InvalidConfig(
            "at least one summary is required".into(),
        ));
    }
    for len in [snapshots.len(), trackers.len()] {
        if len != k {
            return Err(Error::LengthMismatch {
                expected: k,
                got: len,
            });
        }
    }
    let mut best_u = f64::NEG_INFINITY;
    let mut best_b = f64::NEG_INFINITY;
    for ((mv, snap), tracker) in mvs.iter().zip(snapshots).zip(trackers) {
        best_u = best_u.max(score(mv, snap, tracker, cfg_u));
        best_b = best_b.max(score(mv, snap, tracker, cfg_b));
    }
    Ok((best_u, best_b))
}

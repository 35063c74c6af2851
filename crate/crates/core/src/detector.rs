//! End-to-end streaming detector.
//!
//! Per hyperedge at time `t`:
//!
//! 1. if `t` is past the previous timestamp, bring the proximity snapshot of
//!    every summary up to date (this is the expectation for all events at
//!    `t`); only rows touched since the last refresh are recomputed;
//! 2. vectorize the hyperedge under each of the K hash functions;
//! 3. record supernode occurrences at `t`;
//! 4. score against the frozen snapshots;
//! 5. fold the hyperedge into the live summaries.

use crate::error::{Error, Result};
use crate::hashing::{token_digest, vectorize_digests, HashConfig, SupernodeVector};
use crate::scoring::{score_pair, DegreeTracker, ScoreConfig, DEFAULT_FLOOR};
use crate::stream::{Event, Hyperedge};
use crate::summary::{batch_proximity, validate_alpha, ProximityView, Summary};

/// Tolerance of the optional batch-oracle comparison.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

/// User-facing detector parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorParams {
    pub num_supernodes: usize,
    pub num_functions: usize,
    pub alpha: f64,
    /// Base seed from which the K hash seeds are derived.
    pub seed: u64,
    /// Lower clamp on expected proximities (`delta`).
    pub floor: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            num_supernodes: 64,
            num_functions: 4,
            alpha: 0.98,
            seed: 42,
            floor: DEFAULT_FLOOR,
        }
    }
}

impl DetectorParams {
    pub fn new(num_supernodes: usize, num_functions: usize, alpha: f64) -> Self {
        Self {
            num_supernodes,
            num_functions,
            alpha,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    pub fn build(&self) -> Result<Detector> {
        let hash = HashConfig::from_base_seed(self.num_supernodes, self.num_functions, self.seed)?;
        Detector::new(
            hash,
            self.alpha,
            ScoreConfig::unexpectedness().with_floor(self.floor),
            ScoreConfig::burstiness().with_floor(self.floor),
        )
    }
}

/// Scores emitted for one input hyperedge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredEvent {
    pub index: u64,
    pub timestamp: f64,
    pub score_u: f64,
    pub score_b: f64,
}

/// Sizes of the resident per-stream state, in allocated slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateFootprint {
    /// `f64` slots of the live summaries: `K (M^2 + M)`.
    pub summary_floats: usize,
    /// `f64` slots of the frozen snapshots.
    pub snapshot_floats: usize,
    /// `u32` slots of the degree trackers.
    pub tracker_slots: usize,
    /// Slots recording which snapshot rows are stale.
    pub stale_row_slots: usize,
}

/// Rows touched since the last snapshot refresh, without duplicates.
#[derive(Debug, Clone)]
struct RowSet {
    member: Vec<bool>,
    rows: Vec<u32>,
}

impl RowSet {
    fn new(num_rows: usize) -> Self {
        Self {
            member: vec![false; num_rows],
            rows: Vec::with_capacity(num_rows),
        }
    }

    fn insert(&mut self, row: usize) {
        if !self.member[row] {
            self.member[row] = true;
            self.rows.push(row as u32);
        }
    }

    fn drain(&mut self) -> impl Iterator<Item = usize> + '_ {
        for &r in &self.rows {
            self.member[r as usize] = false;
        }
        self.rows.drain(..).map(|r| r as usize)
    }

    fn slots(&self) -> usize {
        self.member.capacity() + self.rows.capacity()
    }
}

#[derive(Debug, Clone)]
pub struct Detector {
    hash: HashConfig,
    alpha: f64,
    summaries: Vec<Summary>,
    snapshots: Vec<ProximityView>,
    trackers: Vec<DegreeTracker>,
    stale: Vec<RowSet>,
    score_u: ScoreConfig,
    score_b: ScoreConfig,
    current_time: f64,
    events_processed: u64,
    snapshot_version: u64,
    history: Option<Vec<Vec<(SupernodeVector, f64)>>>,
}

impl Detector {
    pub fn new(
        hash: HashConfig,
        alpha: f64,
        score_u: ScoreConfig,
        score_b: ScoreConfig,
    ) -> Result<Self> {
        validate_alpha(alpha)?;
        score_u.validate()?;
        score_b.validate()?;
        let m = hash.num_supernodes();
        let k = hash.num_functions();
        Ok(Self {
            summaries: (0..k)
                .map(|_| Summary::new(m, alpha))
                .collect::<Result<_>>()?,
            snapshots: vec![ProximityView::empty(m); k],
            trackers: (0..k).map(|_| DegreeTracker::new(m)).collect(),
            stale: (0..k).map(|_| RowSet::new(m)).collect(),
            hash,
            alpha,
            score_u,
            score_b,
            current_time: f64::NEG_INFINITY,
            events_processed: 0,
            snapshot_version: 0,
            history: None,
        })
    }

    /// Keeps the full vectorized history and, at every snapshot refresh,
    /// compares each snapshot against [`batch_proximity`]. Memory grows
    /// with the stream; meant for testing.
    pub fn with_oracle_check(mut self) -> Self {
        self.history = Some(vec![Vec::new(); self.hash.num_functions()]);
        self
    }

    pub fn hash_config(&self) -> &HashConfig {
        &self.hash
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn summaries(&self) -> &[Summary] {
        &self.summaries
    }

    pub fn snapshots(&self) -> &[ProximityView] {
        &self.snapshots
    }

    pub fn events_processed(&self) -> u64 {
        self.events_processed
    }

    /// Incremented every time the snapshots are refreshed.
    pub fn snapshot_version(&self) -> u64 {
        self.snapshot_version
    }

    pub fn footprint(&self) -> StateFootprint {
        StateFootprint {
            summary_floats: self.summaries.iter().map(Summary::stored_floats).sum(),
            snapshot_floats: self
                .snapshots
                .iter()
                .map(|s| s.num_supernodes() * (s.num_supernodes() + 1))
                .sum(),
            tracker_slots: self.trackers.iter().map(DegreeTracker::capacity).sum(),
            stale_row_slots: self.stale.iter().map(RowSet::slots).sum(),
        }
    }

    /// Rebases every live summary to its latest timestamp. Scores are
    /// unaffected; exposed so callers can exercise rebasing explicitly.
    pub fn rebase_all(&mut self) {
        self.summaries.iter_mut().for_each(Summary::rebase_to_last);
    }

    fn refresh_snapshots(&mut self) -> Result<()> {
        for ((snap, summary), stale) in self
            .snapshots
            .iter_mut()
            .zip(&self.summaries)
            .zip(&mut self.stale)
        {
            for u in stale.drain() {
                summary.refresh_row(snap, u);
            }
        }
        self.snapshot_version += 1;
        if let Some(history) = &self.history {
            for (k, (events, snap)) in history.iter().zip(&self.snapshots).enumerate() {
                let Some(&(_, t_now)) = events.last() else {
                    continue;
                };
                let batch = batch_proximity(events, t_now, self.alpha, self.hash.num_supernodes())?;
                check_against_oracle(snap, &batch, t_now, k)?;
            }
        }
        Ok(())
    }

    /// Scores one hyperedge and folds it into the summaries.
    pub fn process(&mut self, e: &Hyperedge, t: f64) -> Result<ScoredEvent> {
        if t.is_nan() || t < self.current_time {
            return Err(Error::NonMonotoneTimestamp {
                previous: self.current_time,
                got: t,
            });
        }
        if t > self.current_time {
            self.refresh_snapshots()?;
            self.current_time = t;
        }

        let digests: Vec<u64> = e
            .nodes()
            .iter()
            .map(|v| token_digest(v.as_bytes()))
            .collect();
        let m = self.hash.num_supernodes();
        let mvs: Vec<SupernodeVector> = self
            .hash
            .seeds()
            .iter()
            .map(|&seed| vectorize_digests(&digests, seed, m))
            .collect();

        for (tracker, mv) in self.trackers.iter_mut().zip(&mvs) {
            tracker.observe(mv, t)?;
        }
        let (score_u, score_b) = score_pair(
            &mvs,
            &self.snapshots,
            &self.trackers,
            &self.score_u,
            &self.score_b,
        )?;
        for ((summary, stale), mv) in self.summaries.iter_mut().zip(&mut self.stale).zip(&mvs) {
            summary.update(mv, t)?;
            mv.support().for_each(|u| stale.insert(u));
        }
        if let Some(history) = &mut self.history {
            for (events, mv) in history.iter_mut().zip(mvs) {
                events.push((mv, t));
            }
        }

        let index = self.events_processed;
        self.events_processed += 1;
        Ok(ScoredEvent {
            index,
            timestamp: t,
            score_u,
            score_b,
        })
    }

    pub fn process_event(&mut self, event: &Event) -> Result<ScoredEvent> {
        self.process(&event.hyperedge, event.timestamp)
    }
}

fn check_against_oracle(
    snap: &ProximityView,
    batch: &ProximityView,
    t: f64,
    k: usize,
) -> Result<()> {
    let m = snap.num_supernodes();
    for u in 0..m {
        for v in 0..m {
            let (a, b) = (snap.get(u, v), batch.get(u, v));
            if snap.is_defined(u) != batch.is_defined(u) || (a - b).abs() > ORACLE_TOLERANCE {
                return Err(Error::OracleMismatch {
                    timestamp: t,
                    summary: k,
                    row: u,
                    col: v,
                    incremental: a,
                    batch: b,
                });
            }
        }
    }
    Ok(())
}

/// Runs a detector over a fallible event stream, passing each score to
/// `sink`. Errors carry the 1-based position of the offending event.
pub fn run_stream<I, F>(detector: &mut Detector, events: I, mut sink: F) -> Result<u64>
where
    I: IntoIterator<Item = Result<Event>>,
    F: FnMut(ScoredEvent) -> Result<()>,
{
    let mut count = 0u64;
    for (i, event) in events.into_iter().enumerate() {
        let event = event?;
        let scored = detector
            .process_event(&event)
            .map_err(|e| e.at_line(i + 1))?;
        sink(scored)?;
        count += 1;
    }
    Ok(count)
}

/// Scores an in-memory stream.
pub fn score_events<'a, I>(params: &DetectorParams, events: I) -> Result<Vec<ScoredEvent>>
where
    I: IntoIterator<Item = &'a Event>,
{
    let mut detector = params.build()?;
    events
        .into_iter()
        .enumerate()
        .map(|(i, e)| detector.process_event(e).map_err(|err| err.at_line(i + 1)))
        .collect()
}

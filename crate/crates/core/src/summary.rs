//! Time-decayed supernode proximity summary.
//!
//! For every supernode pair the summary keeps a decayed numerator `S[u][v]`
//! and for every supernode a decayed denominator `T[u]`:
//!
//! ```text
//! S[u][v] = sum_i alpha^(base - t_i) * [u in e_i] * m_v(e_i) / |e_i|
//! T[u]    = sum_i alpha^(base - t_i) * [u in e_i]
//! ```
//!
//! The proximity (one-step random-walk transition probability between
//! supernodes, with hyperedges weighted by `alpha^(now - t_i) (1 - alpha)`)
//! is `S[u][v] / T[u]`. Any common factor cancels in that ratio, so the
//! reference time `base` can be moved forward at will; [`Summary::update`]
//! does so automatically before the pending factor would exceed
//! [`REBASE_LIMIT`].

use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hashing::SupernodeVector;

/// Largest increment factor `alpha^(base - t)` applied without rebasing first.
pub const REBASE_LIMIT: f64 = 1e120;

const CHECKPOINT_MAGIC: &[u8; 4] = b"HNWK";
const CHECKPOINT_VERSION: u16 = 1;
const CHECKPOINT_HEADER_LEN: usize = 16;

pub(crate) fn validate_alpha(alpha: f64) -> Result<()> {
    if (0.0..1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidConfig("alpha must be in [0,1)".into()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    num_supernodes: usize,
    alpha: f64,
    /// Row-major `M x M`.
    numer: Vec<f64>,
    denom: Vec<f64>,
    base_time: f64,
    last_time: f64,
}

impl Summary {
    pub fn new(num_supernodes: usize, alpha: f64) -> Result<Self> {
        if num_supernodes == 0 {
            return Err(Error::InvalidConfig("M must be at least 1".into()));
        }
        validate_alpha(alpha)?;
        Ok(Self {
            num_supernodes,
            alpha,
            numer: vec![0.0; num_supernodes * num_supernodes],
            denom: vec![0.0; num_supernodes],
            base_time: 0.0,
            last_time: f64::NEG_INFINITY,
        })
    }

    pub fn num_supernodes(&self) -> usize {
        self.num_supernodes
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn base_time(&self) -> f64 {
        self.base_time
    }

    /// Largest timestamp incorporated so far, `-inf` before the first update.
    pub fn last_time(&self) -> f64 {
        self.last_time
    }

    pub fn numerator(&self, u: usize, v: usize) -> f64 {
        self.numer[u * self.num_supernodes + v]
    }

    pub fn denominator(&self, u: usize) -> f64 {
        self.denom[u]
    }

    /// Number of stored floating-point values: `M^2 + M`.
    pub fn stored_floats(&self) -> usize {
        self.numer.len() + self.denom.len()
    }

    /// Folds one hyperedge arriving at time `t` into the summary.
    ///
    /// Touches only the `|support|^2` numerator cells and `|support|`
    /// denominator cells of the hyperedge's supernodes.
    pub fn update(&mut self, mv: &SupernodeVector, t: f64) -> Result<()> {
        if t.is_nan() {
            return Err(Error::InvalidConfig("timestamp must not be NaN".into()));
        }
        if t < self.last_time {
            return Err(Error::NonMonotoneTimestamp {
                previous: self.last_time,
                got: t,
            });
        }
        if mv.max_supernode() >= self.num_supernodes {
            return Err(Error::InvalidConfig(format!(
                "supernode {} out of range for M = {}",
                mv.max_supernode(),
                self.num_supernodes
            )));
        }
        if self.last_time == f64::NEG_INFINITY {
            // Nothing stored yet, so moving the reference point is free.
            self.base_time = t;
        }

        let mut factor = self.alpha.powf(self.base_time - t);
        if factor.is_nan() || factor > REBASE_LIMIT {
            self.rebase(t);
            factor = 1.0;
        }

        let size = f64::from(mv.size());
        let m = self.num_supernodes;
        for (u, _) in mv.iter() {
            self.denom[u] += factor;
            let row = &mut self.numer[u * m..(u + 1) * m];
            for (v, count) in mv.iter() {
                row[v] += factor * (f64::from(count) / size);
            }
        }
        self.last_time = t;
        Ok(())
    }

    /// Multiplies every stored value by `alpha^(new_base - base_time)` and
    /// moves the reference time to `new_base`. Proximities are unchanged.
    pub fn rebase(&mut self, new_base: f64) {
        assert!(
            new_base >= self.base_time,
            "rebase target {new_base} precedes base time {}",
            self.base_time
        );
        let scale = self.alpha.powf(new_base - self.base_time);
        if scale != 1.0 {
            self.numer.iter_mut().for_each(|x| *x *= scale);
            self.denom.iter_mut().for_each(|x| *x *= scale);
        }
        self.base_time = new_base;
    }

    /// Rebases to the latest incorporated timestamp.
    pub fn rebase_to_last(&mut self) {
        if self.last_time.is_finite() {
            self.rebase(self.last_time);
        }
    }

    /// Proximity `S[u][v] / T[u]` for a single pair, `None` if row `u` has
    /// no history.
    pub fn proximity_entry(&self, u: usize, v: usize) -> Option<f64> {
        let d = self.denom[u];
        (d > 0.0).then(|| self.numerator(u, v) / d)
    }

    pub fn proximity(&self) -> ProximityView {
        let mut view = ProximityView::empty(self.num_supernodes);
        for u in 0..self.num_supernodes {
            self.refresh_row(&mut view, u);
        }
        view
    }

    /// Recomputes row `u` of `view` from the current state. Rows whose
    /// supernode has not been updated since the view was taken need no
    /// refresh: decay and rebasing scale a row's numerators and denominator
    /// alike.
    pub fn refresh_row(&self, view: &mut ProximityView, u: usize) {
        let m = self.num_supernodes;
        assert_eq!(view.num_supernodes, m, "view size mismatch");
        let d = self.denom[u];
        let dst = &mut view.entries[u * m..(u + 1) * m];
        view.defined[u] = d > 0.0;
        if d > 0.0 {
            for (dst, &x) in dst.iter_mut().zip(&self.numer[u * m..(u + 1) * m]) {
                *dst = x / d;
            }
        } else {
            dst.fill(0.0);
        }
    }

    /// Writes the binary checkpoint: a 16-byte header (`HNWK`, version
    /// `u16`, `M` as `u32`, 6 reserved zero bytes) followed by little-endian
    /// `f64`s: `S` row-major, `T`, `base_time`, `last_time`, `alpha`.
    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = [0u8; CHECKPOINT_HEADER_LEN];
        header[..4].copy_from_slice(CHECKPOINT_MAGIC);
        header[4..6].copy_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        header[6..10].copy_from_slice(&(self.num_supernodes as u32).to_le_bytes());
        w.write_all(&header)?;
        let tail = [self.base_time, self.last_time, self.alpha];
        for x in self.numer.iter().chain(&self.denom).chain(&tail) {
            w.write_all(&x.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; CHECKPOINT_HEADER_LEN];
        r.read_exact(&mut header)?;
        if &header[..4] != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let m = u32::from_le_bytes(header[6..10].try_into().unwrap()) as usize;
        if m == 0 {
            return Err(Error::Checkpoint("M must be at least 1".into()));
        }
        let mut read_f64 = || -> Result<f64> {
            let mut buf = [0u8; 8];
            r.read_exact(&mut buf)?;
            Ok(f64::from_le_bytes(buf))
        };
        let numer = (0..m * m).map(|_| read_f64()).collect::<Result<Vec<_>>>()?;
        let denom = (0..m).map(|_| read_f64()).collect::<Result<Vec<_>>>()?;
        let base_time = read_f64()?;
        let last_time = read_f64()?;
        let alpha = read_f64()?;
        validate_alpha(alpha).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if numer
            .iter()
            .chain(&denom)
            .any(|x| !x.is_finite() || *x < 0.0)
        {
            return Err(Error::Checkpoint(
                "entries must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            num_supernodes: m,
            alpha,
            numer,
            denom,
            base_time,
            last_time,
        })
    }
}

/// Materialized `M x M` proximity matrix. Row `u` is defined iff `T[u] > 0`;
/// undefined rows hold zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityView {
    num_supernodes: usize,
    entries: Vec<f64>,
    defined: Vec<bool>,
}

impl ProximityView {
    /// A view with no history: every row undefined.
    pub fn empty(num_supernodes: usize) -> Self {
        Self {
            num_supernodes,
            entries: vec![0.0; num_supernodes * num_supernodes],
            defined: vec![false; num_supernodes],
        }
    }

    pub fn num_supernodes(&self) -> usize {
        self.num_supernodes
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.entries[u * self.num_supernodes + v]
    }

    pub fn row(&self, u: usize) -> &[f64] {
        &self.entries[u * self.num_supernodes..(u + 1) * self.num_supernodes]
    }

    #[inline]
    pub fn is_defined(&self, u: usize) -> bool {
        self.defined[u]
    }

    pub fn defined_rows(&self) -> &[bool] {
        &self.defined
    }

    /// Largest absolute entrywise difference, or `None` if the two views
    /// disagree on which rows are defined or on their dimension.
    pub fn max_abs_diff(&self, other: &ProximityView) -> Option<f64> {
        if self.num_supernodes != other.num_supernodes || self.defined != other.defined {
            return None;
        }
        Some(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }
}

/// Builds the proximity matrix from scratch out of the full history by
/// forming the weighted incidence matrices explicitly:
/// `P = D_V^-1 W D_E^-1 R`, with `W` (`M x |E|`) holding the decayed
/// hyperedge weights `alpha^(t_now - t_i) (1 - alpha)`, `R` (`|E| x M`)
/// holding supernode multiplicities, `D_E = diag(R 1)` and `D_V = diag(W 1)`.
///
/// Costs `O(|history| * M^2)`; intended as a reference for [`Summary`].
pub fn batch_proximity(
    history: &[(SupernodeVector, f64)],
    t_now: f64,
    alpha: f64,
    num_supernodes: usize,
) -> Result<ProximityView> {
    if history.is_empty() {
        return Err(Error::EmptyHistory);
    }
    validate_alpha(alpha)?;
    let m = num_supernodes;
    let n = history.len();

    let mut w = DMatrix::<f64>::zeros(m, n);
    let mut r = DMatrix::<f64>::zeros(n, m);
    for (i, (mv, t)) in history.iter().enumerate() {
        if *t > t_now {
            return Err(Error::InvalidConfig(format!(
                "history timestamp {t} is after t_now {t_now}"
            )));
        }
        if mv.max_supernode() >= m {
            return Err(Error::InvalidConfig("supernode index out of range".into()));
        }
        let weight = alpha.powf(t_now - t) * (1.0 - alpha);
        for (v, count) in mv.iter() {
            w[(v, i)] = weight;
            r[(i, v)] = f64::from(count);
        }
    }

    let edge_degree: Vec<f64> = (0..n).map(|i| r.row(i).sum()).collect();
    let node_degree: Vec<f64> = (0..m).map(|u| w.row(u).sum()).collect();

    let mut w_scaled = w;
    for (i, d) in edge_degree.iter().enumerate() {
        w_scaled.column_mut(i).scale_mut(1.0 / d);
    }
    let walk = w_scaled * r;

    let mut entries = vec![0.0; m * m];
    let mut defined = vec![false; m];
    for u in 0..m {
        if node_degree[u] > 0.0 {
            defined[u] = true;
            for v in 0..m {
                entries[u * m + v] = walk[(u, v)] / node_degree[u];
            }
        }
    }
    Ok(ProximityView {
        num_supernodes: m,
        entries,
        defined,
    })
}

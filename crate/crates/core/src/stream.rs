//! Hyperedges and timestamped stream events.

use crate::error::{Error, Result};

/// A non-empty set of node identifiers.
///
/// Nodes are opaque tokens. Construction sorts and deduplicates them, so two
/// hyperedges built from the same members in any order compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hyperedge {
    nodes: Vec<String>,
}

impl Hyperedge {
    pub fn new<I, S>(nodes: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut nodes: Vec<String> = nodes.into_iter().map(Into::into).collect();
        nodes.sort_unstable();
        nodes.dedup();
        if nodes.is_empty() {
            return Err(Error::EmptyHyperedge);
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, node: &str) -> bool {
        self.nodes
            .binary_search_by(|probe| probe.as_str().cmp(node))
            .is_ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub timestamp: f64,
    pub hyperedge: Hyperedge,
}

impl Event {
    pub fn new(timestamp: f64, hyperedge: Hyperedge) -> Self {
        Self {
            timestamp,
            hyperedge,
        }
    }
}

/// An event together with its ground-truth anomaly label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledEvent {
    pub event: Event,
    pub anomalous: bool,
}

impl LabeledEvent {
    pub fn normal(event: Event) -> Self {
        Self {
            event,
            anomalous: false,
        }
    }

    pub fn injected(event: Event) -> Self {
        Self {
            event,
            anomalous: true,
        }
    }

    pub fn timestamp(&self) -> f64 {
        self.event.timestamp
    }
}

/// Checks that timestamps never decrease, reporting the offending 0-based index.
pub fn check_monotone<'a, I>(timestamps: I) -> std::result::Result<(), usize>
where
    I: IntoIterator<Item = &'a f64>,
{
    let mut previous = f64::NEG_INFINITY;
    for (i, &t) in timestamps.into_iter().enumerate() {
        if t < previous {
            return Err(i);
        }
        previous = t;
    }
    Ok(())
}

//! Labeled benchmark streams: a synthetic community-structured base stream,
//! two anomaly injection protocols, and timestamp-shifted replication.

use std::collections::BTreeSet;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::stream::{Event, Hyperedge, LabeledEvent};

const MAX_RESAMPLES: usize = 1000;

/// Parameters of the unexpected-hyperedge injection.
#[derive(Debug, Clone, PartialEq)]
pub struct InjectionUParams {
    /// Number of injected hyperedges.
    pub count: usize,
    /// Only events strictly after this timestamp serve as templates.
    pub t_setup: f64,
    pub rng_seed: u64,
}

/// Parameters of the bursty-hyperedge injection.
#[derive(Debug, Clone, PartialEq)]
pub struct InjectionBParams {
    /// Number of bursts (`l`).
    pub bursts: usize,
    /// Hyperedges per burst (`m`).
    pub per_burst: usize,
    /// Size of each burst's node pool (`n`).
    pub group_size: usize,
    pub t_setup: f64,
    pub rng_seed: u64,
}

impl InjectionBParams {
    /// 10 bursts of 20 hyperedges over 5-node pools.
    pub fn standard(t_setup: f64, rng_seed: u64) -> Self {
        Self {
            bursts: 10,
            per_burst: 20,
            group_size: 5,
            t_setup,
            rng_seed,
        }
    }
}

/// Timestamp of the event at 0-based `index`, used as the warm-up boundary.
pub fn t_setup_at(base: &[LabeledEvent], index: usize) -> Result<f64> {
    base.get(index).map(LabeledEvent::timestamp).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "t_setup index {index} is beyond the {} base events",
            base.len()
        ))
    })
}

fn node_universe(base: &[LabeledEvent]) -> Vec<String> {
    let set: BTreeSet<&str> = base
        .iter()
        .flat_map(|e| e.event.hyperedge.nodes().iter().map(String::as_str))
        .collect();
    set.into_iter().map(str::to_owned).collect()
}

/// Inserts injected events after every base event sharing their timestamp.
fn merge(base: &[LabeledEvent], injected: Vec<LabeledEvent>) -> Vec<LabeledEvent> {
    let mut out: Vec<LabeledEvent> = base.iter().cloned().chain(injected).collect();
    // Stable: originals keep their order and precede injections at equal time.
    out.sort_by(|a, b| a.timestamp().total_cmp(&b.timestamp()));
    out
}

/// Injects hyperedges that replace half (rounded up) of a template's nodes
/// with nodes drawn from outside the template.
///
/// Templates are base events with timestamp above `t_setup`, chosen
/// uniformly; each injected hyperedge takes its template's timestamp and size.
pub fn inject_unexpected(base: &[LabeledEvent], p: &InjectionUParams) -> Result<Vec<LabeledEvent>> {
    let templates: Vec<&LabeledEvent> = base.iter().filter(|e| e.timestamp() > p.t_setup).collect();
    if templates.is_empty() {
        return Err(Error::Injection("no base hyperedge after t_setup".into()));
    }
    let universe = node_universe(base);
    let mut rng = ChaCha8Rng::seed_from_u64(p.rng_seed);
    let mut injected = Vec::with_capacity(p.count);

    for _ in 0..p.count {
        let mut made = None;
        for _ in 0..MAX_RESAMPLES {
            let template = templates[rng.gen_range(0..templates.len())];
            let members = template.event.hyperedge.nodes();
            let replace = members.len().div_ceil(2);
            let outside: Vec<&String> = universe
                .iter()
                .filter(|v| !template.event.hyperedge.contains(v))
                .collect();
            if outside.len() < replace {
                continue;
            }
            let mut nodes: Vec<String> = members.to_vec();
            nodes.shuffle(&mut rng);
            nodes.truncate(members.len() - replace);
            nodes.extend(
                index::sample(&mut rng, outside.len(), replace)
                    .into_iter()
                    .map(|i| outside[i].clone()),
            );
            made = Some(Event::new(template.timestamp(), Hyperedge::new(nodes)?));
            break;
        }
        let event = made.ok_or_else(|| {
            Error::Injection("too few nodes outside the sampled hyperedges".into())
        })?;
        injected.push(LabeledEvent::injected(event));
    }
    Ok(merge(base, injected))
}

/// Injects `bursts` bursts; each picks a base timestamp above `t_setup`
/// and a pool of `group_size` nodes, then emits `per_burst` random
/// non-empty subsets of the pool at that timestamp.
pub fn inject_bursty(base: &[LabeledEvent], p: &InjectionBParams) -> Result<Vec<LabeledEvent>> {
    if p.group_size == 0 {
        return Err(Error::InvalidConfig("group size must be positive".into()));
    }
    let mut times: Vec<f64> = base
        .iter()
        .map(LabeledEvent::timestamp)
        .filter(|&t| t > p.t_setup)
        .collect();
    times.dedup();
    if times.is_empty() {
        return Err(Error::Injection("no base timestamp after t_setup".into()));
    }
    let universe = node_universe(base);
    if universe.len() < p.group_size {
        return Err(Error::Injection(format!(
            "group size {} exceeds the {} distinct base nodes",
            p.group_size,
            universe.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.rng_seed);
    let mut injected = Vec::with_capacity(p.bursts * p.per_burst);
    for _ in 0..p.bursts {
        let t = times[rng.gen_range(0..times.len())];
        let pool: Vec<&String> = index::sample(&mut rng, universe.len(), p.group_size)
            .into_iter()
            .map(|i| &universe[i])
            .collect();
        for _ in 0..p.per_burst {
            let size = rng.gen_range(1..=p.group_size);
            let nodes = index::sample(&mut rng, pool.len(), size)
                .into_iter()
                .map(|i| pool[i].clone());
            injected.push(LabeledEvent::injected(Event::new(
                t,
                Hyperedge::new(nodes)?,
            )));
        }
    }
    Ok(merge(base, injected))
}

/// Generates a community-structured stream with all labels 0.
///
/// Node `i` is named by its decimal index and belongs to community
/// `i % communities`. Each event draws a hyperedge of 1 to 6 nodes: with
/// probability 0.8 from one uniformly chosen community, otherwise from the
/// whole population. Timestamps start at 0 and advance by 0 (p = 0.3) or
/// 1 (p = 0.7) per event.
pub fn synth_base(
    num_nodes: usize,
    num_events: usize,
    communities: usize,
    rng_seed: u64,
) -> Result<Vec<LabeledEvent>> {
    if communities == 0 {
        return Err(Error::InvalidConfig("need at least one community".into()));
    }
    if num_nodes < communities {
        return Err(Error::InvalidConfig(
            "need at least as many nodes as communities".into(),
        ));
    }
    let members: Vec<Vec<usize>> = (0..communities)
        .map(|c| (c..num_nodes).step_by(communities).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut out = Vec::with_capacity(num_events);
    let mut t = 0u64;
    for i in 0..num_events {
        if i > 0 && rng.gen_bool(0.7) {
            t += 1;
        }
        let size = rng.gen_range(1..=6usize);
        let nodes: Vec<String> = if rng.gen_bool(0.8) {
            let group = &members[rng.gen_range(0..communities)];
            index::sample(&mut rng, group.len(), size.min(group.len()))
                .into_iter()
                .map(|j| group[j].to_string())
                .collect()
        } else {
            index::sample(&mut rng, num_nodes, size.min(num_nodes))
                .into_iter()
                .map(|j| j.to_string())
                .collect()
        };
        out.push(LabeledEvent::normal(Event::new(
            t as f64,
            Hyperedge::new(nodes)?,
        )));
    }
    Ok(out)
}

/// Something carrying a timestamp that can be re-stamped.
pub trait Timestamped: Clone {
    fn timestamp(&self) -> f64;
    fn set_timestamp(&mut self, t: f64);
}

impl Timestamped for Event {
    fn timestamp(&self) -> f64 {
        self.timestamp
    }

    fn set_timestamp(&mut self, t: f64) {
        self.timestamp = t;
    }
}

impl Timestamped for LabeledEvent {
    fn timestamp(&self) -> f64 {
        self.event.timestamp
    }

    fn set_timestamp(&mut self, t: f64) {
        self.event.timestamp = t;
    }
}

/// Lazily concatenates `factor` copies of `base`, shifting copy `j` by
/// `j * (t_max - t_min + 1)`. Node identifiers are left unchanged.
pub fn upscale<T: Timestamped>(base: &[T], factor: usize) -> impl Iterator<Item = T> + '_ {
    let span = match (base.first(), base.last()) {
        (Some(first), Some(last)) => last.timestamp() - first.timestamp() + 1.0,
        _ => 0.0,
    };
    (0..factor).flat_map(move |j| {
        let shift = j as f64 * span;
        base.iter().map(move |e| {
            let mut e = e.clone();
            e.set_timestamp(e.timestamp() + shift);
            e
        })
    })
}

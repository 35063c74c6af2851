//! Rank-based evaluation of score streams.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredLabel {
    pub index: usize,
    pub score: f64,
    pub anomalous: bool,
}

/// Scores with ground-truth labels. Only entries with `index >= eval_from`
/// take part in evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledScores {
    entries: Vec<ScoredLabel>,
    eval_from: usize,
}

impl LabeledScores {
    pub fn new(entries: Vec<ScoredLabel>, eval_from: usize) -> Self {
        Self { entries, eval_from }
    }

    /// Pairs `scores[i]` with `labels[i]` under index `i`.
    pub fn from_slices(scores: &[f64], labels: &[bool], eval_from: usize) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::LengthMismatch {
                expected: scores.len(),
                got: labels.len(),
            });
        }
        let entries = scores
            .iter()
            .zip(labels)
            .enumerate()
            .map(|(index, (&score, &anomalous))| ScoredLabel {
                index,
                score,
                anomalous,
            })
            .collect();
        Ok(Self::new(entries, eval_from))
    }

    pub fn eval_from(&self) -> usize {
        self.eval_from
    }

    pub fn evaluated(&self) -> impl Iterator<Item = &ScoredLabel> {
        let from = self.eval_from;
        self.entries.iter().filter(move |e| e.index >= from)
    }

    /// Same labels with every score negated.
    pub fn negated(&self) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|e| ScoredLabel {
                    score: -e.score,
                    ..*e
                })
                .collect(),
            eval_from: self.eval_from,
        }
    }

    fn evaluated_indices(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = self.evaluated().map(|e| e.index).collect();
        idx.sort_unstable();
        idx
    }
}

/// Probability that a random positive outranks a random negative, with ties
/// counting one half (Mann-Whitney U over positives and negatives).
pub fn auroc(ls: &LabeledScores) -> Result<f64> {
    let mut items: Vec<(f64, bool)> = ls.evaluated().map(|e| (e.score, e.anomalous)).collect();
    let positives = items.iter().filter(|(_, y)| *y).count() as u64;
    let negatives = items.len() as u64 - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::DegenerateLabels);
    }
    items.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Twice the U statistic, kept integral so ties are exact.
    let mut twice_u: u64 = 0;
    let mut negatives_below: u64 = 0;
    let mut i = 0;
    while i < items.len() {
        let mut j = i;
        while j < items.len() && items[j].0.total_cmp(&items[i].0).is_eq() {
            j += 1;
        }
        let pos = items[i..j].iter().filter(|(_, y)| *y).count() as u64;
        let neg = (j - i) as u64 - pos;
        twice_u += pos * (2 * negatives_below + neg);
        negatives_below += neg;
        i = j;
    }

    // Evaluate from the smaller tail so that auroc(s) + auroc(-s) == 1.
    let twice_pairs = 2 * positives * negatives;
    let lower = twice_u.min(twice_pairs - twice_u) as f64 / twice_pairs as f64;
    Ok(if 2 * twice_u <= twice_pairs {
        lower
    } else {
        1.0 - lower
    })
}

/// Fraction of positives among the `k` highest-scored entries. Equal
/// scores are ordered by lower index first.
pub fn precision_at_k(ls: &LabeledScores, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be positive".into()));
    }
    let mut items: Vec<&ScoredLabel> = ls.evaluated().collect();
    if k > items.len() {
        return Err(Error::KTooLarge {
            k,
            available: items.len(),
        });
    }
    items.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.index.cmp(&b.index)));
    let hits = items[..k].iter().filter(|e| e.anomalous).count();
    Ok(hits as f64 / k as f64)
}

/// AUROC and precision@k of both score types on one labeled stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplementarityReport {
    pub k: usize,
    pub auroc_u: f64,
    pub auroc_b: f64,
    pub precision_u: f64,
    pub precision_b: f64,
}

impl ComplementarityReport {
    /// Tab-separated table with a header row and one row per score type.
    pub fn to_tsv(&self) -> String {
        format!(
            "score\tauroc\tprecision_at_{k}\nU\t{}\t{}\nB\t{}\t{}\n",
            self.auroc_u,
            self.precision_u,
            self.auroc_b,
            self.precision_b,
            k = self.k
        )
    }
}

impl std::fmt::Display for ComplementarityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "          AUROC   Prec.@{}", self.k)?;
        writeln!(f, "score_U   {:.3}   {:.3}", self.auroc_u, self.precision_u)?;
        write!(f, "score_B   {:.3}   {:.3}", self.auroc_b, self.precision_b)
    }
}

pub fn complementarity_report(
    scores_u: &LabeledScores,
    scores_b: &LabeledScores,
    k: usize,
) -> Result<ComplementarityReport> {
    if scores_u.evaluated_indices() != scores_b.evaluated_indices() {
        return Err(Error::IndexMismatch);
    }
    Ok(ComplementarityReport {
        k,
        auroc_u: auroc(scores_u)?,
        auroc_b: auroc(scores_b)?,
        precision_u: precision_at_k(scores_u, k)?,
        precision_b: precision_at_k(scores_b, k)?,
    })
}

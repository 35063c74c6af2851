//! Tab-separated on-disk formats.
//!
//! * stream: `<timestamp>\t<node>,<node>,...`
//! * scores: `<index>\t<timestamp>\t<score_u>\t<score_b>`
//! * labels: `<index>\t<0|1>`
//!
//! Floats are written in their shortest round-trip decimal form.

use std::io::{BufRead, Write};

use crate::detector::ScoredEvent;
use crate::error::{Error, Result};
use crate::stream::{Event, Hyperedge, LabeledEvent};

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_timestamp(field: &str, line: usize) -> Result<f64> {
    let t: f64 = field
        .parse()
        .map_err(|_| parse_error(line, format!("invalid timestamp {field:?}")))?;
    if !t.is_finite() || t < 0.0 {
        return Err(parse_error(
            line,
            format!("timestamp must be a non-negative number, got {field:?}"),
        ));
    }
    Ok(t)
}

/// Parses one stream line. `line` is the 1-based position used in errors.
pub fn parse_stream_line(text: &str, line: usize) -> Result<Event> {
    let (ts, nodes) = text
        .split_once('\t')
        .ok_or_else(|| parse_error(line, "expected <timestamp><TAB><nodes>"))?;
    let timestamp = parse_timestamp(ts, line)?;
    if nodes.contains('\t') {
        return Err(parse_error(line, "unexpected extra field"));
    }
    let tokens: Vec<&str> = nodes.split(',').collect();
    if tokens.iter().any(|t| t.is_empty()) {
        return Err(parse_error(line, "empty node identifier"));
    }
    let hyperedge = Hyperedge::new(tokens).map_err(|e| e.at_line(line))?;
    Ok(Event::new(timestamp, hyperedge))
}

/// Lazily parses a stream file, checking that timestamps never decrease.
pub struct StreamReader<R> {
    lines: std::io::Lines<R>,
    line: usize,
    previous: f64,
}

impl<R: BufRead> StreamReader<R> {
    pub fn new(reader: R) -> Self {
        Self {
            lines: reader.lines(),
            line: 0,
            previous: f64::NEG_INFINITY,
        }
    }
}

impl<R: BufRead> Iterator for StreamReader<R> {
    type Item = Result<Event>;

    fn next(&mut self) -> Option<Self::Item> {
        let text = match self.lines.next()? {
            Ok(text) => text,
            Err(e) => return Some(Err(e.into())),
        };
        self.line += 1;
        let text = text.strip_suffix('\r').unwrap_or(&text);
        let event = match parse_stream_line(text, self.line) {
            Ok(event) => event,
            Err(e) => return Some(Err(e)),
        };
        if event.timestamp < self.previous {
            return Some(Err(parse_error(
                self.line,
                format!(
                    "non-monotone timestamp: {} arrived after {}",
                    event.timestamp, self.previous
                ),
            )));
        }
        self.previous = event.timestamp;
        Some(Ok(event))
    }
}

pub fn read_stream<R: BufRead>(reader: R) -> Result<Vec<Event>> {
    StreamReader::new(reader).collect()
}

fn check_token(node: &str) -> Result<()> {
    if node.is_empty() || node.contains(['\t', ',', '\n', '\r']) {
        return Err(Error::InvalidConfig(format!(
            "node identifier {node:?} cannot be written to a stream file"
        )));
    }
    Ok(())
}

pub fn write_stream_event<W: Write>(w: &mut W, event: &Event) -> Result<()> {
    write!(w, "{}\t", event.timestamp)?;
    for (i, node) in event.hyperedge.nodes().iter().enumerate() {
        check_token(node)?;
        if i > 0 {
            w.write_all(b",")?;
        }
        w.write_all(node.as_bytes())?;
    }
    w.write_all(b"\n")?;
    Ok(())
}

pub fn write_stream<'a, W, I>(mut w: W, events: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a Event>,
{
    for event in events {
        write_stream_event(&mut w, event)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_score<W: Write>(w: &mut W, s: &ScoredEvent) -> Result<()> {
    writeln!(
        w,
        "{}\t{}\t{}\t{}",
        s.index, s.timestamp, s.score_u, s.score_b
    )?;
    Ok(())
}

pub fn write_scores<'a, W, I>(mut w: W, scores: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a ScoredEvent>,
{
    for s in scores {
        write_score(&mut w, s)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_f64(field: &str, what: &str, line: usize) -> Result<f64> {
    field
        .parse()
        .map_err(|_| parse_error(line, format!("invalid {what} {field:?}")))
}

fn parse_index(field: &str, line: usize) -> Result<usize> {
    field
        .parse()
        .map_err(|_| parse_error(line, format!("invalid index {field:?}")))
}

/// Reads a score file; indices must run `0..n` in order.
pub fn read_scores<R: BufRead>(reader: R) -> Result<Vec<ScoredEvent>> {
    let mut out = Vec::new();
    for (i, text) in reader.lines().enumerate() {
        let text = text?;
        let line = i + 1;
        let fields: Vec<&str> = text.trim_end_matches('\r').split('\t').collect();
        let [index, ts, u, b] = fields[..] else {
            return Err(parse_error(line, "expected 4 tab-separated fields"));
        };
        let index = parse_index(index, line)?;
        if index != i {
            return Err(parse_error(
                line,
                format!("expected index {i}, found {index}"),
            ));
        }
        out.push(ScoredEvent {
            index: index as u64,
            timestamp: parse_f64(ts, "timestamp", line)?,
            score_u: parse_f64(u, "score", line)?,
            score_b: parse_f64(b, "score", line)?,
        });
    }
    Ok(out)
}

/// Reads `(index, label)` pairs; indices must be unique.
pub fn read_labels<R: BufRead>(reader: R) -> Result<Vec<(usize, bool)>> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, text) in reader.lines().enumerate() {
        let text = text?;
        let line = i + 1;
        let Some((index, label)) = text.trim_end_matches('\r').split_once('\t') else {
            return Err(parse_error(line, "expected <index><TAB><0|1>"));
        };
        let index = parse_index(index, line)?;
        let label = match label {
            "0" => false,
            "1" => true,
            other => {
                return Err(parse_error(
                    line,
                    format!("label must be 0 or 1, got {other:?}"),
                ))
            }
        };
        if !seen.insert(index) {
            return Err(parse_error(line, format!("duplicate index {index}")));
        }
        out.push((index, label));
    }
    Ok(out)
}

pub fn write_labels<W, I>(mut w: W, labels: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = (usize, bool)>,
{
    for (index, label) in labels {
        writeln!(w, "{index}\t{}", u8::from(label))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a labeled stream as a stream file plus a label file covering every
/// event.
pub fn write_labeled<W1: Write, W2: Write>(
    stream: W1,
    labels: W2,
    events: &[LabeledEvent],
) -> Result<()> {
    write_stream(stream, events.iter().map(|e| &e.event))?;
    write_labels(
        labels,
        events.iter().enumerate().map(|(i, e)| (i, e.anomalous)),
    )
}

/// Expands sparse labels to one flag per event; unlisted events are normal.
pub fn dense_labels(labels: &[(usize, bool)], len: usize) -> Result<Vec<bool>> {
    let mut out = vec![false; len];
    for &(index, label) in labels {
        let slot = out
            .get_mut(index)
            .ok_or(Error::UnknownIndex { index, len })?;
        *slot = label;
    }
    Ok(out)
}

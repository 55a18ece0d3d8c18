//! Ranked heavy-hitter reports and their JSON-lines form.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::keyspace::Key;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Shp,
    MaxCount,
    BoyerMoore,
    MaxStable,
    Exact,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Shp,
        Algorithm::MaxCount,
        Algorithm::BoyerMoore,
        Algorithm::MaxStable,
        Algorithm::Exact,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Shp => "shp",
            Algorithm::MaxCount => "maxcount",
            Algorithm::BoyerMoore => "boyermoore",
            Algorithm::MaxStable => "maxstable",
            Algorithm::Exact => "exact",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?} (expected shp, maxcount, boyermoore, maxstable or exact)"))
    }
}

/// What a magnitude counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Bytes,
    Packets,
    Occurrences,
    /// Distinct set elements.
    Distinct,
}

/// The element type of a set-valued signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Dst,
    Dport,
    Ttl,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportEntry {
    pub key: Key,
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeavyHitterReport {
    pub algorithm: Algorithm,
    pub window: u64,
    /// Set when the sketch saw no mass; entries are then placeholders.
    pub zero_signal: bool,
    /// Set when the state came from a heuristic (non-exact) merge.
    pub approximate: bool,
    pub entries: Vec<ReportEntry>,
}

impl HeavyHitterReport {
    pub fn new(algorithm: Algorithm, entries: Vec<ReportEntry>) -> Self {
        Self {
            algorithm,
            window: 0,
            zero_signal: false,
            approximate: false,
            entries,
        }
    }

    pub fn with_window(mut self, window: u64) -> Self {
        self.window = window;
        self
    }

    pub fn keys(&self) -> impl Iterator<Item = Key> + '_ {
        self.entries.iter().map(|e| e.key)
    }

    pub fn top(&self) -> Option<&ReportEntry> {
        self.entries.first()
    }

    /// One JSON object per entry.
    pub fn json_lines(&self, unit: Unit, element: Option<ElementKind>) -> Vec<String> {
        self.json_lines_with(unit, element, |_| None)
    }

    /// As [`json_lines`](Self::json_lines), attaching `src->dst` for keys that `pair_of` resolves.
    pub fn json_lines_with<F>(
        &self,
        unit: Unit,
        element: Option<ElementKind>,
        pair_of: F,
    ) -> Vec<String>
    where
        F: Fn(Key) -> Option<(Key, Key)>,
    {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let line = JsonLine {
                    window: self.window,
                    algo: self.algorithm,
                    rank: i + 1,
                    key: e.key.to_string(),
                    key_u32: e.key.value(),
                    estimate: e.estimate,
                    unit,
                    element,
                    zero_signal: self.zero_signal,
                    approximate: self.approximate,
                    pair: pair_of(e.key).map(|(src, dst)| format!("{src}->{dst}")),
                };
                serde_json::to_string(&line).expect("report line serializes")
            })
            .collect()
    }

    pub fn write_json_lines<W: Write>(
        &self,
        out: &mut W,
        unit: Unit,
        element: Option<ElementKind>,
    ) -> std::io::Result<()> {
        for line in self.json_lines(unit, element) {
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Serialized form of one report row.
#[derive(Debug, Serialize)]
pub struct JsonLine {
    pub window: u64,
    pub algo: Algorithm,
    pub rank: usize,
    pub key: String,
    pub key_u32: u32,
    pub estimate: f64,
    pub unit: Unit,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub element: Option<ElementKind>,
    pub zero_signal: bool,
    pub approximate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<String>,
}

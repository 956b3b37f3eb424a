use std::collections::HashMap;
use std::fmt::Write as _;

use super::IngestError;

/// Token counts for a single year.
///
/// Construction checks that every count is positive and that the total
/// matches the sum of the counts, so a `FrequencyTable` in hand is always
/// consistent. Tables are immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyTable {
    year: i32,
    counts: HashMap<String, u64>,
    total_tokens: u64,
}

impl FrequencyTable {
    pub fn new(year: i32, counts: HashMap<String, u64>) -> Result<Self, IngestError> {
        let mut total: u64 = 0;
        for (token, &count) in &counts {
            if count == 0 {
                return Err(IngestError::InvalidTable(format!(
                    "token {token:?} has zero count"
                )));
            }
            if token.is_empty() {
                return Err(IngestError::InvalidTable("empty token".into()));
            }
            total = total
                .checked_add(count)
                .ok_or_else(|| IngestError::InvalidTable("token total overflows u64".into()))?;
        }
        Ok(Self {
            year,
            counts,
            total_tokens: total,
        })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn counts(&self) -> &HashMap<String, u64> {
        &self.counts
    }

    pub fn count(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    /// Text length L: the total number of tokens.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Vocabulary size N: the number of distinct tokens.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Entries sorted by descending count, ties broken by ascending byte order.
    pub fn sorted_entries(&self) -> Vec<(&str, u64)> {
        let mut entries: Vec<(&str, u64)> =
            self.counts.iter().map(|(t, &c)| (t.as_str(), c)).collect();
        entries.sort_unstable_by(|a, b| {
            b.1.cmp(&a.1)
                .then_with(|| a.0.as_bytes().cmp(b.0.as_bytes()))
        });
        entries
    }

    /// Adds all counts of `other` into `self`. Years must match.
    pub fn merge(&mut self, other: FrequencyTable) -> Result<(), IngestError> {
        if other.year != self.year {
            return Err(IngestError::InvalidTable(format!(
                "cannot merge year {} into year {}",
                other.year, self.year
            )));
        }
        for (token, count) in other.counts {
            *self.counts.entry(token).or_insert(0) += count;
        }
        self.total_tokens += other.total_tokens;
        Ok(())
    }

    /// Serializes the table in the snapshot TSV format:
    ///
    /// ```text
    /// #year=<year>\tL=<total>
    /// <token>\t<count>
    /// ...
    /// ```
    ///
    /// Rows are ordered as in [`FrequencyTable::sorted_entries`], so the output
    /// is byte-for-byte deterministic.
    pub fn write_snapshot(&self) -> String {
        let mut out = String::with_capacity(16 * (self.counts.len() + 1));
        let _ = writeln!(out, "#year={}\tL={}", self.year, self.total_tokens);
        for (token, count) in self.sorted_entries() {
            let _ = writeln!(out, "{token}\t{count}");
        }
        out
    }

    pub fn read_snapshot(text: &str) -> Result<Self, IngestError> {
        let corrupt = |msg: String| IngestError::CorruptSnapshot(msg);
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| corrupt("missing header".into()))?;
        let (year, declared_total) = parse_snapshot_header(header)?;

        let mut counts = HashMap::new();
        for (idx, line) in lines.enumerate() {
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.is_empty() {
                continue;
            }
            let (token, count) = line
                .split_once('\t')
                .ok_or_else(|| corrupt(format!("row {}: expected token<TAB>count", idx + 2)))?;
            let count: u64 = count
                .parse()
                .map_err(|_| corrupt(format!("row {}: bad count {count:?}", idx + 2)))?;
            if counts.insert(token.to_owned(), count).is_some() {
                return Err(corrupt(format!(
                    "row {}: duplicate token {token:?}",
                    idx + 2
                )));
            }
        }
        let table = Self::new(year, counts).map_err(|e| corrupt(e.to_string()))?;
        if table.total_tokens != declared_total {
            return Err(corrupt(format!(
                "header declares L={declared_total} but counts sum to {}",
                table.total_tokens
            )));
        }
        Ok(table)
    }
}

/// Parses `#year=<y>\tL=<total>`.
pub(crate) fn parse_snapshot_header(header: &str) -> Result<(i32, u64), IngestError> {
    let header = header.strip_suffix('\r').unwrap_or(header);
    let bad = || IngestError::CorruptSnapshot(format!("bad header {header:?}"));
    let rest = header.strip_prefix("#year=").ok_or_else(bad)?;
    let (year, total) = rest.split_once('\t').ok_or_else(bad)?;
    let total = total.strip_prefix("L=").ok_or_else(bad)?;
    Ok((
        year.parse().map_err(|_| bad())?,
        total.parse().map_err(|_| bad())?,
    ))
}

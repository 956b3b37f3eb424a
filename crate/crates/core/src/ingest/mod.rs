//! Google Books Ngram v2 1-gram ingestion.
//!
//! Raw lines are `token\tyear\tmatch_count\tvolume_count`. Tokens are
//! normalized with a [`FilterConfig`] and their match counts are summed per
//! year into [`FrequencyTable`]s.

mod filter;
mod table;
mod totalcounts;

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use flate2::read::MultiGzDecoder;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use filter::{normalize_token, Alphabet, FilterConfig};
pub use table::FrequencyTable;
pub use totalcounts::{TotalCounts, YearTotals};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: malformed ngram record: {reason}")]
    MalformedLine { line: u64, reason: String },
    #[error("malformed totalcounts record {0}")]
    MalformedRecord(String),
    #[error("corrupt snapshot: {0}")]
    CorruptSnapshot(String),
    #[error("invalid frequency table: {0}")]
    InvalidTable(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenRecord {
    pub token: String,
    pub year: i32,
    pub match_count: u64,
    pub volume_count: u64,
}

/// Outcome of parsing one line that is not an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParsedLine {
    Record(TokenRecord),
    Skip,
}

/// Parses one line of a 1-gram file. A trailing `\r` is ignored.
///
/// `line_no` is only used for error reporting.
pub fn parse_ngram_line(line: &str, line_no: u64) -> Result<ParsedLine, IngestError> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    if line.trim().is_empty() {
        return Ok(ParsedLine::Skip);
    }
    let malformed = |reason: String| IngestError::MalformedLine {
        line: line_no,
        reason,
    };
    let mut fields = line.split('\t');
    let (Some(token), Some(year), Some(matches), Some(volumes), None) = (
        fields.next(),
        fields.next(),
        fields.next(),
        fields.next(),
        fields.next(),
    ) else {
        return Err(malformed(format!(
            "expected 4 tab-separated fields, found {}",
            line.split('\t').count()
        )));
    };
    if token.is_empty() {
        return Err(malformed("empty token".into()));
    }
    let year: i32 = year
        .parse()
        .map_err(|_| malformed(format!("bad year {year:?}")))?;
    let match_count: u64 = matches
        .parse()
        .map_err(|_| malformed(format!("bad match_count {matches:?}")))?;
    let volume_count: u64 = volumes
        .parse()
        .map_err(|_| malformed(format!("bad volume_count {volumes:?}")))?;
    if volume_count == 0 || match_count < volume_count {
        return Err(malformed(format!(
            "need match_count >= volume_count >= 1, got {match_count} and {volume_count}"
        )));
    }
    Ok(ParsedLine::Record(TokenRecord {
        token: token.to_owned(),
        year,
        match_count,
        volume_count,
    }))
}

/// Counters describing one ingestion run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub lines_read: u64,
    pub blank: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub malformed: u64,
    /// Sum of `match_count` over accepted records.
    pub accepted_tokens: u64,
    /// First few malformed-line messages, for diagnostics.
    pub malformed_examples: Vec<String>,
}

const MAX_MALFORMED_EXAMPLES: usize = 10;

impl IngestReport {
    fn absorb(&mut self, other: IngestReport) {
        self.lines_read += other.lines_read;
        self.blank += other.blank;
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.malformed += other.malformed;
        self.accepted_tokens += other.accepted_tokens;
        for msg in other.malformed_examples {
            if self.malformed_examples.len() < MAX_MALFORMED_EXAMPLES {
                self.malformed_examples.push(msg);
            }
        }
    }
}

/// Per-year count accumulator. Accumulation is commutative, so shards may be
/// built independently and merged in any order.
#[derive(Debug, Default)]
pub struct YearTableBuilder {
    years: BTreeMap<i32, HashMap<String, u64>>,
    report: IngestReport,
    cfg: FilterConfig,
    strict: bool,
}

impl YearTableBuilder {
    /// `strict` makes the first malformed line an error; otherwise malformed
    /// lines are skipped and counted.
    pub fn new(cfg: FilterConfig, strict: bool) -> Self {
        Self {
            cfg,
            strict,
            ..Self::default()
        }
    }

    /// Adds a parsed record, returning whether it passed the filter.
    pub fn add_record(&mut self, record: &TokenRecord) -> bool {
        match normalize_token(&record.token, &self.cfg) {
            Some(token) => {
                *self
                    .years
                    .entry(record.year)
                    .or_default()
                    .entry(token)
                    .or_insert(0) += record.match_count;
                self.report.accepted += 1;
                self.report.accepted_tokens += record.match_count;
                true
            }
            None => {
                self.report.rejected += 1;
                false
            }
        }
    }

    pub fn add_line(&mut self, line: &str, line_no: u64) -> Result<(), IngestError> {
        self.report.lines_read += 1;
        match parse_ngram_line(line, line_no) {
            Ok(ParsedLine::Record(record)) => {
                self.add_record(&record);
            }
            Ok(ParsedLine::Skip) => self.report.blank += 1,
            Err(err) if self.strict => return Err(err),
            Err(err) => {
                self.report.malformed += 1;
                if self.report.malformed_examples.len() < MAX_MALFORMED_EXAMPLES {
                    self.report.malformed_examples.push(err.to_string());
                }
            }
        }
        Ok(())
    }

    pub fn add_reader<R: BufRead>(&mut self, mut reader: R) -> Result<(), IngestError> {
        let mut buf = Vec::with_capacity(256);
        let mut line_no = 0u64;
        loop {
            buf.clear();
            let n = reader
                .read_until(b'\n', &mut buf)
                .map_err(|source| IngestError::Io {
                    path: PathBuf::from("<input>"),
                    source,
                })?;
            if n == 0 {
                break;
            }
            line_no += 1;
            if buf.last() == Some(&b'\n') {
                buf.pop();
            }
            match std::str::from_utf8(&buf) {
                Ok(line) => self.add_line(line, line_no)?,
                Err(_) => {
                    self.report.lines_read += 1;
                    let err = IngestError::MalformedLine {
                        line: line_no,
                        reason: "invalid UTF-8".into(),
                    };
                    if self.strict {
                        return Err(err);
                    }
                    self.report.malformed += 1;
                    if self.report.malformed_examples.len() < MAX_MALFORMED_EXAMPLES {
                        self.report.malformed_examples.push(err.to_string());
                    }
                }
            }
        }
        Ok(())
    }

    pub fn merge(&mut self, other: YearTableBuilder) {
        for (year, counts) in other.years {
            let mine = self.years.entry(year).or_default();
            for (token, count) in counts {
                *mine.entry(token).or_insert(0) += count;
            }
        }
        self.report.absorb(other.report);
    }

    pub fn report(&self) -> &IngestReport {
        &self.report
    }

    pub fn finish(self) -> Result<(BTreeMap<i32, FrequencyTable>, IngestReport), IngestError> {
        let tables = self
            .years
            .into_iter()
            .map(|(year, counts)| Ok((year, FrequencyTable::new(year, counts)?)))
            .collect::<Result<_, IngestError>>()?;
        Ok((tables, self.report))
    }
}

/// Builds one table per year from already-parsed records.
pub fn build_year_tables<'a, I>(records: I, cfg: &FilterConfig) -> BTreeMap<i32, FrequencyTable>
where
    I: IntoIterator<Item = &'a TokenRecord>,
{
    let mut builder = YearTableBuilder::new(cfg.clone(), false);
    for record in records {
        builder.add_record(record);
    }
    builder
        .finish()
        .expect("counts built from accepted records are positive")
        .0
}

/// Opens a file for line reading, transparently decompressing gzip input
/// (detected by its magic bytes).
pub fn open_input(path: &Path) -> Result<Box<dyn BufRead + Send>, IngestError> {
    let io_err = |source| IngestError::Io {
        path: path.to_owned(),
        source,
    };
    let mut reader = BufReader::with_capacity(1 << 16, File::open(path).map_err(io_err)?);
    let is_gzip = reader
        .fill_buf()
        .map_err(io_err)?
        .starts_with(&[0x1f, 0x8b]);
    if is_gzip {
        Ok(Box::new(BufReader::with_capacity(
            1 << 16,
            MultiGzDecoder::new(reader),
        )))
    } else {
        Ok(Box::new(reader))
    }
}

/// Reads a whole file (gzip or plain) into a string.
pub fn read_to_string(path: &Path) -> Result<String, IngestError> {
    let mut text = String::new();
    open_input(path)?
        .read_to_string(&mut text)
        .map_err(|source| IngestError::Io {
            path: path.to_owned(),
            source,
        })?;
    Ok(text)
}

/// Ingests several 1-gram files in parallel, one shard per file.
pub fn ingest_files(
    paths: &[PathBuf],
    cfg: &FilterConfig,
    strict: bool,
) -> Result<(BTreeMap<i32, FrequencyTable>, IngestReport), IngestError> {
    let shards = paths
        .par_iter()
        .map(|path| {
            let mut builder = YearTableBuilder::new(cfg.clone(), strict);
            builder
                .add_reader(open_input(path)?)
                .map_err(|err| match err {
                    IngestError::Io { source, .. } => IngestError::Io {
                        path: path.clone(),
                        source,
                    },
                    other => other,
                })?;
            Ok(builder)
        })
        .collect::<Result<Vec<_>, IngestError>>()?;
    let mut merged = YearTableBuilder::new(cfg.clone(), strict);
    for shard in shards {
        merged.merge(shard);
    }
    merged.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(token: &str, year: i32, count: u64) -> TokenRecord {
        TokenRecord {
            token: token.into(),
            year,
            match_count: count,
            volume_count: 1,
        }
    }

    #[test]
    fn parses_record() {
        assert_eq!(
            parse_ngram_line("dog\t2000\t15\t7", 1).unwrap(),
            ParsedLine::Record(TokenRecord {
                token: "dog".into(),
                year: 2000,
                match_count: 15,
                volume_count: 7
            })
        );
        assert_eq!(
            parse_ngram_line("dog\t2000\t15\t7\r", 1).unwrap(),
            parse_ngram_line("dog\t2000\t15\t7", 1).unwrap()
        );
    }

    #[test]
    fn blank_line_is_skipped() {
        assert_eq!(parse_ngram_line("", 3).unwrap(), ParsedLine::Skip);
        assert_eq!(parse_ngram_line("\r", 3).unwrap(), ParsedLine::Skip);
    }

    #[test]
    fn malformed_lines_report_line_number() {
        for line in [
            "dog\t2000\tfifteen\t7",
            "dog\t2000\t15",
            "dog\t2000\t15\t7\t1",
            "dog\tyear\t15\t7",
            "\t2000\t15\t7",
            "dog\t2000\t3\t7",
            "dog\t2000\t0\t0",
        ] {
            match parse_ngram_line(line, 42) {
                Err(IngestError::MalformedLine { line: 42, .. }) => {}
                other => panic!("{line:?} -> {other:?}"),
            }
        }
    }

    #[test]
    fn case_fold_merges_counts() {
        let recs = [rec("Dog", 2000, 3), rec("dog", 2000, 2)];
        let tables = build_year_tables(&recs, &FilterConfig::default());
        assert_eq!(tables.len(), 1);
        let t = &tables[&2000];
        assert_eq!(t.count("dog"), 5);
        assert_eq!(t.total_tokens(), 5);
        assert_eq!(t.distinct(), 1);
    }

    #[test]
    fn partitions_by_year() {
        let recs = [rec("dog", 2000, 3), rec("dog", 2001, 2)];
        let tables = build_year_tables(&recs, &FilterConfig::default());
        assert_eq!(tables[&2000].total_tokens(), 3);
        assert_eq!(tables[&2001].total_tokens(), 2);
    }

    #[test]
    fn rejected_tokens_contribute_nothing() {
        let recs = [
            rec("dog", 2000, 3),
            rec("dog_NOUN", 2000, 50),
            rec("d0g", 2000, 7),
        ];
        let tables = build_year_tables(&recs, &FilterConfig::default());
        assert_eq!(tables[&2000].total_tokens(), 3);
        assert_eq!(tables[&2000].distinct(), 1);
    }

    #[test]
    fn strict_mode_aborts_on_malformed() {
        let input = "a\t2000\t1\t1\nbad line\nb\t2000\t1\t1\n";
        let mut lenient = YearTableBuilder::new(FilterConfig::default(), false);
        lenient.add_reader(input.as_bytes()).unwrap();
        assert_eq!(lenient.report().malformed, 1);
        assert_eq!(lenient.report().accepted, 2);

        let mut strict = YearTableBuilder::new(FilterConfig::default(), true);
        let err = strict.add_reader(input.as_bytes()).unwrap_err();
        assert!(
            matches!(err, IngestError::MalformedLine { line: 2, .. }),
            "{err}"
        );
    }

    #[test]
    fn invalid_utf8_is_malformed() {
        let input: &[u8] = b"a\t2000\t1\t1\n\xff\xfe\t2000\t1\t1\n";
        let mut b = YearTableBuilder::new(FilterConfig::default(), false);
        b.add_reader(input).unwrap();
        assert_eq!(b.report().malformed, 1);
        assert_eq!(b.report().lines_read, 2);
    }

    #[test]
    fn shard_merge_is_order_independent() {
        let lines = [
            "a\t2000\t1\t1",
            "b\t2000\t2\t1",
            "A\t2000\t3\t1",
            "a\t2001\t4\t1",
        ];
        let shard = |ls: &[&str]| {
            let mut b = YearTableBuilder::new(FilterConfig::default(), false);
            for (i, l) in ls.iter().enumerate() {
                b.add_line(l, i as u64 + 1).unwrap();
            }
            b
        };
        let mut x = shard(&lines[..2]);
        x.merge(shard(&lines[2..]));
        let mut y = shard(&lines[2..]);
        y.merge(shard(&lines[..2]));
        assert_eq!(x.finish().unwrap(), y.finish().unwrap());
    }
}

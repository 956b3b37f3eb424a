//! Loading snapshots, point files and probability sources; parsing range flags.

use std::path::{Path, PathBuf};

use lexgrowth::ingest::read_to_string;
use lexgrowth::model::zipf_probs;
use lexgrowth::{FilterConfig, FrequencyTable, FunctionWordList, ProbabilityVector, RankFrequency};

use crate::error::CliError;

/// Inclusive `A:B` range of years.
pub fn parse_years(s: &str) -> Result<(i32, i32), String> {
    let (a, b) = s.split_once(':').ok_or("expected A:B")?;
    let a: i32 = a.trim().parse().map_err(|_| format!("bad year {a:?}"))?;
    let b: i32 = b.trim().parse().map_err(|_| format!("bad year {b:?}"))?;
    if a > b {
        return Err(format!("empty year range {a}:{b}"));
    }
    Ok((a, b))
}

/// Inclusive `LO:HI` rank range.
pub fn parse_ranks(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or("expected LO:HI")?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad rank {a:?}"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad rank {b:?}"))?;
    if a < 1 || a >= b {
        return Err(format!("rank range {a}:{b} needs 1 <= LO < HI"));
    }
    Ok((a, b))
}

/// `1eA:1eB` length range, returned as decades `(A, B)`.
pub fn parse_lrange(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected 1eA:1eB")?;
    let decade = |v: &str| -> Result<f64, String> {
        let x: f64 = v.trim().parse().map_err(|_| format!("bad length {v:?}"))?;
        if x > 0.0 && x.is_finite() {
            Ok(x.log10())
        } else {
            Err(format!("length {v} must be positive"))
        }
    };
    let (lo, hi) = (decade(a)?, decade(b)?);
    if lo > hi {
        return Err(format!("empty length range {s}"));
    }
    Ok((lo, hi))
}

/// Snapshot files named by `paths`; directories contribute their `*.tsv`
/// files in name order.
fn snapshot_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(path)
                .map_err(|e| CliError::io(path, e))?
                .map(|entry| entry.map(|e| e.path()))
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::io(path, e))?;
            found.retain(|p| p.extension().is_some_and(|e| e == "tsv"));
            found.sort();
            files.extend(found);
        } else {
            files.push(path.clone());
        }
    }
    Ok(files)
}

pub fn load_snapshot(path: &Path) -> Result<FrequencyTable, CliError> {
    let text = read_to_string(path)?;
    FrequencyTable::read_snapshot(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Loads snapshots, keeping those inside `years`. Two snapshots for the same
/// year are an error.
pub fn load_snapshots(
    paths: &[PathBuf],
    years: Option<(i32, i32)>,
) -> Result<Vec<FrequencyTable>, CliError> {
    let mut tables: Vec<FrequencyTable> = Vec::new();
    for path in snapshot_files(paths)? {
        let table = load_snapshot(&path)?;
        if years.is_some_and(|(lo, hi)| !(lo..=hi).contains(&table.year())) {
            continue;
        }
        if tables.iter().any(|t| t.year() == table.year()) {
            return Err(CliError::Data(format!(
                "{}: second snapshot for year {}",
                path.display(),
                table.year()
            )));
        }
        tables.push(table);
    }
    tables.sort_by_key(FrequencyTable::year);
    Ok(tables)
}

pub fn load_fwlist(path: &Path, cfg: &FilterConfig) -> Result<FunctionWordList, CliError> {
    let text = read_to_string(path)?;
    FunctionWordList::parse(&text, cfg)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn is_snapshot(text: &str) -> bool {
    text.starts_with("#year=")
}

/// Rank-frequency data from a snapshot or a `rank\tcount` file.
pub fn load_ranks(path: &Path) -> Result<RankFrequency, CliError> {
    let text = read_to_string(path)?;
    let data = |e: String| CliError::Data(format!("{}: {e}", path.display()));
    if is_snapshot(&text) {
        let table = FrequencyTable::read_snapshot(&text).map_err(|e| data(e.to_string()))?;
        RankFrequency::from_table(&table).map_err(|e| data(e.to_string()))
    } else {
        RankFrequency::parse_tsv(&text).map_err(|e| data(e.to_string()))
    }
}

/// `(x, y)` points from a CSV with `L` and `N` columns (as written by
/// `growth`), or from the first two columns when there is no header.
/// `#` lines are skipped.
pub fn load_points(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let text = read_to_string(path)?;
    let data = |msg: String| CliError::Data(format!("{}: {msg}", path.display()));
    let mut columns = (0, 1);
    let mut points = Vec::new();
    let mut first = true;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if std::mem::take(&mut first) && fields.iter().any(|f| f.parse::<f64>().is_err()) {
            let find = |name: &str| fields.iter().position(|f| *f == name);
            columns = find("L")
                .zip(find("N"))
                .ok_or_else(|| data("header must name columns L and N".into()))?;
            continue;
        }
        let get = |i: usize| -> Result<f64, CliError> {
            fields
                .get(i)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| data(format!("line {}: bad row {line:?}", idx + 1)))
        };
        points.push((get(columns.0)?, get(columns.1)?));
    }
    Ok(points)
}

/// Where a probability vector comes from.
pub enum ProbSource<'a> {
    Tsv(&'a Path),
    Snapshot(&'a Path),
    Zipf { beta: f64, words: u64 },
}

pub fn load_probs(source: &ProbSource<'_>) -> Result<ProbabilityVector, CliError> {
    match *source {
        ProbSource::Tsv(path) => {
            let text = read_to_string(path)?;
            ProbabilityVector::parse_tsv(&text)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
        }
        ProbSource::Snapshot(path) => Ok(ProbabilityVector::from_table(&load_snapshot(path)?)?),
        ProbSource::Zipf { beta, words } => Ok(zipf_probs(beta, words)?),
    }
}

use std::io::Write;
use std::path::{Path, PathBuf};

use flate2::write::GzEncoder;
use flate2::Compression;
use lexgrowth::ingest::{
    ingest_files, normalize_token, parse_ngram_line, FilterConfig, FrequencyTable, IngestError,
    ParsedLine,
};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn golden(year: i32) -> String {
    std::fs::read_to_string(fixture(&format!("golden/{year}.tsv"))).unwrap()
}

#[test]
fn fixture_matches_golden_snapshots() {
    let (tables, report) = ingest_files(
        &[fixture("sample_1gram.tsv")],
        &FilterConfig::default(),
        false,
    )
    .unwrap();
    assert_eq!(tables.len(), 3);
    for (year, table) in &tables {
        assert_eq!(table.write_snapshot(), golden(*year), "year {year}");
    }
    assert_eq!(report.lines_read, 20);
    assert_eq!(report.blank, 1);
    assert_eq!(report.malformed, 1);
    assert_eq!(report.accepted, 13);
    assert_eq!(report.rejected, 5);
    assert_eq!(report.accepted_tokens, 60);
    assert_eq!(report.malformed_examples.len(), 1);
}

#[test]
fn gzip_input_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let gz = dir.path().join("sample.gz");
    let mut enc = GzEncoder::new(Vec::new(), Compression::default());
    enc.write_all(&std::fs::read(fixture("sample_1gram.tsv")).unwrap())
        .unwrap();
    std::fs::write(&gz, enc.finish().unwrap()).unwrap();

    let plain = ingest_files(
        &[fixture("sample_1gram.tsv")],
        &FilterConfig::default(),
        false,
    )
    .unwrap();
    let packed = ingest_files(&[gz], &FilterConfig::default(), false).unwrap();
    assert_eq!(plain.0, packed.0);
    assert_eq!(plain.1.accepted_tokens, packed.1.accepted_tokens);
}

#[test]
fn split_files_merge_to_the_same_tables() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("sample_1gram.tsv")).unwrap();
    let lines: Vec<&str> = text.split_inclusive('\n').collect();
    let (a, b) = lines.split_at(7);
    let (pa, pb) = (dir.path().join("a.tsv"), dir.path().join("b.tsv"));
    std::fs::write(&pa, a.concat()).unwrap();
    std::fs::write(&pb, b.concat()).unwrap();

    let whole = ingest_files(
        &[fixture("sample_1gram.tsv")],
        &FilterConfig::default(),
        false,
    )
    .unwrap();
    let parts = ingest_files(&[pa, pb], &FilterConfig::default(), false).unwrap();
    assert_eq!(whole.0, parts.0);
    assert_eq!(
        (
            whole.1.accepted,
            whole.1.rejected,
            whole.1.malformed,
            whole.1.blank
        ),
        (
            parts.1.accepted,
            parts.1.rejected,
            parts.1.malformed,
            parts.1.blank
        )
    );
}

#[test]
fn strict_mode_stops_at_malformed_line() {
    let err = ingest_files(
        &[fixture("sample_1gram.tsv")],
        &FilterConfig::default(),
        true,
    )
    .unwrap_err();
    assert!(
        matches!(err, IngestError::MalformedLine { line: 12, .. }),
        "{err:?}"
    );
}

#[test]
fn missing_file_is_an_io_error() {
    let err = ingest_files(
        &[fixture("no_such_file.tsv")],
        &FilterConfig::default(),
        false,
    )
    .unwrap_err();
    assert!(matches!(err, IngestError::Io { .. }));
}

#[test]
fn conservation_and_rejections() {
    let cfg = FilterConfig::default();
    let text = std::fs::read_to_string(fixture("sample_1gram.tsv")).unwrap();
    let mut accepted_tokens = 0;
    let mut rejected = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Ok(ParsedLine::Record(rec)) = parse_ngram_line(line, i as u64 + 1) {
            match normalize_token(&rec.token, &cfg) {
                Some(_) => accepted_tokens += rec.match_count,
                None => rejected.push(rec.token),
            }
        }
    }
    let (tables, _) = ingest_files(&[fixture("sample_1gram.tsv")], &cfg, false).unwrap();
    let total: u64 = tables.values().map(FrequencyTable::total_tokens).sum();
    assert_eq!(total, accepted_tokens);
    for table in tables.values() {
        assert!(table.distinct() as u64 <= table.total_tokens());
        for token in &rejected {
            assert_eq!(
                table.count(token),
                0,
                "{token} leaked into {}",
                table.year()
            );
        }
    }
}

#[test]
fn ascii_strict_drops_accented_words() {
    let cfg = FilterConfig::default().ascii_strict();
    let (tables, _) = ingest_files(&[fixture("sample_1gram.tsv")], &cfg, false).unwrap();
    assert_eq!(tables[&2000].count("naïve"), 0);
    assert_eq!(tables[&2001].count("über"), 0);
    assert_eq!(tables[&2000].count("the"), 24);
}

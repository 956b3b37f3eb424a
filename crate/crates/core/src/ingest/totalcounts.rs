use std::collections::BTreeMap;

use super::IngestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YearTotals {
    pub match_count: u64,
    pub page_count: u64,
    pub volume_count: u64,
}

/// Per-year corpus totals from a `totalcounts` file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TotalCounts(BTreeMap<i32, YearTotals>);

impl TotalCounts {
    /// Parses whitespace-separated `year,match_count,page_count,volume_count`
    /// records. A year may appear only once.
    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let mut map = BTreeMap::new();
        for record in text.split_whitespace() {
            let bad = |why: &str| IngestError::MalformedRecord(format!("{record:?}: {why}"));
            let fields: Vec<&str> = record.split(',').collect();
            let [year, matches, pages, volumes] = fields[..] else {
                return Err(bad("expected 4 comma-separated fields"));
            };
            let year: i32 = year.parse().map_err(|_| bad("bad year"))?;
            let num = |s: &str| s.parse::<u64>().map_err(|_| bad("bad count"));
            let totals = YearTotals {
                match_count: num(matches)?,
                page_count: num(pages)?,
                volume_count: num(volumes)?,
            };
            if map.insert(year, totals).is_some() {
                return Err(bad("duplicate year"));
            }
        }
        Ok(Self(map))
    }

    pub fn get(&self, year: i32) -> Option<&YearTotals> {
        self.0.get(&year)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, &YearTotals)> {
        self.0.iter().map(|(&y, t)| (y, t))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

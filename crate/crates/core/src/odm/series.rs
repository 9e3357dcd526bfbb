use std::cmp::Ordering;
use std::io::{Read, Write};

use chrono::NaiveDate;

use super::region::{RegionId, RegionRegistry};
use crate::dates::{parse_date, DayInterval};
use crate::error::{Error, Result};

/// One cell of a daily origin-destination matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OdmRecord {
    pub date: NaiveDate,
    pub origin: RegionId,
    pub destination: RegionId,
    /// Movements; fractional after operator-side extrapolation.
    pub count: f64,
}

impl OdmRecord {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.date
            .cmp(&other.date)
            .then_with(|| self.origin.cmp(&other.origin))
            .then_with(|| self.destination.cmp(&other.destination))
    }
}

/// Daily ODM records sorted by (date, origin, destination), one per key.
#[derive(Debug, Clone, PartialEq)]
pub struct OdmSeries {
    records: Vec<OdmRecord>,
    date_range: DayInterval,
}

impl OdmSeries {
    /// Builds a series from arbitrary-order records. Duplicated keys, negative
    /// counts and records outside `date_range` are rejected.
    pub fn new(mut records: Vec<OdmRecord>, date_range: DayInterval) -> Result<Self> {
        records.sort_by(OdmRecord::key_cmp);
        for (i, r) in records.iter().enumerate() {
            if !(r.count >= 0.0) {
                return Err(Error::NegativeCount { line: 0, count: r.count });
            }
            if !date_range.contains(r.date) {
                return Err(Error::PeriodOutOfRange {
                    period: r.date.to_string(),
                    range: date_range.to_string(),
                });
            }
            if i > 0 && records[i - 1].key_cmp(r) == Ordering::Equal {
                return Err(duplicate(0, r));
            }
        }
        Ok(Self { records, date_range })
    }

    /// Builds a series whose range spans the observed dates. Fails on an empty input.
    pub fn from_records(records: Vec<OdmRecord>) -> Result<Self> {
        let start = records.iter().map(|r| r.date).min();
        let end = records.iter().map(|r| r.date).max();
        match (start, end) {
            (Some(s), Some(e)) => Self::new(records, DayInterval { start: s, end: e }),
            _ => Err(Error::InsufficientData("ODM series has no records".into())),
        }
    }

    pub fn records(&self) -> &[OdmRecord] {
        &self.records
    }

    pub fn date_range(&self) -> DayInterval {
        self.date_range
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total_count(&self) -> f64 {
        self.records.iter().map(|r| r.count).sum()
    }

    /// Records whose date lies in `period`. Relies on date-major ordering.
    pub fn records_in(&self, period: DayInterval) -> &[OdmRecord] {
        let lo = self.records.partition_point(|r| r.date < period.start);
        let hi = self.records.partition_point(|r| r.date <= period.end);
        &self.records[lo..hi]
    }
}

fn duplicate(line: u64, r: &OdmRecord) -> Error {
    Error::DuplicateRecord {
        line,
        date: r.date.to_string(),
        origin: r.origin.to_string(),
        destination: r.destination.to_string(),
    }
}

/// Parses the `date,origin,destination,count` CSV format against `registry`.
pub fn parse_odm<R: Read>(reader: R, registry: &RegionRegistry) -> Result<OdmSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(["date", "origin", "destination", "count"]) {
        return Err(Error::Parse {
            line: 1,
            message: "expected header `date,origin,destination,count`".into(),
        });
    }

    let mut records = Vec::new();
    let mut lines = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::Parse { line, message: e.to_string() }
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if row.len() != 4 {
            return Err(Error::Parse {
                line,
                message: format!("expected 4 fields, found {}", row.len()),
            });
        }
        let date = parse_date(&row[0]).ok_or_else(|| Error::Parse {
            line,
            message: format!("invalid date `{}`", &row[0]),
        })?;
        let origin = registry
            .resolve(&row[1])
            .ok_or_else(|| Error::UnknownRegion { line, id: row[1].to_string() })?
            .clone();
        let destination = registry
            .resolve(&row[2])
            .ok_or_else(|| Error::UnknownRegion { line, id: row[2].to_string() })?
            .clone();
        let count: f64 = row[3].parse().map_err(|_| Error::Parse {
            line,
            message: format!("invalid count `{}`", &row[3]),
        })?;
        if count < 0.0 {
            return Err(Error::NegativeCount { line, count });
        }
        if !count.is_finite() {
            return Err(Error::Parse { line, message: format!("non-finite count `{}`", &row[3]) });
        }
        records.push(OdmRecord { date, origin, destination, count });
        lines.push(line);
    }

    // Sort a permutation so duplicate errors can still name their source line.
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| records[a].key_cmp(&records[b]).then(lines[a].cmp(&lines[b])));
    for w in order.windows(2) {
        if records[w[0]].key_cmp(&records[w[1]]) == Ordering::Equal {
            return Err(duplicate(lines[w[1]], &records[w[1]]));
        }
    }
    OdmSeries::from_records(records)
}

/// Writes the series in the ODM CSV format, sorted by key. Counts use the
/// shortest representation that parses back to the same value.
pub fn write_odm<W: Write>(series: &OdmSeries, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "origin", "destination", "count"])?;
    for r in series.records() {
        w.write_record([
            r.date.to_string().as_str(),
            &r.origin,
            &r.destination,
            r.count.to_string().as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Drops every record with `count < k`. The date range is kept.
pub fn apply_anonymity_threshold(series: &OdmSeries, k: f64) -> Result<OdmSeries> {
    if !(k >= 0.0) {
        return Err(Error::Config(format!("anonymity threshold must be >= 0, got {k}")));
    }
    Ok(OdmSeries {
        records: series.records.iter().filter(|r| r.count >= k).cloned().collect(),
        date_range: series.date_range,
    })
}

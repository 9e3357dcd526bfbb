//! Small CSV formats around the core types: long-form per-region series
//! (`date,region,value`), single series (`date,value`), per-region values
//! (`region,value`) and serology counts (`region,positives,tested`).

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use chrono::NaiveDate;

use crate::dates::parse_date;
use crate::error::{Error, Result};

pub type DatedValues = Vec<(NaiveDate, f64)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SerologyCount {
    pub positives: u64,
    pub tested: u64,
}

struct Rows<R: Read> {
    rdr: csv::Reader<R>,
}

impl<R: Read> Rows<R> {
    fn open(reader: R, header: &[&str]) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        if rdr.headers()?.iter().ne(header.iter().copied()) {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `{}`", header.join(",")),
            });
        }
        Ok(Self { rdr })
    }

    /// Visits every data row with its line number.
    fn for_each(mut self, width: usize, mut f: impl FnMut(u64, &csv::StringRecord) -> Result<()>) -> Result<()> {
        for row in self.rdr.records() {
            let row = row.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let line = row.position().map_or(0, |p| p.line());
            if row.len() != width {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {width} fields, found {}", row.len()),
                });
            }
            f(line, &row)?;
        }
        Ok(())
    }
}

fn date_field(line: u64, s: &str) -> Result<NaiveDate> {
    parse_date(s).ok_or_else(|| Error::Parse { line, message: format!("invalid date `{s}`") })
}

fn float_field(line: u64, s: &str) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse { line, message: format!("invalid number `{s}`") }),
    }
}

fn count_field(line: u64, s: &str) -> Result<u64> {
    s.parse().map_err(|_| Error::Parse { line, message: format!("invalid count `{s}`") })
}

fn duplicate(line: u64, what: String) -> Error {
    Error::Parse { line, message: format!("duplicate entry for {what}") }
}

/// Reads `date,region,value` into per-region series sorted by date.
pub fn read_region_series<R: Read>(reader: R) -> Result<BTreeMap<String, DatedValues>> {
    let mut seen = BTreeSet::new();
    let mut out: BTreeMap<String, DatedValues> = BTreeMap::new();
    Rows::open(reader, &["date", "region", "value"])?.for_each(3, |line, row| {
        let date = date_field(line, &row[0])?;
        let value = float_field(line, &row[2])?;
        if !seen.insert((row[1].to_string(), date)) {
            return Err(duplicate(line, format!("({}, {date})", &row[1])));
        }
        out.entry(row[1].to_string()).or_default().push((date, value));
        Ok(())
    })?;
    for v in out.values_mut() {
        v.sort_by_key(|p| p.0);
    }
    Ok(out)
}

/// Writes per-region series as `date,region,value`, ordered by date then region.
pub fn write_region_series<W: Write>(series: &BTreeMap<String, DatedValues>, writer: W) -> Result<()> {
    let mut rows: Vec<(NaiveDate, &str, f64)> = series
        .iter()
        .flat_map(|(r, pts)| pts.iter().map(move |&(d, v)| (d, r.as_str(), v)))
        .collect();
    rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "region", "value"])?;
    for (d, r, v) in rows {
        w.write_record([d.to_string().as_str(), r, v.to_string().as_str()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `date,value`, sorted by date.
pub fn read_dated_series<R: Read>(reader: R) -> Result<DatedValues> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    Rows::open(reader, &["date", "value"])?.for_each(2, |line, row| {
        let date = date_field(line, &row[0])?;
        if !seen.insert(date) {
            return Err(duplicate(line, date.to_string()));
        }
        out.push((date, float_field(line, &row[1])?));
        Ok(())
    })?;
    out.sort_by_key(|p| p.0);
    Ok(out)
}

pub fn write_dated_series<W: Write>(series: &[(NaiveDate, f64)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "value"])?;
    for (d, v) in series {
        w.write_record([d.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `region,value`.
pub fn read_region_values<R: Read>(reader: R) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    Rows::open(reader, &["region", "value"])?.for_each(2, |line, row| {
        let v = float_field(line, &row[1])?;
        if out.insert(row[0].to_string(), v).is_some() {
            return Err(duplicate(line, row[0].to_string()));
        }
        Ok(())
    })?;
    Ok(out)
}

pub fn write_region_values<W: Write>(values: &BTreeMap<String, f64>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["region", "value"])?;
    for (r, v) in values {
        w.write_record([r.as_str(), v.to_string().as_str()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `region,positives,tested`; positives may not exceed tested.
pub fn read_serology<R: Read>(reader: R) -> Result<BTreeMap<String, SerologyCount>> {
    let mut out = BTreeMap::new();
    Rows::open(reader, &["region", "positives", "tested"])?.for_each(3, |line, row| {
        let c = SerologyCount {
            positives: count_field(line, &row[1])?,
            tested: count_field(line, &row[2])?,
        };
        if c.positives > c.tested {
            return Err(Error::Parse {
                line,
                message: format!("{} positives out of {} tested", c.positives, c.tested),
            });
        }
        if out.insert(row[0].to_string(), c).is_some() {
            return Err(duplicate(line, row[0].to_string()));
        }
        Ok(())
    })?;
    Ok(out)
}

pub fn write_serology<W: Write>(counts: &BTreeMap<String, SerologyCount>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["region", "positives", "tested"])?;
    for (r, c) in counts {
        w.write_record([r.clone(), c.positives.to_string(), c.tested.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;
use std::sync::Arc;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::region::{RegionId, RegionRegistry};
use super::series::{OdmRecord, OdmSeries};
use crate::dates::DayInterval;
use crate::error::{Error, Result};

/// Assignment of fine regions to coarse groups.
#[derive(Debug, Clone)]
pub struct Partition {
    group_of: HashMap<RegionId, usize>,
    groups: Vec<String>,
}

impl Partition {
    /// Groups taken from each region's `group_id`.
    pub fn from_registry(registry: &RegionRegistry) -> Self {
        Self::from_pairs(
            registry
                .regions()
                .iter()
                .map(|r| (r.id.clone(), r.group_id.clone())),
        )
    }

    /// Every region is its own group.
    pub fn identity(registry: &RegionRegistry) -> Self {
        Self::from_pairs(registry.ids().iter().map(|id| (id.to_string(), id.to_string())))
    }

    pub fn from_pairs<I, A, B>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let pairs: Vec<(String, String)> = pairs.into_iter().map(|(a, b)| (a.into(), b.into())).collect();
        let groups: Vec<String> = pairs
            .iter()
            .map(|(_, g)| g.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: HashMap<&str, usize> = groups.iter().enumerate().map(|(i, g)| (g.as_str(), i)).collect();
        let group_of = pairs
            .iter()
            .map(|(r, g)| (Arc::from(r.as_str()), index[g.as_str()]))
            .collect();
        Self { group_of, groups }
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn group_index(&self, region: &str) -> Option<usize> {
        self.group_of.get(region).copied()
    }

    /// Applies the block sum to every day, yielding a daily series indexed by group.
    /// Regions absent from the partition are dropped.
    pub fn coarsen_series(&self, series: &OdmSeries) -> Result<OdmSeries> {
        let ids: Vec<RegionId> = self.groups.iter().map(|g| Arc::from(g.as_str())).collect();
        let mut cells: BTreeMap<(NaiveDate, usize, usize), f64> = BTreeMap::new();
        for r in series.records() {
            if let (Some(a), Some(b)) = (self.group_index(&r.origin), self.group_index(&r.destination)) {
                *cells.entry((r.date, a, b)).or_insert(0.0) += r.count;
            }
        }
        let records = cells
            .into_iter()
            .map(|((date, a, b), count)| OdmRecord {
                date,
                origin: ids[a].clone(),
                destination: ids[b].clone(),
                count,
            })
            .collect();
        OdmSeries::new(records, series.date_range())
    }
}

/// Period-averaged flows between coarse groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityMatrix {
    pub period_start: NaiveDate,
    pub period_end: NaiveDate,
    pub groups: Vec<String>,
    /// Row-major, origin group by destination group.
    pub values: Vec<f64>,
    /// Days with data that the sums were divided by.
    pub averaged_days: usize,
}

impl ConnectivityMatrix {
    pub fn period(&self) -> DayInterval {
        DayInterval {
            start: self.period_start,
            end: self.period_end,
        }
    }

    pub fn dim(&self) -> usize {
        self.groups.len()
    }

    pub fn get(&self, origin: usize, destination: usize) -> f64 {
        self.values[origin * self.dim() + destination]
    }

    pub fn group_index(&self, group: &str) -> Option<usize> {
        self.groups.iter().position(|g| g == group)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Outbound row of `origin` keyed by destination group.
    pub fn row(&self, origin: &str) -> Option<BTreeMap<String, f64>> {
        let i = self.group_index(origin)?;
        Some(
            self.groups
                .iter()
                .enumerate()
                .map(|(j, g)| (g.clone(), self.get(i, j)))
                .collect(),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: ConnectivityMatrix = serde_json::from_str(s)?;
        if m.values.len() != m.groups.len() * m.groups.len() {
            return Err(Error::Config("connectivity values are not a square matrix".into()));
        }
        Ok(m)
    }

    /// Long-form `origin,destination,value` CSV.
    pub fn write_long_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["origin", "destination", "value"])?;
        for (i, a) in self.groups.iter().enumerate() {
            for (j, b) in self.groups.iter().enumerate() {
                w.write_record([a.as_str(), b.as_str(), self.get(i, j).to_string().as_str()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Block-sums daily flows over `partition` and averages them over the days of
/// `period` that carry data. Cells without records count as zero.
pub fn aggregate_connectivity(
    series: &OdmSeries,
    period: DayInterval,
    partition: &Partition,
) -> Result<ConnectivityMatrix> {
    if !period.is_within(&series.date_range()) {
        return Err(Error::PeriodOutOfRange {
            period: period.to_string(),
            range: series.date_range().to_string(),
        });
    }
    let n = partition.groups().len();
    let mut values = vec![0.0; n * n];
    let mut days = BTreeSet::new();
    // records are sorted by (date, origin, destination), fixing each cell's summation order
    for r in series.records_in(period) {
        days.insert(r.date);
        if let (Some(a), Some(b)) = (partition.group_index(&r.origin), partition.group_index(&r.destination)) {
            values[a * n + b] += r.count;
        }
    }
    let averaged_days = days.len();
    if averaged_days > 0 {
        let d = averaged_days as f64;
        values.iter_mut().for_each(|v| *v /= d);
    }
    Ok(ConnectivityMatrix {
        period_start: period.start,
        period_end: period.end,
        groups: partition.groups().to_vec(),
        values,
        averaged_days,
    })
}

/// Diagonal of a connectivity matrix: flows that stay inside each group.
pub fn internal_mobility(matrix: &ConnectivityMatrix) -> BTreeMap<String, f64> {
    matrix
        .groups
        .iter()
        .enumerate()
        .map(|(i, g)| (g.clone(), matrix.get(i, i)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InternalMobilitySeries {
    pub periods: Vec<DayInterval>,
    pub values: BTreeMap<String, Vec<f64>>,
}

/// Stacks the diagonals of consecutive matrices in chronological order. Groups
/// missing from a matrix contribute zero for that period.
pub fn internal_mobility_series(matrices: &[ConnectivityMatrix]) -> InternalMobilitySeries {
    let mut sorted: Vec<&ConnectivityMatrix> = matrices.iter().collect();
    sorted.sort_by_key(|m| m.period());
    let groups: BTreeSet<&String> = sorted.iter().flat_map(|m| m.groups.iter()).collect();
    let mut values: BTreeMap<String, Vec<f64>> =
        groups.iter().map(|g| ((*g).clone(), Vec::with_capacity(sorted.len()))).collect();
    for m in &sorted {
        let diag = internal_mobility(m);
        for (g, v) in values.iter_mut() {
            v.push(diag.get(g).copied().unwrap_or(0.0));
        }
    }
    InternalMobilitySeries {
        periods: sorted.iter().map(|m| m.period()).collect(),
        values,
    }
}

/// Daily diagonal flow per group over every date that carries records.
pub fn daily_internal_mobility(
    series: &OdmSeries,
    partition: &Partition,
) -> BTreeMap<String, Vec<(NaiveDate, f64)>> {
    let n = partition.groups().len();
    let mut out: Vec<Vec<(NaiveDate, f64)>> = vec![Vec::new(); n];
    let records = series.records();
    let mut i = 0;
    while i < records.len() {
        let date = records[i].date;
        let mut diag = vec![0.0; n];
        while i < records.len() && records[i].date == date {
            let r = &records[i];
            if let (Some(a), Some(b)) = (partition.group_index(&r.origin), partition.group_index(&r.destination)) {
                if a == b {
                    diag[a] += r.count;
                }
            }
            i += 1;
        }
        for (g, v) in diag.into_iter().enumerate() {
            out[g].push((date, v));
        }
    }
    partition.groups().iter().cloned().zip(out).collect()
}

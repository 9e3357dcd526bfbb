use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean Earth radius used for great-circle distances.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

pub type RegionId = Arc<str>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub id: String,
    pub name: String,
    pub lat: f64,
    pub lon: f64,
    pub population: f64,
    /// Coarse unit this region aggregates into.
    pub group_id: String,
}

impl Region {
    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.lat) {
            return Err(Error::InvalidRegion(format!("{}: latitude {} out of range", self.id, self.lat)));
        }
        if !(-180.0..=180.0).contains(&self.lon) {
            return Err(Error::InvalidRegion(format!("{}: longitude {} out of range", self.id, self.lon)));
        }
        if !(self.population >= 0.0) {
            return Err(Error::InvalidRegion(format!("{}: negative population", self.id)));
        }
        if self.id.is_empty() || self.group_id.is_empty() {
            return Err(Error::InvalidRegion("empty id or group_id".into()));
        }
        Ok(())
    }
}

/// Great-circle distance in kilometres between two region centroids (haversine).
pub fn region_distance(a: &Region, b: &Region) -> f64 {
    haversine_km(a.lat, a.lon, b.lat, b.lon)
}

pub(crate) fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().atan2((1.0 - h).max(0.0).sqrt())
}

/// Registry of fine regions, keyed by id, in insertion order.
#[derive(Debug, Clone, Default)]
pub struct RegionRegistry {
    regions: Vec<Region>,
    ids: Vec<RegionId>,
    index: HashMap<RegionId, usize>,
}

impl PartialEq for RegionRegistry {
    fn eq(&self, other: &Self) -> bool {
        self.regions == other.regions
    }
}

#[derive(Deserialize)]
struct RegionRow {
    id: String,
    name: String,
    lat: f64,
    lon: f64,
    population: f64,
    group_id: String,
}

impl RegionRegistry {
    pub fn new(regions: Vec<Region>) -> Result<Self> {
        let mut reg = RegionRegistry::default();
        for r in regions {
            reg.push(r)?;
        }
        Ok(reg)
    }

    fn push(&mut self, region: Region) -> Result<()> {
        region.validate()?;
        let id: RegionId = Arc::from(region.id.as_str());
        if self.index.contains_key(&id) {
            return Err(Error::InvalidRegion(format!("duplicate region id `{}`", region.id)));
        }
        self.index.insert(id.clone(), self.regions.len());
        self.ids.push(id);
        self.regions.push(region);
        Ok(())
    }

    /// Reads the `id,name,lat,lon,population,group_id` CSV format.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let expected = ["id", "name", "lat", "lon", "population", "group_id"];
        if headers.iter().ne(expected.iter().copied()) {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `{}`", expected.join(",")),
            });
        }
        let mut reg = RegionRegistry::default();
        for row in rdr.records() {
            let row = row?;
            let line = row.position().map(|p| p.line()).unwrap_or(0);
            let r: RegionRow = row
                .deserialize(Some(&headers))
                .map_err(|e| Error::Parse { line, message: e.to_string() })?;
            reg.push(Region {
                id: r.id,
                name: r.name,
                lat: r.lat,
                lon: r.lon,
                population: r.population,
                group_id: r.group_id,
            })
            .map_err(|e| Error::Parse { line, message: e.to_string() })?;
        }
        Ok(reg)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["id", "name", "lat", "lon", "population", "group_id"])?;
        for r in &self.regions {
            w.write_record([
                r.id.clone(),
                r.name.clone(),
                r.lat.to_string(),
                r.lon.to_string(),
                r.population.to_string(),
                r.group_id.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn ids(&self) -> &[RegionId] {
        &self.ids
    }

    pub fn get(&self, id: &str) -> Option<&Region> {
        self.index.get(id).map(|&i| &self.regions[i])
    }

    /// Shared handle for `id`, so records do not each own a copy of the string.
    pub fn resolve(&self, id: &str) -> Option<&RegionId> {
        self.index.get(id).map(|&i| &self.ids[i])
    }

    /// Sorted distinct coarse-unit ids.
    pub fn groups(&self) -> Vec<String> {
        self.regions
            .iter()
            .map(|r| r.group_id.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Distance from `from` to every region, keyed by region id.
    pub fn distances_from(&self, from: &str) -> Option<HashMap<String, f64>> {
        let origin = self.get(from)?;
        Some(
            self.regions
                .iter()
                .map(|r| (r.id.clone(), region_distance(origin, r)))
                .collect(),
        )
    }

    /// Population-weighted centroid (lat, lon) of every group. Adequate for
    /// groups spanning a few degrees at most.
    pub fn group_centroids(&self) -> BTreeMap<String, (f64, f64)> {
        let mut acc: BTreeMap<String, (f64, f64, f64)> = BTreeMap::new();
        for r in &self.regions {
            let e = acc.entry(r.group_id.clone()).or_default();
            let w = r.population.max(f64::MIN_POSITIVE);
            e.0 += w * r.lat;
            e.1 += w * r.lon;
            e.2 += w;
        }
        acc.into_iter().map(|(g, (la, lo, w))| (g, (la / w, lo / w))).collect()
    }

    /// Distance from the centroid of group `from` to every group centroid.
    pub fn group_distances_from(&self, from: &str) -> Option<BTreeMap<String, f64>> {
        let c = self.group_centroids();
        let &(lat, lon) = c.get(from)?;
        Some(c.iter().map(|(g, &(la, lo))| (g.clone(), haversine_km(lat, lon, la, lo))).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn at(lat: f64, lon: f64) -> Region {
        Region {
            id: "x".into(),
            name: "x".into(),
            lat,
            lon,
            population: 1.0,
            group_id: "g".into(),
        }
    }

    #[test]
    fn identical_points_are_zero_apart() {
        assert_eq!(region_distance(&at(48.0, 7.3), &at(48.0, 7.3)), 0.0);
    }

    #[test]
    fn antipodal_on_equator() {
        let d = region_distance(&at(0.0, 0.0), &at(0.0, 180.0));
        assert!((d - std::f64::consts::PI * EARTH_RADIUS_KM).abs() < 1e-6);
        assert!((d - 20015.1).abs() < 0.1);
    }

    #[test]
    fn alsace_pair_matches_hand_haversine() {
        // Independent recomputation in degrees -> radians with the textbook formula.
        let (la1, lo1, la2, lo2) = (48.0f64, 7.3f64, 48.5f64, 7.5f64);
        let r = 6371.0088f64;
        let rad = std::f64::consts::PI / 180.0;
        let a = ((la2 - la1) * rad / 2.0).sin().powi(2)
            + (la1 * rad).cos() * (la2 * rad).cos() * ((lo2 - lo1) * rad / 2.0).sin().powi(2);
        let expected = 2.0 * r * a.sqrt().asin();
        let got = region_distance(&at(la1, lo1), &at(la2, lo2));
        assert!(((got - expected) / expected).abs() < 1e-6);
        assert!(got > 50.0 && got < 60.0);
    }

    #[test]
    fn group_centroids_weight_by_population() {
        let mk = |id: &str, lat: f64, pop: f64, g: &str| Region {
            id: id.into(),
            name: id.into(),
            lat,
            lon: 0.0,
            population: pop,
            group_id: g.into(),
        };
        let reg = RegionRegistry::new(vec![mk("a", 40.0, 1.0, "g"), mk("b", 44.0, 3.0, "g"), mk("c", 50.0, 5.0, "h")]).unwrap();
        let c = reg.group_centroids();
        assert!((c["g"].0 - 43.0).abs() < 1e-12);
        let d = reg.group_distances_from("h").unwrap();
        assert_eq!(d["h"], 0.0);
        assert!((d["g"] - haversine_km(50.0, 0.0, 43.0, 0.0)).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_coordinates() {
        assert!(at(91.0, 0.0).validate().is_err());
        assert!(at(0.0, -181.0).validate().is_err());
    }

    #[test]
    fn registry_rejects_duplicate_ids() {
        let r = at(1.0, 1.0);
        assert!(RegionRegistry::new(vec![r.clone(), r]).is_err());
    }

    #[test]
    fn registry_csv_round_trip() {
        let csv = "id,name,lat,lon,population,group_id\na1,A one,48.1,7.2,1000,A\nb1,B one,47.5,7.0,250.5,B\n";
        let reg = RegionRegistry::from_csv(csv.as_bytes()).unwrap();
        assert_eq!(reg.len(), 2);
        assert_eq!(reg.groups(), vec!["A".to_string(), "B".to_string()]);
        let mut out = Vec::new();
        reg.write_csv(&mut out).unwrap();
        let again = RegionRegistry::from_csv(out.as_slice()).unwrap();
        assert_eq!(again.regions(), reg.regions());
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(
            a in (-89.0f64..89.0, -179.0f64..179.0),
            b in (-89.0f64..89.0, -179.0f64..179.0),
            c in (-89.0f64..89.0, -179.0f64..179.0),
        ) {
            let (ra, rb, rc) = (at(a.0, a.1), at(b.0, b.1), at(c.0, c.1));
            let ab = region_distance(&ra, &rb);
            prop_assert!((ab - region_distance(&rb, &ra)).abs() < 1e-9);
            prop_assert!(ab <= region_distance(&ra, &rc) + region_distance(&rc, &rb) + 1e-9);
            prop_assert!(ab >= 0.0);
        }
    }
}

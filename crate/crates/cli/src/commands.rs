use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use moblag_core::dates::parse_date;
use moblag_core::io::{
    read_dated_series, read_region_series, write_region_series, write_serology, DatedValues, SerologyCount,
};
use moblag_core::leadlag::{
    estimate_lag, lag_quality_flags, normalize_cumdeaths, normalize_mobility_reduction, ContrastMode, IrregularSeries,
    LagConfig, LagQualityConfig,
};
use moblag_core::netgraph::{build_network, detect_communities, NetworkConfig};
use moblag_core::odm::{
    aggregate_connectivity, apply_anonymity_threshold, parse_odm, write_odm, ConnectivityMatrix, Partition,
    RegionRegistry,
};
use moblag_core::regress::{
    fit_model, select_cut, sweep_correlation_over_weeks, sweep_fit_over_dates, sweep_fit_over_weeks,
    write_correlation_csv, write_sweep_csv, CorrelationMethod, ModelKind, RegionValues, RegressionDataset,
    ResponseTransform,
};
use moblag_core::synthgen::{generate, ScenarioConfig};
use moblag_core::DayInterval;

use crate::args::{
    split_list, ConnectivityArgs, LagArgs, LeadlagArgs, NetworkArgs, RegressArgs, SweepArgs, SynthArgs,
};
use crate::error::{CliError, CliResult, WithPath};
use crate::run::Run;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn date_arg(s: &str) -> CliResult<NaiveDate> {
    parse_date(s).ok_or_else(|| usage(format!("invalid date `{s}`, expected YYYY-MM-DD")))
}

fn interval_arg(s: &str) -> CliResult<DayInterval> {
    match s.split_once("..") {
        Some((a, b)) => DayInterval::new(date_arg(a.trim())?, date_arg(b.trim())?)
            .ok_or_else(|| usage(format!("empty interval `{s}`"))),
        None => Ok(DayInterval::week(date_arg(s)?)),
    }
}

fn parse_arg<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e| usage(format!("{what}: {e}")))
}

fn json_bytes(text: String) -> Vec<u8> {
    let mut b = text.into_bytes();
    b.push(b'\n');
    b
}

fn pretty<T: serde::Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let text = serde_json::to_string_pretty(value).map_err(moblag_core::Error::from)?;
    Ok(json_bytes(text))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> moblag_core::Result<()>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn load_regions(run: &mut Run, path: &Path) -> CliResult<RegionRegistry> {
    let bytes = run.read(path)?;
    RegionRegistry::from_csv(bytes.as_slice()).at(path)
}

fn load_connectivity(run: &mut Run, path: &Path) -> CliResult<ConnectivityMatrix> {
    let text = run.read_string(path)?;
    ConnectivityMatrix::from_json(&text).at(path)
}

fn load_region_series(run: &mut Run, path: &Path) -> CliResult<BTreeMap<String, DatedValues>> {
    let bytes = run.read(path)?;
    read_region_series(bytes.as_slice()).at(path)
}

fn values_on(series: &BTreeMap<String, DatedValues>, date: NaiveDate) -> RegionValues {
    series
        .iter()
        .filter_map(|(r, pts)| {
            let k = pts.binary_search_by_key(&date, |p| p.0).ok()?;
            Some((r.clone(), pts[k].1))
        })
        .collect()
}

fn seed_mobility(m: &ConnectivityMatrix, seed: &str, path: &Path) -> CliResult<RegionValues> {
    m.row(seed)
        .ok_or_else(|| usage(format!("{}: seed region `{seed}` is not in the matrix", path.display())))
}

fn seed_distances(regions: &RegionRegistry, seed: &str) -> CliResult<RegionValues> {
    regions
        .group_distances_from(seed)
        .ok_or_else(|| usage(format!("seed region `{seed}` is not a group of the region table")))
}

fn model_kinds(s: &str) -> CliResult<Vec<ModelKind>> {
    let kinds = split_list(s)
        .iter()
        .map(|k| parse_arg::<ModelKind>(k, "model"))
        .collect::<CliResult<Vec<_>>>()?;
    if kinds.is_empty() {
        return Err(usage("no model kinds given"));
    }
    Ok(kinds)
}

pub fn connectivity(run: &mut Run, a: &ConnectivityArgs) -> CliResult<()> {
    let period = interval_arg(&a.week)?;
    let regions = load_regions(run, &a.regions)?;
    let bytes = run.read(&a.odm)?;
    let odm = parse_odm(bytes.as_slice(), &regions).at(&a.odm)?;
    let kept = apply_anonymity_threshold(&odm, a.threshold)?;
    let matrix = aggregate_connectivity(&kept, period, &Partition::from_registry(&regions)).at(&a.odm)?;
    run.note("records_read", odm.len());
    run.note("records_below_threshold", odm.len() - kept.len());
    run.note("averaged_days", matrix.averaged_days);
    run.write("connectivity.json", &json_bytes(matrix.to_json()?))?;
    run.write("connectivity.csv", &csv_bytes(|b| matrix.write_long_csv(b))?)?;
    Ok(())
}

pub fn regress(run: &mut Run, a: &RegressArgs) -> CliResult<()> {
    let date = date_arg(&a.date)?;
    let kind: ModelKind = parse_arg(&a.model, "model")?;
    let transform: ResponseTransform = parse_arg(&a.transform, "transform")?;
    let matrix = load_connectivity(run, &a.connectivity)?;
    let deaths = load_region_series(run, &a.deaths)?;
    let regions = load_regions(run, &a.regions)?;

    let mobility = seed_mobility(&matrix, &a.seed_region, &a.connectivity)?;
    let response = values_on(&deaths, date);
    if response.is_empty() {
        return Err(usage(format!("{}: no values on {date}", a.deaths.display())));
    }
    let distances = seed_distances(&regions, &a.seed_region)?;
    let mut ds = RegressionDataset::from_maps(&a.seed_region, &mobility, &response, &distances).with_transform(transform);
    ds.response_date = Some(date);
    ds.mobility_period = Some(matrix.period());
    run.note("rows_joined", ds.rows.len());
    if a.cut {
        let cut = select_cut(&ds)?;
        run.note("rows_removed_by_cut", ds.rows.len() - cut.rows.len());
        ds = cut;
    }
    let fit = fit_model(&ds, kind)?;
    run.write("fit.json", &pretty(&fit)?)?;
    Ok(())
}

pub fn sweep(run: &mut Run, a: &SweepArgs) -> CliResult<()> {
    let kinds = model_kinds(&a.models)?;
    let transform: ResponseTransform = parse_arg(&a.transform, "transform")?;
    let files = split_list(&a.connectivity);
    if files.is_empty() {
        return Err(usage("no connectivity file given"));
    }
    let matrices = files
        .iter()
        .map(|f| load_connectivity(run, Path::new(f)).map(|m| (f.clone(), m)))
        .collect::<CliResult<Vec<_>>>()?;
    let deaths = load_region_series(run, &a.deaths)?;
    let regions = load_regions(run, &a.regions)?;
    let distances = seed_distances(&regions, &a.seed_region)?;

    let records = if a.mobility_weeks {
        let date = date_arg(a.date.as_deref().expect("clap requires --date"))?;
        let response = values_on(&deaths, date);
        let weekly = matrices
            .iter()
            .map(|(f, m)| Ok((m.period(), seed_mobility(m, &a.seed_region, Path::new(f))?)))
            .collect::<CliResult<Vec<_>>>()?;
        if let Some(methods) = &a.correlation {
            let methods = split_list(methods)
                .iter()
                .map(|m| parse_arg::<CorrelationMethod>(m, "correlation"))
                .collect::<CliResult<Vec<_>>>()?;
            let corr = sweep_correlation_over_weeks(&response, &weekly, &distances, &methods);
            run.write("correlation.csv", &csv_bytes(|b| write_correlation_csv(&corr, b))?)?;
        }
        sweep_fit_over_weeks(&a.seed_region, &weekly, &response, Some(date), &distances, &kinds, transform)
    } else {
        if a.correlation.is_some() {
            return Err(usage("--correlation needs --mobility-weeks"));
        }
        let range = interval_arg(
            a.dates
                .as_deref()
                .ok_or_else(|| usage("give either --dates or --mobility-weeks"))?,
        )?;
        let (f, m) = &matrices[0];
        let mobility = seed_mobility(m, &a.seed_region, Path::new(f))?;
        let dates: Vec<NaiveDate> = deaths
            .values()
            .flat_map(|pts| pts.iter().map(|p| p.0))
            .filter(|d| range.contains(*d))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let responses: BTreeMap<NaiveDate, RegionValues> = dates.iter().map(|&d| (d, values_on(&deaths, d))).collect();
        sweep_fit_over_dates(&a.seed_region, &responses, &mobility, Some(m.period()), &distances, &dates, &kinds, transform)
    };
    run.note("fits", records.iter().filter(|r| r.r_squared().is_some()).count());
    run.note("skipped", records.iter().filter(|r| r.r_squared().is_none()).count());
    run.write("sweep.csv", &csv_bytes(|b| write_sweep_csv(&records, b))?)?;
    Ok(())
}

fn lag_configs(a: &LagArgs) -> CliResult<(LagConfig, LagQualityConfig)> {
    let mode: ContrastMode = parse_arg(&a.mode, "mode")?;
    let lag = LagConfig {
        delta: a.delta,
        step: a.step,
        mode,
        min_overlap: a.min_overlap,
    };
    lag.grid()?;
    let quality = LagQualityConfig {
        max_lag_days: a.max_lag_days,
        min_overlap: a.flag_min_overlap,
        flat_iqr_floor: a.flat_iqr_floor,
    };
    Ok((lag, quality))
}

fn load_dated(run: &mut Run, path: &Path) -> CliResult<IrregularSeries> {
    let bytes = run.read(path)?;
    let points = read_dated_series(bytes.as_slice()).at(path)?;
    IrregularSeries::from_dated(&points).at(path)
}

pub fn leadlag(run: &mut Run, a: &LeadlagArgs) -> CliResult<()> {
    let (lag, quality) = lag_configs(&a.lag)?;
    let mobility = load_dated(run, &a.mobility)?;
    let deaths = load_dated(run, &a.deaths)?;
    let leader = normalize_mobility_reduction(&mobility).at(&a.mobility)?;
    let lagger = normalize_cumdeaths(&deaths).at(&a.deaths)?;
    let mut est = estimate_lag(&leader, &lagger, &lag)?;
    est.flags = lag_quality_flags(&est, &quality);
    run.write("leadlag.json", &json_bytes(est.to_json()?))?;
    Ok(())
}

pub fn network(run: &mut Run, a: &NetworkArgs, seed: u64) -> CliResult<()> {
    let (lag, quality) = lag_configs(&a.lag)?;
    let mut load = |name: &str| -> CliResult<(BTreeMap<String, IrregularSeries>, Vec<String>)> {
        let path = a.input_dir.join(name);
        let raw = load_region_series(run, &path)?;
        let mut ok = BTreeMap::new();
        let mut bad = Vec::new();
        for (region, pts) in raw {
            match IrregularSeries::from_dated(&pts) {
                Ok(s) => {
                    ok.insert(region, s);
                }
                Err(_) => bad.push(region),
            }
        }
        Ok((ok, bad))
    };
    let (mobility, bad_m) = load("internal_mobility.csv")?;
    let (deaths, bad_d) = load("cumdeaths.csv")?;
    let net = build_network(&mobility, &deaths, &NetworkConfig { lag, quality })?;
    let net = detect_communities(&net, seed);
    run.note("invalid_mobility_series", bad_m);
    run.note("invalid_death_series", bad_d);
    run.note("excluded_regions", net.excluded.len());
    run.write("network.json", &json_bytes(net.to_json()?))?;
    let mut edges = Vec::new();
    net.write_edge_list(&mut edges)?;
    run.write("network.txt", &edges)?;
    Ok(())
}

pub fn synth(run: &mut Run, a: &SynthArgs, seed: Option<u64>) -> CliResult<ScenarioConfig> {
    let fields = serde_json::to_value(a).map_err(moblag_core::Error::from)?;
    let mut overrides: Vec<(String, String)> = fields
        .as_object()
        .expect("struct serializes to an object")
        .iter()
        .filter_map(|(k, v)| v.as_str().map(|s| (k.clone(), s.to_string())))
        .collect();
    if let Some(s) = seed {
        overrides.push(("rng_seed".into(), s.to_string()));
    }
    let cfg = ScenarioConfig::default().with_overrides(overrides.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
    cfg.validate()?;
    let scenario = generate(&cfg)?;
    let epi = &scenario.epidemic;

    let as_series = |m: &BTreeMap<String, Vec<f64>>| -> BTreeMap<String, DatedValues> {
        m.iter()
            .map(|(g, v)| (g.clone(), epi.dates.iter().copied().zip(v.iter().copied()).collect()))
            .collect()
    };
    let serology: BTreeMap<String, SerologyCount> = epi
        .truth
        .regions
        .iter()
        .map(|(g, t)| (g.clone(), SerologyCount { positives: t.igg_positives, tested: t.igg_tested }))
        .collect();

    run.write("scenario.json", &pretty(&cfg)?)?;
    run.write("regions.csv", &csv_bytes(|b| scenario.registry.write_csv(b))?)?;
    run.write("odm.csv", &csv_bytes(|b| write_odm(&scenario.odm, b))?)?;
    run.write(
        "internal_mobility.csv",
        &csv_bytes(|b| write_region_series(&as_series(&epi.internal_mobility), b))?,
    )?;
    run.write("cumdeaths.csv", &csv_bytes(|b| write_region_series(&as_series(&epi.cumdeaths), b))?)?;
    run.write("igg.csv", &csv_bytes(|b| write_serology(&serology, b))?)?;
    run.write("ground_truth.json", &pretty(&epi.truth)?)?;
    run.note("odm_records", scenario.odm.len());
    Ok(cfg)
}

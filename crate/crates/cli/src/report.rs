use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use moblag_core::leadlag::LagEstimate;
use moblag_core::netgraph::LeadLagNetwork;
use moblag_core::regress::read_sweep_csv;

use crate::args::{split_list, ReportArgs};
use crate::error::{CliResult, WithPath};
use crate::run::Run;

/// One row of the long-form report table.
#[derive(Debug, Clone, PartialEq)]
struct Row {
    panel: &'static str,
    series: String,
    x: String,
    y: f64,
}

#[derive(Default)]
struct Collected {
    /// series -> (date, r²), in date order
    r_squared: BTreeMap<String, Vec<(chrono::NaiveDate, f64)>>,
    /// series -> (theta, contrast)
    contrast: BTreeMap<String, Vec<(f64, f64)>>,
    /// lag -> count, over every lag estimate and network edge
    lags: BTreeMap<i64, usize>,
    rows: Vec<Row>,
}

fn stem(path: &str) -> String {
    let p = Path::new(path);
    let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    match p.parent().and_then(|d| d.file_name()) {
        Some(dir) => format!("{}/{}", dir.to_string_lossy(), name),
        None => name,
    }
}

fn collect(run: &mut Run, a: &ReportArgs) -> CliResult<Collected> {
    let mut c = Collected::default();
    for f in a.sweep.as_deref().map(split_list).unwrap_or_default() {
        let bytes = run.read(Path::new(&f))?;
        let points = read_sweep_csv(bytes.as_slice()).at(Path::new(&f))?;
        for p in points {
            if let Some(r2) = p.r_squared {
                c.r_squared.entry(format!("{}:{}", stem(&f), p.kind)).or_default().push((p.date, r2));
            }
        }
    }
    for (series, pts) in c.r_squared.iter_mut() {
        pts.sort_by_key(|p| p.0);
        for (d, r2) in pts.iter() {
            c.rows.push(Row { panel: "r_squared", series: series.clone(), x: d.to_string(), y: *r2 });
        }
        // first maximum in date order
        if let Some((d, r2)) = pts.iter().fold(None::<(chrono::NaiveDate, f64)>, |best, &(d, v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((d, v)),
        }) {
            c.rows.push(Row { panel: "r_squared_peak", series: series.clone(), x: d.to_string(), y: r2 });
        }
    }

    for f in a.leadlag.as_deref().map(split_list).unwrap_or_default() {
        let text = run.read_string(Path::new(&f))?;
        let est = LagEstimate::from_json(&text).at(Path::new(&f))?;
        let s = stem(&f);
        let curve: Vec<(f64, f64)> = est.contrast.iter().filter_map(|p| Some((p.theta, p.value?))).collect();
        for (t, v) in &curve {
            c.rows.push(Row { panel: "contrast", series: s.clone(), x: t.to_string(), y: *v });
        }
        c.rows.push(Row {
            panel: "lag_estimate",
            series: s.clone(),
            x: est.theta_hat.to_string(),
            y: est.contrast_at_theta_hat,
        });
        *c.lags.entry(est.theta_hat.round() as i64).or_default() += 1;
        c.contrast.insert(s, curve);
    }

    for f in a.network.as_deref().map(split_list).unwrap_or_default() {
        let text = run.read_string(Path::new(&f))?;
        let net = LeadLagNetwork::from_json(&text).at(Path::new(&f))?;
        let mut hist: BTreeMap<i64, usize> = BTreeMap::new();
        for e in &net.edges {
            *hist.entry(e.lag_days).or_default() += 1;
        }
        for (lag, n) in &hist {
            c.rows.push(Row { panel: "lag_histogram", series: stem(&f), x: lag.to_string(), y: *n as f64 });
            *c.lags.entry(*lag).or_default() += n;
        }
    }
    Ok(c)
}

fn write_csv(rows: &[Row]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| moblag_core::Error::from(e);
    w.write_record(["panel", "series", "x", "y"]).map_err(io)?;
    for r in rows {
        w.write_record([r.panel, r.series.as_str(), r.x.as_str(), r.y.to_string().as_str()])
            .map_err(io)?;
    }
    Ok(w.into_inner().expect("in-memory writer"))
}

const WIDTH: f64 = 720.0;
const PANEL_H: f64 = 220.0;
const MARGIN: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Panel {
    top: f64,
}

impl Panel {
    fn x(&self, frac: f64) -> f64 {
        MARGIN + frac * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, frac: f64) -> f64 {
        self.top + PANEL_H - 30.0 - frac * (PANEL_H - 60.0)
    }

    fn frame(&self, svg: &mut String, title: &str, empty: bool) {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="14">{title}</text>"#,
            MARGIN,
            self.top + 18.0
        );
        let _ = writeln!(
            svg,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#888"/>"##,
            self.x(0.0),
            self.y(1.0),
            self.x(1.0) - self.x(0.0),
            self.y(0.0) - self.y(1.0)
        );
        if empty {
            let _ = writeln!(
                svg,
                r##"<text x="{:.2}" y="{:.2}" font-size="12" fill="#888">no data</text>"##,
                self.x(0.45),
                self.y(0.5)
            );
        }
    }

    fn polyline(&self, svg: &mut String, pts: &[(f64, f64)], colour: &str) {
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", self.x(*x), self.y(*y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
    }

    fn label(&self, svg: &mut String, k: usize, text: &str, colour: &str) {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" fill="{colour}">{}</text>"#,
            self.x(0.0) + 6.0,
            self.y(1.0) + 12.0 + 11.0 * k as f64,
            escape(text)
        );
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn frac(v: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        (v - lo) / (hi - lo)
    } else {
        0.5
    }
}

fn render_svg(c: &Collected) -> String {
    let mut svg = String::new();
    let height = 3.0 * PANEL_H;
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">"#
    );

    let p = Panel { top: 0.0 };
    p.frame(&mut svg, "R² by date", c.r_squared.is_empty());
    let dates: Vec<i64> = c
        .r_squared
        .values()
        .flatten()
        .map(|(d, _)| moblag_core::dates::day_number(*d) as i64)
        .collect();
    let (d0, d1) = (dates.iter().min().copied().unwrap_or(0), dates.iter().max().copied().unwrap_or(0));
    for (k, (series, pts)) in c.r_squared.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let xy: Vec<(f64, f64)> = pts
            .iter()
            .map(|(d, r2)| (frac(moblag_core::dates::day_number(*d), d0 as f64, d1 as f64), r2.clamp(0.0, 1.0)))
            .collect();
        p.polyline(&mut svg, &xy, colour);
        p.label(&mut svg, k, series, colour);
    }

    let p = Panel { top: PANEL_H };
    p.frame(&mut svg, "Contrast by lag", c.contrast.is_empty());
    let thetas: Vec<f64> = c.contrast.values().flatten().map(|p| p.0).collect();
    let values: Vec<f64> = c.contrast.values().flatten().map(|p| p.1).collect();
    let (t0, t1) = (thetas.iter().copied().fold(f64::INFINITY, f64::min), thetas.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let (v0, v1) = (values.iter().copied().fold(f64::INFINITY, f64::min), values.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    for (k, (series, pts)) in c.contrast.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let xy: Vec<(f64, f64)> = pts.iter().map(|(t, v)| (frac(*t, t0, t1), frac(*v, v0, v1))).collect();
        p.polyline(&mut svg, &xy, colour);
        p.label(&mut svg, k, series, colour);
    }

    let p = Panel { top: 2.0 * PANEL_H };
    p.frame(&mut svg, "Lag histogram (days)", c.lags.is_empty());
    if let (Some((&l0, _)), Some((&l1, _))) = (c.lags.first_key_value(), c.lags.last_key_value()) {
        let max = *c.lags.values().max().expect("non-empty") as f64;
        let bins = (l1 - l0 + 1) as f64;
        let bar_w = (p.x(1.0) - p.x(0.0)) / bins;
        for (&lag, &n) in &c.lags {
            let x = p.x(0.0) + (lag - l0) as f64 * bar_w;
            let top = p.y(n as f64 / max);
            let _ = writeln!(
                svg,
                r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#1f77b4"><title>{lag}: {n}</title></rect>"##,
                x + 1.0,
                top,
                (bar_w - 2.0).max(1.0),
                p.y(0.0) - top
            );
        }
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" font-size="10">{l0}</text>"#, p.x(0.0), p.y(0.0) + 14.0);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" font-size="10">{l1}</text>"#, p.x(1.0) - 12.0, p.y(0.0) + 14.0);
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn report(run: &mut Run, a: &ReportArgs) -> CliResult<()> {
    let c = collect(run, a)?;
    run.note("rows", c.rows.len());
    run.write("report.csv", &write_csv(&c.rows)?)?;
    run.write("report.svg", render_svg(&c).as_bytes())?;
    Ok(())
}

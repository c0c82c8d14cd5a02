//! Data rates, per-user tables and bar charts.
//!
//! CSV columns, in order: `user, x, y, z, ap, wavelength, branch, sinr_db,
//! bandwidth_hz, bandwidth_is_lower_bound, rate_bps`. Access point and branch
//! numbers are 1-based. The SVG charts use an 800×400 viewBox, one bar per
//! user.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::allocation::{
    AllocationProblem, AllocationResult, Assignment, Choice, InfeasibilityCertificate, SolveOutcome,
};
use crate::channel::{Bandwidth3Db, ChannelMatrix};
use crate::scene::ScenarioConfig;
use crate::{Error, Result};

/// Data-rate search resolution, Hz.
pub const RATE_STEP: f64 = 1e6;

pub const CSV_HEADER: [&str; 11] = [
    "user",
    "x",
    "y",
    "z",
    "ap",
    "wavelength",
    "branch",
    "sinr_db",
    "bandwidth_hz",
    "bandwidth_is_lower_bound",
    "rate_bps",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserReportRow {
    pub user: String,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// 1-based.
    pub ap: usize,
    pub wavelength: String,
    /// 1-based.
    pub branch: usize,
    /// Rounded to 2 decimals.
    pub sinr_db: f64,
    /// Channel 3-dB bandwidth, rounded to 1 MHz.
    pub bandwidth_hz: f64,
    /// The bandwidth is the Nyquist limit of the binning, not a crossing.
    pub bandwidth_is_lower_bound: bool,
    pub rate_bps: f64,
}

/// Signal, interference and bandwidth-proportional noise seen by `user`.
struct NoiseBudget {
    signal: f64,
    interference: f64,
    /// Shot noise per Hz of electrical bandwidth.
    shot_density: f64,
    /// Receiver noise per Hz.
    rx_density: f64,
}

impl NoiseBudget {
    fn new(problem: &AllocationProblem, assignment: &Assignment, user: usize) -> Result<Self> {
        let d = problem.dims;
        let Choice {
            ap,
            wavelength: w,
            branch: b,
        } = assignment.choice_of(user)?;
        let mut interference = 0.0;
        let mut shot = 0.0;
        for cp in (0..d.aps).filter(|&cp| cp != ap) {
            let modulated = (0..d.users)
                .filter(|&ui| ui != user)
                .any(|ui| (0..d.branches).any(|f| assignment.get(ui, cp, w, f)));
            if modulated {
                interference += problem.p(user, cp, w, b);
            } else {
                shot += problem.sigma(user, cp, w, b);
            }
        }
        let b0 = problem.noise.electrical_bandwidth;
        Ok(NoiseBudget {
            signal: problem.p(user, ap, w, b),
            interference,
            shot_density: shot / b0,
            rx_density: problem.receiver_noise / b0,
        })
    }

    fn sinr_at(&self, bandwidth: f64) -> f64 {
        self.signal / (self.interference + (self.shot_density + self.rx_density) * bandwidth)
    }
}

/// Largest rate `R ≤ channel_bw` (in whole MHz) at which the user's SINR,
/// recomputed with electrical bandwidth `R`, still meets the threshold.
/// Zero if it fails already at 1 MHz.
pub fn data_rate(
    problem: &AllocationProblem,
    assignment: &Assignment,
    user: usize,
    channel_bw: Bandwidth3Db,
) -> Result<f64> {
    let budget = NoiseBudget::new(problem, assignment, user)?;
    let ok = |k: u64| budget.sinr_at(k as f64 * RATE_STEP) >= problem.sinr_threshold;
    let cap = (channel_bw.hz() / RATE_STEP).floor();
    if !(cap >= 1.0) || !ok(1) {
        return Ok(0.0);
    }
    let mut hi = cap as u64;
    if ok(hi) {
        return Ok(hi as f64 * RATE_STEP);
    }
    // ok(lo) && !ok(hi)
    let mut lo = 1;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo as f64 * RATE_STEP)
}

fn round_to(v: f64, step: f64) -> f64 {
    (v / step).round() * step
}

/// One row per user of `result`.
pub fn build_rows(
    config: &ScenarioConfig,
    matrix: &ChannelMatrix,
    problem: &AllocationProblem,
    result: &AllocationResult,
) -> Result<Vec<UserReportRow>> {
    let assignment = result.selector();
    result
        .assignment
        .iter()
        .enumerate()
        .map(|(u, c)| {
            let station = &config.stations[u];
            let bw = matrix.link(u, c.ap, c.branch).bandwidth;
            let rate = match bw {
                Some(bw) => data_rate(problem, &assignment, u, bw)?,
                None => 0.0,
            };
            Ok(UserReportRow {
                user: station.user.clone(),
                x: station.position.x,
                y: station.position.y,
                z: station.position.z,
                ap: c.ap + 1,
                wavelength: config.wavelengths[c.wavelength].clone(),
                branch: c.branch + 1,
                sinr_db: round_to(result.sinr_db[u], 0.01),
                bandwidth_hz: bw.map_or(0.0, |b| round_to(b.hz(), RATE_STEP)),
                bandwidth_is_lower_bound: bw.is_some_and(|b| b.is_lower_bound()),
                rate_bps: rate,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReportFormat {
    Csv,
    Json,
    Svg,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "svg" => Ok(ReportFormat::Svg),
            other => Err(Error::InvalidArgument(format!(
                "unknown report format `{other}` (valid: csv, json, svg)"
            ))),
        }
    }
}

pub fn to_csv(rows: &[UserReportRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn parse_csv(text: &str) -> Result<Vec<UserReportRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::InvalidArgument(format!(
            "unexpected CSV header {header:?}"
        )));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn to_json(rows: &[UserReportRow]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
    s.push('\n');
    s
}

pub fn parse_json(text: &str) -> Result<Vec<UserReportRow>> {
    Ok(serde_json::from_str(text)?)
}

/// A bar chart metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Bandwidth,
    Sinr,
    Rate,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Bandwidth, Metric::Sinr, Metric::Rate];

    pub fn file_stem(&self) -> &'static str {
        match self {
            Metric::Bandwidth => "bandwidth",
            Metric::Sinr => "sinr",
            Metric::Rate => "rate",
        }
    }

    fn title(&self) -> &'static str {
        match self {
            Metric::Bandwidth => "Channel 3-dB bandwidth (GHz)",
            Metric::Sinr => "SINR (dB)",
            Metric::Rate => "Data rate (Gbps)",
        }
    }

    fn value(&self, row: &UserReportRow) -> f64 {
        match self {
            Metric::Bandwidth => row.bandwidth_hz / 1e9,
            Metric::Sinr => row.sinr_db,
            Metric::Rate => row.rate_bps / 1e9,
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Bar chart of `metric`, one bar per row. `reference` draws a dashed
/// horizontal line (e.g. the SINR threshold).
pub fn to_svg(rows: &[UserReportRow], metric: Metric, reference: Option<f64>) -> String {
    const W: f64 = 800.0;
    const H: f64 = 400.0;
    const LEFT: f64 = 60.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 40.0;
    const BOTTOM: f64 = 60.0;
    let plot_w = W - LEFT - RIGHT;
    let plot_h = H - TOP - BOTTOM;

    let values: Vec<f64> = rows.iter().map(|r| metric.value(r).max(0.0)).collect();
    let top = values.iter().copied().chain(reference).fold(0.0f64, f64::max);
    let top = if top > 0.0 { top * 1.1 } else { 1.0 };
    let y_of = |v: f64| TOP + plot_h * (1.0 - v / top);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {W} {H}" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        W / 2.0,
        metric.title()
    );
    for i in 0..=5 {
        let v = top * i as f64 / 5.0;
        let y = y_of(v);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.1}" y2="{y:.2}" stroke="#dddddd"/>"##,
            W - RIGHT
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.2}" text-anchor="end">{v:.2}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let n = values.len().max(1) as f64;
    let slot = plot_w / n;
    let bar = slot * 0.6;
    for (i, (row, v)) in rows.iter().zip(&values).enumerate() {
        let x = LEFT + slot * i as f64 + (slot - bar) / 2.0;
        let y = y_of(*v);
        let _ = writeln!(
            s,
            r##"<rect x="{x:.2}" y="{y:.2}" width="{bar:.2}" height="{:.2}" fill="#3b6ea5"/>"##,
            TOP + plot_h - y
        );
        let cx = x + bar / 2.0;
        let _ = writeln!(
            s,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle" font-size="10">{v:.2}</text>"#,
            y - 4.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 18.0,
            escape(&row.user)
        );
    }
    if let Some(r) = reference {
        let y = y_of(r);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.1}" y2="{y:.2}" stroke="#c0392b" stroke-dasharray="6 4"/>"##,
            W - RIGHT
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{:.1}" stroke="black"/>"#,
        TOP + plot_h
    );
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
        TOP + plot_h,
        W - RIGHT,
        TOP + plot_h
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">User</text>"#,
        LEFT + plot_w / 2.0,
        H - 14.0
    );
    s.push_str("</svg>\n");
    s
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf> {
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Write `report.csv`, `report.json` and/or `bandwidth.svg`, `sinr.svg`,
/// `rate.svg` into `dir`. Returns the paths written, in that order.
pub fn emit_report(
    rows: &[UserReportRow],
    formats: &[ReportFormat],
    sinr_threshold_db: f64,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut formats = formats.to_vec();
    formats.sort();
    formats.dedup();
    let mut written = Vec::new();
    for f in formats {
        match f {
            ReportFormat::Csv => written.push(write(dir.join("report.csv"), &to_csv(rows)?)?),
            ReportFormat::Json => written.push(write(dir.join("report.json"), &to_json(rows))?),
            ReportFormat::Svg => {
                for m in Metric::ALL {
                    let reference = (m == Metric::Sinr).then_some(sinr_threshold_db);
                    let path = dir.join(format!("{}.svg", m.file_stem()));
                    written.push(write(path, &to_svg(rows, m, reference))?);
                }
            }
        }
    }
    Ok(written)
}

pub const RESULT_FORMAT: &str = "owc-allocation-result";
pub const RESULT_VERSION: u32 = 1;

/// Stored outcome of an allocation run; enough to regenerate the report
/// without solving again.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub format: String,
    pub version: u32,
    pub scenario: String,
    /// Hash of the channel matrix the problem was built from.
    pub content_hash: String,
    pub sinr_threshold_db: f64,
    pub result: Option<AllocationResult>,
    pub infeasibility: Option<InfeasibilityCertificate>,
    pub rows: Vec<UserReportRow>,
}

impl ResultDocument {
    pub fn new(
        config: &ScenarioConfig,
        matrix: &ChannelMatrix,
        problem: &AllocationProblem,
        outcome: &SolveOutcome,
    ) -> Result<Self> {
        let (result, infeasibility, rows) = match outcome {
            SolveOutcome::Optimal(r) => (Some(r.clone()), None, build_rows(config, matrix, problem, r)?),
            SolveOutcome::Infeasible(c) => (None, Some(c.clone()), Vec::new()),
        };
        Ok(ResultDocument {
            format: RESULT_FORMAT.into(),
            version: RESULT_VERSION,
            scenario: config.name.clone(),
            content_hash: matrix.content_hash.clone(),
            sinr_threshold_db: config.sinr_threshold_db,
            result,
            infeasibility,
            rows,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let doc: ResultDocument = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        if doc.format != RESULT_FORMAT || doc.version != RESULT_VERSION {
            return Err(Error::Format {
                path: path.to_owned(),
                message: format!("unsupported result format {} v{}", doc.format, doc.version),
            });
        }
        Ok(doc)
    }
}

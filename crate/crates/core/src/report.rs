//! Plottable datasets for the CLI.
//!
//! Every command produces a flat list of [`Record`]s with the columns
//! `series, x, y, aux_k, aux_note`. CSV output writes floats with 17
//! significant digits and infinities as the token `inf`; JSON output is an
//! array of objects with the same fields, non-finite values written as the
//! strings `"inf"`, `"-inf"` or `"nan"`. Both formats read back bit-exactly.
//!
//! At a discontinuity the `d_O` series carries two rows with the same `x`:
//! the left limit (`aux_note = "limit"`) and the value the curve takes
//! (`aux_note = "value"`).

use std::io::{Read, Write};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::channel::ChannelConfig;
use crate::closed_form::{
    baseline_no_csit, baseline_rate_adaptation, branch_full_gain, compute_dmt_curve, dk_eval, eval_dmt, set_a, set_b,
};
use crate::error::DmtError;
use crate::oracle::{default_v_max, grid_oracle, tolerance, MAX_ORACLE_RX};
use crate::sim::{rho_grid_db, run_sweep, KappaMode, PowerPolicy};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Dmt(#[from] DmtError),
    #[error("invalid report spec: {0}")]
    InvalidSpec(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot parse value {0:?}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, ReportError>;

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub series: String,
    pub x: f64,
    pub y: f64,
    pub aux_k: Option<i64>,
    pub aux_note: String,
}

impl Record {
    fn new(series: impl Into<String>, x: f64, y: f64, aux_k: Option<i64>, aux_note: impl Into<String>) -> Self {
        Self { series: series.into(), x, y, aux_k, aux_note: aux_note.into() }
    }

    /// Bitwise equality, so NaN rows compare equal to themselves.
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.series == other.series
            && self.x.to_bits() == other.x.to_bits()
            && self.y.to_bits() == other.y.to_bits()
            && self.aux_k == other.aux_k
            && self.aux_note == other.aux_note
    }
}

pub type Dataset = Vec<Record>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Curve,
    OracleCheck,
    Simulate,
    Figures,
}

/// Fields shared by all commands.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportSpec {
    pub command: Command,
    pub cfg: ChannelConfig,
    pub r_grid: Vec<f64>,
    pub alpha_list: Vec<f64>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl ReportSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.cfg.n_rx as f64;
        if let Some(r) = self.r_grid.iter().find(|r| !(0.0..=n).contains(*r)) {
            return Err(ReportError::InvalidSpec(format!("r = {r} outside [0, {n}]")));
        }
        if let Some(a) = self.alpha_list.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(ReportError::InvalidSpec(format!("invalid alpha {a}")));
        }
        if matches!(&self.output_path, Some(p) if p.as_os_str().is_empty()) {
            return Err(ReportError::InvalidSpec("empty output path".into()));
        }
        Ok(())
    }
}

/// `0, step, 2·step, …` up to and including `n_rx`.
pub fn r_grid(n_rx: usize, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(ReportError::InvalidSpec(format!("r step must be positive, got {step}")));
    }
    let n = n_rx as f64;
    let count = (n / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=count).map(|i| (i as f64 * step).min(n)).collect();
    if *grid.last().unwrap() < n - 1e-12 {
        grid.push(n);
    } else {
        *grid.last_mut().unwrap() = n;
    }
    Ok(grid)
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

pub fn format_value(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_value(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        "nan" => Ok(f64::NAN),
        t => t.parse().map_err(|_| ReportError::Parse(s.to_string())),
    }
}

const HEADER: [&str; 5] = ["series", "x", "y", "aux_k", "aux_note"];

pub fn write_dataset<W: Write>(out: W, data: &[Record], format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(HEADER)?;
            for rec in data {
                let aux_k = rec.aux_k.map(|k| k.to_string()).unwrap_or_default();
                w.write_record([
                    rec.series.as_str(),
                    &format_value(rec.x),
                    &format_value(rec.y),
                    &aux_k,
                    &rec.aux_note,
                ])?;
            }
            w.flush()?;
        }
        Format::Json => {
            let rows: Vec<JsonRecord> = data.iter().map(JsonRecord::from).collect();
            serde_json::to_writer_pretty(out, &rows)?;
        }
    }
    Ok(())
}

pub fn read_dataset<R: Read>(input: R, format: Format) -> Result<Dataset> {
    match format {
        Format::Csv => {
            let mut rdr = csv::Reader::from_reader(input);
            let mut data = Vec::new();
            for row in rdr.records() {
                let row = row?;
                let field = |i: usize| row.get(i).ok_or_else(|| ReportError::Parse(format!("{row:?}")));
                let aux_k = match field(3)? {
                    "" => None,
                    s => Some(s.parse().map_err(|_| ReportError::Parse(s.to_string()))?),
                };
                data.push(Record {
                    series: field(0)?.to_string(),
                    x: parse_value(field(1)?)?,
                    y: parse_value(field(2)?)?,
                    aux_k,
                    aux_note: field(4)?.to_string(),
                });
            }
            Ok(data)
        }
        Format::Json => {
            let rows: Vec<JsonRecord> = serde_json::from_reader(input)?;
            rows.into_iter().map(Record::try_from).collect()
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonRecord {
    series: String,
    x: Value,
    y: Value,
    aux_k: Option<i64>,
    aux_note: String,
}

fn to_json_value(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or_else(|| Value::String(format_value(x)))
}

fn from_json_value(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| ReportError::Parse(n.to_string())),
        Value::String(s) => parse_value(s),
        other => Err(ReportError::Parse(other.to_string())),
    }
}

impl From<&Record> for JsonRecord {
    fn from(r: &Record) -> Self {
        Self {
            series: r.series.clone(),
            x: to_json_value(r.x),
            y: to_json_value(r.y),
            aux_k: r.aux_k,
            aux_note: r.aux_note.clone(),
        }
    }
}

impl TryFrom<JsonRecord> for Record {
    type Error = ReportError;

    fn try_from(r: JsonRecord) -> Result<Self> {
        Ok(Record { x: from_json_value(&r.x)?, y: from_json_value(&r.y)?, series: r.series, aux_k: r.aux_k, aux_note: r.aux_note })
    }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn tagged(name: &str, alpha: f64) -> String {
    format!("{name}(alpha={alpha})")
}

fn alphas(spec: &ReportSpec) -> Vec<f64> {
    if spec.alpha_list.is_empty() {
        vec![spec.cfg.alpha]
    } else {
        spec.alpha_list.clone()
    }
}

/// Segment endpoints, sampled `d_O` and `d_k` (`k ∈ B`) for every alpha,
/// plus the no-CSIT corners.
pub fn cmd_curve(spec: &ReportSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut data = Vec::new();
    for alpha in alphas(spec) {
        let cfg = spec.cfg.with_alpha(alpha)?;
        let curve = compute_dmt_curve(&cfg);
        for s in &curve.segments {
            let k = Some(s.k as i64);
            data.push(Record::new(tagged("segment", alpha), s.r_left, s.d_left, k, "left"));
            data.push(Record::new(tagged("segment", alpha), s.r_right, s.d_right, k, "right"));
        }

        let jumps = curve.jumps();
        let mut rs: Vec<f64> = spec.r_grid.clone();
        rs.extend(jumps.iter().map(|j| j.r));
        rs.sort_by(f64::total_cmp);
        rs.dedup();
        let d_o = tagged("d_O", alpha);
        for &r in &rs {
            if let Some(j) = jumps.iter().find(|j| j.r == r && j.left_limit != j.value) {
                data.push(Record::new(&d_o, r, j.left_limit, None, "limit"));
            }
            data.push(Record::new(&d_o, r, eval_dmt(&curve, r)?, None, "value"));
        }

        for &k in &curve.b_set {
            let name = tagged(&format!("d_{k}"), alpha);
            for &r in &spec.r_grid {
                data.push(Record::new(&name, r, dk_eval(&cfg, k, r)?, Some(k as i64), "value"));
            }
        }
    }
    let base = baseline_no_csit(&spec.cfg);
    for s in &base.segments {
        data.push(Record::new("no_csit", s.r_left, s.d_left, None, "corner"));
    }
    if let Some(s) = base.segments.last() {
        data.push(Record::new("no_csit", s.r_right, s.d_right, None, "corner"));
    }
    Ok(data)
}

/// Closed form against the grid oracle at every `(α, r)` with `r > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub data: Dataset,
    pub rows: usize,
    pub failures: usize,
}

impl OracleCheck {
    pub fn all_pass(&self) -> bool {
        self.failures == 0
    }
}

pub fn cmd_oracle_check(spec: &ReportSpec, grid_step: f64, v_max: Option<f64>) -> Result<OracleCheck> {
    spec.validate()?;
    if spec.cfg.n_rx > MAX_ORACLE_RX {
        return Err(DmtError::OracleTooLarge(spec.cfg.n_rx).into());
    }
    let mut check = OracleCheck { data: Vec::new(), rows: 0, failures: 0 };
    for alpha in alphas(spec) {
        let cfg = spec.cfg.with_alpha(alpha)?;
        let curve = compute_dmt_curve(&cfg);
        let tol = tolerance(&cfg, grid_step);
        let vm = v_max.unwrap_or_else(|| default_v_max(&cfg));
        for &r in spec.r_grid.iter().filter(|&&r| r > 0.0) {
            let closed = eval_dmt(&curve, r)?;
            let oracle = grid_oracle(&cfg, r, vm, grid_step)?.d_min;
            let gap = if closed == oracle { 0.0 } else { (oracle - closed).abs() };
            let pass = gap <= tol;
            check.rows += 1;
            check.failures += usize::from(!pass);
            data_push_check(&mut check.data, alpha, r, closed, oracle, gap, tol, pass);
        }
    }
    Ok(check)
}

#[allow(clippy::too_many_arguments)]
fn data_push_check(data: &mut Dataset, alpha: f64, r: f64, closed: f64, oracle: f64, gap: f64, tol: f64, pass: bool) {
    data.push(Record::new(tagged("closed_form", alpha), r, closed, None, ""));
    data.push(Record::new(tagged("grid_oracle", alpha), r, oracle, None, ""));
    let verdict = if pass { "pass" } else { "fail" };
    data.push(Record::new(tagged("gap", alpha), r, gap, None, format!("{verdict};tol={}", format_value(tol))));
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateParams {
    pub r: f64,
    pub rho_start_db: f64,
    pub rho_stop_db: f64,
    pub rho_points: usize,
    pub trials: usize,
    pub t: f64,
    pub kappa_mode: KappaMode,
    pub seed: u64,
}

fn kappa_mode_name(mode: KappaMode) -> &'static str {
    match mode {
        KappaMode::Analytic => "analytic",
        KappaMode::Calibrated => "calibrated",
        KappaMode::Fixed => "fixed",
    }
}

/// Outage sweep rows plus a `fitted_slope` summary row (`y = nan` when the
/// slope is undefined).
pub fn cmd_simulate(spec: &ReportSpec, params: &SimulateParams) -> Result<Dataset> {
    spec.validate()?;
    if params.trials == 0 {
        return Err(ReportError::InvalidSpec("trials must be positive".into()));
    }
    let policy = if params.kappa_mode == KappaMode::Fixed {
        PowerPolicy::fixed(params.t, 1.0)?
    } else {
        PowerPolicy::new(params.t, params.kappa_mode)?
    };
    let grid = rho_grid_db(params.rho_start_db, params.rho_stop_db, params.rho_points);
    let sweep = run_sweep(&spec.cfg, params.r, &grid, params.trials, &policy, params.seed)?;

    let mut data = Vec::new();
    for i in 0..grid.len() {
        let rho = sweep.rho_grid[i];
        let note = format!("trials={};kappa={}", sweep.trials, format_value(sweep.kappa[i]));
        data.push(Record::new("p_out", rho, sweep.p_out[i], Some(sweep.outages[i] as i64), note));
        data.push(Record::new("ci_half_width", rho, sweep.ci_half_width[i], None, ""));
    }
    let note = format!(
        "kappa_mode={};t={};trials={};seed={}{}",
        kappa_mode_name(params.kappa_mode),
        params.t,
        params.trials,
        params.seed,
        if sweep.fitted_slope.is_none() { ";slope_undefined" } else { "" }
    );
    data.push(Record::new("fitted_slope", params.r, sweep.fitted_slope.unwrap_or(f64::NAN), None, note));
    Ok(data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// DMT of a 3×3 channel for several CSIT qualities.
    ThreeByThree,
    /// `d_1`, `d_2` and `d_O` of a 4×2 channel at `α = 0.1`.
    FourByTwo,
    /// SIMO/MISO diversity against `α`.
    SingleAntennaVsAlpha,
    /// `d(N)` against `α` for a 5×3 channel.
    FullGainVsAlpha,
}

impl Figure {
    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            2 => Some(Self::ThreeByThree),
            3 => Some(Self::FourByTwo),
            4 => Some(Self::SingleAntennaVsAlpha),
            5 => Some(Self::FullGainVsAlpha),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureParams {
    /// Antenna count `K` of the SIMO/MISO figure.
    pub k: usize,
    /// Multiplexing gain of the SIMO/MISO figure.
    pub r: f64,
}

impl Default for FigureParams {
    fn default() -> Self {
        Self { k: 4, r: 0.5 }
    }
}

pub fn cmd_figures(fig: Figure, params: &FigureParams) -> Result<Dataset> {
    match fig {
        Figure::ThreeByThree => curve_figure(3, 3, vec![0.0, 1.0 / 3.0, 0.5]),
        Figure::FourByTwo => curve_figure(4, 2, vec![0.1]),
        Figure::SingleAntennaVsAlpha => single_antenna_figure(params),
        Figure::FullGainVsAlpha => full_gain_figure(5, 3),
    }
}

fn curve_figure(m: usize, n: usize, alpha_list: Vec<f64>) -> Result<Dataset> {
    let spec = ReportSpec {
        command: Command::Figures,
        cfg: ChannelConfig::new(m, n, alpha_list[0])?,
        r_grid: r_grid(n, 0.01)?,
        alpha_list,
        output_path: None,
        format: Format::Csv,
    };
    cmd_curve(&spec)
}

fn single_antenna_figure(params: &FigureParams) -> Result<Dataset> {
    if params.k == 0 || !(0.0..=1.0).contains(&params.r) {
        return Err(ReportError::InvalidSpec(format!("need K >= 1 and r in [0, 1], got K = {}, r = {}", params.k, params.r)));
    }
    let r = params.r;
    let mut data = Vec::new();
    for i in 0..=100 {
        let alpha = i as f64 / 100.0;
        let cfg = ChannelConfig::new(params.k, 1, alpha)?;
        let power = eval_dmt(&compute_dmt_curve(&cfg), r)?;
        let rate = eval_dmt(&baseline_rate_adaptation(&cfg)?, r)?;
        let none = eval_dmt(&baseline_no_csit(&cfg), r)?;
        data.push(Record::new("no_csit", alpha, none, None, ""));
        data.push(Record::new("rate_adaptation", alpha, rate, None, ""));
        data.push(Record::new("power_adaptation", alpha, power, None, ""));
        data.push(Record::new("gain_over_rate_adaptation", alpha, power - rate, None, ""));
        data.push(Record::new("gain_over_no_csit", alpha, power - none, None, ""));
    }
    Ok(data)
}

/// Values of `α` where an outage subset drops out of `A`, which is where
/// `min B` (and with it `d(N)`) changes branch.
pub fn full_gain_thresholds(m: usize, n: usize) -> Vec<f64> {
    let mut t: Vec<f64> = (1..n).map(|k| 1.0 / ((m - n + k) * (n - k)) as f64).collect();
    t.sort_by(f64::total_cmp);
    t.dedup();
    t
}

fn set_label(b: &[usize]) -> String {
    let inner: Vec<String> = b.iter().map(|k| k.to_string()).collect();
    format!("B={{{}}}", inner.join(","))
}

fn full_gain_figure(m: usize, n: usize) -> Result<Dataset> {
    let thresholds = full_gain_thresholds(m, n);
    let mut alphas: Vec<f64> = (0..=400).map(|i| i as f64 / 1000.0).collect();
    alphas.extend(&thresholds);
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();

    let mut data = Vec::new();
    for alpha in alphas {
        let cfg = ChannelConfig::new(m, n, alpha)?;
        if thresholds.contains(&alpha) && alpha > 0.0 {
            // Branch in force just below the threshold.
            let below = cfg.with_alpha(alpha * (1.0 - 1e-9))?;
            let p = set_a(&below)[0];
            data.push(Record::new("d_N", alpha, branch_full_gain(&cfg, p), Some(p as i64), "limit"));
        }
        let (b, _) = set_b(&cfg);
        let curve = compute_dmt_curve(&cfg);
        let d_n = eval_dmt(&curve, n as f64)?;
        data.push(Record::new("d_N", alpha, d_n, Some(b[0] as i64), format!("value;{}", set_label(&b))));
    }
    Ok(data)
}

//! Command-line front end.
//!
//! Every run writes a table (CSV by default, or JSON) whose metadata embeds
//! the library version, the full run configuration and a summary. The
//! `replay` command re-executes the configuration stored in such a file.
//!
//! Exit codes: `0` success, `1` numerical failure (including rows whose
//! status is a failure), `2` configuration error.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::conditional::{
    divergence_scan, locate_divergence, simulate_ensemble, simulate_trajectory, EnsembleOptions, GaussianState, SteadyOptions,
};
use crate::error::{Error, Result};
use crate::fisher::{fisher_information, optimize_measurement, FisherOptions, OptimizeOptions};
use crate::fock::{qfi_finite_difference, FockOptions};
use crate::model::{becp_from_angle, MeasurementParams, SystemParams};
use crate::moments::{moments_at, photocurrent_variance_profile};
use crate::parallel::resolve_threads;
use crate::qfi::{qfi_rate_analytic, qfi_time_domain, suggested_duration};

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status for a numerical failure.
pub const EXIT_NUMERICAL: i32 = 1;
/// Exit status for an invalid configuration.
pub const EXIT_CONFIG: i32 = 2;

/// Ordered list of values given as `start:stop:step`, a comma list, or a
/// single number. The stop value is included when it lies on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Grid {
    text: String,
    values: Vec<f64>,
}

impl Grid {
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let num = |s: &str| -> Result<f64> {
            let v: f64 = s.trim().parse().map_err(|_| Error::Config(format!("not a number: {s:?}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Config(format!("not a finite number: {s:?}")))
            }
        };
        let values = if text.contains(':') {
            let parts: Vec<&str> = text.split(':').collect();
            let [start, stop, step] = parts[..] else {
                return Err(Error::Config(format!("range must be start:stop:step, got {text:?}")));
            };
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) || stop < start {
                return Err(Error::Config(format!("range {text:?} needs step > 0 and stop >= start")));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
            // Rounding to 12 decimals removes the representation noise of `i·step`.
            (0..n).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect()
        } else if text.is_empty() {
            Vec::new()
        } else {
            text.split(',').map(num).collect::<Result<Vec<f64>>>()?
        };
        if values.is_empty() {
            return Err(Error::Config("empty grid".into()));
        }
        Ok(Self { text: text.to_string(), values })
    }
}

impl TryFrom<String> for Grid {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> String {
        g.text
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QfiMethod {
    /// Closed-form asymptotic growth rate.
    Analytic,
    /// Semi-analytic time series from the Langevin moments.
    Time,
    /// Finite differences of the truncated-Fock fidelity.
    Fock,
}

#[derive(Debug, Parser)]
#[command(name = "gdyne", version, about = "General-dyne monitoring of a parametric oscillator near criticality")]
pub struct Cli {
    /// Worker threads (falls back to GDYNE_THREADS, then 1).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Output file (stdout when omitted).
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,

    #[command(subcommand)]
    pub command: TopLevel,
}

#[derive(Debug, Subcommand)]
pub enum TopLevel {
    #[command(flatten)]
    Run(Command),
    /// Re-run the configuration embedded in an earlier output file.
    Replay { file: PathBuf },
}

/// Operating point given by `ω` and either `ε` or the distance `δε = ε_c − ε`.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PointArgs {
    #[arg(long)]
    pub omega: f64,
    #[arg(long, conflicts_with = "deps", required_unless_present = "deps")]
    pub eps: Option<f64>,
    #[arg(long)]
    pub deps: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
}

impl PointArgs {
    pub fn params(&self) -> Result<SystemParams> {
        match (self.eps, self.deps) {
            (Some(e), None) => SystemParams::new(self.omega, e, self.kappa),
            (None, Some(d)) => SystemParams::near_boundary(self.omega, d, self.kappa),
            _ => Err(Error::Config("give exactly one of --eps and --deps".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DetectorArgs {
    /// Heterodyne admixture, 0 for homodyne and 1 for heterodyne.
    #[arg(long, default_value_t = 0.0)]
    pub s: f64,
    /// Measured quadrature angle in radians.
    #[arg(long)]
    pub phi: f64,
    /// Detection efficiency.
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
}

impl DetectorArgs {
    pub fn params(&self) -> Result<MeasurementParams> {
        MeasurementParams::new(self.s, self.phi, self.eta)
    }
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Conditional steady covariance along a frequency sweep.
    Steady {
        #[arg(long, value_parser = parse_grid)]
        omega: Grid,
        /// Distance from the phase boundary.
        #[arg(long, default_value_t = 0.0)]
        deps: f64,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        #[arg(long)]
        phi: f64,
        /// One or more efficiencies.
        #[arg(long, value_parser = parse_grid, default_value = "1")]
        eta: Grid,
        #[arg(long, default_value_t = 1e-2)]
        dt: f64,
        #[arg(long, default_value_t = 5000.0)]
        t_max: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Minimum of the photocurrent variance along a ladder of boundary distances.
    BecpDetect {
        #[arg(long, value_parser = parse_grid, default_value = "0.15:0.24:0.0005")]
        omega: Grid,
        #[arg(long, value_parser = parse_grid, default_value = "0.03,0.02,0.01,0.005")]
        deps: Grid,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[command(flatten)]
        detector: DetectorArgs,
        #[arg(long, default_value_t = 100.0)]
        t_probe: f64,
        #[arg(long, default_value_t = 1e-2)]
        dt: f64,
    },
    /// Maximise the Fisher growth rate over the detector settings.
    Optimize {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        #[arg(long, default_value_t = 25)]
        grid_phi: usize,
        #[arg(long, default_value_t = 11)]
        grid_s: usize,
        #[arg(long, default_value_t = 4)]
        zoom_levels: usize,
        #[arg(long, default_value_t = 200)]
        budget: usize,
    },
    /// Growth of the global quantum Fisher information.
    Qfi {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, value_enum, default_value_t = QfiMethod::Analytic)]
        method: QfiMethod,
        /// Run length; chosen from the slowest relaxation rate when omitted.
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long, default_value_t = 400)]
        samples: usize,
        /// Fock-space truncation.
        #[arg(long, default_value_t = 60)]
        dim: usize,
        /// Frequency step of the fidelity stencil.
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
        #[arg(long, default_value_t = 1e-2)]
        dt: f64,
    },
    /// Classical Fisher information of the photocurrent record.
    Fisher {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        detector: DetectorArgs,
        #[arg(long, default_value_t = 400.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-2)]
        dt: f64,
        #[arg(long, default_value_t = 100)]
        record_every: usize,
    },
    /// Conditional trajectories or ensemble statistics of the photocurrent.
    Trajectory {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        detector: DetectorArgs,
        #[arg(long, default_value_t = 100.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-2)]
        dt: f64,
        /// Seeds of individual trajectories to print.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
        /// Print ensemble statistics over this many trajectories instead.
        #[arg(long)]
        ensemble: Option<usize>,
        /// Base seed of the ensemble.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Probe times of the ensemble statistics.
        #[arg(long, value_parser = parse_grid, default_value = "20,50,100")]
        probe_times: Grid,
        /// Keep every n-th step of a raw trajectory.
        #[arg(long, default_value_t = 100)]
        record_every: usize,
    },
}

/// Everything needed to reproduce a run's numeric output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub format: Format,
    pub command: Command,
}

/// Table cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

fn opt(v: Option<f64>) -> Cell {
    v.map_or(Cell::Text(String::new()), Cell::Num)
}

/// Result table of one command.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Value,
    /// Rows whose status marks a numerical failure.
    pub failures: usize,
}

impl Report {
    fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new(), summary: json!({}), failures: 0 }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Serialises the report together with its run metadata.
    pub fn render(&self, config: &RunConfig) -> Result<Vec<u8>> {
        let meta = json!({
            "gdyne_version": env!("CARGO_PKG_VERSION"),
            "config": config,
            "summary": self.summary,
        });
        let io_err = |e: &dyn fmt::Display| Error::Config(format!("cannot write output: {e}"));
        match config.format {
            Format::Json => {
                let doc = json!({ "meta": meta, "columns": self.columns, "rows": self.rows });
                let mut out = serde_json::to_vec_pretty(&doc).map_err(|e| io_err(&e))?;
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => {
                let mut out = format!("# {meta}\n").into_bytes();
                {
                    let mut w = csv::Writer::from_writer(&mut out);
                    w.write_record(&self.columns).map_err(|e| io_err(&e))?;
                    for row in &self.rows {
                        w.write_record(row.iter().map(|c| c.to_string())).map_err(|e| io_err(&e))?;
                    }
                    w.flush().map_err(|e| io_err(&e))?;
                }
                Ok(out)
            }
        }
    }
}

fn status_of(e: &Error) -> String {
    e.kind().to_string()
}

fn steady(cmd: &Command, threads: usize) -> Result<Report> {
    let Command::Steady { omega, deps, kappa, s, phi, eta, dt, t_max, tol } = cmd else { unreachable!() };
    let opts = SteadyOptions { tol: *tol, dt: *dt, t_max: *t_max, ..Default::default() };
    let base = MeasurementParams::new(*s, *phi, 1.0)?;
    let mut r = Report::new(&["omega", "eta", "sigma_x", "sigma_p", "sigma_xp", "status"]);
    let mut located = Vec::new();
    for &e in eta.values() {
        let m = base.with_eta(e)?;
        let scan = divergence_scan(omega.values(), *deps, *kappa, &m, &opts, threads)?;
        for pt in &scan {
            let row = match &pt.outcome {
                Ok(st) => vec![pt.omega.into(), e.into(), st.sigma.xx.into(), st.sigma.pp.into(), st.sigma.xp.into(), "ok".into()],
                Err(Error::Diverged { sigma_p, .. }) => {
                    vec![pt.omega.into(), e.into(), opt(None), (*sigma_p).into(), opt(None), "diverged".into()]
                }
                Err(err) => {
                    r.failures += 1;
                    vec![pt.omega.into(), e.into(), opt(None), opt(None), opt(None), status_of(err).into()]
                }
            };
            r.push(row);
        }
        let diverged: Vec<f64> = scan.iter().filter(|p| p.diverged()).map(|p| p.omega).collect();
        located.push(json!({ "eta": e, "omega_divergence": locate_divergence(&scan), "diverged": diverged }));
    }
    r.summary = json!({ "divergence": located });
    Ok(r)
}

fn becp_detect(cmd: &Command, threads: usize) -> Result<Report> {
    let Command::BecpDetect { omega, deps, kappa, detector, t_probe, dt } = cmd else { unreachable!() };
    let m = detector.params()?;
    m.require_signal()?;
    let (omega_be, epsilon_be) = becp_from_angle(m.phi(), *kappa)?;
    let mut r = Report::new(&["delta_eps", "omega_min", "eyy_min", "omega_be"]);
    for &d in deps.values() {
        let prof = photocurrent_variance_profile(omega.values(), d, *kappa, &m, *t_probe, *dt, threads)?;
        r.push(vec![d.into(), prof.argmin.into(), prof.min_value.into(), omega_be.into()]);
    }
    r.summary = json!({ "omega_be": omega_be, "epsilon_be": epsilon_be });
    Ok(r)
}

fn optimize(cmd: &Command) -> Result<Report> {
    let Command::Optimize { point, eta, grid_phi, grid_s, zoom_levels, budget } = cmd else { unreachable!() };
    let p = point.params()?;
    let opts = OptimizeOptions { grid_phi: *grid_phi, grid_s: *grid_s, zoom_levels: *zoom_levels, budget: *budget, ..Default::default() };
    let res = optimize_measurement(&p, *eta, &opts)?;
    let k_g = qfi_rate_analytic(&p)?.k_g;
    let mut r = Report::new(&["s", "phi", "k_f"]);
    for t in &res.trace {
        r.push(vec![t.s.into(), t.phi.into(), t.k_f.into()]);
    }
    r.summary = json!({
        "s_opt": res.s_opt,
        "phi_opt": res.phi_opt,
        "k_F_opt": res.k_f_opt,
        "k_G": k_g,
        "ratio": res.k_f_opt / k_g,
        "s_at_bound": res.s_at_bound,
        "phi_at_bound": res.phi_at_bound,
    });
    Ok(r)
}

fn qfi(cmd: &Command) -> Result<Report> {
    let Command::Qfi { point, method, t_end, samples, dim, h, dt } = cmd else { unreachable!() };
    let p = point.params()?;
    match method {
        QfiMethod::Analytic => {
            let k = qfi_rate_analytic(&p)?;
            let mut r = Report::new(&["k_g", "k_g1", "k_g2", "k_g3", "k_g4", "imag_residue"]);
            r.push(vec![k.k_g.into(), k.k_g1.re.into(), k.k_g2.re.into(), k.k_g3.re.into(), k.k_g4.re.into(), k.imag_residue.into()]);
            r.summary = json!({ "method": "analytic", "k_G": k.k_g });
            Ok(r)
        }
        QfiMethod::Time => {
            let t_end = match t_end {
                Some(t) => *t,
                None => suggested_duration(&p)?,
            };
            let series = qfi_time_domain(&p, t_end, *samples)?;
            let fit = series.late_fit(0.4);
            let mut r = Report::new(&["t", "i_g"]);
            for (t, v) in series.times.iter().zip(&series.i_g) {
                r.push(vec![(*t).into(), (*v).into()]);
            }
            r.summary = json!({ "method": "time", "k_G": fit.slope, "r2": fit.r2 });
            Ok(r)
        }
        QfiMethod::Fock => {
            let t_end = match t_end {
                Some(t) => *t,
                None => suggested_duration(&p)?,
            };
            let opts = FockOptions { dim: *dim, dt: *dt, ..Default::default() };
            let every = ((t_end / dt) / *samples.max(&1) as f64).round().max(1.0) as usize;
            let fd = qfi_finite_difference(&p, *h, t_end, &opts, every)?;
            let mut r = Report::new(&["t", "i_g", "i_g_coarse", "i_g_fine"]);
            for i in 0..fd.times.len() {
                r.push(vec![fd.times[i].into(), fd.extrapolated[i].into(), fd.coarse[i].into(), fd.fine[i].into()]);
            }
            r.summary = json!({
                "method": "fock",
                "k_G": fd.fit.slope,
                "k_G_coarse": fd.coarse_fit.slope,
                "k_G_fine": fd.fine_fit.slope,
                "fit_window": fd.fit_window,
            });
            Ok(r)
        }
    }
}

fn fisher(cmd: &Command) -> Result<Report> {
    let Command::Fisher { point, detector, t_end, dt, record_every } = cmd else { unreachable!() };
    let p = point.params()?;
    let m = detector.params()?;
    let opts = FisherOptions { dt: *dt, t_end: *t_end, record_every: *record_every, ..Default::default() };
    let res = fisher_information(&p, &m, &opts)?;
    let mut r = Report::new(&["t", "F"]);
    for (t, f) in res.times.iter().zip(&res.fisher) {
        r.push(vec![(*t).into(), (*f).into()]);
    }
    r.summary = json!({
        "k_F": res.k_f,
        "k_F_fit": res.k_f_fit,
        "fit_window": res.fit_window,
        "fit_r2": res.fit_r2,
        "converged_at": res.converged_at,
    });
    Ok(r)
}

fn trajectory(cmd: &Command, threads: usize) -> Result<Report> {
    let Command::Trajectory { point, detector, t_end, dt, seeds, ensemble, seed, probe_times, record_every } = cmd else { unreachable!() };
    let p = point.params()?;
    let m = detector.params()?;
    m.require_signal()?;
    if let Some(n) = ensemble {
        let opts = EnsembleOptions { trajectories: *n, dt: *dt, seed: *seed, probe_times: probe_times.values().to_vec(), threads };
        let stats = simulate_ensemble(&p, &m, &opts)?;
        let mut r = Report::new(&["t", "yy_mean", "yy_se", "yy_moments", "z_score", "x_mean", "p_mean"]);
        let mut worst: f64 = 0.0;
        for s in &stats {
            let predicted = moments_at(&p, &m, s.t, *dt)?.eyy;
            let z = (s.yy_mean - predicted) / s.yy_se;
            worst = worst.max(z.abs());
            r.push(vec![s.t.into(), s.yy_mean.into(), s.yy_se.into(), predicted.into(), z.into(), s.r_mean[0].into(), s.r_mean[1].into()]);
        }
        r.summary = json!({ "trajectories": n, "seed": seed, "max_abs_z": worst });
        return Ok(r);
    }
    let mut r = Report::new(&["seed", "t", "x", "p", "y_x", "y_p"]);
    let every = (*record_every).max(1);
    for &sd in seeds {
        let tr = simulate_trajectory(&p, &m, &GaussianState::vacuum(), *t_end, *dt, sd)?;
        let n = tr.samples.len();
        for (k, s) in tr.samples.iter().enumerate() {
            if k % every == 0 || k + 1 == n {
                r.push(vec![sd.into(), s.t.into(), s.r[0].into(), s.r[1].into(), s.y[0].into(), s.y[1].into()]);
            }
        }
    }
    r.summary = json!({ "seeds": seeds });
    Ok(r)
}

/// Executes one command.
pub fn execute(cmd: &Command, threads: usize) -> Result<Report> {
    match cmd {
        Command::Steady { .. } => steady(cmd, threads),
        Command::BecpDetect { .. } => becp_detect(cmd, threads),
        Command::Optimize { .. } => optimize(cmd),
        Command::Qfi { .. } => qfi(cmd),
        Command::Fisher { .. } => fisher(cmd),
        Command::Trajectory { .. } => trajectory(cmd, threads),
    }
}

/// Reads the run configuration embedded in a CSV or JSON output file.
pub fn read_config(text: &str) -> Result<RunConfig> {
    let meta: Value = if let Some(rest) = text.strip_prefix('#') {
        let line = rest.lines().next().unwrap_or_default();
        serde_json::from_str(line).map_err(|e| Error::Config(format!("bad metadata line: {e}")))?
    } else {
        let doc: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("not a gdyne output file: {e}")))?;
        doc.get("meta").cloned().ok_or_else(|| Error::Config("missing meta object".into()))?
    };
    let config = meta.get("config").cloned().ok_or_else(|| Error::Config("missing config".into()))?;
    serde_json::from_value(config).map_err(|e| Error::Config(format!("bad config: {e}")))
}

/// Runs a configuration and returns the rendered output with its exit code.
pub fn run_config(config: &RunConfig, threads: usize) -> std::result::Result<(Vec<u8>, i32), Error> {
    let report = execute(&config.command, threads)?;
    let code = if report.failures > 0 { EXIT_NUMERICAL } else { EXIT_OK };
    Ok((report.render(config)?, code))
}

fn exit_code(e: &Error) -> i32 {
    if e.is_input_error() {
        EXIT_CONFIG
    } else {
        EXIT_NUMERICAL
    }
}

fn report_error(e: &Error) -> i32 {
    let msg = json!({ "error": e.kind(), "message": e.to_string() });
    eprintln!("{msg}");
    exit_code(e)
}

/// Entry point of the `gdyne` binary; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let threads = resolve_threads(cli.threads);
    let config = match cli.command {
        TopLevel::Run(command) => RunConfig { format: cli.format, command },
        TopLevel::Replay { file } => {
            let loaded = fs::read_to_string(&file)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", file.display())))
                .and_then(|t| read_config(&t));
            match loaded {
                Ok(c) => c,
                Err(e) => return report_error(&e),
            }
        }
    };
    let (bytes, code) = match run_config(&config, threads) {
        Ok(v) => v,
        Err(e) => return report_error(&e),
    };
    let written = match &cli.output {
        Some(path) => fs::write(path, &bytes),
        None => io::stdout().lock().write_all(&bytes),
    };
    if let Err(e) = written {
        return report_error(&Error::Config(format!("cannot write output: {e}")));
    }
    code
}

//! Run configuration, preset experiments and their file outputs.
//!
//! A run directory holds `manifest.toml`, `initial.csv`, `final.csv`, every
//! recorded snapshot under `snapshots/`, the regime timeline and the norm
//! series. Scenarios with two phases put each phase in its own subdirectory.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::curve::{Grid, PhysicalParams, Preset, SampledCurve, DEFAULT_DENSITY_JUMP};
use crate::diagnostics::{
    min_slope, norm_series, regime_pattern, regime_timeline, turning_report_with, Regime, SlopeMinimum,
    TangentPoint, NEAR_CRITICAL_SLOPE,
};
use crate::error::{Error, Result};
use crate::integrator::{
    detect_event_times_with, evolve_backward_with, evolve_forward_with, BackwardOptions, Dynamics, Event,
    ForwardOptions, StepControl, Trajectory,
};
use crate::lemma::lemma_report;
use crate::spectral::{FilterSpec, ThresholdScale};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ScenarioId {
    /// `SEED_T0` evolved backward with threshold smoothing.
    #[default]
    BackwardSeed,
    /// Pure forward run from an exported backward terminal snapshot.
    ForwardRerun,
    /// `CONJ_T0` forward until it turns over.
    ConjTurnover,
    /// Full report on the piecewise-polynomial construction.
    LemmaVerify,
    /// Tilted seed, short forward and backward runs.
    DeltaTilt,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 5] = [
        ScenarioId::BackwardSeed,
        ScenarioId::ForwardRerun,
        ScenarioId::ConjTurnover,
        ScenarioId::LemmaVerify,
        ScenarioId::DeltaTilt,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioId::BackwardSeed => "BACKWARD_SEED",
            ScenarioId::ForwardRerun => "FORWARD_RERUN",
            ScenarioId::ConjTurnover => "CONJ_TURNOVER",
            ScenarioId::LemmaVerify => "LEMMA_VERIFY",
            ScenarioId::DeltaTilt => "DELTA_TILT",
        }
    }

    /// End time when the configuration leaves it open. For `DELTA_TILT` this
    /// is the length of each of the two runs.
    pub fn default_t_final(&self) -> f64 {
        match self {
            ScenarioId::BackwardSeed => -4.92e-2,
            ScenarioId::ForwardRerun => 6e-2,
            ScenarioId::ConjTurnover => 0.3,
            ScenarioId::LemmaVerify => 0.0,
            ScenarioId::DeltaTilt => 1e-2,
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase().replace('-', "_");
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.as_str() == key)
            .ok_or_else(|| Error::invalid("scenario", format!("unknown scenario `{s}`")))
    }
}

/// Contents of a run configuration file (TOML). Every key is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioId,
    /// Grid size (even, at least 16).
    pub n: usize,
    /// `rho_minus - rho_plus`.
    pub density_jump: f64,
    /// Backward step, and forward step unless `[step]` says otherwise.
    pub dt: f64,
    /// Smoothing threshold for backward runs.
    pub eps: f64,
    /// Whether `eps` bounds raw FFT sums or normalized coefficients.
    pub threshold: ThresholdScale,
    /// Backward steps between smoothing passes.
    pub smooth_every: usize,
    /// End time; scenario default when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    /// Time between recorded snapshots; `30 dt` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<f64>,
    /// Width of the CRITICAL band for slope classification.
    pub slope_tol: f64,
    /// Tilt of the tangent at the origin for `DELTA_TILT`.
    pub delta: f64,
    /// Relative quadrature tolerance for `LEMMA_VERIFY`.
    pub quad_tol: f64,
    /// Starting snapshot for `FORWARD_RERUN`; when absent a backward seed run
    /// is performed first into `<out_dir>/seed`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Forward step control; fixed steps of `dt` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<StepControl>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioId::default(),
            n: 2048,
            density_jump: DEFAULT_DENSITY_JUMP,
            dt: 4e-5,
            eps: 1e-6,
            threshold: ThresholdScale::default(),
            smooth_every: 1,
            t_final: None,
            snapshot_every: None,
            slope_tol: crate::diagnostics::DEFAULT_SLOPE_TOL,
            delta: 0.05,
            quad_tol: 1e-10,
            input: None,
            out_dir: PathBuf::from("out"),
            step: None,
        }
    }
}

fn require(ok: bool, name: &'static str, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(name, reason))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        Grid::new(self.n)?;
        PhysicalParams::new(self.density_jump)?;
        require(self.dt.is_finite() && self.dt > 0.0, "dt", "must be finite and positive")?;
        require(self.eps.is_finite() && self.eps >= 0.0, "eps", "must be finite and nonnegative")?;
        require(self.smooth_every >= 1, "smooth_every", "must be at least 1")?;
        require(
            self.slope_tol.is_finite() && self.slope_tol >= 0.0,
            "slope_tol",
            "must be finite and nonnegative",
        )?;
        require(self.delta > 0.0 && self.delta < 1.0, "delta", "must lie in (0, 1)")?;
        require(self.quad_tol > 0.0 && self.quad_tol < 1.0, "quad_tol", "must lie in (0, 1)")?;
        if let Some(s) = self.snapshot_every {
            require(s.is_finite() && s > 0.0, "snapshot_every", "must be finite and positive")?;
        }
        if let Some(step) = &self.step {
            step.validate()?;
        }
        let t = self.t_final();
        require(t.is_finite(), "t_final", "must be finite")?;
        match self.scenario {
            ScenarioId::BackwardSeed => require(t < 0.0, "t_final", "must be negative for a backward run"),
            ScenarioId::ConjTurnover | ScenarioId::DeltaTilt => require(t > 0.0, "t_final", "must be positive"),
            ScenarioId::ForwardRerun | ScenarioId::LemmaVerify => Ok(()),
        }
    }

    pub fn t_final(&self) -> f64 {
        self.t_final.unwrap_or_else(|| self.scenario.default_t_final())
    }

    pub fn snapshot_every(&self) -> f64 {
        self.snapshot_every.unwrap_or(30.0 * self.dt)
    }

    pub fn params(&self) -> Result<PhysicalParams> {
        PhysicalParams::new(self.density_jump)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n)
    }

    pub fn forward_control(&self) -> StepControl {
        self.step.unwrap_or(StepControl::fixed(self.dt))
    }

    fn backward_options(&self, t_start: f64, t_final: f64) -> Result<BackwardOptions> {
        Ok(BackwardOptions {
            dynamics: Dynamics::new(self.params()?),
            t_start,
            t_final,
            dt: self.dt,
            eps: self.eps,
            threshold: self.threshold,
            smooth_every: self.smooth_every,
            snapshot_every_steps: ((self.snapshot_every() / self.dt).round() as usize).max(1),
        })
    }

    fn forward_options(&self, t_start: f64, t_end: f64, stop_when_unstable: bool) -> Result<ForwardOptions> {
        Ok(ForwardOptions {
            dynamics: Dynamics::new(self.params()?),
            t_start,
            t_end,
            control: self.forward_control(),
            snapshot_every: self.snapshot_every(),
            stop_when_unstable,
        })
    }

    /// Structured-text form, suitable as a configuration file.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is plain data")
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates configuration text; `path` only labels errors.
pub fn parse_config(text: &str, path: &Path) -> Result<RunConfig> {
    let config: RunConfig = toml::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}

const SNAPSHOT_HEADER: &str = "alpha,z1,z2,dz1,dz2,p1";

/// Writes one row per node: `alpha, z1, z2, dz1, dz2, p1` with 17 significant
/// digits. The trailing `p1 = z1 - alpha` column makes re-import bitwise exact.
pub fn export_snapshot(curve: &SampledCurve, time: f64, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let filter = FilterSpec::default();
    let (dz1, dz2) = (curve.dz1(&filter), curve.dz2(&filter));
    let z1 = curve.z1();
    let grid = curve.grid();
    let mut w = BufWriter::new(fs::File::create(path).map_err(io)?);
    writeln!(w, "# t = {time:.16e}").map_err(io)?;
    writeln!(w, "# n = {}", grid.n()).map_err(io)?;
    writeln!(w, "{SNAPSHOT_HEADER}").map_err(io)?;
    for i in 0..grid.n() {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            grid.node(i),
            z1[i],
            curve.z2()[i],
            dz1[i],
            dz2[i],
            curve.p1()[i]
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub curve: SampledCurve,
}

pub fn import_snapshot(path: impl AsRef<Path>) -> Result<Snapshot> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut time = None;
    let mut header_seen = false;
    let mut rows: Vec<(usize, f64, f64, f64)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("t =") {
                let t = v
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| parse_err(line_no, format!("bad time stamp: {e}")))?;
                time = Some(t);
            }
            continue;
        }
        if !header_seen {
            if line.replace(' ', "") != SNAPSHOT_HEADER {
                return Err(parse_err(line_no, format!("expected header `{SNAPSHOT_HEADER}`")));
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 6 {
            return Err(parse_err(line_no, format!("expected 6 columns, found {}", fields.len())));
        }
        let num = |i: usize| {
            fields[i]
                .parse::<f64>()
                .map_err(|e| parse_err(line_no, format!("column {}: {e}", i + 1)))
        };
        rows.push((line_no, num(0)?, num(2)?, num(5)?));
    }
    let time = time.ok_or_else(|| parse_err(1, "missing `# t = ...` time stamp".into()))?;
    let grid = Grid::new(rows.len()).map_err(|_| parse_err(0, format!("{} rows do not form a grid", rows.len())))?;
    let tol = 1e-12 * std::f64::consts::PI;
    let mut p1 = Vec::with_capacity(rows.len());
    let mut z2 = Vec::with_capacity(rows.len());
    for (i, &(line_no, alpha, b, c)) in rows.iter().enumerate() {
        if (alpha - grid.node(i)).abs() > tol {
            return Err(parse_err(line_no, format!("alpha {alpha} is not grid node {i}")));
        }
        z2.push(b);
        p1.push(c);
    }
    Ok(Snapshot {
        time,
        curve: SampledCurve::new(grid, p1, z2)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RunStatus {
    Ok,
    /// The numerics broke down or a verification check failed.
    NumericalFailure,
    /// Input or environment problem (unreadable file, I/O failure).
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEvent {
    /// Which run of the scenario produced the event.
    pub phase: String,
    pub time: f64,
    pub kind: crate::integrator::EventKind,
}

/// Terminal state of one phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub phase: String,
    pub t_start: f64,
    pub t_end: f64,
    pub snapshots: usize,
    pub min_slope: f64,
    pub argmin: f64,
    pub regime: Regime,
    pub regime_pattern: Vec<Regime>,
    pub tangent_points: Vec<TangentPoint>,
    pub near_critical_minima: Vec<SlopeMinimum>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub message: String,
    pub scenario: ScenarioId,
    pub version: String,
    pub git_revision: String,
    pub wall_time_s: f64,
    /// Times depend on the unstated density convention of the reference runs.
    pub time_convention: String,
    pub files: Vec<String>,
    pub events: Vec<ManifestEvent>,
    pub phases: Vec<PhaseSummary>,
    pub config: RunConfig,
}

impl RunManifest {
    fn new(config: &RunConfig) -> Self {
        Self {
            status: RunStatus::Ok,
            message: String::new(),
            scenario: config.scenario,
            version: env!("CARGO_PKG_VERSION").to_string(),
            git_revision: option_env!("MUSKAT_GIT_REVISION").unwrap_or("unknown").to_string(),
            wall_time_s: 0.0,
            time_convention: format!(
                "density_jump = {}, kernel prefactor (density_jump / 4 pi) = {:.9e}; times are convention-dependent",
                config.density_jump,
                config.density_jump / (4.0 * std::f64::consts::PI)
            ),
            files: Vec::new(),
            events: Vec::new(),
            phases: Vec::new(),
            config: config.clone(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest is plain data")
    }

    pub fn phase(&self, name: &str) -> Option<&PhaseSummary> {
        self.phases.iter().find(|p| p.phase == name)
    }

    fn fail(&mut self, status: RunStatus, message: impl Into<String>) {
        if self.status == RunStatus::Ok {
            self.status = status;
        }
        let message = message.into();
        if self.message.is_empty() {
            self.message = message;
        } else {
            self.message = format!("{}; {message}", self.message);
        }
    }
}

pub const MANIFEST_FILE: &str = "manifest.toml";
pub const FINAL_SNAPSHOT_FILE: &str = "final.csv";

struct RunDir<'a> {
    root: &'a Path,
    files: Vec<String>,
}

impl<'a> RunDir<'a> {
    fn path(&mut self, rel: impl AsRef<Path>) -> Result<PathBuf> {
        let rel = rel.as_ref();
        let full = self.root.join(rel);
        if let Some(parent) = full.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        self.files.push(rel.to_string_lossy().replace('\\', "/"));
        Ok(full)
    }

    fn write_text(&mut self, rel: impl AsRef<Path>, text: &str) -> Result<()> {
        let path = self.path(rel)?;
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    fn snapshot(&mut self, rel: impl AsRef<Path>, curve: &SampledCurve, time: f64) -> Result<()> {
        let path = self.path(rel)?;
        export_snapshot(curve, time, &path)
    }
}

fn join(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}/{name}")
    }
}

/// Writes snapshots, timeline and norms of `traj` under `prefix`, records its
/// events and summary in the manifest.
fn record_phase(
    dir: &mut RunDir<'_>,
    manifest: &mut RunManifest,
    phase: &str,
    prefix: &str,
    traj: &Trajectory,
    slope_tol: f64,
) -> Result<()> {
    let filter = traj.dynamics.rhs.filter;
    for (k, (t, c)) in traj.times.iter().zip(&traj.snapshots).enumerate() {
        dir.snapshot(join(prefix, &format!("snapshots/snap_{k:05}.csv")), c, *t)?;
    }
    let (t_end, last) = traj.final_state();
    dir.snapshot(join(prefix, FINAL_SNAPSHOT_FILE), last, t_end)?;

    let timeline = regime_timeline(traj, slope_tol);
    let mut text = String::from("start,end,regime\n");
    for iv in &timeline {
        text.push_str(&format!("{:.16e},{:.16e},{}\n", iv.start, iv.end, iv.regime.as_str()));
    }
    dir.write_text(join(prefix, "timeline.csv"), &text)?;

    let norms = norm_series(traj);
    let mut text = String::from("time,sup_f,sup_slope,min_slope,argmin,regime\n");
    for (k, c) in traj.snapshots.iter().enumerate() {
        let m = min_slope(c, &filter);
        let slope = norms.sup_slope[k].map_or(String::new(), |s| format!("{s:.16e}"));
        text.push_str(&format!(
            "{:.16e},{:.16e},{},{:.16e},{:.16e},{}\n",
            norms.times[k],
            norms.sup_f[k],
            slope,
            m.value,
            m.alpha,
            Regime::classify(m.value, slope_tol).as_str()
        ));
    }
    dir.write_text(join(prefix, "norms.csv"), &text)?;

    let mut events: Vec<Event> = detect_event_times_with(traj, slope_tol);
    events.extend(traj.events.iter().copied());
    for e in events {
        manifest.events.push(ManifestEvent {
            phase: phase.to_string(),
            time: e.time,
            kind: e.kind,
        });
    }
    let report = turning_report_with(last, slope_tol, &filter);
    manifest.phases.push(PhaseSummary {
        phase: phase.to_string(),
        t_start: traj.times[0],
        t_end,
        snapshots: traj.len(),
        min_slope: report.min_slope,
        argmin: report.argmin,
        regime: report.regime,
        regime_pattern: regime_pattern(&timeline),
        near_critical_minima: report.minima_below(NEAR_CRITICAL_SLOPE),
        tangent_points: report.tangent_points,
    });
    if let Some(f) = traj.failure() {
        let detail = traj.failure_detail.clone().unwrap_or_default();
        manifest.fail(
            RunStatus::NumericalFailure,
            format!("{phase}: {:?} at t = {:e}: {detail}", f.kind, f.time),
        );
    }
    Ok(())
}

fn run_backward_seed(config: &RunConfig, dir: &mut RunDir<'_>, m: &mut RunManifest, prefix: &str) -> Result<()> {
    let curve = Preset::SeedT0.sample(config.grid()?)?;
    dir.snapshot(join(prefix, "initial.csv"), &curve, 0.0)?;
    let traj = evolve_backward_with(&curve, &config.backward_options(0.0, config.t_final())?)?;
    record_phase(dir, m, "backward", prefix, &traj, config.slope_tol)
}

fn run_forward_rerun(config: &RunConfig, dir: &mut RunDir<'_>, m: &mut RunManifest) -> Result<()> {
    let input = match &config.input {
        Some(path) => path.clone(),
        None => {
            let seed = RunConfig {
                scenario: ScenarioId::BackwardSeed,
                t_final: None,
                ..config.clone()
            };
            run_backward_seed(&seed, dir, m, "seed")?;
            if m.status != RunStatus::Ok {
                return Ok(());
            }
            dir.root.join("seed").join(FINAL_SNAPSHOT_FILE)
        }
    };
    let start = import_snapshot(&input)?;
    let t_end = config.t_final();
    if !(t_end > start.time) {
        return Err(Error::invalid(
            "t_final",
            format!("must exceed the snapshot time {}", start.time),
        ));
    }
    dir.snapshot("initial.csv", &start.curve, start.time)?;
    let traj = evolve_forward_with(&start.curve, &config.forward_options(start.time, t_end, false)?)?;
    record_phase(dir, m, "forward", "", &traj, config.slope_tol)
}

fn run_conj_turnover(config: &RunConfig, dir: &mut RunDir<'_>, m: &mut RunManifest) -> Result<()> {
    let curve = Preset::ConjT0.sample(config.grid()?)?;
    dir.snapshot("initial.csv", &curve, 0.0)?;
    let traj = evolve_forward_with(&curve, &config.forward_options(0.0, config.t_final(), true)?)?;
    record_phase(dir, m, "forward", "", &traj, config.slope_tol)
}

fn run_delta_tilt(config: &RunConfig, dir: &mut RunDir<'_>, m: &mut RunManifest) -> Result<()> {
    let curve = Preset::DeltaTilt(config.delta).sample(config.grid()?)?;
    dir.snapshot("initial.csv", &curve, 0.0)?;
    let span = config.t_final();
    let fwd = evolve_forward_with(&curve, &config.forward_options(0.0, span, false)?)?;
    record_phase(dir, m, "forward", "forward", &fwd, config.slope_tol)?;
    let bwd = evolve_backward_with(&curve, &config.backward_options(0.0, -span)?)?;
    record_phase(dir, m, "backward", "backward", &bwd, config.slope_tol)
}

fn run_lemma(config: &RunConfig, dir: &mut RunDir<'_>, m: &mut RunManifest) -> Result<()> {
    let report = lemma_report(config.quad_tol)?;
    dir.write_text("lemma_report.toml", &report.to_text())?;
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.as_str())
        .collect();
    if !failed.is_empty() {
        m.fail(RunStatus::NumericalFailure, format!("lemma checks failed: {}", failed.join(", ")));
    }
    Ok(())
}

/// Runs one scenario into `config.out_dir` and writes its manifest, also when
/// the run fails. Numerical failures are reported through the manifest status;
/// `Err` is returned only for invalid configurations and I/O problems.
pub fn run_scenario(config: &RunConfig) -> Result<RunManifest> {
    config.validate()?;
    let root = config.out_dir.as_path();
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let clock = Instant::now();
    let mut manifest = RunManifest::new(config);
    let mut dir = RunDir {
        root,
        files: Vec::new(),
    };
    let outcome = match config.scenario {
        ScenarioId::BackwardSeed => run_backward_seed(config, &mut dir, &mut manifest, ""),
        ScenarioId::ForwardRerun => run_forward_rerun(config, &mut dir, &mut manifest),
        ScenarioId::ConjTurnover => run_conj_turnover(config, &mut dir, &mut manifest),
        ScenarioId::LemmaVerify => run_lemma(config, &mut dir, &mut manifest),
        ScenarioId::DeltaTilt => run_delta_tilt(config, &mut dir, &mut manifest),
    };
    if let Err(e) = &outcome {
        let status = if e.is_numerical() {
            RunStatus::NumericalFailure
        } else {
            RunStatus::Error
        };
        manifest.fail(status, e.to_string());
    }
    manifest.wall_time_s = clock.elapsed().as_secs_f64();
    manifest.files = std::mem::take(&mut dir.files);
    manifest.files.push(MANIFEST_FILE.to_string());
    let path = root.join(MANIFEST_FILE);
    fs::write(&path, manifest.to_toml()).map_err(|e| Error::io(&path, e))?;
    match outcome {
        Err(e) if !e.is_numerical() => Err(e),
        _ => Ok(manifest),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_defaults() {
        let c = parse_config("", Path::new("empty.toml")).unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!((c.n, c.dt, c.eps), (2048, 4e-5, 1e-6));
        assert_eq!(c.t_final(), -4.92e-2);
    }

    #[test]
    fn odd_grid_rejected_naming_field() {
        let err = parse_config("n = 5\n", Path::new("c.toml")).unwrap_err();
        assert!(matches!(err, Error::InvalidGrid(5)), "{err}");
        let err = parse_config("dt = -1.0\n", Path::new("c.toml")).unwrap_err();
        assert!(err.to_string().contains("`dt`"), "{err}");
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = parse_config("n = 512\n\ndt = \"fast\"\n", Path::new("c.toml")).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other}"),
        }
        let err = parse_config("n = 512\nbogus = 1\n", Path::new("c.toml")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn step_section_and_scenario_names() {
        let text = "scenario = \"CONJ_TURNOVER\"\nn = 64\n[step]\nmode = \"adaptive\"\nrel_tol = 1e-8\nabs_tol = 1e-10\nmax_dt = 1e-3\ninitial_dt = 1e-5\n";
        let c = parse_config(text, Path::new("c.toml")).unwrap();
        assert_eq!(c.scenario, ScenarioId::ConjTurnover);
        assert!(matches!(c.forward_control(), StepControl::Adaptive { .. }));
        assert_eq!(parse_config(&c.to_toml(), Path::new("echo")).unwrap(), c);
        assert_eq!("delta-tilt".parse::<ScenarioId>().unwrap(), ScenarioId::DeltaTilt);
        assert!("NOPE".parse::<ScenarioId>().is_err());
    }

    #[test]
    fn scenario_time_signs_checked() {
        assert!(parse_config("t_final = 0.1\n", Path::new("c")).is_err());
        assert!(parse_config("scenario = \"CONJ_TURNOVER\"\nt_final = -0.1\n", Path::new("c")).is_err());
    }

    #[test]
    fn snapshot_round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(64).unwrap();
        let c = Preset::SeedT0.sample(g).unwrap();
        let path = dir.path().join("s.csv");
        export_snapshot(&c, -4.92e-2, &path).unwrap();
        let back = import_snapshot(&path).unwrap();
        assert_eq!(back.time, -4.92e-2);
        assert_eq!(back.curve, c);
    }

    #[test]
    fn flat_row_zero() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("flat.csv");
        export_snapshot(&SampledCurve::flat(Grid::new(16).unwrap()), 0.0, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let row: Vec<f64> = text
            .lines()
            .nth(3)
            .unwrap()
            .split(',')
            .map(|s| s.parse().unwrap())
            .collect();
        let pi = std::f64::consts::PI;
        assert_eq!(row, vec![-pi, -pi, 0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn import_reports_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "# t = 0\nalpha,z1,z2,dz1,dz2,p1\n1,2,3\n").unwrap();
        assert!(matches!(import_snapshot(&path), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(
            import_snapshot(dir.path().join("missing.csv")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn lemma_scenario_writes_report_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig {
            scenario: ScenarioId::LemmaVerify,
            out_dir: dir.path().to_path_buf(),
            ..RunConfig::default()
        };
        let m = run_scenario(&config).unwrap();
        assert_eq!(m.status, RunStatus::Ok, "{}", m.message);
        let report = fs::read_to_string(dir.path().join("lemma_report.toml")).unwrap();
        assert!(report.contains("min_admissible_r = 18"));
        let manifest = fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
        let parsed: RunManifest = toml::from_str(&manifest).unwrap();
        assert_eq!(parsed.scenario, ScenarioId::LemmaVerify);
    }

    #[test]
    fn failing_run_still_writes_manifest_and_initial() {
        let dir = tempfile::tempdir().unwrap();
        // a huge backward step on sharp data breaks down immediately
        let config = RunConfig {
            scenario: ScenarioId::ConjTurnover,
            n: 32,
            dt: 10.0,
            t_final: Some(20.0),
            out_dir: dir.path().to_path_buf(),
            ..RunConfig::default()
        };
        let m = run_scenario(&config).unwrap();
        assert!(dir.path().join(MANIFEST_FILE).exists());
        assert!(dir.path().join("initial.csv").exists());
        assert_ne!(m.status, RunStatus::Ok);
    }
}

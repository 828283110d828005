//! Command-line front end.
//!
//! Every subcommand accepts `--config FILE`, a JSON object whose keys are the
//! long flag names in snake case. Values given on the command line win over
//! the file, which wins over the built-in defaults.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::analysis::{
    decay_fit, default_rate_config, envelope_check, rate_vs_n_study, smooth_initial_state, tail_window, DecayModel,
};
use crate::boundary::{reconstruct_field, GridSpec, TopCoefficients, DEFAULT_SIDE_MODES};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::io::{fmt_f64, read_json};
use crate::profile::{
    mean_residual, sc_check, strategic_check, ussd_margin, ScVerdict, StrategicVerdict, WavemakerProfile,
};
use crate::simulator::{
    default_dt, simulate_closed, simulate_open, Feedback, InputSignal, Integrator, ModalState, RunSummary, SimConfig,
    TimeSeries, DEFAULT_N_MODES,
};
use crate::spectral::{gap_products, lambda, mu};

#[derive(Debug, Parser)]
#[command(
    name = "waterwave",
    version,
    about = "Modal water-wave simulation and stabilization diagnostics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues, frequencies and gap products for k = 1..=kmax.
    Spectrum(SpectrumArgs),
    /// Zero-mean, strategic, margin and sufficient-condition report for a profile.
    CheckProfile(CheckProfileArgs),
    /// Run the open or closed loop and export the sampled series.
    Simulate(SimulateArgs),
    /// Fit an exponential or power-law decay to an exported series.
    Decay(DecayArgs),
    /// Smallest polynomial envelope constant for an exported series.
    Envelope(EnvelopeArgs),
    /// Reconstruct the potential's time derivative on a grid.
    Field(FieldArgs),
    /// Tail decay rate against truncation size.
    RateStudy(RateStudyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    /// zeta_k = w_k = 1/sqrt(N)
    Spread,
    /// zeta_k = k^(-p), w = 0, unit domain norm
    Smooth,
    /// (zeta_k, w_k) = (1, 0) on one mode
    Mode,
    Zero,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    kmax: Option<usize>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckProfileArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// h1, h2, nonstrategic, or a CSV file with header `y,h`.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    eps: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    n_modes: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t_final: Option<f64>,
    #[arg(long, value_enum)]
    feedback: Option<FeedbackArg>,
    #[arg(long, value_enum)]
    integrator: Option<IntegratorArg>,
    #[arg(long)]
    sample_every: Option<usize>,
    #[arg(long)]
    record_modes: Option<usize>,
    /// Initial data when no state file is given.
    #[arg(long, value_enum)]
    initial: Option<InitialKind>,
    /// Mode index for `--initial mode`.
    #[arg(long)]
    mode: Option<usize>,
    /// Decay power for `--initial smooth`.
    #[arg(long, allow_negative_numbers = true)]
    decay_power: Option<f64>,
    /// JSON `{"zeta": [...], "w": [...]}`; overrides `--initial`.
    #[arg(long)]
    initial_state: Option<PathBuf>,
    /// JSON list of input pieces; only with `--feedback none`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Series CSV; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    final_state: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeedbackArg {
    Collocated,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorArg {
    Splitting,
    Rk4Crosscheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    Exponential,
    PowerLaw,
}

#[derive(Debug, Args)]
pub struct DecayArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    series: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Window start; with `--t-hi` absent too, the last half of the samples.
    #[arg(long, allow_negative_numbers = true)]
    t_lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t_hi: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnvelopeArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    series: Option<PathBuf>,
    /// Graph norm of the initial state.
    #[arg(long, allow_negative_numbers = true)]
    domain_norm0: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    state: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    u_now: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    side_modes: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RateStudyArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    profile: Option<String>,
    /// Comma-separated, strictly increasing truncation sizes.
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t_final: Option<f64>,
    #[arg(long)]
    sample_every: Option<usize>,
    /// Run the sweep on the calling thread only.
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Full per-N report including the eigenvalue oracle, as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// config-file merging

struct Layer(Map<String, Value>);

impl Layer {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Layer(Map::new()));
        };
        match read_json::<Value>(path)? {
            Value::Object(map) => Ok(Layer(map)),
            _ => Err(Error::Config(format!(
                "{}: config file must hold a JSON object",
                path.display()
            ))),
        }
    }

    /// The flag if given, else the file entry `key`.
    fn pick<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.0
            .get(key)
            .map(|v| serde_json::from_value(v.clone()).map_err(|e| Error::Config(format!("config key '{key}': {e}"))))
            .transpose()
    }

    fn require<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<T> {
        self.pick(flag, key)?
            .ok_or_else(|| Error::Config(format!("missing --{}", key.replace('_', "-"))))
    }
}

// ---------------------------------------------------------------------------
// helpers

/// Resolves a profile selector: a built-in name or a CSV path.
pub fn load_profile(selector: &str) -> Result<WavemakerProfile> {
    match selector {
        "h1" | "linear" => Ok(WavemakerProfile::linear()),
        "h2" | "cosine" => Ok(WavemakerProfile::cosine()),
        "nonstrategic" | "hns" => Ok(WavemakerProfile::nonstrategic()),
        path if Path::new(path).is_file() => WavemakerProfile::from_csv(Path::new(path)),
        other => Err(Error::Profile(format!(
            "unknown profile '{other}': expected h1, h2, nonstrategic or a CSV file"
        ))),
    }
}

fn emit(output: Option<&Path>, body: &[u8]) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, body).map_err(|e| Error::io(path, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body)
                .and_then(|_| out.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn emit_json<T: Serialize>(output: Option<&Path>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))? + "\n";
    emit(output, text.as_bytes())
}

// ---------------------------------------------------------------------------
// commands

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::CheckProfile(a) => cmd_check_profile(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Decay(a) => cmd_decay(a),
        Command::Envelope(a) => cmd_envelope(a),
        Command::Field(a) => cmd_field(a),
        Command::RateStudy(a) => cmd_rate_study(a),
    }
}

fn cmd_spectrum(a: SpectrumArgs) -> Result<()> {
    let cfg = Layer::load(a.config.as_deref())?;
    let kmax: usize = cfg.require(a.kmax, "kmax")?;
    let output: Option<PathBuf> = cfg.pick(a.output, "output")?;
    if kmax < 2 {
        return Err(Error::domain(format!("spectrum needs kmax >= 2, got {kmax}")));
    }
    let p = gap_products(kmax + 1)?;
    let mut buf = String::from("k,lambda,mu,gap_product\n");
    for k in 1..=kmax {
        let ki = k as i64;
        buf.push_str(&format!(
            "{k},{},{},{}\n",
            fmt_f64(lambda(ki)?),
            fmt_f64(mu(ki)?),
            fmt_f64(p[k - 1])
        ));
    }
    emit(output.as_deref(), buf.as_bytes())
}

#[derive(Serialize)]
struct ProfileReport {
    profile: String,
    mean_residual: f64,
    strategic: StrategicVerdict,
    ussd: UssdSummary,
    sc: ScVerdict,
    eps: f64,
}

#[derive(Serialize)]
struct UssdSummary {
    kmax: usize,
    min_margin: f64,
    argmin: usize,
    tail_margin: f64,
}

fn cmd_check_profile(a: CheckProfileArgs) -> Result<()> {
    let cfg = Layer::load(a.config.as_deref())?;
    let selector: String = cfg.require(a.profile, "profile")?;
    let kmax = cfg.pick(a.kmax, "kmax")?.unwrap_or(50);
    let eps = cfg.pick(a.eps, "eps")?.unwrap_or(0.1);
    let output: Option<PathBuf> = cfg.pick(a.output, "output")?;
    let h = load_profile(&selector)?;
    h.ensure_zero_mean()?;
    let margins = ussd_margin(&h, kmax)?;
    let report = ProfileReport {
        profile: h.name().to_owned(),
        mean_residual: mean_residual(&h),
        strategic: strategic_check(&h, kmax)?,
        ussd: UssdSummary {
            kmax,
            min_margin: margins.min,
            argmin: margins.argmin,
            tail_margin: margins.tail,
        },
        sc: sc_check(&h, eps)?,
        eps,
    };
    emit_json(output.as_deref(), &report)
}

#[derive(Serialize)]
struct CliRunSummary<'a> {
    profile: &'a str,
    initial_state: String,
    input: Option<&'a InputSignal>,
    #[serde(flatten)]
    run: RunSummary,
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let cfg = Layer::load(a.config.as_deref())?;
    let selector: String = cfg.pick(a.profile, "profile")?.unwrap_or_else(|| "h1".into());
    let n_modes = cfg.pick(a.n_modes, "n_modes")?.unwrap_or(DEFAULT_N_MODES);
    let t_final: f64 = cfg.require(a.t_final, "t_final")?;
    let dt = cfg.pick(a.dt, "dt")?.unwrap_or_else(|| default_dt(n_modes));
    let feedback = match cfg.pick(a.feedback, "feedback")?.unwrap_or(FeedbackArg::Collocated) {
        FeedbackArg::Collocated => Feedback::Collocated,
        FeedbackArg::None => Feedback::None,
    };
    let integrator = match cfg
        .pick(a.integrator, "integrator")?
        .unwrap_or(IntegratorArg::Splitting)
    {
        IntegratorArg::Splitting => Integrator::Splitting,
        IntegratorArg::Rk4Crosscheck => Integrator::Rk4Crosscheck,
    };
    let config = SimConfig {
        n_modes,
        dt,
        t_final,
        feedback,
        integrator,
        sample_every: cfg.pick(a.sample_every, "sample_every")?.unwrap_or(1),
        record_modes: cfg.pick(a.record_modes, "record_modes")?.unwrap_or(0),
    };
    config.validate()?;

    let state_file: Option<PathBuf> = cfg.pick(a.initial_state, "initial_state")?;
    let (state0, initial_desc) = match state_file {
        Some(path) => {
            let s: ModalState = read_json(&path)?;
            s.validate()?;
            if s.n_modes() != n_modes {
                return Err(Error::Config(format!(
                    "{}: state has {} modes but --n-modes is {n_modes}",
                    path.display(),
                    s.n_modes()
                )));
            }
            (s, path.display().to_string())
        }
        None => {
            let kind = cfg.pick(a.initial, "initial")?.unwrap_or(InitialKind::Spread);
            match kind {
                InitialKind::Spread => {
                    let v = 1.0 / (n_modes as f64).sqrt();
                    (ModalState::new(vec![v; n_modes], vec![v; n_modes])?, "spread".into())
                }
                InitialKind::Smooth => {
                    let p = cfg.pick(a.decay_power, "decay_power")?.unwrap_or(3.0);
                    (smooth_initial_state(n_modes, p)?, format!("smooth(decay_power = {p})"))
                }
                InitialKind::Mode => {
                    let k = cfg.pick(a.mode, "mode")?.unwrap_or(1);
                    if k < 1 || k > n_modes {
                        return Err(Error::Config(format!("--mode {k} outside 1..={n_modes}")));
                    }
                    (ModalState::single_mode(n_modes, k, 1.0, 0.0), format!("mode({k})"))
                }
                InitialKind::Zero => (ModalState::zeros(n_modes), "zero".into()),
            }
        }
    };

    let input_file: Option<PathBuf> = cfg.pick(a.input, "input")?;
    let input = input_file.as_deref().map(read_json::<InputSignal>).transpose()?;
    let h = load_profile(&selector)?;
    let run = match feedback {
        Feedback::Collocated => {
            if input.is_some() {
                return Err(Error::Config(
                    "an input signal applies only with --feedback none".into(),
                ));
            }
            simulate_closed(&state0, &h, &config)?
        }
        Feedback::None => {
            let u = input.clone().unwrap_or_else(InputSignal::zero);
            simulate_open(&state0, &h, &u, &config)?
        }
    };

    let output: Option<PathBuf> = cfg.pick(a.output, "output")?;
    let mut buf = Vec::new();
    run.series.write_csv(&mut buf).expect("in-memory write");
    emit(output.as_deref(), &buf)?;
    if let Some(path) = cfg.pick::<PathBuf>(a.summary, "summary")? {
        let summary = CliRunSummary {
            profile: h.name(),
            initial_state: initial_desc,
            input: input.as_ref(),
            run: RunSummary::new(&config, &state0, &run),
        };
        emit_json(Some(&path), &summary)?;
    }
    if let Some(path) = cfg.pick::<PathBuf>(a.final_state, "final_state")? {
        emit_json(Some(&path), &run.final_state)?;
    }
    Ok(())
}

fn cmd_decay(a: DecayArgs) -> Result<()> {
    let cfg = Layer::load(a.config.as_deref())?;
    let path: PathBuf = cfg.require(a.series, "series")?;
    let model = match cfg.pick(a.model, "model")?.unwrap_or(ModelArg::Exponential) {
        ModelArg::Exponential => DecayModel::Exponential,
        ModelArg::PowerLaw => DecayModel::PowerLaw,
    };
    let series = TimeSeries::load_csv(&path)?;
    let window = match (cfg.pick(a.t_lo, "t_lo")?, cfg.pick(a.t_hi, "t_hi")?) {
        (None, None) => tail_window(&series)?,
        (lo, hi) => (
            lo.unwrap_or_else(|| series.t.first().copied().unwrap_or(0.0)),
            hi.unwrap_or_else(|| series.t.last().copied().unwrap_or(0.0)),
        ),
    };
    let fit = decay_fit(&series, window, model)?;
    emit_json(cfg.pick::<PathBuf>(a.output, "output")?.as_deref(), &fit)
}

fn cmd_envelope(a: EnvelopeArgs) -> Result<()> {
    let cfg = Layer::load(a.config.as_deref())?;
    let path: PathBuf = cfg.require(a.series, "series")?;
    let d0: f64 = cfg.require(a.domain_norm0, "domain_norm0")?;
    let series = TimeSeries::load_csv(&path)?;
    let report = envelope_check(&series, d0)?;
    emit_json(cfg.pick::<PathBuf>(a.output, "output")?.as_deref(), &report)
}

fn cmd_field(a: FieldArgs) -> Result<()> {
    let cfg = Layer::load(a.config.as_deref())?;
    let path: PathBuf = cfg.require(a.state, "state")?;
    let u_now = cfg.pick(a.u_now, "u_now")?.unwrap_or(0.0);
    let nx = cfg.pick(a.nx, "nx")?.unwrap_or(64);
    let ny = cfg.pick(a.ny, "ny")?.unwrap_or(32);
    let selector: String = cfg.pick(a.profile, "profile")?.unwrap_or_else(|| "h1".into());
    let side_modes = cfg.pick(a.side_modes, "side_modes")?.unwrap_or(DEFAULT_SIDE_MODES);
    let state: ModalState = read_json(&path)?;
    state.validate()?;
    if side_modes == 0 {
        return Err(Error::Config("--side-modes must be at least 1".into()));
    }
    let h = load_profile(&selector)?;
    let grid = GridSpec::new(nx, ny)?;
    let eta = TopCoefficients::new(state.zeta)?;
    let field = reconstruct_field(&eta, u_now, &h.side_coefficients(side_modes), grid);
    let mut buf = Vec::new();
    field.write_csv(&mut buf).expect("in-memory write");
    emit(cfg.pick::<PathBuf>(a.output, "output")?.as_deref(), &buf)
}

fn cmd_rate_study(a: RateStudyArgs) -> Result<()> {
    let cfg = Layer::load(a.config.as_deref())?;
    let selector: String = cfg.pick(a.profile, "profile")?.unwrap_or_else(|| "h1".into());
    let ns: Vec<usize> = cfg.pick(a.ns, "ns")?.unwrap_or_else(|| vec![4, 8, 16, 32]);
    let mut base = default_rate_config();
    if let Some(dt) = cfg.pick(a.dt, "dt")? {
        base.dt = dt;
    }
    if let Some(t) = cfg.pick(a.t_final, "t_final")? {
        base.t_final = t;
    }
    if let Some(s) = cfg.pick(a.sample_every, "sample_every")? {
        base.sample_every = s;
    }
    let sequential = a.sequential || cfg.pick(None, "sequential")?.unwrap_or(false);
    let exec = if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let h = load_profile(&selector)?;
    let study = rate_vs_n_study(&h, &ns, &base, exec)?;
    let mut buf = Vec::new();
    study.write_csv(&mut buf).expect("in-memory write");
    emit(cfg.pick::<PathBuf>(a.output, "output")?.as_deref(), &buf)?;
    if let Some(path) = cfg.pick::<PathBuf>(a.report, "report")? {
        emit_json(Some(&path), &study)?;
    }
    Ok(())
}

/// One-line rendering of an error for standard error.
pub fn error_line(err: &Error) -> String {
    let msg = err.to_string().replace('\n', " ");
    format!("error: {}: {msg}", err.kind())
}

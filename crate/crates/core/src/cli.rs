//! Command-line front end. [`run`] parses `argv`, executes one subcommand
//! and returns the process exit code: 0 success, 1 domain error, 2 usage.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::frame::api::ApiSceneSpec;
use crate::frame::{render_synthetic_frame, CorrectionMethod, FrameStore};
use crate::inverse::{invert_signal, SolverConfig};
use crate::models::{decompose, forward_signal, ModelKind, ParameterRanges, SceneConditions};
use crate::quadrature::QuadratureConfig;
use crate::radiometry::{celsius_to_kelvin, kelvin_to_celsius, Band};
use crate::sensitivity::{budget_csv, sweep_csv};
use crate::sensitivity::{model_study, perturbation_sweep, report_tube_temps, ParameterName, ParameterSpec};
use crate::service::{serve, ServiceConfig};
use crate::surrogate::{
    bench, encode_model, generate_dataset, load_model, train, train_with_validation, LabeledDataset, TrainConfig,
};
use crate::curve::SpectralCurve;

pub const DATA_DIR_ENV: &str = "RADTHERM_DATA_DIR";
pub const DEFAULT_DATA_DIR: &str = "radtherm-data";

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "radtherm", version, about = "Radiation thermometry correction toolkit")]
struct Cli {
    /// JSON object supplying any flag of the subcommand, e.g. {"tw": "1105C"}
    #[arg(long, global = true, value_name = "JSON")]
    config: Option<PathBuf>,
    /// Write the primary output to this file instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Band-integrated signal of a scene
    Forward(ForwardArgs),
    /// Tube temperature (°C) from a measured signal
    Invert(InvertArgs),
    /// Sensitivity sweep CSV
    Sweep(SweepArgs),
    /// Uncertainty budget CSV
    Budget(BudgetArgs),
    /// Labelled surrogate training data (CSV)
    Dataset(DatasetArgs),
    /// Train the surrogate network
    Train(TrainArgs),
    /// Time surrogate inference against bisection
    Bench(BenchArgs),
    /// Render a synthetic raw frame
    Render(RenderArgs),
    /// Run the HTTP service
    Serve(ServeArgs),
}

fn parse_temperature(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim();
    let (num, kelvin) = match t.chars().last() {
        Some('K' | 'k') => (&t[..t.len() - 1], true),
        Some('C' | 'c') => (&t[..t.len() - 1], false),
        _ => (t, false),
    };
    let v: f64 = num.trim().parse().map_err(|_| format!("not a temperature: {s:?} (use e.g. 950C or 1223.15K)"))?;
    if !v.is_finite() {
        return Err(format!("not a temperature: {s:?}"));
    }
    Ok(if kelvin { v } else { celsius_to_kelvin(v) })
}

fn parse_model(s: &str) -> std::result::Result<ModelKind, String> {
    s.parse::<ModelKind>().map_err(|e| e.to_string())
}

fn parse_param(s: &str) -> std::result::Result<ParameterName, String> {
    s.parse::<ParameterName>().map_err(|e| e.to_string())
}

fn parse_method(s: &str) -> std::result::Result<Option<CorrectionMethod>, String> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    s.parse::<CorrectionMethod>().map(Some).map_err(|e| e.to_string())
}

#[derive(Debug, Clone)]
struct TemperatureList(Vec<f64>);

fn parse_temperature_list(s: &str) -> std::result::Result<TemperatureList, String> {
    s.split(',').map(parse_temperature).collect::<std::result::Result<_, _>>().map(TemperatureList)
}

#[derive(Debug, Args)]
struct SceneArgs {
    #[arg(long, value_parser = parse_model, default_value = "D")]
    model: ModelKind,
    /// Wall temperature
    #[arg(long, value_parser = parse_temperature, default_value = "1105C")]
    tw: f64,
    /// Gas temperature
    #[arg(long, value_parser = parse_temperature, default_value = "980C")]
    tg: f64,
    #[arg(long, default_value_t = 0.82)]
    eps: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    path_length: f64,
    /// Band lower edge, μm
    #[arg(long, default_value_t = 3.7)]
    band_lo: f64,
    /// Band upper edge, μm
    #[arg(long, default_value_t = 4.2)]
    band_hi: f64,
    /// Gauss-Legendre nodes
    #[arg(long, default_value_t = 64)]
    nodes: usize,
}

impl SceneArgs {
    fn conditions(&self) -> Result<SceneConditions> {
        let c = SceneConditions {
            wall_temp: self.tw,
            gas_temp: self.tg,
            emissivity: SpectralCurve::constant(self.eps),
            absorption: SpectralCurve::constant(self.alpha),
            path_length: self.path_length,
            responsivity: SpectralCurve::constant(1.0),
            band: Band::new(self.band_lo, self.band_hi)?,
        };
        c.validate()?;
        Ok(c)
    }

    fn quadrature(&self) -> Result<QuadratureConfig> {
        QuadratureConfig::gauss_legendre(self.nodes)
    }
}

#[derive(Debug, Args)]
struct ForwardArgs {
    /// Tube temperature
    #[arg(long, value_parser = parse_temperature)]
    ts: f64,
    #[command(flatten)]
    scene: SceneArgs,
    /// Print the emitted/reflected/gas components as JSON (model D)
    #[arg(long)]
    decompose: bool,
}

#[derive(Debug, Args)]
struct InvertArgs {
    #[arg(long)]
    signal: f64,
    #[command(flatten)]
    scene: SceneArgs,
    /// Print kelvin instead of °C
    #[arg(long)]
    kelvin: bool,
    #[arg(long, default_value_t = 1e-3)]
    tolerance: f64,
}

#[derive(Debug, Args)]
struct StudyArgs {
    #[arg(long, value_parser = parse_model)]
    model: ModelKind,
    /// Grid points per parameter range
    #[arg(long, default_value_t = crate::sensitivity::DEFAULT_GRID_POINTS)]
    grid: usize,
    /// Comma-separated tube temperatures (default 880C..1030C in 30 °C steps)
    #[arg(long, value_parser = parse_temperature_list)]
    temps: Option<TemperatureList>,
}

impl StudyArgs {
    fn temps(&self) -> Vec<f64> {
        self.temps.clone().map_or_else(report_tube_temps, |t| t.0)
    }
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    study: StudyArgs,
    /// One parameter; all parameters of the model when omitted
    #[arg(long, value_parser = parse_param)]
    param: Option<ParameterName>,
}

#[derive(Debug, Args)]
struct BudgetArgs {
    #[command(flatten)]
    study: StudyArgs,
    /// Coverage factor
    #[arg(long, default_value_t = crate::sensitivity::COVERAGE_95)]
    k: f64,
}

#[derive(Debug, Args)]
struct DatasetArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Training data CSV
    #[arg(long)]
    data: PathBuf,
    /// Held-out CSV; otherwise 10% of --data is held out
    #[arg(long)]
    validation: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 256)]
    batch: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the trained model
    #[arg(long, default_value = "surrogate.mlpt")]
    model_out: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    model_file: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
}

#[derive(Debug, Args)]
struct RenderArgs {
    /// Scene JSON (temperatures in °C); a demo scene when omitted
    #[arg(long)]
    scene: Option<PathBuf>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    /// Store directory used when --out is not given
    #[arg(long)]
    data_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Surrogate model enabling `surrogate` corrections
    #[arg(long)]
    model_file: Option<PathBuf>,
    /// Correction applied to ingested frames: bisection, surrogate or none
    #[arg(long, value_parser = parse_method, default_value = "bisection")]
    auto_correct: Option<CorrectionMethod>,
}

fn data_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_DIR))
}

/// Appends `--key value` pairs from the `--config` JSON for flags not
/// already present on the command line.
fn merge_config(argv: Vec<String>) -> std::result::Result<Vec<String>, String> {
    let Some(pos) = argv.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(argv);
    };
    let path = if let Some(v) = argv[pos].strip_prefix("--config=") {
        v.to_string()
    } else {
        argv.get(pos + 1).cloned().ok_or("--config needs a path")?
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let obj: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(&text).map_err(|e| format!("config {path} is not a JSON object: {e}"))?;
    let mut out = argv.clone();
    for (key, value) in obj {
        let flag = format!("--{}", key.replace('_', "-"));
        if argv.iter().any(|a| a == &flag || a.starts_with(&format!("{flag}="))) {
            continue;
        }
        match value {
            serde_json::Value::Bool(true) => out.push(flag),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::String(s) => out.extend([flag, s]),
            serde_json::Value::Number(n) => out.extend([flag, n.to_string()]),
            serde_json::Value::Array(items) => {
                let joined: Vec<String> = items
                    .iter()
                    .map(|v| v.as_str().map_or_else(|| v.to_string(), str::to_string))
                    .collect();
                out.extend([flag, joined.join(",")]);
            }
            serde_json::Value::Object(_) => return Err(format!("config key {key:?} cannot be an object")),
        }
    }
    Ok(out)
}

/// Runs the CLI with process stdout/stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with_io<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let argv = match merge_config(argv) {
        Ok(a) => a,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match execute(cli, err) {
        Ok(Output::Text(text, path)) => match path {
            Some(p) => match std::fs::write(&p, text) {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    let _ = writeln!(err, "error: {}", Error::io(&p, e));
                    EXIT_DOMAIN
                }
            },
            None => {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            }
        },
        Ok(Output::Done) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DOMAIN
        }
    }
}

enum Output {
    /// Text destined for stdout, or for the `--out` path when present.
    Text(String, Option<PathBuf>),
    Done,
}

fn execute(cli: Cli, err: &mut dyn Write) -> Result<Output> {
    let out = cli.out;
    let text = |s: String| Ok(Output::Text(s, out.clone()));
    match cli.command {
        Command::Forward(a) => {
            let q = a.scene.quadrature()?;
            let scene = a.scene.conditions()?.with_tube_temp(a.ts);
            if a.decompose {
                let d = decompose(&scene, &q)?;
                text(format!("{}\n", serde_json::to_string_pretty(&d)?))
            } else {
                text(format!("{}\n", forward_signal(a.scene.model, &scene, &q)?))
            }
        }
        Command::Invert(a) => {
            let cfg = SolverConfig { tolerance_t: a.tolerance, ..SolverConfig::default() };
            let r = invert_signal(a.scene.model, &a.scene.conditions()?, a.signal, &cfg, &a.scene.quadrature()?)?;
            let t = if a.kelvin { r.temperature_ts } else { kelvin_to_celsius(r.temperature_ts) };
            text(format!("{t}\n"))
        }
        Command::Sweep(a) => {
            let (cfg, q) = (SolverConfig::default(), QuadratureConfig::default());
            let nominals = SceneConditions::nominal();
            let temps = a.study.temps();
            let sweeps = match a.param {
                Some(p) => {
                    let spec = ParameterSpec::standard(p).with_grid_points(a.study.grid);
                    vec![perturbation_sweep(a.study.model, &spec, &temps, &nominals, &cfg, &q)?]
                }
                None => {
                    model_study(a.study.model, &temps, &nominals, a.study.grid, 1.0, &cfg, &q)?.0
                }
            };
            text(sweep_csv(&sweeps))
        }
        Command::Budget(a) => {
            let (cfg, q) = (SolverConfig::default(), QuadratureConfig::default());
            let (_, budgets) = model_study(
                a.study.model,
                &a.study.temps(),
                &SceneConditions::nominal(),
                a.study.grid,
                a.k,
                &cfg,
                &q,
            )?;
            text(budget_csv(&budgets))
        }
        Command::Dataset(a) => {
            let d = generate_dataset(a.n, &ParameterRanges::furnace(), a.seed, &QuadratureConfig::default())?;
            text(d.to_csv())
        }
        Command::Train(a) => {
            let cfg = TrainConfig {
                epochs: a.epochs,
                learning_rate: a.lr,
                batch_size: a.batch,
                seed: a.seed,
                ..TrainConfig::default()
            };
            let data = LabeledDataset::read_csv(&a.data)?;
            let (model, report) = match &a.validation {
                Some(v) => {
                    let val = LabeledDataset::read_csv(v)?;
                    train_with_validation(&data, &val, &cfg, |_, _| {})?
                }
                None => train(&data, &cfg)?,
            };
            std::fs::write(&a.model_out, encode_model(&model)).map_err(|e| Error::io(&a.model_out, e))?;
            let _ = writeln!(err, "trained in {:.1} s", report.wall_time.as_secs_f64());
            let summary = serde_json::json!({
                "model_file": a.model_out,
                "validation_rms_k": report.final_rms,
                "train_rms_k": report.train_rms,
                "train_rows": report.train_rows,
                "validation_rows": report.validation_rows,
                "epochs": report.epoch_loss.len(),
                "final_loss": report.epoch_loss.last(),
            });
            text(format!("{}\n", serde_json::to_string_pretty(&summary)?))
        }
        Command::Bench(a) => {
            let model = load_model(&a.model_file)?;
            let q = QuadratureConfig::default();
            let d = generate_dataset(a.n, &ParameterRanges::furnace(), a.seed, &q)?;
            let r = bench(&model, &d.inputs, &SolverConfig::default(), &q, a.repeats)?;
            let summary = serde_json::json!({
                "rows": r.rows,
                "surrogate_ms": r.surrogate_time.as_secs_f64() * 1e3,
                "bisection_ms": r.bisection_time.as_secs_f64() * 1e3,
                "speedup": r.speedup,
                "solver_failures": r.solver_failures,
                "agreement_k": r.accuracy,
            });
            text(format!("{}\n", serde_json::to_string_pretty(&summary)?))
        }
        Command::Render(a) => {
            let mut api = match &a.scene {
                Some(p) => {
                    let s = std::fs::read(p).map_err(|e| Error::io(p, e))?;
                    serde_json::from_slice::<ApiSceneSpec>(&s)?
                }
                None => ApiSceneSpec::from_spec(&crate::frame::SceneSpec::demo("demo"), 80, 48),
            };
            api.width = a.width.unwrap_or(api.width);
            api.height = a.height.unwrap_or(api.height);
            let spec = api.to_spec();
            let (cfg, q) = (SolverConfig::default(), QuadratureConfig::default());
            let mut frame = render_synthetic_frame(&spec, api.width, api.height, &cfg, &q)?;
            match out {
                Some(p) => {
                    frame.meta.frame_id = file_stem(&p);
                    frame.save(&p)?;
                    Ok(Output::Done)
                }
                None => {
                    let store = FrameStore::open(data_dir(a.data_dir))?;
                    if store.mask(&spec.camera_id).is_err() {
                        store.upsert_mask(&spec.camera_id, spec.generating_mask(api.height))?;
                    }
                    let meta = store.insert_raw(frame)?;
                    text(format!("{}\n", serde_json::to_string_pretty(&meta)?))
                }
            }
        }
        Command::Serve(a) => {
            let addr: SocketAddr = format!("{}:{}", a.host, a.port)
                .parse()
                .map_err(|e| Error::domain(format!("bad listen address: {e}")))?;
            let mut cfg = ServiceConfig::new(data_dir(a.data_dir));
            cfg.auto_correct = a.auto_correct;
            if let Some(p) = &a.model_file {
                cfg.model = Some(Arc::new(load_model(p)?));
            }
            if cfg.auto_correct == Some(CorrectionMethod::Surrogate) && cfg.model.is_none() {
                return Err(Error::domain("--auto-correct surrogate needs --model-file"));
            }
            let _ = writeln!(err, "listening on http://{addr}");
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::io("tokio runtime", e))?;
            rt.block_on(serve(addr, cfg))?;
            Ok(Output::Done)
        }
    }
}

fn file_stem(p: &Path) -> String {
    p.file_stem().map_or_else(|| "frame".to_string(), |s| s.to_string_lossy().into_owned())
}

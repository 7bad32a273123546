//! Command-line front end.
//!
//! Every subcommand first builds a complete plan (config, input files,
//! shape checks) and only then creates the output directory and runs, so a
//! bad invocation exits with status 2 without leaving partial outputs.
//! Failures while running exit with status 1.

mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::Serialize;

pub use config::{DataSection, ModelSection, OutputFormat, QuerySection, RunConfig, TransformKind};

use crate::attribution::MethodKind;
use crate::engine::{band_sweep, group_scores, trim_score, MethodOptions, TrimQuery};
use crate::error::{Result, TrimError};
use crate::experiments::{run_benchmark, SyntheticConfig};
use crate::io;
use crate::model::{load_model, save_model, train, MlpModel, MlpSpec, TrainConfig};
use crate::numeric::{NdArray, SeededRng};
use crate::transforms::{
    learn_dictionary, load_dictionary, save_dictionary, DictionaryCheckpoint, DictionaryConfig,
    Mask, Transform,
};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "trim",
    version,
    about = "Feature attribution in transformed input spaces"
)]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed, replacing the seeds of every config section.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Worker threads for the benchmark (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthetic frequency-recovery benchmark.
    Benchmark {
        #[arg(long)]
        n_datasets: Option<usize>,
    },
    /// Band-importance curves for each input row.
    Bands {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
        /// Band width in frequency indices.
        #[arg(long)]
        width: Option<usize>,
        #[arg(long, value_parser = parse_method)]
        method: Option<MethodKind>,
    },
    /// Train a network on a table whose last column is the target.
    Train {
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// TRIM scores for each input row.
    Attribute {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_parser = parse_method)]
        method: Option<MethodKind>,
        #[arg(long, value_enum)]
        transform: Option<TransformKind>,
        /// Dictionary checkpoint for `--transform dictionary`.
        #[arg(long)]
        dictionary: Option<PathBuf>,
        /// Comma-separated group labels scored jointly.
        #[arg(long, value_delimiter = ',')]
        groups: Option<Vec<usize>>,
    },
    /// Learn a dictionary transform from samples.
    LearnTransform {
        #[arg(long)]
        data: Option<PathBuf>,
        /// Model whose attributions the TRIM penalty sparsifies.
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

fn parse_method(s: &str) -> std::result::Result<MethodKind, String> {
    MethodKind::parse(s)
        .ok_or_else(|| format!("unknown method `{s}` (cd, ig, input_x_gradient, shapley)"))
}

fn command() -> clap::Command {
    Cli::command().after_long_help(format!(
        "Config file keys and their defaults:\n\n{}",
        RunConfig::defaults_toml()
    ))
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match command()
        .try_get_matches_from(args)
        .and_then(|m| Cli::from_arg_matches(&m))
    {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let plan = match Plan::prepare(&cli) {
        Ok(plan) => plan,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    };
    match pool.install(|| plan.execute()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

/// Envelope shared by all JSON reports.
#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    format_version: u32,
    tool_version: &'static str,
    command: &'static str,
    config: &'a RunConfig,
    result: T,
}

enum Task {
    Benchmark(SyntheticConfig),
    Bands {
        model: MlpModel,
        inputs: NdArray,
        transform: Transform,
        width: usize,
        method: MethodKind,
        options: MethodOptions,
    },
    Train {
        spec: MlpSpec,
        x: NdArray,
        y: NdArray,
        cfg: TrainConfig,
    },
    Attribute {
        model: MlpModel,
        inputs: NdArray,
        transform: Transform,
        method: MethodKind,
        options: MethodOptions,
        mask: Option<Mask>,
    },
    LearnTransform {
        samples: NdArray,
        cfg: DictionaryConfig,
        model: Option<MlpModel>,
        seed: u64,
    },
}

struct Plan {
    config: RunConfig,
    task: Task,
}

fn required(path: &Option<PathBuf>, what: &str, flag: &str) -> Result<PathBuf> {
    path.clone().ok_or_else(|| {
        TrimError::Config(format!(
            "{what} is required (--{flag} or [data] in the config)"
        ))
    })
}

/// Inputs as a `rows × width` matrix; a flat array is one row.
fn load_inputs(path: &Path, width: usize) -> Result<NdArray> {
    let a = io::read_array(path)?;
    let a = if a.ndim() == 1 {
        let n = a.len();
        a.reshape(vec![1, n])?
    } else {
        a
    };
    if a.cols() != width {
        return Err(TrimError::Config(format!(
            "{}: rows have {} values but the model takes {width}",
            path.display(),
            a.cols()
        )));
    }
    Ok(a)
}

fn build_transform(query: &QuerySection, data: &DataSection, n: usize) -> Result<Transform> {
    let t = match query.transform {
        TransformKind::Identity => Transform::identity(n),
        TransformKind::Dft1d => Transform::dft1d(n)?,
        TransformKind::Dft2d => {
            let [h, w] = query.image_shape.ok_or_else(|| {
                TrimError::Config("dft2d needs query.image_shape = [height, width]".into())
            })?;
            Transform::dft2d(h, w)?
        }
        TransformKind::Dictionary => load_dictionary(&required(
            &data.dictionary,
            "a dictionary checkpoint",
            "dictionary",
        )?)?,
    };
    if t.raw_len() != n {
        return Err(TrimError::Config(format!(
            "{} transform takes {} values but the model takes {n}",
            t.name(),
            t.raw_len()
        )));
    }
    Ok(t)
}

fn options(query: &QuerySection) -> MethodOptions {
    MethodOptions {
        ig_steps: query.ig_steps,
        shapley: query.shapley,
    }
}

impl Plan {
    fn prepare(cli: &Cli) -> Result<Self> {
        let mut config = match &cli.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if cli.seed.is_some() {
            config.seed = cli.seed;
        }
        if let Some(out) = &cli.out {
            config.out = out.clone();
        }
        if let Some(format) = cli.format {
            config.format = format;
        }
        if let Some(seed) = config.seed {
            config.benchmark.master_seed = seed;
            config.train.seed = seed;
            config.query.shapley.seed = seed;
        }
        if cli.threads == Some(0) {
            return Err(TrimError::Config("--threads must be at least 1".into()));
        }

        let task = match &cli.command {
            Command::Benchmark { n_datasets } => {
                if let Some(n) = n_datasets {
                    config.benchmark.n_datasets = *n;
                }
                config.benchmark.validate().map_err(as_config)?;
                Task::Benchmark(config.benchmark.clone())
            }
            Command::Bands {
                model,
                input,
                width,
                method,
            } => {
                set(&mut config.data.model, model);
                set(&mut config.data.input, input);
                if let Some(w) = width {
                    config.query.band_width = *w;
                }
                if let Some(m) = method {
                    config.query.method = *m;
                }
                if config.query.transform != TransformKind::Dft1d
                    && config.query.transform != TransformKind::Dft2d
                {
                    return Err(TrimError::Config(
                        "bands needs a dft1d or dft2d transform".into(),
                    ));
                }
                if config.query.band_width == 0 {
                    return Err(TrimError::Config("band width must be at least 1".into()));
                }
                let model = load_model(&required(
                    &config.data.model,
                    "a model checkpoint",
                    "model",
                )?)?;
                let n = model.input_width();
                let transform = build_transform(&config.query, &config.data, n)?;
                let inputs =
                    load_inputs(&required(&config.data.input, "an input file", "input")?, n)?;
                Task::Bands {
                    model,
                    inputs,
                    transform,
                    width: config.query.band_width,
                    method: config.query.method,
                    options: options(&config.query),
                }
            }
            Command::Train { data } => {
                set(&mut config.data.train, data);
                let path = required(&config.data.train, "a training table", "data")?;
                let table = io::read_array(&path)?;
                if table.ndim() != 2 || table.cols() < 2 {
                    return Err(TrimError::Config(format!(
                        "{}: need at least one feature column and a target column",
                        path.display()
                    )));
                }
                let (rows, cols) = (table.rows(), table.cols());
                let mut x = Vec::with_capacity(rows * (cols - 1));
                let mut y = Vec::with_capacity(rows);
                for r in 0..rows {
                    let row = table.row(r);
                    x.extend(&row[..cols - 1]);
                    y.push(row[cols - 1]);
                }
                let mut widths = vec![cols - 1];
                widths.extend(&config.model.hidden);
                widths.push(1);
                let spec = MlpSpec::new(widths, config.model.head).map_err(as_config)?;
                config.train.validate().map_err(as_config)?;
                Task::Train {
                    spec,
                    x: NdArray::new(vec![rows, cols - 1], x)?,
                    y: NdArray::from_vec(y),
                    cfg: config.train.clone(),
                }
            }
            Command::Attribute {
                model,
                input,
                method,
                transform,
                dictionary,
                groups,
            } => {
                set(&mut config.data.model, model);
                set(&mut config.data.input, input);
                set(&mut config.data.dictionary, dictionary);
                if let Some(m) = method {
                    config.query.method = *m;
                }
                if let Some(t) = transform {
                    config.query.transform = *t;
                }
                if groups.is_some() {
                    config.query.groups = groups.clone();
                }
                let model = load_model(&required(
                    &config.data.model,
                    "a model checkpoint",
                    "model",
                )?)?;
                let n = model.input_width();
                let transform = build_transform(&config.query, &config.data, n)?;
                let inputs =
                    load_inputs(&required(&config.data.input, "an input file", "input")?, n)?;
                let mask = match &config.query.groups {
                    None => None,
                    Some(labels) => Some(mask_for_labels(&transform, labels)?),
                };
                if config.query.ig_steps == 0 {
                    return Err(TrimError::Config(
                        "query.ig_steps must be at least 1".into(),
                    ));
                }
                Task::Attribute {
                    model,
                    inputs,
                    transform,
                    method: config.query.method,
                    options: options(&config.query),
                    mask,
                }
            }
            Command::LearnTransform { data, model } => {
                set(&mut config.data.samples, data);
                set(&mut config.data.model, model);
                let samples =
                    io::read_array(&required(&config.data.samples, "a sample table", "data")?)?;
                if samples.ndim() != 2 {
                    return Err(TrimError::Config(
                        "samples must be a matrix, one sample per row".into(),
                    ));
                }
                let model = match &config.data.model {
                    Some(path) => Some(load_model(path)?),
                    None => None,
                };
                if config.dictionary.lambda_trim > 0.0 && model.is_none() {
                    return Err(TrimError::Config(
                        "dictionary.lambda_trim > 0 needs a model (--model)".into(),
                    ));
                }
                if let Some(m) = &model {
                    if m.input_width() != samples.cols() {
                        return Err(TrimError::Config(format!(
                            "model takes {} values but samples have {}",
                            m.input_width(),
                            samples.cols()
                        )));
                    }
                }
                Task::LearnTransform {
                    samples,
                    cfg: config.dictionary.clone(),
                    model,
                    seed: config.seed.unwrap_or(0),
                }
            }
        };
        Ok(Plan { config, task })
    }

    fn report<T: Serialize>(&self, command: &'static str, result: T) -> Result<()> {
        if !self.config.format.json() {
            return Ok(());
        }
        io::write_json(
            &self.config.out.join("report.json"),
            &Report {
                format_version: 1,
                tool_version: env!("CARGO_PKG_VERSION"),
                command,
                config: &self.config,
                result,
            },
        )
    }

    fn execute(&self) -> Result<()> {
        let out = &self.config.out;
        let csv = self.config.format.csv();
        std::fs::create_dir_all(out).map_err(|e| TrimError::io(out, e))?;
        match &self.task {
            Task::Benchmark(cfg) => {
                let report = run_benchmark(cfg)?;
                if csv {
                    io::write_csv_file(&out.join("benchmark.csv"), |w| {
                        io::write_benchmark_csv(w, &report)
                    })?;
                }
                self.report("benchmark", &report)?;
                println!("{:<18} {:>9} {:>9}", "method", "error_%", "stderr_%");
                for m in &report.methods {
                    println!(
                        "{:<18} {:>9.1} {:>9.2}",
                        m.method.as_str(),
                        m.error_pct,
                        m.stderr_pct
                    );
                }
                println!(
                    "{} datasets, mean test accuracy {:.3}, runtime {:.1?}",
                    cfg.n_datasets, report.mean_test_accuracy, report.runtime
                );
            }
            Task::Bands {
                model,
                inputs,
                transform,
                width,
                method,
                options,
            } => {
                let mut curves = Vec::with_capacity(inputs.rows());
                for r in 0..inputs.rows() {
                    let x = NdArray::from_vec(inputs.row(r).to_vec());
                    let curve = band_sweep(model, &x, transform, *width, *method, options)?;
                    if csv {
                        io::write_csv_file(&out.join(format!("bands_{r}.csv")), |w| {
                            io::write_band_curve_csv(w, &curve)
                        })?;
                    }
                    curves.push(curve);
                }
                #[derive(Serialize)]
                struct Bands<'a> {
                    normalization: &'static str,
                    curves: &'a [crate::engine::BandCurve],
                }
                self.report(
                    "bands",
                    Bands {
                        normalization: "score divided by the signed prediction f(x)",
                        curves: &curves,
                    },
                )?;
                println!("wrote {} band curves to {}", curves.len(), out.display());
            }
            Task::Train { spec, x, y, cfg } => {
                let outcome = train(spec, x, y, cfg)?;
                save_model(&outcome.model, &out.join("model.json"))?;
                if csv {
                    let history = NdArray::new(
                        vec![outcome.loss_history.len(), 2],
                        outcome
                            .loss_history
                            .iter()
                            .enumerate()
                            .flat_map(|(i, l)| [(i + 1) as f64, *l])
                            .collect(),
                    )?;
                    write_with_header(&out.join("loss.csv"), "epoch,loss", &history)?;
                }
                #[derive(Serialize)]
                struct Trained<'a> {
                    spec: &'a MlpSpec,
                    loss_history: &'a [f64],
                }
                self.report(
                    "train",
                    Trained {
                        spec,
                        loss_history: &outcome.loss_history,
                    },
                )?;
                println!(
                    "trained {} parameters, final loss {:.6}",
                    outcome.model.n_params(),
                    outcome.loss_history.last().copied().unwrap_or(f64::NAN)
                );
            }
            Task::Attribute {
                model,
                inputs,
                transform,
                method,
                options,
                mask,
            } => self.attribute(model, inputs, transform, *method, options, mask.as_ref())?,
            Task::LearnTransform {
                samples,
                cfg,
                model,
                seed,
            } => {
                let learned =
                    learn_dictionary(samples, cfg, model.as_ref(), &mut SeededRng::new(*seed))?;
                let ck = DictionaryCheckpoint::new(&learned, cfg)?;
                save_dictionary(&ck, &out.join("dictionary.json"))?;
                if csv {
                    io::write_csv_file(&out.join("loss_trace.csv"), |w| {
                        io::write_loss_trace_csv(w, &learned.trace)
                    })?;
                }
                self.report("learn-transform", &learned.trace)?;
                let (first, last) = (learned.trace[0], learned.trace[learned.trace.len() - 1]);
                println!(
                    "loss {:.6} -> {:.6} over {} steps",
                    first.total, last.total, cfg.steps
                );
            }
        }
        Ok(())
    }

    fn attribute(
        &self,
        model: &MlpModel,
        inputs: &NdArray,
        transform: &Transform,
        method: MethodKind,
        options: &MethodOptions,
        mask: Option<&Mask>,
    ) -> Result<()> {
        let out = &self.config.out;
        let csv = self.config.format.csv();
        match mask {
            None => {
                let mut all = Vec::with_capacity(inputs.rows());
                for r in 0..inputs.rows() {
                    let x = NdArray::from_vec(inputs.row(r).to_vec());
                    let gs = group_scores(model, &x, transform, method, options)?;
                    if csv {
                        io::write_csv_file(&out.join(format!("scores_{r}.csv")), |w| {
                            io::write_group_scores_csv(w, &gs)
                        })?;
                    }
                    all.push(gs);
                }
                self.report("attribute", &all)?;
                println!(
                    "wrote group scores for {} inputs to {}",
                    all.len(),
                    out.display()
                );
            }
            Some(mask) => {
                let query =
                    TrimQuery::new(transform.clone(), mask.clone(), method).with_options(*options);
                let mut all = Vec::with_capacity(inputs.rows());
                for r in 0..inputs.rows() {
                    let x = NdArray::from_vec(inputs.row(r).to_vec());
                    all.push(trim_score(model, &x, &query)?);
                }
                if csv {
                    let table = NdArray::new(
                        vec![all.len(), 4],
                        all.iter()
                            .enumerate()
                            .flat_map(|(r, s)| [r as f64, s.score, s.prediction, s.complement])
                            .collect(),
                    )?;
                    write_with_header(
                        &out.join("masked.csv"),
                        "row,score,prediction,complement",
                        &table,
                    )?;
                }
                self.report("attribute", &all)?;
                println!(
                    "wrote masked scores for {} inputs to {}",
                    all.len(),
                    out.display()
                );
            }
        }
        Ok(())
    }
}

fn set(slot: &mut Option<PathBuf>, value: &Option<PathBuf>) {
    if value.is_some() {
        *slot = value.clone();
    }
}

fn as_config(e: TrimError) -> TrimError {
    TrimError::Config(e.to_string())
}

fn mask_for_labels(transform: &Transform, labels: &[usize]) -> Result<Mask> {
    let groups = transform.groups();
    let mut chosen = Vec::with_capacity(labels.len());
    for &label in labels {
        let matching: Vec<_> = groups.iter().filter(|g| g.label == label).collect();
        if matching.is_empty() {
            return Err(TrimError::Config(format!(
                "{} transform has no group labelled {label}",
                transform.name()
            )));
        }
        chosen.extend(matching);
    }
    Ok(Mask::from_groups(transform.coef_len(), chosen))
}

fn write_with_header(path: &Path, header: &str, table: &NdArray) -> Result<()> {
    let mut text = format!("{header}\n");
    for r in 0..table.rows() {
        let row: Vec<String> = table.row(r).iter().map(|v| v.to_string()).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| TrimError::io(path, e))
}

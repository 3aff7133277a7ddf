//! Command-line front end: `generate`, `fit` and `evaluate`.
//!
//! Every `fit` setting has one name used both as a `--flag` and as a key in
//! the flat `key = value` config file. Precedence is flag, then config file,
//! then built-in default. The effective configuration (minus output paths) is
//! echoed into the result JSON, so a result file plus its seed reproduces the
//! run byte for byte.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Arg, ArgAction, ArgMatches, Command};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annealing::{best_chain, run_multistart, AnnealConfig, CoolingSchedule, FitResult};
use crate::criteria::{Criterion, CriterionKind};
use crate::data_io::{csv_shape, generate_robot_arm, load_csv, mean_squared_error, split, write_csv, SplitPolicy, SplitSpec};
use crate::error::{Error, Result};
use crate::model::{predict, BasisKind, CentreSet, Dataset, Metric};
use crate::moves::{MoveProbabilities, RatioMode, UpdateParams};
use crate::trace::write_trace_file;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisChoice {
    Linear,
    Cubic,
    ThinPlateSpline,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricChoice {
    Euclidean,
    Mahalanobis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleChoice {
    Geometric,
    Logarithmic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitChoice {
    FirstN,
    Shuffled,
}

/// Effective configuration of a `fit` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub inputs: Option<usize>,
    pub outputs: Option<usize>,
    pub n_train: Option<usize>,
    pub split: SplitChoice,
    pub split_seed: Option<u64>,
    pub criterion: CriterionKind,
    pub basis: BasisChoice,
    pub gaussian_width: Option<f64>,
    pub metric: MetricChoice,
    pub metric_weights: Option<Vec<f64>>,
    pub iterations: usize,
    pub seed: u64,
    pub chains: usize,
    pub schedule: ScheduleChoice,
    pub t0: f64,
    pub gamma: Option<f64>,
    pub floor: f64,
    pub zeta: Option<f64>,
    pub kmax: usize,
    pub birth_margin: f64,
    pub ratio_mode: RatioMode,
    pub move_probs: [f64; 5],
    pub rw_step_frac: f64,
    pub global_prop_prob: f64,
    pub init_k: usize,
    pub test_mse: bool,
    #[serde(skip)]
    pub trace: Option<PathBuf>,
    #[serde(skip)]
    pub trace_csv: Option<PathBuf>,
    #[serde(skip)]
    pub result: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: None,
            inputs: None,
            outputs: None,
            n_train: None,
            split: SplitChoice::FirstN,
            split_seed: None,
            criterion: CriterionKind::Mdl,
            basis: BasisChoice::Cubic,
            gaussian_width: None,
            metric: MetricChoice::Euclidean,
            metric_weights: None,
            iterations: 500,
            seed: 0,
            chains: 1,
            schedule: ScheduleChoice::Geometric,
            t0: 1.0,
            gamma: None,
            floor: 0.01,
            zeta: None,
            kmax: 50,
            birth_margin: 0.1,
            ratio_mode: RatioMode::Derived,
            move_probs: MoveProbabilities::default().as_array(),
            rw_step_frac: UpdateParams::default().rw_step_frac,
            global_prop_prob: UpdateParams::default().global_prop_prob,
            init_k: 1,
            test_mse: true,
            trace: None,
            trace_csv: None,
            result: None,
        }
    }
}

/// `(key, help)` for every `fit` setting; each is both `--key` and a config-file key.
pub const FIT_KEYS: &[(&str, &str)] = &[
    ("data", "dataset CSV (header x1..xd,y1..yc)"),
    ("inputs", "number of input columns d (default: from header)"),
    ("outputs", "number of output columns c (default: from header)"),
    ("n-train", "training rows; the rest form the test set (default: N/2)"),
    ("split", "first-n | shuffled"),
    ("split-seed", "seed for the shuffled split (default: --seed)"),
    ("criterion", "aic | bic | mdl"),
    ("basis", "linear | cubic | thin-plate-spline | gaussian"),
    ("gaussian-width", "width w of exp(-r^2/(2w^2)), required for gaussian"),
    ("metric", "euclidean | mahalanobis"),
    ("metric-weights", "row-major d*d positive-definite matrix for mahalanobis"),
    ("iterations", "annealing iterations"),
    ("seed", "random seed; chain s uses seed+s"),
    ("chains", "independent chains run concurrently"),
    ("schedule", "geometric | logarithmic"),
    ("t0", "initial temperature"),
    ("gamma", "geometric ratio (default: reach floor at 80% of iterations)"),
    ("floor", "minimum temperature"),
    ("zeta", "split/merge scale (default: 5% of the widest region side)"),
    ("kmax", "maximum number of bases"),
    ("birth-margin", "region margin per side, as a fraction of the input range"),
    ("ratio-mode", "derived | as-printed"),
    ("move-probs", "birth,death,split,merge,update probabilities"),
    ("rw-step-frac", "update random-walk step as a fraction of region width"),
    ("global-prop-prob", "probability of a uniform redraw in the update move"),
    ("init-k", "number of bases in the initial state"),
    ("test-mse", "record test MSE every iteration (true | false)"),
    ("trace", "trace output (.csv for CSV, anything else for JSON lines)"),
    ("trace-csv", "additional CSV trace output"),
    ("result", "result summary JSON output"),
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{value}`")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value.split(',').map(|v| parse::<f64>(key, v)).collect()
}

fn choice<T: for<'de> Deserialize<'de>>(key: &str, value: &str, options: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(value.trim().to_string()))
        .map_err(|_| Error::config(key, format!("expected one of {options}, got `{value}`")))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "data" => self.data = Some(PathBuf::from(value.trim())),
            "inputs" => self.inputs = Some(parse(key, value)?),
            "outputs" => self.outputs = Some(parse(key, value)?),
            "n-train" => self.n_train = Some(parse(key, value)?),
            "split" => self.split = choice(key, value, "first-n, shuffled")?,
            "split-seed" => self.split_seed = Some(parse(key, value)?),
            "criterion" => self.criterion = value.trim().parse()?,
            "basis" => self.basis = choice(key, value, "linear, cubic, thin-plate-spline, gaussian")?,
            "gaussian-width" => self.gaussian_width = Some(parse(key, value)?),
            "metric" => self.metric = choice(key, value, "euclidean, mahalanobis")?,
            "metric-weights" => self.metric_weights = Some(parse_list(key, value)?),
            "iterations" => self.iterations = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "chains" => self.chains = parse(key, value)?,
            "schedule" => self.schedule = choice(key, value, "geometric, logarithmic")?,
            "t0" => self.t0 = parse(key, value)?,
            "gamma" => self.gamma = Some(parse(key, value)?),
            "floor" => self.floor = parse(key, value)?,
            "zeta" => self.zeta = Some(parse(key, value)?),
            "kmax" => self.kmax = parse(key, value)?,
            "birth-margin" => self.birth_margin = parse(key, value)?,
            "ratio-mode" => self.ratio_mode = value.trim().parse()?,
            "move-probs" => {
                let v = parse_list(key, value)?;
                let arr: [f64; 5] = v
                    .try_into()
                    .map_err(|_| Error::config(key, "expected five comma-separated values"))?;
                self.move_probs = arr;
            }
            "rw-step-frac" => self.rw_step_frac = parse(key, value)?,
            "global-prop-prob" => self.global_prop_prob = parse(key, value)?,
            "init-k" => self.init_k = parse(key, value)?,
            "test-mse" => self.test_mse = parse(key, value)?,
            "trace" => self.trace = Some(PathBuf::from(value.trim())),
            "trace-csv" => self.trace_csv = Some(PathBuf::from(value.trim())),
            "result" => self.result = Some(PathBuf::from(value.trim())),
            other => return Err(Error::config(other, "unknown setting")),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file; `#` starts a comment.
    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: n as u64 + 1,
                reason: "expected `key = value`".into(),
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn basis_kind(&self) -> Result<BasisKind<f64>> {
        Ok(match self.basis {
            BasisChoice::Linear => BasisKind::Linear,
            BasisChoice::Cubic => BasisKind::Cubic,
            BasisChoice::ThinPlateSpline => BasisKind::ThinPlateSpline,
            BasisChoice::Gaussian => {
                let w = self
                    .gaussian_width
                    .ok_or_else(|| Error::config("gaussian-width", "required for the gaussian basis"))?;
                BasisKind::gaussian(w)?
            }
        })
    }

    pub fn metric_for(&self, d: usize) -> Result<Metric<f64>> {
        match self.metric {
            MetricChoice::Euclidean => Ok(Metric::Euclidean),
            MetricChoice::Mahalanobis => {
                let w = self
                    .metric_weights
                    .as_ref()
                    .ok_or_else(|| Error::config("metric-weights", "required for the mahalanobis metric"))?;
                if w.len() != d * d {
                    return Err(Error::config("metric-weights", format!("expected {} values for d = {d}", d * d)));
                }
                Metric::mahalanobis(Array2::from_shape_vec((d, d), w.clone()).expect("length checked"))
            }
        }
    }

    /// Library-level annealing configuration.
    pub fn anneal_config(&self, d: usize) -> Result<AnnealConfig<f64>> {
        let schedule = match (self.schedule, self.gamma) {
            (ScheduleChoice::Geometric, Some(g)) => CoolingSchedule::geometric(self.t0, g, self.floor)?,
            (ScheduleChoice::Geometric, None) => CoolingSchedule::reaching_floor(self.t0, self.floor, self.iterations)?,
            (ScheduleChoice::Logarithmic, _) => CoolingSchedule::logarithmic(self.t0, self.floor)?,
        };
        if !(self.birth_margin >= 0.0) {
            return Err(Error::config("birth-margin", "must be nonnegative"));
        }
        let mut config = AnnealConfig::new(self.iterations);
        config.schedule = schedule;
        config.criterion = self.criterion;
        config.basis = self.basis_kind()?;
        config.metric = self.metric_for(d)?;
        config.birth_margin = self.birth_margin;
        config.zeta = self.zeta;
        config.kmax = self.kmax;
        config.ratio_mode = self.ratio_mode;
        config.probs = MoveProbabilities::new(self.move_probs)?;
        config.update = UpdateParams {
            rw_step_frac: self.rw_step_frac,
            global_prop_prob: self.global_prop_prob,
        };
        config.init_k = self.init_k;
        config.record_test_mse = self.test_mse;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.data.is_none() {
            return Err(Error::config("data", "a dataset path is required"));
        }
        if self.chains == 0 {
            return Err(Error::config("chains", "must be at least 1"));
        }
        self.anneal_config(self.inputs.unwrap_or(1).max(1)).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub seed: u64,
    pub k_map: usize,
    pub log_post: f64,
}

/// Result file written by `fit` and read by `evaluate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub k_map: usize,
    pub log_post: f64,
    pub map_iteration: usize,
    pub train_mse: f64,
    pub test_mse: Option<f64>,
    pub criterion: CriterionKind,
    pub calibration_constant: f64,
    pub basis: BasisChoice,
    pub gaussian_width: Option<f64>,
    pub metric: MetricChoice,
    pub metric_weights: Option<Vec<f64>>,
    pub inputs: usize,
    pub outputs: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
    pub chain: usize,
    pub chains: Vec<ChainSummary>,
    /// `k × d`
    pub centres: Vec<Vec<f64>>,
    /// `(1 + d + k) × c`: constant row, `d` linear rows, then one row per basis.
    pub coefficients: Vec<Vec<f64>>,
    pub config: RunConfig,
}

impl FitSummary {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string_pretty(self).expect("summary serializes");
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn centre_set(&self) -> Result<CentreSet<f64>> {
        CentreSet::from_rows(self.inputs, &self.centres)
    }

    pub fn coefficient_matrix(&self) -> Result<Array2<f64>> {
        let rows = self.coefficients.len();
        let flat: Vec<f64> = self.coefficients.iter().flatten().copied().collect();
        if flat.len() != rows * self.outputs {
            return Err(Error::Dimension("ragged coefficient matrix".into()));
        }
        Array2::from_shape_vec((rows, self.outputs), flat).map_err(|e| Error::Dimension(e.to_string()))
    }

    /// Grand-mean squared error of the saved model on `data`.
    pub fn mse_on(&self, data: &Dataset<f64>) -> Result<f64> {
        if data.input_dim() != self.inputs || data.output_dim() != self.outputs {
            return Err(Error::Dimension(format!(
                "model is {}→{}, dataset is {}→{}",
                self.inputs,
                self.outputs,
                data.input_dim(),
                data.output_dim()
            )));
        }
        let basis = match self.basis {
            BasisChoice::Linear => BasisKind::Linear,
            BasisChoice::Cubic => BasisKind::Cubic,
            BasisChoice::ThinPlateSpline => BasisKind::ThinPlateSpline,
            BasisChoice::Gaussian => BasisKind::gaussian(self.gaussian_width.unwrap_or(f64::NAN))?,
        };
        let metric = match (&self.metric, &self.metric_weights) {
            (MetricChoice::Euclidean, _) => Metric::Euclidean,
            (MetricChoice::Mahalanobis, Some(w)) => {
                let d = self.inputs;
                Metric::mahalanobis(
                    Array2::from_shape_vec((d, d), w.clone()).map_err(|e| Error::Dimension(e.to_string()))?,
                )?
            }
            (MetricChoice::Mahalanobis, None) => return Err(Error::config("metric-weights", "missing from model")),
        };
        let coef = self.coefficient_matrix()?;
        let pred = predict(&self.centre_set()?, coef.view(), &basis, &metric, data.x())?;
        mean_squared_error(pred.view(), data.y())
    }
}

fn matrix_rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// Loads the dataset named by `config` and splits it into train and optional test.
pub fn load_split(config: &RunConfig) -> Result<(Dataset<f64>, Option<Dataset<f64>>)> {
    let path = config.data.as_ref().ok_or_else(|| Error::config("data", "a dataset path is required"))?;
    let (d, c) = match (config.inputs, config.outputs) {
        (Some(d), Some(c)) => (d, c),
        (d, c) => {
            let (hd, hc) = csv_shape(path)?;
            (d.unwrap_or(hd), c.unwrap_or(hc))
        }
    };
    let data: Dataset<f64> = load_csv(path, d, c)?;
    let n = data.len();
    let n_train = config.n_train.unwrap_or(n / 2);
    if n_train == n {
        return Ok((data, None));
    }
    let policy = match config.split {
        SplitChoice::FirstN => SplitPolicy::FirstN,
        SplitChoice::Shuffled => SplitPolicy::Shuffled(config.split_seed.unwrap_or(config.seed)),
    };
    let (train, test) = split(&data, SplitSpec { n_train, policy })?;
    Ok((train, Some(test)))
}

/// Path of chain `s`'s trace: unchanged for a single chain, otherwise
/// `stem.chain{s}.ext`.
pub fn chain_path(path: &Path, chain: usize, chains: usize) -> PathBuf {
    if chains <= 1 {
        return path.to_path_buf();
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.chain{chain}.{}", ext.to_string_lossy()),
        None => format!("{stem}.chain{chain}"),
    };
    path.with_file_name(name)
}

/// Runs the fit described by `config`, writes its outputs and returns the summary.
pub fn run_fit(config: &RunConfig) -> Result<(FitSummary, Vec<FitResult<f64>>)> {
    config.validate()?;
    let (train, test) = load_split(config)?;
    let d = train.input_dim();
    let anneal = config.anneal_config(d)?;
    let results = run_multistart(&train, test.as_ref(), &anneal, config.seed, config.chains)?;
    let best = best_chain(&results).expect("at least one chain");
    let fit = &results[best];

    for (s, r) in results.iter().enumerate() {
        if let Some(p) = &config.trace {
            write_trace_file(chain_path(p, s, results.len()), &r.trace)?;
        }
        if let Some(p) = &config.trace_csv {
            let p = chain_path(p, s, results.len());
            let p = if p.extension().is_some_and(|e| e == "csv") {
                p
            } else {
                p.with_extension("csv")
            };
            write_trace_file(p, &r.trace)?;
        }
    }

    let crit = Criterion::for_dataset(config.criterion, &train);
    let summary = FitSummary {
        k_map: fit.map_state.k(),
        log_post: fit.map_state.log_post,
        map_iteration: fit.map_iteration,
        train_mse: fit.train_mse,
        test_mse: fit.test_mse,
        criterion: config.criterion,
        calibration_constant: crit.calibration_constant(),
        basis: config.basis,
        gaussian_width: config.gaussian_width.filter(|_| config.basis == BasisChoice::Gaussian),
        metric: config.metric,
        metric_weights: config.metric_weights.clone().filter(|_| config.metric == MetricChoice::Mahalanobis),
        inputs: d,
        outputs: train.output_dim(),
        n_train: train.len(),
        n_test: test.as_ref().map_or(0, |t| t.len()),
        seed: fit.seed,
        chain: best,
        chains: results
            .iter()
            .map(|r| ChainSummary {
                seed: r.seed,
                k_map: r.map_state.k(),
                log_post: r.map_state.log_post,
            })
            .collect(),
        centres: matrix_rows(&fit.map_state.centres.to_array()),
        coefficients: matrix_rows(&fit.coefficients),
        config: config.clone(),
    };
    if let Some(p) = &config.result {
        summary.write(p)?;
    }
    Ok((summary, results))
}

pub fn command() -> Command {
    let mut fit = Command::new("fit")
        .about("Fit an RBF network by reversible-jump simulated annealing")
        .arg(Arg::new("config").long("config").value_name("FILE").help("flat key = value config file"));
    for (key, help) in FIT_KEYS {
        fit = fit.arg(Arg::new(*key).long(*key).value_name("VALUE").help(*help).allow_hyphen_values(true));
    }
    Command::new("rjsa")
        .about("Reversible-jump MCMC simulated annealing for RBF networks")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(
            Command::new("generate")
                .about("Write a noisy robot-arm dataset as CSV")
                .arg(Arg::new("n").long("n").default_value("400").value_parser(clap::value_parser!(usize)))
                .arg(Arg::new("sigma").long("sigma").default_value("0.05").value_parser(clap::value_parser!(f64)))
                .arg(Arg::new("seed").long("seed").default_value("1").value_parser(clap::value_parser!(u64)))
                .arg(Arg::new("out").long("out").required(true).value_name("FILE")),
        )
        .subcommand(fit)
        .subcommand(
            Command::new("evaluate")
                .about("Report the MSE of a saved model on a dataset")
                .arg(Arg::new("model").long("model").required(true).value_name("FILE"))
                .arg(Arg::new("data").long("data").required(true).value_name("FILE"))
                .arg(
                    Arg::new("n-train")
                        .long("n-train")
                        .value_parser(clap::value_parser!(usize))
                        .help("report train/test MSE for a first-n split instead of the whole file"),
                )
                .arg(Arg::new("quiet").long("quiet").action(ArgAction::SetTrue)),
        )
}

pub fn cmd_generate(m: &ArgMatches) -> Result<String> {
    let n = *m.get_one::<usize>("n").expect("defaulted");
    let sigma = *m.get_one::<f64>("sigma").expect("defaulted");
    let seed = *m.get_one::<u64>("seed").expect("defaulted");
    let out = m.get_one::<String>("out").expect("required");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Dataset<f64> = generate_robot_arm(n, sigma, &mut rng)?;
    write_csv(out, &data)?;
    Ok(format!("wrote {n} samples to {out} (seed={seed})"))
}

pub fn fit_config_from(m: &ArgMatches) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    if let Some(path) = m.get_one::<String>("config") {
        config.apply_file(path)?;
    }
    for (key, _) in FIT_KEYS {
        if let Some(v) = m.get_one::<String>(key) {
            config.set(key, v)?;
        }
    }
    Ok(config)
}

pub fn cmd_fit(m: &ArgMatches) -> Result<String> {
    let config = fit_config_from(m)?;
    let (s, _) = run_fit(&config)?;
    let test = s.test_mse.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}"));
    Ok(format!(
        "criterion={} k_map={} log_post={:.4} train_mse={:.6} test_mse={} seed={} chain={}",
        s.criterion, s.k_map, s.log_post, s.train_mse, test, s.seed, s.chain
    ))
}

pub fn cmd_evaluate(m: &ArgMatches) -> Result<String> {
    let model = FitSummary::read(m.get_one::<String>("model").expect("required"))?;
    let path = m.get_one::<String>("data").expect("required");
    let (d, c) = csv_shape(path)?;
    if d != model.inputs || c != model.outputs {
        return Err(Error::Dimension(format!(
            "model is {}→{}, dataset is {d}→{c}",
            model.inputs, model.outputs
        )));
    }
    let data: Dataset<f64> = load_csv(path, d, c)?;
    match m.get_one::<usize>("n-train") {
        Some(&n_train) => {
            let (train, test) = split(&data, SplitSpec::first_n(n_train))?;
            Ok(format!(
                "train_mse={:e} test_mse={:e}",
                model.mse_on(&train)?,
                model.mse_on(&test)?
            ))
        }
        None => Ok(format!("mse={:e}", model.mse_on(&data)?)),
    }
}

/// Parses `args` and runs the chosen subcommand, returning the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match matches.subcommand() {
        Some(("generate", m)) => cmd_generate(m),
        Some(("fit", m)) => cmd_fit(m),
        Some(("evaluate", m)) => cmd_evaluate(m),
        _ => unreachable!("subcommand required"),
    };
    match outcome {
        Ok(line) => {
            println!("{line}");
            0
        }
        Err(e) => {
            match &e {
                Error::Config { field, reason } => eprintln!("error: invalid value for --{field}: {reason}"),
                other => eprintln!("error: {other}"),
            }
            e.exit_code()
        }
    }
}

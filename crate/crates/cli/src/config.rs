//! Experiment configuration: a flat `key = value` file with `#` comments.
//!
//! Every knob of the pipeline lives here; the CLI flags only narrow or
//! override what the file says. Lists are comma-separated. Unknown keys are
//! rejected so typos fail fast instead of silently using defaults.

use std::fmt::Write as _;
use std::path::PathBuf;

use kline_core::dataset::{SplitStrategy, HORIZONS};
use kline_core::imaging::{ChartStyle, ChartVariant};
use kline_core::nn::{Optimizer, TrainConfig};
use kline_core::Date;

use crate::AppError;

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    /// Directory of per-ticker CSV files (`<TICKER>.csv`).
    pub data_dir: PathBuf,
    /// Root for datasets, models, and reports.
    pub out_dir: PathBuf,
    /// CSV download endpoint for `fetch`.
    pub endpoint: Option<String>,
    pub tickers: Vec<String>,
    pub train_start: Date,
    pub train_end: Date,
    pub test_end: Date,
    pub horizons: Vec<usize>,
    pub variants: Vec<ChartVariant>,
    /// Strategy used by `train`/`evaluate`.
    pub split: SplitStrategy,
    /// Strategies swept by `matrix` (defaults to `[split]`).
    pub splits: Vec<SplitStrategy>,
    pub test_ratio: f64,
    pub train_ratio: f64,
    pub split_seed: u64,
    pub image_width: usize,
    pub image_height: usize,
    /// Also dump per-sample PNGs during `build` (inspection only).
    pub write_png: bool,
    /// Horizon highlighted by the split-comparison figure.
    pub figure_horizon: usize,
    pub train: TrainConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            data_dir: "data".into(),
            out_dir: "out".into(),
            endpoint: None,
            tickers: Vec::new(),
            train_start: "2014-12-31".parse().unwrap(),
            train_end: "2018-12-31".parse().unwrap(),
            test_end: "2019-12-31".parse().unwrap(),
            horizons: HORIZONS.to_vec(),
            variants: ChartVariant::ALL.to_vec(),
            split: SplitStrategy::Time,
            splits: vec![SplitStrategy::Time],
            test_ratio: 0.2,
            train_ratio: 0.8,
            split_seed: 7,
            image_width: 96,
            image_height: 96,
            write_png: false,
            figure_horizon: 90,
            train: TrainConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig, AppError> {
        let mut config = ExperimentConfig::default();
        let mut explicit_splits = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| AppError::usage(format!("config line {line_no}: expected `key = value`")))?;
            let (key, value) = (key.trim(), value.trim());
            let err = |what: &str| AppError::usage(format!("config line {line_no}: {what}"));

            match key {
                "data_dir" => config.data_dir = value.into(),
                "out_dir" => config.out_dir = value.into(),
                "endpoint" => config.endpoint = Some(value.to_string()),
                "tickers" => config.tickers = parse_list(value),
                "train_start" => config.train_start = parse_date(value).map_err(|m| err(&m))?,
                "train_end" => config.train_end = parse_date(value).map_err(|m| err(&m))?,
                "test_end" => config.test_end = parse_date(value).map_err(|m| err(&m))?,
                "horizons" => {
                    config.horizons = parse_list(value)
                        .iter()
                        .map(|v| v.parse::<usize>().map_err(|_| err(&format!("bad horizon `{v}`"))))
                        .collect::<Result<_, _>>()?;
                }
                "variants" => {
                    config.variants = parse_list(value)
                        .iter()
                        .map(|v| {
                            ChartVariant::parse(v).ok_or_else(|| err(&format!("unknown variant `{v}`")))
                        })
                        .collect::<Result<_, _>>()?;
                }
                "split" => {
                    config.split = SplitStrategy::parse(value)
                        .ok_or_else(|| err(&format!("unknown split `{value}`")))?;
                }
                "splits" => {
                    explicit_splits = true;
                    config.splits = parse_list(value)
                        .iter()
                        .map(|v| {
                            SplitStrategy::parse(v).ok_or_else(|| err(&format!("unknown split `{v}`")))
                        })
                        .collect::<Result<_, _>>()?;
                }
                "test_ratio" => config.test_ratio = parse_num(value).map_err(|m| err(&m))?,
                "train_ratio" => config.train_ratio = parse_num(value).map_err(|m| err(&m))?,
                "split_seed" => config.split_seed = parse_num(value).map_err(|m| err(&m))?,
                "image_width" => config.image_width = parse_num(value).map_err(|m| err(&m))?,
                "image_height" => config.image_height = parse_num(value).map_err(|m| err(&m))?,
                "write_png" => config.write_png = parse_bool(value).map_err(|m| err(&m))?,
                "figure_horizon" => config.figure_horizon = parse_num(value).map_err(|m| err(&m))?,
                "batch_size" => config.train.batch_size = parse_num(value).map_err(|m| err(&m))?,
                "epochs" => config.train.epochs = parse_num(value).map_err(|m| err(&m))?,
                "learning_rate" => config.train.learning_rate = parse_num(value).map_err(|m| err(&m))?,
                "optimizer" => {
                    config.train.optimizer = match value {
                        "adam" => Optimizer::Adam,
                        "sgd" => Optimizer::Sgd,
                        _ => return Err(err(&format!("unknown optimizer `{value}`"))),
                    }
                }
                "train_seed" => config.train.seed = parse_num(value).map_err(|m| err(&m))?,
                "dropout" => config.train.dropout_enabled = parse_bool(value).map_err(|m| err(&m))?,
                _ => return Err(err(&format!("unknown key `{key}`"))),
            }
        }
        if !explicit_splits {
            config.splits = vec![config.split];
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<ExperimentConfig, AppError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::usage(format!("cannot read config {}: {e}", path.display())))?;
        ExperimentConfig::parse(&text)
    }

    pub fn validate(&self) -> Result<(), AppError> {
        let usage = |m: String| Err(AppError::Usage(m));
        if !(self.train_start < self.train_end && self.train_end < self.test_end) {
            return usage(format!(
                "dates must satisfy train_start < train_end < test_end, got {} / {} / {}",
                self.train_start, self.train_end, self.test_end
            ));
        }
        if self.horizons.is_empty() {
            return usage("horizons list is empty".into());
        }
        for d in &self.horizons {
            if !HORIZONS.contains(d) {
                return usage(format!("horizon {d} not in the supported set {HORIZONS:?}"));
            }
        }
        if self.variants.is_empty() {
            return usage("variants list is empty".into());
        }
        for (name, v) in [("test_ratio", self.test_ratio), ("train_ratio", self.train_ratio)] {
            if !(v > 0.0 && v < 1.0) {
                return usage(format!("{name} must be in (0, 1), got {v}"));
            }
        }
        if self.train.batch_size == 0 || self.train.epochs == 0 {
            return usage("batch_size and epochs must be at least 1".into());
        }
        let style = ChartStyle::new(ChartVariant::NoVolume, self.image_width, self.image_height);
        style.validate().map_err(|e| AppError::usage(e.to_string()))?;
        Ok(())
    }

    /// First day of the test period: the time split's cutoff.
    pub fn cutoff(&self) -> Date {
        self.train_end.next_day()
    }

    pub fn style_for(&self, variant: ChartVariant) -> ChartStyle {
        ChartStyle::new(variant, self.image_width, self.image_height)
    }

    /// Canonical rendering of the effective configuration (sorted keys), the
    /// input to [`config_hash`](Self::config_hash).
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let list = |items: &[String]| items.join(",");
        let mut pairs: Vec<(&str, String)> = vec![
            ("batch_size", self.train.batch_size.to_string()),
            ("data_dir", self.data_dir.display().to_string()),
            ("dropout", self.train.dropout_enabled.to_string()),
            ("endpoint", self.endpoint.clone().unwrap_or_default()),
            ("epochs", self.train.epochs.to_string()),
            ("figure_horizon", self.figure_horizon.to_string()),
            ("horizons", list(&self.horizons.iter().map(|h| h.to_string()).collect::<Vec<_>>())),
            ("image_height", self.image_height.to_string()),
            ("image_width", self.image_width.to_string()),
            ("learning_rate", format!("{:e}", self.train.learning_rate)),
            (
                "optimizer",
                match self.train.optimizer {
                    Optimizer::Adam => "adam".into(),
                    Optimizer::Sgd => "sgd".into(),
                },
            ),
            ("out_dir", self.out_dir.display().to_string()),
            ("split", self.split.name().to_string()),
            (
                "splits",
                list(&self.splits.iter().map(|s| s.name().to_string()).collect::<Vec<_>>()),
            ),
            ("split_seed", self.split_seed.to_string()),
            ("test_end", self.test_end.to_string()),
            ("test_ratio", format!("{:e}", self.test_ratio)),
            ("tickers", list(&self.tickers)),
            ("train_end", self.train_end.to_string()),
            ("train_ratio", format!("{:e}", self.train_ratio)),
            ("train_seed", self.train.seed.to_string()),
            ("train_start", self.train_start.to_string()),
            (
                "variants",
                list(&self.variants.iter().map(|v| v.name().to_string()).collect::<Vec<_>>()),
            ),
            ("write_png", self.write_png.to_string()),
        ];
        pairs.sort_by_key(|(k, _)| *k);
        for (k, v) in pairs {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    /// Short hex digest identifying the effective configuration.
    pub fn config_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let digest = Sha256::digest(self.canonical().as_bytes());
        let mut hex = String::with_capacity(16);
        for b in &digest[..8] {
            let _ = write!(hex, "{b:02x}");
        }
        hex
    }
}

fn parse_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

fn parse_date(value: &str) -> Result<Date, String> {
    value.parse().map_err(|_| format!("bad date `{value}` (expected YYYY-MM-DD)"))
}

fn parse_num<T: std::str::FromStr>(value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("bad number `{value}`"))
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("bad boolean `{value}`")),
    }
}

/// Targeted CLI overrides applied on top of the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub horizon: Option<usize>,
    pub variant: Option<String>,
    pub split: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, config: &mut ExperimentConfig) -> Result<(), AppError> {
        if let Some(d) = self.horizon {
            config.horizons = vec![d];
        }
        if let Some(v) = &self.variant {
            let variant = ChartVariant::parse(v)
                .ok_or_else(|| AppError::usage(format!("unknown variant `{v}`")))?;
            config.variants = vec![variant];
        }
        if let Some(s) = &self.split {
            let split = SplitStrategy::parse(s)
                .ok_or_else(|| AppError::usage(format!("unknown split `{s}`")))?;
            config.split = split;
            config.splits = vec![split];
        }
        if let Some(seed) = self.seed {
            // One seed to reproduce a whole run: drives both the random
            // split and training.
            config.split_seed = seed;
            config.train.seed = seed;
        }
        if let Some(out) = &self.out {
            config.out_dir = out.clone();
        }
        config.validate()
    }
}

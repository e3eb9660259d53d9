//! Integration tests for the pipeline commands: fetch against a local mock
//! endpoint, dataset builds, training, evaluation, the grid runner, and the
//! binary's exit codes.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::net::TcpListener;
use std::path::Path;
use std::thread;

use kline_cli::config::ExperimentConfig;
use kline_cli::evaluate::{cmd_evaluate, evaluate_cell};
use kline_cli::fetch::{cmd_fetch, csv_path, fetch_remote, FetchError};
use kline_cli::matrix::{cmd_matrix, figures_from_table};
use kline_cli::store::{dataset_dir, load_dataset, write_dataset, IMAGES_FILE, MANIFEST_FILE};
use kline_cli::train_cmd::{cmd_train, model_dir, CHECKPOINT_FILE};
use kline_cli::{build_cmd, checkpoint, AppError};
use kline_core::dataset::{Sample, SplitStrategy};
use kline_core::imaging::ChartVariant;
use kline_core::market_data::{parse_csv, serialize_csv, Bar, Series};
use kline_core::nn::{ModelSpec, Params};
use kline_core::rng::{seeded, uniform_range};
use kline_core::{Date, Tensor};

/// Serves canned per-symbol responses over HTTP on an ephemeral port.
fn mock_endpoint(responses: HashMap<String, (u16, String)>) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { break };
            let mut buf = [0u8; 4096];
            let mut request = String::new();
            loop {
                let Ok(n) = stream.read(&mut buf) else { break };
                if n == 0 {
                    break;
                }
                request.push_str(&String::from_utf8_lossy(&buf[..n]));
                if request.contains("\r\n\r\n") {
                    break;
                }
            }
            let symbol = request
                .split_whitespace()
                .nth(1)
                .and_then(|path| path.split('?').nth(1))
                .and_then(|query| {
                    query.split('&').find_map(|kv| kv.strip_prefix("symbol=").map(str::to_string))
                })
                .unwrap_or_default();
            let (status, body) = responses
                .get(&symbol)
                .cloned()
                .unwrap_or((404, "not found".to_string()));
            let reason = if status == 200 { "OK" } else { "Error" };
            let response = format!(
                "HTTP/1.1 {status} {reason}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            let _ = stream.write_all(response.as_bytes());
        }
    });
    format!("http://{addr}/history")
}

fn synthetic_series(ticker: &str, len: usize, seed: u64, start: &str) -> Series {
    let mut rng = seeded(seed);
    let mut bars = Vec::with_capacity(len);
    let mut date: Date = start.parse().unwrap();
    let mut price = 80.0f64;
    for _ in 0..len {
        let close = (price + uniform_range(&mut rng, -1.5, 1.6)).max(1.0);
        bars.push(Bar {
            date,
            open: price,
            high: price.max(close) + 0.6,
            low: (price.min(close) - 0.6).max(0.5),
            close,
            adj_close: Some(close),
            volume: 900 + (uniform_range(&mut rng, 0.0, 4_000.0) as u64),
        });
        date = date.next_day();
        price = close;
    }
    Series { ticker: ticker.into(), bars }
}

fn base_config(dir: &Path) -> ExperimentConfig {
    let text = format!(
        "data_dir = {}\nout_dir = {}\ntickers = AAA, BBB\n\
         train_start = 2018-01-01\ntrain_end = 2018-06-05\ntest_end = 2018-12-31\n\
         horizons = 20\nvariants = no_volume\nsplit = automatic\n\
         image_width = 64\nimage_height = 64\n\
         epochs = 2\nbatch_size = 4\ntrain_seed = 9\ndropout = false\n",
        dir.join("data").display(),
        dir.join("out").display(),
    );
    ExperimentConfig::parse(&text).unwrap()
}

fn write_series_csvs(config: &ExperimentConfig, len: usize) {
    std::fs::create_dir_all(&config.data_dir).unwrap();
    for (i, ticker) in config.tickers.iter().enumerate() {
        let series = synthetic_series(ticker, len, 100 + i as u64, "2018-01-01");
        std::fs::write(csv_path(&config.data_dir, ticker), serialize_csv(&series)).unwrap();
    }
}

// Fetch ---------------------------------------------------------------

#[test]
fn fetch_remote_matches_parse_csv_on_served_body() {
    let series = synthetic_series("AAA", 50, 1, "2018-01-01");
    let body = serialize_csv(&series);
    let endpoint = mock_endpoint(HashMap::from([("AAA".to_string(), (200, body.clone()))]));

    let fetched = fetch_remote(
        &endpoint,
        "AAA",
        "2018-01-01".parse().unwrap(),
        "2019-01-01".parse().unwrap(),
    )
    .unwrap();
    let direct = parse_csv("AAA", body.as_bytes()).unwrap();
    assert_eq!(fetched, direct);
}

#[test]
fn fetch_remote_filters_rows_outside_the_range() {
    let series = synthetic_series("AAA", 60, 2, "2018-01-01");
    let endpoint = mock_endpoint(HashMap::from([(
        "AAA".to_string(),
        (200, serialize_csv(&series)),
    )]));

    let start: Date = "2018-01-15".parse().unwrap();
    let end: Date = "2018-02-10".parse().unwrap();
    let fetched = fetch_remote(&endpoint, "AAA", start, end).unwrap();
    // Oracle: filter the source series directly.
    let expected: Vec<&Bar> =
        series.bars.iter().filter(|b| b.date >= start && b.date <= end).collect();
    assert_eq!(fetched.bars.len(), expected.len());
    assert!(fetched.bars.iter().all(|b| b.date >= start && b.date <= end));
    assert_eq!(fetched.bars.first().unwrap().date, expected[0].date);
}

#[test]
fn fetch_remote_reports_http_status() {
    let endpoint = mock_endpoint(HashMap::new());
    let err = fetch_remote(
        &endpoint,
        "MISSING",
        "2018-01-01".parse().unwrap(),
        "2018-02-01".parse().unwrap(),
    )
    .unwrap_err();
    match err {
        FetchError::HttpStatus(code) => assert_eq!(code, 404),
        other => panic!("expected HttpStatus, got {other:?}"),
    }
}

#[test]
fn cmd_fetch_writes_skips_and_reports_partial_failures() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = base_config(dir.path());
    config.tickers = vec!["AAA".into(), "BBB".into(), "CCC".into()];

    let aaa = synthetic_series("AAA", 160, 3, "2018-01-01");
    let bbb = synthetic_series("BBB", 160, 4, "2018-01-01");
    config.endpoint = Some(mock_endpoint(HashMap::from([
        ("AAA".to_string(), (200, serialize_csv(&aaa))),
        ("BBB".to_string(), (200, serialize_csv(&bbb))),
    ])));

    // CCC 404s: the other two still land on disk, the command fails.
    let err = cmd_fetch(&config, false).unwrap_err();
    assert!(matches!(err, AppError::Data(_)));
    assert!(err.to_string().contains("CCC"));
    assert!(csv_path(&config.data_dir, "AAA").exists());
    assert!(csv_path(&config.data_dir, "BBB").exists());
    assert!(!csv_path(&config.data_dir, "CCC").exists());

    // The fetched file re-parses to the identical series.
    let raw = std::fs::read(csv_path(&config.data_dir, "AAA")).unwrap();
    assert_eq!(parse_csv("AAA", &raw).unwrap(), aaa);

    // Second run with the two present: skips both, still fails on CCC.
    let err = cmd_fetch(&config, false).unwrap_err();
    assert!(err.to_string().contains("CCC"));

    // Without CCC everything is already present: zero downloads.
    config.tickers = vec!["AAA".into(), "BBB".into()];
    let summary = cmd_fetch(&config, false).unwrap();
    assert_eq!(summary.downloaded, 0);
    assert_eq!(summary.skipped, 2);
}

// Build ---------------------------------------------------------------

#[test]
fn build_sample_counts_follow_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = base_config(dir.path());
    config.tickers = vec!["AAA".into()];
    write_series_csvs(&config, 200);

    let summary = build_cmd::cmd_build(&config).unwrap();
    // 200 − 60 − 60 − 20 + 1 = 61.
    assert_eq!(summary.datasets, vec![(ChartVariant::NoVolume, 20, 61)]);
    let (_, samples) = load_dataset(&dataset_dir(&config.out_dir, ChartVariant::NoVolume, 20)).unwrap();
    assert_eq!(samples.len(), 61);
}

#[test]
fn build_skips_too_short_tickers_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = base_config(dir.path());
    std::fs::create_dir_all(&config.data_dir).unwrap();
    let long = synthetic_series("AAA", 160, 5, "2018-01-01");
    let short = synthetic_series("BBB", 100, 6, "2018-01-01");
    std::fs::write(csv_path(&config.data_dir, "AAA"), serialize_csv(&long)).unwrap();
    std::fs::write(csv_path(&config.data_dir, "BBB"), serialize_csv(&short)).unwrap();

    let summary = build_cmd::cmd_build(&config).unwrap();
    assert_eq!(summary.datasets.len(), 1);
    assert_eq!(summary.datasets[0].2, 21); // 160−139 from AAA only
    assert_eq!(summary.skipped.len(), 1);
    assert!(summary.skipped[0].0.contains("BBB"));

    let data_path = dataset_dir(&config.out_dir, ChartVariant::NoVolume, 20);
    let manifest1 = std::fs::read(data_path.join(MANIFEST_FILE)).unwrap();
    let images1 = std::fs::read(data_path.join(IMAGES_FILE)).unwrap();
    build_cmd::cmd_build(&config).unwrap();
    assert_eq!(manifest1, std::fs::read(data_path.join(MANIFEST_FILE)).unwrap());
    assert_eq!(images1, std::fs::read(data_path.join(IMAGES_FILE)).unwrap());
}

// Train / evaluate ----------------------------------------------------

#[test]
fn train_then_evaluate_round_trips_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let config = base_config(dir.path());
    write_series_csvs(&config, 150);
    build_cmd::cmd_build(&config).unwrap();

    let outcome = cmd_train(&config).unwrap();
    assert_eq!(outcome.history.len(), config.train.epochs);
    assert!(outcome.checkpoint_path.exists());
    let history1 = std::fs::read(&outcome.history_path).unwrap();
    let ckpt1 = std::fs::read(&outcome.checkpoint_path).unwrap();

    // Fixed seed: bit-identical artifacts on retrain.
    let outcome2 = cmd_train(&config).unwrap();
    assert_eq!(history1, std::fs::read(&outcome2.history_path).unwrap());
    assert_eq!(ckpt1, std::fs::read(&outcome2.checkpoint_path).unwrap());

    let cell = cmd_evaluate(&config, None).unwrap();
    assert_eq!(cell.n_train + cell.n_test, 22); // 11 per ticker at len 150
    assert_eq!(cell.confusion.total(), cell.n_test as u64);
    let cell2 = cmd_evaluate(&config, None).unwrap();
    assert_eq!(cell, cell2);
}

#[test]
fn evaluate_rejects_empty_test_partition() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = base_config(dir.path());
    write_series_csvs(&config, 150);
    build_cmd::cmd_build(&config).unwrap();
    // Every sample ends before 2030: the time split leaves test empty.
    config.split = SplitStrategy::Time;
    config.train_end = "2030-01-01".parse().unwrap();
    config.test_end = "2030-12-31".parse().unwrap();

    cmd_train(&config).unwrap(); // proceeds with a warning
    let err = cmd_evaluate(&config, None).unwrap_err();
    assert!(matches!(err, AppError::Data(_)));
    assert!(err.to_string().contains("empty test set"));
}

#[test]
fn degenerate_always_up_checkpoint_scores_as_expected() {
    // A model whose final bias forces class 1 on a balanced test set:
    // accuracy 0.5, specificity 0, sensitivity 1.
    let dir = tempfile::tempdir().unwrap();
    let mut config = base_config(dir.path());
    config.train_ratio = 0.5;

    let spec = ModelSpec::with_input(64, 64);
    let mut samples = Vec::new();
    let mut date: Date = "2018-01-02".parse().unwrap();
    for i in 0..20usize {
        samples.push(Sample {
            tensor: Tensor::zeros(&[3, 64, 64]),
            label: (i % 2) as u8,
            ticker: "RIG".into(),
            end_index: i,
            end_date: date,
            horizon_d: 20,
        });
        date = date.next_day();
    }
    let data_path = dataset_dir(&config.out_dir, ChartVariant::NoVolume, 20);
    write_dataset(&data_path, &samples, ChartVariant::NoVolume, 20, 64, 64).unwrap();

    let mut params = Params::<f32>::zeros_like(&spec);
    let last = params.layers.len() - 1;
    params.layers[last].1.data_mut()[1] = 10.0;
    let ckpt = model_dir(&config, SplitStrategy::Automatic, ChartVariant::NoVolume, 20)
        .join(CHECKPOINT_FILE);
    checkpoint::save(&ckpt, &spec, &params).unwrap();

    let cell =
        evaluate_cell(&config, SplitStrategy::Automatic, ChartVariant::NoVolume, 20, None).unwrap();
    assert_eq!(cell.n_test, 10);
    assert!((cell.confusion.accuracy() - 0.5).abs() <= 1e-12);
    assert_eq!(cell.confusion.specificity(), 0.0);
    assert_eq!(cell.confusion.sensitivity(), 1.0);
}

#[test]
fn checkpoint_spec_mismatch_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = base_config(dir.path());
    write_series_csvs(&config, 150);
    build_cmd::cmd_build(&config).unwrap();
    cmd_train(&config).unwrap();

    // A checkpoint trained for a different input size must be rejected.
    let wrong_spec = ModelSpec::with_input(96, 96);
    let params = Params::<f32>::zeros_like(&wrong_spec);
    let ckpt = dir.path().join("wrong.ckpt");
    checkpoint::save(&ckpt, &wrong_spec, &params).unwrap();
    let err = cmd_evaluate(&config, Some(&ckpt)).unwrap_err();
    assert!(err.to_string().contains("spec mismatch"), "{err}");
}

// Matrix ----------------------------------------------------------------

#[test]
fn matrix_runs_the_grid_and_emits_figures() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = base_config(dir.path());
    config.variants = vec![ChartVariant::NoVolume, ChartVariant::Gaf];
    config.horizons = vec![1, 20];
    config.train.epochs = 1;
    write_series_csvs(&config, 145);

    let outcome = cmd_matrix(&config).unwrap();
    assert_eq!(outcome.cells.len(), 4);
    assert!(outcome.failures.is_empty());
    assert_eq!(outcome.figure_paths.len(), 2); // one per variant, single split

    let table = std::fs::read_to_string(&outcome.results_path).unwrap();
    assert_eq!(table.lines().filter(|l| !l.starts_with('#') && !l.is_empty()).count(), 5);
    assert!(table.contains("config_hash="));

    // Figures are a pure function of the stored table.
    for (path, regenerated) in figures_from_table(&config, &table).unwrap() {
        let on_disk = std::fs::read_to_string(&path).unwrap();
        assert_eq!(on_disk, regenerated, "{}", path.display());
    }
}

#[test]
fn matrix_isolates_failing_cells() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = base_config(dir.path());
    config.variants = vec![ChartVariant::NoVolume];
    config.horizons = vec![1, 20];
    // 141 bars: one sample at h=1... enough to train; h=20 yields samples
    // only if len >= 140; use 140 so h=20 has exactly 1 sample and the
    // automatic split (train ratio 0.8 -> floor(0.8) = 0 train) fails.
    write_series_csvs(&config, 140);
    config.tickers = vec!["AAA".into()];
    write_series_csvs(&config, 140);

    let outcome = cmd_matrix(&config).unwrap();
    assert_eq!(outcome.cells.len() + outcome.failures.len(), 2);
    assert!(!outcome.failures.is_empty());
    let table = std::fs::read_to_string(&outcome.results_path).unwrap();
    assert!(table.contains("# FAILED"));
}

#[test]
fn leakage_warning_lands_in_leaky_reports() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = base_config(dir.path());
    config.splits = vec![SplitStrategy::Random, SplitStrategy::Time];
    config.train.epochs = 1;
    config.train_end = "2018-05-20".parse().unwrap();
    write_series_csvs(&config, 150);

    let outcome = cmd_matrix(&config).unwrap();
    assert_eq!(outcome.cells.len(), 2);
    assert_eq!(outcome.figure_paths.len(), 2); // variant chart + split bars
    let table = std::fs::read_to_string(&outcome.results_path).unwrap();
    assert!(table.contains("lookahead leakage"));
}

// Binary exit codes -----------------------------------------------------

#[test]
fn binary_exit_codes_match_the_contract() {
    let exe = env!("CARGO_BIN_EXE_kline");
    let dir = tempfile::tempdir().unwrap();

    // Usage error: missing config file.
    let out = std::process::Command::new(exe)
        .args(["build", "--config", dir.path().join("nope.conf").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // Usage error: bad flag.
    let out = std::process::Command::new(exe).args(["build"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    // Data error: config is fine but the CSVs are missing.
    let conf = dir.path().join("exp.conf");
    std::fs::write(
        &conf,
        format!(
            "data_dir = {}\nout_dir = {}\ntickers = ZZZ\n",
            dir.path().join("data").display(),
            dir.path().join("out").display()
        ),
    )
    .unwrap();
    let out = std::process::Command::new(exe)
        .args(["build", "--config", conf.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Success: help.
    let out = std::process::Command::new(exe).args(["--help"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("matrix"));
}

//! On-disk dataset store: one directory per (variant, horizon) holding a
//! manifest and a raw image store.
//!
//! `manifest.tsv` starts with `#` metadata lines, then one tab-separated
//! record per sample: `ticker  end_date  horizon  label  offset`. The offset
//! is the byte position of the sample's raw RGB frame inside `images.bin`;
//! every frame is exactly `width × height × 3` bytes. Both files are written
//! deterministically, so rebuilding from unchanged inputs is byte-identical.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use kline_core::dataset::Sample;
use kline_core::imaging::{image_to_tensor, tensor_to_image, ChartVariant, Image};
use kline_core::Date;

use crate::fsutil::atomic_write;
use crate::AppError;

pub const MANIFEST_FILE: &str = "manifest.tsv";
pub const IMAGES_FILE: &str = "images.bin";

/// Directory for one (variant, horizon) dataset.
pub fn dataset_dir(out_dir: &Path, variant: ChartVariant, horizon: usize) -> PathBuf {
    out_dir.join("data").join(variant.name()).join(format!("h{horizon}"))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct DatasetMeta {
    pub variant: ChartVariant,
    pub horizon: usize,
    pub width: usize,
    pub height: usize,
    pub count: usize,
}

/// Serializes samples into `(manifest, images)` byte buffers.
pub fn encode_dataset(
    samples: &[Sample],
    variant: ChartVariant,
    horizon: usize,
    width: usize,
    height: usize,
) -> (String, Vec<u8>) {
    let frame_len = width * height * Image::CHANNELS;
    let mut manifest = String::new();
    let _ = writeln!(manifest, "# dataset manifest");
    let _ = writeln!(
        manifest,
        "# variant={} horizon={horizon} width={width} height={height} count={}",
        variant.name(),
        samples.len()
    );
    let _ = writeln!(manifest, "# fields: ticker\tend_date\thorizon\tlabel\toffset");
    let mut images = Vec::with_capacity(samples.len() * frame_len);
    for sample in samples {
        let offset = images.len();
        let image = tensor_to_image(&sample.tensor);
        debug_assert_eq!(image.pixels().len(), frame_len);
        images.extend_from_slice(image.pixels());
        let _ = writeln!(
            manifest,
            "{}\t{}\t{}\t{}\t{offset}",
            sample.ticker, sample.end_date, sample.horizon_d, sample.label
        );
    }
    (manifest, images)
}

/// Writes a dataset directory (atomically, file by file).
pub fn write_dataset(
    dir: &Path,
    samples: &[Sample],
    variant: ChartVariant,
    horizon: usize,
    width: usize,
    height: usize,
) -> Result<(), AppError> {
    let (manifest, images) = encode_dataset(samples, variant, horizon, width, height);
    atomic_write(&dir.join(IMAGES_FILE), &images)?;
    atomic_write(&dir.join(MANIFEST_FILE), manifest.as_bytes())?;
    Ok(())
}

/// Loads a dataset directory back into samples (manifest order).
pub fn load_dataset(dir: &Path) -> Result<(DatasetMeta, Vec<Sample>), AppError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest = std::fs::read_to_string(&manifest_path).map_err(|e| {
        AppError::data(format!(
            "cannot read {} (run `kline build` first?): {e}",
            manifest_path.display()
        ))
    })?;
    let images = std::fs::read(dir.join(IMAGES_FILE))?;

    let mut meta: Option<DatasetMeta> = None;
    let mut samples = Vec::new();
    for (idx, line) in manifest.lines().enumerate() {
        let line_no = idx + 1;
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if rest.starts_with("variant=") {
                meta = Some(parse_meta(rest).map_err(|m| {
                    AppError::data(format!("{}:{line_no}: {m}", manifest_path.display()))
                })?);
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let meta = meta
            .ok_or_else(|| AppError::data("manifest is missing its metadata header".to_string()))?;
        let frame_len = meta.width * meta.height * Image::CHANNELS;
        let mut fields = line.split('\t');
        let bad = |what: &str| {
            AppError::data(format!("{}:{line_no}: {what}", manifest_path.display()))
        };
        let ticker = fields.next().ok_or_else(|| bad("missing ticker"))?;
        let end_date: Date = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad end_date"))?;
        let horizon: usize = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad horizon"))?;
        let label: u8 = fields
            .next()
            .and_then(|s| s.parse().ok())
            .filter(|l| *l <= 1)
            .ok_or_else(|| bad("bad label"))?;
        let offset: usize = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad offset"))?;
        if offset + frame_len > images.len() {
            return Err(bad("offset beyond image store"));
        }
        let image = Image::from_raw(
            meta.width,
            meta.height,
            images[offset..offset + frame_len].to_vec(),
        );
        samples.push(Sample {
            tensor: image_to_tensor(&image),
            label,
            ticker: ticker.to_string(),
            end_index: samples.len(),
            end_date,
            horizon_d: horizon,
        });
    }

    let meta = meta.ok_or_else(|| AppError::data("empty manifest".to_string()))?;
    if samples.len() != meta.count {
        return Err(AppError::data(format!(
            "manifest declares {} samples but contains {}",
            meta.count,
            samples.len()
        )));
    }
    Ok((meta, samples))
}

fn parse_meta(line: &str) -> Result<DatasetMeta, String> {
    let mut variant = None;
    let mut horizon = None;
    let mut width = None;
    let mut height = None;
    let mut count = None;
    for pair in line.split_whitespace() {
        let (k, v) = pair.split_once('=').ok_or_else(|| format!("bad metadata `{pair}`"))?;
        match k {
            "variant" => variant = ChartVariant::parse(v),
            "horizon" => horizon = v.parse().ok(),
            "width" => width = v.parse().ok(),
            "height" => height = v.parse().ok(),
            "count" => count = v.parse().ok(),
            _ => return Err(format!("unknown metadata key `{k}`")),
        }
    }
    Ok(DatasetMeta {
        variant: variant.ok_or("missing variant")?,
        horizon: horizon.ok_or("missing horizon")?,
        width: width.ok_or("missing width")?,
        height: height.ok_or("missing height")?,
        count: count.ok_or("missing count")?,
    })
}

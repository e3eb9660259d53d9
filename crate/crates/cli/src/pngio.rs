//! PNG export for chart inspection.

use std::path::Path;

use kline_core::imaging::Image;

use crate::AppError;

/// Writes an image as an 8-bit RGB PNG.
pub fn write_png(path: &Path, img: &Image) -> Result<(), AppError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let buffer = image::RgbImage::from_raw(
        img.width() as u32,
        img.height() as u32,
        img.pixels().to_vec(),
    )
    .expect("pixel buffer matches dimensions");
    buffer
        .save(path)
        .map_err(|e| AppError::data(format!("cannot write {}: {e}", path.display())))
}

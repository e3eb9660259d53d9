//! Core library for image-based stock trend classification.
//!
//! The pipeline turns daily OHLCV series into labeled chart images and trains
//! a small convolutional network on them:
//!
//! 1. [`market_data`] — parse and validate per-ticker OHLCV series.
//! 2. [`indicators`] — moving averages and MACD for the richer chart variants.
//! 3. [`imaging`] — rasterize 60-bar windows into candlestick charts of
//!    varying information richness, or encode them as Gramian angular fields.
//! 4. [`dataset`] — slice series into windows, assign binary trend labels at a
//!    horizon, and partition samples by random / sequential / calendar-cutoff
//!    strategies.
//! 5. [`nn`] — a from-scratch trainable CNN with exact-gradient backprop.
//! 6. [`metrics`] — confusion counts and the derived classification statistics.
//!
//! Everything here is pure computation over in-memory buffers; file formats,
//! networking, and the command line live in the companion `kline-cli` crate.
//! The crate is `no_std` (with `alloc`) and all floating-point math routes
//! through `libm`, so outputs are bit-identical across platforms.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod dataset;
pub mod date;
pub mod imaging;
pub mod indicators;
pub mod market_data;
pub mod metrics;
pub mod nn;
pub mod rng;
pub mod tensor;

pub use dataset::{Sample, SplitResult, SplitStrategy};
pub use date::Date;
pub use imaging::{ChartStyle, ChartVariant, GafMatrix, Image};
pub use indicators::IndicatorSeries;
pub use market_data::{Bar, Series};
pub use metrics::Confusion;
pub use nn::{ModelSpec, Params, TrainConfig};
pub use tensor::Tensor;

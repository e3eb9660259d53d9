//! Golden-image checks: fixed windows must rasterize to byte-identical
//! pixels on every platform and run.
//!
//! The fixtures avoid transcendental math so the expected hashes hold
//! everywhere; coordinates come out of pure IEEE add/mul/divide plus
//! rounding, which are exactly specified.

use kline_core::dataset::{build_samples, WARMUP};
use kline_core::imaging::{render_candles, ChartStyle, ChartVariant, WindowIndicators};
use kline_core::indicators::{macd, sma};
use kline_core::market_data::{Bar, Series};
use kline_core::rng::{seeded, uniform_range};
use kline_core::Date;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in bytes {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Deterministic series long enough for a fully warmed-up window.
fn fixture_series(len: usize) -> Series {
    let mut rng = seeded(0xC0FFEE);
    let mut bars = Vec::with_capacity(len);
    let mut date: Date = "2018-01-02".parse().unwrap();
    let mut price = 100.0f64;
    for i in 0..len {
        let drift = uniform_range(&mut rng, -1.75, 2.0);
        let open = price;
        let close = (price + drift).max(1.0);
        let high = open.max(close) + uniform_range(&mut rng, 0.0, 1.2);
        let low = (open.min(close) - uniform_range(&mut rng, 0.0, 1.2)).max(0.5);
        let volume = 500 + ((i as u64 * 7919) % 4000);
        bars.push(Bar { date, open, high, low, close, adj_close: None, volume });
        date = date.next_day();
        price = close;
    }
    Series { ticker: "GOLD".into(), bars }
}

/// Pixel hashes recorded from the first verified run. A change here means
/// the renderer's output changed, which breaks stored datasets.
const GOLDEN_HASHES: [(ChartVariant, u64); 5] = [
    (ChartVariant::NoVolume, 0x5774bca94064ebbf),
    (ChartVariant::Volume, 0x99586a5ea46d2bae),
    (ChartVariant::MacdMa, 0x2ed371a4e89001b2),
    (ChartVariant::Gaf, 0xa1758a9a5c16fbc8),
    (ChartVariant::MacdVolumeLower, 0x37f86a8af59e2ab2),
];

#[test]
fn fixed_window_renders_to_golden_hashes() {
    let series = fixture_series(WARMUP + 60);
    let closes = series.closes();
    let window = &series.bars[WARMUP..];
    assert_eq!(window.len(), 60);

    let sma5 = sma(&closes, 5).unwrap();
    let sma10 = sma(&closes, 10).unwrap();
    let sma30 = sma(&closes, 30).unwrap();
    let m = macd(&closes).unwrap();
    let bundle = WindowIndicators::slice(&sma5, &sma10, &sma30, &m, WARMUP, 60).unwrap();

    for (variant, expected) in GOLDEN_HASHES {
        let style = ChartStyle::default_for(variant);
        let img = if variant == ChartVariant::Gaf {
            kline_core::imaging::gaf_to_image(
                &kline_core::imaging::gaf(&closes[WARMUP..]),
                &style,
            )
        } else {
            let indicators = variant.needs_indicators().then_some(&bundle);
            render_candles(window, indicators, &style).unwrap()
        };
        assert_eq!(img.width(), 96);
        assert_eq!(img.height(), 96);
        let hash = fnv1a(img.pixels());
        assert_eq!(
            hash, expected,
            "{} render drifted: got {hash:#018x}",
            variant.name()
        );
    }
}

#[test]
fn build_samples_is_deterministic_end_to_end() {
    let series = fixture_series(150);
    let style = ChartStyle::default_for(ChartVariant::MacdMa);
    let a = build_samples(&series, 60, 20, &style).unwrap();
    let b = build_samples(&series, 60, 20, &style).unwrap();
    assert_eq!(a.len(), 11);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x, y);
    }
}

/// Coarse structural review of the fixture render, so the golden hashes are
/// anchored to human-checkable facts rather than only to themselves.
#[test]
fn fixture_render_structure_is_sane() {
    let series = fixture_series(WARMUP + 60);
    let window = &series.bars[WARMUP..];
    let style = ChartStyle::default_for(ChartVariant::Volume);
    let img = render_candles(window, None, &style).unwrap();

    let bullish_bars = window.iter().filter(|b| b.close > b.open).count();
    let bearish_bars = 60 - bullish_bars;
    assert!(bullish_bars > 10 && bearish_bars > 10, "fixture should be mixed");

    let mut bullish_px = 0usize;
    let mut bearish_px = 0usize;
    let mut background_px = 0usize;
    for y in 0..img.height() {
        for x in 0..img.width() {
            let px = img.get(x, y);
            if px == style.bullish_color {
                bullish_px += 1;
            } else if px == style.bearish_color {
                bearish_px += 1;
            } else if px == style.background {
                background_px += 1;
            } else {
                panic!("unexpected color {px:?} in a variant without overlays");
            }
        }
    }
    assert!(bullish_px > 100 && bearish_px > 100);
    // Candles plus volume bars cover a minority of a 96×96 chart.
    assert!(background_px > 96 * 96 / 2);
}

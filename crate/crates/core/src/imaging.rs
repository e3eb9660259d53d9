//! Chart rasterization and Gramian angular field encoding.
//!
//! A 60-bar window renders into one of five deterministic RGB layouts:
//!
//! * `NoVolume` — candlesticks only.
//! * `Volume` — candlesticks over a volume-bar panel.
//! * `MacdMa` — candlesticks with SMA-5/10/30 overlays, plus MACD and volume
//!   panels below.
//! * `MacdVolumeLower` — same content as `MacdMa` with the two lower panels
//!   swapped (volume directly under the price panel, MACD at the bottom).
//! * `Gaf` — the window's closes as a Gramian angular summation field.
//!
//! Rendering is exact-pixel: no anti-aliasing, no text, no margins beyond
//! candle centering, so identical inputs produce byte-identical images on
//! every platform.

use alloc::vec;
use alloc::vec::Vec;

use crate::indicators::{IndicatorSeries, Macd};
use crate::market_data::Bar;
use crate::tensor::Tensor;

/// Bars per rendered window.
pub const WINDOW_LEN: usize = 60;

/// Default square chart edge in pixels (divisible by 16 so the four 2×
/// poolings of the downstream network divide evenly).
pub const DEFAULT_EDGE_PX: usize = 96;

pub const DEFAULT_BULLISH: [u8; 3] = [255, 0, 0];
pub const DEFAULT_BEARISH: [u8; 3] = [0, 255, 0];
pub const DEFAULT_BACKGROUND: [u8; 3] = [0, 0, 0];

const SMA5_COLOR: [u8; 3] = [255, 255, 255];
const SMA10_COLOR: [u8; 3] = [255, 200, 0];
const SMA30_COLOR: [u8; 3] = [80, 160, 255];
const MACD_LINE_COLOR: [u8; 3] = [255, 255, 255];
const MACD_SIGNAL_COLOR: [u8; 3] = [255, 200, 0];
const MACD_HIST_COLOR: [u8; 3] = [128, 128, 128];

/// The five chart richness classes.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum ChartVariant {
    NoVolume,
    Volume,
    MacdMa,
    Gaf,
    MacdVolumeLower,
}

impl ChartVariant {
    pub const ALL: [ChartVariant; 5] = [
        ChartVariant::NoVolume,
        ChartVariant::Volume,
        ChartVariant::MacdMa,
        ChartVariant::Gaf,
        ChartVariant::MacdVolumeLower,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChartVariant::NoVolume => "no_volume",
            ChartVariant::Volume => "volume",
            ChartVariant::MacdMa => "macd_ma",
            ChartVariant::Gaf => "gaf",
            ChartVariant::MacdVolumeLower => "macd_volume_lower",
        }
    }

    pub fn parse(name: &str) -> Option<ChartVariant> {
        Self::ALL.into_iter().find(|v| v.name() == name)
    }

    /// Whether rendering requires the SMA/MACD bundle.
    pub fn needs_indicators(self) -> bool {
        matches!(self, ChartVariant::MacdMa | ChartVariant::MacdVolumeLower)
    }

    /// Vertical panel split, top to bottom; fractions sum to 1.
    fn panels(self) -> Vec<(Panel, f64)> {
        match self {
            ChartVariant::NoVolume | ChartVariant::Gaf => vec![(Panel::Price, 1.0)],
            ChartVariant::Volume => vec![(Panel::Price, 0.75), (Panel::Volume, 0.25)],
            ChartVariant::MacdMa => {
                vec![(Panel::Price, 0.6), (Panel::Macd, 0.2), (Panel::Volume, 0.2)]
            }
            ChartVariant::MacdVolumeLower => {
                vec![(Panel::Price, 0.6), (Panel::Volume, 0.2), (Panel::Macd, 0.2)]
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Panel {
    Price,
    Volume,
    Macd,
}

/// Rendering configuration: variant, raster size, colors, and panel layout.
#[derive(Clone, PartialEq, Debug)]
pub struct ChartStyle {
    pub variant: ChartVariant,
    pub width_px: usize,
    pub height_px: usize,
    pub bullish_color: [u8; 3],
    pub bearish_color: [u8; 3],
    pub background: [u8; 3],
    /// Top-to-bottom panel fractions; the first panel must be `Price`.
    pub layout: Vec<(Panel, f64)>,
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum StyleError {
    #[error("chart edge {0} is not a positive multiple of 16")]
    EdgeNotMultipleOf16(usize),
    #[error("chart width {0} cannot fit a {WINDOW_LEN}-candle window")]
    TooNarrowForCandles(usize),
    #[error("panel fractions must start with the price panel and sum to 1")]
    BadLayout,
}

impl ChartStyle {
    /// Style with the default colors and the variant's standard layout.
    pub fn new(variant: ChartVariant, width_px: usize, height_px: usize) -> Self {
        ChartStyle {
            variant,
            width_px,
            height_px,
            bullish_color: DEFAULT_BULLISH,
            bearish_color: DEFAULT_BEARISH,
            background: DEFAULT_BACKGROUND,
            layout: variant.panels(),
        }
    }

    /// Default-size style for a variant.
    pub fn default_for(variant: ChartVariant) -> Self {
        ChartStyle::new(variant, DEFAULT_EDGE_PX, DEFAULT_EDGE_PX)
    }

    pub fn validate(&self) -> Result<(), StyleError> {
        for edge in [self.width_px, self.height_px] {
            if edge == 0 || edge % 16 != 0 {
                return Err(StyleError::EdgeNotMultipleOf16(edge));
            }
        }
        if self.variant != ChartVariant::Gaf && self.width_px < WINDOW_LEN {
            return Err(StyleError::TooNarrowForCandles(self.width_px));
        }
        let sum: f64 = self.layout.iter().map(|(_, f)| f).sum();
        let first_is_price = matches!(self.layout.first(), Some((Panel::Price, _)));
        if !first_is_price || (sum - 1.0).abs() > 1e-9 {
            return Err(StyleError::BadLayout);
        }
        Ok(())
    }

    /// Panel pixel ranges `(panel, top_row, height)`, top to bottom.
    /// Cumulative fractions are rounded to rows; the final boundary is pinned
    /// to the image edge so the panels exactly tile the height.
    fn panel_rows(&self) -> Vec<(Panel, usize, usize)> {
        let h = self.height_px as f64;
        let mut out = Vec::with_capacity(self.layout.len());
        let mut cum = 0.0;
        let mut top = 0usize;
        for (i, (panel, frac)) in self.layout.iter().enumerate() {
            cum += frac;
            let bottom = if i + 1 == self.layout.len() {
                self.height_px
            } else {
                (cum * h).round() as usize
            };
            out.push((*panel, top, bottom - top));
            top = bottom;
        }
        out
    }
}

/// An 8-bit RGB raster, row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Image {
    pub const CHANNELS: usize = 3;

    /// A solid-color image.
    pub fn filled(width: usize, height: usize, color: [u8; 3]) -> Self {
        let mut pixels = Vec::with_capacity(width * height * Self::CHANNELS);
        for _ in 0..width * height {
            pixels.extend_from_slice(&color);
        }
        Image { width, height, pixels }
    }

    pub fn from_raw(width: usize, height: usize, pixels: Vec<u8>) -> Self {
        assert_eq!(pixels.len(), width * height * Self::CHANNELS);
        Image { width, height, pixels }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Raw RGB bytes, row-major.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * Self::CHANNELS;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    fn set(&mut self, x: usize, y: usize, color: [u8; 3]) {
        debug_assert!(x < self.width && y < self.height);
        let i = (y * self.width + x) * Self::CHANNELS;
        self.pixels[i..i + 3].copy_from_slice(&color);
    }

    /// Filled rectangle over columns `[x, x + w)` and rows `[y0, y1]`.
    fn fill_rect(&mut self, x: usize, y0: usize, w: usize, y1: usize, color: [u8; 3]) {
        for y in y0..=y1 {
            for dx in 0..w {
                self.set(x + dx, y, color);
            }
        }
    }

    fn vline(&mut self, x: usize, y0: usize, y1: usize, color: [u8; 3]) {
        for y in y0..=y1 {
            self.set(x, y, color);
        }
    }

    /// Integer Bresenham segment, all octants.
    fn line(&mut self, x0: usize, y0: usize, x1: usize, y1: usize, color: [u8; 3]) {
        let (mut x, mut y) = (x0 as isize, y0 as isize);
        let (x1, y1) = (x1 as isize, y1 as isize);
        let dx = (x1 - x).abs();
        let dy = -(y1 - y).abs();
        let sx = if x < x1 { 1 } else { -1 };
        let sy = if y < y1 { 1 } else { -1 };
        let mut err = dx + dy;
        loop {
            self.set(x as usize, y as usize, color);
            if x == x1 && y == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }
}

/// Indicator values covering one window, index-aligned with its bars and
/// fully defined (callers are responsible for warmup).
#[derive(Clone, PartialEq, Debug)]
pub struct WindowIndicators {
    pub sma5: Vec<f64>,
    pub sma10: Vec<f64>,
    pub sma30: Vec<f64>,
    pub macd_line: Vec<f64>,
    pub macd_signal: Vec<f64>,
    pub macd_histogram: Vec<f64>,
}

impl WindowIndicators {
    /// Slices full-series indicators down to `start..start + len`. Returns
    /// `None` if any value in the range is still in warmup.
    pub fn slice(
        sma5: &IndicatorSeries,
        sma10: &IndicatorSeries,
        sma30: &IndicatorSeries,
        macd: &Macd,
        start: usize,
        len: usize,
    ) -> Option<WindowIndicators> {
        let take = |s: &IndicatorSeries| -> Option<Vec<f64>> {
            s.values()[start..start + len].iter().copied().collect()
        };
        Some(WindowIndicators {
            sma5: take(sma5)?,
            sma10: take(sma10)?,
            sma30: take(sma30)?,
            macd_line: take(&macd.macd_line)?,
            macd_signal: take(&macd.signal_line)?,
            macd_histogram: take(&macd.histogram)?,
        })
    }

    fn is_complete(&self, len: usize) -> bool {
        [
            &self.sma5,
            &self.sma10,
            &self.sma30,
            &self.macd_line,
            &self.macd_signal,
            &self.macd_histogram,
        ]
        .iter()
        .all(|v| v.len() == len)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum RenderError {
    #[error("window has {got} bars, expected {WINDOW_LEN}")]
    WrongWindowLength { got: usize },
    #[error("variant requires a complete SMA/MACD bundle over the window")]
    MissingIndicators,
    #[error("invalid chart style: {0}")]
    InvalidStyle(#[from] StyleError),
}

/// Candle geometry shared by the price and volume panels: fixed-width slots
/// of `⌊width / 60⌋` px, centered horizontally, with a 1-px inter-candle gap
/// when the slot is wide enough.
struct Columns {
    candle_width: usize,
    body_width: usize,
    offset: usize,
}

impl Columns {
    fn new(width_px: usize) -> Self {
        let candle_width = width_px / WINDOW_LEN;
        let body_width = if candle_width >= 2 { candle_width - 1 } else { candle_width };
        let offset = (width_px - WINDOW_LEN * candle_width) / 2;
        Columns { candle_width, body_width, offset }
    }

    fn body_x(&self, i: usize) -> usize {
        self.offset + i * self.candle_width
    }

    fn center_x(&self, i: usize) -> usize {
        self.body_x(i) + self.body_width / 2
    }
}

/// Maps a value to a row inside a panel: panel top = `hi`, panel bottom =
/// `lo`. A degenerate range collapses to the panel's vertical midline.
fn value_to_row(v: f64, lo: f64, hi: f64, top: usize, height: usize) -> usize {
    debug_assert!(height > 0);
    if hi > lo {
        let frac = (hi - v) / (hi - lo);
        let row = (frac * (height - 1) as f64).round() as usize;
        top + row.min(height - 1)
    } else {
        top + height / 2
    }
}

/// Rasterizes a 60-bar window.
///
/// Candles are drawn left to right in chronological order; the body spans
/// open↔close (always at least one row, so a doji stays visible), the 1-px
/// wick spans low↔high, and color follows close > open (equal close/open
/// renders bearish). The price axis covers exactly `[min low, max high]` of
/// the window; if all prices are equal every candle collapses onto the panel
/// midline. Indicator-bearing variants overlay SMA-5/10/30 polylines on the
/// price panel and fill MACD/volume panels per the style's layout.
pub fn render_candles(
    window: &[Bar],
    indicators: Option<&WindowIndicators>,
    style: &ChartStyle,
) -> Result<Image, RenderError> {
    if window.len() != WINDOW_LEN {
        return Err(RenderError::WrongWindowLength { got: window.len() });
    }
    style.validate()?;
    let bundle = if style.variant.needs_indicators() {
        match indicators {
            Some(b) if b.is_complete(WINDOW_LEN) => Some(b),
            _ => return Err(RenderError::MissingIndicators),
        }
    } else {
        None
    };

    let mut img = Image::filled(style.width_px, style.height_px, style.background);
    let cols = Columns::new(style.width_px);

    let mut price_lo = f64::INFINITY;
    let mut price_hi = f64::NEG_INFINITY;
    for bar in window {
        price_lo = price_lo.min(bar.low);
        price_hi = price_hi.max(bar.high);
    }

    for (panel, top, height) in style.panel_rows() {
        match panel {
            Panel::Price => {
                draw_candles(&mut img, window, style, &cols, price_lo, price_hi, top, height);
                if let Some(b) = bundle {
                    for (values, color) in [
                        (&b.sma5, SMA5_COLOR),
                        (&b.sma10, SMA10_COLOR),
                        (&b.sma30, SMA30_COLOR),
                    ] {
                        draw_polyline(
                            &mut img, values, &cols, price_lo, price_hi, top, height, color,
                        );
                    }
                }
            }
            Panel::Volume => draw_volume(&mut img, window, style, &cols, top, height),
            Panel::Macd => {
                let b = bundle.expect("layout includes MACD only for indicator variants");
                draw_macd(&mut img, b, &cols, top, height);
            }
        }
    }
    Ok(img)
}

#[allow(clippy::too_many_arguments)]
fn draw_candles(
    img: &mut Image,
    window: &[Bar],
    style: &ChartStyle,
    cols: &Columns,
    lo: f64,
    hi: f64,
    top: usize,
    height: usize,
) {
    for (i, bar) in window.iter().enumerate() {
        let color = if bar.close > bar.open { style.bullish_color } else { style.bearish_color };
        let to_row = |v: f64| value_to_row(v, lo, hi, top, height);

        let y_high = to_row(bar.high);
        let y_low = to_row(bar.low);
        img.vline(cols.center_x(i), y_high, y_low, color);

        let y_top = to_row(bar.open.max(bar.close));
        let y_bot = to_row(bar.open.min(bar.close));
        img.fill_rect(cols.body_x(i), y_top, cols.body_width, y_bot, color);
    }
}

fn draw_volume(
    img: &mut Image,
    window: &[Bar],
    style: &ChartStyle,
    cols: &Columns,
    top: usize,
    height: usize,
) {
    let v_max = window.iter().map(|b| b.volume).max().unwrap_or(0);
    if v_max == 0 {
        return;
    }
    for (i, bar) in window.iter().enumerate() {
        if bar.volume == 0 {
            continue; // halted day: empty bar
        }
        let frac = bar.volume as f64 / v_max as f64;
        let bar_px = ((frac * height as f64).round() as usize).clamp(1, height);
        let color = if bar.close > bar.open { style.bullish_color } else { style.bearish_color };
        img.fill_rect(
            cols.body_x(i),
            top + height - bar_px,
            cols.body_width,
            top + height - 1,
            color,
        );
    }
}

fn draw_macd(img: &mut Image, b: &WindowIndicators, cols: &Columns, top: usize, height: usize) {
    // Scale includes zero so the histogram baseline stays inside the panel.
    let mut lo = 0.0f64;
    let mut hi = 0.0f64;
    for series in [&b.macd_line, &b.macd_signal, &b.macd_histogram] {
        for v in series.iter() {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    let to_row = |v: f64| value_to_row(v, lo, hi, top, height);
    let y_zero = to_row(0.0);
    for (i, v) in b.macd_histogram.iter().enumerate() {
        let y = to_row(*v);
        img.fill_rect(cols.body_x(i), y.min(y_zero), cols.body_width, y.max(y_zero), MACD_HIST_COLOR);
    }
    draw_polyline(img, &b.macd_line, cols, lo, hi, top, height, MACD_LINE_COLOR);
    draw_polyline(img, &b.macd_signal, cols, lo, hi, top, height, MACD_SIGNAL_COLOR);
}

#[allow(clippy::too_many_arguments)]
fn draw_polyline(
    img: &mut Image,
    values: &[f64],
    cols: &Columns,
    lo: f64,
    hi: f64,
    top: usize,
    height: usize,
    color: [u8; 3],
) {
    let mut prev: Option<(usize, usize)> = None;
    for (i, v) in values.iter().enumerate() {
        let point = (cols.center_x(i), value_to_row(*v, lo, hi, top, height));
        if let Some((px, py)) = prev {
            img.line(px, py, point.0, point.1, color);
        }
        prev = Some(point);
    }
}

/// A Gramian angular summation field over a rescaled window.
#[derive(Clone, PartialEq, Debug)]
pub struct GafMatrix {
    size: usize,
    data: Vec<f64>,
}

impl GafMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Gramian angular summation field of a non-empty window.
///
/// Values are min-max rescaled to `x̃ ∈ [−1, 1]`, mapped to angles
/// `φ = arccos x̃`, and combined as `G[i][j] = cos(φᵢ + φⱼ)`. A flat window
/// (max = min) rescales to all zeros rather than dividing by zero.
pub fn gaf(values: &[f64]) -> GafMatrix {
    assert!(!values.is_empty(), "GAF window must be non-empty");
    let mut min = values[0];
    let mut max = values[0];
    for v in &values[1..] {
        min = min.min(*v);
        max = max.max(*v);
    }
    let phi: Vec<f64> = values
        .iter()
        .map(|v| {
            let rescaled = if max > min { 2.0 * (v - min) / (max - min) - 1.0 } else { 0.0 };
            rescaled.acos()
        })
        .collect();

    let n = values.len();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let g = (phi[i] + phi[j]).cos();
            data[i * n + j] = g;
            data[j * n + i] = g;
        }
    }
    GafMatrix { size: n, data }
}

/// Renders a GAF matrix as a grayscale raster: `[−1, 1]` maps linearly to
/// 0–255 (replicated across RGB), nearest-neighbor upscaled to the style's
/// dimensions.
pub fn gaf_to_image(g: &GafMatrix, style: &ChartStyle) -> Image {
    assert_eq!(style.variant, ChartVariant::Gaf, "style must be the GAF variant");
    let (w, h) = (style.width_px, style.height_px);
    let mut pixels = Vec::with_capacity(w * h * Image::CHANNELS);
    for y in 0..h {
        let sy = y * g.size / h;
        for x in 0..w {
            let sx = x * g.size / w;
            let v = g.get(sy, sx);
            let gray = ((v + 1.0) / 2.0 * 255.0).round() as u8;
            pixels.extend_from_slice(&[gray, gray, gray]);
        }
    }
    Image::from_raw(w, h, pixels)
}

/// Converts an image to a channel-first `(3, H, W)` tensor scaled to `[0, 1]`.
pub fn image_to_tensor(img: &Image) -> Tensor<f32> {
    let (w, h) = (img.width, img.height);
    let mut data = vec![0.0f32; 3 * h * w];
    for y in 0..h {
        for x in 0..w {
            let px = img.get(x, y);
            for c in 0..3 {
                data[(c * h + y) * w + x] = px[c] as f32 / 255.0;
            }
        }
    }
    Tensor::from_vec(&[3, h, w], data)
}

/// Quantizes a `(3, H, W)` tensor in `[0, 1]` back to an RGB image.
pub fn tensor_to_image(t: &Tensor<f32>) -> Image {
    let [c, h, w] = *t.shape() else { panic!("tensor must be (3, H, W)") };
    assert_eq!(c, 3);
    let mut pixels = vec![0u8; w * h * Image::CHANNELS];
    for y in 0..h {
        for x in 0..w {
            for ch in 0..3 {
                let v = t.data()[(ch * h + y) * w + x];
                pixels[(y * w + x) * 3 + ch] = (v * 255.0).round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    Image::from_raw(w, h, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::date::Date;

    fn flat_bar(day: u8, price: f64, volume: u64) -> Bar {
        make_bar(day, price, price, price, price, volume)
    }

    fn make_bar(day: u8, open: f64, high: f64, low: f64, close: f64, volume: u64) -> Bar {
        Bar {
            date: Date::new(2019, 1 + day / 28, 1 + day % 28).unwrap(),
            open,
            high,
            low,
            close,
            adj_close: None,
            volume,
        }
    }

    /// Deterministic, visually plausible 60-bar fixture.
    fn fixture_window() -> Vec<Bar> {
        let mut bars = Vec::with_capacity(WINDOW_LEN);
        let mut price = 100.0f64;
        for i in 0..WINDOW_LEN as u8 {
            let swing = ((i as f64) * 0.7).sin() * 3.0;
            let open = price;
            let close = price + swing;
            let high = open.max(close) + 1.5;
            let low = open.min(close) - 1.0;
            bars.push(make_bar(i, open, high, low, close, 1000 + 37 * i as u64));
            price = close;
        }
        bars
    }

    fn test_bundle(bars: &[Bar]) -> WindowIndicators {
        // Synthetic but fully defined values inside the price range.
        let closes: Vec<f64> = bars.iter().map(|b| b.close).collect();
        WindowIndicators {
            sma5: closes.clone(),
            sma10: closes.clone(),
            sma30: closes.clone(),
            macd_line: closes.iter().map(|c| c - 100.0).collect(),
            macd_signal: closes.iter().map(|c| (c - 100.0) * 0.5).collect(),
            macd_histogram: closes.iter().map(|c| (c - 100.0) * 0.5).collect(),
        }
    }

    fn count_color(img: &Image, color: [u8; 3]) -> usize {
        (0..img.height())
            .flat_map(|y| (0..img.width()).map(move |x| (x, y)))
            .filter(|&(x, y)| img.get(x, y) == color)
            .count()
    }

    #[test]
    fn style_validation() {
        assert!(ChartStyle::default_for(ChartVariant::MacdMa).validate().is_ok());
        let bad = ChartStyle::new(ChartVariant::NoVolume, 90, 96);
        assert_eq!(bad.validate(), Err(StyleError::EdgeNotMultipleOf16(90)));
        let narrow = ChartStyle::new(ChartVariant::NoVolume, 48, 96);
        assert_eq!(narrow.validate(), Err(StyleError::TooNarrowForCandles(48)));
        // GAF has no candle-width constraint.
        assert!(ChartStyle::new(ChartVariant::Gaf, 48, 48).validate().is_ok());

        let mut broken = ChartStyle::default_for(ChartVariant::Volume);
        broken.layout[1].1 = 0.3;
        assert_eq!(broken.validate(), Err(StyleError::BadLayout));
    }

    #[test]
    fn panel_fractions_sum_to_one_for_all_variants() {
        for v in ChartVariant::ALL {
            let style = ChartStyle::default_for(v);
            let total: f64 = style.layout.iter().map(|(_, f)| f).sum();
            assert!((total - 1.0).abs() <= 1e-12, "{v:?}");
            let rows = style.panel_rows();
            assert_eq!(rows.iter().map(|(_, _, h)| h).sum::<usize>(), style.height_px);
        }
    }

    #[test]
    fn wrong_window_length_is_rejected() {
        let style = ChartStyle::default_for(ChartVariant::NoVolume);
        let bars = vec![flat_bar(0, 10.0, 5); 59];
        assert_eq!(
            render_candles(&bars, None, &style),
            Err(RenderError::WrongWindowLength { got: 59 })
        );
    }

    #[test]
    fn indicator_variants_require_the_bundle() {
        let style = ChartStyle::default_for(ChartVariant::MacdMa);
        let bars = fixture_window();
        assert_eq!(render_candles(&bars, None, &style), Err(RenderError::MissingIndicators));
    }

    #[test]
    fn degenerate_doji_renders_one_pixel_row() {
        let style = ChartStyle::default_for(ChartVariant::NoVolume);
        let mut bars = fixture_window();
        bars[30] = flat_bar(30, 100.0, 500);
        let img = render_candles(&bars, None, &style).unwrap();

        let cols = Columns::new(style.width_px);
        let x0 = cols.body_x(30);
        let mut rows_with_pixels = 0;
        for y in 0..img.height() {
            if (0..cols.body_width.max(1)).any(|dx| img.get(x0 + dx, y) != DEFAULT_BACKGROUND) {
                rows_with_pixels += 1;
            }
        }
        assert_eq!(rows_with_pixels, 1, "doji must occupy exactly one row");
    }

    #[test]
    fn all_bullish_window_has_no_bearish_pixels() {
        let style = ChartStyle::default_for(ChartVariant::Volume);
        let bars: Vec<Bar> = (0..WINDOW_LEN as u8)
            .map(|i| make_bar(i, 100.0, 103.0, 99.5, 102.0, 1000 + i as u64))
            .collect();
        let img = render_candles(&bars, None, &style).unwrap();
        assert_eq!(count_color(&img, style.bearish_color), 0);
        assert!(count_color(&img, style.bullish_color) > 0);
    }

    #[test]
    fn equal_open_close_renders_bearish() {
        let style = ChartStyle::default_for(ChartVariant::NoVolume);
        let bars: Vec<Bar> = (0..WINDOW_LEN as u8).map(|i| flat_bar(i, 100.0, 10)).collect();
        let img = render_candles(&bars, None, &style).unwrap();
        assert_eq!(count_color(&img, style.bullish_color), 0);
        assert!(count_color(&img, style.bearish_color) > 0);
    }

    #[test]
    fn flat_window_collapses_to_midline() {
        let style = ChartStyle::default_for(ChartVariant::NoVolume);
        let bars: Vec<Bar> = (0..WINDOW_LEN as u8).map(|i| flat_bar(i, 42.0, 10)).collect();
        let img = render_candles(&bars, None, &style).unwrap();
        let mid = style.height_px / 2;
        for y in 0..img.height() {
            let any = (0..img.width()).any(|x| img.get(x, y) != DEFAULT_BACKGROUND);
            assert_eq!(any, y == mid, "row {y}");
        }
    }

    #[test]
    fn candle_pixels_stay_inside_the_price_panel() {
        for variant in [ChartVariant::Volume, ChartVariant::MacdMa, ChartVariant::MacdVolumeLower]
        {
            let style = ChartStyle::default_for(variant);
            // Zero volumes and zeroed MACD: the lower panels must then be
            // empty, so any candle pixel below the price panel would show.
            let mut bars = fixture_window();
            for b in &mut bars {
                b.volume = 0;
            }
            let mut bundle = test_bundle(&bars);
            bundle.macd_line.fill(0.0);
            bundle.macd_signal.fill(0.0);
            bundle.macd_histogram.fill(0.0);

            let indicators = variant.needs_indicators().then_some(&bundle);
            let img = render_candles(&bars, indicators, &style).unwrap();
            let (_, _, price_h) = style.panel_rows()[0];
            for y in price_h..img.height() {
                for x in 0..img.width() {
                    let px = img.get(x, y);
                    assert!(
                        px != style.bullish_color && px != style.bearish_color,
                        "candle pixel leaked to {x},{y} in {variant:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn volume_panel_scales_by_max_volume() {
        let style = ChartStyle::default_for(ChartVariant::Volume);
        let mut bars: Vec<Bar> = (0..WINDOW_LEN as u8)
            .map(|i| make_bar(i, 100.0, 101.0, 99.0, 100.5, 10))
            .collect();
        bars[10].volume = 1000; // dominant volume
        bars[20].volume = 0; // halted day
        let img = render_candles(&bars, None, &style).unwrap();

        let cols = Columns::new(style.width_px);
        let (_, top, height) = style.panel_rows()[1];
        // Bar 10 fills the whole panel column.
        let x10 = cols.body_x(10);
        assert_ne!(img.get(x10, top), DEFAULT_BACKGROUND);
        assert_ne!(img.get(x10, top + height - 1), DEFAULT_BACKGROUND);
        // Bar 20 is empty.
        let x20 = cols.body_x(20);
        for y in top..top + height {
            assert_eq!(img.get(x20, y), DEFAULT_BACKGROUND, "halted day must be empty");
        }
    }

    #[test]
    fn rendering_is_deterministic() {
        let style = ChartStyle::default_for(ChartVariant::MacdMa);
        let bars = fixture_window();
        let bundle = test_bundle(&bars);
        let a = render_candles(&bars, Some(&bundle), &style).unwrap();
        let b = render_candles(&bars, Some(&bundle), &style).unwrap();
        assert_eq!(a, b);
    }

    // GAF --------------------------------------------------------------

    #[test]
    fn gaf_two_point_window_by_hand() {
        // [0, 1] rescales to [−1, 1], φ = [π, 0]:
        // G = [[cos 2π, cos π], [cos π, cos 0]].
        let g = gaf(&[0.0, 1.0]);
        assert!((g.get(0, 0) - 1.0).abs() <= 1e-12);
        assert!((g.get(0, 1) + 1.0).abs() <= 1e-12);
        assert!((g.get(1, 0) + 1.0).abs() <= 1e-12);
        assert!((g.get(1, 1) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn gaf_maximum_values_give_ones() {
        // φ(max) = arccos 1 = 0, so entries between max points are cos 0 = 1.
        let g = gaf(&[5.0, 5.0, 1.0]);
        assert!((g.get(0, 1) - 1.0).abs() <= 1e-12);
        assert!((g.get(0, 0) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn gaf_flat_window_uses_zero_rescale() {
        let g = gaf(&[3.0; 4]);
        for i in 0..4 {
            for j in 0..4 {
                // x̃ = 0 ⇒ φ = π/2 ⇒ cos π = −1; diagonal identity 2·0² − 1.
                assert!((g.get(i, j) + 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn gaf_symmetry_diagonal_and_affine_invariance() {
        let mut rng = crate::rng::seeded(17);
        for _ in 0..50 {
            let window: Vec<f64> =
                (0..60).map(|_| crate::rng::uniform_range(&mut rng, 10.0, 250.0)).collect();
            let g = gaf(&window);

            let mut min = window[0];
            let mut max = window[0];
            for v in &window {
                min = min.min(*v);
                max = max.max(*v);
            }
            for i in 0..60 {
                for j in 0..60 {
                    assert!((g.get(i, j) - g.get(j, i)).abs() <= 1e-12);
                    assert!((-1.0..=1.0).contains(&g.get(i, j)));
                }
                let rescaled = 2.0 * (window[i] - min) / (max - min) - 1.0;
                let expected = 2.0 * rescaled * rescaled - 1.0;
                assert!((g.get(i, i) - expected).abs() <= 1e-12);
            }

            let affine: Vec<f64> = window.iter().map(|v| 3.5 * v + 11.0).collect();
            let ga = gaf(&affine);
            for (a, b) in g.data().iter().zip(ga.data()) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn gaf_image_endpoints_and_replication() {
        let style = ChartStyle::new(ChartVariant::Gaf, 16, 16);
        let ones = GafMatrix { size: 2, data: vec![1.0; 4] };
        let img = gaf_to_image(&ones, &style);
        assert!(img.pixels().iter().all(|&p| p == 255));

        let neg = GafMatrix { size: 2, data: vec![-1.0; 4] };
        let img = gaf_to_image(&neg, &style);
        assert!(img.pixels().iter().all(|&p| p == 0));

        // [[1,−1],[−1,1]] at 4×4 px → 2×2 blocks of 255/0/0/255.
        let style4 =
            ChartStyle { width_px: 4, height_px: 4, ..ChartStyle::new(ChartVariant::Gaf, 16, 16) };
        let mix = GafMatrix { size: 2, data: vec![1.0, -1.0, -1.0, 1.0] };
        let img = gaf_to_image(&mix, &style4);
        for y in 0..4 {
            for x in 0..4 {
                let expected = if (x < 2) == (y < 2) { 255 } else { 0 };
                assert_eq!(img.get(x, y)[0], expected, "at {x},{y}");
            }
        }
    }

    // Tensor conversion --------------------------------------------------

    #[test]
    fn image_tensor_round_trip_within_quantization() {
        let img = {
            let mut i = Image::filled(8, 8, [0, 0, 0]);
            for y in 0..8 {
                for x in 0..8 {
                    i.set(x, y, [(x * 32) as u8, (y * 32) as u8, 255]);
                }
            }
            i
        };
        let t = image_to_tensor(&img);
        assert_eq!(t.shape(), &[3, 8, 8]);
        assert!(t.data().iter().all(|v| (0.0..=1.0).contains(v)));
        let back = tensor_to_image(&t);
        assert_eq!(back, img);

        // Arbitrary tensor → image → tensor stays within 1/255.
        let mut rng = crate::rng::seeded(9);
        let data: Vec<f32> =
            (0..3 * 8 * 8).map(|_| crate::rng::uniform_f64(&mut rng) as f32).collect();
        let t = Tensor::from_vec(&[3, 8, 8], data);
        let t2 = image_to_tensor(&tensor_to_image(&t));
        for (a, b) in t.data().iter().zip(t2.data()) {
            assert!((a - b).abs() <= 1.0 / 255.0 + 1e-6);
        }
    }

    #[test]
    fn black_and_white_map_to_tensor_extremes() {
        let img = Image::filled(4, 4, [0, 0, 0]);
        assert!(image_to_tensor(&img).data().iter().all(|v| *v == 0.0));
        let img = Image::filled(4, 4, [255, 255, 255]);
        assert!(image_to_tensor(&img).data().iter().all(|v| *v == 1.0));
    }
}

//! Heatmap rendering for coefficient matrices: fixed five-stop colormap,
//! integer-scaled cell blocks, optional axis labels drawn with a small
//! built-in bitmap font when a sidecar names the axes.

use image::{Rgb, RgbImage};
use num_complex::Complex64;

/// How a complex cell maps to the colour scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorScale {
    Abs,
    Real,
    Imag,
    Phase,
}

impl ColorScale {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "abs" => Some(ColorScale::Abs),
            "real" => Some(ColorScale::Real),
            "imag" => Some(ColorScale::Imag),
            "phase" => Some(ColorScale::Phase),
            _ => None,
        }
    }

    fn value(&self, z: Complex64) -> f64 {
        match self {
            ColorScale::Abs => z.norm(),
            ColorScale::Real => z.re,
            ColorScale::Imag => z.im,
            ColorScale::Phase => z.arg(),
        }
    }
}

/// Fixed colormap stops (documented in the README): dark violet to yellow.
const STOPS: [(f64, [u8; 3]); 5] = [
    (0.00, [13, 8, 135]),
    (0.25, [126, 3, 168]),
    (0.50, [204, 71, 120]),
    (0.75, [248, 149, 64]),
    (1.00, [240, 249, 33]),
];

fn colormap(x: f64) -> Rgb<u8> {
    let x = x.clamp(0.0, 1.0);
    for w in STOPS.windows(2) {
        let (x0, c0) = w[0];
        let (x1, c1) = w[1];
        if x <= x1 {
            let f = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
            let mix = |a: u8, b: u8| (a as f64 + f * (b as f64 - a as f64)).round() as u8;
            return Rgb([mix(c0[0], c1[0]), mix(c0[1], c1[1]), mix(c0[2], c1[2])]);
        }
    }
    Rgb(STOPS[4].1)
}

/// 5x7 glyphs for the handful of characters axis labels need.
fn glyph(c: char) -> Option<[u8; 7]> {
    // each byte is one row, low 5 bits used, MSB side left
    let g = match c {
        '0' => [0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E],
        '1' => [0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E],
        '2' => [0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F],
        '3' => [0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E],
        '4' => [0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02],
        '5' => [0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E],
        '6' => [0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E],
        '7' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08],
        '8' => [0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E],
        '9' => [0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C],
        '-' => [0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00],
        '+' => [0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00],
        '.' => [0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C],
        ':' => [0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00],
        'e' => [0x00, 0x00, 0x0E, 0x11, 0x1F, 0x10, 0x0E],
        'a' => [0x00, 0x00, 0x0E, 0x01, 0x0F, 0x11, 0x0F],
        'b' => [0x10, 0x10, 0x16, 0x19, 0x11, 0x11, 0x1E],
        't' => [0x08, 0x08, 0x1C, 0x08, 0x08, 0x09, 0x06],
        'j' => [0x02, 0x00, 0x06, 0x02, 0x02, 0x12, 0x0C],
        'k' => [0x10, 0x10, 0x12, 0x14, 0x18, 0x14, 0x12],
        'N' => [0x11, 0x19, 0x19, 0x15, 0x13, 0x13, 0x11],
        ' ' => [0x00; 7],
        _ => return None,
    };
    Some(g)
}

fn draw_text(img: &mut RgbImage, x0: u32, y0: u32, text: &str, color: Rgb<u8>) {
    let mut x = x0;
    for ch in text.chars() {
        if let Some(rows) = glyph(ch) {
            for (dy, row) in rows.iter().enumerate() {
                for dx in 0..5u32 {
                    if row & (0x10 >> dx) != 0 {
                        let (px, py) = (x + dx, y0 + dy as u32);
                        if px < img.width() && py < img.height() {
                            img.put_pixel(px, py, color);
                        }
                    }
                }
            }
        }
        x += 6;
    }
}

/// Compact shortest-ish label for an axis endpoint.
fn label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        if s.is_empty() {
            "0".into()
        } else {
            s
        }
    } else {
        format!("{v:.2e}")
    }
}

pub struct HeatmapInput {
    /// file-row-major values: rows x cols
    pub values: Vec<Complex64>,
    pub rows: usize,
    pub cols: usize,
    pub row_axis: String,
    pub col_axis: String,
    pub row_labels: Vec<f64>,
    pub col_labels: Vec<f64>,
    pub labeled: bool,
}

/// Renders the matrix with file columns on the horizontal axis (left to
/// right) and file rows on the vertical axis (top to bottom). Returns the
/// image and the integer block size used per cell.
pub fn render_heatmap(input: &HeatmapInput, scale: ColorScale) -> (RgbImage, u32) {
    let rows = input.rows as u32;
    let cols = input.cols as u32;
    let block = (512 / rows.max(cols).max(1)).clamp(1, 48);
    let margin = if input.labeled { 14u32 } else { 0 };
    let width = cols * block + margin;
    let height = rows * block + margin;
    let mut img = RgbImage::from_pixel(width, height, Rgb([0, 0, 0]));

    let raw: Vec<f64> = input.values.iter().map(|&z| scale.value(z)).collect();
    let (lo, hi) = match scale {
        ColorScale::Phase => (-std::f64::consts::PI, std::f64::consts::PI),
        ColorScale::Abs => (0.0, raw.iter().cloned().fold(0.0, f64::max)),
        _ => {
            let lo = raw.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        }
    };
    let span = (hi - lo).max(0.0);
    for r in 0..rows {
        for c in 0..cols {
            let v = raw[(r * cols + c) as usize];
            let x = if span > 0.0 { (v - lo) / span } else { 0.0 };
            let color = colormap(x);
            for dy in 0..block {
                for dx in 0..block {
                    img.put_pixel(margin + c * block + dx, r * block + dy, color);
                }
            }
        }
    }

    if input.labeled {
        let white = Rgb([255, 255, 255]);
        let col_lo = input.col_labels.first().copied().unwrap_or(0.0);
        let col_hi = input.col_labels.last().copied().unwrap_or(0.0);
        let row_lo = input.row_labels.first().copied().unwrap_or(0.0);
        let row_hi = input.row_labels.last().copied().unwrap_or(0.0);
        let bottom = format!(
            "{} {}:{}   {} {}:{}",
            input.col_axis,
            label(col_lo),
            label(col_hi),
            input.row_axis,
            label(row_lo),
            label(row_hi),
        );
        draw_text(&mut img, margin + 2, rows * block + 4, &bottom, white);
    }
    (img, block)
}

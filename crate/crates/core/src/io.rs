//! File formats: signal/spectrum CSV, scalogram CSV with JSON sidecar,
//! coefficient CSV, PCM WAV ingestion, and the grid/matrix literal parsers
//! shared with the command line. All numbers are written with Rust's shortest
//! round-trip f64 formatting, so identical runs produce identical bytes.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dsawt::{CoefficientTable, FrameSpec};
use crate::error::{Result, SaftError};
use crate::grid::{RealGrid, ScaleGrid};
use crate::matrix::SaftMatrix;
use crate::saft::Spectrum;
use crate::scalogram::Scalogram;
use crate::signal::Signal;
use crate::wavelet::Wavelet;
use crate::wigner::WignerMatrix;

const REL_SPACING_TOL: f64 = 1e-9;

fn parse_f64(s: &str, location: impl Fn() -> String) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| SaftError::ParseError {
        location: location(),
        reason: format!("bad number {s:?}: {e}"),
    })
}

/// Reads `t,re,im` rows with a strictly increasing, uniformly spaced time
/// column (relative spacing tolerance 1e-9).
pub fn read_signal_csv(text: &str) -> Result<Signal> {
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| SaftError::ParseError { location: "line 1".into(), reason: "empty file".into() })?;
    if header.1.trim() != "t,re,im" {
        return Err(SaftError::ParseError {
            location: "line 1".into(),
            reason: format!("expected header `t,re,im`, found {:?}", header.1.trim()),
        });
    }
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(SaftError::ParseError {
                location: format!("line {}", i + 1),
                reason: format!("expected 3 columns, found {}", cols.len()),
            });
        }
        let loc = || format!("line {}", i + 1);
        times.push(parse_f64(cols[0], loc)?);
        samples.push(Complex64::new(parse_f64(cols[1], loc)?, parse_f64(cols[2], loc)?));
    }
    if samples.is_empty() {
        return Err(SaftError::ParseError { location: "line 2".into(), reason: "no samples".into() });
    }
    if samples.len() == 1 {
        return Signal::new(samples, times[0], 1.0);
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(SaftError::NonuniformGrid { row: 1, found: dt, expected: f64::NAN });
    }
    for (row, w) in times.windows(2).enumerate() {
        let step = w[1] - w[0];
        if (step - dt).abs() > REL_SPACING_TOL * dt.abs().max(1.0) {
            return Err(SaftError::NonuniformGrid { row: row + 1, found: step, expected: dt });
        }
    }
    Signal::new(samples, times[0], dt)
}

pub fn write_signal_csv(f: &Signal) -> String {
    let mut out = String::from("t,re,im\n");
    for (i, z) in f.samples.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", f.time(i), z.re, z.im));
    }
    out
}

/// Spectrum CSV: header `omega,re,im`.
pub fn write_spectrum_csv(s: &Spectrum) -> String {
    let mut out = String::from("omega,re,im\n");
    for (k, z) in s.values.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", s.omega_grid.nth(k), z.re, z.im));
    }
    out
}

pub fn read_spectrum_csv(text: &str, matrix: SaftMatrix) -> Result<Spectrum> {
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| SaftError::ParseError { location: "line 1".into(), reason: "empty file".into() })?;
    if header.1.trim() != "omega,re,im" {
        return Err(SaftError::ParseError {
            location: "line 1".into(),
            reason: format!("expected header `omega,re,im`, found {:?}", header.1.trim()),
        });
    }
    let mut omegas = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(SaftError::ParseError {
                location: format!("line {}", i + 1),
                reason: format!("expected 3 columns, found {}", cols.len()),
            });
        }
        let loc = || format!("line {}", i + 1);
        omegas.push(parse_f64(cols[0], loc)?);
        values.push(Complex64::new(parse_f64(cols[1], loc)?, parse_f64(cols[2], loc)?));
    }
    if omegas.len() < 2 {
        return Err(SaftError::ParseError {
            location: "file".into(),
            reason: "need at least two omega rows".into(),
        });
    }
    let step = omegas[1] - omegas[0];
    let grid = RealGrid::new(omegas[0], step, omegas.len())?;
    Ok(Spectrum { values, omega_grid: grid, matrix })
}

/// Serializable wavelet descriptor for sidecars.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WaveletDescriptor {
    Haar,
    Morlet { alpha: f64 },
    MexicanHat,
    Sampled { len: usize },
    Scaled { amplitude: f64, inner: Box<WaveletDescriptor> },
}

impl From<&Wavelet> for WaveletDescriptor {
    fn from(w: &Wavelet) -> Self {
        match w {
            Wavelet::Haar => WaveletDescriptor::Haar,
            Wavelet::Morlet(a) => WaveletDescriptor::Morlet { alpha: *a },
            Wavelet::MexicanHat => WaveletDescriptor::MexicanHat,
            Wavelet::Sampled(s) => WaveletDescriptor::Sampled { len: s.len() },
            Wavelet::Scaled { inner, amplitude } => WaveletDescriptor::Scaled {
                amplitude: *amplitude,
                inner: Box::new(WaveletDescriptor::from(inner.as_ref())),
            },
        }
    }
}

/// JSON sidecar carrying the grids, matrix, wavelet and measured constants of
/// a coefficient file, so downstream tools never re-derive conventions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    pub a_grid: ScaleGrid,
    pub b_grid: RealGrid,
    pub matrix: SaftMatrix,
    pub wavelet: Option<WaveletDescriptor>,
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
    /// Axis names of the CSV: (rows, columns) of the stored values.
    pub axes: (String, String),
}

impl Sidecar {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sidecar serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SaftError::ParseError {
            location: "sidecar json".into(),
            reason: e.to_string(),
        })
    }
}

fn complex_cell(z: Complex64) -> String {
    format!("{}:{}", z.re, z.im)
}

fn parse_complex_cell(s: &str, location: impl Fn() -> String + Copy) -> Result<Complex64> {
    let (re, im) = s.split_once(':').ok_or_else(|| SaftError::ParseError {
        location: location(),
        reason: format!("expected re:im cell, found {s:?}"),
    })?;
    Ok(Complex64::new(parse_f64(re, location)?, parse_f64(im, location)?))
}

/// Scalogram CSV: first row `b\a,a_1,...`, then one row per translation:
/// `b_j,re:im,...`.
pub fn write_scalogram_csv(w: &Scalogram) -> String {
    let a_values = w.a_grid.values();
    let mut out = String::from("b\\a");
    for a in &a_values {
        out.push_str(&format!(",{a}"));
    }
    out.push('\n');
    for j in 0..w.cols() {
        out.push_str(&format!("{}", w.b_grid.nth(j)));
        for i in 0..w.rows() {
            out.push_str(&format!(",{}", complex_cell(w.get(i, j))));
        }
        out.push('\n');
    }
    out
}

/// Generic matrix CSV parse: returns (row labels, column labels, values in
/// file order rows x cols) for the `X\Y,...` layout.
pub struct LabeledMatrix {
    pub row_axis: String,
    pub col_axis: String,
    pub row_labels: Vec<f64>,
    pub col_labels: Vec<f64>,
    /// file-row-major
    pub values: Vec<Complex64>,
}

pub fn read_labeled_matrix_csv(text: &str) -> Result<LabeledMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| SaftError::ParseError { location: "line 1".into(), reason: "empty file".into() })?;
    let cols: Vec<&str> = header.split(',').collect();
    let axes = cols[0];
    let (row_axis, col_axis) = axes.split_once('\\').ok_or_else(|| SaftError::ParseError {
        location: "line 1".into(),
        reason: format!("expected `rows\\cols` in the first header cell, found {axes:?}"),
    })?;
    let col_labels: Vec<f64> = cols[1..]
        .iter()
        .enumerate()
        .map(|(i, s)| parse_f64(s, || format!("line 1, column {}", i + 2)))
        .collect::<Result<_>>()?;
    let mut row_labels = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != col_labels.len() + 1 {
            return Err(SaftError::ParseError {
                location: format!("line {}", i + 1),
                reason: format!("expected {} cells, found {}", col_labels.len() + 1, cells.len()),
            });
        }
        let loc = || format!("line {}", i + 1);
        row_labels.push(parse_f64(cells[0], loc)?);
        for c in &cells[1..] {
            values.push(parse_complex_cell(c, loc)?);
        }
    }
    Ok(LabeledMatrix {
        row_axis: row_axis.to_string(),
        col_axis: col_axis.to_string(),
        row_labels,
        col_labels,
        values,
    })
}

/// Wigner CSV mirrors the scalogram layout with time rows: `t\a,a_1,...`.
pub fn write_wigner_csv(w: &WignerMatrix) -> String {
    let mut out = String::from("t\\a");
    for a in w.a_grid.values() {
        out.push_str(&format!(",{a}"));
    }
    out.push('\n');
    for i in 0..w.rows() {
        out.push_str(&format!("{}", w.t_grid.nth(i)));
        for j in 0..w.cols() {
            out.push_str(&format!(",{}", complex_cell(w.get(i, j))));
        }
        out.push('\n');
    }
    out
}

/// Coefficient table CSV: rows `j,k,re,im`.
pub fn write_coefficients_csv(c: &CoefficientTable) -> String {
    let mut out = String::from("j,k,re,im\n");
    for (j, k) in c.spec.indices() {
        let z = c.get(j, k);
        out.push_str(&format!("{j},{k},{},{}\n", z.re, z.im));
    }
    out
}

pub fn read_coefficients_csv(text: &str, spec: &FrameSpec) -> Result<CoefficientTable> {
    let mut map = BTreeMap::new();
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| SaftError::ParseError { location: "line 1".into(), reason: "empty file".into() })?;
    if header.trim() != "j,k,re,im" {
        return Err(SaftError::ParseError {
            location: "line 1".into(),
            reason: format!("expected header `j,k,re,im`, found {:?}", header.trim()),
        });
    }
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 4 {
            return Err(SaftError::ParseError {
                location: format!("line {}", i + 1),
                reason: format!("expected 4 cells, found {}", cells.len()),
            });
        }
        let loc = || format!("line {}", i + 1);
        let j: i32 = cells[0].trim().parse().map_err(|e| SaftError::ParseError {
            location: loc(),
            reason: format!("bad j index: {e}"),
        })?;
        let k: i64 = cells[1].trim().parse().map_err(|e| SaftError::ParseError {
            location: loc(),
            reason: format!("bad k index: {e}"),
        })?;
        map.insert((j, k), Complex64::new(parse_f64(cells[2], loc)?, parse_f64(cells[3], loc)?));
    }
    let mut values = Vec::with_capacity(spec.len());
    for (j, k) in spec.indices() {
        values.push(*map.get(&(j, k)).unwrap_or(&Complex64::new(0.0, 0.0)));
    }
    Ok(CoefficientTable::new(values, *spec))
}

/// Minimal PCM WAV reader: mono, 16- or 32-bit integer samples, amplitude
/// normalized to [-1, 1], dt = 1/sample_rate.
pub fn read_wav(bytes: &[u8]) -> Result<Signal> {
    let err = |offset: usize, reason: &str| SaftError::ParseError {
        location: format!("byte {offset}"),
        reason: reason.to_string(),
    };
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(err(0, "not a RIFF/WAVE file"));
    }
    let mut pos = 12;
    let mut fmt: Option<(u16, u16, u32, u16)> = None; // (format, channels, rate, bits)
    let mut data: Option<(usize, usize)> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body = pos + 8;
        if body + size > bytes.len() {
            return Err(err(pos, "chunk overruns file"));
        }
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(err(pos, "fmt chunk too short"));
                }
                let format = u16::from_le_bytes(bytes[body..body + 2].try_into().unwrap());
                let channels = u16::from_le_bytes(bytes[body + 2..body + 4].try_into().unwrap());
                let rate = u32::from_le_bytes(bytes[body + 4..body + 8].try_into().unwrap());
                let bits = u16::from_le_bytes(bytes[body + 14..body + 16].try_into().unwrap());
                fmt = Some((format, channels, rate, bits));
            }
            b"data" => {
                data = Some((body, size));
            }
            _ => {}
        }
        pos = body + size + (size & 1);
    }
    let (format, channels, rate, bits) = fmt.ok_or_else(|| err(12, "missing fmt chunk"))?;
    if format != 1 {
        return Err(err(12, "only integer PCM (format 1) is supported"));
    }
    if channels != 1 {
        return Err(err(12, "only mono WAV is supported"));
    }
    if rate == 0 {
        return Err(err(12, "zero sample rate"));
    }
    let (body, size) = data.ok_or_else(|| err(12, "missing data chunk"))?;
    let samples: Vec<Complex64> = match bits {
        16 => bytes[body..body + size]
            .chunks_exact(2)
            .map(|c| {
                let v = i16::from_le_bytes([c[0], c[1]]) as f64 / 32768.0;
                Complex64::new(v, 0.0)
            })
            .collect(),
        32 => bytes[body..body + size]
            .chunks_exact(4)
            .map(|c| {
                let v = i32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64 / 2147483648.0;
                Complex64::new(v, 0.0)
            })
            .collect(),
        other => return Err(err(12, &format!("unsupported bit depth {other}"))),
    };
    if samples.is_empty() {
        return Err(err(body, "empty data chunk"));
    }
    Signal::new(samples, 0.0, 1.0 / rate as f64)
}

/// Reads a signal from CSV or WAV based on the file extension.
pub fn ingest_signal(path: &Path) -> Result<Signal> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("wav") | Some("WAV") => read_wav(&std::fs::read(path)?),
        _ => read_signal_csv(&std::fs::read_to_string(path)?),
    }
}

/// Parses `start:step:count`.
pub fn parse_real_grid(s: &str) -> Result<RealGrid> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(SaftError::ParseError {
            location: format!("grid spec {s:?}"),
            reason: "expected start:step:count".into(),
        });
    }
    let loc = || format!("grid spec {s:?}");
    let start = parse_f64(parts[0], loc)?;
    let step = parse_f64(parts[1], loc)?;
    let count: usize = parts[2].trim().parse().map_err(|e| SaftError::ParseError {
        location: loc(),
        reason: format!("bad count: {e}"),
    })?;
    RealGrid::new(start, step, count)
}

/// Parses `start:step:count` (uniform) or `geo:start:ratio:count` (geometric).
pub fn parse_scale_grid(s: &str) -> Result<ScaleGrid> {
    if let Some(rest) = s.strip_prefix("geo:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(SaftError::ParseError {
                location: format!("grid spec {s:?}"),
                reason: "expected geo:start:ratio:count".into(),
            });
        }
        let loc = || format!("grid spec {s:?}");
        let start = parse_f64(parts[0], loc)?;
        let ratio = parse_f64(parts[1], loc)?;
        let count: usize = parts[2].trim().parse().map_err(|e| SaftError::ParseError {
            location: loc(),
            reason: format!("bad count: {e}"),
        })?;
        ScaleGrid::geometric(start, ratio, count)
    } else {
        Ok(ScaleGrid::Uniform(parse_real_grid(s)?))
    }
}

/// Parses `A,B,C,D,p,q`.
pub fn parse_matrix(s: &str) -> Result<SaftMatrix> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 6 {
        return Err(SaftError::ParseError {
            location: format!("matrix literal {s:?}"),
            reason: format!("expected 6 comma-separated entries, found {}", parts.len()),
        });
    }
    let loc = || format!("matrix literal {s:?}");
    let v: Vec<f64> = parts.iter().map(|p| parse_f64(p, loc)).collect::<Result<_>>()?;
    SaftMatrix::new(v[0], v[1], v[2], v[3], v[4], v[5])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn signal_csv_roundtrip_and_examples() {
        let f = read_signal_csv("t,re,im\n0,1,0\n1,1,0\n2,1,0\n").unwrap();
        assert_eq!(f.t0, 0.0);
        assert_eq!(f.dt, 1.0);
        assert_eq!(f.samples, vec![Complex64::new(1.0, 0.0); 3]);

        let text = write_signal_csv(&f);
        let g = read_signal_csv(&text).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn nonuniform_spacing_rejected() {
        let r = read_signal_csv("t,re,im\n0,1,0\n1,1,0\n2.1,1,0\n");
        assert!(matches!(r, Err(SaftError::NonuniformGrid { row: 2, .. })));
    }

    #[test]
    fn wav_header_arithmetic() {
        // 1 kHz mono 16-bit, 100 samples of silence = 0.1 s
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"RIFF");
        bytes.extend_from_slice(&(36u32 + 200).to_le_bytes());
        bytes.extend_from_slice(b"WAVE");
        bytes.extend_from_slice(b"fmt ");
        bytes.extend_from_slice(&16u32.to_le_bytes());
        bytes.extend_from_slice(&1u16.to_le_bytes()); // PCM
        bytes.extend_from_slice(&1u16.to_le_bytes()); // mono
        bytes.extend_from_slice(&1000u32.to_le_bytes()); // rate
        bytes.extend_from_slice(&2000u32.to_le_bytes()); // byte rate
        bytes.extend_from_slice(&2u16.to_le_bytes()); // block align
        bytes.extend_from_slice(&16u16.to_le_bytes()); // bits
        bytes.extend_from_slice(b"data");
        bytes.extend_from_slice(&200u32.to_le_bytes());
        for i in 0..100i16 {
            bytes.extend_from_slice(&(i * 100).to_le_bytes());
        }
        let f = read_wav(&bytes).unwrap();
        assert_eq!(f.len(), 100);
        assert_relative_eq!(f.dt, 1e-3);
        assert_relative_eq!(f.samples[1].re, 100.0 / 32768.0);
        assert!(f.samples.iter().all(|z| z.re.abs() <= 1.0));
    }

    #[test]
    fn wav_rejects_stereo_and_float() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"RIFF");
        bytes.extend_from_slice(&40u32.to_le_bytes());
        bytes.extend_from_slice(b"WAVE");
        bytes.extend_from_slice(b"fmt ");
        bytes.extend_from_slice(&16u32.to_le_bytes());
        bytes.extend_from_slice(&3u16.to_le_bytes()); // float
        bytes.extend_from_slice(&1u16.to_le_bytes());
        bytes.extend_from_slice(&1000u32.to_le_bytes());
        bytes.extend_from_slice(&4000u32.to_le_bytes());
        bytes.extend_from_slice(&4u16.to_le_bytes());
        bytes.extend_from_slice(&32u16.to_le_bytes());
        bytes.extend_from_slice(b"data");
        bytes.extend_from_slice(&0u32.to_le_bytes());
        assert!(matches!(read_wav(&bytes), Err(SaftError::ParseError { .. })));
    }

    #[test]
    fn grid_and_matrix_literals() {
        let g = parse_real_grid("-8:0.0625:257").unwrap();
        assert_eq!((g.start, g.step, g.count), (-8.0, 0.0625, 257));
        let s = parse_scale_grid("geo:0.25:1.1:64").unwrap();
        assert_eq!(s.count(), 64);
        let m = parse_matrix("0,1,-1,0,0,0").unwrap();
        assert_eq!(m, SaftMatrix::fourier());
        assert!(parse_matrix("1,0,0,1,0,0").is_err());
    }

    #[test]
    fn scalogram_csv_roundtrip_layout() {
        let a = ScaleGrid::geometric(1.0, 2.0, 2).unwrap();
        let b = RealGrid::new(0.0, 0.5, 3).unwrap();
        let mut w = Scalogram::zeros(a, b, SaftMatrix::fourier());
        w.set(1, 2, Complex64::new(3.5, -1.25));
        let text = write_scalogram_csv(&w);
        let parsed = read_labeled_matrix_csv(&text).unwrap();
        assert_eq!(parsed.row_axis, "b");
        assert_eq!(parsed.col_axis, "a");
        assert_eq!(parsed.row_labels, vec![0.0, 0.5, 1.0]);
        assert_eq!(parsed.col_labels, vec![1.0, 2.0]);
        // file rows are b, columns are a
        assert_eq!(parsed.values[2 * 2 + 1], Complex64::new(3.5, -1.25));
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn signal_csv_roundtrip_is_exact(
            t0 in -1e3f64..1e3,
            dt_exp in -6i32..3,
            samples in proptest::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 1..40),
        ) {
            let dt = 2.0f64.powi(dt_exp);
            let f = Signal::new(
                samples.iter().map(|&(re, im)| Complex64::new(re, im)).collect(),
                t0,
                dt,
            ).unwrap();
            // shortest round-trip float formatting makes the cycle exact
            let back = read_signal_csv(&write_signal_csv(&f)).unwrap();
            prop_assert_eq!(&back.samples, &f.samples);
            prop_assert_eq!(back.t0, f.t0);
            if f.len() > 1 {
                prop_assert!((back.dt - f.dt).abs() <= 1e-9 * f.dt);
            }
        }
    }
}

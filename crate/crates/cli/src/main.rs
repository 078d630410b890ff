//! Command line front end: signal ingestion, subcommand dispatch to every
//! transform, CSV/JSON artifacts, heatmap rendering and the invariant-suite
//! runner. Exit codes: 0 success, 2 configuration or parse errors, 3
//! numerical failures.

mod render;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use saftwave_core::covariance::verify_covariances;
use saftwave_core::dsawt::{
    dsawt_analyze, estimate_frame_bounds, frame_reconstruct, FrameSpec, LatticeConvention,
};
use saftwave_core::error::SaftError;
use saftwave_core::fixtures;
use saftwave_core::io::{
    ingest_signal, parse_matrix, parse_real_grid, parse_scale_grid, read_coefficients_csv,
    read_labeled_matrix_csv, write_coefficients_csv, write_scalogram_csv,
    write_signal_csv, write_spectrum_csv, write_wigner_csv, Sidecar, WaveletDescriptor,
};
use saftwave_core::localization::localization;
use saftwave_core::matrix::{make_special_matrix, SpecialMatrix};
use saftwave_core::oracles::{embedded_fixtures, FixtureSet};
use saftwave_core::poisson::{
    classical_poisson_check, sawt_poisson_check, AnalyticSignal, PoissonConvention,
};
use saftwave_core::saft::{saft_forward, saft_inverse, SaftMethod, Spectrum};
use saftwave_core::sawt::{analyze, coefficient_energy, synthesize};
use saftwave_core::wavepacket::wp_analyze;
use saftwave_core::wigner::wigner;
use saftwave_core::{RealGrid, Result, SaftMatrix, Signal, Wavelet};

#[derive(Parser)]
#[command(name = "saftwave", version, about = "Special affine Fourier and wavelet transforms")]
struct Cli {
    /// Worker threads for the compute modules (default: available cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct MatrixArgs {
    /// Six comma-separated entries A,B,C,D,p,q.
    #[arg(long, allow_hyphen_values = true)]
    matrix: Option<String>,
    /// Named family: fourier | fractional | offset-fractional | fresnel | linear-canonical.
    #[arg(long)]
    matrix_kind: Option<String>,
    /// Rotation angle for the fractional kinds.
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Offset p for the named kinds that take one.
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
    /// Offset q for the named kinds that take one.
    #[arg(long, allow_negative_numbers = true)]
    q: Option<f64>,
    /// B entry for the Fresnel kind.
    #[arg(long, allow_negative_numbers = true)]
    b_param: Option<f64>,
    /// A,B,C,D for the linear-canonical kind.
    #[arg(long, allow_hyphen_values = true)]
    lc: Option<String>,
}

impl MatrixArgs {
    fn build(&self) -> Result<SaftMatrix> {
        if let Some(lit) = &self.matrix {
            return parse_matrix(lit);
        }
        let kind = self.matrix_kind.as_deref().unwrap_or("fourier");
        let missing = |flag: &str| SaftError::ParseError {
            location: format!("--matrix-kind {kind}"),
            reason: format!("missing required flag --{flag}"),
        };
        match kind {
            "fourier" => make_special_matrix(SpecialMatrix::Fourier),
            "fractional" => make_special_matrix(SpecialMatrix::Fractional {
                theta: self.theta.ok_or_else(|| missing("theta"))?,
            }),
            "offset-fractional" => make_special_matrix(SpecialMatrix::OffsetFractional {
                theta: self.theta.ok_or_else(|| missing("theta"))?,
                p: self.p.unwrap_or(0.0),
                q: self.q.unwrap_or(0.0),
            }),
            "fresnel" => make_special_matrix(SpecialMatrix::Fresnel {
                b: self.b_param.ok_or_else(|| missing("b-param"))?,
                p: self.p.unwrap_or(0.0),
                q: self.q.unwrap_or(0.0),
            }),
            "linear-canonical" => {
                let lit = self.lc.as_ref().ok_or_else(|| missing("lc"))?;
                let parts: Vec<f64> = lit
                    .split(',')
                    .map(|s| {
                        s.trim().parse().map_err(|e| SaftError::ParseError {
                            location: format!("--lc {lit}"),
                            reason: format!("{e}"),
                        })
                    })
                    .collect::<Result<_>>()?;
                if parts.len() != 4 {
                    return Err(SaftError::ParseError {
                        location: format!("--lc {lit}"),
                        reason: "expected A,B,C,D".into(),
                    });
                }
                make_special_matrix(SpecialMatrix::LinearCanonical {
                    a: parts[0],
                    b: parts[1],
                    c: parts[2],
                    d: parts[3],
                })
            }
            other => Err(SaftError::ParseError {
                location: "--matrix-kind".into(),
                reason: format!("unknown kind {other:?}"),
            }),
        }
    }
}

#[derive(Args, Clone)]
struct WaveletArgs {
    /// haar | morlet | mexican-hat
    #[arg(long)]
    wavelet: String,
    /// Morlet center frequency.
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Rescale the window to unit L2 norm.
    #[arg(long, default_value_t = false)]
    normalize: bool,
}

impl WaveletArgs {
    fn build(&self) -> Result<Wavelet> {
        let base = match self.wavelet.as_str() {
            "haar" => Wavelet::Haar,
            "morlet" => Wavelet::Morlet(self.alpha.unwrap_or(6.0)),
            "mexican-hat" => Wavelet::MexicanHat,
            other => {
                return Err(SaftError::ParseError {
                    location: "--wavelet".into(),
                    reason: format!("unknown wavelet {other:?}"),
                })
            }
        };
        Ok(if self.normalize { base.normalized() } else { base })
    }
}

#[derive(Args, Clone)]
struct LatticeArgs {
    #[arg(long, default_value_t = 2.0)]
    a0: f64,
    #[arg(long, default_value_t = 1.0)]
    b0: f64,
    #[arg(long, allow_negative_numbers = true)]
    jmin: i32,
    #[arg(long, allow_negative_numbers = true)]
    jmax: i32,
    #[arg(long, allow_negative_numbers = true)]
    kmin: i64,
    #[arg(long, allow_negative_numbers = true)]
    kmax: i64,
    /// dilation-matched (default) | window-lattice
    #[arg(long, default_value = "dilation-matched")]
    convention: String,
}

impl LatticeArgs {
    fn build(&self) -> Result<FrameSpec> {
        let mut spec = FrameSpec::new(self.a0, self.b0, self.jmin, self.jmax, self.kmin, self.kmax)?;
        spec.convention = match self.convention.as_str() {
            "dilation-matched" => LatticeConvention::DilationMatched,
            "window-lattice" => LatticeConvention::WindowLattice,
            other => {
                return Err(SaftError::ParseError {
                    location: "--convention".into(),
                    reason: format!("unknown lattice convention {other:?}"),
                })
            }
        };
        Ok(spec)
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum MethodArg {
    Quadrature,
    Chirpfft,
}

#[derive(Subcommand)]
enum Command {
    /// Forward (or inverse) transform of a sampled signal.
    Saft {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        matrix: MatrixArgs,
        /// SAFT-domain grid start:step:count.
        #[arg(long, allow_hyphen_values = true)]
        omega: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Chirpfft)]
        method: MethodArg,
        #[arg(long)]
        output: PathBuf,
        /// Treat the input as a spectrum CSV and invert onto --times.
        #[arg(long, default_value_t = false)]
        inverse: bool,
        /// Time grid for --inverse.
        #[arg(long, allow_hyphen_values = true)]
        times: Option<String>,
    },
    /// Continuous wavelet-style transform operations.
    Sawt {
        #[command(subcommand)]
        op: SawtOp,
    },
    /// Discrete lattice transform, frame bounds and reconstruction.
    Dsawt {
        #[command(subcommand)]
        op: DsawtOp,
    },
    /// Wigner distribution over a (t, a) grid.
    Wigner {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        matrix: MatrixArgs,
        #[arg(long, allow_hyphen_values = true)]
        t_grid: String,
        #[arg(long, allow_hyphen_values = true)]
        a_grid: String,
        #[arg(long)]
        output: PathBuf,
    },
    /// Wave-packet transform over (a, b, N); one CSV per N slice.
    Wavepacket {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        matrix: MatrixArgs,
        #[command(flatten)]
        wavelet: WaveletArgs,
        #[arg(long, allow_hyphen_values = true)]
        a_grid: String,
        #[arg(long, allow_hyphen_values = true)]
        b_grid: String,
        #[arg(long, allow_hyphen_values = true)]
        n_grid: String,
        #[arg(long)]
        output_prefix: PathBuf,
    },
    /// Poisson summation checks.
    Poisson {
        #[command(subcommand)]
        op: PoissonOp,
    },
    /// Fixture regeneration from the quadrature oracle.
    Oracle {
        #[command(subcommand)]
        op: OracleOp,
    },
    /// Invariant-suite runner; prints a JSON report.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Heatmap PNG of a coefficient CSV.
    Render {
        #[arg(long)]
        input: PathBuf,
        /// Optional sidecar JSON; enables axis labels.
        #[arg(long)]
        sidecar: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        /// abs | real | imag | phase
        #[arg(long, default_value = "abs")]
        scale: String,
    },
}

#[derive(Subcommand)]
enum SawtOp {
    Analyze {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        matrix: MatrixArgs,
        #[command(flatten)]
        wavelet: WaveletArgs,
        /// Scale grid: start:step:count or geo:start:ratio:count
        /// (default: a geometric ladder with ratio 2^(1/8) spanning
        /// 8 dt .. span/4 of the input).
        #[arg(long, allow_hyphen_values = true)]
        a_grid: Option<String>,
        /// Translation grid (default: the input signal's own grid).
        #[arg(long, allow_hyphen_values = true)]
        b_grid: Option<String>,
        #[arg(long)]
        output: PathBuf,
    },
    Synthesize {
        /// Scalogram CSV produced by analyze.
        #[arg(long)]
        input: PathBuf,
        /// Sidecar JSON produced by analyze.
        #[arg(long)]
        sidecar: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        times: String,
        #[arg(long)]
        output: PathBuf,
    },
    Localize {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[command(flatten)]
        wavelet: WaveletArgs,
        #[arg(long)]
        scale: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        shift: f64,
    },
    Covariance {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        matrix: MatrixArgs,
        #[command(flatten)]
        wavelet: WaveletArgs,
        /// Shift/dilation parameter of the verified identities.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        shift: f64,
    },
}

#[derive(Subcommand)]
enum DsawtOp {
    Analyze {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        matrix: MatrixArgs,
        #[command(flatten)]
        wavelet: WaveletArgs,
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long)]
        output: PathBuf,
    },
    Bounds {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[command(flatten)]
        wavelet: WaveletArgs,
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, allow_hyphen_values = true)]
        trial_grid: String,
    },
    Reconstruct {
        /// Coefficient CSV (rows j,k,re,im).
        #[arg(long)]
        coeffs: PathBuf,
        #[command(flatten)]
        matrix: MatrixArgs,
        #[command(flatten)]
        wavelet: WaveletArgs,
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, allow_hyphen_values = true)]
        times: String,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum PoissonOp {
    Classical {
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        center: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Optional modulation frequency.
        #[arg(long, allow_negative_numbers = true)]
        omega0: Option<f64>,
        #[arg(long)]
        period: f64,
        #[arg(long, allow_hyphen_values = true)]
        t_grid: String,
        #[arg(long, default_value_t = 16)]
        kmax: i64,
    },
    Sawt {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        matrix: MatrixArgs,
        #[command(flatten)]
        wavelet: WaveletArgs,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        shift: f64,
        #[arg(long)]
        period: f64,
        #[arg(long, allow_hyphen_values = true)]
        t_grid: String,
        #[arg(long, default_value_t = 16)]
        kmax: i64,
        /// standard (2 pi consistent) | paper (raw printed spacing)
        #[arg(long, default_value = "standard")]
        convention: String,
    },
}

#[derive(Subcommand)]
enum OracleOp {
    Regen {
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn load_signal(path: &Path) -> Result<Signal> {
    ingest_signal(path)
}

fn fixtures_path_override() -> Option<PathBuf> {
    std::env::var_os("SAWT_FIXTURES").map(PathBuf::from)
}

fn active_fixtures() -> Result<FixtureSet> {
    match fixtures_path_override() {
        Some(path) => FixtureSet::load(&path),
        None => Ok(embedded_fixtures()),
    }
}

fn measured_constants(fixtures: &FixtureSet) -> BTreeMap<String, f64> {
    let mut constants = BTreeMap::new();
    if let Some(f) = fixtures.get("moyal_kappa") {
        constants.insert("moyal_kappa".into(), f.re);
    }
    if let Some(f) = fixtures.get("sawt_roundtrip_c") {
        constants.insert("roundtrip_c_re".into(), f.re);
        constants.insert("roundtrip_c_im".into(), f.im);
    }
    constants
}

fn wavelet_from_descriptor(d: &WaveletDescriptor) -> Result<Wavelet> {
    match d {
        WaveletDescriptor::Haar => Ok(Wavelet::Haar),
        WaveletDescriptor::Morlet { alpha } => Ok(Wavelet::Morlet(*alpha)),
        WaveletDescriptor::MexicanHat => Ok(Wavelet::MexicanHat),
        WaveletDescriptor::Scaled { amplitude, inner } => Ok(Wavelet::Scaled {
            inner: Box::new(wavelet_from_descriptor(inner)?),
            amplitude: *amplitude,
        }),
        WaveletDescriptor::Sampled { .. } => Err(SaftError::ParseError {
            location: "sidecar wavelet".into(),
            reason: "sampled windows cannot be rebuilt from a sidecar".into(),
        }),
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(workers) = cli.workers {
        // ignore the error if a pool already exists (tests call run twice)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    }
    match cli.command {
        Command::Saft { input, matrix, omega, method, output, inverse, times } => {
            let m = matrix.build()?;
            let omegas = parse_real_grid(&omega)?;
            if inverse {
                let times = parse_real_grid(&times.ok_or_else(|| SaftError::ParseError {
                    location: "--inverse".into(),
                    reason: "missing --times".into(),
                })?)?;
                let text = std::fs::read_to_string(&input)?;
                let spectrum = saftwave_core::io::read_spectrum_csv(&text, m)?;
                let f = saft_inverse(&spectrum, &times)?;
                std::fs::write(&output, write_signal_csv(&f))?;
            } else {
                let f = load_signal(&input)?;
                let method = match method {
                    MethodArg::Quadrature => SaftMethod::Quadrature,
                    MethodArg::Chirpfft => SaftMethod::ChirpFft,
                };
                let spectrum: Spectrum = saft_forward(&f, &m, &omegas, method)?;
                std::fs::write(&output, write_spectrum_csv(&spectrum))?;
            }
            Ok(())
        }
        Command::Sawt { op } => run_sawt(op),
        Command::Dsawt { op } => run_dsawt(op),
        Command::Wigner { input, matrix, t_grid, a_grid, output } => {
            let m = matrix.build()?;
            let f = load_signal(&input)?;
            let tg = parse_real_grid(&t_grid)?;
            let ag = parse_real_grid(&a_grid)?;
            let w = wigner(&f, &m, &tg, &ag)?;
            std::fs::write(&output, write_wigner_csv(&w))?;
            Ok(())
        }
        Command::Wavepacket { input, matrix, wavelet, a_grid, b_grid, n_grid, output_prefix } => {
            let m = matrix.build()?;
            let psi = wavelet.build()?;
            let f = load_signal(&input)?;
            let ag = parse_scale_grid(&a_grid)?;
            let bg = parse_real_grid(&b_grid)?;
            let ng = parse_real_grid(&n_grid)?;
            let cube = wp_analyze(&f, &psi, &m, &ag, &bg, &ng)?;
            let mut slices = Vec::new();
            let a_values = ag.values();
            for (ln, n) in ng.iter().enumerate() {
                // one scalogram-layout CSV per N slice
                let mut text = String::from("b\\a");
                for a in &a_values {
                    text.push_str(&format!(",{a}"));
                }
                text.push('\n');
                for (jb, b) in bg.iter().enumerate() {
                    text.push_str(&format!("{b}"));
                    for ia in 0..a_values.len() {
                        let z = cube.get(ia, jb, ln);
                        text.push_str(&format!(",{}:{}", z.re, z.im));
                    }
                    text.push('\n');
                }
                let path = output_prefix.with_file_name(format!(
                    "{}_n{:03}.csv",
                    output_prefix.file_name().and_then(|s| s.to_str()).unwrap_or("wp"),
                    ln
                ));
                std::fs::write(&path, text)?;
                slices.push(serde_json::json!({
                    "index": ln,
                    "n": n,
                    "path": path.file_name().and_then(|s| s.to_str()).unwrap_or_default(),
                }));
            }
            let manifest = serde_json::json!({
                "matrix": m,
                "wavelet": WaveletDescriptor::from(&psi),
                "a_grid": ag,
                "b_grid": bg,
                "n_grid": ng,
                "slices": slices,
            });
            let manifest_path = output_prefix.with_file_name(format!(
                "{}_manifest.json",
                output_prefix.file_name().and_then(|s| s.to_str()).unwrap_or("wp"),
            ));
            std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest).unwrap())?;
            Ok(())
        }
        Command::Poisson { op } => run_poisson(op),
        Command::Oracle { op } => match op {
            OracleOp::Regen { tol, output } => {
                let set = fixtures::regenerate(tol)?;
                let path = output
                    .or_else(fixtures_path_override)
                    .unwrap_or_else(|| PathBuf::from("fixtures.json"));
                set.save(&path)?;
                println!("{{\"fixtures\": {}, \"path\": {:?}}}", set.0.len(), path);
                Ok(())
            }
        },
        Command::Verify { suite, tol } => run_verify(&suite, tol),
        Command::Render { input, sidecar, output, scale } => {
            let scale = render::ColorScale::parse(&scale).ok_or_else(|| SaftError::ParseError {
                location: "--scale".into(),
                reason: "expected abs|real|imag|phase".into(),
            })?;
            let text = std::fs::read_to_string(&input)?;
            let parsed = read_labeled_matrix_csv(&text)?;
            let labeled = match &sidecar {
                Some(p) => {
                    let _ = Sidecar::from_json(&std::fs::read_to_string(p)?)?;
                    true
                }
                None => false,
            };
            let rows = parsed.row_labels.len();
            let cols = parsed.col_labels.len();
            let input = render::HeatmapInput {
                values: parsed.values,
                rows,
                cols,
                row_axis: parsed.row_axis,
                col_axis: parsed.col_axis,
                row_labels: parsed.row_labels,
                col_labels: parsed.col_labels,
                labeled,
            };
            let (img, _) = render::render_heatmap(&input, scale);
            img.save(&output).map_err(|e| SaftError::Io(e.to_string()))?;
            Ok(())
        }
    }
}

fn run_sawt(op: SawtOp) -> Result<()> {
    match op {
        SawtOp::Analyze { input, matrix, wavelet, a_grid, b_grid, output } => {
            let m = matrix.build()?;
            let psi = wavelet.build()?;
            let f = load_signal(&input)?;
            let ag = match a_grid {
                Some(spec) => parse_scale_grid(&spec)?,
                None => {
                    let lo = 8.0 * f.dt;
                    let hi = (f.t_end() - f.t0) / 4.0;
                    let ratio = 2.0f64.powf(0.125);
                    let count = ((hi / lo).ln() / ratio.ln()).ceil().max(1.0) as usize + 1;
                    saftwave_core::ScaleGrid::geometric(lo, ratio, count)?
                }
            };
            let bg = match b_grid {
                Some(spec) => parse_real_grid(&spec)?,
                None => f.grid(),
            };
            let w = analyze(&f, &psi, &m, &ag, &bg)?;
            std::fs::write(&output, write_scalogram_csv(&w))?;
            let constants = active_fixtures().map(|fx| measured_constants(&fx)).unwrap_or_default();
            let sidecar = Sidecar {
                a_grid: ag,
                b_grid: bg,
                matrix: m,
                wavelet: Some(WaveletDescriptor::from(&psi)),
                constants,
                axes: ("b".into(), "a".into()),
            };
            let sidecar_path = output.with_extension("csv.json");
            std::fs::write(&sidecar_path, sidecar.to_json())?;
            Ok(())
        }
        SawtOp::Synthesize { input, sidecar, times, output } => {
            let side = Sidecar::from_json(&std::fs::read_to_string(&sidecar)?)?;
            let text = std::fs::read_to_string(&input)?;
            let parsed = read_labeled_matrix_csv(&text)?;
            let n_a = parsed.col_labels.len();
            let n_b = parsed.row_labels.len();
            if n_a != side.a_grid.count() || n_b != side.b_grid.count {
                return Err(SaftError::ParseError {
                    location: "scalogram csv".into(),
                    reason: format!(
                        "grid mismatch with sidecar: csv {n_a}x{n_b}, sidecar {}x{}",
                        side.a_grid.count(),
                        side.b_grid.count
                    ),
                });
            }
            // file rows are b, columns are a; storage rows are a
            let mut values = vec![Complex64::new(0.0, 0.0); n_a * n_b];
            for jb in 0..n_b {
                for ia in 0..n_a {
                    values[ia * n_b + jb] = parsed.values[jb * n_a + ia];
                }
            }
            let w = saftwave_core::Scalogram::new(values, side.a_grid.clone(), side.b_grid, side.matrix);
            let psi = match &side.wavelet {
                Some(d) => wavelet_from_descriptor(d)?,
                None => {
                    return Err(SaftError::ParseError {
                        location: "sidecar".into(),
                        reason: "missing wavelet descriptor".into(),
                    })
                }
            };
            let tg = parse_real_grid(&times)?;
            let f = synthesize(&w, &psi, &side.matrix, &tg)?;
            std::fs::write(&output, write_signal_csv(&f))?;
            Ok(())
        }
        SawtOp::Localize { matrix, wavelet, scale, shift } => {
            let m = matrix.build()?;
            let psi = wavelet.build()?;
            let rep = localization(&psi, &m, scale, shift)?;
            println!("{}", serde_json::to_string_pretty(&rep).unwrap());
            Ok(())
        }
        SawtOp::Covariance { input, matrix, wavelet, shift } => {
            let m = matrix.build()?;
            let psi = wavelet.build()?;
            let f = load_signal(&input)?;
            let rep = verify_covariances(&f, &psi, &m, shift)?;
            println!("{}", serde_json::to_string_pretty(&rep).unwrap());
            Ok(())
        }
    }
}

fn run_dsawt(op: DsawtOp) -> Result<()> {
    match op {
        DsawtOp::Analyze { input, matrix, wavelet, lattice, output } => {
            let m = matrix.build()?;
            let psi = wavelet.build()?;
            let spec = lattice.build()?;
            let f = load_signal(&input)?;
            let table = dsawt_analyze(&f, &psi, &m, &spec)?;
            std::fs::write(&output, write_coefficients_csv(&table))?;
            Ok(())
        }
        DsawtOp::Bounds { matrix, wavelet, lattice, trial_grid } => {
            let m = matrix.build()?;
            let psi = wavelet.build()?;
            let spec = lattice.build()?;
            let grid = parse_real_grid(&trial_grid)?;
            let (e, f) = estimate_frame_bounds(&psi, &m, &spec, &grid)?;
            println!(
                "{}",
                serde_json::json!({
                    "e": e,
                    "f": f,
                    "note": "trial-space estimates, not certified global bounds",
                })
            );
            Ok(())
        }
        DsawtOp::Reconstruct { coeffs, matrix, wavelet, lattice, times, output } => {
            let m = matrix.build()?;
            let psi = wavelet.build()?;
            let spec = lattice.build()?;
            let table = read_coefficients_csv(&std::fs::read_to_string(&coeffs)?, &spec)?;
            let tg = parse_real_grid(&times)?;
            let f = frame_reconstruct(&table, &psi, &m, &spec, &tg)?;
            std::fs::write(&output, write_signal_csv(&f))?;
            Ok(())
        }
    }
}

fn run_poisson(op: PoissonOp) -> Result<()> {
    match op {
        PoissonOp::Classical { amplitude, center, sigma, omega0, period, t_grid, kmax } => {
            let f = match omega0 {
                Some(omega) => AnalyticSignal::ModulatedGaussian { amplitude, center, sigma, omega },
                None => AnalyticSignal::Gaussian { amplitude, center, sigma },
            };
            let tg = parse_real_grid(&t_grid)?;
            let rep = classical_poisson_check(&f, period, &tg, kmax)?;
            println!("{}", serde_json::to_string_pretty(&rep).unwrap());
            Ok(())
        }
        PoissonOp::Sawt {
            input,
            matrix,
            wavelet,
            scale,
            shift,
            period,
            t_grid,
            kmax,
            convention,
        } => {
            let m = matrix.build()?;
            let psi = wavelet.build()?;
            let f = load_signal(&input)?;
            let tg = parse_real_grid(&t_grid)?;
            let conv = match convention.as_str() {
                "standard" => PoissonConvention::TwoPiConsistent,
                "paper" => PoissonConvention::RawPrinted,
                other => {
                    return Err(SaftError::ParseError {
                        location: "--convention".into(),
                        reason: format!("expected standard|paper, found {other:?}"),
                    })
                }
            };
            let rep = sawt_poisson_check(&f, &psi, &m, scale, shift, period, &tg, kmax, conv)?;
            println!("{}", serde_json::to_string_pretty(&rep).unwrap());
            Ok(())
        }
    }
}

fn run_verify(suite: &str, tol: Option<f64>) -> Result<()> {
    let report = match suite {
        "moyal" => {
            let tol = tol.unwrap_or(1e-3);
            let cfg = fixtures::moyal_config();
            let mut kappas = Vec::new();
            for f in &cfg.signals {
                let w = analyze(f, &cfg.wavelet, &cfg.matrix, &cfg.a_grid, &cfg.b_grid)?;
                kappas.push(coefficient_energy(&w) / (f.energy() * cfg.wavelet.l2_norm().powi(2)));
            }
            let mean = kappas.iter().sum::<f64>() / kappas.len() as f64;
            let spread = kappas.iter().map(|k| (k - mean).abs() / mean).fold(0.0, f64::max);
            serde_json::json!({
                "suite": "moyal",
                "kappa": mean,
                "kappa_per_signal": kappas,
                "relative_spread": spread,
                "tol": tol,
                "pass": spread <= tol,
            })
        }
        "qfactor" => {
            let tol = tol.unwrap_or(1e-6);
            let mut qs = Vec::new();
            for m in [SaftMatrix::fourier(), fixtures::chirpy_matrix()] {
                for a in [0.5, 1.0, 2.0, 4.0] {
                    qs.push(localization(&Wavelet::Morlet(6.0), &m, a, 0.3)?.q);
                }
            }
            let mean = qs.iter().sum::<f64>() / qs.len() as f64;
            let spread = qs.iter().map(|q| (q - mean).abs() / mean.abs()).fold(0.0, f64::max);
            serde_json::json!({
                "suite": "qfactor",
                "q": mean,
                "relative_spread": spread,
                "tol": tol,
                "pass": spread <= tol,
            })
        }
        "covariance" => {
            let tol = tol.unwrap_or(1e-4);
            let grid = RealGrid::new(-10.0, 1.0 / 128.0, 2561)?;
            let f = Signal::from_fn(&grid, |t| {
                Complex64::from_polar((-0.35 * t * t).exp(), 1.5 * t)
            })?;
            let rep = verify_covariances(&f, &Wavelet::Morlet(3.0), &fixtures::chirpy_matrix(), 2.0)?;
            let worst = rep.max_shift_residual();
            serde_json::json!({
                "suite": "covariance",
                "report": rep,
                "tol": tol,
                "pass": worst <= tol,
            })
        }
        "parseval" => {
            let tol = tol.unwrap_or(1e-4);
            let grid = RealGrid::new(-8.0, 16.0 / 2048.0, 2049)?;
            let f = Signal::from_fn(&grid, |t| Complex64::new((-0.5 * t * t).exp(), 0.0))?;
            let omegas = RealGrid::new(-26.0, 52.0 / 2047.0, 2048)?;
            let spec = saft_forward(&f, &fixtures::chirpy_matrix(), &omegas, SaftMethod::ChirpFft)?;
            let ratio = spec.energy() / f.energy();
            serde_json::json!({
                "suite": "parseval",
                "energy_ratio": ratio,
                "tol": tol,
                "pass": (ratio - 1.0).abs() <= tol,
            })
        }
        "poisson" => {
            let tol = tol.unwrap_or(1e-3);
            let g = AnalyticSignal::Gaussian { amplitude: 1.0, center: 0.0, sigma: 1.0 };
            let tg = RealGrid::new(0.0, 0.09, 11)?;
            let classical = classical_poisson_check(&g, 1.0, &tg, 16)?;
            let grid = RealGrid::new(-10.0, 1.0 / 64.0, 1281)?;
            let f = Signal::from_fn(&grid, |t| Complex64::new((-0.5 * t * t).exp(), 0.0))?;
            let windowed = sawt_poisson_check(
                &f,
                &Wavelet::Morlet(0.0),
                &SaftMatrix::fourier(),
                1.0,
                0.2,
                1.0,
                &tg,
                16,
                PoissonConvention::TwoPiConsistent,
            )?;
            serde_json::json!({
                "suite": "poisson",
                "classical_residual": classical.rel_residual,
                "windowed_residual": windowed.rel_residual,
                "tol": tol,
                "pass": classical.rel_residual <= 1e-9 && windowed.rel_residual <= tol,
            })
        }
        other => {
            return Err(SaftError::ParseError {
                location: "--suite".into(),
                reason: format!(
                    "unknown suite {other:?} (expected moyal|qfactor|covariance|parseval|poisson)"
                ),
            })
        }
    };
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    if report["pass"].as_bool() == Some(true) {
        Ok(())
    } else {
        Err(SaftError::NotConverged { iterations: 0, residual: f64::NAN })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

//! The special affine Fourier transform: kernel evaluation, forward transform
//! by trapezoid quadrature or the chirp-FFT factorization, and the inverse
//! transform through the conjugate kernel.
//!
//! Kernel convention used everywhere in this crate:
//!
//!   K_M(t, w) = (2*pi*i*B)^{-1/2}
//!               * exp{ (i/2B) [ A t^2 + 2 t (p - w) - 2 w (D p - B q) + D (w^2 + p^2) ] }
//!
//! with the principal branch of the square root. Under this convention the
//! conjugate kernel inverts exactly with plain dw measure:
//! integral K_M(t,w) conj(K_M(x,w)) dw = delta(t - x).

use num_complex::Complex64;
use rayon::prelude::*;

use crate::czt::{bluestein_len, chirp_transform, MAX_CHIRP_FFT_LEN};
use crate::error::{Result, SaftError};
use crate::grid::RealGrid;
use crate::matrix::SaftMatrix;
use crate::signal::Signal;

/// SAFT-domain samples of a signal.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<Complex64>,
    pub omega_grid: RealGrid,
    pub matrix: SaftMatrix,
}

impl Spectrum {
    /// Trapezoid integral of |O|^2 d(omega).
    pub fn energy(&self) -> f64 {
        let n = self.values.len();
        if n == 1 {
            return self.values[0].norm_sqr() * self.omega_grid.step;
        }
        let mut acc = 0.0;
        for (i, z) in self.values.iter().enumerate() {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            acc += w * z.norm_sqr();
        }
        acc * self.omega_grid.step
    }
}

/// Forward evaluation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaftMethod {
    /// Composite trapezoid on the signal's own grid.
    Quadrature,
    /// Pre-chirp x chirp-z transform x post-chirp; equal to `Quadrature` up to
    /// floating-point rounding, O((N+K) log(N+K)) instead of O(N*K).
    ChirpFft,
}

/// 1/sqrt(2*pi*i*B), principal branch.
pub fn kernel_prefactor(b: f64) -> Complex64 {
    Complex64::new(1.0, 0.0) / Complex64::new(0.0, 2.0 * std::f64::consts::PI * b).sqrt()
}

/// Kernel phase divided by its 1/(2B) factor is a bivariate quadratic; these
/// are its coefficients as a polynomial in t for fixed omega.
#[derive(Debug, Clone, Copy)]
pub struct KernelAtOmega {
    prefactor: Complex64,
    c2: f64,
    c1: f64,
    c0: f64,
}

impl KernelAtOmega {
    pub fn new(m: &SaftMatrix, omega: f64) -> Self {
        let two_b = 2.0 * m.b;
        KernelAtOmega {
            prefactor: kernel_prefactor(m.b),
            c2: m.a / two_b,
            c1: (m.p - omega) / m.b,
            c0: (-2.0 * omega * m.offset_term() + m.d * (omega * omega + m.p * m.p)) / two_b,
        }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> Complex64 {
        self.prefactor * Complex64::from_polar(1.0, (self.c2 * t + self.c1) * t + self.c0)
    }

    /// Phase only (argument of the exponential).
    #[inline]
    pub fn phase(&self, t: f64) -> f64 {
        (self.c2 * t + self.c1) * t + self.c0
    }
}

/// Kernel as a polynomial in omega for fixed t (used by the inverse path).
#[derive(Debug, Clone, Copy)]
struct KernelAtTime {
    prefactor: Complex64,
    c2: f64,
    c1: f64,
    c0: f64,
}

impl KernelAtTime {
    fn new(m: &SaftMatrix, t: f64) -> Self {
        let two_b = 2.0 * m.b;
        KernelAtTime {
            prefactor: kernel_prefactor(m.b),
            c2: m.d / two_b,
            c1: -(t + m.offset_term()) / m.b,
            c0: (m.a * t * t + 2.0 * t * m.p + m.d * m.p * m.p) / two_b,
        }
    }

    #[inline]
    fn eval_conj(&self, omega: f64) -> Complex64 {
        self.prefactor.conj()
            * Complex64::from_polar(1.0, -((self.c2 * omega + self.c1) * omega + self.c0))
    }
}

/// Evaluates the SAFT kernel K_M(t, omega).
pub fn kernel(m: &SaftMatrix, t: f64, omega: f64) -> Complex64 {
    KernelAtOmega::new(m, omega).eval(t)
}

/// Largest admissible sampling step for an integrand whose instantaneous
/// frequency is bounded by (|A| T + max|p - w| + |B| sigma)/|B|.
pub fn guard_dt(m: &SaftMatrix, t_max: f64, max_p_minus_omega: f64, sigma: f64) -> f64 {
    let rate = m.a.abs() * t_max + max_p_minus_omega + m.b.abs() * sigma;
    if rate <= 0.0 {
        f64::INFINITY
    } else {
        std::f64::consts::PI * m.b.abs() / rate
    }
}

fn check_forward_guard(f: &Signal, m: &SaftMatrix, omegas: &RealGrid) -> Result<()> {
    let t_max = f.t0.abs().max(f.t_end().abs());
    let pmo = (m.p - omegas.start).abs().max((m.p - omegas.end()).abs());
    let required = guard_dt(m, t_max, pmo, f.bandwidth_999());
    if f.dt > required {
        return Err(SaftError::NyquistViolation {
            required_dt: required,
            actual_dt: f.dt,
            cell: Some(format!("omega in [{}, {}]", omegas.start, omegas.end())),
        });
    }
    Ok(())
}

fn check_inverse_guard(spec: &Spectrum, times: &RealGrid) -> Result<()> {
    let m = &spec.matrix;
    let g = &spec.omega_grid;
    let t_max = times.max_abs();
    let omega_max = g.max_abs();
    let carrier = Signal::new(spec.values.clone(), g.start, g.step)
        .map(|s| s.bandwidth_999())
        .unwrap_or(0.0);
    let rate = (m.d.abs() * omega_max + m.offset_term().abs() + t_max) / m.b.abs() + carrier;
    let required = if rate <= 0.0 {
        f64::INFINITY
    } else {
        std::f64::consts::PI / rate
    };
    if g.step > required {
        return Err(SaftError::NyquistViolation {
            required_dt: required,
            actual_dt: g.step,
            cell: Some(format!("t in [{}, {}]", times.start, times.end())),
        });
    }
    Ok(())
}

/// Forward SAFT of a sampled signal onto a uniform omega grid.
pub fn saft_forward(
    f: &Signal,
    m: &SaftMatrix,
    omegas: &RealGrid,
    method: SaftMethod,
) -> Result<Spectrum> {
    m.validate()?;
    check_forward_guard(f, m, omegas)?;
    let values = match method {
        SaftMethod::Quadrature => forward_quadrature(f, m, omegas),
        SaftMethod::ChirpFft => forward_chirp_fft(f, m, omegas)?,
    };
    Ok(Spectrum { values, omega_grid: *omegas, matrix: *m })
}

fn trapezoid_weight(i: usize, n: usize) -> f64 {
    if n > 1 && (i == 0 || i == n - 1) {
        0.5
    } else {
        1.0
    }
}

fn forward_quadrature(f: &Signal, m: &SaftMatrix, omegas: &RealGrid) -> Vec<Complex64> {
    let n = f.len();
    (0..omegas.count)
        .into_par_iter()
        .map(|k| {
            let ker = KernelAtOmega::new(m, omegas.nth(k));
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, z) in f.samples.iter().enumerate() {
                acc += z * ker.eval(f.time(i)) * trapezoid_weight(i, n);
            }
            acc * f.dt
        })
        .collect()
}

fn forward_chirp_fft(f: &Signal, m: &SaftMatrix, omegas: &RealGrid) -> Result<Vec<Complex64>> {
    let n = f.len();
    let k_count = omegas.count;
    let fft_len = bluestein_len(n, k_count);
    if fft_len > MAX_CHIRP_FFT_LEN {
        return Err(SaftError::GridMismatch {
            reason: format!(
                "induced FFT length {fft_len} exceeds the supported maximum {MAX_CHIRP_FFT_LEN}"
            ),
        });
    }
    let (omega0, d_omega) = (omegas.start, omegas.step);
    let two_b = 2.0 * m.b;
    let phi = f.dt * d_omega / m.b;

    // c_n = w_n dt f_n exp{ i (A t^2 + 2 t p)/(2B) } exp{ -i t_n omega0 / B }
    let pre: Vec<Complex64> = f
        .samples
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let t = f.time(i);
            let phase = (m.a * t * t + 2.0 * t * m.p) / two_b - t * omega0 / m.b;
            z * Complex64::from_polar(trapezoid_weight(i, n) * f.dt, phase)
        })
        .collect();

    let mid = chirp_transform(&pre, k_count, phi);

    let prefactor = kernel_prefactor(m.b);
    Ok(mid
        .into_iter()
        .enumerate()
        .map(|(k, s)| {
            let omega = omegas.nth(k);
            // post-chirp plus the t0-row of the separated phase
            let phase = (-2.0 * omega * m.offset_term() + m.d * (omega * omega + m.p * m.p))
                / two_b
                - f.t0 * (k as f64) * d_omega / m.b;
            s * prefactor * Complex64::from_polar(1.0, phase)
        })
        .collect())
}

/// Inverse SAFT: f(t) = integral O(w) conj(K_M(t, w)) dw by trapezoid over the
/// spectrum's grid.
pub fn saft_inverse(spec: &Spectrum, times: &RealGrid) -> Result<Signal> {
    spec.matrix.validate()?;
    check_inverse_guard(spec, times)?;
    let g = &spec.omega_grid;
    let n = spec.values.len();
    let samples: Vec<Complex64> = (0..times.count)
        .into_par_iter()
        .map(|i| {
            let ker = KernelAtTime::new(&spec.matrix, times.nth(i));
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, z) in spec.values.iter().enumerate() {
                acc += z * ker.eval_conj(g.nth(k)) * trapezoid_weight(k, n);
            }
            acc * g.step
        })
        .collect();
    Signal::new(samples, times.start, times.step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::gaussian_saft_closed_form;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    const FRAC_1_SQRT_2PI: f64 = 0.3989422804014327;

    fn fourier() -> SaftMatrix {
        SaftMatrix::fourier()
    }

    fn chirpy() -> SaftMatrix {
        SaftMatrix::new(1.0, 2.0, 1.0, 3.0, 1.0, 1.0).unwrap()
    }

    fn gaussian_signal(n: usize, half: f64) -> Signal {
        let grid = RealGrid::new(-half, 2.0 * half / (n as f64 - 1.0), n).unwrap();
        Signal::from_fn(&grid, |t| Complex64::new((-0.5 * t * t).exp(), 0.0)).unwrap()
    }

    #[test]
    fn kernel_fixed_points() {
        // Fourier matrix at the origin: 1/sqrt(2 pi i)
        let k = kernel(&fourier(), 0.0, 0.0);
        assert_relative_eq!(k.re, FRAC_1_SQRT_2PI * 0.5f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(k.im, -FRAC_1_SQRT_2PI * 0.5f64.sqrt(), epsilon = 1e-12);

        // (1,1,0,1,0,0) at t = w = 1: exponent vanishes
        let m = SaftMatrix::new(1.0, 1.0, 0.0, 1.0, 0.0, 0.0).unwrap();
        let k = kernel(&m, 1.0, 1.0);
        assert_relative_eq!(k.re, FRAC_1_SQRT_2PI * 0.5f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(k.im, -FRAC_1_SQRT_2PI * 0.5f64.sqrt(), epsilon = 1e-12);

        // (1,2,1,3,1,1) at the origin: (4 pi i)^{-1/2} e^{3i/4}
        let k = kernel(&chirpy(), 0.0, 0.0);
        let expect = kernel_prefactor(2.0) * Complex64::from_polar(1.0, 0.75);
        assert!((k - expect).norm() < 1e-14);
    }

    proptest! {
        #[test]
        fn kernel_modulus_is_constant(
            b in prop_oneof![0.05f64..8.0, -8.0f64..-0.05],
            a in -3.0f64..3.0,
            d_free in -3.0f64..3.0,
            p in -2.0f64..2.0,
            q in -2.0f64..2.0,
            t in -20.0f64..20.0,
            w in -20.0f64..20.0,
        ) {
            // complete to a unimodular matrix: c = (a*d - 1)/b
            let d = d_free;
            let c = (a * d - 1.0) / b;
            let m = SaftMatrix::new(a, b, c, d, p, q).unwrap();
            let modulus = kernel(&m, t, w).norm();
            let expected = 1.0 / (2.0 * std::f64::consts::PI * b.abs()).sqrt();
            prop_assert!((modulus - expected).abs() <= 1e-12 * expected.max(1.0));
        }
    }

    #[test]
    fn gaussian_forward_matches_closed_integral() {
        let f = gaussian_signal(4097, 8.0);
        let omegas = RealGrid::new(-6.0, 12.0 / 192.0, 193).unwrap();
        let spec = saft_forward(&f, &fourier(), &omegas, SaftMethod::Quadrature).unwrap();
        let mut max_err = 0.0f64;
        for (k, v) in spec.values.iter().enumerate() {
            let expect = gaussian_saft_closed_form(&fourier(), 1.0, omegas.nth(k));
            max_err = max_err.max((v - expect).norm());
        }
        assert!(max_err <= 1e-6, "max abs error {max_err}");
    }

    #[test]
    fn zero_signal_transforms_to_zero() {
        let g = RealGrid::new(-4.0, 1.0 / 64.0, 513).unwrap();
        let f = Signal::zeros(&g);
        let omegas = RealGrid::new(-3.0, 0.05, 121).unwrap();
        for method in [SaftMethod::Quadrature, SaftMethod::ChirpFft] {
            let spec = saft_forward(&f, &chirpy(), &omegas, method).unwrap();
            assert!(spec.values.iter().all(|z| z.norm() == 0.0));
        }
    }

    fn random_band_limited(seed: u64, n: usize, half: f64) -> Signal {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let grid = RealGrid::new(-half, 2.0 * half / (n as f64 - 1.0), n).unwrap();
        let comps: Vec<(f64, f64, f64)> =
            (0..6).map(|_| (rng.gen_range(-2.0..2.0), rng.gen_range(0.5..2.0), rng.gen_range(-3.0..3.0))).collect();
        Signal::from_fn(&grid, |t| {
            let mut z = Complex64::new(0.0, 0.0);
            for &(c, s, w) in &comps {
                z += Complex64::from_polar((-(t - c) * (t - c) / (2.0 * s * s)).exp(), w * t);
            }
            z
        })
        .unwrap()
    }

    #[test]
    fn chirp_fft_equals_quadrature() {
        let omegas = RealGrid::new(-9.0, 18.0 / 255.0, 256).unwrap();
        for seed in 0..3u64 {
            let f = random_band_limited(seed, 1025, 8.0);
            let q = saft_forward(&f, &chirpy(), &omegas, SaftMethod::Quadrature).unwrap();
            let c = saft_forward(&f, &chirpy(), &omegas, SaftMethod::ChirpFft).unwrap();
            let num: f64 = q.values.iter().zip(&c.values).map(|(a, b)| (a - b).norm_sqr()).sum();
            let den: f64 = q.values.iter().map(|z| z.norm_sqr()).sum();
            assert!((num / den).sqrt() < 1e-10);
        }
    }

    #[test]
    fn fourier_reduction_matches_classical_integral() {
        // with m = Fourier the SAFT is i^{-1/2} (2 pi)^{-1/2} times the
        // classical Fourier integral, computed here by direct trapezoid
        let f = gaussian_signal(2049, 8.0);
        let omegas = RealGrid::new(-4.0, 0.125, 65).unwrap();
        let spec = saft_forward(&f, &fourier(), &omegas, SaftMethod::Quadrature).unwrap();
        let c = Complex64::from_polar(FRAC_1_SQRT_2PI, -std::f64::consts::FRAC_PI_4);
        for (k, v) in spec.values.iter().enumerate() {
            let w = omegas.nth(k);
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, z) in f.samples.iter().enumerate() {
                let wt = if i == 0 || i == f.len() - 1 { 0.5 } else { 1.0 };
                acc += z * Complex64::from_polar(wt, -w * f.time(i));
            }
            acc *= f.dt;
            assert!((v - acc * c).norm() < 1e-12);
        }
    }

    #[test]
    fn parseval_for_guard_compliant_gaussian() {
        let f = gaussian_signal(2049, 8.0);
        for m in [fourier(), chirpy()] {
            // omega range wide enough to hold the transform's energy
            let omegas = RealGrid::new(-26.0, 52.0 / 2047.0, 2048).unwrap();
            let spec = saft_forward(&f, &m, &omegas, SaftMethod::ChirpFft).unwrap();
            assert_relative_eq!(spec.energy(), f.energy(), max_relative = 1e-4);
        }
    }

    #[test]
    fn roundtrip_gaussian() {
        let f = gaussian_signal(2049, 8.0);
        let times = f.grid();
        for (m, tol) in [(fourier(), 1e-6), (chirpy(), 1e-4)] {
            let omegas = RealGrid::new(-26.0, 52.0 / 2047.0, 2048).unwrap();
            let spec = saft_forward(&f, &m, &omegas, SaftMethod::ChirpFft).unwrap();
            let back = saft_inverse(&spec, &times).unwrap();
            let err = back.rel_l2_error(&f);
            assert!(err <= tol, "matrix {m:?}: roundtrip error {err}");
        }
    }

    #[test]
    fn zero_spectrum_inverts_to_zero() {
        let spec = Spectrum {
            values: vec![Complex64::new(0.0, 0.0); 128],
            omega_grid: RealGrid::new(-2.0, 4.0 / 127.0, 128).unwrap(),
            matrix: fourier(),
        };
        let out = saft_inverse(&spec, &RealGrid::new(-1.0, 0.01, 201).unwrap()).unwrap();
        assert!(out.samples.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn guard_rejects_coarse_sampling() {
        // strongly chirped matrix, coarse dt
        let g = RealGrid::new(-8.0, 0.5, 33).unwrap();
        let f = Signal::from_fn(&g, |t| Complex64::new((-0.05 * t * t).exp(), 0.0)).unwrap();
        let m = SaftMatrix::new(10.0, 0.1, 0.0, 0.1, 0.0, 0.0);
        // a*d - b*c = 1 -> 10*0.1 - 0.1*c = 1 -> c = 0
        let m = m.unwrap();
        let err = saft_forward(&f, &m, &RealGrid::new(-20.0, 0.5, 81).unwrap(), SaftMethod::Quadrature);
        assert!(matches!(err, Err(SaftError::NyquistViolation { .. })));
    }

    #[test]
    fn chirp_fft_rejects_oversized_grids() {
        let g = RealGrid::new(0.0, 1.0 / 64.0, 64).unwrap();
        let f = Signal::from_fn(&g, |_| Complex64::new(1.0, 0.0)).unwrap();
        let omegas = RealGrid::new(0.0, 1e-9, MAX_CHIRP_FFT_LEN + 1).unwrap();
        let err = saft_forward(&f, &fourier(), &omegas, SaftMethod::ChirpFft);
        assert!(matches!(err, Err(SaftError::GridMismatch { .. })));
    }

    #[test]
    fn quadrature_is_linear() {
        let f = random_band_limited(7, 257, 6.0);
        let g = random_band_limited(8, 257, 6.0);
        let sum = Signal::new(
            f.samples.iter().zip(&g.samples).map(|(a, b)| 2.0 * a - 0.5 * b).collect(),
            f.t0,
            f.dt,
        )
        .unwrap();
        let omegas = RealGrid::new(-5.0, 0.1, 101).unwrap();
        let m = chirpy();
        let sf = saft_forward(&f, &m, &omegas, SaftMethod::Quadrature).unwrap();
        let sg = saft_forward(&g, &m, &omegas, SaftMethod::Quadrature).unwrap();
        let ss = saft_forward(&sum, &m, &omegas, SaftMethod::Quadrature).unwrap();
        for k in 0..omegas.count {
            let lin = 2.0 * sf.values[k] - 0.5 * sg.values[k];
            assert!((ss.values[k] - lin).norm() < 1e-12);
        }
    }
}

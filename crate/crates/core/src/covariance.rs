//! Numerical verification of the transform's covariance identities:
//! linearity, translation, parity, dilation and conjugation. Each identity's
//! right-hand side is evaluated through an independent route (different
//! signal, matrix or raw quadrature), so the residuals check the bookkeeping
//! rather than the quadrature against itself.
//!
//! The identities verified are the ones that actually hold under this crate's
//! kernel convention:
//!
//! - translation: W[f(.-s)](a,b) = e^{(i/2B)(A s^2 + 2 s (p-a))} W[e^{iAs./B} f](a, b-s)
//! - parity:      W[f(-.)](a,b)  = (1/sqrt a) int f(t) conj(psi(-(t+b)/a)) K_{M'}(t,-a) dt,
//!                M' = (A, B, C, D, -p, -q), with no extra unimodular constant
//! - dilation:    W[D_l f](a,b)  = (1/l) W^{M'}[f](a/l, b/l),
//!                M' = (A, B/l^2, l^2 C, D, p/l, l q)
//! - conjugation: W[conj f](a,b) = conj(W^{M'}_{conj psi}[f](a,b)),
//!                M' = (A, -B, -C, D, p, -q)

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::matrix::SaftMatrix;
use crate::quadrature::inner_product_window;
use crate::saft::KernelAtOmega;
use crate::sawt::coefficient;
use crate::signal::Signal;
use crate::wavelet::{Side, Wavelet};

#[derive(Debug, Clone, Serialize)]
pub struct CovarianceReport {
    pub linearity: f64,
    pub translation: f64,
    pub parity: f64,
    pub dilation: f64,
    pub conjugation: f64,
}

impl CovarianceReport {
    pub fn max_shift_residual(&self) -> f64 {
        self.translation.max(self.parity).max(self.dilation).max(self.conjugation)
    }
}

const CELL_A: [f64; 3] = [0.8, 1.3, 2.2];
const CELL_B: [f64; 4] = [-1.0, 0.0, 0.7, 1.5];

fn rel_residual(pairs: &[(Complex64, Complex64)]) -> f64 {
    let num: f64 = pairs.iter().map(|(l, r)| (l - r).norm_sqr()).sum();
    let den: f64 = pairs.iter().map(|(l, _)| l.norm_sqr()).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// Residuals of the five covariance identities for the shift/dilation
/// parameter `alpha` (snapped to the sample lattice where a lattice shift is
/// exact). `alpha` must be positive so it can double as the dilation factor.
pub fn verify_covariances(
    f: &Signal,
    psi: &Wavelet,
    m: &SaftMatrix,
    alpha: f64,
) -> Result<CovarianceReport> {
    m.validate()?;
    psi.validate()?;
    let sigma = f.bandwidth_999();

    // companion signal for linearity: modulated circular shift of f
    let n = f.len();
    let g = Signal::new(
        (0..n)
            .map(|i| f.samples[(i + n / 3) % n] * Complex64::from_polar(1.0, 0.4 * f.time(i)))
            .collect(),
        f.t0,
        f.dt,
    )?;
    let sigma_g = g.bandwidth_999();

    // (i) linearity with coefficients (alpha, -1)
    let mut lin = Vec::new();
    let combo = Signal::new(
        f.samples.iter().zip(&g.samples).map(|(a, b)| alpha * a - b).collect(),
        f.t0,
        f.dt,
    )?;
    let sigma_combo = combo.bandwidth_999();
    for &a in &CELL_A {
        for &b in &CELL_B {
            let lhs = coefficient(&combo, m, psi, sigma_combo, a, b)?;
            let rhs = alpha * coefficient(f, m, psi, sigma, a, b)?
                - coefficient(&g, m, psi, sigma_g, a, b)?;
            lin.push((lhs, rhs));
        }
    }

    // (ii) translation by a lattice-exact shift
    let s = (alpha / f.dt).round() * f.dt;
    let shifted = Signal::new(f.samples.clone(), f.t0 + s, f.dt)?;
    let modulated = Signal::new(
        (0..n)
            .map(|i| f.samples[i] * Complex64::from_polar(1.0, m.a * s * f.time(i) / m.b))
            .collect(),
        f.t0,
        f.dt,
    )?;
    let sigma_mod = modulated.bandwidth_999();
    let mut tra = Vec::new();
    for &a in &CELL_A {
        for &b in &CELL_B {
            let lhs = coefficient(&shifted, m, psi, sigma, a, b)?;
            let phase =
                Complex64::from_polar(1.0, (m.a * s * s + 2.0 * s * (m.p - a)) / (2.0 * m.b));
            let rhs = phase * coefficient(&modulated, m, psi, sigma_mod, a, b - s)?;
            tra.push((lhs, rhs));
        }
    }

    // (iii) parity: left side through the analysis path on the reflected
    // samples, right side by raw quadrature with the sign-flipped offsets
    let reflected = f.reflect();
    let m_refl = SaftMatrix { p: -m.p, q: -m.q, ..*m };
    let mut par = Vec::new();
    for &a in &CELL_A {
        for &b in &CELL_B {
            let lhs = coefficient(&reflected, m, psi, sigma, a, b)?;
            let ker = KernelAtOmega::new(&m_refl, -a);
            let (s0, s1) = psi.support();
            // psi(-(t+b)/a) is supported on t in [-b - a s1, -b - a s0]
            let lo = -b - a * s1;
            let hi = -b - a * s0;
            let breaks: Vec<f64> =
                psi.breakpoints().iter().map(|&x| -b - a * x).collect();
            let inv_sqrt_a = 1.0 / a.sqrt();
            let rhs = inner_product_window(f, lo, hi, &breaks, |t, side| {
                let flipped = match side {
                    Side::Left => Side::Right,
                    Side::Right => Side::Left,
                };
                psi.eval_side(-(t + b) / a, flipped) * ker.eval(t).conj() * inv_sqrt_a
            });
            par.push((lhs, rhs));
        }
    }

    // (iv) dilation by lambda = alpha: D_l f is exact on the scaled lattice
    let lambda = alpha;
    let mut dil = Vec::new();
    if lambda > 0.0 {
        let dilated = Signal::new(
            f.samples.iter().map(|z| z / lambda.sqrt()).collect(),
            f.t0 * lambda,
            f.dt * lambda,
        )?;
        let sigma_dil = dilated.bandwidth_999();
        let m_dil = SaftMatrix {
            a: m.a,
            b: m.b / (lambda * lambda),
            c: m.c * lambda * lambda,
            d: m.d,
            p: m.p / lambda,
            q: m.q * lambda,
        };
        for &a in &CELL_A {
            for &b in &CELL_B {
                let lhs = coefficient(&dilated, m, psi, sigma_dil, a, b)?;
                let rhs =
                    coefficient(f, &m_dil, psi, sigma, a / lambda, b / lambda)? / lambda;
                dil.push((lhs, rhs));
            }
        }
    }

    // (v) conjugation
    let conj_f = f.conj();
    let conj_psi = psi.conjugate();
    let m_conj = SaftMatrix { b: -m.b, c: -m.c, q: -m.q, ..*m };
    let mut con = Vec::new();
    for &a in &CELL_A {
        for &b in &CELL_B {
            let lhs = coefficient(&conj_f, m, psi, sigma, a, b)?;
            let rhs = coefficient(f, &m_conj, &conj_psi, sigma, a, b)?.conj();
            con.push((lhs, rhs));
        }
    }

    Ok(CovarianceReport {
        linearity: rel_residual(&lin),
        translation: rel_residual(&tra),
        parity: rel_residual(&par),
        dilation: rel_residual(&dil),
        conjugation: rel_residual(&con),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RealGrid;

    fn test_signal() -> Signal {
        let grid = RealGrid::new(-10.0, 1.0 / 128.0, 2561).unwrap();
        Signal::from_fn(&grid, |t| {
            Complex64::from_polar((-0.35 * t * t).exp(), 1.5 * t)
        })
        .unwrap()
    }

    #[test]
    fn all_residuals_small_on_chirped_matrix() {
        let m = SaftMatrix::new(1.0, 2.0, 1.0, 3.0, 1.0, 1.0).unwrap();
        let rep = verify_covariances(&test_signal(), &Wavelet::Morlet(3.0), &m, 2.0).unwrap();
        assert!(rep.linearity <= 1e-10, "linearity {:.3e}", rep.linearity);
        assert!(rep.translation <= 1e-4, "translation {:.3e}", rep.translation);
        assert!(rep.parity <= 1e-4, "parity {:.3e}", rep.parity);
        assert!(rep.dilation <= 1e-4, "dilation {:.3e}", rep.dilation);
        assert!(rep.conjugation <= 1e-4, "conjugation {:.3e}", rep.conjugation);
    }

    #[test]
    fn zero_shift_translation_is_exact() {
        // alpha = 0 shifts nothing: the translation identity degenerates to
        // equality of identical quadratures
        let m = SaftMatrix::fourier();
        let rep = verify_covariances(&test_signal(), &Wavelet::MexicanHat, &m, 1e-12).unwrap();
        assert!(rep.translation <= 1e-12, "translation {:.3e}", rep.translation);
    }

    #[test]
    fn haar_window_covariances() {
        // breakpoint bookkeeping under reflection and dilation
        let m = SaftMatrix::new(1.0, 2.0, 1.0, 3.0, 0.5, -0.5).unwrap();
        let rep = verify_covariances(&test_signal(), &Wavelet::Haar, &m, 2.0).unwrap();
        assert!(rep.parity <= 1e-4, "parity {:.3e}", rep.parity);
        assert!(rep.dilation <= 1e-4, "dilation {:.3e}", rep.dilation);
        assert!(rep.conjugation <= 1e-4, "conjugation {:.3e}", rep.conjugation);
    }
}

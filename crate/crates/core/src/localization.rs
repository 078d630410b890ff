//! Time and SAFT-domain window geometry of the analyzing family.
//!
//! The kernel factor has constant modulus, so the daughter's time-domain
//! center and radius reduce to the classical wavelet moments: center
//! b + a E_psi, radius a Delta_psi. On the SAFT side the daughter's spectrum
//! is a chirp times psi_hat evaluated at mu = a (xi - a) / B, so the window
//! profile in the band variable mu is independent of both the matrix and the
//! scale. E_H and Delta_H are the moments of that profile, measured here by
//! actually transforming the daughter (which is what makes the invariance
//! across a and M a check rather than a tautology), and Q = Delta_H / E_H.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SaftError};
use crate::matrix::SaftMatrix;
use crate::oracles::quadrature_oracle;
use crate::saft::KernelAtOmega;
use crate::sawt::Daughter;
use crate::wavelet::Wavelet;

#[derive(Debug, Clone, Serialize)]
pub struct LocalizationReport {
    pub e_psi: f64,
    pub delta_psi: f64,
    pub e_h: f64,
    pub delta_h: f64,
    pub q: f64,
    pub time_window: [f64; 2],
    pub freq_window: [f64; 2],
    pub spread: f64,
}

/// |O[psi^M_{a,b}](xi(mu))|^2 sampled over a mu window.
fn band_profile(
    m: &SaftMatrix,
    psi: &Wavelet,
    a: f64,
    b: f64,
    mu_lo: f64,
    mu_hi: f64,
    count: usize,
) -> Result<Vec<(f64, f64)>> {
    let d = Daughter::new(m, psi, a, b)?;
    let (lo, hi) = d.support();
    let breaks = d.breakpoints();
    let step = (mu_hi - mu_lo) / (count - 1) as f64;
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mu = mu_lo + step * i as f64;
            let xi = a + m.b * mu / a;
            let ker = KernelAtOmega::new(m, xi);
            let r = quadrature_oracle(
                |t, side| d.eval(t, side) * ker.eval(t),
                (lo, hi),
                &breaks,
                1e-10,
            )?;
            Ok((mu, r.value.norm_sqr()))
        })
        .collect()
}

fn moments(profile: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = profile.len();
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (i, &(mu, p)) in profile.iter().enumerate() {
        let h = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        m0 += h * p;
        m1 += h * mu * p;
        m2 += h * mu * mu * p;
    }
    (m0, m1, m2)
}

/// Window centers, radii, Q-factor and the time-frequency window of the
/// daughter at (a, b).
pub fn localization(psi: &Wavelet, m: &SaftMatrix, a: f64, b: f64) -> Result<LocalizationReport> {
    m.validate()?;
    psi.validate()?;
    if !(a > 0.0) {
        return Err(SaftError::NonpositiveScale { scale: a });
    }
    let e_psi = psi.time_center();
    let delta_psi = psi.time_radius();

    let (band_lo, band_hi) = psi.spectral_band();
    let count = 1201;
    let profile = band_profile(m, psi, a, b, band_lo, band_hi, count)?;
    let (m0, m1, m2) = moments(&profile);
    if m0 <= 0.0 {
        return Err(SaftError::DivergentMoment { tail: 1.0 });
    }
    let e_h = m1 / m0;
    let var = (m2 / m0 - e_h * e_h).max(0.0);
    let delta_h = var.sqrt();

    // Divergence probe: double the window at the same sampling density. If
    // the radius keeps growing (Haar: |psi_hat|^2 ~ 1/mu^2 tails) the second
    // moment does not converge and the report would be meaningless.
    let mid = 0.5 * (band_lo + band_hi);
    let half = band_hi - mid;
    let wide = band_profile(m, psi, a, b, mid - 2.0 * half, mid + 2.0 * half, 2 * count - 1)?;
    let (w0, w1, w2) = moments(&wide);
    let e_wide = w1 / w0;
    let delta_wide = (w2 / w0 - e_wide * e_wide).max(0.0).sqrt();
    let drift = (delta_wide - delta_h).abs() / delta_h.max(1e-300);
    if drift > 1e-3 {
        return Err(SaftError::DivergentMoment { tail: drift });
    }

    let q = if e_h.abs() < 1e-12 * delta_h { f64::INFINITY } else { delta_h / e_h };
    Ok(LocalizationReport {
        e_psi,
        delta_psi,
        e_h,
        delta_h,
        q,
        time_window: [b + a * e_psi - a * delta_psi, b + a * e_psi + a * delta_psi],
        freq_window: [a * e_h - a * delta_h, a * e_h + a * delta_h],
        spread: 4.0 * delta_psi * delta_h,
    })
}

/// Time window center b + a E_psi without the SAFT-domain work; useful for
/// wavelets (Haar) whose band radius diverges.
pub fn time_window(psi: &Wavelet, a: f64, b: f64) -> Result<(f64, [f64; 2])> {
    if !(a > 0.0) {
        return Err(SaftError::NonpositiveScale { scale: a });
    }
    let e = psi.time_center();
    let r = psi.time_radius();
    Ok((b + a * e, [b + a * e - a * r, b + a * e + a * r]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn haar_time_window_arithmetic() {
        // E_psi = 1/2, so the center of the (a=2, b=1) daughter sits at 2.
        let (center, window) = time_window(&Wavelet::Haar, 2.0, 1.0).unwrap();
        assert_relative_eq!(center, 2.0, epsilon = 1e-9);
        let r = 2.0 * (1.0f64 / 12.0).sqrt();
        assert_relative_eq!(window[0], 2.0 - r, epsilon = 1e-8);
        assert_relative_eq!(window[1], 2.0 + r, epsilon = 1e-8);
    }

    #[test]
    fn morlet_band_moments_match_gaussian_profile() {
        // |psi_hat|^2 for Morlet(6) is a unit-variance Gaussian at mu = 6:
        // E_H = 6, Delta_H = 1/sqrt(2).
        let m = SaftMatrix::fourier();
        let rep = localization(&Wavelet::Morlet(6.0), &m, 1.0, 0.0).unwrap();
        assert_relative_eq!(rep.e_h, 6.0, max_relative = 1e-6);
        assert_relative_eq!(rep.delta_h, 0.5f64.sqrt(), max_relative = 1e-6);
        assert_relative_eq!(rep.q, 0.5f64.sqrt() / 6.0, max_relative = 1e-6);
        assert_relative_eq!(rep.e_psi, 0.0, epsilon = 1e-9);
        assert_relative_eq!(rep.delta_psi, 0.5f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn haar_band_radius_diverges() {
        let m = SaftMatrix::fourier();
        let err = localization(&Wavelet::Haar, &m, 1.0, 0.0);
        assert!(matches!(err, Err(SaftError::DivergentMoment { .. })));
    }
}

//! Mother wavelets: the named analytic kinds plus arbitrary sampled windows.

use num_complex::Complex64;

use crate::error::{Result, SaftError};
use crate::signal::Signal;

/// Gaussian-envelope kinds are truncated where exp(-x^2/2) < 3e-18.
const GAUSS_RADIUS: f64 = 9.0;

/// Which one-sided limit to take at a jump discontinuity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A mother window. `Scaled` carries an amplitude factor so that normalized
/// copies of the analytic kinds keep their closed forms.
#[derive(Debug, Clone, PartialEq)]
pub enum Wavelet {
    /// 1 on [0, 1/2), -1 on [1/2, 1], 0 elsewhere.
    Haar,
    /// exp(i*alpha*x - x^2/2).
    Morlet(f64),
    /// (1 - x^2) * exp(-x^2/2).
    MexicanHat,
    /// Linear interpolation between samples, zero outside the grid.
    Sampled(Signal),
    Scaled { inner: Box<Wavelet>, amplitude: f64 },
}

impl Wavelet {
    pub fn validate(&self) -> Result<()> {
        match self {
            Wavelet::Morlet(alpha) if !alpha.is_finite() => Err(SaftError::InvalidSignal {
                reason: format!("Morlet center frequency must be finite, got {alpha}"),
            }),
            Wavelet::Scaled { inner, amplitude } => {
                if !amplitude.is_finite() {
                    return Err(SaftError::InvalidSignal {
                        reason: "non-finite wavelet amplitude".into(),
                    });
                }
                inner.validate()
            }
            _ => Ok(()),
        }
    }

    /// Point evaluation; jumps are resolved toward `side`.
    pub fn eval_side(&self, x: f64, side: Side) -> Complex64 {
        match self {
            Wavelet::Haar => {
                // Right-continuous on [0,1); the right edge value belongs to -1.
                let v = match side {
                    Side::Right => {
                        if (0.0..0.5).contains(&x) {
                            1.0
                        } else if (0.5..1.0).contains(&x) {
                            -1.0
                        } else {
                            0.0
                        }
                    }
                    Side::Left => {
                        if x > 0.0 && x <= 0.5 {
                            1.0
                        } else if x > 0.5 && x <= 1.0 {
                            -1.0
                        } else {
                            0.0
                        }
                    }
                };
                Complex64::new(v, 0.0)
            }
            Wavelet::Morlet(alpha) => {
                if x.abs() > GAUSS_RADIUS {
                    return Complex64::new(0.0, 0.0);
                }
                Complex64::from_polar((-0.5 * x * x).exp(), alpha * x)
            }
            Wavelet::MexicanHat => {
                if x.abs() > GAUSS_RADIUS {
                    return Complex64::new(0.0, 0.0);
                }
                Complex64::new((1.0 - x * x) * (-0.5 * x * x).exp(), 0.0)
            }
            Wavelet::Sampled(s) => s.interp(x),
            Wavelet::Scaled { inner, amplitude } => inner.eval_side(x, side) * *amplitude,
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.eval_side(x, Side::Right)
    }

    /// Support of the mother in its own variable.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Wavelet::Haar => (0.0, 1.0),
            Wavelet::Morlet(_) | Wavelet::MexicanHat => (-GAUSS_RADIUS, GAUSS_RADIUS),
            Wavelet::Sampled(s) => (s.t0, s.t_end()),
            Wavelet::Scaled { inner, .. } => inner.support(),
        }
    }

    /// Jump locations in the mother variable (quadrature cells are split here).
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Wavelet::Haar => vec![0.0, 0.5, 1.0],
            Wavelet::Scaled { inner, .. } => inner.breakpoints(),
            _ => Vec::new(),
        }
    }

    /// L2 norm; closed form for the analytic kinds.
    pub fn l2_norm(&self) -> f64 {
        use std::f64::consts::PI;
        match self {
            Wavelet::Haar => 1.0,
            Wavelet::Morlet(_) => PI.powf(0.25),
            Wavelet::MexicanHat => (0.75 * PI.sqrt()).sqrt(),
            Wavelet::Sampled(s) => s.l2_norm(),
            Wavelet::Scaled { inner, amplitude } => inner.l2_norm() * amplitude.abs(),
        }
    }

    /// Rescales to unit L2 norm.
    pub fn normalized(&self) -> Wavelet {
        let n = self.l2_norm();
        match self {
            Wavelet::Scaled { inner, amplitude } => Wavelet::Scaled {
                inner: inner.clone(),
                amplitude: amplitude / n,
            },
            other => Wavelet::Scaled { inner: Box::new(other.clone()), amplitude: 1.0 / n },
        }
    }

    pub fn is_normalized(&self) -> bool {
        (self.l2_norm() - 1.0).abs() <= 1e-9
    }

    pub fn conjugate(&self) -> Wavelet {
        match self {
            Wavelet::Haar => Wavelet::Haar,
            Wavelet::Morlet(alpha) => Wavelet::Morlet(-alpha),
            Wavelet::MexicanHat => Wavelet::MexicanHat,
            Wavelet::Sampled(s) => Wavelet::Sampled(s.conj()),
            Wavelet::Scaled { inner, amplitude } => Wavelet::Scaled {
                inner: Box::new(inner.conjugate()),
                amplitude: *amplitude,
            },
        }
    }

    /// Classical Fourier transform psi_hat(v) = integral psi(x) e^{-ixv} dx.
    /// Closed form where available, quadrature otherwise.
    pub fn fourier(&self, nu: f64) -> Complex64 {
        use std::f64::consts::PI;
        match self {
            Wavelet::Haar => {
                if nu.abs() < 1e-8 {
                    // (1 - e^{-iv/2})^2/(iv) -> 0 as v -> 0; series keeps accuracy.
                    let z = Complex64::new(0.0, -nu / 2.0);
                    let series = z * (1.0 + z * (0.5 + z / 6.0));
                    let one_minus = -series; // 1 - e^z to O(z^4)
                    return if nu == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        one_minus * one_minus / Complex64::new(0.0, nu)
                    };
                }
                let e = Complex64::from_polar(1.0, -nu / 2.0);
                let one_minus = Complex64::new(1.0, 0.0) - e;
                one_minus * one_minus / Complex64::new(0.0, nu)
            }
            Wavelet::Morlet(alpha) => {
                let d = nu - alpha;
                Complex64::new((2.0 * PI).sqrt() * (-0.5 * d * d).exp(), 0.0)
            }
            Wavelet::MexicanHat => {
                Complex64::new((2.0 * PI).sqrt() * nu * nu * (-0.5 * nu * nu).exp(), 0.0)
            }
            Wavelet::Sampled(s) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, z) in s.samples.iter().enumerate() {
                    let w = if i == 0 || i == s.len() - 1 { 0.5 } else { 1.0 };
                    acc += z * Complex64::from_polar(w, -s.time(i) * nu);
                }
                acc * s.dt
            }
            Wavelet::Scaled { inner, amplitude } => inner.fourier(nu) * *amplitude,
        }
    }

    /// Band [lo, hi] outside which |psi_hat| is negligible. Haar decays only
    /// like 1/v, so its band is a wide probe window rather than a true cutoff.
    pub fn spectral_band(&self) -> (f64, f64) {
        match self {
            Wavelet::Haar => (-256.0, 256.0),
            Wavelet::Morlet(alpha) => (alpha - 8.0, alpha + 8.0),
            Wavelet::MexicanHat => (-8.5, 8.5),
            Wavelet::Sampled(s) => {
                let bw = s.bandwidth_999().max(1.0) * 1.5;
                (-bw, bw)
            }
            Wavelet::Scaled { inner, .. } => inner.spectral_band(),
        }
    }

    /// Oscillation-rate contribution for the chirp sampling guard. Haar is
    /// piecewise constant, so it contributes none (jumps are split instead).
    pub fn spectral_extent(&self) -> f64 {
        match self {
            Wavelet::Haar => 0.0,
            Wavelet::Morlet(alpha) => alpha.abs() + 6.0,
            Wavelet::MexicanHat => 6.0,
            Wavelet::Sampled(s) => s.bandwidth_999(),
            Wavelet::Scaled { inner, .. } => inner.spectral_extent(),
        }
    }

    /// Time-domain center E_psi of |psi|^2, by split trapezoid quadrature.
    pub fn time_center(&self) -> f64 {
        let (m0, m1, _) = self.time_moments();
        m1 / m0
    }

    /// Time-domain radius Delta_psi of |psi|^2.
    pub fn time_radius(&self) -> f64 {
        let (m0, m1, m2) = self.time_moments();
        let c = m1 / m0;
        (m2 / m0 - c * c).max(0.0).sqrt()
    }

    fn time_moments(&self) -> (f64, f64, f64) {
        let (lo, hi) = self.support();
        let breaks = self.breakpoints();
        let n = 1 << 15;
        let mut edges: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
        edges.push(lo);
        edges.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
        edges.push(hi);
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let h = (b - a) / n as f64;
            for i in 0..=n {
                let x = a + h * i as f64;
                let side = if i == 0 { Side::Right } else { Side::Left };
                let p = self.eval_side(x, side).norm_sqr();
                let wt = if i == 0 || i == n { 0.5 } else { 1.0 } * h;
                m0 += wt * p;
                m1 += wt * x * p;
                m2 += wt * x * x * p;
            }
        }
        (m0, m1, m2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn haar_values_and_sides() {
        let h = Wavelet::Haar;
        assert_eq!(h.eval(0.25).re, 1.0);
        assert_eq!(h.eval(0.75).re, -1.0);
        assert_eq!(h.eval(1.5).re, 0.0);
        assert_eq!(h.eval_side(0.5, Side::Left).re, 1.0);
        assert_eq!(h.eval_side(0.5, Side::Right).re, -1.0);
        assert_eq!(h.eval_side(1.0, Side::Left).re, -1.0);
        assert_eq!(h.eval_side(1.0, Side::Right).re, 0.0);
    }

    #[test]
    fn closed_form_norms() {
        assert_relative_eq!(Wavelet::Haar.l2_norm(), 1.0);
        assert_relative_eq!(Wavelet::Morlet(5.0).l2_norm(), PI.powf(0.25));
        assert_relative_eq!(Wavelet::MexicanHat.l2_norm(), (0.75 * PI.sqrt()).sqrt());
    }

    #[test]
    fn normalization_wraps_and_checks() {
        let w = Wavelet::Morlet(6.0).normalized();
        assert!(w.is_normalized());
        assert!(!Wavelet::Morlet(6.0).is_normalized());
        // normalizing twice stays normalized and does not nest boxes
        let w2 = w.normalized();
        assert!(w2.is_normalized());
        assert!(matches!(w2, Wavelet::Scaled { inner, .. } if !matches!(*inner, Wavelet::Scaled { .. })));
    }

    #[test]
    fn time_moments_match_direct_integrals() {
        // Haar: E = 1/2, Delta^2 = 1/12 from the direct integral of (t-1/2)^2 on [0,1].
        assert_relative_eq!(Wavelet::Haar.time_center(), 0.5, epsilon = 1e-10);
        assert_relative_eq!(Wavelet::Haar.time_radius(), (1.0f64 / 12.0).sqrt(), epsilon = 1e-9);
        // Morlet: |psi|^2 = e^{-x^2}: center 0, radius 1/sqrt(2).
        assert_relative_eq!(Wavelet::Morlet(6.0).time_center(), 0.0, epsilon = 1e-10);
        assert_relative_eq!(Wavelet::Morlet(6.0).time_radius(), 0.5f64.sqrt(), epsilon = 1e-9);
        // Mexican hat: radius sqrt(7/6).
        assert_relative_eq!(
            Wavelet::MexicanHat.time_radius(),
            (7.0f64 / 6.0).sqrt(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn haar_fourier_matches_quadrature() {
        for nu in [0.3, 1.7, -4.2, 12.0, 1e-9] {
            let closed = Wavelet::Haar.fourier(nu);
            // direct split trapezoid on [0, 1/2] and [1/2, 1]
            let n = 20000;
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, b, s) in [(0.0, 0.5, 1.0), (0.5, 1.0, -1.0)] {
                let h = (b - a) / n as f64;
                for i in 0..=n {
                    let x: f64 = a + h * i as f64;
                    let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                    acc += Complex64::from_polar(s * w * h, -x * nu);
                }
            }
            assert!((closed - acc).norm() < 1e-8, "nu={nu}: {closed} vs {acc}");
        }
    }

    #[test]
    fn conjugate_flips_morlet() {
        let w = Wavelet::Morlet(4.0);
        let c = w.conjugate();
        let x = 0.37;
        assert_relative_eq!(c.eval(x).re, w.eval(x).re);
        assert_relative_eq!(c.eval(x).im, -w.eval(x).im);
    }

    #[test]
    fn sampled_interpolates_and_vanishes_outside() {
        let grid = crate::grid::RealGrid::new(-1.0, 0.5, 5).unwrap();
        let s = Signal::from_fn(&grid, |t| Complex64::new(t, 0.0)).unwrap();
        let w = Wavelet::Sampled(s);
        assert_relative_eq!(w.eval(0.25).re, 0.25);
        assert_eq!(w.eval(3.0), Complex64::new(0.0, 0.0));
    }
}

//! Uniformly sampled complex signals with explicit grid metadata.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Result, SaftError};
use crate::grid::RealGrid;

/// A complex-valued function of time, sampled on `t0 + n*dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub samples: Vec<Complex64>,
    pub t0: f64,
    pub dt: f64,
}

impl Signal {
    pub fn new(samples: Vec<Complex64>, t0: f64, dt: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(SaftError::InvalidSignal { reason: "no samples".into() });
        }
        if !(dt > 0.0) || !dt.is_finite() || !t0.is_finite() {
            return Err(SaftError::InvalidSignal {
                reason: format!("need finite t0 and dt > 0 (got t0={t0}, dt={dt})"),
            });
        }
        if let Some(i) = samples.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(SaftError::InvalidSignal {
                reason: format!("non-finite sample at index {i}"),
            });
        }
        Ok(Signal { samples, t0, dt })
    }

    /// Samples a closure on a grid.
    pub fn from_fn(grid: &RealGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Signal::new(grid.iter().map(f).collect(), grid.start, grid.step)
    }

    pub fn zeros(grid: &RealGrid) -> Self {
        Signal {
            samples: vec![Complex64::new(0.0, 0.0); grid.count],
            t0: grid.start,
            dt: grid.step,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + self.dt * i as f64
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.len() - 1)
    }

    pub fn grid(&self) -> RealGrid {
        RealGrid { start: self.t0, step: self.dt, count: self.len() }
    }

    /// Linear interpolation between samples, zero outside the grid.
    pub fn interp(&self, t: f64) -> Complex64 {
        let x = (t - self.t0) / self.dt;
        if x < 0.0 || x > (self.len() - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let i = (x.floor() as usize).min(self.len() - 2);
        let frac = x - i as f64;
        self.samples[i] * (1.0 - frac) + self.samples[i + 1] * frac
    }

    /// Trapezoid L2 norm squared: integral of |f|^2 dt.
    pub fn energy(&self) -> f64 {
        if self.len() == 1 {
            return self.samples[0].norm_sqr() * self.dt;
        }
        let mut acc = 0.0;
        for (i, z) in self.samples.iter().enumerate() {
            let w = if i == 0 || i == self.len() - 1 { 0.5 } else { 1.0 };
            acc += w * z.norm_sqr();
        }
        acc * self.dt
    }

    pub fn l2_norm(&self) -> f64 {
        self.energy().sqrt()
    }

    /// Relative L2 distance ||self - other|| / ||other|| on a shared grid.
    pub fn rel_l2_error(&self, reference: &Signal) -> f64 {
        assert_eq!(self.len(), reference.len(), "grids must match");
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in self.samples.iter().zip(&reference.samples) {
            num += (a - b).norm_sqr();
            den += b.norm_sqr();
        }
        if den == 0.0 {
            return num.sqrt();
        }
        (num / den).sqrt()
    }

    /// Largest angular frequency holding 99.9% of the spectral energy,
    /// estimated from an FFT of the samples. Used by the chirp sampling
    /// guard; returns 0 for the zero signal.
    pub fn bandwidth_999(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let mut buf = self.samples.clone();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let total: f64 = buf.iter().map(|z| z.norm_sqr()).sum();
        if total <= 0.0 {
            return 0.0;
        }
        // Bin j holds angular frequency 2*pi*j~/(n*dt) with j~ the signed index.
        let mut by_freq: Vec<(f64, f64)> = buf
            .iter()
            .enumerate()
            .map(|(j, z)| {
                let signed = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                let omega = 2.0 * std::f64::consts::PI * signed / (n as f64 * self.dt);
                (omega.abs(), z.norm_sqr())
            })
            .collect();
        by_freq.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut acc = 0.0;
        for (omega, p) in by_freq {
            acc += p;
            if acc >= 0.999 * total {
                return omega;
            }
        }
        2.0 * std::f64::consts::PI / (2.0 * self.dt)
    }

    pub fn conj(&self) -> Signal {
        Signal {
            samples: self.samples.iter().map(|z| z.conj()).collect(),
            t0: self.t0,
            dt: self.dt,
        }
    }

    /// Time reversal t -> -t, exact on the sample lattice.
    pub fn reflect(&self) -> Signal {
        Signal {
            samples: self.samples.iter().rev().copied().collect(),
            t0: -self.t_end(),
            dt: self.dt,
        }
    }
}

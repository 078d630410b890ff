//! Special affine Wigner distribution: the SAFT (over the lag variable) of
//! the instantaneous autocorrelation f(t + tau/2) conj(f(t - tau/2)).

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, SaftError};
use crate::grid::RealGrid;
use crate::matrix::SaftMatrix;
use crate::saft::{guard_dt, KernelAtOmega};
use crate::signal::Signal;

/// Values over the (t, a) plane; rows follow the time axis.
#[derive(Debug, Clone)]
pub struct WignerMatrix {
    values: Vec<Complex64>,
    pub t_grid: RealGrid,
    pub a_grid: RealGrid,
    pub matrix: SaftMatrix,
}

impl WignerMatrix {
    pub fn rows(&self) -> usize {
        self.t_grid.count
    }

    pub fn cols(&self) -> usize {
        self.a_grid.count
    }

    #[inline]
    pub fn get(&self, i_t: usize, j_a: usize) -> Complex64 {
        self.values[i_t * self.cols() + j_a]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// Evaluates the distribution over a (t, a) grid. The lag integral runs over
/// the intersection of the two shifted supports, extended by one sample on
/// each side, with half-sample shifts taken by linear interpolation.
pub fn wigner(
    f: &Signal,
    m: &SaftMatrix,
    t_grid: &RealGrid,
    a_grid: &RealGrid,
) -> Result<WignerMatrix> {
    m.validate()?;
    let sigma_f = f.bandwidth_999();
    let span = f.t_end() - f.t0;
    let tau_max = span + 2.0 * f.dt;
    let max_p_minus_a = (m.p - a_grid.start).abs().max((m.p - a_grid.end()).abs());
    // the lag lattice steps by 2 dt
    let required = guard_dt(m, tau_max, max_p_minus_a, sigma_f);
    if 2.0 * f.dt > required {
        return Err(SaftError::NyquistViolation {
            required_dt: required,
            actual_dt: 2.0 * f.dt,
            cell: Some("lag integral".into()),
        });
    }

    let cols = a_grid.count;
    let values: Vec<Complex64> = (0..t_grid.count)
        .into_par_iter()
        .flat_map_iter(|it| {
            let t = t_grid.nth(it);
            // tau range where both f(t + tau/2) and f(t - tau/2) are inside
            // the grid, padded by one sample. The lag lattice uses even
            // multiples of dt around tau = 0, so t +- tau/2 lands on samples
            // whenever t itself is on the lattice.
            let lo = 2.0 * (f.t0 - t).max(t - f.t_end()) - f.dt;
            let hi = 2.0 * (f.t_end() - t).min(t - f.t0) + f.dt;
            let (taus, r): (Vec<f64>, Vec<Complex64>) = if hi <= lo {
                (Vec::new(), Vec::new())
            } else {
                let step = 2.0 * f.dt;
                let k_lo = (lo / step).floor() as i64;
                let k_hi = (hi / step).ceil() as i64;
                let taus: Vec<f64> = (k_lo..=k_hi).map(|k| k as f64 * step).collect();
                let r = taus
                    .iter()
                    .map(|&tau| f.interp(t + 0.5 * tau) * f.interp(t - 0.5 * tau).conj())
                    .collect();
                (taus, r)
            };
            let row: Vec<Complex64> = (0..cols)
                .map(|ja| {
                    if taus.len() < 2 {
                        return Complex64::new(0.0, 0.0);
                    }
                    let ker = KernelAtOmega::new(m, a_grid.nth(ja));
                    let n = taus.len();
                    let step = taus[1] - taus[0];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (k, (&tau, rv)) in taus.iter().zip(&r).enumerate() {
                        let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
                        acc += rv * ker.eval(tau) * w;
                    }
                    acc * step
                })
                .collect();
            row.into_iter()
        })
        .collect();
    Ok(WignerMatrix { values, t_grid: *t_grid, a_grid: *a_grid, matrix: *m })
}

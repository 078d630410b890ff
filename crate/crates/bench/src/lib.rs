//! Shared signal builders for the benchmarks.

use num_complex::Complex64;
use saftwave_core::{RealGrid, Signal};

/// Modulated Gaussian test signal on [-half, half].
pub fn test_signal(n: usize, half: f64, nu: f64) -> Signal {
    let grid = RealGrid::new(-half, 2.0 * half / (n as f64 - 1.0), n).unwrap();
    Signal::from_fn(&grid, |t| Complex64::from_polar((-0.5 * t * t).exp(), nu * t)).unwrap()
}

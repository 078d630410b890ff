//! Chirp-z evaluation of S_k = sum_n x_n e^{-i n k phi} for k = 0..K-1 via
//! Bluestein's decomposition: n*k = (n^2 + k^2 - (k-n)^2)/2 turns the sum into
//! a convolution against a fixed quadratic chirp, realized with zero-padded
//! FFTs. Exact (to rounding) for any real phase step phi, so the fast SAFT
//! path reproduces the trapezoid quadrature values bit-for-bit in exact
//! arithmetic.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Largest internal FFT the chirp path will allocate.
pub const MAX_CHIRP_FFT_LEN: usize = 1 << 24;

/// Internal FFT length Bluestein needs for an (n, k) problem.
pub fn bluestein_len(n: usize, k: usize) -> usize {
    (n + k - 1).next_power_of_two()
}

/// Computes S_k = sum_{n} x[n] * exp(-i * n * k * phi), k = 0..k_count-1.
pub fn chirp_transform(x: &[Complex64], k_count: usize, phi: f64) -> Vec<Complex64> {
    let n = x.len();
    if n == 0 || k_count == 0 {
        return vec![Complex64::new(0.0, 0.0); k_count];
    }
    let m = bluestein_len(n, k_count);
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    let ifft = planner.plan_fft_inverse(m);

    let half = 0.5 * phi;
    let chirp = |idx: usize| -> Complex64 {
        let i = idx as f64;
        Complex64::from_polar(1.0, half * i * i)
    };

    // a_n = x_n * e^{-i n^2 phi/2}
    let mut a = vec![Complex64::new(0.0, 0.0); m];
    for (i, xi) in x.iter().enumerate() {
        a[i] = xi * chirp(i).conj();
    }
    // b_m = e^{+i m^2 phi/2}, wrapped so that index (k - n) mod m lines up
    let mut b = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..k_count {
        b[k] = chirp(k);
    }
    for i in 1..n {
        b[m - i] = chirp(i);
    }

    fft.process(&mut a);
    fft.process(&mut b);
    for (ai, bi) in a.iter_mut().zip(&b) {
        *ai *= bi;
    }
    ifft.process(&mut a);

    let scale = 1.0 / m as f64;
    (0..k_count).map(|k| a[k] * chirp(k).conj() * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(x: &[Complex64], k_count: usize, phi: f64) -> Vec<Complex64> {
        (0..k_count)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(n, xn)| xn * Complex64::from_polar(1.0, -(n as f64) * (k as f64) * phi))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_direct_sum() {
        let x: Vec<Complex64> = (0..37)
            .map(|i| Complex64::new((i as f64 * 0.31).sin(), (i as f64 * 0.17).cos()))
            .collect();
        for phi in [0.013, -0.4, 2.9, 7.1] {
            let fast = chirp_transform(&x, 23, phi);
            let slow = direct(&x, 23, phi);
            for (f, s) in fast.iter().zip(&slow) {
                assert!((f - s).norm() < 1e-10, "phi={phi}: {f} vs {s}");
            }
        }
    }

    #[test]
    fn single_sample_and_single_bin() {
        let x = vec![Complex64::new(2.0, -1.0)];
        let out = chirp_transform(&x, 1, 0.7);
        assert!((out[0] - x[0]).norm() < 1e-14);
    }
}

//! Special affine Fourier and wavelet transforms.
//!
//! A six-parameter unimodular matrix (A, B, C, D, p, q) with AD - BC = 1 and
//! B != 0 drives a chirp-modulated integral kernel that generalizes the
//! Fourier, fractional Fourier, Fresnel and linear canonical transforms. This
//! crate implements the transform itself (`saft`), the wavelet-style
//! time-frequency transform built from it (`sawt`), its discrete frame form
//! (`dsawt`), the matching Wigner distribution (`wigner`), wave-packet and
//! windowed variants (`wavepacket`), Poisson-summation checks (`poisson`),
//! and the independent quadrature oracles that pin every numeric fixture
//! (`oracles`).

pub mod covariance;
pub mod czt;
pub mod dsawt;
pub mod error;
pub mod fixtures;
pub mod grid;
pub mod io;
pub mod localization;
pub mod matrix;
pub mod oracles;
pub mod poisson;
pub mod quadrature;
pub mod saft;
pub mod sawt;
pub mod scalogram;
pub mod signal;
pub mod wavelet;
pub mod wavepacket;
pub mod wigner;

pub use error::{Result, SaftError};
pub use grid::{RealGrid, ScaleGrid};
pub use matrix::{make_special_matrix, SaftMatrix, SpecialMatrix};
pub use scalogram::Scalogram;
pub use signal::Signal;
pub use wavelet::{Side, Wavelet};

pub use num_complex::Complex64;

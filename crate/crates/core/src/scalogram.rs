//! Coefficient matrices over a (scale, translation) grid.

use num_complex::Complex64;

use crate::grid::{RealGrid, ScaleGrid};
use crate::matrix::SaftMatrix;

/// Transform coefficients W(a, b): rows follow the scale axis, columns the
/// translation axis. Stored flat, row-major.
#[derive(Debug, Clone)]
pub struct Scalogram {
    values: Vec<Complex64>,
    pub a_grid: ScaleGrid,
    pub b_grid: RealGrid,
    pub matrix: SaftMatrix,
}

impl Scalogram {
    pub fn new(values: Vec<Complex64>, a_grid: ScaleGrid, b_grid: RealGrid, matrix: SaftMatrix) -> Self {
        assert_eq!(values.len(), a_grid.count() * b_grid.count, "dimension mismatch");
        Scalogram { values, a_grid, b_grid, matrix }
    }

    pub fn zeros(a_grid: ScaleGrid, b_grid: RealGrid, matrix: SaftMatrix) -> Self {
        let n = a_grid.count() * b_grid.count;
        Scalogram { values: vec![Complex64::new(0.0, 0.0); n], a_grid, b_grid, matrix }
    }

    pub fn rows(&self) -> usize {
        self.a_grid.count()
    }

    pub fn cols(&self) -> usize {
        self.b_grid.count
    }

    #[inline]
    pub fn get(&self, i_a: usize, j_b: usize) -> Complex64 {
        self.values[i_a * self.cols() + j_b]
    }

    #[inline]
    pub fn set(&mut self, i_a: usize, j_b: usize, v: Complex64) {
        let c = self.cols();
        self.values[i_a * c + j_b] = v;
    }

    pub fn row(&self, i_a: usize) -> &[Complex64] {
        let c = self.cols();
        &self.values[i_a * c..(i_a + 1) * c]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Index of the entry with the largest modulus.
    pub fn argmax_abs(&self) -> (usize, usize) {
        let mut best = (0usize, 0usize);
        let mut best_v = -1.0;
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let v = self.get(i, j).norm();
                if v > best_v {
                    best_v = v;
                    best = (i, j);
                }
            }
        }
        best
    }

    /// Frobenius-style L2 magnitude (no measure weights).
    pub fn frobenius(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

//! Uniform and geometric sampling grids for the time, frequency, scale and
//! translation axes.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SaftError};

/// Uniformly spaced grid `start, start + step, ..., start + (count-1)*step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealGrid {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl RealGrid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() || !start.is_finite() {
            return Err(SaftError::InvalidGrid {
                reason: format!("step must be finite and > 0 (got start={start}, step={step})"),
            });
        }
        if count == 0 {
            return Err(SaftError::InvalidGrid {
                reason: "count must be >= 1".into(),
            });
        }
        Ok(RealGrid { start, step, count })
    }

    pub fn nth(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn end(&self) -> f64 {
        self.nth(self.count - 1)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.nth(i)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.nth(i))
    }

    /// Largest |x| over the grid.
    pub fn max_abs(&self) -> f64 {
        self.start.abs().max(self.end().abs())
    }
}

/// Scale axis: either uniform or geometric (`start * ratio^i`). Scalograms
/// conventionally use geometric scale ladders, so the scale slot accepts both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScaleGrid {
    Uniform(RealGrid),
    Geometric { start: f64, ratio: f64, count: usize },
}

impl ScaleGrid {
    pub fn geometric(start: f64, ratio: f64, count: usize) -> Result<Self> {
        if !(start > 0.0) || !(ratio > 0.0) || ratio == 1.0 && count > 1 {
            return Err(SaftError::InvalidGrid {
                reason: format!("geometric grid needs start > 0 and ratio > 0, != 1 (got start={start}, ratio={ratio})"),
            });
        }
        if count == 0 {
            return Err(SaftError::InvalidGrid {
                reason: "count must be >= 1".into(),
            });
        }
        Ok(ScaleGrid::Geometric { start, ratio, count })
    }

    /// Geometric ladder spanning [lo, hi] inclusive with `count` rungs.
    pub fn geometric_span(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0) || !(hi > lo) {
            return Err(SaftError::InvalidGrid {
                reason: format!("geometric span needs 0 < lo < hi (got {lo}, {hi})"),
            });
        }
        let ratio = if count > 1 {
            (hi / lo).powf(1.0 / (count as f64 - 1.0))
        } else {
            2.0
        };
        ScaleGrid::geometric(lo, ratio, count)
    }

    pub fn count(&self) -> usize {
        match self {
            ScaleGrid::Uniform(g) => g.count,
            ScaleGrid::Geometric { count, .. } => *count,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            ScaleGrid::Uniform(g) => g.values(),
            ScaleGrid::Geometric { start, ratio, count } => {
                (0..*count).map(|i| start * ratio.powi(i as i32)).collect()
            }
        }
    }
}

/// Trapezoid weights for a (possibly non-uniform) strictly increasing axis.
pub fn trapezoid_weights(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    if n == 1 {
        return vec![1.0];
    }
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = xs[i + 1] - xs[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn uniform_grid_values() {
        let g = RealGrid::new(-1.0, 0.5, 5).unwrap();
        assert_eq!(g.values(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(g.end(), 1.0);
        assert_eq!(g.max_abs(), 1.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(RealGrid::new(0.0, 0.0, 3).is_err());
        assert!(RealGrid::new(0.0, -1.0, 3).is_err());
        assert!(RealGrid::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn geometric_span_hits_endpoints() {
        let g = ScaleGrid::geometric_span(0.25, 4.0, 64).unwrap();
        let v = g.values();
        assert_eq!(v.len(), 64);
        assert_relative_eq!(v[0], 0.25);
        assert_relative_eq!(v[63], 4.0, max_relative = 1e-12);
    }

    #[test]
    fn trapezoid_weights_sum_to_span() {
        let xs = vec![0.0, 1.0, 3.0, 3.5];
        let w = trapezoid_weights(&xs);
        assert_relative_eq!(w.iter().sum::<f64>(), 3.5);
    }
}

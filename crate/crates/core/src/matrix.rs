//! The six-parameter unimodular matrix that drives every kernel, plus the
//! named special-case constructors.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SaftError};

const UNIMODULAR_TOL: f64 = 1e-12;

/// Parameter set (A, B, C, D, p, q) with AD - BC = 1 and B != 0.
///
/// (p, q) are the inhomogeneous offsets; B carries the time-frequency
/// coupling and must be nonzero for the transform to be an integral
/// transform at all.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaftMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub p: f64,
    pub q: f64,
}

impl SaftMatrix {
    /// Builds and validates a matrix from its six entries.
    pub fn new(a: f64, b: f64, c: f64, d: f64, p: f64, q: f64) -> Result<Self> {
        let m = SaftMatrix { a, b, c, d, p, q };
        m.validate()?;
        Ok(m)
    }

    /// Checks unimodularity (|AD - BC - 1| <= 1e-12) and B != 0.
    pub fn validate(&self) -> Result<()> {
        for v in [self.a, self.b, self.c, self.d, self.p, self.q] {
            if !v.is_finite() {
                return Err(SaftError::InvalidGrid {
                    reason: format!("matrix entries must be finite, got {v}"),
                });
            }
        }
        if self.b == 0.0 {
            return Err(SaftError::DegenerateB);
        }
        let defect = (self.det() - 1.0).abs();
        if defect > UNIMODULAR_TOL {
            return Err(SaftError::NotUnimodular { defect });
        }
        Ok(())
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// The classical Fourier case (0, 1, -1, 0, 0, 0).
    pub fn fourier() -> Self {
        SaftMatrix { a: 0.0, b: 1.0, c: -1.0, d: 0.0, p: 0.0, q: 0.0 }
    }

    /// Convenience: Dp - Bq, the offset combination every kernel phase uses.
    pub fn offset_term(&self) -> f64 {
        self.d * self.p - self.b * self.q
    }
}

/// Named matrix families. The two complex-entried families are listed so they
/// can be rejected with a dedicated error instead of silently misbehaving.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpecialMatrix {
    /// (A, B, C, D, 0, 0)
    LinearCanonical { a: f64, b: f64, c: f64, d: f64 },
    /// (cos t, sin t, -sin t, cos t, 0, 0)
    Fractional { theta: f64 },
    /// (cos t, sin t, -sin t, cos t, p, q)
    OffsetFractional { theta: f64, p: f64, q: f64 },
    /// (1, B, 0, 1, p, q)
    Fresnel { b: f64, p: f64, q: f64 },
    /// (0, 1, -1, 0, 0, 0)
    Fourier,
    /// (1, iB, 0, 1, p, q) — rejected: complex entries.
    GaussWeierstrass { b: f64, p: f64, q: f64 },
    /// (1, -iB, 0, 1, p, q) — rejected: complex entries.
    BilateralLaplace { b: f64, p: f64, q: f64 },
}

/// Builds the matrix named by `kind`. Rotation entries within f64 noise of
/// zero are snapped to exactly zero so that e.g. the quarter-turn fractional
/// matrix equals the Fourier matrix component-wise.
pub fn make_special_matrix(kind: SpecialMatrix) -> Result<SaftMatrix> {
    fn snap(x: f64) -> f64 {
        if x.abs() < 4e-16 {
            0.0
        } else {
            x
        }
    }
    match kind {
        SpecialMatrix::LinearCanonical { a, b, c, d } => SaftMatrix::new(a, b, c, d, 0.0, 0.0),
        SpecialMatrix::Fractional { theta } => {
            let (s, c) = (snap(theta.sin()), snap(theta.cos()));
            if s == 0.0 {
                return Err(SaftError::DegenerateB);
            }
            SaftMatrix::new(c, s, -s, c, 0.0, 0.0)
        }
        SpecialMatrix::OffsetFractional { theta, p, q } => {
            let (s, c) = (snap(theta.sin()), snap(theta.cos()));
            if s == 0.0 {
                return Err(SaftError::DegenerateB);
            }
            SaftMatrix::new(c, s, -s, c, p, q)
        }
        SpecialMatrix::Fresnel { b, p, q } => {
            if b == 0.0 {
                return Err(SaftError::DegenerateB);
            }
            SaftMatrix::new(1.0, b, 0.0, 1.0, p, q)
        }
        SpecialMatrix::Fourier => Ok(SaftMatrix::fourier()),
        SpecialMatrix::GaussWeierstrass { .. } => Err(SaftError::ComplexEntriesUnsupported {
            kind: "the Gauss-Weierstrass family (1, iB, 0, 1, p, q)",
        }),
        SpecialMatrix::BilateralLaplace { .. } => Err(SaftError::ComplexEntriesUnsupported {
            kind: "the bilateral-Laplace family (1, -iB, 0, 1, p, q)",
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn validates_spec_examples() {
        assert!(SaftMatrix::new(0.0, 1.0, -1.0, 0.0, 0.0, 0.0).is_ok());
        assert!(SaftMatrix::new(1.0, 2.0, 1.0, 3.0, 1.0, 1.0).is_ok());
        assert!(matches!(
            SaftMatrix::new(1.0, 0.0, 0.0, 1.0, 0.0, 0.0),
            Err(SaftError::DegenerateB)
        ));
        assert!(matches!(
            SaftMatrix::new(1.0, 1.0, 1.0, 3.0, 0.0, 0.0),
            Err(SaftError::NotUnimodular { .. })
        ));
    }

    #[test]
    fn quarter_turn_fractional_is_fourier() {
        let m = make_special_matrix(SpecialMatrix::Fractional { theta: FRAC_PI_2 }).unwrap();
        assert_eq!(m, SaftMatrix::fourier());
    }

    #[test]
    fn fresnel_matrix_entries() {
        let m = make_special_matrix(SpecialMatrix::Fresnel { b: 2.0, p: 0.0, q: 0.0 }).unwrap();
        assert_eq!((m.a, m.b, m.c, m.d, m.p, m.q), (1.0, 2.0, 0.0, 1.0, 0.0, 0.0));
    }

    #[test]
    fn degenerate_angles_rejected() {
        assert!(matches!(
            make_special_matrix(SpecialMatrix::Fractional { theta: 0.0 }),
            Err(SaftError::DegenerateB)
        ));
        assert!(matches!(
            make_special_matrix(SpecialMatrix::Fractional { theta: PI }),
            Err(SaftError::DegenerateB)
        ));
    }

    #[test]
    fn complex_families_rejected() {
        assert!(matches!(
            make_special_matrix(SpecialMatrix::GaussWeierstrass { b: 1.0, p: 0.0, q: 0.0 }),
            Err(SaftError::ComplexEntriesUnsupported { .. })
        ));
        assert!(matches!(
            make_special_matrix(SpecialMatrix::BilateralLaplace { b: 1.0, p: 0.0, q: 0.0 }),
            Err(SaftError::ComplexEntriesUnsupported { .. })
        ));
    }

    #[test]
    fn offset_fractional_with_zero_offsets_matches_fractional() {
        for theta in [0.3, 1.1, 2.7, -0.9] {
            let a = make_special_matrix(SpecialMatrix::OffsetFractional { theta, p: 0.0, q: 0.0 })
                .unwrap();
            let b = make_special_matrix(SpecialMatrix::Fractional { theta }).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn constructors_always_validate() {
        for theta in [0.1, 0.5, 1.0, 1.5, 2.0, 3.0, -1.2] {
            let m = make_special_matrix(SpecialMatrix::Fractional { theta }).unwrap();
            assert!(m.validate().is_ok());
        }
        for b in [0.5, -2.0, 7.0] {
            let m = make_special_matrix(SpecialMatrix::Fresnel { b, p: 1.0, q: -1.0 }).unwrap();
            assert!(m.validate().is_ok());
        }
    }
}

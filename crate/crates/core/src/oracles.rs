//! Independent ground truth: an adaptive trapezoid oracle for every integral
//! in the crate, plus closed-form evaluators for the worked examples. Fixture
//! values are always pinned from the refined quadrature; the closed forms are
//! cross-checked against it and their deviation recorded as a measured
//! constant, never silently absorbed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SaftError};
use crate::matrix::SaftMatrix;
use crate::saft::kernel_prefactor;
use crate::wavelet::Side;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    RefinedQuadrature,
    ClosedForm,
}

#[derive(Debug, Clone, Copy)]
pub struct OracleResult {
    pub value: Complex64,
    pub estimated_error: f64,
    pub method: OracleMethod,
}

const MAX_REFINEMENT_LEVELS: usize = 24;

/// Adaptive composite trapezoid: halves the step until two successive levels
/// agree within `tol`. `breakpoints` split the support so jumps (Haar) sit on
/// cell edges; segment endpoints are evaluated as one-sided limits.
pub fn quadrature_oracle(
    integrand: impl Fn(f64, Side) -> Complex64,
    support: (f64, f64),
    breakpoints: &[f64],
    tol: f64,
) -> Result<OracleResult> {
    let (lo, hi) = support;
    if !(hi > lo) {
        return Ok(OracleResult {
            value: Complex64::new(0.0, 0.0),
            estimated_error: 0.0,
            method: OracleMethod::RefinedQuadrature,
        });
    }
    let tol = tol.max(1e-15);
    let mut edges: Vec<f64> = vec![lo];
    let mut sorted: Vec<f64> = breakpoints.iter().copied().filter(|&b| b > lo && b < hi).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted.dedup();
    edges.extend(sorted);
    edges.push(hi);

    // per-segment running trapezoid sums, refined jointly
    let n_seg = edges.len() - 1;
    let mut seg_sums = vec![Complex64::new(0.0, 0.0); n_seg];
    let mut points_per_seg = 8usize;
    for (s, w) in edges.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let h = (b - a) / points_per_seg as f64;
        let mut acc = (integrand(a, Side::Right) + integrand(b, Side::Left)) * 0.5;
        for i in 1..points_per_seg {
            acc += integrand(a + h * i as f64, Side::Right);
        }
        seg_sums[s] = acc * h;
    }
    let mut total: Complex64 = seg_sums.iter().sum();

    for _level in 0..MAX_REFINEMENT_LEVELS {
        let mut new_total = Complex64::new(0.0, 0.0);
        for (s, w) in edges.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            let h = (b - a) / (2 * points_per_seg) as f64;
            let mut mid = Complex64::new(0.0, 0.0);
            for i in 0..points_per_seg {
                mid += integrand(a + h * (2 * i + 1) as f64, Side::Right);
            }
            seg_sums[s] = seg_sums[s] * 0.5 + mid * h;
            new_total += seg_sums[s];
        }
        points_per_seg *= 2;
        let diff = (new_total - total).norm();
        total = new_total;
        if diff < tol {
            return Ok(OracleResult {
                value: total,
                estimated_error: diff,
                method: OracleMethod::RefinedQuadrature,
            });
        }
    }
    Err(SaftError::NoConvergence { levels: MAX_REFINEMENT_LEVELS })
}

/// SAFT of exp(-t^2 / (2 sigma^2)) in closed form (complex Gaussian integral).
pub fn gaussian_saft_closed_form(m: &SaftMatrix, sigma: f64, omega: f64) -> Complex64 {
    let two_b = 2.0 * m.b;
    let z = Complex64::new(1.0 / (2.0 * sigma * sigma), -m.a / two_b);
    let w = Complex64::new(0.0, (m.p - omega) / m.b);
    let c0 = (m.d * (omega * omega + m.p * m.p) - 2.0 * omega * m.offset_term()) / two_b;
    kernel_prefactor(m.b)
        * Complex64::from_polar(1.0, c0)
        * (Complex64::new(std::f64::consts::PI, 0.0) / z).sqrt()
        * (w * w / (z * 4.0)).exp()
}

/// The worked constant-signal/Morlet transform as printed: K sqrt(a) /
/// sqrt(iB + a^2 A) times two exponential factors. Deviations from the
/// quadrature value are expected and recorded as fixtures.
pub fn morlet_constant_closed_form(
    k_const: f64,
    alpha: f64,
    m: &SaftMatrix,
    a: f64,
    b: f64,
) -> Result<Complex64> {
    if a <= 0.0 {
        return Err(SaftError::NonpositiveScale { scale: a });
    }
    let a2 = a * a;
    let denom = Complex64::new(m.b, -a2 * m.a); // B - i a^2 A
    if denom.norm() < 1e-200 {
        return Err(SaftError::SingularDenominator { reason: "B - i a^2 A = 0".into() });
    }
    let root = Complex64::new(a2 * m.a, m.b).sqrt(); // sqrt(iB + a^2 A)
    let theta = (-2.0 * a * m.offset_term() + m.d * (a2 + m.p * m.p)) / (2.0 * m.b);
    let lead = Complex64::new(k_const * a.sqrt(), 0.0) / root
        * (Complex64::new(-b * b / (2.0 * a2), theta + b * alpha / a)).exp();
    // ((p - a) a^2 - i alpha a B + b B)^2 / (2 a^2 B (B - i a^2 A))
    let numerator = Complex64::new((m.p - a) * a2 + b * m.b, -alpha * a * m.b);
    let arg = numerator * numerator / (denom * 2.0 * a2 * m.b);
    Ok(lead * arg.exp())
}

/// The worked chirp/Haar transform as printed: sqrt(iB)/sqrt(2 pi a (a-p))
/// times a pure phase in b and the three-term exponential bracket.
pub fn haar_chirp_closed_form(m: &SaftMatrix, a: f64, b: f64) -> Result<Complex64> {
    if a <= 0.0 {
        return Err(SaftError::NonpositiveScale { scale: a });
    }
    if (a - m.p).abs() < 1e-6 {
        return Err(SaftError::SingularDenominator {
            reason: format!("|a - p| = {:.3e} below 1e-6", (a - m.p).abs()),
        });
    }
    let gamma = m.p - a;
    let theta = (-2.0 * a * m.offset_term() + m.d * (a * a + m.p * m.p)) / (2.0 * m.b);
    let pre = Complex64::new(0.0, m.b).sqrt()
        / Complex64::new(2.0 * std::f64::consts::PI * a * (a - m.p), 0.0).sqrt();
    let phase = Complex64::from_polar(1.0, theta + b * gamma / m.b);
    let bracket = haar_bracket(gamma * a / m.b);
    Ok(pre * phase * bracket)
}

/// 2 e^{ix/2} - 1 - e^{ix}; vanishes like -x^2/4 as x -> 0.
pub fn haar_bracket(x: f64) -> Complex64 {
    Complex64::from_polar(2.0, 0.5 * x) - Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, x)
}

/// Discrete chirp/Haar coefficient in closed form: B 2^{-j/2} / (i (p - k 2^j))
/// times the lattice phases and the three-term bracket, for the dyadic lattice
/// with the prose-side frequency convention the worked example uses.
pub fn haar_chirp_discrete_closed_form(m: &SaftMatrix, j: i32, k: i64) -> Result<Complex64> {
    let two_j = (2.0f64).powi(j);
    let gamma = m.p - k as f64 * two_j;
    if gamma.abs() < 1e-9 {
        return Err(SaftError::SingularDenominator {
            reason: format!("p - k 2^j = {gamma:.3e}"),
        });
    }
    let omega = k as f64 * two_j;
    let theta = (-2.0 * omega * m.offset_term() + m.d * (omega * omega + m.p * m.p)) / (2.0 * m.b);
    let pre = Complex64::new(m.b * (2.0f64).powf(-0.5 * j as f64), 0.0)
        / Complex64::new(0.0, gamma);
    let phase = Complex64::from_polar(1.0, theta + gamma * two_j * k as f64 / m.b);
    Ok(pre * phase * haar_bracket(gamma * two_j / m.b))
}

/// One pinned ground-truth value with its inputs and the method that made it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub inputs: serde_json::Value,
    pub re: f64,
    pub im: f64,
    pub tol: f64,
    pub method: OracleMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Fixture {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureSet(pub Vec<Fixture>);

impl FixtureSet {
    pub fn get(&self, name: &str) -> Option<&Fixture> {
        self.0.iter().find(|f| f.name == name)
    }

    /// Panics if the fixture is missing; fixtures are part of the repo.
    pub fn value(&self, name: &str) -> Complex64 {
        self.get(name)
            .unwrap_or_else(|| panic!("missing fixture {name}"))
            .value()
    }

    pub fn scalar(&self, name: &str) -> f64 {
        self.value(name).re
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SaftError::ParseError {
            location: "fixtures json".into(),
            reason: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fixture serialization")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json())?)
    }
}

/// The fixtures shipped with the crate (regenerable via `oracle regen`).
pub fn embedded_fixtures() -> FixtureSet {
    FixtureSet::from_json(include_str!("../fixtures.json")).expect("embedded fixtures parse")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_integral_is_exact() {
        let r = quadrature_oracle(|_, _| Complex64::new(1.0, 0.0), (0.0, 1.0), &[], 1e-12).unwrap();
        assert_relative_eq!(r.value.re, 1.0, epsilon = 1e-14);
        assert!(r.estimated_error <= 1e-12);
    }

    #[test]
    fn gaussian_modulated_integral_matches_closed_form() {
        // integral of e^{-t^2/2} e^{-it} dt = sqrt(2 pi) e^{-1/2}
        let r = quadrature_oracle(
            |t, _| Complex64::from_polar((-0.5 * t * t).exp(), -t),
            (-10.0, 10.0),
            &[],
            1e-10,
        )
        .unwrap();
        let expect = (2.0 * std::f64::consts::PI).sqrt() * (-0.5f64).exp();
        assert_relative_eq!(r.value.re, expect, epsilon = 1e-9);
        assert_relative_eq!(r.value.im, 0.0, epsilon = 1e-9);
        assert_relative_eq!(expect, 1.5203469010662808, epsilon = 1e-12);
    }

    #[test]
    fn haar_jump_splitting_gives_exact_zero() {
        let sign = |t: f64, side: Side| {
            let v = match side {
                Side::Right => if t < 0.5 { 1.0 } else { -1.0 },
                Side::Left => if t <= 0.5 { 1.0 } else { -1.0 },
            };
            Complex64::new(v, 0.0)
        };
        let r = quadrature_oracle(sign, (0.0, 1.0), &[0.5], 1e-14).unwrap();
        assert!(r.value.norm() < 1e-15);
    }

    #[test]
    fn haar_bracket_limit() {
        assert!(haar_bracket(0.0).norm() == 0.0);
        // small-x behavior: -(ix)^2/4 = +x^2/4, imaginary part O(x^3)
        let x = 1e-4;
        let b = haar_bracket(x);
        assert_relative_eq!(b.re, x * x / 4.0, max_relative = 1e-3);
        assert!(b.im.abs() < x * x * x);
    }

    #[test]
    fn closed_forms_guard_singularities() {
        let m = SaftMatrix::new(1.0, 2.0, 1.0, 3.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            haar_chirp_closed_form(&m, 1.0, 0.0),
            Err(SaftError::SingularDenominator { .. })
        ));
        assert!(matches!(
            haar_chirp_discrete_closed_form(&m, 0, 1),
            Err(SaftError::SingularDenominator { .. })
        ));
        assert!(haar_chirp_closed_form(&m, 2.0, 0.0).is_ok());
    }

    #[test]
    fn morlet_closed_form_zero_amplitude() {
        let m = SaftMatrix::fourier();
        let v = morlet_constant_closed_form(0.0, 5.0, &m, 1.0, 0.0).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn oracle_reports_no_convergence() {
        // white-noise-like integrand (deterministic but nowhere smooth)
        let r = quadrature_oracle(
            |t, _| Complex64::new((t * 1e12).sin().signum(), 0.0),
            (0.0, 1.0),
            &[],
            1e-14,
        );
        assert!(matches!(r, Err(SaftError::NoConvergence { .. })));
    }
}

//! Discrete transform on the lattice a = a0^j, frame operator, frame-bound
//! estimation and conjugate-gradient reconstruction.
//!
//! Lattice convention (the default): the window is psi(a0^{-j} t - k b0) and
//! the kernel frequency is k b0 a0^{-j}, i.e. both read off the same
//! discretized family. The variant with kernel frequency k b0 a0^{+j}
//! (matching the lattice positions instead) is exposed behind
//! `LatticeConvention::WindowLattice`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SaftError};
use crate::grid::RealGrid;
use crate::matrix::SaftMatrix;
use crate::quadrature::inner_product_window;
use crate::saft::{guard_dt, KernelAtOmega};
use crate::signal::Signal;
use crate::wavelet::{Side, Wavelet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LatticeConvention {
    /// Kernel frequency k b0 a0^{-j} (matches the dilated window argument).
    #[default]
    DilationMatched,
    /// Kernel frequency k b0 a0^{+j} (matches the translation positions).
    WindowLattice,
}

/// Lattice parameters plus estimated frame bounds once known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub a0: f64,
    pub b0: f64,
    pub j_min: i32,
    pub j_max: i32,
    pub k_min: i64,
    pub k_max: i64,
    #[serde(default)]
    pub convention: LatticeConvention,
    /// (E, F) after estimation.
    #[serde(default)]
    pub bounds: Option<(f64, f64)>,
}

impl FrameSpec {
    pub fn new(a0: f64, b0: f64, j_min: i32, j_max: i32, k_min: i64, k_max: i64) -> Result<Self> {
        if !(a0 > 1.0) || !(b0 > 0.0) {
            return Err(SaftError::InvalidGrid {
                reason: format!("need a0 > 1 and b0 > 0 (got a0={a0}, b0={b0})"),
            });
        }
        Ok(FrameSpec { a0, b0, j_min, j_max, k_min, k_max, convention: LatticeConvention::default(), bounds: None })
    }

    pub fn j_count(&self) -> usize {
        (self.j_max - self.j_min + 1).max(0) as usize
    }

    pub fn k_count(&self) -> usize {
        (self.k_max - self.k_min + 1).max(0) as usize
    }

    pub fn len(&self) -> usize {
        self.j_count() * self.k_count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, j: i32, k: i64) -> bool {
        j >= self.j_min && j <= self.j_max && k >= self.k_min && k <= self.k_max
    }

    pub fn indices(&self) -> Vec<(i32, i64)> {
        let mut out = Vec::with_capacity(self.len());
        for j in self.j_min..=self.j_max {
            for k in self.k_min..=self.k_max {
                out.push((j, k));
            }
        }
        out
    }

    /// Kernel frequency of the (j, k) member under the active convention.
    pub fn frequency(&self, j: i32, k: i64) -> f64 {
        let exp = match self.convention {
            LatticeConvention::DilationMatched => -j,
            LatticeConvention::WindowLattice => j,
        };
        k as f64 * self.b0 * self.a0.powi(exp)
    }
}

/// Coefficients over the (j, k) lattice, row-major in j.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    values: Vec<Complex64>,
    pub spec: FrameSpec,
}

impl CoefficientTable {
    pub fn new(values: Vec<Complex64>, spec: FrameSpec) -> Self {
        assert_eq!(values.len(), spec.len());
        CoefficientTable { values, spec }
    }

    pub fn get(&self, j: i32, k: i64) -> Complex64 {
        let row = (j - self.spec.j_min) as usize;
        let col = (k - self.spec.k_min) as usize;
        self.values[row * self.spec.k_count() + col]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// One lattice member with its kernel factor precomputed.
struct LatticeAtom<'w> {
    scale: f64,
    shift: f64,
    amp: f64,
    psi: &'w Wavelet,
    ker: KernelAtOmega,
}

impl<'w> LatticeAtom<'w> {
    fn new(m: &SaftMatrix, psi: &'w Wavelet, spec: &FrameSpec, j: i32, k: i64) -> Self {
        let aj = spec.a0.powi(j);
        LatticeAtom {
            scale: aj,
            shift: k as f64 * spec.b0,
            amp: spec.a0.powf(-0.5 * j as f64),
            psi,
            ker: KernelAtOmega::new(m, spec.frequency(j, k)),
        }
    }

    #[inline]
    fn eval(&self, t: f64, side: Side) -> Complex64 {
        self.psi.eval_side(t / self.scale - self.shift, side) * self.ker.eval(t).conj() * self.amp
    }

    fn support(&self) -> (f64, f64) {
        let (s0, s1) = self.psi.support();
        (self.scale * (self.shift + s0), self.scale * (self.shift + s1))
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.psi.breakpoints().iter().map(|&x| self.scale * (self.shift + x)).collect()
    }
}

/// Samples the (j, k) member of the discrete system on a grid.
pub fn discrete_family(
    m: &SaftMatrix,
    psi: &Wavelet,
    spec: &FrameSpec,
    j: i32,
    k: i64,
    times: &RealGrid,
) -> Result<Signal> {
    m.validate()?;
    if !spec.contains(j, k) {
        return Err(SaftError::IndexOutOfRange { j: j as i64, k });
    }
    let atom = LatticeAtom::new(m, psi, spec, j, k);
    Signal::from_fn(times, |t| atom.eval(t, Side::Right))
}

fn lattice_guard(f: &Signal, m: &SaftMatrix, psi: &Wavelet, spec: &FrameSpec, sigma_f: f64) -> Result<()> {
    for (j, k) in spec.indices() {
        let atom = LatticeAtom::new(m, psi, spec, j, k);
        let (lo, hi) = atom.support();
        let lo = lo.max(f.t0);
        let hi = hi.min(f.t_end());
        if hi <= lo {
            continue;
        }
        let omega = spec.frequency(j, k);
        let sigma = sigma_f + psi.spectral_extent() / atom.scale;
        let required = guard_dt(m, lo.abs().max(hi.abs()), (m.p - omega).abs(), sigma);
        if f.dt > required {
            return Err(SaftError::NyquistViolation {
                required_dt: required,
                actual_dt: f.dt,
                cell: Some(format!("lattice cell (j={j}, k={k})")),
            });
        }
    }
    Ok(())
}

/// Discrete transform: values[(j,k)] = <f, psi^M_{j,k}>.
pub fn dsawt_analyze(
    f: &Signal,
    psi: &Wavelet,
    m: &SaftMatrix,
    spec: &FrameSpec,
) -> Result<CoefficientTable> {
    m.validate()?;
    psi.validate()?;
    let sigma_f = f.bandwidth_999();
    lattice_guard(f, m, psi, spec, sigma_f)?;
    let idx = spec.indices();
    let values: Vec<Complex64> = idx
        .into_par_iter()
        .map(|(j, k)| {
            let atom = LatticeAtom::new(m, psi, spec, j, k);
            let (lo, hi) = atom.support();
            inner_product_window(f, lo, hi, &atom.breakpoints(), |t, side| atom.eval(t, side))
        })
        .collect();
    Ok(CoefficientTable::new(values, *spec))
}

/// The frame operator S restricted to a sampling grid: every lattice member
/// is sampled once, applications are weighted dot products.
pub struct FrameOperator {
    atoms: Vec<Vec<Complex64>>,
    grid: RealGrid,
}

impl FrameOperator {
    pub fn build(m: &SaftMatrix, psi: &Wavelet, spec: &FrameSpec, grid: &RealGrid) -> Result<Self> {
        m.validate()?;
        psi.validate()?;
        // the grid must resolve every member's chirp (atom-only guard; trial
        // vectors carry no bandwidth estimate of their own)
        for (j, k) in spec.indices() {
            let scale = spec.a0.powi(j);
            let omega = spec.frequency(j, k);
            let t_max = grid.max_abs();
            let required = guard_dt(m, t_max, (m.p - omega).abs(), psi.spectral_extent() / scale);
            if grid.step > required {
                return Err(SaftError::NyquistViolation {
                    required_dt: required,
                    actual_dt: grid.step,
                    cell: Some(format!("lattice cell (j={j}, k={k})")),
                });
            }
        }
        let atoms: Vec<Vec<Complex64>> = spec
            .indices()
            .into_par_iter()
            .map(|(j, k)| {
                let atom = LatticeAtom::new(m, psi, spec, j, k);
                grid.iter().map(|t| atom.eval(t, Side::Right)).collect()
            })
            .collect();
        Ok(FrameOperator { atoms, grid: *grid })
    }

    pub fn grid(&self) -> &RealGrid {
        &self.grid
    }

    pub fn lattice_size(&self) -> usize {
        self.atoms.len()
    }

    fn dot(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        let n = x.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            acc += x[i] * y[i].conj() * w;
        }
        acc * self.grid.step
    }

    pub fn inner(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        self.dot(x, y)
    }

    pub fn norm_sqr(&self, x: &[Complex64]) -> f64 {
        self.dot(x, x).re
    }

    /// Analysis coefficients <x, atom_i> for every lattice member.
    pub fn analyze(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.atoms.par_iter().map(|a| self.dot(x, a)).collect()
    }

    /// S x = sum_i <x, atom_i> atom_i.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let coeffs = self.analyze(x);
        self.synthesize(&coeffs)
    }

    /// sum_i c_i atom_i.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(coeffs.len(), self.atoms.len());
        let n = self.grid.count;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (c, atom) in coeffs.iter().zip(&self.atoms) {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(atom) {
                *o += c * a;
            }
        }
        out
    }
}

/// Applies the frame operator to a signal on its own grid.
pub fn frame_apply(f: &Signal, psi: &Wavelet, m: &SaftMatrix, spec: &FrameSpec) -> Result<Signal> {
    if spec.is_empty() {
        return Ok(Signal::new(
            vec![Complex64::new(0.0, 0.0); f.len()],
            f.t0,
            f.dt,
        )?);
    }
    let op = FrameOperator::build(m, psi, spec, &f.grid())?;
    Signal::new(op.apply(&f.samples), f.t0, f.dt)
}

impl FrameOperator {
    /// Gram matrix G[i][l] = <atom_l, atom_i> of the sampled lattice members.
    /// S = A*A and G = AA* share their nonzero spectrum, so the frame bounds
    /// on the lattice span are the extreme eigenvalues of G.
    pub fn gram(&self) -> Vec<Complex64> {
        let l = self.atoms.len();
        let mut g = vec![Complex64::new(0.0, 0.0); l * l];
        let rows: Vec<Vec<Complex64>> = (0..l)
            .into_par_iter()
            .map(|i| (0..=i).map(|j| self.dot(&self.atoms[j], &self.atoms[i])).collect())
            .collect();
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                g[i * l + j] = *v;
                g[j * l + i] = v.conj();
            }
        }
        g
    }
}

const JACOBI_MAX_SWEEPS: usize = 40;

/// Eigenvalues of a Hermitian matrix (row-major, length l*l) by cyclic Jacobi
/// rotations. Quadratically convergent and free of the stalling that power
/// iteration suffers on clustered spectra.
pub fn hermitian_eigenvalues(g: &[Complex64], l: usize) -> Result<Vec<f64>> {
    assert_eq!(g.len(), l * l);
    let mut a = g.to_vec();
    if l == 1 {
        return Ok(vec![a[0].re]);
    }
    let scale: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
    let off = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..l {
            for j in 0..l {
                if i != j {
                    s += a[i * l + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    for sweep in 0..JACOBI_MAX_SWEEPS {
        if off(&a) <= 1e-14 * scale {
            break;
        }
        if sweep == JACOBI_MAX_SWEEPS - 1 {
            return Err(SaftError::NotConverged {
                iterations: JACOBI_MAX_SWEEPS,
                residual: off(&a) / scale,
            });
        }
        for p in 0..l - 1 {
            for q in p + 1..l {
                let apq = a[p * l + q];
                let r = apq.norm();
                if r <= 1e-18 * scale {
                    continue;
                }
                // factor U = diag(1, e^{-i phi}) R so the phase-stripped block
                // is real, then a real Givens rotation R = [[c, -s], [s, c]]
                // with t = tau - sqrt(1 + tau^2) zeroes the off entry
                let phase = apq / r; // e^{i phi}
                let app = a[p * l + p].re;
                let aqq = a[q * l + q].re;
                let tau = (aqq - app) / (2.0 * r);
                // stable small-magnitude root of t^2 - 2 tau t - 1 = 0
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // A <- A U with U columns: u_p = (c, s e^{-i phi}),
                //                          u_q = (-s, c e^{-i phi})
                for k in 0..l {
                    let akp = a[k * l + p];
                    let akq = a[k * l + q];
                    a[k * l + p] = akp * c + akq * phase.conj() * s;
                    a[k * l + q] = akq * phase.conj() * c - akp * s;
                }
                // A <- U^H A with rows: (c, s e^{i phi}) and (-s, c e^{i phi})
                for k in 0..l {
                    let apk = a[p * l + k];
                    let aqk = a[q * l + k];
                    a[p * l + k] = apk * c + aqk * phase * s;
                    a[q * l + k] = aqk * phase * c - apk * s;
                }
                // keep the touched entries exactly Hermitian
                a[p * l + q] = Complex64::new(
                    0.5 * (a[p * l + q].re + a[q * l + p].re),
                    0.5 * (a[p * l + q].im - a[q * l + p].im),
                );
                a[q * l + p] = a[p * l + q].conj();
                a[p * l + p] = Complex64::new(a[p * l + p].re, 0.0);
                a[q * l + q] = Complex64::new(a[q * l + q].re, 0.0);
            }
        }
    }
    Ok((0..l).map(|i| a[i * l + i].re).collect())
}

/// Extreme Rayleigh quotients of S over the lattice span: F = largest,
/// E = smallest, computed as the extreme eigenvalues of the Gram matrix
/// (S = A*A and G = AA* share their nonzero spectrum). Trial-space
/// estimates, not certified global bounds.
pub fn estimate_frame_bounds(
    psi: &Wavelet,
    m: &SaftMatrix,
    spec: &FrameSpec,
    trial_space: &RealGrid,
) -> Result<(f64, f64)> {
    if spec.is_empty() {
        return Ok((0.0, 0.0));
    }
    let op = FrameOperator::build(m, psi, spec, trial_space)?;
    let l = op.lattice_size();
    let g = op.gram();
    let eig = hermitian_eigenvalues(&g, l)?;
    let f_bound = eig.iter().cloned().fold(f64::MIN, f64::max).max(0.0);
    let e_bound = eig.iter().cloned().fold(f64::MAX, f64::min).max(0.0);
    Ok((e_bound, f_bound))
}

/// Conjugate-direction solver for the Hermitian positive semidefinite
/// operator, in the residual-minimizing (conjugate residual) form: each
/// iterate minimizes |b - S x| over the Krylov space, so the returned
/// residual history is non-increasing by construction. One operator
/// application per iteration, same as plain conjugate gradients.
pub fn conjugate_residual_solve(
    apply: impl Fn(&[Complex64]) -> Vec<Complex64>,
    inner: impl Fn(&[Complex64], &[Complex64]) -> Complex64,
    b: &[Complex64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let n = b.len();
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let b_norm = inner(b, b).re.sqrt();
    if b_norm == 0.0 {
        return Ok((x, vec![0.0]));
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ar = apply(&r);
    let mut ap = ar.clone();
    let mut r_ar = inner(&r, &ar).re;
    let mut history = vec![inner(&r, &r).re.sqrt() / b_norm];
    for _ in 0..max_iter {
        if *history.last().unwrap() <= tol {
            return Ok((x, history));
        }
        let ap_ap = inner(&ap, &ap).re;
        if ap_ap <= 0.0 || r_ar <= 0.0 {
            return Err(SaftError::IllConditionedFrame { lower: r_ar.min(ap_ap) });
        }
        let alpha = r_ar / ap_ap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        ar = apply(&r);
        let r_ar_new = inner(&r, &ar).re;
        let beta = r_ar_new / r_ar;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
            ap[i] = ar[i] + beta * ap[i];
        }
        r_ar = r_ar_new;
        history.push(inner(&r, &r).re.sqrt() / b_norm);
    }
    if *history.last().unwrap() <= tol {
        Ok((x, history))
    } else {
        Err(SaftError::NotConverged {
            iterations: max_iter,
            residual: *history.last().unwrap(),
        })
    }
}

const CG_TOL: f64 = 1e-8;
const CG_MAX_ITER: usize = 500;

/// Reconstructs a signal from its lattice coefficients: solves
/// S f = sum c_{jk} psi_{jk} by conjugate gradients.
pub fn frame_reconstruct(
    c: &CoefficientTable,
    psi: &Wavelet,
    m: &SaftMatrix,
    spec: &FrameSpec,
    times: &RealGrid,
) -> Result<Signal> {
    if spec.is_empty() || c.values().iter().all(|z| z.norm_sqr() == 0.0) {
        return Signal::new(vec![Complex64::new(0.0, 0.0); times.count], times.start, times.step);
    }
    let op = FrameOperator::build(m, psi, spec, times)?;
    let (e, _f) = estimate_frame_bounds(psi, m, spec, times)?;
    if e <= 1e-10 {
        return Err(SaftError::IllConditionedFrame { lower: e });
    }
    let b = op.synthesize(c.values());
    let (x, _hist) =
        conjugate_residual_solve(|v| op.apply(v), |u, v| op.inner(u, v), &b, CG_TOL, CG_MAX_ITER)?;
    Signal::new(x, times.start, times.step)
}


#[cfg(test)]
mod frame_apply_tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn frame_apply_zero_and_operator_equivalence() {
        let spec = FrameSpec::new(2.0, 1.0, -1, 1, -3, 3).unwrap();
        let m = SaftMatrix::fourier();
        let grid = RealGrid::new(-14.0, 1.0 / 32.0, 897).unwrap();
        let zero = Signal::zeros(&grid);
        let out = frame_apply(&zero, &Wavelet::MexicanHat, &m, &spec).unwrap();
        assert!(out.samples.iter().all(|z| z.norm() == 0.0));

        let f = Signal::from_fn(&grid, |t| {
            Complex64::new((-0.2 * t * t).exp(), (0.5 * t).sin())
        })
        .unwrap();
        let sf = frame_apply(&f, &Wavelet::MexicanHat, &m, &spec).unwrap();
        // quadratic form equals the coefficient energy of the analysis
        let table = dsawt_analyze(&f, &Wavelet::MexicanHat, &m, &spec).unwrap();
        let op = FrameOperator::build(&m, &Wavelet::MexicanHat, &spec, &grid).unwrap();
        let quad = op.inner(&sf.samples, &f.samples).re;
        // the analysis table uses split trapezoid over the signal's grid; the
        // operator uses plain trapezoid dots on the same grid, so the two
        // energies agree to quadrature consistency for this smooth window
        assert_relative_eq!(quad, table.energy(), max_relative = 1e-8);
    }

    /// The worked lattice (dyadic scales, half-integer translations, Morlet
    /// at alpha = 6) is numerically rank-deficient: members (j, k) and
    /// (j+1, 2k + 12) coincide in phase space because alpha/b0 is an
    /// integer, so the smallest Gram eigenvalue sits at the rounding floor
    /// and no positive lower frame bound exists on the span. Kept as a
    /// measured diagnostic; the reconstruction fixtures use an
    /// incommensurate lattice instead.
    #[test]
    #[ignore = "expensive diagnostic (~1 min); run with -- --ignored"]
    fn worked_lattice_is_rank_deficient() {
        let psi = Wavelet::Morlet(6.0);
        let m = SaftMatrix::fourier();
        let spec = FrameSpec::new(2.0, 0.5, -3, 3, -32, 32).unwrap();
        let grid = RealGrid::new(-205.0, 0.012, 34167).unwrap();
        let (e, f) = estimate_frame_bounds(&psi, &m, &spec, &grid).unwrap();
        assert!(e >= 0.0 && e <= f && f > 0.0);
        assert!(e <= 1e-10 * f, "measured E = {e:.3e}, F = {f:.3e}");
    }
}

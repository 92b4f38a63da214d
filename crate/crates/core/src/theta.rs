//! The interaction matrix and the coupled forward map
//! `psi_m = sum_k theta_mk (H_k phi_k)|_{I_m}`, together with the range shift
//! `c[psi]`, the decoupled inverse `nu`, and the second range residual.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::chebyshev::{cheb1_nodes, dct_coefficients};
use crate::error::{Error, Result};
use crate::fht::{self, fht_forward_side, range_scan};
use crate::function::{PiecewiseFunction, Weight};
use crate::interval::{IntervalSystem, Side};
use crate::quadrature::{gauss_chebyshev2, gauss_legendre};

/// Default number of Chebyshev modes per interval for computed functions.
pub const DEFAULT_MODES: usize = 128;

/// Structural class of an interaction matrix, tested in the order listed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThetaClass {
    /// Some diagonal entry vanishes.
    DegenerateDiagonal,
    /// All entries equal to one, `n >= 2`.
    Uniform,
    /// Symmetric positive definite.
    SpdSymmetric,
    SymmetricInvertibleDiagonal,
    InvertibleDiagonal,
}

impl ThetaClass {
    pub fn name(self) -> &'static str {
        match self {
            ThetaClass::DegenerateDiagonal => "degenerate-diagonal",
            ThetaClass::Uniform => "uniform",
            ThetaClass::SpdSymmetric => "spd-symmetric",
            ThetaClass::SymmetricInvertibleDiagonal => "symmetric-invertible-diagonal",
            ThetaClass::InvertibleDiagonal => "invertible-diagonal",
        }
    }
}

/// Real `n x n` interaction matrix with its classification.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaMatrix {
    m: DMatrix<f64>,
    class: ThetaClass,
}

impl ThetaMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidArgument(format!("theta must be square, got {}x{}", m.nrows(), m.ncols())));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("theta entries".into()));
        }
        let class = classify(&m);
        Ok(ThetaMatrix { m, class })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("theta rows have inconsistent lengths".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n)).expect("identity is a valid theta")
    }

    pub fn uniform(n: usize) -> Self {
        Self::new(DMatrix::from_element(n, n, 1.0)).expect("all-ones is a valid theta")
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.m[(j, k)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn class(&self) -> ThetaClass {
        self.class
    }

    /// `Theta_d`, the diagonal part.
    pub fn diagonal_part(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.m.diagonal())
    }

    /// `Theta_o = Theta - Theta_d`.
    pub fn off_diagonal_part(&self) -> DMatrix<f64> {
        &self.m - self.diagonal_part()
    }

    pub fn is_diagonal(&self) -> bool {
        self.off_diagonal_part().iter().all(|&v| v == 0.0)
    }

    /// Largest `|theta_jk - theta_kj|`.
    pub fn max_asymmetry(&self) -> f64 {
        (&self.m - self.m.transpose()).amax()
    }

    pub fn is_symmetric(&self) -> bool {
        self.max_asymmetry() <= 1e-14 * self.m.amax()
    }

    /// Fails with [`Error::DegenerateDiagonal`] if some `theta_jj = 0`.
    pub fn require_invertible_diagonal(&self) -> Result<()> {
        match (0..self.n()).find(|&j| self.m[(j, j)] == 0.0) {
            Some(j) => Err(Error::DegenerateDiagonal(j)),
            None => Ok(()),
        }
    }

    /// Smallest eigenvalue of the symmetric part.
    pub fn min_symmetric_eigenvalue(&self) -> f64 {
        let s = (&self.m + self.m.transpose()) * 0.5;
        s.symmetric_eigenvalues().min()
    }
}

fn classify(m: &DMatrix<f64>) -> ThetaClass {
    let n = m.nrows();
    if (0..n).any(|j| m[(j, j)] == 0.0) {
        return ThetaClass::DegenerateDiagonal;
    }
    if n >= 2 && m.iter().all(|&v| v == 1.0) {
        return ThetaClass::Uniform;
    }
    let symmetric = (m - m.transpose()).amax() <= 1e-14 * m.amax();
    if symmetric {
        if m.clone().cholesky().is_some() {
            ThetaClass::SpdSymmetric
        } else {
            ThetaClass::SymmetricInvertibleDiagonal
        }
    } else {
        ThetaClass::InvertibleDiagonal
    }
}

fn check_dims(theta: &ThetaMatrix, sys: &IntervalSystem) -> Result<()> {
    if theta.n() != sys.len() {
        return Err(Error::InvalidArgument(format!(
            "theta is {n}x{n} but the system has {} intervals",
            sys.len(),
            n = theta.n()
        )));
    }
    Ok(())
}

/// `psi_m = sum_k theta_mk (H_k phi_k)|_{I_m}` as plain Chebyshev series with
/// `modes` terms per interval (or exactly, for the self-interaction of sqrt-vanishing data).
pub fn forward_map(theta: &ThetaMatrix, phi: &PiecewiseFunction, modes: usize) -> Result<PiecewiseFunction> {
    let sys = phi.system();
    check_dims(theta, sys)?;
    let n = sys.len();
    let blocks: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|m| -> Result<Vec<Complex64>> {
            let iv = sys.get(m);
            let nodes = cheb1_nodes(modes);
            let self_exact = phi.weight() == Weight::SqrtVanishing;
            let mut vals = vec![Complex64::new(0.0, 0.0); modes];
            for (i, &s) in nodes.iter().enumerate() {
                let z = Complex64::new(iv.from_unit(s), 0.0);
                for k in 0..n {
                    let t = theta.get(m, k);
                    if t == 0.0 || (k == m && self_exact) {
                        continue;
                    }
                    vals[i] += fht_forward_side(phi, k, z, Side::OffCut)? * t;
                }
            }
            let mut coeffs = dct_coefficients(&vals);
            if self_exact && theta.get(m, m) != 0.0 {
                let own = fht::hilbert_sqrt_coeffs(&iv, phi.coeffs(m));
                if own.len() > coeffs.len() {
                    coeffs.resize(own.len(), Complex64::new(0.0, 0.0));
                }
                for (c, o) in coeffs.iter_mut().zip(own) {
                    *c += o * theta.get(m, m);
                }
            }
            Ok(coeffs)
        })
        .collect::<Result<_>>()?;
    let out = PiecewiseFunction::from_coeffs(sys, Weight::Plain, blocks)?;
    Ok(if phi.is_real() { out.into_real() } else { out })
}

/// `c[psi]`: per interval, the constant with `int (psi_j - c_j) / R_{j+} = 0`.
/// Real for real data.
pub fn compute_c(psi: &PiecewiseFunction) -> Result<Vec<Complex64>> {
    (0..psi.system().len()).map(|j| Ok(range_scan(psi, j)?.c)).collect()
}

/// `nu_j = H_j^{-1}[(psi_j - c_j) / theta_jj]`.
pub fn compute_nu(psi: &PiecewiseFunction, c: &[Complex64], theta: &ThetaMatrix, tol: f64) -> Result<PiecewiseFunction> {
    let sys = psi.system();
    check_dims(theta, sys)?;
    theta.require_invertible_diagonal()?;
    if psi.weight() != Weight::Plain {
        return Err(Error::InvalidArgument("right-hand side must be plain data".into()));
    }
    if c.len() != sys.len() {
        return Err(Error::InvalidArgument("shift vector length does not match".into()));
    }
    let blocks: Vec<Vec<Complex64>> = (0..sys.len())
        .map(|j| {
            let mut b = psi.coeffs(j).to_vec();
            if b.is_empty() {
                b.push(Complex64::new(0.0, 0.0));
            }
            b[0] -= c[j];
            let d = theta.get(j, j);
            b.iter().map(|v| v / d).collect()
        })
        .collect();
    let mut shifted = PiecewiseFunction::from_coeffs(sys, Weight::Plain, blocks)?;
    if psi.is_real() && c.iter().all(|v| v.im == 0.0) {
        shifted = shifted.into_real();
    }
    fht::fht_invert(&shifted, tol)
}

/// `(1/pi) sum_{k != m} theta_mk int_{I_k} phi_k / R_m` for every `m`.
pub fn cross_moments(theta: &ThetaMatrix, phi: &PiecewiseFunction) -> Result<Vec<Complex64>> {
    let sys = phi.system();
    check_dims(theta, sys)?;
    let n = sys.len();
    let q = phi.max_modes() + 64;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (m, o) in out.iter_mut().enumerate() {
        let rm = sys.get(m);
        for k in (0..n).filter(|&k| k != m && theta.get(m, k) != 0.0) {
            let ik = sys.get(k);
            let h = ik.half();
            let mut acc = Complex64::new(0.0, 0.0);
            match phi.weight() {
                Weight::SqrtVanishing => {
                    let (s, w) = gauss_chebyshev2(q);
                    for (&si, &wi) in s.iter().zip(&w) {
                        let x = ik.from_unit(si);
                        acc += phi.eval_smooth(k, x) * (wi * h * h / rm.radical_real(x));
                    }
                }
                Weight::Plain => {
                    let (s, w) = gauss_legendre(q);
                    for (&si, &wi) in s.iter().zip(&w) {
                        let x = ik.from_unit(si);
                        acc += phi.eval(k, x) * (wi * h / rm.radical_real(x));
                    }
                }
            }
            *o += acc * (theta.get(m, k) / PI);
        }
    }
    Ok(out)
}

/// Second range residual `r_m = (1/pi) sum_{k != m} theta_mk int_{I_k} phi_k / R_m - c_m`.
pub fn residual_range2(theta: &ThetaMatrix, phi: &PiecewiseFunction, c: &[Complex64]) -> Result<Vec<Complex64>> {
    let mom = cross_moments(theta, phi)?;
    if c.len() != mom.len() {
        return Err(Error::InvalidArgument("shift vector length does not match".into()));
    }
    Ok(mom.iter().zip(c).map(|(a, b)| a - b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fht::RANGE_TOL;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn two() -> IntervalSystem {
        IntervalSystem::new(&[(-2.0, -1.0), (1.0, 2.0)]).unwrap()
    }

    #[test]
    fn classification() {
        assert_eq!(ThetaMatrix::identity(2).class(), ThetaClass::SpdSymmetric);
        assert_eq!(ThetaMatrix::uniform(2).class(), ThetaClass::Uniform);
        assert_eq!(ThetaMatrix::uniform(1).class(), ThetaClass::SpdSymmetric);
        let t = ThetaMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(t.class(), ThetaClass::DegenerateDiagonal);
        assert!(matches!(t.require_invertible_diagonal(), Err(Error::DegenerateDiagonal(0))));
        let t = ThetaMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert_eq!(t.class(), ThetaClass::SymmetricInvertibleDiagonal);
        let t = ThetaMatrix::from_rows(&[vec![1.0, 0.3], vec![0.7, 1.0]]).unwrap();
        assert_eq!(t.class(), ThetaClass::InvertibleDiagonal);
        let sum = t.diagonal_part() + t.off_diagonal_part();
        assert_eq!(&sum, t.matrix());
        assert!(ThetaMatrix::from_rows(&[vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn forward_reductions() {
        let sys1 = IntervalSystem::new(&[(-1.0, 1.0)]).unwrap();
        let f = PiecewiseFunction::from_real_coeffs(&sys1, Weight::SqrtVanishing, vec![vec![0.2, 1.0, -0.5]]).unwrap();
        let psi = forward_map(&ThetaMatrix::identity(1), &f, 16).unwrap();
        for &x in &[-0.7, 0.1, 0.55] {
            let direct = fht::fht_forward(&f, 0, &[c(x)]).unwrap()[0];
            assert!((psi.eval(0, x) - direct).norm() < 1e-14);
        }
        let sys = two();
        let zero = PiecewiseFunction::zero(&sys, Weight::SqrtVanishing, 8);
        let theta = ThetaMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert_eq!(forward_map(&theta, &zero, 16).unwrap().l2_norm(), 0.0);
        // diagonal theta decouples
        let phi = PiecewiseFunction::from_real_coeffs(&sys, Weight::SqrtVanishing, vec![vec![1.0, 0.3], vec![-0.4, 0.0, 0.9]])
            .unwrap();
        let diag = ThetaMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 3.0]]).unwrap();
        let psi = forward_map(&diag, &phi, 16).unwrap();
        for (j, x) in [(0usize, -1.4), (1, 1.8)] {
            let direct = fht::fht_forward(&phi, j, &[c(x)]).unwrap()[0] * diag.get(j, j);
            assert!((psi.eval(j, x) - direct).norm() < 1e-14);
        }
    }

    #[test]
    fn cross_terms_match_oracle() {
        let sys = two();
        let phi = PiecewiseFunction::from_real_coeffs(&sys, Weight::SqrtVanishing, vec![vec![1.0, 0.3], vec![-0.4, 0.0, 0.9]])
            .unwrap();
        let theta = ThetaMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let psi = forward_map(&theta, &phi, 64).unwrap();
        let x = -1.3;
        let own = crate::pv::pv_oracle(|t| phi.eval(0, t).re, &sys.get(0), x).unwrap();
        let other = crate::pv::cauchy_oracle(|t| phi.eval(1, t).re, &sys.get(1), c(x)).unwrap().re;
        assert!((psi.eval(0, x).re - (own + 0.5 * other)).abs() < 1e-10);
    }

    #[test]
    fn shift_and_nu_examples() {
        let sys = two();
        let v = PiecewiseFunction::from_real_fn(&sys, Weight::Plain, 8, |j, _| [3.0, -1.5][j]).unwrap();
        let cv = compute_c(&v).unwrap();
        assert!((cv[0] - c(3.0)).norm() < 1e-14 && (cv[1] - c(-1.5)).norm() < 1e-14);
        let theta = ThetaMatrix::identity(2);
        assert!(compute_nu(&v, &cv, &theta, RANGE_TOL).unwrap().l2_norm() < 1e-14);

        let sys1 = IntervalSystem::new(&[(-1.0, 1.0)]).unwrap();
        let x = PiecewiseFunction::from_real_fn(&sys1, Weight::Plain, 8, |_, x| x).unwrap();
        let cx = compute_c(&x).unwrap();
        assert!(cx[0].norm() < 1e-15);
        let nu = compute_nu(&x, &cx, &ThetaMatrix::from_rows(&[vec![2.0]]).unwrap(), RANGE_TOL).unwrap();
        assert!((nu.eval(0, 0.3).re + (1.0f64 - 0.09).sqrt() / 2.0).abs() < 1e-14);

        let sys02 = IntervalSystem::new(&[(0.0, 2.0)]).unwrap();
        let x = PiecewiseFunction::from_real_fn(&sys02, Weight::Plain, 8, |_, x| x).unwrap();
        assert!((compute_c(&x).unwrap()[0] - c(1.0)).norm() < 1e-14);

        let degenerate = ThetaMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(compute_nu(&v, &cv, &degenerate, RANGE_TOL), Err(Error::DegenerateDiagonal(0))));
    }

    #[test]
    fn nu_round_trip() {
        let sys = two();
        let f = PiecewiseFunction::from_real_coeffs(&sys, Weight::SqrtVanishing, vec![vec![0.5, -0.2], vec![0.1, 0.7, 0.3]])
            .unwrap();
        let theta = ThetaMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, -3.0]]).unwrap();
        let psi = forward_map(&theta, &f, 16).unwrap();
        let cpsi = compute_c(&psi).unwrap();
        let nu = compute_nu(&psi, &cpsi, &theta, RANGE_TOL).unwrap();
        assert!(nu.rel_l2_error(&f).unwrap() < 1e-13);
    }

    #[test]
    fn range2_single_interval() {
        let sys1 = IntervalSystem::new(&[(-1.0, 1.0)]).unwrap();
        let phi = PiecewiseFunction::from_real_coeffs(&sys1, Weight::SqrtVanishing, vec![vec![1.0]]).unwrap();
        let r = residual_range2(&ThetaMatrix::identity(1), &phi, &[c(0.7)]).unwrap();
        assert!((r[0] + 0.7).norm() < 1e-15);
        let zero = PiecewiseFunction::zero(&two(), Weight::SqrtVanishing, 4);
        let r = residual_range2(&ThetaMatrix::uniform(2), &zero, &[c(0.0), c(0.0)]).unwrap();
        assert!(r.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn forward_shift_equals_cross_moments() {
        // c[psi]_m equals the cross moment exactly for psi in the image
        let sys = two();
        let phi = PiecewiseFunction::from_real_coeffs(&sys, Weight::SqrtVanishing, vec![vec![1.0, 0.3], vec![-0.4, 0.0, 0.9]])
            .unwrap();
        let theta = ThetaMatrix::from_rows(&[vec![1.0, 0.5], vec![0.25, 2.0]]).unwrap();
        let psi = forward_map(&theta, &phi, 64).unwrap();
        let cp = compute_c(&psi).unwrap();
        let r = residual_range2(&theta, &phi, &cp).unwrap();
        assert!(r.iter().all(|v| v.norm() < 1e-13), "{r:?}");
    }
}

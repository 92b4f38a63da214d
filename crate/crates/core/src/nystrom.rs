//! Nyström discretization of `(Id - K/lambda) phi = nu` and the direct solver.
//!
//! Unknowns are the smooth parts `p_k = phi_k / w_k` at the interior second-kind
//! Chebyshev nodes of each interval. Dividing the kernel row by `w_j(z)` turns
//! `R_{j+}(z) / (pi i)` into `1/pi`, so for `z` in `I_j` and `x` in `I_k`, `k != j`,
//!
//! `(K phi)(z) / w_j(z) = sum_{k != j} theta_jk / (pi theta_jj) int_{I_k} w_k(x) p_k(x) / (R_j(x) (x - z)) dx`,
//!
//! which the second-kind Gauss–Chebyshev rule integrates spectrally.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Dyn, LU};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::chebyshev::dst_coefficients;
use crate::error::{Error, Result};
use crate::function::{PiecewiseFunction, Weight};
use crate::interval::IntervalSystem;
use crate::quadrature::gauss_chebyshev2;
use crate::theta::{compute_c, compute_nu, residual_range2, ThetaClass, ThetaMatrix};

/// Default number of Nyström nodes per interval.
pub const DEFAULT_NYSTROM: usize = 96;

/// Relative threshold on the smallest singular value.
pub const SINGULAR_TOL: f64 = 1e-10;

/// `theta_jk / (pi theta_jj R_j(x) (x - z))`, the kernel divided by `w_j(z)`.
#[inline]
pub fn reduced_kernel(sys: &IntervalSystem, theta: &ThetaMatrix, j: usize, z: f64, k: usize, x: f64) -> f64 {
    if j == k {
        return 0.0;
    }
    theta.get(j, k) / (PI * theta.get(j, j) * sys.get(j).radical_real(x) * (x - z))
}

/// Assembled and factored matrix of `Id - K/lambda`.
#[derive(Debug, Clone)]
pub struct NystromSystem {
    sys: IntervalSystem,
    theta: ThetaMatrix,
    m: usize,
    lambda: Complex64,
    nodes: Vec<Vec<f64>>,
    unit_weights: Vec<f64>,
    matrix: DMatrix<Complex64>,
    lu: LU<Complex64, Dyn, Dyn>,
}

impl NystromSystem {
    /// Builds the collocation matrix with `m` nodes per interval.
    pub fn assemble(sys: &IntervalSystem, theta: &ThetaMatrix, m: usize, lambda: Complex64) -> Result<Self> {
        if theta.n() != sys.len() {
            return Err(Error::InvalidArgument("theta size does not match the interval count".into()));
        }
        theta.require_invertible_diagonal()?;
        if lambda == Complex64::new(0.0, 0.0) {
            return Err(Error::ZeroLambda);
        }
        if m == 0 {
            return Err(Error::InvalidArgument("at least one Nyström node is required".into()));
        }
        let n = sys.len();
        let (s, unit_weights) = gauss_chebyshev2(m);
        let nodes: Vec<Vec<f64>> = sys.intervals().iter().map(|iv| s.iter().map(|&t| iv.from_unit(t)).collect()).collect();
        let size = n * m;
        let rows: Vec<Vec<Complex64>> = (0..size)
            .into_par_iter()
            .map(|row| {
                let (j, a) = (row / m, row % m);
                let z = nodes[j][a];
                let mut r = vec![Complex64::new(0.0, 0.0); size];
                r[row] = Complex64::new(1.0, 0.0);
                for k in (0..n).filter(|&k| k != j && theta.get(j, k) != 0.0) {
                    let h = sys.get(k).half();
                    for b in 0..m {
                        let x = nodes[k][b];
                        let kv = reduced_kernel(sys, theta, j, z, k, x) * h * h * unit_weights[b];
                        r[k * m + b] -= kv / lambda;
                    }
                }
                r
            })
            .collect();
        let matrix = DMatrix::from_fn(size, size, |i, l| rows[i][l]);
        let lu = matrix.clone().lu();
        Ok(NystromSystem {
            sys: sys.clone(),
            theta: theta.clone(),
            m,
            lambda,
            nodes,
            unit_weights,
            matrix,
            lu,
        })
    }

    pub fn system(&self) -> &IntervalSystem {
        &self.sys
    }

    pub fn theta(&self) -> &ThetaMatrix {
        &self.theta
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    /// Nodes per interval.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn node(&self, j: usize, a: usize) -> f64 {
        self.nodes[j][a]
    }

    /// Second-kind Gauss–Chebyshev weights on `[-1, 1]` (shared by all intervals).
    pub fn unit_weights(&self) -> &[f64] {
        &self.unit_weights
    }

    /// Samples `v(j, x)` at every node in solver order.
    pub fn sample<F: Fn(usize, f64) -> Complex64>(&self, v: F) -> DVector<Complex64> {
        let m = self.m;
        DVector::from_fn(self.size(), |i, _| v(i / m, self.nodes[i / m][i % m]))
    }

    /// Solves `A x = b` by LU with one step of iterative refinement.
    pub fn solve(&self, b: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        let mut x = self
            .lu
            .solve(b)
            .ok_or(Error::NearSingular { sigma_min: 0.0, threshold: 0.0 })?;
        let r = b - &self.matrix * &x;
        if let Some(d) = self.lu.solve(&r) {
            x += d;
        }
        if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NearSingular { sigma_min: 0.0, threshold: 0.0 });
        }
        Ok(x)
    }

    /// Relative residual `||A x - b|| / ||b||`.
    pub fn residual(&self, x: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
        let r = (&self.matrix * x - b).norm();
        let nb = b.norm();
        if nb > 0.0 {
            r / nb
        } else {
            r
        }
    }

    /// Extreme singular values `(sigma_min, sigma_max)` of the matrix in the
    /// `L^2(I)`-orthonormal scaling `D A D^{-1}`, `D = h_k sqrt(omega_b w_k(x_b))`.
    pub fn singular_values(&self) -> (f64, f64) {
        let m = self.m;
        let d: Vec<f64> = (0..self.size())
            .map(|i| {
                let (k, b) = (i / m, i % m);
                let iv = self.sys.get(k);
                iv.half() * (self.unit_weights[b] * iv.weight(self.nodes[k][b])).sqrt()
            })
            .collect();
        let scaled = DMatrix::from_fn(self.size(), self.size(), |i, l| self.matrix[(i, l)] * (d[i] / d[l]));
        let sv = scaled.singular_values();
        (sv.min(), sv.max())
    }

    /// Fails with [`Error::NearSingular`] when `sigma_min < tol * sigma_max`.
    pub fn check_conditioning(&self, tol: f64) -> Result<(f64, f64)> {
        let (lo, hi) = self.singular_values();
        if lo < tol * hi {
            return Err(Error::NearSingular {
                sigma_min: lo,
                threshold: tol * hi,
            });
        }
        Ok((lo, hi))
    }

    /// Turns nodal values of `p = phi / w` into a sqrt-vanishing function.
    pub fn to_function(&self, p: &DVector<Complex64>) -> Result<PiecewiseFunction> {
        let m = self.m;
        let blocks = (0..self.sys.len())
            .map(|k| dst_coefficients(&p.as_slice()[k * m..(k + 1) * m]))
            .collect();
        PiecewiseFunction::from_coeffs(&self.sys, Weight::SqrtVanishing, blocks)
    }
}

/// Numerical parameters of the direct solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub nystrom: usize,
    pub range_tol: f64,
    pub singular_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            nystrom: DEFAULT_NYSTROM,
            range_tol: crate::fht::RANGE_TOL,
            singular_tol: SINGULAR_TOL,
        }
    }
}

/// Diagnostics of [`solve_phi`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolveDiagnostics {
    /// `||(Id - K) p - nu/w|| / ||nu/w||` on the grid.
    pub residual: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Second range residual of the solution.
    pub range2: Vec<Complex64>,
    /// Set when invertibility is certified only numerically.
    pub warning: Option<String>,
}

/// Output of [`solve_phi`].
#[derive(Debug, Clone)]
pub struct PhiSolution {
    pub phi: PiecewiseFunction,
    pub c: Vec<Complex64>,
    pub nu: PiecewiseFunction,
    pub diagnostics: SolveDiagnostics,
}

/// Solves `chi Theta H phi = psi` (modulo the range shift `c[psi]`) by Nyström.
pub fn solve_phi(theta: &ThetaMatrix, psi: &PiecewiseFunction, opts: &SolveOptions) -> Result<PhiSolution> {
    let sys = psi.system();
    theta.require_invertible_diagonal()?;
    let c = compute_c(psi)?;
    let nu = compute_nu(psi, &c, theta, opts.range_tol)?;
    let ny = NystromSystem::assemble(sys, theta, opts.nystrom, Complex64::new(1.0, 0.0))?;
    let (sigma_min, sigma_max) = ny.check_conditioning(opts.singular_tol)?;
    let rhs = ny.sample(|k, x| nu.eval_smooth(k, x));
    let p = ny.solve(&rhs)?;
    let residual = ny.residual(&p, &rhs);
    let mut phi = ny.to_function(&p)?;
    if psi.is_real() {
        phi = phi.into_real();
    }
    let range2 = residual_range2(theta, &phi, &c)?;
    let warning = match theta.class() {
        ThetaClass::SpdSymmetric => None,
        other => Some(format!(
            "theta is {}; invertibility of Id - K is certified only numerically (sigma_min = {sigma_min:.3e})",
            other.name()
        )),
    };
    Ok(PhiSolution {
        phi,
        c,
        nu,
        diagnostics: SolveDiagnostics {
            residual,
            sigma_min,
            sigma_max,
            range2,
            warning,
        },
    })
}

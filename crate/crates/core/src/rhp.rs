//! The matrix Riemann–Hilbert solution `Gamma(z; lambda)` built from the Fredholm
//! solve, its boundary values and jump, the resolvent kernel, resolvent-based
//! inversion, and the range conditions expressed through `Gamma`.
//!
//! Kernel vectors: on `I_k`, `f = -2 R_{k+} e_k` and `g_j = theta_jk / (theta_jj R_j)`
//! for `j != k`, `g_k = 0`, so that `K(z, x) = f^t(z) g(x) / (2 pi i (z - x))`.
//! With `F_a = (Id - K/lambda)^{-1} f_a = w P_a`,
//!
//! `Gamma_ab(z) = delta_ab - (1/(2 i lambda)) sum_{k != b} H_k[w_k (theta_bk/theta_bb) P_a / R_b](z)`,
//!
//! where each density is smooth on `I_k` and is transformed by the closed forms of
//! [`crate::fht`].

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::chebyshev::{dst_coefficients, eval_u};
use crate::error::{Error, Result};
use crate::fht::{cauchy_sqrt, cauchy_sqrt_derivative};
use crate::function::{PiecewiseFunction, Weight};
use crate::interval::{IntervalSystem, Side};
use crate::nystrom::{NystromSystem, SolveOptions};
use crate::quadrature::gauss_chebyshev2;
use crate::theta::{compute_c, compute_nu, cross_moments, ThetaMatrix};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// The integrable-kernel vectors `f` and `g`.
#[derive(Debug, Clone)]
pub struct KernelVectors {
    sys: IntervalSystem,
    theta: ThetaMatrix,
}

impl KernelVectors {
    pub fn new(sys: &IntervalSystem, theta: &ThetaMatrix) -> Result<Self> {
        if theta.n() != sys.len() {
            return Err(Error::InvalidArgument("theta size does not match the interval count".into()));
        }
        theta.require_invertible_diagonal()?;
        let kv = KernelVectors {
            sys: sys.clone(),
            theta: theta.clone(),
        };
        // f^t g vanishes on every interval
        for (k, iv) in sys.intervals().iter().enumerate() {
            let x = iv.center();
            let (f, g) = (kv.f(k, x), kv.g(k, x));
            let dot: Complex64 = f.iter().zip(g.iter()).map(|(a, b)| a * b).sum();
            if dot.norm() > 1e-14 * (1.0 + f.norm() * g.norm()) {
                return Err(Error::InvalidArgument(format!("kernel vectors are not orthogonal on interval {k}")));
            }
        }
        Ok(kv)
    }

    /// `f(x)` for `x` in interval `k` (boundary value from above).
    pub fn f(&self, k: usize, x: f64) -> DVector<Complex64> {
        let mut v = DVector::from_element(self.sys.len(), ZERO);
        v[k] = Complex64::new(0.0, -2.0 * self.sys.get(k).weight(x));
        v
    }

    /// `g(x)` for `x` in interval `k`.
    pub fn g(&self, k: usize, x: f64) -> DVector<Complex64> {
        let n = self.sys.len();
        DVector::from_fn(n, |j, _| {
            if j == k {
                ZERO
            } else {
                Complex64::new(self.theta.get(j, k) / (self.theta.get(j, j) * self.sys.get(j).radical_real(x)), 0.0)
            }
        })
    }

    /// `f^t(x) g(x)` at `x` in interval `k`.
    pub fn orthogonality(&self, k: usize, x: f64) -> Complex64 {
        self.f(k, x).iter().zip(self.g(k, x).iter()).map(|(a, b)| a * b).sum()
    }
}

/// Builds `f` and `g`, checking `f^t g = 0`.
pub fn build_kernel_vectors(sys: &IntervalSystem, theta: &ThetaMatrix) -> Result<KernelVectors> {
    KernelVectors::new(sys, theta)
}

/// `Gamma(z; lambda)` with its boundary values, inverse and resolvent.
#[derive(Debug, Clone)]
pub struct GammaSolution {
    sys: IntervalSystem,
    theta: ThetaMatrix,
    lambda: Complex64,
    kernel: KernelVectors,
    nystrom: NystromSystem,
    /// `P_a = F_a / w` at the Nyström nodes, one vector per column index `a`.
    p: Vec<DVector<Complex64>>,
    /// U coefficients of the densities, indexed `[a][b][k]` (empty for `k == b`).
    dens: Vec<Vec<Vec<Vec<Complex64>>>>,
    sigma_min: f64,
    sigma_max: f64,
}

impl GammaSolution {
    /// Solves for `F` with `m` nodes per interval and prepares the Cauchy densities.
    pub fn build(sys: &IntervalSystem, theta: &ThetaMatrix, lambda: Complex64, m: usize, singular_tol: f64) -> Result<Self> {
        let kernel = KernelVectors::new(sys, theta)?;
        let nystrom = NystromSystem::assemble(sys, theta, m, lambda)?;
        let (sigma_min, sigma_max) = nystrom.check_conditioning(singular_tol)?;
        let n = sys.len();
        let p: Vec<DVector<Complex64>> = (0..n)
            .map(|a| {
                let q = nystrom.sample(|k, _| if k == a { Complex64::new(0.0, -2.0) } else { ZERO });
                nystrom.solve(&q)
            })
            .collect::<Result<_>>()?;
        let dens = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        (0..n)
                            .map(|k| {
                                if k == b {
                                    return Vec::new();
                                }
                                let scale = theta.get(b, k) / theta.get(b, b);
                                let vals: Vec<Complex64> = (0..m)
                                    .map(|i| {
                                        let x = nystrom.node(k, i);
                                        p[a][k * m + i] * (scale / sys.get(b).radical_real(x))
                                    })
                                    .collect();
                                dst_coefficients(&vals)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(GammaSolution {
            sys: sys.clone(),
            theta: theta.clone(),
            lambda,
            kernel,
            nystrom,
            p,
            dens,
            sigma_min,
            sigma_max,
        })
    }

    /// [`GammaSolution::build`] at `lambda = 1` with default options.
    pub fn at_one(sys: &IntervalSystem, theta: &ThetaMatrix, opts: &SolveOptions) -> Result<Self> {
        Self::build(sys, theta, ONE, opts.nystrom, opts.singular_tol)
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

    pub fn kernel(&self) -> &KernelVectors {
        &self.kernel
    }

    pub fn nystrom(&self) -> &NystromSystem {
        &self.nystrom
    }

    /// Smallest and largest singular value of the scaled `Id - K/lambda`.
    pub fn singular_values(&self) -> (f64, f64) {
        (self.sigma_min, self.sigma_max)
    }

    /// Nodal values of `F_a / w` (solver ordering).
    pub fn f_solution(&self, a: usize) -> &DVector<Complex64> {
        &self.p[a]
    }

    /// `||(Id - K/lambda) F_a - f_a|| / ||f_a||`, maximized over `a`.
    pub fn solve_residual(&self) -> f64 {
        (0..self.sys.len())
            .map(|a| {
                let q = self.nystrom.sample(|k, _| if k == a { Complex64::new(0.0, -2.0) } else { ZERO });
                self.nystrom.residual(&self.p[a], &q)
            })
            .fold(0.0, f64::max)
    }

    /// `F_a(x)` at an arbitrary point of interval `k`, through the Nyström interpolant
    /// `F = f + K F / lambda`.
    pub fn f_at(&self, a: usize, k: usize, x: f64) -> Complex64 {
        let m = self.nystrom.m();
        let mut acc = if k == a { Complex64::new(0.0, -2.0) } else { ZERO };
        for l in (0..self.sys.len()).filter(|&l| l != k && self.theta.get(k, l) != 0.0) {
            let h = self.sys.get(l).half();
            for b in 0..m {
                let y = self.nystrom.node(l, b);
                let kv = crate::nystrom::reduced_kernel(&self.sys, &self.theta, k, x, l, y) * h * h * self.nystrom.unit_weights()[b];
                acc += self.p[a][l * m + b] * kv / self.lambda;
            }
        }
        acc * self.sys.get(k).weight(x)
    }

    fn locate_side(&self, z: Complex64, side: Side) -> Result<Option<usize>> {
        if z.im != 0.0 {
            return Ok(None);
        }
        if self.sys.is_endpoint(z.re) {
            return Err(Error::Endpoint(z.re));
        }
        match self.sys.locate(z.re) {
            Some(k) if side == Side::OffCut => Err(Error::Domain(format!(
                "z = {} lies on interval {k}; choose a side",
                z.re
            ))),
            other => Ok(other),
        }
    }

    /// `Gamma(z)`, or `Gamma_{+/-}(x)` for real `x` on the contour.
    pub fn eval(&self, z: Complex64, side: Side) -> Result<DMatrix<Complex64>> {
        self.locate_side(z, side)?;
        let n = self.sys.len();
        let mut out = DMatrix::from_element(n, n, ZERO);
        let pref = -1.0 / (2.0 * I * self.lambda);
        for a in 0..n {
            for b in 0..n {
                let mut acc = ZERO;
                for k in (0..n).filter(|&k| k != b) {
                    acc += cauchy_sqrt(&self.sys.get(k), &self.dens[a][b][k], z, side)?;
                }
                out[(a, b)] = if a == b { ONE } else { ZERO } + pref * acc;
            }
        }
        Ok(out)
    }

    /// Column `b` of `Gamma`.
    pub fn column(&self, b: usize, z: Complex64, side: Side) -> Result<DVector<Complex64>> {
        self.locate_side(z, side)?;
        let n = self.sys.len();
        let pref = -1.0 / (2.0 * I * self.lambda);
        let mut out = DVector::from_element(n, ZERO);
        for a in 0..n {
            let mut acc = ZERO;
            for k in (0..n).filter(|&k| k != b) {
                acc += cauchy_sqrt(&self.sys.get(k), &self.dens[a][b][k], z, side)?;
            }
            out[a] = if a == b { ONE } else { ZERO } + pref * acc;
        }
        Ok(out)
    }

    /// `d Gamma / dz` (boundary value derivative on the contour).
    pub fn derivative(&self, z: Complex64, side: Side) -> Result<DMatrix<Complex64>> {
        self.locate_side(z, side)?;
        let n = self.sys.len();
        let pref = -1.0 / (2.0 * I * self.lambda);
        let mut out = DMatrix::from_element(n, n, ZERO);
        for a in 0..n {
            for b in 0..n {
                let mut acc = ZERO;
                for k in (0..n).filter(|&k| k != b) {
                    acc += cauchy_sqrt_derivative(&self.sys.get(k), &self.dens[a][b][k], z, side)?;
                }
                out[(a, b)] = pref * acc;
            }
        }
        Ok(out)
    }

    /// `Gamma^{-1}` by direct inversion.
    pub fn inverse(&self, z: Complex64, side: Side) -> Result<DMatrix<Complex64>> {
        let g = self.eval(z, side)?;
        g.try_inverse().ok_or(Error::NearSingular {
            sigma_min: 0.0,
            threshold: 0.0,
        })
    }

    /// The jump matrix `V = Id - f g^t / lambda` at `x` in interval `k`.
    pub fn jump_matrix(&self, k: usize, x: f64) -> DMatrix<Complex64> {
        let f = self.kernel.f(k, x);
        let g = self.kernel.g(k, x);
        DMatrix::identity(self.sys.len(), self.sys.len()) - f * g.transpose() / self.lambda
    }

    /// `max ||Gamma_+ - Gamma_- V||` over the given contour points.
    pub fn verify_jump(&self, points: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &x in points {
            let k = self
                .sys
                .locate(x)
                .ok_or_else(|| Error::Domain(format!("x = {x} is not inside an interval")))?;
            let z = Complex64::new(x, 0.0);
            let gp = self.eval(z, Side::Above)?;
            let gm = self.eval(z, Side::Below)?;
            worst = worst.max((gp - gm * self.jump_matrix(k, x)).norm());
        }
        Ok(worst)
    }

    /// `R(z, x; lambda) = g^t(x) Gamma^{-1}(x) Gamma(z) f(z) / (2 pi i lambda (z - x))`
    /// for contour points `z`, `x`. At `z == x` the finite limit is returned when
    /// `limit` is set, otherwise [`Error::Coincidence`].
    pub fn resolvent_kernel(&self, z: f64, x: f64, side: Side, limit: bool) -> Result<Complex64> {
        let kz = self.sys.locate(z).ok_or_else(|| Error::Domain(format!("z = {z} is not inside an interval")))?;
        let kx = self.sys.locate(x).ok_or_else(|| Error::Domain(format!("x = {x} is not inside an interval")))?;
        let row = self.kernel.g(kx, x).transpose() * self.inverse(Complex64::new(x, 0.0), side)?;
        let denom = 2.0 * PI * I * self.lambda;
        if z == x {
            if !limit {
                return Err(Error::Coincidence(z));
            }
            // d/dz [Gamma(z) f(z)] with f = -2 R_{k+} e_k, R' = (z - center) / R
            let zc = Complex64::new(z, 0.0);
            let iv = self.sys.get(kz);
            let r = Complex64::new(0.0, iv.weight(z));
            let dr = (z - iv.center()) / r;
            let col = self.column(kz, zc, side)?;
            let dcol = self.derivative(zc, side)?.column(kz).into_owned();
            let dgf = (dcol * r + col * dr) * Complex64::new(-2.0, 0.0);
            return Ok((row * dgf)[0] / denom);
        }
        let r = Complex64::new(0.0, self.sys.get(kz).weight(z));
        let gf = self.column(kz, Complex64::new(z, 0.0), side)? * (r * -2.0);
        Ok((row * gf)[0] / (denom * (z - x)))
    }
}

/// Output of [`invert_via_resolvent`].
#[derive(Debug, Clone)]
pub struct ResolventInversion {
    pub phi: PiecewiseFunction,
    pub c: Vec<Complex64>,
    pub nu: PiecewiseFunction,
}

/// Row vector `g^t(x) Gamma_+^{-1}(x)` at every Nyström node.
fn g_gamma_inv_rows(gamma: &GammaSolution) -> Result<Vec<DVector<Complex64>>> {
    let ny = gamma.nystrom();
    let m = ny.m();
    (0..ny.size())
        .into_par_iter()
        .map(|i| {
            let (k, b) = (i / m, i % m);
            let x = ny.node(k, b);
            let inv = gamma.inverse(Complex64::new(x, 0.0), Side::Above)?;
            Ok((gamma.kernel().g(k, x).transpose() * inv).transpose())
        })
        .collect()
}

/// `phi = nu + R nu` at `lambda = 1`, assembled component-wise: for `z` in `I_m`,
///
/// `phi_m(z) / w_m(z) = nu_m(z) / w_m(z) + (1/pi) sum_k int_{I_k} [g^t Gamma^{-1}(x) Gamma(z)]_m nu_k(x) / (x - z) dx`.
///
/// The outer nodes interlace the quadrature nodes, so the removable diagonal
/// singularity of the kernel is never sampled.
pub fn invert_via_resolvent(gamma: &GammaSolution, psi: &PiecewiseFunction, range_tol: f64) -> Result<ResolventInversion> {
    let sys = gamma.system();
    let theta = gamma.theta();
    let c = compute_c(psi)?;
    let nu = compute_nu(psi, &c, theta, range_tol)?;
    let phi = resolvent_apply(gamma, &nu)?;
    let phi = if psi.is_real() { phi.into_real() } else { phi };
    debug_assert_eq!(phi.system(), sys);
    Ok(ResolventInversion { phi, c, nu })
}

/// `(Id + R) nu` for a sqrt-vanishing `nu`.
pub fn resolvent_apply(gamma: &GammaSolution, nu: &PiecewiseFunction) -> Result<PiecewiseFunction> {
    let sys = gamma.system();
    let ny = gamma.nystrom();
    let m = ny.m();
    let n = sys.len();
    let rows = g_gamma_inv_rows(gamma)?;
    let weights = ny.unit_weights();
    // nu_k / w_k times quadrature weight, at the quadrature nodes
    let nu_w: Vec<Complex64> = (0..ny.size())
        .map(|i| {
            let (k, b) = (i / m, i % m);
            let h = sys.get(k).half();
            nu.eval_smooth(k, ny.node(k, b)) * (h * h * weights[b])
        })
        .collect();
    let (s_out, _) = gauss_chebyshev2(m + 1);
    let blocks: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|mm| -> Result<Vec<Complex64>> {
            let iv = sys.get(mm);
            s_out
                .iter()
                .map(|&s| {
                    let z = iv.from_unit(s);
                    let col = gamma.column(mm, Complex64::new(z, 0.0), Side::Above)?;
                    let mut acc = ZERO;
                    for i in 0..ny.size() {
                        let x = ny.node(i / m, i % m);
                        let v = rows[i].dot(&col);
                        acc += v * nu_w[i] / (x - z);
                    }
                    Ok(nu.eval_smooth(mm, z) + acc / PI)
                })
                .collect::<Result<Vec<_>>>()
                .map(|vals| dst_coefficients(&vals))
        })
        .collect::<Result<_>>()?;
    PiecewiseFunction::from_coeffs(sys, Weight::SqrtVanishing, blocks)
}

/// `W_km(x) = sum_{j != k} theta_kj / theta_jj * Gamma^{-1}_{jm}(x) / R_j(x)` for
/// `x` in `I_k`, returned as a vector over `m`.
fn weight_row(gamma: &GammaSolution, k: usize, x: f64, inv: &DMatrix<Complex64>) -> DVector<Complex64> {
    let sys = gamma.system();
    let theta = gamma.theta();
    let n = sys.len();
    DVector::from_fn(n, |m, _| {
        let mut acc = ZERO;
        for j in (0..n).filter(|&j| j != k) {
            acc += inv[(j, m)] * (theta.get(k, j) / (theta.get(j, j) * sys.get(j).radical_real(x)));
        }
        acc
    })
}

/// `sum_k int_{I_k} W_km(x) s_k(x) dx` for every `m`, where `s = w * smooth(k, x)`;
/// the `k == m` block is skipped unless `all` is set.
fn weighted_moments<F>(gamma: &GammaSolution, smooth: F, adjugate: bool, all: bool) -> Result<Vec<Complex64>>
where
    F: Fn(usize, f64) -> Complex64,
{
    let sys = gamma.system();
    let ny = gamma.nystrom();
    let m = ny.m();
    let n = sys.len();
    let weights = ny.unit_weights();
    let mut out = vec![ZERO; n];
    for k in 0..n {
        let h = sys.get(k).half();
        for b in 0..m {
            let x = ny.node(k, b);
            let g = gamma.eval(Complex64::new(x, 0.0), Side::Above)?;
            let inv = if adjugate { adjugate_inverse(&g) } else { g.try_inverse().ok_or(Error::NearSingular { sigma_min: 0.0, threshold: 0.0 })? };
            let w = weight_row(gamma, k, x, &inv);
            let s = smooth(k, x) * (h * h * weights[b]);
            for (mm, o) in out.iter_mut().enumerate() {
                if all || mm != k {
                    *o += w[mm] * s;
                }
            }
        }
    }
    Ok(out)
}

/// Inverse through the adjugate, assuming `det = 1`.
fn adjugate_inverse(g: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = g.nrows();
    if n == 1 {
        return DMatrix::from_element(1, 1, ONE);
    }
    DMatrix::from_fn(n, n, |i, j| {
        let minor = g.clone().remove_row(j).remove_column(i);
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        minor.determinant() * sign
    })
}

/// Predicted `c` from the second necessary condition for symmetric `theta`:
/// `c_m = (theta_mm / pi) sum_k int_{I_k} [Theta_o Theta_d^{-1} R^{-1} Gamma^{-1}]_km nu_k`.
///
/// The sum runs over every interval: `g^t Gamma^{-1} e_m` does not vanish on `I_m`,
/// and dropping that block shifts the prediction by a few percent on generic data.
pub fn range_condition_n2(gamma: &GammaSolution, nu: &PiecewiseFunction) -> Result<Vec<Complex64>> {
    n2_impl(gamma, nu, false)
}

/// [`range_condition_n2`] with `Gamma^{-1}` replaced by the adjugate of `Gamma`
/// (exact when `det Gamma = 1`).
pub fn range_condition_n2_adjugate(gamma: &GammaSolution, nu: &PiecewiseFunction) -> Result<Vec<Complex64>> {
    n2_impl(gamma, nu, true)
}

fn n2_impl(gamma: &GammaSolution, nu: &PiecewiseFunction, adjugate: bool) -> Result<Vec<Complex64>> {
    let theta = gamma.theta();
    if !theta.is_symmetric() {
        return Err(Error::Symmetry(theta.max_asymmetry()));
    }
    let mom = weighted_moments(gamma, |k, x| nu.eval_smooth(k, x), adjugate, true)?;
    Ok(mom.iter().enumerate().map(|(m, v)| v * (theta.get(m, m) / PI)).collect())
}

/// Two-interval form of [`range_condition_n2`], written with entries of `Gamma`
/// only (`det Gamma = 1`), for `m != k`:
///
/// `c_m = (theta_km/pi) int_{I_k} Gamma_kk nu_k / R_m - (theta_mm theta_mk / (theta_kk pi)) int_{I_m} Gamma_km nu_m / R_k`.
pub fn range_condition_n2_pair(gamma: &GammaSolution, nu: &PiecewiseFunction) -> Result<[Complex64; 2]> {
    let sys = gamma.system();
    let theta = gamma.theta();
    if sys.len() != 2 {
        return Err(Error::InvalidArgument("the two-interval form needs exactly two intervals".into()));
    }
    if !theta.is_symmetric() {
        return Err(Error::Symmetry(theta.max_asymmetry()));
    }
    let ny = gamma.nystrom();
    let weights = ny.unit_weights();
    // integrals over I_l of Gamma_(row, col) nu_l / R_other
    let moment = |l: usize, row: usize, col: usize| -> Result<Complex64> {
        let h = sys.get(l).half();
        let mut acc = ZERO;
        for (b, &wb) in weights.iter().enumerate() {
            let x = ny.node(l, b);
            let g = gamma.eval(Complex64::new(x, 0.0), Side::Above)?;
            acc += g[(row, col)] * nu.eval_smooth(l, x) * (h * h * wb / sys.get(1 - l).radical_real(x));
        }
        Ok(acc)
    };
    let mut out = [ZERO; 2];
    for (m, o) in out.iter_mut().enumerate() {
        let k = 1 - m;
        let cross = moment(k, k, k)? * theta.get(k, m);
        let own = moment(m, k, m)? * (theta.get(m, m) * theta.get(m, k) / theta.get(k, k));
        *o = (cross - own) / PI;
    }
    Ok(out)
}

/// Predicted `c = J_1 + J_2`: `J_1` is the cross moment of `nu`, `J_2` the cross
/// moment of `R nu`. Valid for any theta with invertible diagonal.
pub fn range_condition_j12(gamma: &GammaSolution, nu: &PiecewiseFunction) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let theta = gamma.theta();
    let j1 = cross_moments(theta, nu)?;
    let phi = resolvent_apply(gamma, nu)?;
    let rnu = phi.sub(nu)?;
    let j2 = cross_moments(theta, &rnu)?;
    Ok((j1, j2))
}

/// Residual of the bounded-data form of the second condition, per component:
/// `i int_{I_m} psi_m / R_{m+} + theta_mm sum_{k != m} int_{I_k} [R Theta_d^{-1} Theta_o Theta_d^{-1} R^{-1} Gamma^{-1}]_km H_k[psi_k / R_k]`.
pub fn range_check_l1(gamma: &GammaSolution, psi: &PiecewiseFunction) -> Result<Vec<Complex64>> {
    let sys = gamma.system();
    let theta = gamma.theta();
    if psi.weight() != Weight::Plain {
        return Err(Error::SingularData("data must be bounded (plain) for the L1 form".into()));
    }
    // R_{k+} H_k[psi_k / R_{k+}] = w_k (1/h_k) sum_{l>=1} c_l U_{l-1}
    let smooth = |k: usize, x: f64| -> Complex64 {
        let c = psi.coeffs(k);
        if c.len() < 2 {
            return ZERO;
        }
        let iv = sys.get(k);
        eval_u(&c[1..], iv.to_unit(x)) / (iv.half() * theta.get(k, k))
    };
    let mom = weighted_moments(gamma, smooth, false, true)?;
    Ok((0..sys.len())
        .map(|m| {
            let c0 = psi.coeffs(m).first().copied().unwrap_or(ZERO);
            // i int psi/R_+ = pi c_0
            c0 * PI + mom[m] * theta.get(m, m)
        })
        .collect())
}

/// Residual of the condition for data already in the range (`c[psi] = 0`):
/// `sum_{k != m} int_{I_k} [Theta_d^{-1} Theta_o Theta_d^{-1} R^{-1} Gamma^{-1}]_km H_k^{-1}[psi_k]`.
pub fn range_check_c0(gamma: &GammaSolution, psi: &PiecewiseFunction, range_tol: f64) -> Result<Vec<Complex64>> {
    let sys = gamma.system();
    let theta = gamma.theta();
    let hinv = crate::fht::fht_invert(psi, range_tol)?;
    let smooth = |k: usize, x: f64| hinv.eval_smooth(k, x) / theta.get(k, k);
    let _ = sys;
    weighted_moments(gamma, smooth, false, true)
}

//! The bilinear form `J(f, g) = (1/(2 pi)) sum_{j,k} theta_jk int |xi| f~_k(xi) conj(g~_j(xi)) dxi`
//! with `f~(xi) = int f(x) e^{i x xi} dx`, and the injectivity diagnostics built on it.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chebyshev::{cheb1_nodes, eval_t};
use crate::error::{Error, Result};
use crate::fht::cauchy_sqrt;
use crate::function::{PiecewiseFunction, Weight};
use crate::interval::{IntervalSystem, Side};
use crate::nystrom::NystromSystem;
use crate::quadrature::gauss_chebyshev2;
use crate::theta::{ThetaClass, ThetaMatrix};

/// Truncated, uniformly sampled frequency axis for [`bilinear_form_j`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierGrid {
    pub half_width: f64,
    pub points: usize,
}

impl Default for FourierGrid {
    fn default() -> Self {
        FourierGrid {
            half_width: 200.0,
            points: 1 << 14,
        }
    }
}

impl FourierGrid {
    fn step(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }
}

fn require_sqrt(f: &PiecewiseFunction) -> Result<()> {
    if f.weight() != Weight::SqrtVanishing {
        return Err(Error::InvalidArgument("the bilinear form needs sqrt-vanishing data".into()));
    }
    Ok(())
}

/// `f~_k(xi)` on the grid for every interval, by Chebyshev-2 quadrature in `x`
/// with the phase advanced by a recurrence in `xi`.
fn fourier_samples(f: &PiecewiseFunction, grid: &FourierGrid) -> Vec<Vec<Complex64>> {
    let sys = f.system();
    let dxi = grid.step();
    (0..sys.len())
        .into_par_iter()
        .map(|k| {
            let iv = sys.get(k);
            let h = iv.half();
            let q = (h * grid.half_width).ceil() as usize + f.modes(k) + 64;
            let (s, w) = gauss_chebyshev2(q);
            let mut out = vec![Complex64::new(0.0, 0.0); grid.points];
            for (&si, &wi) in s.iter().zip(&w) {
                let x = iv.from_unit(si);
                let amp = f.eval_smooth(k, x) * (h * h * wi);
                let step = Complex64::from_polar(1.0, x * dxi);
                let mut phase = Complex64::from_polar(1.0, -x * grid.half_width);
                for o in out.iter_mut() {
                    *o += amp * phase;
                    phase *= step;
                }
            }
            out
        })
        .collect()
}

/// `J(f, g)` on a truncated frequency grid (trapezoid rule), real part.
pub fn bilinear_form_j(theta: &ThetaMatrix, f: &PiecewiseFunction, g: &PiecewiseFunction, grid: &FourierGrid) -> Result<f64> {
    require_sqrt(f)?;
    require_sqrt(g)?;
    if f.system() != g.system() || theta.n() != f.system().len() {
        return Err(Error::InvalidArgument("f, g and theta must share one interval system".into()));
    }
    let ft = fourier_samples(f, grid);
    let gt = if std::ptr::eq(f, g) { ft.clone() } else { fourier_samples(g, grid) };
    let dxi = grid.step();
    let n = theta.n();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            let t = theta.get(j, k);
            if t == 0.0 {
                continue;
            }
            let mut s = Complex64::new(0.0, 0.0);
            for (i, (a, b)) in ft[k].iter().zip(&gt[j]).enumerate() {
                let xi = -grid.half_width + i as f64 * dxi;
                let end = if i == 0 || i + 1 == grid.points { 0.5 } else { 1.0 };
                s += a * b.conj() * (xi.abs() * end);
            }
            acc += s * t;
        }
    }
    Ok((acc * dxi / (2.0 * PI)).re)
}

/// `J(f, g) = sum_j int_{I_j} g_j'(y) (Theta H f)_j(y) dy`, evaluated with the closed
/// forms of the Hilbert transform and Chebyshev-1 quadrature against the `1/w`
/// singularity of `g'`. Used as a reference for [`bilinear_form_j`].
pub fn bilinear_form_j_spatial(theta: &ThetaMatrix, f: &PiecewiseFunction, g: &PiecewiseFunction) -> Result<Complex64> {
    require_sqrt(f)?;
    require_sqrt(g)?;
    let sys = f.system();
    let n = sys.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let iv = sys.get(j);
        let b = g.coeffs(j);
        // g_j' sqrt(1 - s^2) = -sum b_l (l+1) T_{l+1}(s)
        let mut dg = vec![Complex64::new(0.0, 0.0); b.len() + 1];
        for (l, bl) in b.iter().enumerate() {
            dg[l + 1] = -bl * (l + 1) as f64;
        }
        let q = f.max_modes() + b.len() + 64;
        for s in cheb1_nodes(q) {
            let y = Complex64::new(iv.from_unit(s), 0.0);
            let mut hf = Complex64::new(0.0, 0.0);
            for k in 0..n {
                let t = theta.get(j, k);
                if t != 0.0 {
                    hf += cauchy_sqrt(&sys.get(k), f.coeffs(k), y, Side::OffCut)? * t;
                }
            }
            // dy = h ds, and the Chebyshev-1 rule absorbs 1/sqrt(1 - s^2)
            acc += eval_t(&dg, s) * hf * (iv.half() * PI / q as f64);
        }
    }
    Ok(acc)
}

/// Numerical evidence for injectivity of `Id - K` and positivity of `J`.
#[derive(Debug, Clone)]
pub struct InjectivityReport {
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// `min J(f, f) / ||f||^2` over the random samples.
    pub j_min_ratio: f64,
    pub samples: usize,
    pub class: ThetaClass,
    pub caveat: Option<String>,
}

/// Smallest singular value of `Id - K` at `nystrom` nodes per interval, and the
/// minimum of `J(f, f) / ||f||^2` over `samples` seeded random sqrt-vanishing `f`.
pub fn injectivity_report(
    theta: &ThetaMatrix,
    sys: &IntervalSystem,
    nystrom: usize,
    samples: usize,
    seed: u64,
    grid: &FourierGrid,
) -> Result<InjectivityReport> {
    let ny = NystromSystem::assemble(sys, theta, nystrom, Complex64::new(1.0, 0.0))?;
    let (sigma_min, sigma_max) = ny.singular_values();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut j_min_ratio = f64::INFINITY;
    for _ in 0..samples {
        let f = random_sqrt_function(sys, 8, &mut rng)?;
        let j = bilinear_form_j(theta, &f, &f, grid)?;
        j_min_ratio = j_min_ratio.min(j / f.l2_norm().powi(2));
    }
    let class = theta.class();
    let caveat = match class {
        ThetaClass::SpdSymmetric => None,
        other => Some(format!(
            "theta is {}; invertibility of Id - K is established numerically only",
            other.name()
        )),
    };
    Ok(InjectivityReport {
        sigma_min,
        sigma_max,
        j_min_ratio,
        samples,
        class,
        caveat,
    })
}

/// Random real sqrt-vanishing function with `modes` U coefficients per interval,
/// coefficients uniform in `[-1, 1]` and damped like `1/(l+1)`.
pub fn random_sqrt_function<R: Rng>(sys: &IntervalSystem, modes: usize, rng: &mut R) -> Result<PiecewiseFunction> {
    let blocks = (0..sys.len())
        .map(|_| (0..modes).map(|l| rng.random_range(-1.0..1.0) / (l + 1) as f64).collect())
        .collect();
    PiecewiseFunction::from_real_coeffs(sys, Weight::SqrtVanishing, blocks)
}

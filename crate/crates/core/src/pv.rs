//! Adaptive-quadrature reference values for Cauchy integrals over one interval.
//!
//! These routines share nothing with the spectral transforms and serve as an
//! independent check on them.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::quadrature::adaptive;

const TOL: f64 = 1e-13;

/// Principal value `(1/pi) PV int_I f(t) / (t - z) dt` for `z` strictly inside `I`.
///
/// The symmetric window `|t - z| < eps` is folded onto `(0, eps)`, where
/// `(f(z + u) - f(z - u)) / u` is regular; the remaining pieces are ordinary
/// integrals handled by adaptive Gauss–Kronrod with bisection towards the endpoints.
pub fn pv_oracle<F: Fn(f64) -> f64>(f: F, iv: &Interval, z: f64) -> Result<f64> {
    if !iv.contains_open(z) {
        return Err(Error::Domain(format!("z = {z} is not inside [{}, {}]", iv.alpha, iv.beta)));
    }
    let eps = 0.5 * (z - iv.alpha).min(iv.beta - z);
    let scale = adaptive(&|t: f64| f(t).abs(), iv.alpha, iv.beta, 1e-12, 1e-10)?.max(1e-300);
    let tol = TOL * scale;
    let left = adaptive(&|t: f64| f(t) / (t - z), iv.alpha, z - eps, tol, TOL)?;
    let right = adaptive(&|t: f64| f(t) / (t - z), z + eps, iv.beta, tol, TOL)?;
    let inner = adaptive(&|u: f64| (f(z + u) - f(z - u)) / u, 0.0, eps, tol, TOL)?;
    Ok((left + right + inner) / PI)
}

/// Complex-valued version of [`pv_oracle`].
pub fn pv_oracle_complex<F: Fn(f64) -> Complex64>(f: F, iv: &Interval, z: f64) -> Result<Complex64> {
    let re = pv_oracle(|t| f(t).re, iv, z)?;
    let im = pv_oracle(|t| f(t).im, iv, z)?;
    Ok(Complex64::new(re, im))
}

/// `(1/pi) int_I f(t) / (t - z) dt` for `z` off the interval (regular integrand).
pub fn cauchy_oracle<F: Fn(f64) -> f64>(f: F, iv: &Interval, z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re >= iv.alpha && z.re <= iv.beta {
        return Err(Error::Domain(format!("z = {} lies on the interval", z.re)));
    }
    let kernel = |t: f64| 1.0 / (Complex64::new(t, 0.0) - z);
    let re = adaptive(&|t: f64| f(t) * kernel(t).re, iv.alpha, iv.beta, 1e-14, TOL)?;
    let im = adaptive(&|t: f64| f(t) * kernel(t).im, iv.alpha, iv.beta, 1e-14, TOL)?;
    Ok(Complex64::new(re, im) / PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let iv = Interval::new(-1.0, 1.0).unwrap();
        let v = pv_oracle(|t| (1.0 - t * t).sqrt(), &iv, 0.3).unwrap();
        assert!((v + 0.3).abs() < 1e-11, "{v}");
        assert_eq!(pv_oracle(|_| 0.0, &iv, 0.1).unwrap(), 0.0);
        let v = pv_oracle(|_| 1.0, &iv, 0.5).unwrap();
        assert!((v - (0.5f64 / 1.5).ln() / PI).abs() < 1e-12);
        assert!((v + 3f64.ln() / PI).abs() < 1e-12);
        assert!(pv_oracle(|_| 1.0, &iv, 1.0).is_err());
    }

    #[test]
    fn near_endpoints_and_shifted_interval() {
        let iv = Interval::new(2.0, 5.0).unwrap();
        // f = (x - 2)(5 - x): H f = -(x - 3.5)(...) checked through the antiderivative
        for &z in &[2.001, 3.3, 4.999] {
            let f = |t: f64| (t - 2.0) * (5.0 - t);
            let exact = {
                // int f/(t-z) = int (f(t)-f(z))/(t-z) + f(z) ln((5-z)/(z-2))
                // f(t) - f(z) = -(t - z)(t + z - 7)
                let poly = -((25.0 - 4.0) / 2.0 + (z - 7.0) * 3.0);
                (poly + f(z) * ((5.0 - z) / (z - 2.0)).ln()) / PI
            };
            let v = pv_oracle(f, &iv, z).unwrap();
            assert!((v - exact).abs() < 1e-11, "z={z}: {v} vs {exact}");
        }
    }

    #[test]
    fn off_interval() {
        let iv = Interval::new(-1.0, 1.0).unwrap();
        let z = Complex64::new(2.0, 0.0);
        let v = cauchy_oracle(|_| 1.0, &iv, z).unwrap();
        assert!((v.re - (1.0f64 / 3.0).ln() / PI).abs() < 1e-13);
        let z = Complex64::new(0.2, 0.5);
        let v = cauchy_oracle(|t| (1.0 - t * t).sqrt(), &iv, z).unwrap();
        // -(z - sqrt(z^2 - 1)) with the exterior branch
        let want = -(z - (z - 1.0).sqrt() * (z + 1.0).sqrt());
        assert!((v - want).norm() < 1e-12);
    }
}

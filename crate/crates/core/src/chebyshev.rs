//! Chebyshev series on the reference interval `[-1, 1]`: node sets, discrete
//! transforms, Clenshaw evaluation, and the exterior map `u(s) = 1/(s + sqrt(s^2 - 1))`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::interval::Side;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// First-kind Chebyshev (Gauss) nodes `cos(pi (k + 1/2) / n)`, `k = 0..n`.
pub fn cheb1_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|k| (PI * (k as f64 + 0.5) / n as f64).cos()).collect()
}

/// Interior second-kind nodes `cos(i pi / (m + 1))`, `i = 1..=m`.
pub fn cheb2_nodes(m: usize) -> Vec<f64> {
    (1..=m).map(|i| (PI * i as f64 / (m + 1) as f64).cos()).collect()
}

/// Chebyshev-T coefficients of the interpolant through values at [`cheb1_nodes`].
pub fn dct_coefficients(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    let nf = n as f64;
    (0..n)
        .map(|k| {
            let mut acc = ZERO;
            for (i, v) in values.iter().enumerate() {
                let theta = PI * (i as f64 + 0.5) / nf;
                acc += v * (k as f64 * theta).cos();
            }
            let scale = if k == 0 { 1.0 / nf } else { 2.0 / nf };
            acc * scale
        })
        .collect()
}

/// Chebyshev-U coefficients of the interpolant through values at [`cheb2_nodes`].
pub fn dst_coefficients(values: &[Complex64]) -> Vec<Complex64> {
    let m = values.len();
    let mp1 = (m + 1) as f64;
    let sines: Vec<f64> = (1..=m).map(|i| (PI * i as f64 / mp1).sin()).collect();
    (0..m)
        .map(|k| {
            let mut acc = ZERO;
            for (i, v) in values.iter().enumerate() {
                let theta = PI * (i + 1) as f64 / mp1;
                acc += v * (sines[i] * ((k + 1) as f64 * theta).sin());
            }
            acc * (2.0 / mp1)
        })
        .collect()
}

/// `sum c_k T_k(s)` by Clenshaw recurrence.
pub fn eval_t(coeffs: &[Complex64], s: f64) -> Complex64 {
    let mut b1 = ZERO;
    let mut b2 = ZERO;
    for c in coeffs.iter().skip(1).rev() {
        let b0 = c + b1 * (2.0 * s) - b2;
        b2 = b1;
        b1 = b0;
    }
    match coeffs.first() {
        Some(c0) => c0 + b1 * s - b2,
        None => ZERO,
    }
}

/// `sum c_k U_k(s)` by Clenshaw recurrence.
pub fn eval_u(coeffs: &[Complex64], s: f64) -> Complex64 {
    let mut b1 = ZERO;
    let mut b2 = ZERO;
    for c in coeffs.iter().rev() {
        let b0 = c + b1 * (2.0 * s) - b2;
        b2 = b1;
        b1 = b0;
    }
    b1
}

/// Complex-argument version of [`eval_t`].
pub fn eval_t_complex(coeffs: &[Complex64], s: Complex64) -> Complex64 {
    let mut b1 = ZERO;
    let mut b2 = ZERO;
    for c in coeffs.iter().skip(1).rev() {
        let b0 = c + b1 * s * 2.0 - b2;
        b2 = b1;
        b1 = b0;
    }
    match coeffs.first() {
        Some(c0) => c0 + b1 * s - b2,
        None => ZERO,
    }
}

/// Coefficients of `d/ds sum c_k T_k` in the T basis.
pub fn derivative_t(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    if n <= 1 {
        return vec![ZERO];
    }
    let mut d = vec![ZERO; n + 1];
    for k in (1..n).rev() {
        d[k - 1] = d[k + 1] + coeffs[k] * (2.0 * k as f64);
    }
    d[0] *= 0.5;
    d.truncate(n - 1);
    d
}

/// `sqrt(s - 1) sqrt(s + 1)`, the reference radical, with `side` selecting the
/// boundary value for real `s` inside `(-1, 1)`.
pub fn unit_radical(s: Complex64, side: Side) -> Complex64 {
    if s.im != 0.0 {
        return (s - 1.0).sqrt() * (s + 1.0).sqrt();
    }
    let x = s.re;
    if x >= 1.0 {
        Complex64::new(((x - 1.0) * (x + 1.0)).sqrt(), 0.0)
    } else if x <= -1.0 {
        Complex64::new(-((x - 1.0) * (x + 1.0)).sqrt(), 0.0)
    } else {
        let w = ((1.0 - x) * (1.0 + x)).sqrt();
        match side {
            Side::Below => Complex64::new(0.0, -w),
            _ => Complex64::new(0.0, w),
        }
    }
}

/// `u = 1 / (s + sqrt(s^2 - 1))`, the inverse Joukowski variable with `|u| <= 1`.
/// On the cut, `u_+ = e^{-i theta}` where `s = cos(theta)`.
pub fn exterior_u(s: Complex64, side: Side) -> Complex64 {
    let r = unit_radical(s, side);
    // Algebraically equal to s - r, which cancels badly for large |s|.
    1.0 / (s + r)
}

/// `sum_{k} b_k u^{k + shift}` by Horner's rule.
pub fn power_series(coeffs: &[Complex64], u: Complex64, shift: usize) -> Complex64 {
    let mut acc = ZERO;
    for b in coeffs.iter().rev() {
        acc = acc * u + b;
    }
    acc * u.powu(shift as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    fn cheb_t(k: usize, s: f64) -> f64 {
        (k as f64 * s.acos()).cos()
    }

    fn cheb_u(k: usize, s: f64) -> f64 {
        let th = s.acos();
        ((k + 1) as f64 * th).sin() / th.sin()
    }

    #[test]
    fn dct_recovers_monomials() {
        let n = 8;
        let nodes = cheb1_nodes(n);
        let c = dct_coefficients(&re(&vec![1.0; n]));
        assert!((c[0].re - 1.0).abs() < 1e-14);
        assert!(c[1..].iter().all(|v| v.norm() < 1e-14));
        let c = dct_coefficients(&re(&nodes));
        assert!((c[1].re - 1.0).abs() < 1e-14);
        assert!(c.iter().enumerate().all(|(k, v)| k == 1 || v.norm() < 1e-14));
    }

    #[test]
    fn dst_recovers_u_series() {
        let m = 12;
        let coeffs = re(&[0.3, -1.0, 0.25, 0.0, 2.0]);
        let vals: Vec<Complex64> = cheb2_nodes(m).iter().map(|&s| eval_u(&coeffs, s)).collect();
        let back = dst_coefficients(&vals);
        for k in 0..m {
            let want = coeffs.get(k).copied().unwrap_or(ZERO);
            assert!((back[k] - want).norm() < 1e-13);
        }
    }

    #[test]
    fn clenshaw_matches_trig_definitions() {
        for &s in &[-0.9, -0.2, 0.0, 0.45, 0.99] {
            for k in 0..10 {
                let mut c = vec![ZERO; k + 1];
                c[k] = Complex64::new(1.0, 0.0);
                assert!((eval_t(&c, s).re - cheb_t(k, s)).abs() < 1e-13);
                assert!((eval_u(&c, s).re - cheb_u(k, s)).abs() < 1e-12);
                assert!((eval_t_complex(&c, Complex64::new(s, 0.0)).re - cheb_t(k, s)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn derivative_of_t_series() {
        let c = re(&[0.5, 1.0, -2.0, 0.75, 0.1]);
        let d = derivative_t(&c);
        for &s in &[-0.7, 0.1, 0.8] {
            let h = 1e-6;
            let fd = (eval_t(&c, s + h) - eval_t(&c, s - h)) / (2.0 * h);
            assert!((eval_t(&d, s) - fd).norm() < 1e-8);
        }
    }

    #[test]
    fn exterior_map_on_cut_and_outside() {
        let s = 0.3f64;
        let u = exterior_u(Complex64::new(s, 0.0), Side::Above);
        assert!((u - Complex64::new(0.0, -s.acos()).exp()).norm() < 1e-15);
        let u = exterior_u(Complex64::new(2.0, 0.0), Side::OffCut);
        assert!((u.re - (2.0 - 3f64.sqrt())).abs() < 1e-15);
        let u = exterior_u(Complex64::new(-2.0, 0.0), Side::OffCut);
        assert!((u.re + (2.0 - 3f64.sqrt())).abs() < 1e-15);
        let u = exterior_u(Complex64::new(1e8, 0.0), Side::OffCut);
        assert!((u.re * 2e8 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn horner_power_series() {
        let b = re(&[1.0, 2.0, 3.0]);
        let u = Complex64::new(0.5, 0.1);
        let want = u * (b[0] + b[1] * u + b[2] * u * u);
        assert!((power_series(&b, u, 1) - want).norm() < 1e-15);
    }
}

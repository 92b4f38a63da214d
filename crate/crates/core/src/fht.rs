//! The finite Hilbert transform `(1/pi) int_{I_j} f(t) / (t - z) dt` on a single
//! interval, its range constants, and its inverse.
//!
//! With `x = m + h s`, `w = h sqrt(1 - s^2)` and `u = 1/(s + sqrt(s^2 - 1))`:
//!
//! * `H[w U_k](z) = -h u^{k+1}` off the cut, with principal value `-h T_{k+1}(s)` on it;
//! * for `g = sum c_k T_k` in the range (`c_0 = 0`), `H^{-1} g = w sum_{k>=1} (-c_k / h) U_{k-1}`;
//! * the inverse formula evaluated off the cut equals `-i sum c_k u^k`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::chebyshev::{eval_t, eval_t_complex, eval_u, exterior_u, power_series};
use crate::error::{Error, Result};
use crate::function::{PiecewiseFunction, Weight};
use crate::interval::{Interval, Side};
use crate::quadrature::gauss_legendre;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Default relative tolerance on the range moment.
pub const RANGE_TOL: f64 = 1e-8;

/// Range moments of data on one interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeData {
    pub index: usize,
    /// `int_I f / R_+`.
    pub m0: Complex64,
    /// Constant of the general inversion formula, `-(1/pi) int_I t (f - c) / R_+ dt`.
    pub kappa: Complex64,
    /// The shift with `int_I (f - c) / R_+ = 0`; real for real data.
    pub c: Complex64,
}

/// T coefficients (on `iv`) of the principal value of `H[w sum b_k U_k]`.
pub fn hilbert_sqrt_coeffs(iv: &Interval, b: &[Complex64]) -> Vec<Complex64> {
    let h = iv.half();
    let mut c = vec![ZERO; b.len() + 1];
    for (k, bk) in b.iter().enumerate() {
        c[k + 1] = -bk * h;
    }
    c
}

/// U coefficients of `H^{-1}[sum c_k T_k]`; `c_0` is outside the range and dropped.
pub fn invert_coeffs(iv: &Interval, c: &[Complex64]) -> Vec<Complex64> {
    let h = iv.half();
    if c.len() <= 1 {
        return vec![ZERO];
    }
    c[1..].iter().map(|ck| -ck / h).collect()
}

/// Rewrites `sum c_k T_k` in the U basis.
pub fn t_to_u(c: &[Complex64]) -> Vec<Complex64> {
    let mut b = vec![ZERO; c.len().max(1)];
    for (k, ck) in c.iter().enumerate() {
        match k {
            0 => b[0] += ck,
            1 => b[1] += ck * 0.5,
            _ => {
                b[k] += ck * 0.5;
                b[k - 2] -= ck * 0.5;
            }
        }
    }
    b
}

fn unit_point(iv: &Interval, z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && (z.re == iv.alpha || z.re == iv.beta) {
        return Err(Error::Endpoint(z.re));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::NonFinite(format!("evaluation point {z}")));
    }
    Ok(iv.to_unit_c(z))
}

#[inline]
fn on_cut(s: Complex64) -> bool {
    s.im == 0.0 && s.re.abs() < 1.0
}

/// `(1/pi) int_I w(t) p(t) / (t - z) dt` for `p = sum b_k U_k`.
///
/// For real `z` inside the interval, `side` picks the boundary value;
/// [`Side::OffCut`] there returns the principal value.
pub fn cauchy_sqrt(iv: &Interval, b: &[Complex64], z: Complex64, side: Side) -> Result<Complex64> {
    let s = unit_point(iv, z)?;
    let h = iv.half();
    if on_cut(s) && side == Side::OffCut {
        return Ok(eval_t(&hilbert_sqrt_coeffs(iv, b), s.re));
    }
    let u = exterior_u(s, side);
    Ok(-power_series(b, u, 1) * h)
}

/// `d/dz` of [`cauchy_sqrt`] away from the cut.
pub fn cauchy_sqrt_derivative(iv: &Interval, b: &[Complex64], z: Complex64, side: Side) -> Result<Complex64> {
    let s = unit_point(iv, z)?;
    let u = exterior_u(s, side);
    let rhat = crate::chebyshev::unit_radical(s, side);
    let weighted: Vec<Complex64> = b.iter().enumerate().map(|(l, bl)| bl * (l + 1) as f64).collect();
    Ok(power_series(&weighted, u, 1) / rhat)
}

/// `(1/pi) int_I f(t) / (t - z) dt` for a plain series `f = sum c_k T_k`.
pub fn cauchy_plain(iv: &Interval, c: &[Complex64], z: Complex64, side: Side) -> Result<Complex64> {
    let s = unit_point(iv, z)?;
    let n = c.len().max(1);
    if on_cut(s) {
        let x = s.re;
        let fz = eval_t(c, x);
        let pv = divided_difference_integral(c, x) + fz * ((1.0 - x) / (1.0 + x)).ln();
        let jump = match side {
            Side::Above => I * PI * fz,
            Side::Below => -I * PI * fz,
            Side::OffCut => ZERO,
        };
        return Ok((pv + jump) / PI);
    }
    let rho = 1.0 / exterior_u(s, side).norm();
    let growth = (n as f64) * rho.ln();
    if growth < 9.0 {
        // near the cut: subtract f(z) so that the remaining integrand is polynomial
        let fz = eval_t_complex(c, s);
        let log = ((s - 1.0) / (s + 1.0)).ln();
        let (t, w) = gauss_legendre(n / 2 + 2);
        let mut acc = ZERO;
        for (&ti, &wi) in t.iter().zip(&w) {
            acc += (eval_t(c, ti) - fz) / (ti - s) * wi;
        }
        Ok((acc + fz * log) / PI)
    } else {
        let m = n / 2 + (20.0 / rho.ln()).ceil() as usize + 4;
        let (t, w) = gauss_legendre(m);
        let mut acc = ZERO;
        for (&ti, &wi) in t.iter().zip(&w) {
            acc += eval_t(c, ti) / (ti - s) * wi;
        }
        Ok(acc / PI)
    }
}

/// `int_{-1}^{1} (f(t) - f(x)) / (t - x) dt` with Gauss–Legendre, choosing between
/// two interlaced rules the one whose nodes stay farthest from `x`.
fn divided_difference_integral(c: &[Complex64], x: f64) -> Complex64 {
    let n = c.len() / 2 + 2;
    let rules = [gauss_legendre(n), gauss_legendre(n + 1)];
    let gap = |r: &(Vec<f64>, Vec<f64>)| r.0.iter().map(|t| (t - x).abs()).fold(f64::INFINITY, f64::min);
    let (t, w) = if gap(&rules[0]) >= gap(&rules[1]) { &rules[0] } else { &rules[1] };
    let fx = eval_t(c, x);
    t.iter()
        .zip(w)
        .map(|(&ti, &wi)| (eval_t(c, ti) - fx) / (ti - x) * wi)
        .sum()
}

/// Cauchy transform of piece `j` of `f` at `z`.
pub fn fht_forward_side(f: &PiecewiseFunction, j: usize, z: Complex64, side: Side) -> Result<Complex64> {
    let iv = *f.system().interval(j)?;
    match f.weight() {
        Weight::SqrtVanishing => cauchy_sqrt(&iv, f.coeffs(j), z, side),
        Weight::Plain => cauchy_plain(&iv, f.coeffs(j), z, side),
    }
}

/// `(1/pi) int_{I_j} f(t) / (t - z) dt` at each point, principal value on the interval.
pub fn fht_forward(f: &PiecewiseFunction, j: usize, points: &[Complex64]) -> Result<Vec<Complex64>> {
    points.iter().map(|&z| fht_forward_side(f, j, z, Side::OffCut)).collect()
}

/// T coefficients on `I_j` of `H_j f_j` restricted to `I_j`, with `n` modes for plain
/// data (sqrt-vanishing data transform exactly).
pub fn hilbert_on_interval(f: &PiecewiseFunction, j: usize, n: usize) -> Result<Vec<Complex64>> {
    let iv = *f.system().interval(j)?;
    match f.weight() {
        Weight::SqrtVanishing => Ok(hilbert_sqrt_coeffs(&iv, f.coeffs(j))),
        Weight::Plain => {
            let vals: Vec<Complex64> = crate::chebyshev::cheb1_nodes(n)
                .into_iter()
                .map(|s| cauchy_plain(&iv, f.coeffs(j), Complex64::new(iv.from_unit(s), 0.0), Side::OffCut))
                .collect::<Result<_>>()?;
            Ok(crate::chebyshev::dct_coefficients(&vals))
        }
    }
}

/// Range moments of piece `j`.
pub fn range_scan(f: &PiecewiseFunction, j: usize) -> Result<RangeData> {
    let iv = *f.system().interval(j)?;
    let h = iv.half();
    // plain: int f/w dx = pi c_0 and int (x - m) f / w dx = pi h c_1 / 2
    let (mean, first) = match f.weight() {
        Weight::Plain => {
            let c = f.coeffs(j);
            (c.first().copied().unwrap_or(ZERO), c.get(1).copied().unwrap_or(ZERO) * (h / 2.0))
        }
        Weight::SqrtVanishing => {
            let b = f.coeffs(j);
            let (t, w) = gauss_legendre(b.len() / 2 + 2);
            let mut m0 = ZERO;
            let mut m1 = ZERO;
            for (&ti, &wi) in t.iter().zip(&w) {
                let p = eval_u(b, ti);
                m0 += p * wi;
                m1 += p * (wi * ti);
            }
            (m0 * (h / PI), m1 * (h * h / PI))
        }
    };
    if !mean.re.is_finite() || !mean.im.is_finite() || !first.re.is_finite() || !first.im.is_finite() {
        return Err(Error::SingularData(format!("moments of piece {j} are not finite")));
    }
    let mut c = mean;
    if f.is_real() {
        c.im = 0.0;
    }
    Ok(RangeData {
        index: j,
        m0: -I * PI * mean,
        // -(1/pi) int t (f - c)/R_+ = (i/pi) int (t - m)(f - c)/w
        kappa: I * first,
        c,
    })
}

fn plain_coeffs(g: &PiecewiseFunction, j: usize) -> Result<Vec<Complex64>> {
    match g.weight() {
        Weight::Plain => Ok(g.coeffs(j).to_vec()),
        Weight::SqrtVanishing => Err(Error::InvalidArgument(
            "inversion expects plain (bounded) data; sqrt-vanishing input is not supported".into(),
        )),
    }
}

fn check_range(g: &PiecewiseFunction, j: usize, tol: f64) -> Result<()> {
    let rd = range_scan(g, j)?;
    let norm = g.l2_norm_sq_on(j).sqrt();
    let limit = tol * (1.0 + norm);
    if rd.m0.norm() > limit {
        return Err(Error::Range {
            moment: rd.m0.norm(),
            tol: limit,
        });
    }
    Ok(())
}

/// Interval-wise inverse `H_j^{-1} g_j` on every interval; the result is sqrt-vanishing.
/// Fails with [`Error::Range`] when some `|m0| > tol (1 + ||g_j||)`.
pub fn fht_invert(g: &PiecewiseFunction, tol: f64) -> Result<PiecewiseFunction> {
    let sys = g.system();
    let mut blocks = Vec::with_capacity(sys.len());
    for j in 0..sys.len() {
        check_range(g, j, tol)?;
        blocks.push(invert_coeffs(&sys.get(j), &plain_coeffs(g, j)?));
    }
    let out = PiecewiseFunction::from_coeffs(sys, Weight::SqrtVanishing, blocks)?;
    Ok(if g.is_real() { out.into_real() } else { out })
}

/// [`inversion_formula_at`] after checking that piece `j` lies in the range.
pub fn fht_invert_at(g: &PiecewiseFunction, j: usize, points: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    check_range(g, j, tol)?;
    inversion_formula_at(g, j, points)
}

/// The expression `-(R(z)/pi) int g / (R_+ (t - z)) dt` for piece `j`, evaluated
/// without a range check. On the interval it equals `H_j^{-1} g_j` for data in the
/// range (and annihilates constants); off the interval it is the same Cauchy-type
/// expression, e.g. `-i` for `g = 1`.
pub fn inversion_formula_at(g: &PiecewiseFunction, j: usize, points: &[Complex64]) -> Result<Vec<Complex64>> {
    let iv = *g.system().interval(j)?;
    let c = plain_coeffs(g, j)?;
    let b = invert_coeffs(&iv, &c);
    points
        .iter()
        .map(|&z| {
            let s = unit_point(&iv, z)?;
            if on_cut(s) {
                let x = s.re;
                Ok(eval_u(&b, x) * (iv.half() * ((1.0 - x) * (1.0 + x)).sqrt()))
            } else {
                let u = exterior_u(s, Side::OffCut);
                Ok(-I * power_series(&c, u, 0))
            }
        })
        .collect()
}

/// The general inversion formula with the constant `kappa`, at an interior point:
/// `-(1/(pi R_+(x))) int R_+(t) g(t)/(t - x) dt - kappa / R_+(x)`.
pub fn inv_h_general_at(g: &PiecewiseFunction, j: usize, x: f64) -> Result<Complex64> {
    let iv = *g.system().interval(j)?;
    if !iv.contains_open(x) {
        return Err(Error::Domain(format!("x = {x} is not inside interval {j}")));
    }
    let rd = range_scan(g, j)?;
    let c = plain_coeffs(g, j)?;
    // R_+ g = i w g, so the integral is i pi H[w g](x)
    let hwg = cauchy_sqrt(&iv, &t_to_u(&c), Complex64::new(x, 0.0), Side::OffCut)?;
    let w = iv.weight(x);
    Ok(-hwg / w + I * rd.kappa / w)
}

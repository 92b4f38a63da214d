//! Piecewise functions on an interval system, stored as Chebyshev series per interval.
//!
//! A [`Weight::Plain`] piece on `I_j = [a, b]` is `sum c_k T_k(s)` with `x = m + h s`.
//! A [`Weight::SqrtVanishing`] piece is `w(x) sum b_k U_k(s)` with
//! `w(x) = sqrt((x - a)(b - x))`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::chebyshev::{cheb1_nodes, cheb2_nodes, dct_coefficients, dst_coefficients, eval_t, eval_u};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSystem};
use crate::quadrature::gauss_legendre;

/// Endpoint behaviour of a [`PiecewiseFunction`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Weight {
    Plain,
    SqrtVanishing,
}

/// Chebyshev coefficients of `f` on `iv`, or of `f / w` for the sqrt-vanishing tag.
/// Plain data is sampled at first-kind nodes (T basis), sqrt-vanishing data at
/// interior second-kind nodes (U basis); in both cases evaluation reproduces the
/// samples exactly.
pub fn cheb_project<F: Fn(f64) -> Complex64>(f: F, iv: &Interval, n: usize, weight: Weight) -> Vec<Complex64> {
    match weight {
        Weight::Plain => {
            let vals: Vec<Complex64> = cheb1_nodes(n).into_iter().map(|s| f(iv.from_unit(s))).collect();
            dct_coefficients(&vals)
        }
        Weight::SqrtVanishing => {
            let h = iv.half();
            let vals: Vec<Complex64> = cheb2_nodes(n)
                .into_iter()
                .map(|s| f(iv.from_unit(s)) / (h * ((1.0 - s) * (1.0 + s)).sqrt()))
                .collect();
            dst_coefficients(&vals)
        }
    }
}

/// A member of `L^2(I)` given by one Chebyshev series per interval.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFunction {
    sys: IntervalSystem,
    weight: Weight,
    real: bool,
    coeffs: Vec<Vec<Complex64>>,
}

impl PiecewiseFunction {
    pub fn from_coeffs(sys: &IntervalSystem, weight: Weight, coeffs: Vec<Vec<Complex64>>) -> Result<Self> {
        if coeffs.len() != sys.len() {
            return Err(Error::InvalidArgument(format!(
                "{} coefficient blocks for {} intervals",
                coeffs.len(),
                sys.len()
            )));
        }
        if coeffs.iter().flatten().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("function coefficients".into()));
        }
        let real = coeffs.iter().flatten().all(|c| c.im == 0.0);
        Ok(PiecewiseFunction {
            sys: sys.clone(),
            weight,
            real,
            coeffs,
        })
    }

    pub fn from_real_coeffs(sys: &IntervalSystem, weight: Weight, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        let c = coeffs
            .into_iter()
            .map(|v| v.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_coeffs(sys, weight, c)
    }

    pub fn zero(sys: &IntervalSystem, weight: Weight, n: usize) -> Self {
        PiecewiseFunction {
            sys: sys.clone(),
            weight,
            real: true,
            coeffs: vec![vec![Complex64::new(0.0, 0.0); n]; sys.len()],
        }
    }

    /// Projects `f(j, x)` onto `n` modes on every interval.
    pub fn from_fn<F>(sys: &IntervalSystem, weight: Weight, n: usize, f: F) -> Result<Self>
    where
        F: Fn(usize, f64) -> Complex64,
    {
        let coeffs = sys
            .intervals()
            .iter()
            .enumerate()
            .map(|(j, iv)| cheb_project(|x| f(j, x), iv, n, weight))
            .collect();
        Self::from_coeffs(sys, weight, coeffs)
    }

    pub fn from_real_fn<F>(sys: &IntervalSystem, weight: Weight, n: usize, f: F) -> Result<Self>
    where
        F: Fn(usize, f64) -> f64,
    {
        Ok(Self::from_fn(sys, weight, n, |j, x| Complex64::new(f(j, x), 0.0))?.into_real())
    }

    /// Least-squares fit of `n` modes per interval to samples at arbitrary nodes.
    pub fn from_samples(
        sys: &IntervalSystem,
        weight: Weight,
        n: usize,
        nodes: &[Vec<f64>],
        values: &[Vec<Complex64>],
    ) -> Result<Self> {
        if nodes.len() != sys.len() || values.len() != sys.len() {
            return Err(Error::InvalidArgument("sample blocks do not match the interval count".into()));
        }
        let mut coeffs = Vec::with_capacity(sys.len());
        for (j, iv) in sys.intervals().iter().enumerate() {
            let (x, v) = (&nodes[j], &values[j]);
            if x.len() != v.len() {
                return Err(Error::InvalidArgument(format!("interval {j}: {} nodes, {} values", x.len(), v.len())));
            }
            if let Some(bad) = x.iter().find(|&&t| !iv.contains_open(t)) {
                return Err(Error::Domain(format!("sample node {bad} outside interval {j}")));
            }
            let modes = n.min(x.len());
            let a = DMatrix::<Complex64>::from_fn(x.len(), modes, |i, k| {
                let mut unit = vec![Complex64::new(0.0, 0.0); k + 1];
                unit[k] = Complex64::new(1.0, 0.0);
                basis_value(iv, weight, &unit, x[i])
            });
            let b = DVector::from_column_slice(v);
            let sol = a
                .svd(true, true)
                .solve(&b, 1e-14)
                .map_err(|e| Error::InvalidArgument(format!("least-squares fit failed: {e}")))?;
            let mut c: Vec<Complex64> = sol.iter().copied().collect();
            c.resize(n, Complex64::new(0.0, 0.0));
            coeffs.push(c);
        }
        let mut f = Self::from_coeffs(sys, weight, coeffs)?;
        if values.iter().flatten().all(|c| c.im == 0.0) {
            f = f.into_real();
        }
        Ok(f)
    }

    #[inline]
    pub fn system(&self) -> &IntervalSystem {
        &self.sys
    }

    #[inline]
    pub fn weight(&self) -> Weight {
        self.weight
    }

    #[inline]
    pub fn is_real(&self) -> bool {
        self.real
    }

    #[inline]
    pub fn coeffs(&self, j: usize) -> &[Complex64] {
        &self.coeffs[j]
    }

    pub fn all_coeffs(&self) -> &[Vec<Complex64>] {
        &self.coeffs
    }

    pub fn modes(&self, j: usize) -> usize {
        self.coeffs[j].len()
    }

    pub fn max_modes(&self) -> usize {
        self.coeffs.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Drops imaginary parts and tags the function real.
    pub fn into_real(mut self) -> Self {
        for c in self.coeffs.iter_mut().flatten() {
            c.im = 0.0;
        }
        self.real = true;
        self
    }

    /// Value on interval `j` at `x` (zero outside `I_j` for sqrt-vanishing data).
    pub fn eval(&self, j: usize, x: f64) -> Complex64 {
        basis_value(&self.sys.get(j), self.weight, &self.coeffs[j], x)
    }

    /// The Chebyshev series itself, i.e. `f / w` for sqrt-vanishing data.
    pub fn eval_smooth(&self, j: usize, x: f64) -> Complex64 {
        let s = self.sys.get(j).to_unit(x);
        match self.weight {
            Weight::Plain => eval_t(&self.coeffs[j], s),
            Weight::SqrtVanishing => eval_u(&self.coeffs[j], s),
        }
    }

    /// Value at any real `x`; zero off the system.
    pub fn eval_global(&self, x: f64) -> Complex64 {
        match self.sys.locate(x) {
            Some(j) => self.eval(j, x),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// `||f||_{L^2(I)}`, computed exactly for the polynomial representation.
    pub fn l2_norm(&self) -> f64 {
        (0..self.sys.len()).map(|j| self.l2_norm_sq_on(j)).sum::<f64>().sqrt()
    }

    pub fn l2_norm_sq_on(&self, j: usize) -> f64 {
        let iv = self.sys.get(j);
        let (s, w) = gauss_legendre(self.coeffs[j].len() + 2);
        s.iter()
            .zip(&w)
            .map(|(&t, &wt)| wt * iv.half() * self.eval(j, iv.from_unit(t)).norm_sqr())
            .sum()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.sys != other.sys {
            return Err(Error::InvalidArgument("functions live on different interval systems".into()));
        }
        if self.weight != other.weight {
            return Err(Error::InvalidArgument("functions carry different weight tags".into()));
        }
        Ok(())
    }

    /// `a * self + b * other`, padding the shorter series with zeros.
    pub fn axpby(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| {
                let n = x.len().max(y.len());
                (0..n)
                    .map(|k| {
                        let xv = x.get(k).copied().unwrap_or_default();
                        let yv = y.get(k).copied().unwrap_or_default();
                        a * xv + b * yv
                    })
                    .collect()
            })
            .collect();
        let mut f = Self::from_coeffs(&self.sys, self.weight, coeffs)?;
        if self.real && other.real && a.im == 0.0 && b.im == 0.0 {
            f = f.into_real();
        }
        Ok(f)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpby(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, a: Complex64) -> Self {
        let coeffs = self.coeffs.iter().map(|v| v.iter().map(|c| c * a).collect()).collect();
        let real = self.real && a.im == 0.0;
        PiecewiseFunction {
            sys: self.sys.clone(),
            weight: self.weight,
            real,
            coeffs,
        }
    }

    /// `||self - reference|| / ||reference||` (absolute error if the reference vanishes).
    pub fn rel_l2_error(&self, reference: &Self) -> Result<f64> {
        let d = self.sub(reference)?.l2_norm();
        let r = reference.l2_norm();
        Ok(if r > 0.0 { d / r } else { d })
    }

    /// Samples on a per-interval node set, as `(interval, x, value)` rows.
    pub fn table(&self, nodes: &[Vec<f64>]) -> Vec<(usize, f64, Complex64)> {
        let mut rows = Vec::new();
        for (j, xs) in nodes.iter().enumerate() {
            for &x in xs {
                rows.push((j, x, self.eval(j, x)));
            }
        }
        rows
    }
}

fn basis_value(iv: &Interval, weight: Weight, coeffs: &[Complex64], x: f64) -> Complex64 {
    let s = iv.to_unit(x);
    match weight {
        Weight::Plain => eval_t(coeffs, s),
        Weight::SqrtVanishing => {
            if s.abs() >= 1.0 {
                Complex64::new(0.0, 0.0)
            } else {
                eval_u(coeffs, s) * (iv.half() * ((1.0 - s) * (1.0 + s)).sqrt())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn projection_examples() {
        let iv = Interval::new(-1.0, 1.0).unwrap();
        let c = cheb_project(|_| one(), &iv, 8, Weight::Plain);
        assert!((c[0] - one()).norm() < 1e-14 && c[1..].iter().all(|v| v.norm() < 1e-14));
        let c = cheb_project(|x| Complex64::new(x, 0.0), &iv, 8, Weight::Plain);
        assert!((c[1] - one()).norm() < 1e-14);
        assert!(c.iter().enumerate().all(|(k, v)| k == 1 || v.norm() < 1e-14));
        let c = cheb_project(|x| Complex64::new((1.0 - x * x).sqrt(), 0.0), &iv, 8, Weight::SqrtVanishing);
        assert!((c[0] - one()).norm() < 1e-14 && c[1..].iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn norms_and_arithmetic() {
        let sys = IntervalSystem::new(&[(-1.0, 1.0), (2.0, 5.0)]).unwrap();
        let f = PiecewiseFunction::from_real_fn(&sys, Weight::Plain, 6, |_, _| 1.0).unwrap();
        assert!((f.l2_norm() - 5f64.sqrt()).abs() < 1e-13);
        // int_{-1}^1 (1 - x^2) dx = 4/3
        let g = PiecewiseFunction::from_real_coeffs(&sys, Weight::SqrtVanishing, vec![vec![1.0], vec![0.0]]).unwrap();
        assert!((g.l2_norm() - (4.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!(f.sub(&f).unwrap().l2_norm() < 1e-15);
        assert!(f.sub(&g).is_err());
        assert!(f.is_real() && !f.scale(Complex64::new(0.0, 1.0)).is_real());
    }

    #[test]
    fn least_squares_samples() {
        let sys = IntervalSystem::new(&[(0.0, 2.0)]).unwrap();
        let nodes: Vec<f64> = (1..40).map(|i| i as f64 / 20.0).collect();
        let vals: Vec<Complex64> = nodes
            .iter()
            .map(|&x| Complex64::new((x * (2.0 - x)).sqrt() * (1.0 + x * x), 0.0))
            .collect();
        let f = PiecewiseFunction::from_samples(&sys, Weight::SqrtVanishing, 8, &[nodes], &[vals]).unwrap();
        assert!(f.is_real());
        let x = 0.77;
        assert!((f.eval(0, x).re - (x * (2.0 - x)).sqrt() * (1.0 + x * x)).abs() < 1e-12);
        assert!(PiecewiseFunction::from_samples(&sys, Weight::Plain, 4, &[vec![3.0]], &[vec![one()]]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn projection_round_trip(coeffs in prop::collection::vec(-1.0f64..1.0, 1..20), a in -3.0f64..3.0, len in 0.1f64..5.0, sv in any::<bool>()) {
                let iv = Interval::new(a, a + len).unwrap();
                let weight = if sv { Weight::SqrtVanishing } else { Weight::Plain };
                let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                let n = 24;
                let back = cheb_project(|x| basis_value(&iv, weight, &c, x), &iv, n, weight);
                for k in 0..n {
                    let want = c.get(k).copied().unwrap_or_default();
                    prop_assert!((back[k] - want).norm() < 1e-12);
                }
            }
        }
    }
}

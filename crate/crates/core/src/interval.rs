//! Interval-system geometry and the branch-correct radicals
//! `R_j(z) = sqrt((z - a_j)(z - b_j))`, normalized so that `R_j(z) ~ z` at infinity
//! with the cut on `[a_j, b_j]`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Which boundary value to take for a real point lying on a cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Limit from the upper half-plane.
    Above,
    /// Limit from the lower half-plane.
    Below,
    /// The point is not on the cut (ignored for non-real points).
    OffCut,
}

/// A closed interval `[alpha, beta]` with `alpha < beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub alpha: f64,
    pub beta: f64,
}

impl Interval {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::NonFinite(format!("endpoint pair ({alpha}, {beta})")));
        }
        if alpha >= beta {
            return Err(Error::Overlap(format!("alpha {alpha} >= beta {beta}")));
        }
        Ok(Interval { alpha, beta })
    }

    #[inline]
    pub fn center(&self) -> f64 {
        0.5 * (self.alpha + self.beta)
    }

    /// Half-length `(beta - alpha) / 2`.
    #[inline]
    pub fn half(&self) -> f64 {
        0.5 * (self.beta - self.alpha)
    }

    #[inline]
    pub fn len(&self) -> f64 {
        self.beta - self.alpha
    }

    /// Affine map onto `[-1, 1]`.
    #[inline]
    pub fn to_unit(&self, x: f64) -> f64 {
        (x - self.center()) / self.half()
    }

    #[inline]
    pub fn to_unit_c(&self, z: Complex64) -> Complex64 {
        (z - self.center()) / self.half()
    }

    #[inline]
    pub fn from_unit(&self, s: f64) -> f64 {
        self.center() + self.half() * s
    }

    #[inline]
    pub fn contains_open(&self, x: f64) -> bool {
        x > self.alpha && x < self.beta
    }

    /// `sqrt((x - alpha)(beta - x))`, zero outside the interval.
    #[inline]
    pub fn weight(&self, x: f64) -> f64 {
        if self.contains_open(x) {
            ((x - self.alpha) * (self.beta - x)).sqrt()
        } else {
            0.0
        }
    }

    /// The radical `R(z)` of this interval.
    pub fn radical(&self, z: Complex64, side: Side) -> Result<Complex64> {
        if z.im != 0.0 {
            return Ok((z - self.alpha).sqrt() * (z - self.beta).sqrt());
        }
        let x = z.re;
        if x >= self.beta {
            Ok(Complex64::new(((x - self.alpha) * (x - self.beta)).sqrt(), 0.0))
        } else if x <= self.alpha {
            Ok(Complex64::new(-((x - self.alpha) * (x - self.beta)).sqrt(), 0.0))
        } else {
            let w = ((x - self.alpha) * (self.beta - x)).sqrt();
            match side {
                Side::Above => Ok(Complex64::new(0.0, w)),
                Side::Below => Ok(Complex64::new(0.0, -w)),
                Side::OffCut => Err(Error::Domain(format!(
                    "x = {x} lies on the cut [{}, {}] but no side was selected",
                    self.alpha, self.beta
                ))),
            }
        }
    }

    /// Real radical for a real point strictly outside the interval.
    #[inline]
    pub fn radical_real(&self, x: f64) -> f64 {
        let r = ((x - self.alpha) * (x - self.beta)).sqrt();
        if x >= self.beta {
            r
        } else {
            -r
        }
    }
}

/// A point of an interval stored together with its distances to both endpoints,
/// so that points exponentially close to an endpoint keep full relative precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalPoint {
    pub index: usize,
    pub x: f64,
    /// `x - alpha`
    pub dl: f64,
    /// `beta - x`
    pub dr: f64,
}

impl IntervalPoint {
    pub fn from_x(index: usize, iv: &Interval, x: f64) -> Self {
        IntervalPoint {
            index,
            x,
            dl: x - iv.alpha,
            dr: iv.beta - x,
        }
    }

    /// `sqrt((x - alpha)(beta - x))` evaluated from the stored distances.
    #[inline]
    pub fn weight(&self) -> f64 {
        (self.dl * self.dr).sqrt()
    }
}

/// An ordered system of pairwise disjoint finite intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSystem {
    intervals: Vec<Interval>,
}

impl IntervalSystem {
    /// Validates and stores the endpoint list. Intervals must be given in
    /// increasing order and must not touch.
    pub fn new(endpoints: &[(f64, f64)]) -> Result<Self> {
        if endpoints.is_empty() {
            return Err(Error::InvalidArgument("empty interval list".into()));
        }
        let mut intervals = Vec::with_capacity(endpoints.len());
        for &(a, b) in endpoints {
            intervals.push(Interval::new(a, b)?);
        }
        for pair in intervals.windows(2) {
            if pair[0].beta >= pair[1].alpha {
                return Err(Error::Overlap(format!(
                    "[{}, {}] and [{}, {}]",
                    pair[0].alpha, pair[0].beta, pair[1].alpha, pair[1].beta
                )));
            }
        }
        Ok(IntervalSystem { intervals })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    #[inline]
    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn interval(&self, j: usize) -> Result<&Interval> {
        self.intervals.get(j).ok_or(Error::Index {
            index: j,
            len: self.len(),
        })
    }

    #[inline]
    pub fn get(&self, j: usize) -> Interval {
        self.intervals[j]
    }

    /// Index of the interval whose interior contains `x`.
    pub fn locate(&self, x: f64) -> Option<usize> {
        self.intervals.iter().position(|iv| iv.contains_open(x))
    }

    pub fn is_endpoint(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv.alpha == x || iv.beta == x)
    }

    /// Largest endpoint modulus, used as the geometric scale.
    pub fn scale(&self) -> f64 {
        self.intervals
            .iter()
            .map(|iv| iv.alpha.abs().max(iv.beta.abs()))
            .fold(0.0, f64::max)
            .max(1.0)
    }

    /// Returns a copy with the endpoints of interval `j` replaced.
    pub fn with_endpoints(&self, j: usize, alpha: f64, beta: f64) -> Result<Self> {
        let mut e: Vec<(f64, f64)> = self.intervals.iter().map(|iv| (iv.alpha, iv.beta)).collect();
        e[j] = (alpha, beta);
        IntervalSystem::new(&e)
    }

    pub fn endpoints(&self) -> Vec<(f64, f64)> {
        self.intervals.iter().map(|iv| (iv.alpha, iv.beta)).collect()
    }

    /// `R_j(z)` with the branch selected by `side` for points on the cut.
    pub fn radical(&self, j: usize, z: Complex64, side: Side) -> Result<Complex64> {
        self.interval(j)?.radical(z, side)
    }

    /// Sign of `prod_j (x - alpha_j)` for `x` inside interval `k`.
    #[inline]
    pub fn sign_beta_od(&self, k: usize) -> f64 {
        if (self.len() - 1 - k).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

/// `sqrt(prod_j (x-a_j)(x-b_j)(z-a_j)(z-b_j))` with the sign fixed by
/// `-sgn(beta_od(x)) sgn(beta_od(z))`, for `x` and `z` inside the system.
pub fn multi_radical_sqrt(sys: &IntervalSystem, x: f64, z: f64) -> Result<f64> {
    let kx = sys
        .locate(x)
        .ok_or_else(|| Error::Domain(format!("x = {x} is not inside an interval")))?;
    let kz = sys
        .locate(z)
        .ok_or_else(|| Error::Domain(format!("z = {z} is not inside an interval")))?;
    let mut prod = 1.0;
    for iv in sys.intervals() {
        let a = ((x - iv.alpha) * (x - iv.beta)).abs();
        let b = ((z - iv.alpha) * (z - iv.beta)).abs();
        prod *= (a * b).sqrt();
    }
    Ok(-sys.sign_beta_od(kx) * sys.sign_beta_od(kz) * prod)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn construction() {
        assert_eq!(IntervalSystem::new(&[(-1.0, 1.0)]).unwrap().len(), 1);
        assert_eq!(IntervalSystem::new(&[(-2.0, -1.0), (1.0, 2.0)]).unwrap().len(), 2);
        assert!(matches!(
            IntervalSystem::new(&[(-1.0, 1.0), (0.0, 2.0)]),
            Err(Error::Overlap(_))
        ));
        assert!(matches!(IntervalSystem::new(&[(1.0, 1.0)]), Err(Error::Overlap(_))));
        assert!(matches!(
            IntervalSystem::new(&[(0.0, f64::NAN)]),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            IntervalSystem::new(&[(-1.0, 0.0), (0.0, 1.0)]),
            Err(Error::Overlap(_))
        ));
    }

    #[test]
    fn radical_branches() {
        let sys = IntervalSystem::new(&[(-1.0, 1.0)]).unwrap();
        let r = sys.radical(0, c(2.0), Side::OffCut).unwrap();
        assert!((r - c(3f64.sqrt())).norm() < 1e-15);
        let r = sys.radical(0, c(0.0), Side::Above).unwrap();
        assert!((r - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let r = sys.radical(0, c(-2.0), Side::OffCut).unwrap();
        assert!((r + c(3f64.sqrt())).norm() < 1e-15);
        assert!(matches!(sys.radical(3, c(0.0), Side::Above), Err(Error::Index { .. })));
    }

    #[test]
    fn radical_matches_limits_from_half_planes() {
        let iv = Interval::new(0.5, 2.0).unwrap();
        for &x in &[0.6, 1.0, 1.7, 1.99] {
            let up = iv.radical(Complex64::new(x, 1e-13), Side::OffCut).unwrap();
            let dn = iv.radical(Complex64::new(x, -1e-13), Side::OffCut).unwrap();
            assert!((up - iv.radical(c(x), Side::Above).unwrap()).norm() < 1e-6);
            assert!((dn - iv.radical(c(x), Side::Below).unwrap()).norm() < 1e-6);
        }
        // no cut outside the interval
        for &x in &[-3.0, 0.2, 2.5, 7.0] {
            let up = iv.radical(Complex64::new(x, 1e-12), Side::OffCut).unwrap();
            let dn = iv.radical(Complex64::new(x, -1e-12), Side::OffCut).unwrap();
            assert!((up - dn).norm() < 1e-9);
            assert!((up.re - iv.radical_real(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn multi_radical_examples() {
        let sys = IntervalSystem::new(&[(-1.0, 1.0)]).unwrap();
        assert!((multi_radical_sqrt(&sys, 0.0, 0.0).unwrap() + 1.0).abs() < 1e-15);
        assert!((multi_radical_sqrt(&sys, 0.5, -0.5).unwrap() + 0.75).abs() < 1e-15);
        assert!(multi_radical_sqrt(&sys, 1.5, 0.0).is_err());
    }

    #[test]
    fn beta_od_sign() {
        let sys = IntervalSystem::new(&[(-3.0, -2.0), (-1.0, 0.0), (1.0, 3.0)]).unwrap();
        for k in 0..3 {
            let x = sys.get(k).center();
            let b: f64 = sys.intervals().iter().map(|iv| x - iv.alpha).product();
            assert_eq!(b.signum(), sys.sign_beta_od(k));
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn conjugate_boundary_values(a in -5.0f64..5.0, len in 0.1f64..4.0, t in 0.01f64..0.99) {
                let iv = Interval::new(a, a + len).unwrap();
                let x = a + t * len;
                let up = iv.radical(Complex64::new(x, 0.0), Side::Above).unwrap();
                let dn = iv.radical(Complex64::new(x, 0.0), Side::Below).unwrap();
                prop_assert!((up - dn.conj()).norm() <= 1e-14 * up.norm());
                prop_assert!((up / dn + 1.0).norm() <= 1e-14);
            }

            #[test]
            fn radical_asymptotics(re in -1.0f64..1.0, im in -1.0f64..1.0, r in 10.0f64..1e4) {
                let sys = IntervalSystem::new(&[(-2.0, -1.0), (0.5, 3.0)]).unwrap();
                let dir = Complex64::new(re, im);
                prop_assume!(dir.norm() > 1e-3);
                let z = dir / dir.norm() * r * 10.0 * sys.scale();
                for j in 0..2 {
                    let val = sys.radical(j, z, Side::OffCut).unwrap();
                    prop_assert!((val / z - 1.0).norm() <= 10.0 / z.norm());
                }
            }

            #[test]
            fn multi_radical_symmetric(x in 0.001f64..0.999, z in 0.001f64..0.999, i in 0usize..3, k in 0usize..3) {
                let sys = IntervalSystem::new(&[(-3.0, -2.0), (-1.0, 0.0), (1.0, 3.0)]).unwrap();
                let xi = sys.get(i).from_unit(2.0 * x - 1.0);
                let zk = sys.get(k).from_unit(2.0 * z - 1.0);
                let a = multi_radical_sqrt(&sys, xi, zk).unwrap();
                let b = multi_radical_sqrt(&sys, zk, xi).unwrap();
                prop_assert_eq!(a, b);
            }
        }
    }
}

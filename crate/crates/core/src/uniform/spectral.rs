//! Geometry of the uniform-theta change of variables: the endpoint polynomials,
//! `phi(x) = ln |beta_ev / beta_od|`, its inverse on each interval, the Bézout
//! matrix and the orthogonal matrix function `M(t)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::interval::{IntervalPoint, IntervalSystem};

/// Uniform `t`-grid `t_i = (i - N/2) dt`, `i = 0..N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TGrid {
    pub points: usize,
    pub dt: f64,
}

impl Default for TGrid {
    fn default() -> Self {
        // covers |t| <= 26 with 2 * 26 * 64 = 3328 points, rounded up to 4096
        TGrid { points: 4096, dt: 1.0 / 64.0 }
    }
}

impl TGrid {
    pub fn t(&self, i: usize) -> f64 {
        (i as f64 - (self.points / 2) as f64) * self.dt
    }

    pub fn half_width(&self) -> f64 {
        (self.points / 2) as f64 * self.dt
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.t(i)).collect()
    }
}

/// Ascending coefficients of `prod (z - r)`.
fn poly_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for &r in roots {
        let mut next = vec![0.0; c.len() + 1];
        for (i, &ci) in c.iter().enumerate() {
            next[i + 1] += ci;
            next[i] -= r * ci;
        }
        c = next;
    }
    c
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(i, &ci)| ci * i as f64).collect()
}

/// Bézout matrix: `p(x) q(z) - p(z) q(x) = (x - z) sum_{i,j} B_ij z^i x^j`.
pub fn bezout_matrix(p: &[f64], q: &[f64]) -> DMatrix<f64> {
    let deg = p.len().max(q.len()) - 1;
    let coef = |c: &[f64], i: usize| c.get(i).copied().unwrap_or(0.0);
    // c_ab is the coefficient of x^a z^b on the left
    let c = |a: usize, b: usize| coef(p, a) * coef(q, b) - coef(p, b) * coef(q, a);
    // d_ab (coefficient of x^a z^b in the quotient) = sum_k c_{a+1+k, b-k}
    let d = |a: usize, b: usize| -> f64 { (0..=b).take_while(|k| a + 1 + k <= deg).map(|k| c(a + 1 + k, b - k)).sum() };
    let b = DMatrix::from_fn(deg, deg, |i, j| d(j, i));
    (&b + b.transpose()) * 0.5
}

/// Spectral data of the uniform-theta transform on one interval system.
#[derive(Debug, Clone)]
pub struct SpectralData {
    sys: IntervalSystem,
    beta_od: Vec<f64>,
    beta_ev: Vec<f64>,
    q: Vec<f64>,
    bezout: DMatrix<f64>,
    omega: DMatrix<f64>,
    rho: DVector<f64>,
    grid: TGrid,
}

impl SpectralData {
    pub fn system(&self) -> &IntervalSystem {
        &self.sys
    }

    pub fn grid(&self) -> &TGrid {
        &self.grid
    }

    pub fn bezout(&self) -> &DMatrix<f64> {
        &self.bezout
    }

    /// `Omega` with `B = Omega^t diag(rho) Omega`.
    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn rho(&self) -> &DVector<f64> {
        &self.rho
    }

    pub fn beta_od(&self, x: f64) -> f64 {
        horner(&self.beta_od, x)
    }

    pub fn beta_ev(&self, x: f64) -> f64 {
        horner(&self.beta_ev, x)
    }

    /// `Q = beta_ev' beta_od - beta_ev beta_od'`.
    pub fn q(&self, x: f64) -> f64 {
        horner(&self.q, x)
    }

    /// `P_j(x) = sum_i Omega_ji x^i`.
    pub fn p(&self, j: usize, x: f64) -> f64 {
        let row: Vec<f64> = self.omega.row(j).iter().copied().collect();
        horner(&row, x)
    }

    /// `sgn beta_od` on interval `k`.
    pub fn sign(&self, k: usize) -> f64 {
        self.sys.sign_beta_od(k)
    }

    /// `phi(x) = ln |beta_ev(x) / beta_od(x)|` at an interior point, using the stored
    /// endpoint distances for the factors of its own interval.
    pub fn phi(&self, pt: &IntervalPoint) -> f64 {
        let mut acc = pt.dr.ln() - pt.dl.ln();
        for (j, iv) in self.sys.intervals().iter().enumerate() {
            if j != pt.index {
                acc += (pt.x - iv.beta).abs().ln() - (pt.x - iv.alpha).abs().ln();
            }
        }
        acc
    }

    /// `|phi'(x)| = Q(x) / |beta_od(x) beta_ev(x)|`.
    pub fn phi_prime_abs(&self, pt: &IntervalPoint) -> f64 {
        let mut den = pt.dl * pt.dr;
        for (j, iv) in self.sys.intervals().iter().enumerate() {
            if j != pt.index {
                den *= ((pt.x - iv.alpha) * (pt.x - iv.beta)).abs();
            }
        }
        self.q(pt.x) / den
    }

    /// Largest `|t|` accepted by [`SpectralData::phi_inverse`].
    pub fn t_limit(&self) -> f64 {
        1.25 * self.grid.half_width()
    }

    /// The unique point of interval `k` with `phi(x) = 2 t`: bisection in the log of
    /// the distance to the nearer endpoint, refined by Newton steps.
    pub fn phi_inverse(&self, k: usize, t: f64) -> Result<IntervalPoint> {
        let iv = self.sys.interval(k)?;
        let limit = self.t_limit();
        if !t.is_finite() || t.abs() > limit {
            return Err(Error::RangeExceeded { t, limit });
        }
        let len = iv.len();
        let target = 2.0 * t;
        let mid = IntervalPoint::from_x(k, iv, iv.center());
        // phi decreases from +inf at alpha to -inf at beta
        let left = target > self.phi(&mid);
        let point = |ld: f64| -> IntervalPoint {
            let d = ld.exp();
            if left {
                IntervalPoint { index: k, x: iv.alpha + d, dl: d, dr: len - d }
            } else {
                IntervalPoint { index: k, x: iv.beta - d, dl: len - d, dr: d }
            }
        };
        // residual increases with ld on the right half and decreases on the left half
        let resid = |ld: f64| self.phi(&point(ld)) - target;
        let (mut lo, mut hi) = (-700.0f64, (0.5 * len).ln());
        let increasing = !left;
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            let r = resid(m);
            if (r > 0.0) == increasing {
                hi = m;
            } else {
                lo = m;
            }
            if hi - lo < 1e-6 {
                break;
            }
        }
        let mut ld = 0.5 * (lo + hi);
        for _ in 0..8 {
            let pt = point(ld);
            let r = self.phi(&pt) - target;
            if r.abs() <= 1e-14 * target.abs().max(1.0) {
                break;
            }
            // d phi / d ln d = -/+ d |phi'|
            let slope = if left { -pt.dl * self.phi_prime_abs(&pt) } else { pt.dr * self.phi_prime_abs(&pt) };
            let step = (r / slope).clamp(-1.0, 1.0);
            ld = (ld - step).clamp(lo - 1.0, hi);
        }
        let pt = point(ld);
        let err = (self.phi(&pt) - target).abs();
        if err > 1e-12 * target.abs().max(1.0) {
            return Err(Error::Convergence(format!("phi inverse on interval {k} at t = {t}: residual {err:.2e}")));
        }
        Ok(pt)
    }

    /// `phi_k^{-1}(2t)` for every interval.
    pub fn preimages(&self, t: f64) -> Result<Vec<IntervalPoint>> {
        (0..self.sys.len()).map(|k| self.phi_inverse(k, t)).collect()
    }

    /// `M_jk = P_j(x_k) sqrt(rho_j / Q(x_k))` at the given preimages.
    pub fn m_matrix_at(&self, pts: &[IntervalPoint]) -> DMatrix<f64> {
        let n = self.sys.len();
        DMatrix::from_fn(n, n, |j, k| self.p(j, pts[k].x) * (self.rho[j] / self.q(pts[k].x)).sqrt())
    }

    /// `M(t)`.
    pub fn m_matrix(&self, t: f64) -> Result<DMatrix<f64>> {
        Ok(self.m_matrix_at(&self.preimages(t)?))
    }

    /// Right side of the sinh identity:
    /// `(x - z) sum B_ij z^i x^j / sqrt(prod (x - a_j)(x - b_j)(z - a_j)(z - b_j))`, with the
    /// root signed `-sgn beta_od(x) sgn beta_od(z)`.
    pub fn sinh_identity_rhs(&self, x: &IntervalPoint, z: &IntervalPoint) -> f64 {
        let n = self.sys.len();
        let xs = DVector::from_fn(n, |j, _| x.x.powi(j as i32));
        let zs = DVector::from_fn(n, |j, _| z.x.powi(j as i32));
        let form = (zs.transpose() * &self.bezout * xs)[0];
        let mut root = (x.dl * x.dr * z.dl * z.dr).sqrt();
        for (j, iv) in self.sys.intervals().iter().enumerate() {
            if j != x.index {
                root *= ((x.x - iv.alpha) * (x.x - iv.beta)).abs().sqrt();
            }
            if j != z.index {
                root *= ((z.x - iv.alpha) * (z.x - iv.beta)).abs().sqrt();
            }
        }
        let signed = -self.sign(x.index) * self.sign(z.index) * root;
        (x.x - z.x) * form / signed
    }
}

/// Builds the spectral data; fails if the Bézout matrix is not positive definite.
pub fn build_spectral_data(sys: &IntervalSystem, grid: TGrid) -> Result<SpectralData> {
    if grid.points < 4 || !(grid.dt > 0.0) {
        return Err(Error::InvalidArgument("t-grid needs at least 4 points and a positive step".into()));
    }
    let alphas: Vec<f64> = sys.intervals().iter().map(|iv| iv.alpha).collect();
    let betas: Vec<f64> = sys.intervals().iter().map(|iv| iv.beta).collect();
    let beta_od = poly_from_roots(&alphas);
    let beta_ev = poly_from_roots(&betas);
    let dod = derivative(&beta_od);
    let dev = derivative(&beta_ev);
    let mut q = vec![0.0; beta_od.len() + dev.len()];
    for (i, a) in dev.iter().enumerate() {
        for (j, b) in beta_od.iter().enumerate() {
            q[i + j] += a * b;
        }
    }
    for (i, a) in beta_ev.iter().enumerate() {
        for (j, b) in dod.iter().enumerate() {
            q[i + j] -= a * b;
        }
    }
    let bezout = bezout_matrix(&beta_ev, &beta_od);
    let eig = SymmetricEigen::new(bezout.clone());
    if let Some(&bad) = eig.eigenvalues.iter().find(|&&r| r <= 0.0) {
        return Err(Error::NonPositiveEigenvalue(bad));
    }
    Ok(SpectralData {
        sys: sys.clone(),
        beta_od,
        beta_ev,
        q,
        omega: eig.eigenvectors.transpose(),
        rho: eig.eigenvalues,
        bezout,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sd(ends: &[(f64, f64)]) -> SpectralData {
        build_spectral_data(&IntervalSystem::new(ends).unwrap(), TGrid::default()).unwrap()
    }

    #[test]
    fn one_interval_closed_forms() {
        let s = sd(&[(2.0, 5.0)]);
        assert!((s.bezout()[(0, 0)] - 3.0).abs() < 1e-15);
        assert!((s.rho()[0] - 3.0).abs() < 1e-15);
        assert!((s.p(0, 3.3).abs() - 1.0).abs() < 1e-15);
        assert!((s.q(4.1) - 3.0).abs() < 1e-14);
        assert!((s.m_matrix(0.7).unwrap()[(0, 0)].abs() - 1.0).abs() < 1e-14);

        let s = sd(&[(-1.0, 1.0)]);
        assert_eq!(s.phi_inverse(0, 0.0).unwrap().x, 0.0);
        for t in [1.0, -0.3, 5.0, -20.0] {
            let x = s.phi_inverse(0, t).unwrap().x;
            assert!((x + t.tanh()).abs() < 1e-15, "t={t}: {x}");
        }
        assert!((s.phi_inverse(0, 1.0).unwrap().x + 0.761594).abs() < 1e-6);
        assert!(matches!(s.phi_inverse(0, 1e3), Err(Error::RangeExceeded { .. })));
    }

    #[test]
    fn positivity_and_orthogonality() {
        let s = sd(&[(-3.0, -2.0), (-1.0, 0.0), (1.0, 3.0)]);
        assert!(s.rho().iter().all(|&r| r > 0.0));
        let o = s.omega();
        assert!((o.transpose() * o - DMatrix::identity(3, 3)).amax() < 1e-12);
        assert_eq!(s.bezout(), &s.bezout().transpose());
        for k in 0..3 {
            for i in 0..50 {
                let iv = s.system().get(k);
                let x = iv.alpha + iv.len() * (i as f64 + 0.5) / 50.0;
                assert!(s.q(x) > 0.0);
            }
        }
        for i in 0..50 {
            let t = -25.0 + i as f64;
            let m = s.m_matrix(t).unwrap();
            assert!((m.transpose() * &m - DMatrix::identity(3, 3)).amax() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn deep_tail_inverse() {
        let s = sd(&[(-2.0, -1.0), (1.0, 2.0)]);
        for k in 0..2 {
            for t in [-32.0, -26.0, 26.0, 32.0] {
                let pt = s.phi_inverse(k, t).unwrap();
                assert!((s.phi(&pt) - 2.0 * t).abs() < 1e-12);
                assert!(pt.dl > 0.0 && pt.dr > 0.0);
            }
        }
    }

    proptest! {
        #[test]
        fn monotone_decreasing(t1 in -25.0f64..25.0, dt in 1e-3f64..5.0) {
            let s = sd(&[(-2.0, -1.0), (0.0, 0.5), (1.0, 2.0)]);
            for k in 0..3 {
                let a = s.phi_inverse(k, t1).unwrap();
                let b = s.phi_inverse(k, t1 + dt).unwrap();
                prop_assert!(a.x > b.x || (a.x == b.x && a.dl >= b.dl));
            }
        }

        #[test]
        fn sinh_identity(u in 0.001f64..0.999, v in 0.001f64..0.999, j in 0usize..3, k in 0usize..3) {
            let s = sd(&[(-3.0, -2.0), (-1.0, 0.0), (1.0, 3.0)]);
            let (ix, iz) = (s.system().get(j), s.system().get(k));
            let x = IntervalPoint::from_x(j, &ix, ix.alpha + u * ix.len());
            let z = IntervalPoint::from_x(k, &iz, iz.alpha + v * iz.len());
            let lhs = 2.0 * ((s.phi(&x) - s.phi(&z)) / 2.0).sinh();
            let rhs = s.sinh_identity_rhs(&x, &z);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()), "{} vs {}", lhs, rhs);
        }
    }
}

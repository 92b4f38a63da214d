//! Quadrature rules: Gauss–Legendre, Gauss–Chebyshev of both kinds, and the
//! 7/15-point Gauss–Kronrod pair used by the adaptive integrator.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSystem};

/// Quadrature family of a [`QuadratureGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Weights integrate `f(x) / sqrt((x - a)(b - x))`.
    ChebyshevFirst,
    /// Weights integrate `f(x) sqrt((x - a)(b - x))`.
    ChebyshevSecond,
    /// Weights integrate `f(x)`.
    Legendre,
}

/// Reference Gauss–Legendre rule on `[-1, 1]` (Newton iteration on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss–Chebyshev first kind: `int f / sqrt(1 - s^2) ~ (pi/n) sum f(s_k)`.
pub fn gauss_chebyshev1(n: usize) -> (Vec<f64>, Vec<f64>) {
    let nodes = crate::chebyshev::cheb1_nodes(n);
    (nodes, vec![PI / n as f64; n])
}

/// Gauss–Chebyshev second kind: `int f sqrt(1 - s^2) ~ sum w_k f(s_k)`.
pub fn gauss_chebyshev2(m: usize) -> (Vec<f64>, Vec<f64>) {
    let nodes = crate::chebyshev::cheb2_nodes(m);
    let mp1 = (m + 1) as f64;
    let weights = (1..=m).map(|i| PI / mp1 * (PI * i as f64 / mp1).sin().powi(2)).collect();
    (nodes, weights)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7/K15 panel on `[a, b]`: returns (Kronrod estimate, |K - G|).
pub fn gauss_kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive G7/K15 integration of `f` over `[a, b]`.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gauss_kronrod15(f, a, b);
    let mut panels = vec![(a, b, v, e)];
    for _ in 0..4000 {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if !total.is_finite() {
            return Err(Error::Convergence("non-finite integrand".into()));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty panel list");
        let (pa, pb, _, _) = panels.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            return Err(Error::Convergence(format!("panel [{pa}, {pb}] cannot be split further")));
        }
        let (v1, e1) = gauss_kronrod15(f, pa, mid);
        let (v2, e2) = gauss_kronrod15(f, mid, pb);
        panels.push((pa, mid, v1, e1));
        panels.push((mid, pb, v2, e2));
    }
    Err(Error::Convergence(format!("adaptive quadrature on [{a}, {b}] exceeded the panel budget")))
}

/// Per-interval nodes and weights of one quadrature family.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    pub family: Family,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<Vec<f64>>,
}

impl QuadratureGrid {
    /// Builds a rule of `sizes[j]` points on interval `j`, mapped from `[-1, 1]`.
    pub fn new(sys: &IntervalSystem, family: Family, sizes: &[usize]) -> Result<Self> {
        if sizes.len() != sys.len() {
            return Err(Error::InvalidArgument(format!(
                "{} grid sizes for {} intervals",
                sizes.len(),
                sys.len()
            )));
        }
        let mut nodes = Vec::with_capacity(sys.len());
        let mut weights = Vec::with_capacity(sys.len());
        for (iv, &n) in sys.intervals().iter().zip(sizes) {
            if n == 0 {
                return Err(Error::InvalidArgument("empty quadrature grid".into()));
            }
            let (x, w) = Self::mapped(iv, family, n);
            nodes.push(x);
            weights.push(w);
        }
        Ok(QuadratureGrid { family, nodes, weights })
    }

    pub fn uniform(sys: &IntervalSystem, family: Family, n: usize) -> Result<Self> {
        Self::new(sys, family, &vec![n; sys.len()])
    }

    fn mapped(iv: &Interval, family: Family, n: usize) -> (Vec<f64>, Vec<f64>) {
        let h = iv.half();
        let (s, w) = match family {
            Family::Legendre => gauss_legendre(n),
            Family::ChebyshevFirst => gauss_chebyshev1(n),
            Family::ChebyshevSecond => gauss_chebyshev2(n),
        };
        let scale = match family {
            Family::Legendre => h,
            Family::ChebyshevFirst => 1.0,
            Family::ChebyshevSecond => h * h,
        };
        (
            s.iter().map(|&t| iv.from_unit(t)).collect(),
            w.iter().map(|&v| v * scale).collect(),
        )
    }

    pub fn size(&self, j: usize) -> usize {
        self.nodes[j].len()
    }

    pub fn total(&self) -> usize {
        self.nodes.iter().map(Vec::len).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_exact_for_polynomials() {
        for n in [1usize, 2, 5, 16, 64] {
            let (x, w) = gauss_legendre(n);
            assert!(w.iter().all(|&v| v > 0.0));
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(&t, &v)| v * t.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn chebyshev_rules() {
        let (x, w) = gauss_chebyshev1(10);
        let q: f64 = x.iter().zip(&w).map(|(&t, &v)| v * t * t).sum();
        assert!((q - PI / 2.0).abs() < 1e-14);
        let (x, w) = gauss_chebyshev2(10);
        let q: f64 = x.iter().zip(&w).map(|(&t, &v)| v * t * t).sum();
        assert!((q - PI / 8.0).abs() < 1e-14);
    }

    #[test]
    fn kronrod_and_adaptive() {
        let (v, _) = gauss_kronrod15(&|x: f64| x.exp(), 0.0, 1.0);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
        let v = adaptive(&|x: f64| x.sqrt(), 0.0, 1.0, 1e-13, 1e-13).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
        assert!(adaptive(&|x: f64| 1.0 / x, 0.0, 1.0, 1e-13, 1e-13).is_err());
    }

    #[test]
    fn mapped_grids() {
        let sys = IntervalSystem::new(&[(2.0, 5.0)]).unwrap();
        let g = QuadratureGrid::uniform(&sys, Family::ChebyshevSecond, 20).unwrap();
        // int_2^5 sqrt((x-2)(5-x)) dx = pi (3/2)^2 / 2
        let q: f64 = g.weights[0].iter().sum();
        assert!((q - PI * 2.25 / 2.0).abs() < 1e-13);
        assert!(g.nodes[0].iter().all(|&x| x > 2.0 && x < 5.0));
        let g = QuadratureGrid::uniform(&sys, Family::Legendre, 7).unwrap();
        assert!((g.weights[0].iter().sum::<f64>() - 3.0).abs() < 1e-14);
        assert!(QuadratureGrid::new(&sys, Family::Legendre, &[3, 4]).is_err());
    }
}

//! The isometries `T`, `M` and `F` of the uniform-theta transform, the
//! `i tanh(pi lambda / 2)` multiplier, and inversion with its low-frequency range test.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};

use super::spectral::{SpectralData, TGrid};
use crate::chebyshev::{cheb1_nodes, cheb2_nodes, dct_coefficients, dst_coefficients};
use crate::error::{Error, Result};
use crate::function::{PiecewiseFunction, Weight};
use crate::interval::IntervalPoint;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Tunables of the uniform-theta pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformOptions {
    /// Chebyshev modes of the output representation.
    pub modes: usize,
    /// Half-width of the low-frequency window of the range test.
    pub lambda0: f64,
    /// Range-test tolerance relative to `||g||^2`.
    pub range_tol: f64,
    /// Frequencies with `|tanh(pi lambda / 2)|` below this take the limit of the
    /// quotient instead of dividing by the multiplier.
    pub guard: f64,
    /// Fraction of the total channel energy allowed in the outer 5% of the grid.
    pub truncation_tol: f64,
}

impl Default for UniformOptions {
    fn default() -> Self {
        UniformOptions {
            modes: 64,
            lambda0: 0.25,
            range_tol: 1e-6,
            guard: 1e-8,
            truncation_tol: 1e-8,
        }
    }
}

/// An element of `L^2_n(R)` sampled on the t-grid.
#[derive(Debug, Clone)]
pub struct ChannelVector {
    pub grid: TGrid,
    pub channels: Vec<Vec<Complex64>>,
}

impl ChannelVector {
    pub fn norm(&self) -> f64 {
        self.channels
            .iter()
            .map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dt)
            .sum::<f64>()
            .sqrt()
    }

    /// Fraction of the energy in the outer 5% of the grid on either side.
    pub fn boundary_fraction(&self) -> f64 {
        let n = self.grid.points;
        let edge = (n / 20).max(1);
        let total: f64 = self.channels.iter().flatten().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let outer: f64 = self
            .channels
            .iter()
            .map(|c| c[..edge].iter().chain(&c[n - edge..]).map(|v| v.norm_sqr()).sum::<f64>())
            .sum();
        outer / total
    }
}

/// Fourier samples `G(lambda_j) = int u(t) e^{i lambda_j t} dt` in FFT order.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub grid: TGrid,
    pub values: Vec<Vec<Complex64>>,
}

impl Spectrum {
    /// `lambda_j = 2 pi j' / (N dt)` with `j'` wrapped into `[-N/2, N/2)`.
    pub fn lambda(&self, j: usize) -> f64 {
        lambda_at(&self.grid, j)
    }

    /// `sqrt(1/(2 pi) int |G|^2 dlambda)`, equal to the `t`-space norm.
    pub fn norm(&self) -> f64 {
        let dl = 2.0 * PI / (self.grid.points as f64 * self.grid.dt);
        let s: f64 = self.values.iter().flatten().map(|v| v.norm_sqr()).sum();
        (s * dl / (2.0 * PI)).sqrt()
    }
}

fn lambda_at(grid: &TGrid, j: usize) -> f64 {
    let n = grid.points;
    let jw = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
    2.0 * PI * jw / (n as f64 * grid.dt)
}

/// Value of `f` at a point given with endpoint distances.
fn value_at(f: &PiecewiseFunction, pt: &IntervalPoint) -> Complex64 {
    match f.weight() {
        Weight::SqrtVanishing => f.eval_smooth(pt.index, pt.x) * pt.weight(),
        Weight::Plain => f.eval(pt.index, pt.x),
    }
}

/// Preimages `phi_k^{-1}(2 t_i)` for every grid node, indexed `[k][i]`.
fn grid_preimages(sd: &SpectralData) -> Result<Vec<Vec<IntervalPoint>>> {
    let grid = *sd.grid();
    (0..sd.system().len())
        .into_par_iter()
        .map(|k| (0..grid.points).map(|i| sd.phi_inverse(k, grid.t(i))).collect())
        .collect()
}

/// `(T f)_k(t) = sqrt(2) sgn(beta_od(x)) f(x) / sqrt(|phi'(x)|)` at `x = phi_k^{-1}(2t)`.
pub fn apply_t(sd: &SpectralData, f: &PiecewiseFunction) -> Result<ChannelVector> {
    if f.system() != sd.system() {
        return Err(Error::InvalidArgument("function and spectral data use different systems".into()));
    }
    let pts = grid_preimages(sd)?;
    let channels = pts
        .iter()
        .enumerate()
        .map(|(k, row)| {
            let sgn = sd.sign(k);
            row.iter()
                .map(|pt| value_at(f, pt) * (SQRT_2 * sgn / sd.phi_prime_abs(pt).sqrt()))
                .collect()
        })
        .collect();
    Ok(ChannelVector { grid: *sd.grid(), channels })
}

/// Inverse of [`apply_t`] on the grid: the points `x = phi_k^{-1}(2 t_i)` and the
/// values of `f` there, indexed `[k][i]`.
pub fn apply_t_inverse(sd: &SpectralData, ch: &ChannelVector) -> Result<Vec<Vec<(IntervalPoint, Complex64)>>> {
    let pts = grid_preimages(sd)?;
    Ok(pts
        .into_iter()
        .enumerate()
        .map(|(k, row)| {
            let sgn = sd.sign(k);
            row.into_iter()
                .zip(&ch.channels[k])
                .map(|(pt, &c)| {
                    let v = c * (sd.phi_prime_abs(&pt).sqrt() / (SQRT_2 * sgn));
                    (pt, v)
                })
                .collect()
        })
        .collect())
}

/// Applies `M(t_i)` at every grid node.
pub fn apply_m(sd: &SpectralData, ch: &ChannelVector) -> Result<ChannelVector> {
    let pts = grid_preimages(sd)?;
    let n = sd.system().len();
    let mut out = vec![vec![ZERO; ch.grid.points]; n];
    for i in 0..ch.grid.points {
        let at: Vec<IntervalPoint> = (0..n).map(|k| pts[k][i]).collect();
        let m = sd.m_matrix_at(&at);
        let v = DVector::from_fn(n, |k, _| ch.channels[k][i]);
        let w = m.map(|x| Complex64::new(x, 0.0)) * v;
        for j in 0..n {
            out[j][i] = w[j];
        }
    }
    Ok(ChannelVector { grid: ch.grid, channels: out })
}

/// Component-wise `int u(t) e^{i lambda t} dt` by FFT.
pub fn fourier(ch: &ChannelVector) -> Spectrum {
    let grid = ch.grid;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft(grid.points, FftDirection::Inverse);
    let values = ch
        .channels
        .iter()
        .map(|c| {
            let mut buf = c.clone();
            fft.process(&mut buf);
            // e^{i lambda_j t_0} = (-1)^j
            buf.iter()
                .enumerate()
                .map(|(j, v)| v * if j % 2 == 0 { grid.dt } else { -grid.dt })
                .collect()
        })
        .collect();
    Spectrum { grid, values }
}

/// Inverse of [`fourier`] on the grid.
pub fn inverse_fourier(sp: &Spectrum) -> ChannelVector {
    let grid = sp.grid;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft(grid.points, FftDirection::Forward);
    let scale = 1.0 / (grid.points as f64 * grid.dt);
    let channels = sp
        .values
        .iter()
        .map(|v| {
            let mut buf: Vec<Complex64> = v
                .iter()
                .enumerate()
                .map(|(j, x)| x * if j % 2 == 0 { scale } else { -scale })
                .collect();
            fft.process(&mut buf);
            buf
        })
        .collect();
    ChannelVector { grid, channels }
}

/// `(1/(2 pi)) int G(lambda) e^{-i lambda s} dlambda` at an arbitrary `s`.
fn inverse_fourier_at(sp: &Spectrum, channel: usize, s: f64) -> Complex64 {
    let scale = 1.0 / (sp.grid.points as f64 * sp.grid.dt);
    sp.values[channel]
        .iter()
        .enumerate()
        .map(|(j, v)| v * Complex64::from_polar(1.0, -lambda_at(&sp.grid, j) * s))
        .sum::<Complex64>()
        * scale
}

/// The symbol of convolution with `1 / (pi sinh t)`.
pub fn multiplier(lambda: f64) -> Complex64 {
    Complex64::new(0.0, (PI * lambda / 2.0).tanh())
}

/// `F M T f`.
pub fn forward_spectrum(sd: &SpectralData, f: &PiecewiseFunction) -> Result<(Spectrum, f64)> {
    let ch = apply_t(sd, f)?;
    let boundary = ch.boundary_fraction();
    Ok((fourier(&apply_m(sd, &ch)?), boundary))
}

/// Convolution with `1/(pi sinh t)` through the Fourier multiplier, on the grid.
pub fn sinh_convolution_fourier(ch: &ChannelVector) -> ChannelVector {
    let mut sp = fourier(ch);
    for v in sp.values.iter_mut() {
        for (j, x) in v.iter_mut().enumerate() {
            *x *= multiplier(lambda_at(&ch.grid, j));
        }
    }
    inverse_fourier(&sp)
}

/// `PV int u(t) / (pi sinh(s_i - t)) dt` by the odd-offset trapezoid rule, which
/// is spectrally accurate for the principal value.
pub fn sinh_convolution_direct(ch: &ChannelVector, channel: usize, i: usize) -> Complex64 {
    let grid = ch.grid;
    let u = &ch.channels[channel];
    let mut acc = ZERO;
    for (l, &v) in u.iter().enumerate() {
        let off = i as i64 - l as i64;
        if off % 2 != 0 {
            acc += v / (PI * (off as f64 * grid.dt).sinh());
        }
    }
    acc * (2.0 * grid.dt)
}

/// Result of [`uniform_forward`] / [`uniform_invert`].
#[derive(Debug, Clone)]
pub struct UniformOutput {
    pub function: PiecewiseFunction,
    /// Energy fraction of the input channels in the outer grid region.
    pub boundary_fraction: f64,
    pub warning: Option<String>,
}

/// Samples `(M^t v)_m(s) sqrt(|phi'(x)|) / (sqrt(2) sgn)` at `x` in `I_m`, `s = phi(x)/2`.
fn back_to_interval(sd: &SpectralData, sp: &Spectrum, pt: &IntervalPoint) -> Result<Complex64> {
    let n = sd.system().len();
    let m = pt.index;
    let s = sd.phi(pt) / 2.0;
    let mut at = sd.preimages(s)?;
    at[m] = *pt;
    let mat = sd.m_matrix_at(&at);
    let mut acc = ZERO;
    for j in 0..n {
        acc += inverse_fourier_at(sp, j, s) * mat[(j, m)];
    }
    Ok(acc * (sd.phi_prime_abs(pt).sqrt() / (SQRT_2 * sd.sign(m))))
}

fn truncation_warning(boundary: f64, tol: f64) -> Option<String> {
    (boundary > tol).then(|| format!("channel energy near the t-grid boundary is {boundary:.2e} of the total"))
}

/// `H f = (F M T)^{-1} i tanh(pi lambda / 2) (F M T) f`, returned as a plain function
/// with `opts.modes` Chebyshev coefficients per interval.
pub fn uniform_forward(sd: &SpectralData, f: &PiecewiseFunction, opts: &UniformOptions) -> Result<UniformOutput> {
    let (mut sp, boundary) = forward_spectrum(sd, f)?;
    for v in sp.values.iter_mut() {
        for (j, x) in v.iter_mut().enumerate() {
            *x *= multiplier(lambda_at(&sp.grid, j));
        }
    }
    let sys = sd.system();
    let nodes = cheb1_nodes(opts.modes);
    let blocks = (0..sys.len())
        .into_par_iter()
        .map(|m| -> Result<Vec<Complex64>> {
            let iv = sys.get(m);
            let vals = nodes
                .iter()
                .map(|&s| back_to_interval(sd, &sp, &IntervalPoint::from_x(m, &iv, iv.from_unit(s))))
                .collect::<Result<Vec<_>>>()?;
            Ok(dct_coefficients(&vals))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut function = PiecewiseFunction::from_coeffs(sys, Weight::Plain, blocks)?;
    if f.is_real() {
        function = function.into_real();
    }
    Ok(UniformOutput {
        function,
        boundary_fraction: boundary,
        warning: truncation_warning(boundary, opts.truncation_tol),
    })
}

/// Per-channel low-frequency diagnostic of the range test.
#[derive(Debug, Clone)]
pub struct RangeReport {
    /// `2 |G_m(0)|^2 / (lambda0 ||g||^2)` per channel, `G = F M T g`.
    pub scores: Vec<f64>,
    pub tol: f64,
    pub pass: bool,
}

/// Discrete surrogate of `(1/lambda) (F M T g)_m in L^2_loc` near `lambda = 0`.
///
/// `G_m` is smooth, so the condition amounts to `G_m(0) = 0`; a nonzero value
/// contributes at least `2 |G_m(0)|^2 / lambda0` to the `1/lambda^2`-weighted energy
/// outside `|lambda| < lambda0` as the inner cutoff shrinks, and this lower bound is
/// compared with `tol ||g||^2`.
pub fn uniform_range_check(sd: &SpectralData, g: &PiecewiseFunction, opts: &UniformOptions) -> Result<RangeReport> {
    let (sp, _) = forward_spectrum(sd, g)?;
    let norm2 = g.l2_norm().powi(2);
    let scores: Vec<f64> = sp
        .values
        .iter()
        .map(|v| if norm2 == 0.0 { 0.0 } else { 2.0 * v[0].norm_sqr() / (opts.lambda0 * norm2) })
        .collect();
    let pass = scores.iter().all(|&s| s <= opts.range_tol);
    Ok(RangeReport { scores, tol: opts.range_tol, pass })
}

/// `H^{-1} g = (F M T)^{-1} (1 / (i tanh(pi lambda / 2))) (F M T) g`, returned as a
/// sqrt-vanishing function with `opts.modes` coefficients per interval. Fails with
/// [`Error::RangeViolation`] if the range test does not pass.
pub fn uniform_invert(sd: &SpectralData, g: &PiecewiseFunction, opts: &UniformOptions) -> Result<UniformOutput> {
    let report = uniform_range_check(sd, g, opts)?;
    if let Some((channel, &score)) = report.scores.iter().enumerate().find(|(_, &s)| s > opts.range_tol) {
        return Err(Error::RangeViolation { channel, score, tol: opts.range_tol });
    }
    let ch = apply_m(sd, &apply_t(sd, g)?)?;
    let boundary = ch.boundary_fraction();
    let mut sp = fourier(&ch);
    let grid = sp.grid;
    for (v, u) in sp.values.iter_mut().zip(&ch.channels) {
        for (j, x) in v.iter_mut().enumerate() {
            let mult = multiplier(lambda_at(&grid, j));
            *x = if mult.norm() >= opts.guard {
                *x / mult
            } else {
                // G(0) = 0 after the range test; the quotient tends to G'(0) / (i pi / 2)
                // with G'(0) = i int t u(t) dt
                u.iter().enumerate().map(|(i, ui)| ui * grid.t(i)).sum::<Complex64>() * (2.0 * grid.dt / PI)
            };
        }
    }
    let sys = sd.system();
    let nodes = cheb2_nodes(opts.modes);
    let blocks = (0..sys.len())
        .into_par_iter()
        .map(|m| -> Result<Vec<Complex64>> {
            let iv = sys.get(m);
            let vals = nodes
                .iter()
                .map(|&s| {
                    let pt = IntervalPoint::from_x(m, &iv, iv.from_unit(s));
                    Ok(back_to_interval(sd, &sp, &pt)? / pt.weight())
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(dst_coefficients(&vals))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut function = PiecewiseFunction::from_coeffs(sys, Weight::SqrtVanishing, blocks)?;
    if g.is_real() {
        function = function.into_real();
    }
    Ok(UniformOutput {
        function,
        boundary_fraction: boundary,
        warning: truncation_warning(boundary, opts.truncation_tol),
    })
}

#[cfg(test)]
mod tests {
    use super::super::spectral::build_spectral_data;
    use super::*;
    use crate::fht::{cauchy_sqrt, hilbert_on_interval};
    use crate::interval::{IntervalSystem, Side};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sd(ends: &[(f64, f64)]) -> SpectralData {
        build_spectral_data(&IntervalSystem::new(ends).unwrap(), TGrid::default()).unwrap()
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    /// Multi-interval Hilbert transform from the single-interval closed forms.
    fn direct_h(f: &PiecewiseFunction, x: f64) -> Complex64 {
        let sys = f.system();
        (0..sys.len())
            .map(|k| cauchy_sqrt(&sys.get(k), f.coeffs(k), c(x), Side::OffCut).unwrap())
            .sum()
    }

    fn random_f(sys: &IntervalSystem, seed: u64) -> PiecewiseFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blocks = (0..sys.len()).map(|_| (0..6).map(|l| rng.random_range(-1.0..1.0) / (l + 1) as f64).collect()).collect();
        PiecewiseFunction::from_real_coeffs(sys, Weight::SqrtVanishing, blocks).unwrap()
    }

    #[test]
    fn sech_channel_and_isometry() {
        let s = sd(&[(-1.0, 1.0)]);
        let one = PiecewiseFunction::from_real_coeffs(s.system(), Weight::Plain, vec![vec![1.0]]).unwrap();
        let ch = apply_t(&s, &one).unwrap();
        for i in (0..4096).step_by(97) {
            let t = s.grid().t(i);
            assert!((ch.channels[0][i].re.abs() - 1.0 / t.cosh()).abs() < 1e-13, "t = {t}");
        }
        let s = sd(&[(-2.0, -1.0), (0.0, 0.5), (1.0, 2.0)]);
        let f = random_f(s.system(), 1);
        let ch = apply_t(&s, &f).unwrap();
        assert!((ch.norm() - f.l2_norm()).abs() < 1e-8 * f.l2_norm());
        let back = apply_t_inverse(&s, &ch).unwrap();
        for row in &back {
            for (pt, v) in row.iter().step_by(131) {
                assert!((v - value_at(&f, pt)).norm() < 1e-12);
            }
        }
        let (sp, _) = forward_spectrum(&s, &f).unwrap();
        assert!((sp.norm() - f.l2_norm()).abs() < 1e-8 * f.l2_norm());
    }

    #[test]
    fn convolution_routes_agree() {
        let grid = TGrid::default();
        let ch = ChannelVector {
            grid,
            channels: vec![grid.nodes().iter().map(|&t| c((t - 0.3).cosh().recip() * (0.5 * t).cos())).collect()],
        };
        let f = sinh_convolution_fourier(&ch);
        for i in (1000..3000).step_by(77) {
            let d = sinh_convolution_direct(&ch, 0, i);
            assert!((d - f.channels[0][i]).norm() < 1e-6, "{d} vs {}", f.channels[0][i]);
        }
    }

    #[test]
    fn single_interval_matches_closed_forms() {
        let s = sd(&[(-1.0, 1.0)]);
        let opts = UniformOptions::default();
        let w = PiecewiseFunction::from_real_coeffs(s.system(), Weight::SqrtVanishing, vec![vec![1.0]]).unwrap();
        let out = uniform_forward(&s, &w, &opts).unwrap();
        for &x in &[-0.9, -0.2, 0.5] {
            assert!((out.function.eval(0, x) + x).norm() < 1e-8, "{}", out.function.eval(0, x));
        }
        assert!(out.warning.is_none());
        let back = uniform_invert(&s, &out.function, &opts).unwrap();
        assert!(back.function.rel_l2_error(&w).unwrap() < 1e-8);

        let s = sd(&[(2.0, 5.0)]);
        let f = random_f(s.system(), 4);
        let out = uniform_forward(&s, &f, &opts).unwrap().function;
        let want = PiecewiseFunction::from_coeffs(s.system(), Weight::Plain, vec![hilbert_on_interval(&f, 0, opts.modes).unwrap()]).unwrap();
        assert!(out.rel_l2_error(&want).unwrap() < 1e-8);
    }

    #[test]
    fn multi_interval_forward_inverse_and_range() {
        let s = sd(&[(-2.0, -1.0), (1.0, 2.0)]);
        let opts = UniformOptions::default();
        let f = random_f(s.system(), 9);
        let g = uniform_forward(&s, &f, &opts).unwrap().function;
        for m in 0..2 {
            let iv = s.system().get(m);
            for i in 1..10 {
                let x = iv.alpha + iv.len() * i as f64 / 10.0;
                assert!((g.eval(m, x) - direct_h(&f, x)).norm() < 1e-8);
            }
        }
        let rep = uniform_range_check(&s, &g, &opts).unwrap();
        assert!(rep.pass, "{:?}", rep.scores);
        let back = uniform_invert(&s, &g, &opts).unwrap();
        assert!(back.function.rel_l2_error(&f).unwrap() < 1e-7);

        let one = PiecewiseFunction::from_real_coeffs(s.system(), Weight::Plain, vec![vec![1.0], vec![1.0]]).unwrap();
        assert!(!uniform_range_check(&s, &one, &opts).unwrap().pass);
        assert!(matches!(uniform_invert(&s, &one, &opts), Err(Error::RangeViolation { .. })));
        let zero = PiecewiseFunction::zero(s.system(), Weight::Plain, 1);
        assert!(uniform_range_check(&s, &zero, &opts).unwrap().pass);
        assert!(uniform_forward(&s, &PiecewiseFunction::zero(s.system(), Weight::SqrtVanishing, 1), &opts)
            .unwrap()
            .function
            .l2_norm()
            == 0.0);
    }
}

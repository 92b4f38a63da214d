//! Fixtures shared by the criterion benchmarks in `benches/`.

use mifht_core::theta::forward_map;
use mifht_core::{IntervalSystem, PiecewiseFunction, ThetaMatrix, Weight};

/// `n` unit intervals separated by unit gaps, starting at `-n`.
pub fn system(n: usize) -> IntervalSystem {
    let ends: Vec<(f64, f64)> = (0..n).map(|j| (2.0 * j as f64 - n as f64, 2.0 * j as f64 - n as f64 + 1.0)).collect();
    IntervalSystem::new(&ends).expect("disjoint fixture intervals")
}

/// Unit diagonal, off-diagonal entries 1/2: positive definite for every `n`.
pub fn half_coupled(n: usize) -> ThetaMatrix {
    let rows: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|k| if j == k { 1.0 } else { 0.5 }).collect()).collect();
    ThetaMatrix::from_rows(&rows).expect("finite fixture theta")
}

/// Sqrt-vanishing function with `modes` deterministic, decaying U coefficients per interval.
pub fn smooth_sqrt(sys: &IntervalSystem, modes: usize) -> PiecewiseFunction {
    let blocks = (0..sys.len())
        .map(|j| (0..modes).map(|l| ((j + 1) as f64 * (l as f64 + 0.5)).sin() / (l + 1) as f64).collect())
        .collect();
    PiecewiseFunction::from_real_coeffs(sys, Weight::SqrtVanishing, blocks).expect("fixture coefficients")
}

/// `(system, theta, phi0, psi = chi Theta H phi0)` on `n` intervals.
pub fn in_range(n: usize, modes: usize) -> (IntervalSystem, ThetaMatrix, PiecewiseFunction, PiecewiseFunction) {
    let sys = system(n);
    let theta = half_coupled(n);
    let phi = smooth_sqrt(&sys, modes);
    let psi = forward_map(&theta, &phi, 2 * modes + 16).expect("forward map of fixture");
    (sys, theta, phi, psi)
}

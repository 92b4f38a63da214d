//! The invariant suite at reduced sizes, on built-in fixtures with fixed seeds.

use mifht_core::bilinear::random_sqrt_function;
use mifht_core::fht::{fht_forward_side, fht_invert, hilbert_on_interval, inversion_formula_at, RANGE_TOL};
use mifht_core::pv::pv_oracle;
use mifht_core::rhp::{invert_via_resolvent, range_condition_j12, range_condition_n2};
use mifht_core::theta::forward_map;
use mifht_core::uniform::{uniform_forward, uniform_invert, uniform_range_check, TGrid};
use mifht_core::{
    bilinear_form_j, build_spectral_data, solve_phi, FourierGrid, GammaSolution, IntervalSystem, NystromSystem, PiecewiseFunction, Side,
    SolveOptions, ThetaMatrix, UniformOptions, Weight,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bundle::{Check, ResultBundle};
use crate::problem::ProblemSpec;

type Suite = mifht_core::Result<Vec<Check>>;

/// Runs every suite; a suite that errors is reported as a failed check.
pub fn selftest(spec: Option<&ProblemSpec>) -> ResultBundle {
    let mut b = ResultBundle::new("selftest", spec);
    let suites: [(&str, fn() -> Suite); 5] = [
        ("single-interval", single_interval),
        ("spd-system", spd_system),
        ("riemann-hilbert", riemann_hilbert),
        ("injectivity", injectivity),
        ("uniform-theta", uniform_theta),
    ];
    for (name, suite) in suites {
        match suite() {
            Ok(checks) => checks.into_iter().for_each(|c| b.check(c)),
            Err(e) => {
                b.check(Check::at_most(format!("{name}: completed"), f64::INFINITY, 0.0));
                b.warnings.push(format!("{name}: {e}"));
            }
        }
    }
    b
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn two() -> IntervalSystem {
    IntervalSystem::new(&[(-2.0, -1.0), (1.0, 2.0)]).expect("fixture geometry")
}

fn half_coupled() -> ThetaMatrix {
    ThetaMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).expect("fixture theta")
}

fn single_interval() -> Suite {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut round, mut oracle): (f64, f64) = (0.0, 0.0);
    for ends in [(-1.0, 1.0), (2.0, 5.0)] {
        let sys = IntervalSystem::new(&[ends])?;
        let iv = sys.get(0);
        for _ in 0..10 {
            let modes = rng.random_range(1..=32);
            let f = random_sqrt_function(&sys, modes, &mut rng)?;
            let h = PiecewiseFunction::from_coeffs(&sys, Weight::Plain, vec![hilbert_on_interval(&f, 0, modes + 1)?])?;
            round = round.max(fht_invert(&h, RANGE_TOL)?.rel_l2_error(&f)?);
            let z = iv.alpha + iv.len() * rng.random_range(0.01..0.99);
            let spectral = fht_forward_side(&f, 0, real(z), Side::OffCut)?;
            oracle = oracle.max((spectral.re - pv_oracle(|t| f.eval(0, t).re, &iv, z)?).abs() + spectral.im.abs());
        }
    }
    let sys = IntervalSystem::new(&[(-1.0, 1.0)])?;
    let one = PiecewiseFunction::from_real_coeffs(&sys, Weight::Plain, vec![vec![1.0]])?;
    let on: Vec<Complex64> = (0..20).map(|i| real(-1.0 + 2.0 * (i as f64 + 0.5) / 20.0)).collect();
    let kills_one = inversion_formula_at(&one, 0, &on)?.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(vec![
        Check::at_most("single-interval round trip", round, 1e-8),
        Check::at_most("principal value oracle", oracle, 1e-9),
        Check::at_most("inverse annihilates constants", kills_one, 1e-12),
    ])
}

fn spd_system() -> Suite {
    let sys = two();
    let theta = half_coupled();
    let opts = SolveOptions { nystrom: 48, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let phi0 = random_sqrt_function(&sys, 8, &mut rng)?;
    let psi = forward_map(&theta, &phi0, 64)?;
    let direct = solve_phi(&theta, &psi, &opts)?;
    let gamma = GammaSolution::at_one(&sys, &theta, &opts)?;
    let inv = invert_via_resolvent(&gamma, &psi, opts.range_tol)?;
    let dist = |p: &[Complex64]| p.iter().zip(&direct.c).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let (j1, j2) = range_condition_j12(&gamma, &inv.nu)?;
    let j12: Vec<Complex64> = j1.iter().zip(&j2).map(|(a, b)| a + b).collect();
    Ok(vec![
        Check::at_most("direct inversion error", direct.phi.rel_l2_error(&phi0)?, 1e-6),
        Check::at_most("resolvent inversion error", inv.phi.rel_l2_error(&phi0)?, 1e-6),
        Check::at_most("two-path discrepancy", inv.phi.rel_l2_error(&direct.phi)?, 1e-6),
        Check::at_most("recovered c", dist(&inv.c), 1e-8),
        Check::at_most("N2 prediction of c", dist(&range_condition_n2(&gamma, &inv.nu)?), 1e-5),
        Check::at_most("J12 prediction of c", dist(&j12), 1e-5),
    ])
}

fn riemann_hilbert() -> Suite {
    let sys = two();
    let g = GammaSolution::at_one(&sys, &half_coupled(), &SolveOptions { nystrom: 48, ..Default::default() })?;
    let pts: Vec<f64> = sys
        .intervals()
        .iter()
        .flat_map(|iv| (0..10).map(move |i| iv.alpha + iv.len() * (i as f64 + 0.5) / 10.0))
        .collect();
    let mut det: f64 = 0.0;
    for &x in &pts {
        for side in [Side::Above, Side::Below] {
            det = det.max((g.eval(real(x), side)?.determinant() - real(1.0)).norm());
        }
    }
    Ok(vec![
        Check::at_most("jump residual", g.verify_jump(&pts)?, 1e-7),
        Check::at_most("|det Gamma - 1|", det, 1e-8),
    ])
}

fn injectivity() -> Suite {
    let sys = two();
    let theta = half_coupled();
    let (sigma, _) = NystromSystem::assemble(&sys, &theta, 48, real(1.0))?.singular_values();
    let grid = FourierGrid { half_width: 100.0, points: 1 << 12 };
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let (mut jmin, mut asym) = (f64::INFINITY, 0.0_f64);
    for _ in 0..5 {
        let f = random_sqrt_function(&sys, 6, &mut rng)?;
        let g = random_sqrt_function(&sys, 6, &mut rng)?;
        jmin = jmin.min(bilinear_form_j(&theta, &f, &f, &grid)? / f.l2_norm().powi(2));
        asym = asym.max((bilinear_form_j(&theta, &f, &g, &grid)? - bilinear_form_j(&theta, &g, &f, &grid)?).abs());
    }
    Ok(vec![
        Check::above("sigma_min", sigma, 1e-6),
        Check::above("min J(f, f) / |f|^2", jmin, 0.0),
        Check::at_most("J asymmetry", asym, 1e-8),
    ])
}

fn uniform_theta() -> Suite {
    let sd = build_spectral_data(&two(), TGrid::default())?;
    let opts = UniformOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let f = random_sqrt_function(sd.system(), 6, &mut rng)?;
    let g = uniform_forward(&sd, &f, &opts)?.function;
    let round = uniform_invert(&sd, &g, &opts)?.function.rel_l2_error(&f)?;
    let mut orth: f64 = 0.0;
    for i in 0..10 {
        let m = sd.m_matrix(-20.0 + 4.0 * i as f64)?;
        orth = orth.max((m.transpose() * &m - DMatrix::identity(2, 2)).amax());
    }
    let one = PiecewiseFunction::from_real_coeffs(sd.system(), Weight::Plain, vec![vec![1.0], vec![1.0]])?;
    let worst = |s: &[f64]| s.iter().copied().fold(0.0, f64::max);
    Ok(vec![
        Check::at_most("uniform round trip", round, 1e-4),
        Check::at_most("M(t) orthogonality", orth, 1e-10),
        Check::above("constant rejected by range test", worst(&uniform_range_check(&sd, &one, &opts)?.scores), opts.range_tol),
        Check::at_most("forward image accepted by range test", worst(&uniform_range_check(&sd, &g, &opts)?.scores), opts.range_tol),
    ])
}

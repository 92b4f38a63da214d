//! Command dispatch: each command runs one pipeline of the core library and
//! collects its outputs and checks into a [`ResultBundle`].

use std::f64::consts::PI;

use mifht_core::fht::range_scan;
use mifht_core::rhp::{invert_via_resolvent, range_check_l1, range_condition_j12, range_condition_n2};
use mifht_core::theta::{compute_c, compute_nu, forward_map};
use mifht_core::uniform::{uniform_invert, uniform_range_check};
use mifht_core::{
    build_spectral_data, injectivity_report, solve_phi, Error, FourierGrid, GammaSolution, IntervalSystem, PiecewiseFunction, Side,
    SolveOptions, ThetaClass, ThetaMatrix, UniformOptions, Weight,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::json;

use crate::bundle::{complex_vec_json, max_norm, Check, ResultBundle};
use crate::error::{CliError, CliResult, EXIT_CHECK_FAILED};
use crate::problem::{Command, ProblemSpec};
use crate::selftest::selftest;
use crate::table::Table;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Runs the command named in the spec.
pub fn run_command(spec: &ProblemSpec) -> CliResult<ResultBundle> {
    let command = spec.command.ok_or_else(|| CliError::schema("command", "no command given"))?;
    if command == Command::Selftest {
        return Ok(selftest(Some(spec)));
    }
    let sys = spec.system()?;
    let theta = spec.theta_matrix()?;
    let mut b = ResultBundle::new(command.name(), Some(spec));
    b.scalar("theta_class", json!(theta.class().name()));
    match command {
        Command::Forward => forward(spec, &sys, &theta, &mut b)?,
        Command::Invert => invert(spec, &sys, &theta, &mut b)?,
        Command::RangeCheck => range_check(spec, &sys, &theta, &mut b)?,
        Command::GammaCheck => gamma_check(spec, &sys, &theta, &mut b)?,
        Command::UniformInvert => uniform(spec, &sys, &theta, &mut b)?,
        Command::InjectivityReport => injectivity(spec, &sys, &theta, &mut b)?,
        Command::Selftest => unreachable!(),
    }
    Ok(b)
}

/// Exit code of a completed run: 0 when every check passed, 5 when a range
/// verdict failed, 1 for any other failed check.
pub fn bundle_exit_code(b: &ResultBundle) -> i32 {
    if b.pass {
        0
    } else if b.checks.iter().any(|c| !c.pass && c.kind == "range") {
        5
    } else {
        EXIT_CHECK_FAILED
    }
}

fn solve_options(spec: &ProblemSpec) -> SolveOptions {
    SolveOptions {
        nystrom: spec.grid.nystrom,
        range_tol: spec.tolerances.range,
        singular_tol: spec.tolerances.singular,
    }
}

/// `c`, `kappa` and `int f / R_+` of every piece.
fn range_scalars(f: &PiecewiseFunction, b: &mut ResultBundle, prefix: &str) -> CliResult<Vec<Complex64>> {
    let data = (0..f.system().len()).map(|j| range_scan(f, j)).collect::<Result<Vec<_>, _>>()?;
    let pick = |g: fn(&mifht_core::RangeData) -> Complex64| data.iter().map(g).collect::<Vec<_>>();
    let c = pick(|d| d.c);
    b.scalar(&format!("{prefix}c"), complex_vec_json(&c));
    b.scalar(&format!("{prefix}kappa"), complex_vec_json(&pick(|d| d.kappa)));
    b.scalar(&format!("{prefix}moment0"), complex_vec_json(&pick(|d| d.m0)));
    Ok(c)
}

fn forward(spec: &ProblemSpec, sys: &IntervalSystem, theta: &ThetaMatrix, b: &mut ResultBundle) -> CliResult<()> {
    let phi = spec.rhs_function(sys, theta)?;
    let psi = forward_map(theta, &phi, spec.grid.modes.max(phi.max_modes() + 1))?;
    range_scalars(&psi, b, "")?;
    b.table(Table::sample("input", &phi, spec.grid.modes));
    b.table(Table::sample("psi", &psi, spec.grid.modes));
    Ok(())
}

fn invert(spec: &ProblemSpec, sys: &IntervalSystem, theta: &ThetaMatrix, b: &mut ResultBundle) -> CliResult<()> {
    let tol = &spec.tolerances;
    let opts = solve_options(spec);
    theta.require_invertible_diagonal()?;
    let psi = spec.rhs_function(sys, theta)?;
    let direct = solve_phi(theta, &psi, &opts)?;
    let d = &direct.diagnostics;
    range_scalars(&psi, b, "")?;
    b.scalar("sigma_min", json!(d.sigma_min));
    b.scalar("sigma_max", json!(d.sigma_max));
    b.check(Check::at_most("nystrom_residual", d.residual, tol.residual));
    b.check(Check::above("sigma_min", d.sigma_min, tol.singular));
    b.check(Check::range("range2_residual", max_norm(&d.range2), tol.prediction));
    b.warn(d.warning.clone());
    b.table(Table::sample("phi", &direct.phi, spec.grid.modes));
    if theta.class() == ThetaClass::SpdSymmetric {
        let gamma = GammaSolution::at_one(sys, theta, &opts)?;
        let inv = invert_via_resolvent(&gamma, &psi, opts.range_tol)?;
        let c_err = direct.c.iter().zip(&inv.c).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        b.check(Check::at_most("two_path_discrepancy", inv.phi.rel_l2_error(&direct.phi)?, tol.agreement));
        b.check(Check::at_most("c_discrepancy", c_err, tol.c_match));
        b.table(Table::sample("phi_resolvent", &inv.phi, spec.grid.modes));
    }
    Ok(())
}

fn range_check(spec: &ProblemSpec, sys: &IntervalSystem, theta: &ThetaMatrix, b: &mut ResultBundle) -> CliResult<()> {
    let tol = &spec.tolerances;
    let opts = solve_options(spec);
    theta.require_invertible_diagonal()?;
    let psi = spec.rhs_function(sys, theta)?;
    let c = compute_c(&psi)?;
    range_scalars(&psi, b, "")?;
    let gamma = GammaSolution::at_one(sys, theta, &opts)?;
    let nu = compute_nu(&psi, &c, theta, opts.range_tol)?;
    let dist = |p: &[Complex64]| p.iter().zip(&c).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let (j1, j2) = range_condition_j12(&gamma, &nu)?;
    let j12: Vec<Complex64> = j1.iter().zip(&j2).map(|(a, b)| a + b).collect();
    b.scalar("c_predicted_j12", complex_vec_json(&j12));
    b.check(Check::range("j12_prediction", dist(&j12), tol.prediction));
    if theta.is_symmetric() {
        let n2 = range_condition_n2(&gamma, &nu)?;
        b.scalar("c_predicted_n2", complex_vec_json(&n2));
        b.check(Check::range("n2_prediction", dist(&n2), tol.prediction));
        if psi.weight() == Weight::Plain {
            b.check(Check::range("bounded_data_condition", max_norm(&range_check_l1(&gamma, &psi)?), tol.condition));
        }
    }
    Ok(())
}

fn gamma_check(spec: &ProblemSpec, sys: &IntervalSystem, theta: &ThetaMatrix, b: &mut ResultBundle) -> CliResult<()> {
    let tol = &spec.tolerances;
    let lambda = spec.grid.lambda();
    let g = GammaSolution::build(sys, theta, lambda, spec.grid.nystrom, tol.singular)?;
    let n = sys.len();
    let (smin, smax) = g.singular_values();
    b.scalar("sigma_min", json!(smin));
    b.scalar("sigma_max", json!(smax));
    b.check(Check::at_most("nystrom_residual", g.solve_residual(), tol.residual));
    let pts: Vec<f64> = sys
        .intervals()
        .iter()
        .flat_map(|iv| (0..20).map(move |i| iv.alpha + iv.len() * (i as f64 + 0.5) / 20.0))
        .collect();
    b.check(Check::at_most("jump_residual", g.verify_jump(&pts)?, tol.jump));
    let (mut det, mut nojump): (f64, f64) = (0.0, 0.0);
    for &x in &pts {
        let z = Complex64::new(x, 0.0);
        let k = sys.locate(x).expect("sample point lies on an interval");
        let (up, down) = (g.eval(z, Side::Above)?, g.eval(z, Side::Below)?);
        det = det.max((up.determinant() - ONE).norm()).max((down.determinant() - ONE).norm());
        let gf = (&up - &down) * g.kernel().f(k, x);
        let gt = g.kernel().g(k, x).transpose();
        let ginv = &gt * g.inverse(z, Side::Above)? - &gt * g.inverse(z, Side::Below)?;
        nojump = nojump.max(gf.norm()).max(ginv.norm());
    }
    b.check(Check::at_most("det_deviation", det, tol.det));
    b.check(Check::at_most("no_jump_residual", nojump, tol.no_jump));
    let id = DMatrix::<Complex64>::identity(n, n);
    let (mut far, mut decay): (f64, f64) = (0.0, 0.0);
    for i in 0..8 {
        let a = 2.0 * PI * i as f64 / 8.0 + 0.3;
        let r1 = 1e3 * (g.eval(Complex64::from_polar(1e3, a), Side::OffCut)? - &id).norm();
        let r2 = 1e6 * (g.eval(Complex64::from_polar(1e6, a), Side::OffCut)? - &id).norm();
        far = far.max(r1 / 1e3);
        decay = decay.max((r1 - r2).abs() / r2.max(f64::MIN_POSITIVE));
    }
    b.scalar("far_field_at_1e3", json!(far));
    b.check(Check::at_most("inverse_z_decay", decay, tol.decay));
    Ok(())
}

fn uniform(spec: &ProblemSpec, sys: &IntervalSystem, theta: &ThetaMatrix, b: &mut ResultBundle) -> CliResult<()> {
    let tol = &spec.tolerances;
    let all_ones = theta.matrix().iter().all(|&v| v == 1.0);
    if !all_ones {
        return Err(Error::InvalidArgument("uniform-invert needs theta = \"uniform\"".into()).into());
    }
    let g = spec.rhs_function(sys, theta)?;
    let sd = build_spectral_data(sys, spec.grid.t_grid())?;
    let opts = UniformOptions {
        modes: spec.grid.modes,
        lambda0: tol.lambda0,
        range_tol: tol.uniform_range,
        truncation_tol: tol.truncation,
        ..Default::default()
    };
    let report = uniform_range_check(&sd, &g, &opts)?;
    for (m, &s) in report.scores.iter().enumerate() {
        b.check(Check::range(format!("range_score_{m}"), s, report.tol));
    }
    b.scalar("t_limit", json!(sd.t_limit()));
    let out = uniform_invert(&sd, &g, &opts)?;
    b.check(Check::at_most("boundary_fraction", out.boundary_fraction, tol.truncation));
    b.warn(out.warning);
    b.table(Table::sample("phi", &out.function, spec.grid.modes));
    Ok(())
}

fn injectivity(spec: &ProblemSpec, sys: &IntervalSystem, theta: &ThetaMatrix, b: &mut ResultBundle) -> CliResult<()> {
    let r = injectivity_report(theta, sys, spec.grid.nystrom, spec.grid.samples, spec.grid.seed, &FourierGrid::default())?;
    b.scalar("sigma_max", json!(r.sigma_max));
    b.scalar("j_min_ratio", json!(r.j_min_ratio));
    b.scalar("samples", json!(r.samples));
    b.check(Check::above("sigma_min", r.sigma_min, spec.tolerances.singular));
    if r.class == ThetaClass::SpdSymmetric {
        b.check(Check::above("j_min_ratio", r.j_min_ratio, 0.0));
    }
    b.warn(r.caveat);
    Ok(())
}

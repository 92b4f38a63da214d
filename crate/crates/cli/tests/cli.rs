use std::path::{Path, PathBuf};
use std::process::Command as Process;

use mifht_cli::{bundle_exit_code, parse_problem, run_command, Table};
use mifht_core::fht::hilbert_on_interval;
use mifht_core::{IntervalSystem, PiecewiseFunction, Weight};
use num_complex::Complex64;

fn problems() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems")
}

fn mifht(args: &[&str], threads: Option<&str>) -> (i32, String) {
    let mut cmd = Process::new(env!("CARGO_BIN_EXE_mifht"));
    cmd.args(args).env_remove("MIFHT_THREADS");
    if let Some(t) = threads {
        cmd.env("MIFHT_THREADS", t);
    }
    let out = cmd.output().expect("binary runs");
    (out.status.code().expect("exit code"), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().into()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn forward_on_one_interval_delegates_to_single_interval_transform() {
    let spec = parse_problem("command = \"forward\"\nintervals = [[2.0, 5.0]]\nrhs = \"cheb-sqrt 3\"\n").unwrap();
    let b = run_command(&spec).unwrap();
    let sys = IntervalSystem::new(&[(2.0, 5.0)]).unwrap();
    let f = PiecewiseFunction::from_real_coeffs(&sys, Weight::SqrtVanishing, vec![vec![0.0, 0.0, 0.0, 1.0]]).unwrap();
    let h = PiecewiseFunction::from_coeffs(&sys, Weight::Plain, vec![hilbert_on_interval(&f, 0, 5).unwrap()]).unwrap();
    let psi = b.tables.iter().find(|t| t.name == "psi").unwrap();
    let worst = psi.rows.iter().map(|&(j, x, v)| (v - h.eval(j, x)).norm()).fold(0.0, f64::max);
    assert!(worst < 1e-13, "{worst}");
}

#[test]
fn invert_on_spd_fixture_records_two_path_discrepancy() {
    let text = std::fs::read_to_string(problems().join("spd_two_intervals.toml")).unwrap();
    let spec = parse_problem(&text).unwrap();
    let b = run_command(&spec).unwrap();
    assert!(b.pass, "{:?}", b.checks);
    let disc = b.checks.iter().find(|c| c.name == "two_path_discrepancy").unwrap();
    assert!(disc.value <= 1e-6 && disc.tol == 1e-6);
    // the recovered phi is the inner preset of forward-of
    let phi = b.tables.iter().find(|t| t.name == "phi").unwrap();
    let sys = spec.system().unwrap();
    let worst = phi
        .rows
        .iter()
        .map(|&(j, x, v)| {
            let iv = sys.get(j);
            let exact = iv.weight(x) * (-((x - iv.center()) / 0.3_f64).powi(2)).exp();
            (v - Complex64::new(exact, 0.0)).norm()
        })
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn selftest_passes() {
    let b = mifht_cli::selftest::selftest(None);
    assert!(b.pass, "{:?} {:?}", b.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>(), b.warnings);
    assert!(b.checks.len() >= 15);
}

#[test]
fn range_check_rejects_data_outside_the_range() {
    let spec = parse_problem(
        "command = \"range-check\"\nintervals = [[-2, -1], [1, 2.5]]\ntheta = [[1.0, 0.5], [0.5, 1.0]]\n\
         [rhs]\npreset = \"linear\"\nintercept = 0.3\n",
    )
    .unwrap();
    let b = run_command(&spec).unwrap();
    assert!(!b.pass);
    assert_eq!(bundle_exit_code(&b), 5);
    assert!(b.checks.iter().all(|c| c.kind == "range"));
}

#[test]
fn identical_specs_give_identical_outputs_at_any_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let problem = problems().join("spd_two_intervals.toml");
    let mut runs = Vec::new();
    for (i, threads) in [None, Some("1"), Some("3")].into_iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        let (code, err) = mifht(&["invert", "--problem", problem.to_str().unwrap(), "--output", out.to_str().unwrap()], threads);
        assert_eq!(code, 0, "{err}");
        runs.push(files(&out));
    }
    assert_eq!(runs[0].len(), 3);
    assert!(runs.iter().all(|r| r == &runs[0]));
}

#[test]
fn written_tables_read_back_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let spec = parse_problem(&std::fs::read_to_string(problems().join("uniform_two_intervals.toml")).unwrap()).unwrap();
    let b = run_command(&spec).unwrap();
    assert!(b.pass, "{:?}", b.checks);
    b.write(dir.path()).unwrap();
    for t in &b.tables {
        let text = std::fs::read_to_string(dir.path().join(t.file_name())).unwrap();
        let back = Table::from_csv(&t.name, &text).unwrap();
        assert_eq!(back.rows.len(), t.rows.len());
        for (p, q) in back.rows.iter().zip(&t.rows) {
            assert_eq!((p.0, p.1.to_bits(), p.2.re.to_bits(), p.2.im.to_bits()), (q.0, q.1.to_bits(), q.2.re.to_bits(), q.2.im.to_bits()));
        }
    }
    let diag: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("diagnostics.json")).unwrap()).unwrap();
    assert_eq!(diag["provenance"]["input_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(diag["provenance"]["parameters"]["grid"]["modes"], 64);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = d.join("out");
    let out = out.to_str().unwrap();
    let two = "intervals = [[-2, -1], [1, 2]]\n";
    let cases = [
        ("invert", "intervals = [[-1, 1]]\nrhs = \"nonsense\"\n", None, 2),
        ("invert", "intervals = [[-1, 1], [0, 2]]\nrhs = \"const\"\n", None, 3),
        ("invert", &format!("{two}theta = [[0.0, 1.0], [1.0, 1.0]]\nrhs = \"const\"\n"), None, 4),
        ("range-check", "intervals = [[-2, -1], [1, 3]]\ntheta = [[1.0, 0.5], [0.5, 1.0]]\nrhs = \"linear\"\n", None, 5),
        ("invert", &format!("{two}rhs = \"const\"\n[tolerances]\nsingular = 10.0\n"), None, 6),
        ("selftest", two, Some("zero"), 2),
    ];
    for (i, (cmd, text, threads, expect)) in cases.iter().enumerate() {
        let p = write(d, &format!("p{i}.toml"), text);
        let (code, err) = mifht(&[cmd, "--problem", &p, "--output", out], *threads);
        assert_eq!(code, *expect, "case {i}: {err}");
    }
    let (code, _) = mifht(&["forward", "--output", out], None);
    assert_eq!(code, 2);
    let spd = problems().join("spd_two_intervals.toml");
    let (code, err) = mifht(&["range-check", "--problem", spd.to_str().unwrap(), "--output", out], None);
    assert_eq!(code, 0, "{err}");
}

#[test]
fn command_line_overrides_reach_the_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let problem = problems().join("three_intervals.toml");
    let (code, err) = mifht(
        &["gamma-check", "--problem", problem.to_str().unwrap(), "--output", out.to_str().unwrap(), "--nystrom", "40", "--lambda", "-1.5,0.25"],
        None,
    );
    assert_eq!(code, 0, "{err}");
    let diag: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("diagnostics.json")).unwrap()).unwrap();
    assert_eq!(diag["command"], "gamma-check");
    assert_eq!(diag["provenance"]["parameters"]["grid"]["nystrom"], 40);
    assert_eq!(diag["provenance"]["parameters"]["grid"]["lambda"], serde_json::json!([-1.5, 0.25]));
}

//! Problem files: TOML with top-level keys `command`, `intervals`, `theta`, `rhs`,
//! `grid` and `tolerances`, validated into a [`ProblemSpec`] with defaults filled in.

use std::path::Path;

use mifht_core::theta::forward_map;
use mifht_core::uniform::TGrid;
use mifht_core::{IntervalSystem, PiecewiseFunction, ThetaMatrix, Weight};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// The operations exposed by the driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Forward,
    Invert,
    RangeCheck,
    GammaCheck,
    UniformInvert,
    InjectivityReport,
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Forward => "forward",
            Command::Invert => "invert",
            Command::RangeCheck => "range-check",
            Command::GammaCheck => "gamma-check",
            Command::UniformInvert => "uniform-invert",
            Command::InjectivityReport => "injectivity-report",
            Command::Selftest => "selftest",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        <Self as clap::ValueEnum>::from_str(s, false).ok()
    }
}

/// Interaction matrix as written in the problem file.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ThetaSpec {
    Named(String),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightSpec {
    #[default]
    Plain,
    Sqrt,
}

impl From<WeightSpec> for Weight {
    fn from(w: WeightSpec) -> Weight {
        match w {
            WeightSpec::Plain => Weight::Plain,
            WeightSpec::Sqrt => Weight::SqrtVanishing,
        }
    }
}

fn one() -> f64 {
    1.0
}

fn bump_width() -> f64 {
    0.25
}

/// Right-hand side (or input function) of a command.
///
/// Presets with a `weight` key are multiplied by `sqrt((x - alpha)(beta - x))`
/// when it is `"sqrt"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RhsSpec {
    Const {
        #[serde(default = "one")]
        value: f64,
        #[serde(default)]
        weight: WeightSpec,
    },
    /// `slope * x + intercept`.
    Linear {
        #[serde(default = "one")]
        slope: f64,
        #[serde(default)]
        intercept: f64,
        #[serde(default)]
        weight: WeightSpec,
    },
    /// `w(x) U_k((x - m) / h)` on every interval.
    ChebSqrt { k: usize },
    /// `amplitude * exp(-((x - center) / width)^2)`, centred on each interval by default.
    GaussianBump {
        center: Option<f64>,
        #[serde(default = "bump_width")]
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        weight: WeightSpec,
    },
    /// The forward map of the problem's theta applied to another preset.
    ForwardOf { inner: Box<RhsSpec> },
    /// Per-interval samples at explicit nodes, projected onto the mode basis.
    Samples {
        nodes: Vec<Vec<f64>>,
        re: Vec<Vec<f64>>,
        im: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        weight: WeightSpec,
    },
}

/// Discretisation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Chebyshev modes per interval for projected functions and output tables.
    pub modes: usize,
    /// Nyström nodes per interval.
    pub nystrom: usize,
    /// Half-width of the uniform-theta t-grid.
    pub tmax: f64,
    pub dt: f64,
    /// Spectral parameter of `gamma-check`, as `[re, im]`.
    pub lambda: [f64; 2],
    /// Random samples of `injectivity-report`.
    pub samples: usize,
    pub seed: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            modes: 64,
            nystrom: 96,
            tmax: 32.0,
            dt: 1.0 / 64.0,
            lambda: [1.0, 0.0],
            samples: 20,
            seed: 2024,
        }
    }
}

impl GridSpec {
    pub fn t_grid(&self) -> TGrid {
        TGrid {
            points: 2 * (self.tmax / self.dt).round() as usize,
            dt: self.dt,
        }
    }

    pub fn lambda(&self) -> Complex64 {
        Complex64::new(self.lambda[0], self.lambda[1])
    }
}

/// Tolerances; every reported residual is compared against one of these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Single-interval range test of the inversion.
    pub range: f64,
    /// Smallest admissible singular value of the Nyström matrix.
    pub singular: f64,
    /// Relative residual of the Nyström solve.
    pub residual: f64,
    /// Agreement of the direct and resolvent inversions.
    pub agreement: f64,
    /// Agreement of the recovered and directly computed `c`.
    pub c_match: f64,
    /// Agreement of `c` with its prediction from the range conditions.
    pub prediction: f64,
    /// Residual of the bounded-data range condition.
    pub condition: f64,
    pub jump: f64,
    pub det: f64,
    pub no_jump: f64,
    /// Relative change of `|z| ||Gamma(z) - Id||` between `|z| = 1e3` and `1e6`.
    pub decay: f64,
    pub uniform_range: f64,
    pub lambda0: f64,
    pub truncation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            range: 1e-8,
            singular: 1e-10,
            residual: 1e-8,
            agreement: 1e-6,
            c_match: 1e-8,
            prediction: 1e-5,
            condition: 1e-6,
            jump: 1e-7,
            det: 1e-8,
            no_jump: 1e-8,
            decay: 1e-2,
            uniform_range: 1e-6,
            lambda0: 0.25,
            truncation: 1e-8,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    command: Option<String>,
    intervals: Vec<[f64; 2]>,
    theta: Option<toml::Value>,
    rhs: Option<toml::Value>,
    #[serde(default)]
    grid: GridSpec,
    #[serde(default)]
    tolerances: Tolerances,
}

/// A validated problem with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemSpec {
    pub command: Option<Command>,
    pub intervals: Vec<(f64, f64)>,
    pub theta: ThetaSpec,
    pub rhs: Option<RhsSpec>,
    pub grid: GridSpec,
    pub tolerances: Tolerances,
    /// SHA-256 of the problem text, lowercase hex.
    #[serde(skip)]
    pub input_hash: String,
}

/// Command-line overrides of problem parameters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub command: Option<Command>,
    pub modes: Option<usize>,
    pub nystrom: Option<usize>,
    pub tmax: Option<f64>,
    /// Replaces the range tolerance.
    pub tol: Option<f64>,
    pub lambda: Option<Complex64>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads and validates a problem file.
pub fn parse_problem_file(path: &Path) -> CliResult<ProblemSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_problem(&text)
}

/// Validates problem text; geometry errors surface as core errors.
pub fn parse_problem(text: &str) -> CliResult<ProblemSpec> {
    let raw: RawProblem = toml::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
    let command = match raw.command.as_deref() {
        None => None,
        Some(s) => Some(Command::parse(s).ok_or_else(|| CliError::schema("command", format!("unknown command `{s}`")))?),
    };
    let intervals: Vec<(f64, f64)> = raw.intervals.iter().map(|&[a, b]| (a, b)).collect();
    if intervals.is_empty() {
        return Err(CliError::schema("intervals", "at least one interval is required"));
    }
    let sys = IntervalSystem::new(&intervals)?;
    let n = sys.len();
    let theta = match raw.theta {
        None => ThetaSpec::Named("identity".into()),
        Some(toml::Value::String(s)) if s == "identity" || s == "uniform" => ThetaSpec::Named(s),
        Some(toml::Value::String(s)) => {
            return Err(CliError::schema("theta", format!("expected \"identity\", \"uniform\" or a matrix, got \"{s}\"")))
        }
        Some(v) => {
            let m: Vec<Vec<f64>> = v.try_into().map_err(|e: toml::de::Error| CliError::schema("theta", e.message()))?;
            if m.len() != n || m.iter().any(|r| r.len() != n) {
                return Err(CliError::schema("theta", format!("matrix must be {n}x{n}")));
            }
            ThetaSpec::Matrix(m)
        }
    };
    let rhs = raw.rhs.map(|v| parse_rhs(v, "rhs")).transpose()?;
    if let Some(r) = &rhs {
        validate_rhs(r, n, "rhs")?;
    }
    let spec = ProblemSpec {
        command,
        intervals,
        theta,
        rhs,
        grid: raw.grid,
        tolerances: raw.tolerances,
        input_hash: sha256_hex(text.as_bytes()),
    };
    validate_grid(&spec.grid)?;
    spec.theta_matrix()?;
    Ok(spec)
}

/// Accepts a table or a shorthand string such as `"cheb-sqrt 2"` or `"linear"`.
fn parse_rhs(v: toml::Value, field: &str) -> CliResult<RhsSpec> {
    match v {
        toml::Value::String(s) => {
            let mut words = s.split_whitespace();
            let name = words.next().unwrap_or("");
            let arg = words.next();
            if words.next().is_some() {
                return Err(CliError::schema(field, format!("cannot parse preset \"{s}\"")));
            }
            let mut table = toml::Table::new();
            table.insert("preset".into(), toml::Value::String(name.into()));
            if let Some(a) = arg {
                if name != "cheb-sqrt" {
                    return Err(CliError::schema(field, format!("preset `{name}` takes no inline argument")));
                }
                let k: i64 = a.parse().map_err(|_| CliError::schema(field, format!("`{a}` is not a mode index")))?;
                table.insert("k".into(), toml::Value::Integer(k));
            }
            parse_rhs(toml::Value::Table(table), field)
        }
        toml::Value::Table(mut t) => {
            // the inner preset is parsed recursively below so that shorthands work there too
            let inner = t.remove("inner");
            if inner.is_some() {
                let mut placeholder = toml::Table::new();
                placeholder.insert("preset".into(), toml::Value::String("const".into()));
                t.insert("inner".into(), toml::Value::Table(placeholder));
            }
            let mut spec: RhsSpec = toml::Value::Table(t)
                .try_into()
                .map_err(|e: toml::de::Error| CliError::schema(field, e.message()))?;
            match (&mut spec, inner) {
                (RhsSpec::ForwardOf { inner: slot }, Some(v)) => **slot = parse_rhs(v, &format!("{field}.inner"))?,
                (RhsSpec::ForwardOf { .. }, None) => return Err(CliError::schema(field, "`forward-of` needs an `inner` preset")),
                (_, Some(_)) => return Err(CliError::schema(&format!("{field}.inner"), "only `forward-of` takes an inner preset")),
                _ => {}
            }
            Ok(spec)
        }
        other => Err(CliError::schema(field, format!("expected a table or a preset name, got {}", other.type_str()))),
    }
}

fn validate_rhs(r: &RhsSpec, n: usize, field: &str) -> CliResult<()> {
    match r {
        RhsSpec::GaussianBump { width, .. } if !(*width > 0.0) => Err(CliError::schema(&format!("{field}.width"), "must be positive")),
        RhsSpec::ForwardOf { inner } => validate_rhs(inner, n, &format!("{field}.inner")),
        RhsSpec::Samples { nodes, re, im, .. } => {
            let blocks = |name: &str, b: &[Vec<f64>]| -> CliResult<()> {
                if b.len() != n {
                    return Err(CliError::schema(&format!("{field}.{name}"), format!("{} blocks for {n} intervals", b.len())));
                }
                for (j, (x, v)) in nodes.iter().zip(b).enumerate() {
                    if x.len() != v.len() {
                        return Err(CliError::schema(
                            &format!("{field}.{name}[{j}]"),
                            format!("{} values for {} nodes", v.len(), x.len()),
                        ));
                    }
                }
                Ok(())
            };
            if nodes.len() != n {
                return Err(CliError::schema(&format!("{field}.nodes"), format!("{} blocks for {n} intervals", nodes.len())));
            }
            if let Some((j, _)) = nodes.iter().enumerate().find(|(_, x)| x.is_empty()) {
                return Err(CliError::schema(&format!("{field}.nodes[{j}]"), "no samples"));
            }
            blocks("re", re)?;
            if let Some(im) = im {
                blocks("im", im)?;
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

fn validate_grid(g: &GridSpec) -> CliResult<()> {
    if g.modes == 0 {
        return Err(CliError::schema("grid.modes", "must be positive"));
    }
    if g.nystrom < 2 {
        return Err(CliError::schema("grid.nystrom", "must be at least 2"));
    }
    if !(g.dt > 0.0 && g.tmax > g.dt) {
        return Err(CliError::schema("grid.tmax", "need 0 < dt < tmax"));
    }
    if g.samples == 0 {
        return Err(CliError::schema("grid.samples", "must be positive"));
    }
    Ok(())
}

impl ProblemSpec {
    /// Applies command-line overrides and revalidates the grid.
    pub fn apply(&mut self, o: &Overrides) -> CliResult<()> {
        if let Some(c) = o.command {
            self.command = Some(c);
        }
        if let Some(m) = o.modes {
            self.grid.modes = m;
        }
        if let Some(m) = o.nystrom {
            self.grid.nystrom = m;
        }
        if let Some(t) = o.tmax {
            self.grid.tmax = t;
        }
        if let Some(t) = o.tol {
            if !(t > 0.0) {
                return Err(CliError::schema("--tol", "must be positive"));
            }
            self.tolerances.range = t;
        }
        if let Some(l) = o.lambda {
            self.grid.lambda = [l.re, l.im];
        }
        validate_grid(&self.grid)
    }

    pub fn system(&self) -> CliResult<IntervalSystem> {
        Ok(IntervalSystem::new(&self.intervals)?)
    }

    pub fn theta_matrix(&self) -> CliResult<ThetaMatrix> {
        let n = self.intervals.len();
        Ok(match &self.theta {
            ThetaSpec::Named(s) if s == "uniform" => ThetaMatrix::uniform(n),
            ThetaSpec::Named(_) => ThetaMatrix::identity(n),
            ThetaSpec::Matrix(rows) => ThetaMatrix::from_rows(rows)?,
        })
    }

    pub fn rhs_spec(&self) -> CliResult<&RhsSpec> {
        self.rhs.as_ref().ok_or_else(|| CliError::schema("rhs", "this command needs a right-hand side"))
    }

    /// Builds the right-hand side with `grid.modes` modes per interval.
    pub fn rhs_function(&self, sys: &IntervalSystem, theta: &ThetaMatrix) -> CliResult<PiecewiseFunction> {
        build_rhs(self.rhs_spec()?, sys, theta, self.grid.modes)
    }
}

fn build_rhs(r: &RhsSpec, sys: &IntervalSystem, theta: &ThetaMatrix, modes: usize) -> CliResult<PiecewiseFunction> {
    let weighted = |weight: WeightSpec, f: &dyn Fn(usize, f64) -> f64| -> CliResult<PiecewiseFunction> {
        let w: Weight = weight.into();
        let g = |j: usize, x: f64| match w {
            Weight::Plain => f(j, x),
            Weight::SqrtVanishing => f(j, x) * sys.get(j).weight(x),
        };
        Ok(PiecewiseFunction::from_real_fn(sys, w, modes, g)?)
    };
    match r {
        RhsSpec::Const { value, weight } => weighted(*weight, &|_, _| *value),
        RhsSpec::Linear { slope, intercept, weight } => weighted(*weight, &|_, x| slope * x + intercept),
        RhsSpec::ChebSqrt { k } => {
            let blocks = (0..sys.len())
                .map(|_| (0..=*k).map(|l| if l == *k { 1.0 } else { 0.0 }).collect())
                .collect();
            Ok(PiecewiseFunction::from_real_coeffs(sys, Weight::SqrtVanishing, blocks)?)
        }
        RhsSpec::GaussianBump { center, width, amplitude, weight } => weighted(*weight, &|j, x| {
            let c = center.unwrap_or_else(|| sys.get(j).center());
            amplitude * (-((x - c) / width).powi(2)).exp()
        }),
        RhsSpec::ForwardOf { inner } => {
            let phi = build_rhs(inner, sys, theta, modes)?;
            Ok(forward_map(theta, &phi, modes.max(phi.max_modes() + 1))?)
        }
        RhsSpec::Samples { nodes, re, im, weight } => {
            let values: Vec<Vec<Complex64>> = re
                .iter()
                .enumerate()
                .map(|(j, r)| {
                    r.iter()
                        .enumerate()
                        .map(|(i, &v)| Complex64::new(v, im.as_ref().map_or(0.0, |im| im[j][i])))
                        .collect()
                })
                .collect();
            let f = PiecewiseFunction::from_samples(sys, (*weight).into(), modes, nodes, &values)?;
            Ok(if im.is_none() { f.into_real() } else { f })
        }
    }
}

#[cfg(test)]
mod tests {
    use mifht_core::{Error, ThetaClass};

    use super::*;

    #[test]
    fn minimal_single_interval() {
        let spec = parse_problem("intervals = [[-1.0, 1.0]]\nrhs = \"linear\"\n").unwrap();
        assert_eq!(spec.theta, ThetaSpec::Named("identity".into()));
        assert_eq!(spec.grid, GridSpec::default());
        let sys = spec.system().unwrap();
        let g = spec.rhs_function(&sys, &spec.theta_matrix().unwrap()).unwrap();
        assert!((g.eval(0, 0.3).re - 0.3).abs() < 1e-14);
    }

    #[test]
    fn uniform_theta_classifies() {
        let spec = parse_problem("intervals = [[-2, -1], [1, 2]]\ntheta = \"uniform\"\n").unwrap();
        assert_eq!(spec.theta_matrix().unwrap().class(), ThetaClass::Uniform);
    }

    #[test]
    fn degenerate_diagonal_parses_and_fails_later() {
        let spec = parse_problem("intervals = [[-2, -1], [1, 2]]\ntheta = [[0.0, 1.0], [1.0, 1.0]]\n").unwrap();
        let err = spec.theta_matrix().unwrap().require_invertible_diagonal().unwrap_err();
        assert!(matches!(err, Error::DegenerateDiagonal(0)));
    }

    #[test]
    fn schema_errors_carry_context() {
        let e = parse_problem("intervals = [[-1, 1]]\n\n[grid]\nmodez = 3\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 4") && msg.contains("modez"), "{msg}");
        assert_eq!(e.exit_code(), 2);
        let e = parse_problem("intervals = [[-1, 1]]\ntheta = [[1.0, 0.0]]\n").unwrap_err();
        assert!(e.to_string().contains("`theta`"));
        let e = parse_problem("intervals = [[-1, 1]]\n[rhs]\npreset = \"samples\"\nnodes = [[0.0, 0.5]]\nre = [[1.0]]\n").unwrap_err();
        assert!(e.to_string().contains("rhs.re[0]"), "{e}");
        let e = parse_problem("intervals = [[-1, 1]]\nrhs = \"cheb-sqrt x\"\n").unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn geometry_errors_map_to_geometry_code() {
        let e = parse_problem("intervals = [[-1, 1], [0.5, 2]]\n").unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn presets_build() {
        let text = "intervals = [[-2, -1], [1, 2]]\ntheta = [[1.0, 0.5], [0.5, 1.0]]\n\
                    [rhs]\npreset = \"forward-of\"\ninner = \"cheb-sqrt 2\"\n";
        let spec = parse_problem(text).unwrap();
        let sys = spec.system().unwrap();
        let psi = spec.rhs_function(&sys, &spec.theta_matrix().unwrap()).unwrap();
        assert_eq!(psi.weight(), Weight::Plain);
        for r in [
            "preset = \"gaussian-bump\"\nweight = \"sqrt\"",
            "preset = \"const\"\nvalue = 2.0",
            "preset = \"cheb-sqrt\"\nk = 3",
        ] {
            let spec = parse_problem(&format!("intervals = [[-2, -1], [1, 2]]\n[rhs]\n{r}\n")).unwrap();
            spec.rhs_function(&sys, &ThetaMatrix::identity(2)).unwrap();
        }
    }

    #[test]
    fn samples_project_exactly_for_polynomials() {
        let text = "intervals = [[0, 2]]\n[rhs]\npreset = \"samples\"\nnodes = [[0.2, 0.7, 1.1, 1.6, 1.9]]\nre = [[0.4, 1.4, 2.2, 3.2, 3.8]]\n";
        let spec = parse_problem(text).unwrap();
        let sys = spec.system().unwrap();
        let f = spec.rhs_function(&sys, &ThetaMatrix::identity(1)).unwrap();
        assert!((f.eval(0, 1.3).re - 2.6).abs() < 1e-12);
    }

    #[test]
    fn overrides_apply() {
        let mut spec = parse_problem("intervals = [[-1, 1]]\n").unwrap();
        let o = Overrides { nystrom: Some(40), tol: Some(1e-6), lambda: Some(Complex64::new(2.0, 1.0)), ..Default::default() };
        spec.apply(&o).unwrap();
        assert_eq!((spec.grid.nystrom, spec.tolerances.range, spec.grid.lambda), (40, 1e-6, [2.0, 1.0]));
        assert!(spec.apply(&Overrides { modes: Some(0), ..Default::default() }).is_err());
    }
}

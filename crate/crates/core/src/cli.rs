//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::groups::{GroupElement, GroupModel};
use crate::pd_check::{gaussian_sample, membership_test, Configuration, GroupSampler};
use crate::schoenberg::{self, Dimension};
use crate::spec_file::{BivariateSpecFile, KernelSpecFile};
use crate::table;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "SPHERE_KERNELS_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_MEMBERSHIP_FAIL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "sphere-kernels", version, about = "Positive definite kernels on spheres cross groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate f(x, u)
    Eval(EvalArgs),
    /// Extract coefficient functions phi_{n,d} on a grid of group elements
    Extract(ExtractArgs),
    /// Evaluate a truncated expansion from an extracted table
    Synth(SynthArgs),
    /// Empirical positive definiteness test on S^d x G
    Check(CheckArgs),
    /// Map a table at dimension d to dimension d + 2
    Stepup(StepupArgs),
    /// Coefficients at dimension d from the power series of a kernel
    Project(ProjectArgs),
    /// Double-expansion coefficients on a product of two spheres
    Product(ProductArgs),
    /// Sample a Gaussian field at a point configuration
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub x: f64,
    /// Group element as JSON, e.g. `2`, `0.5` or `[1, 0]`
    #[arg(long, allow_hyphen_values = true)]
    pub u: String,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub n_max: usize,
    /// `real:A:B:STEP`, `int:A:B`, `cyclic`, `json:[...]` or `identity`
    #[arg(long, default_value = "identity", allow_hyphen_values = true)]
    pub grid: String,
    /// Quadrature nodes (default: enough for exactness, or the adaptive ladder)
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Table written by `extract`, `stepup` or `project`
    #[arg(long)]
    pub coefficients: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub u: String,
    /// Evaluate d/dx instead
    #[arg(long)]
    pub derivative: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SamplerArg {
    Model,
    Identity,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// How group elements are drawn
    #[arg(long, value_enum, default_value_t = SamplerArg::Model)]
    pub sampler: SamplerArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StepupArgs {
    #[arg(long)]
    pub coefficients: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Kernel whose power series in x is projected
    #[arg(long, conflicts_with = "coefficients", required_unless_present = "coefficients")]
    pub spec: Option<PathBuf>,
    /// Table tagged `#d=infinity`
    #[arg(long)]
    pub coefficients: Option<PathBuf>,
    /// Target dimension
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value = "identity", allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProductArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Dimension of the first sphere, or `infinity`
    #[arg(long)]
    pub d: Dimension,
    #[arg(long)]
    pub d_prime: usize,
    #[arg(long)]
    pub n_max: usize,
    /// Defaults to `--n-max`
    #[arg(long)]
    pub m_max: Option<usize>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub d: usize,
    /// Number of configuration points drawn with `--seed`
    #[arg(long, default_value_t = 5)]
    pub points: usize,
    /// Use a saved configuration (JSON) instead of drawing one
    #[arg(long, conflicts_with = "points")]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Diagonal jitter (default 1e-10 * trace / n)
    #[arg(long)]
    pub jitter: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses a grid description for `model`. The identity is prepended when
/// the grid does not contain it.
pub fn parse_grid(model: &GroupModel, text: &str) -> Result<Vec<GroupElement>> {
    let text = text.trim();
    let bad = || Error::Parse(format!("invalid grid {text:?}"));
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    let mut grid: Vec<GroupElement> = match kind {
        "identity" => Vec::new(),
        "real" => {
            let parts: Vec<f64> = rest.split(':').map(|p| p.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
            let [a, b, step] = parts[..] else { return Err(bad()) };
            if !(step > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
                return Err(bad());
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            if count > 1_000_000 {
                return Err(Error::Parse("grid has more than 10^6 points".into()));
            }
            (0..count).map(|i| GroupElement::Real(a + i as f64 * step)).collect()
        }
        "int" => {
            let parts: Vec<i64> = rest.split(':').map(|p| p.trim().parse::<i64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
            let [a, b] = parts[..] else { return Err(bad()) };
            if b < a || b - a > 1_000_000 {
                return Err(bad());
            }
            (a..=b).map(GroupElement::Integer).collect()
        }
        "cyclic" => match *model {
            GroupModel::Cyclic { m } if m <= 1_000_000 => (0..m as i64).map(GroupElement::Integer).collect(),
            _ => return Err(Error::Parse("grid \"cyclic\" needs a cyclic group of order <= 10^6".into())),
        },
        "json" => serde_json::from_str(rest).map_err(|e| Error::Parse(format!("invalid JSON grid: {e}")))?,
        _ => return Err(bad()),
    };
    grid = grid.iter().map(|g| model.coerce(g)).collect::<Result<_>>()?;
    let identity = model.identity();
    if !grid.iter().any(|g| model.approx_eq(g, &identity, 1e-12)) {
        grid.insert(0, identity);
    }
    Ok(grid)
}

/// Shortest round-trip text of a value, with the imaginary part on a
/// second line when it is nonzero.
pub fn format_value(v: num_complex::Complex64) -> String {
    if v.im == 0.0 {
        format!("{}", v.re)
    } else {
        format!("{}\nimaginary_residue={}", v.re, v.im)
    }
}

fn emit(out: Option<&Path>, stdout: &mut dyn Write, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

/// Runs one command, writing results to `stdout` or the `--out` file.
/// Returns the process exit code for successful runs.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Eval(a) => {
            let file = KernelSpecFile::from_path(&a.spec)?;
            let u = file.group.parse_element(&a.u)?;
            let v = file.kernel.eval(&file.group, a.x, &u)?;
            emit(None, stdout, &with_newline(format_value(v)))?;
        }
        Command::Extract(a) => {
            let file = KernelSpecFile::from_path(&a.spec)?;
            let grid = parse_grid(&file.group, &a.grid)?;
            let seq = schoenberg::extract(&file.kernel, &file.group, a.d, a.n_max, &grid, a.q)?;
            emit(a.out.as_deref(), stdout, &table::write_sequence(&seq, &file.group, &grid)?)?;
        }
        Command::Synth(a) => {
            let (seq, model) = table::read_sequence(&std::fs::read_to_string(&a.coefficients)?)?;
            let u = model.parse_element(&a.u)?;
            let v = if a.derivative {
                seq.synthesize_derivative(&model, a.x, &u)?
            } else {
                seq.synthesize(&model, a.x, &u)?.value
            };
            emit(None, stdout, &with_newline(format_value(v)))?;
        }
        Command::Check(a) => {
            let file = KernelSpecFile::from_path(&a.spec)?;
            let sampler = match a.sampler {
                SamplerArg::Model => GroupSampler::ModelDefault,
                SamplerArg::Identity => GroupSampler::Identity,
            };
            let report = membership_test(&file.kernel, &file.group, a.d, sampler, a.trials, a.points, a.seed)?;
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            emit(a.out.as_deref(), stdout, &with_newline(text))?;
            if !report.verdict.passed() {
                return Ok(EXIT_MEMBERSHIP_FAIL);
            }
        }
        Command::Stepup(a) => {
            let (seq, model) = table::read_sequence(&std::fs::read_to_string(&a.coefficients)?)?;
            let grid = table::sequence_grid(&seq).unwrap_or_else(|| vec![model.identity()]);
            let up = schoenberg::step_up(&seq, &model)?;
            emit(a.out.as_deref(), stdout, &table::write_sequence(&up, &model, &grid)?)?;
        }
        Command::Project(a) => {
            let (power, model, grid) = match (&a.spec, &a.coefficients) {
                (Some(spec), _) => {
                    let file = KernelSpecFile::from_path(spec)?;
                    let grid = parse_grid(&file.group, &a.grid)?;
                    (file.kernel.monomial_expansion(&file.group)?, file.group, grid)
                }
                (None, Some(path)) => {
                    let (seq, model) = table::read_sequence(&std::fs::read_to_string(path)?)?;
                    let grid = table::sequence_grid(&seq).unwrap_or_else(|| vec![model.identity()]);
                    (seq, model, grid)
                }
                (None, None) => return Err(Error::Parse("project needs --spec or --coefficients".into())),
            };
            let projected = schoenberg::project_from_infty(&power, &model, a.d)?;
            emit(a.out.as_deref(), stdout, &table::write_sequence(&projected, &model, &grid)?)?;
        }
        Command::Product(a) => {
            let file = BivariateSpecFile::from_path(&a.spec)?;
            let coeffs = schoenberg::product_sphere_extract(
                &file.kernel,
                a.d,
                a.d_prime,
                a.n_max,
                a.m_max.unwrap_or(a.n_max),
                a.q,
            )?;
            emit(a.out.as_deref(), stdout, &table::write_product(&coeffs))?;
        }
        Command::Simulate(a) => {
            let file = KernelSpecFile::from_path(&a.spec)?;
            let config = match &a.config {
                Some(path) => {
                    let text = std::fs::read_to_string(path)?;
                    let config: Configuration =
                        serde_json::from_str(&text).map_err(|e| Error::invalid("$", e.to_string()))?;
                    if config.d != a.d {
                        return Err(Error::domain(format!("configuration is on S^{}, not S^{}", config.d, a.d)));
                    }
                    config
                }
                None => Configuration::sample(&file.group, a.d, a.points, GroupSampler::ModelDefault, a.seed),
            };
            let samples = gaussian_sample(&file.kernel, &file.group, &config, a.samples, a.seed, a.jitter)?;
            emit(a.out.as_deref(), stdout, &table::write_samples(&config, &samples))?;
        }
    }
    Ok(EXIT_OK)
}

/// Exit code for a failed run.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INPUT
    }
}

/// Applies [`THREADS_ENV`] to the global worker pool.
pub fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let n: usize = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
        if n == 0 {
            return Err(Error::Parse(format!("{THREADS_ENV} must be >= 1")));
        }
        // a pool that is already initialized keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let r = GroupModel::RealLine;
        let g = parse_grid(&r, "real:-1:1:0.5").unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g[2], GroupElement::Real(0.0));
        let g = parse_grid(&r, "real:0.1:0.3:0.1").unwrap();
        assert_eq!(g[0], GroupElement::Real(0.0));
        assert_eq!(g.len(), 4);
        let z = parse_grid(&GroupModel::Integers, "int:-2:2").unwrap();
        assert_eq!(z.len(), 5);
        let c = parse_grid(&GroupModel::Cyclic { m: 4 }, "cyclic").unwrap();
        assert_eq!(c, (0..4).map(GroupElement::Integer).collect::<Vec<_>>());
        let v = parse_grid(&GroupModel::RealVector { k: 2 }, "json:[[1,0],[0,0]]").unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(parse_grid(&r, "identity").unwrap(), vec![GroupElement::Real(0.0)]);
        assert!(parse_grid(&r, "real:1:0:0.5").is_err());
        assert!(parse_grid(&r, "cyclic").is_err());
        assert!(parse_grid(&GroupModel::Integers, "json:[0.5]").is_err());
    }

    #[test]
    fn value_format() {
        assert_eq!(format_value(num_complex::Complex64::new(1.0, 0.0)), "1");
        assert_eq!(format_value(num_complex::Complex64::new(0.5, -0.25)), "0.5\nimaginary_residue=-0.25");
    }

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
        let cli = Cli::try_parse_from(["sphere-kernels", "product", "--spec", "f.json", "--d", "infinity", "--d-prime", "2", "--n-max", "4"]).unwrap();
        match cli.command {
            Command::Product(a) => assert_eq!(a.d, Dimension::Infinity),
            other => panic!("{other:?}"),
        }
    }
}

use clap::{Args, Parser, Subcommand};
use glt_schwarz::assembly::Family;
use glt_schwarz::krylov::SolverOptions;
use glt_schwarz::matrices::StructuredMatrix;
use glt_schwarz::mm::{read_matrix_market, write_matrix_market};
use glt_schwarz::partition::{is_admissible, WeightScheme};
use glt_schwarz::spectra::{
    cluster_count_around, compare_to_symbol, default_grid, matrix_spectrum, operator_spectrum, symbol_reference,
    Operator,
};
use glt_schwarz::symbols::Symbol;
use glt_schwarz_cli::config::RunConfig;
use glt_schwarz_cli::error::{CliError, EXIT_NOT_ADMISSIBLE, EXIT_OK, EXIT_USAGE};
use glt_schwarz_cli::problem::{parse_precond, solve, Method, PrecondArgs, ProblemArgs};
use glt_schwarz_cli::registry::Registry;
use glt_schwarz_cli::table::{run_table, TableOptions};
use serde_json::json;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "glt-schwarz", version, about = "Block and Schwarz preconditioners for GLT matrix sequences")]
struct Cli {
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for table cells.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Relative residual tolerance.
    #[arg(long, global = true, default_value_t = 1e-6, value_parser = positive_f64)]
    tol: f64,
    /// Iteration cap (default: the matrix dimension).
    #[arg(long, global = true)]
    cap: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Write a matrix in Matrix Market format with a JSON sidecar.
    Assemble(ProblemOpts),
    /// Solve A x = 1 with (P)CG or (P)GMRES and report iterations.
    Solve {
        #[command(flatten)]
        problem: ProblemOpts,
        #[command(flatten)]
        precond: PrecondOpts,
        #[arg(long, default_value = "cg")]
        method: String,
        /// GMRES restart length (full GMRES when omitted).
        #[arg(long)]
        restart: Option<usize>,
    },
    /// Eigenvalues of A, P, P^{-1}A or the iteration matrix as CSV.
    Spectrum {
        #[command(flatten)]
        problem: ProblemOpts,
        #[command(flatten)]
        precond: PrecondOpts,
        /// matrix, precond, precond-applied or iteration.
        #[arg(long, default_value = "matrix")]
        of: String,
        /// Pair the sorted eigenvalues with sorted symbol samples.
        #[arg(long)]
        against_symbol: bool,
    },
    /// Outlier counts of P^{-1}A around a cluster point.
    Cluster {
        #[command(flatten)]
        problem: ProblemOpts,
        #[command(flatten)]
        precond: PrecondOpts,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.05, 0.025])]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        center: f64,
    },
    /// Reproduce one registered table as CSV.
    Table {
        #[arg(long)]
        id: String,
        /// Alternative registry manifest (TOML).
        #[arg(long)]
        registry: Option<PathBuf>,
        /// Only report which cells are admissible.
        #[arg(long)]
        only_admissibility: bool,
        /// Restrict to these n columns.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
    },
}

#[derive(Debug, Args)]
struct ProblemOpts {
    /// toeplitz-abs-theta, fd1d, fem1d, spline1d-c0 or iga2d.
    #[arg(long, required_unless_present = "matrix")]
    family: Option<String>,
    #[arg(long, required_unless_present = "matrix")]
    n: Option<usize>,
    /// Spline degree.
    #[arg(long, default_value_t = 2)]
    p: usize,
    #[arg(long, default_value = "one")]
    coeff: String,
    /// Read the matrix from a Matrix Market file instead.
    #[arg(long, conflicts_with = "family")]
    matrix: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PrecondOpts {
    /// none, bj, bgs, bas, bms, bras or brms.
    #[arg(long, default_value = "none")]
    precond: String,
    /// full, restricted or average.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long, default_value_t = 1)]
    nu: usize,
    #[arg(long, default_value_t = 0)]
    overlap: usize,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err("must be a positive number".into()),
        Err(e) => Err(e.to_string()),
    }
}

/// Matrix plus what is known about where it came from.
struct Loaded {
    matrix: StructuredMatrix,
    symbol: Option<Symbol>,
    scale_note: String,
    problem: Option<ProblemArgs>,
}

impl ProblemOpts {
    fn args(&self) -> Result<Option<ProblemArgs>, CliError> {
        let (Some(family), Some(n)) = (&self.family, self.n) else {
            return Ok(None);
        };
        Ok(Some(ProblemArgs {
            family: family.parse::<Family>()?,
            n,
            p: self.p,
            coeff: self.coeff.clone(),
        }))
    }

    fn load(&self) -> Result<Loaded, CliError> {
        if let Some(path) = &self.matrix {
            let f = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
            let matrix = read_matrix_market(BufReader::new(f)).map_err(|source| CliError::Input {
                path: path.clone(),
                source,
            })?;
            return Ok(Loaded {
                matrix,
                symbol: None,
                scale_note: String::new(),
                problem: None,
            });
        }
        let problem = self.args()?.ok_or_else(|| CliError::Usage("--family and --n are required".into()))?;
        let asm = problem.assemble()?;
        Ok(Loaded {
            matrix: asm.matrix,
            symbol: asm.symbol,
            scale_note: asm.scale_note,
            problem: Some(problem),
        })
    }

    fn fill(&self, cfg: &mut RunConfig) {
        cfg.family = self.family.clone();
        cfg.n = self.n;
        if self.matrix.is_none() {
            cfg.p = Some(self.p);
            cfg.coeff = Some(self.coeff.clone());
        }
        cfg.matrix = self.matrix.as_ref().map(|p| p.display().to_string());
    }
}

impl PrecondOpts {
    fn args(&self) -> Result<PrecondArgs, CliError> {
        let weights = match &self.weights {
            Some(w) => Some(w.parse::<WeightScheme>()?),
            None => None,
        };
        Ok(PrecondArgs {
            kind: parse_precond(&self.precond)?,
            weights,
            nu: self.nu,
            overlap: self.overlap,
        })
    }

    fn fill(&self, cfg: &mut RunConfig) {
        cfg.precond = Some(self.precond.to_ascii_lowercase());
        cfg.weights = self.weights.clone();
        cfg.nu = Some(self.nu);
        cfg.overlap = Some(self.overlap);
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::io(path, e)),
        None => std::io::stdout().write_all(bytes).map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn emit_json(out: Option<&Path>, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("json serializes");
    text.push('\n');
    emit(out, text.as_bytes())
}

/// Exits with the not-admissible status after printing `nac`.
fn check_admissible(dim: usize, pre: &PrecondArgs) -> Option<ExitCode> {
    if pre.kind.is_some() && !is_admissible(dim, pre.nu, pre.overlap) {
        println!("nac");
        eprintln!(
            "nac: nu = {} with overlap {} is not admissible for dimension {dim}",
            pre.nu, pre.overlap
        );
        return Some(ExitCode::from(EXIT_NOT_ADMISSIBLE as u8));
    }
    None
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let out = cli.out.as_deref();
    let base = |name: &str| {
        let mut cfg = RunConfig::new(name, cli.tol);
        cfg.cap = cli.cap;
        cfg.out = cli.out.as_ref().map(|p| p.display().to_string());
        cfg.jobs = cli.jobs;
        cfg
    };
    match &cli.cmd {
        Cmd::Assemble(problem) => {
            let mut cfg = base("assemble");
            problem.fill(&mut cfg);
            let loaded = problem.load()?;
            let mut buf = Vec::new();
            write_matrix_market(&loaded.matrix, &mut buf).map_err(|e| CliError::io("<buffer>", e))?;
            emit(out, &buf)?;
            if let Some(path) = out {
                let sidecar = json!({
                    "config": cfg.to_json(),
                    "family": loaded.problem.as_ref().map(|p| p.family.name()),
                    "n": problem.n,
                    "p": problem.p,
                    "coefficient": problem.coeff,
                    "scale_note": loaded.scale_note,
                    "dim": loaded.matrix.dim(),
                });
                let mut side = path.as_os_str().to_owned();
                side.push(".json");
                emit_json(Some(Path::new(&side)), &sidecar)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Solve {
            problem,
            precond,
            method,
            restart,
        } => {
            let mut cfg = base("solve");
            problem.fill(&mut cfg);
            precond.fill(&mut cfg);
            let method: Method = method.parse()?;
            cfg.method = Some(method.to_string());
            cfg.restart = *restart;
            let pre = precond.args()?;
            let loaded = problem.load()?;
            if let Some(code) = check_admissible(loaded.matrix.dim(), &pre) {
                return Ok(code);
            }
            let opts = SolverOptions {
                tol: cli.tol,
                cap: cli.cap,
                restart: *restart,
            };
            let report = solve(&loaded.matrix, method, &pre, &opts)?;
            let mut value = serde_json::to_value(&report).expect("report serializes");
            let obj = value.as_object_mut().expect("report is an object");
            obj.insert("config".into(), cfg.to_json());
            obj.insert("nu".into(), json!(pre.nu));
            obj.insert("overlap".into(), json!(pre.overlap));
            obj.insert("n".into(), json!(problem.n));
            emit_json(out, &value)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Spectrum {
            problem,
            precond,
            of,
            against_symbol,
        } => {
            let mut cfg = base("spectrum");
            problem.fill(&mut cfg);
            precond.fill(&mut cfg);
            let which: Operator = of.parse()?;
            cfg.of = Some(which.name().into());
            let pre = precond.args()?;
            let loaded = problem.load()?;
            if let Some(code) = check_admissible(loaded.matrix.dim(), &pre) {
                return Ok(code);
            }
            let mut eigs = match which {
                Operator::Matrix => matrix_spectrum(&loaded.matrix)?,
                _ => {
                    let p = pre
                        .build(&loaded.matrix)?
                        .ok_or_else(|| CliError::Usage(format!("--of {which} needs --precond")))?;
                    operator_spectrum(&p, which)?
                }
            };
            eigs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

            let mut text = format!("# {}\n", cfg.header());
            if *against_symbol {
                let sym = match which {
                    Operator::Matrix | Operator::Precond => loaded.symbol.clone().ok_or_else(|| {
                        CliError::Usage("no reference symbol is available for this matrix".into())
                    })?,
                    Operator::PrecondApplied | Operator::Iteration => {
                        let s = loaded.symbol.as_ref().map_or(1, Symbol::size);
                        let c = if which == Operator::Iteration { 0.0 } else { 1.0 };
                        Symbol::scaled_identity(c, s, 1)
                    }
                };
                let dim = eigs.len();
                let (nx, nt) = default_grid(&sym, dim);
                let report = compare_to_symbol(&eigs, &sym, sym.size(), nx, nt)?;
                let reference = symbol_reference(&sym, dim, nx, nt)?;
                text.push_str(&format!(
                    "# distribution: {}\n",
                    serde_json::to_string(&report).expect("report serializes")
                ));
                let mut w = csv::Writer::from_writer(Vec::new());
                write_rows(&mut w, &["re", "im", "branch", "symbol"], |w| {
                    for (z, (b, v)) in eigs.iter().zip(&reference) {
                        w.write_record([z.re.to_string(), z.im.to_string(), b.to_string(), v.to_string()])?;
                    }
                    Ok(())
                })?;
                text.push_str(&String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf8"));
            } else {
                let mut w = csv::Writer::from_writer(Vec::new());
                write_rows(&mut w, &["re", "im"], |w| {
                    for z in &eigs {
                        w.write_record([z.re.to_string(), z.im.to_string()])?;
                    }
                    Ok(())
                })?;
                text.push_str(&String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf8"));
            }
            emit(out, text.as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Cluster {
            problem,
            precond,
            eps,
            center,
        } => {
            let mut cfg = base("cluster");
            problem.fill(&mut cfg);
            precond.fill(&mut cfg);
            cfg.eps = Some(eps.clone());
            if eps.iter().any(|e| !(*e > 0.0)) {
                return Err(CliError::Usage("every eps must be positive".into()));
            }
            let pre = precond.args()?;
            let loaded = problem.load()?;
            if let Some(code) = check_admissible(loaded.matrix.dim(), &pre) {
                return Ok(code);
            }
            let eigs = match pre.build(&loaded.matrix)? {
                Some(p) => operator_spectrum(&p, Operator::PrecondApplied)?,
                None => matrix_spectrum(&loaded.matrix)?,
            };
            let report = cluster_count_around(&eigs, *center, eps);
            let mut value = serde_json::to_value(&report).expect("report serializes");
            let obj = value.as_object_mut().expect("report is an object");
            obj.insert("config".into(), cfg.to_json());
            emit_json(out, &value)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Table {
            id,
            registry,
            only_admissibility,
            n,
        } => {
            let mut cfg = base("table");
            cfg.table = Some(id.clone());
            let reg = match registry {
                Some(path) => Registry::load(path)?,
                None => Registry::builtin(),
            };
            let spec = reg.get(id)?;
            let opts = TableOptions {
                tol: cli.tol,
                cap: cli.cap,
                jobs: cli.jobs,
                only_admissibility: *only_admissibility,
                n_subset: n.clone(),
            };
            let result = run_table(spec, &opts)?;
            let mut buf = Vec::new();
            let preamble = [cfg.header(), format!("table: {}", spec.title)];
            result
                .write_csv(&mut buf, &preamble)
                .map_err(|e| CliError::io("<buffer>", e.into()))?;
            emit(out, &buf)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn write_rows(
    w: &mut csv::Writer<Vec<u8>>,
    header: &[&str],
    body: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
) -> Result<(), CliError> {
    let wrap = |e: csv::Error| CliError::io("<buffer>", e.into());
    w.write_record(header).map_err(wrap)?;
    body(w).map_err(wrap)?;
    w.flush().map_err(|e| CliError::io("<buffer>", e))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE as u8)
            } else {
                ExitCode::from(EXIT_OK as u8)
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

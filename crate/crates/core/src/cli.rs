//! Command-line front end.
//!
//! `run` parses flags, validates them, runs the requested operation on a
//! rayon pool of the requested size and writes CSV or JSON. Exit codes: 0 on
//! success, 2 on usage errors, 1 on numerical failure or I/O errors.

use crate::error::{Error, Result};
use crate::experiments::{
    counterexample_growth, discrete_kernel_bound, edge_kernel_growth, expansion_convergence,
    format_float, freud_poiani_bound, hermite_norm_growth, hermite_table, hilbert_norm_growth,
    hilbert_section_deviation, interpolation_convergence, mz_ratio_sweep, mz_witness_hn, ExperimentReport,
    Profile, DEFAULT_N_LIST, EDGE_N_LIST,
};
use crate::interpolation::interpolate;
use crate::quadrature::build_rule;
use crate::space::{sample_weighted_at_nodes, NormSpec};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Environment variable naming the directory for relative `--output` paths.
pub const OUT_DIR_ENV: &str = "HERMITE_MZ_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "hermite-mz",
    version,
    about = "Gauss-Hermite rules, weighted interpolation and Marcinkiewicz-Zygmund experiments"
)]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Output file; relative paths resolve against $HERMITE_MZ_OUT_DIR when set.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Nodes and weights of the rule with n + 1 points.
    Nodes {
        #[arg(long)]
        n: usize,
    },
    /// Table of ℋ_0(t), …, ℋ_n(t).
    Eval {
        #[arg(long)]
        n: usize,
        /// Abscissae, comma separated.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        t: Vec<f64>,
    },
    /// Weighted interpolant of a profile at the given abscissae.
    Interp {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "gaussian")]
        function: Profile,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        t: Vec<f64>,
    },
    /// Continuous against discrete norm ratios on random polynomials.
    MzRatio {
        #[command(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        list: NList,
        #[arg(long, default_value_t = 4)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Growth of ‖ℋ_n‖_p and of its discrete counterpart.
    Growth {
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        list: NList,
    },
    /// Norm growth of the interpolant of the divergence example on [0, √N].
    Counterexample {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        list: NList,
    },
    /// ‖g − I_n g‖ for a weighted profile g.
    InterpConvergence {
        #[arg(long, default_value = "gaussian")]
        function: Profile,
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[command(flatten)]
        list: NList,
    },
    /// ‖f − P_n f‖ in the unweighted norm.
    ExpansionConvergence {
        #[arg(long, default_value = "rational:1")]
        function: Profile,
        #[command(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        list: NList,
    },
    /// Continuous and discrete Cesàro kernel bounds and the edge diagonal.
    KernelBound {
        #[arg(long, default_value_t = 0.9)]
        delta: f64,
        /// Orders m for the continuous bound.
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 4, 8, 16, 32, 64, 128])]
        m_list: Vec<usize>,
        /// Degrees for the discrete bound.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_N_LIST[..9].to_vec())]
        n_list: Vec<usize>,
        /// Degrees for the edge diagonal.
        #[arg(long, value_delimiter = ',', default_values_t = EDGE_N_LIST.to_vec())]
        edge_n_list: Vec<usize>,
    },
    /// Node-difference matrix against the shifted Hilbert matrix, and section norms.
    Hilbert {
        #[arg(long, value_delimiter = ',', default_values_t = [16usize, 23, 32, 45, 64, 91, 128, 181, 256, 362, 512, 724, 1024])]
        n_list: Vec<usize>,
        /// Exponent of the section norm.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [16usize, 64, 256, 1024])]
        sizes: Vec<usize>,
    },
}

#[derive(Debug, Args)]
pub struct SpaceArgs {
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
}

impl SpaceArgs {
    fn spec(&self) -> Result<NormSpec> {
        NormSpec::new(self.d, self.q, self.p).map_err(usage)
    }
}

#[derive(Debug, Args)]
pub struct NList {
    /// Degrees, comma separated and strictly ascending.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_N_LIST.to_vec())]
    pub n_list: Vec<usize>,
}

fn usage(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Usage(m),
        other => other,
    }
}

fn check_list(name: &str, list: &[usize]) -> Result<()> {
    if list.is_empty() {
        return Err(Error::Usage(format!("{name} must not be empty")));
    }
    if list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Usage(format!("{name} must be strictly ascending")));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::Usage(format!("p must be in [1, ∞], got {p}")))
    }
}

impl Command {
    /// Range checks done before any work starts.
    pub fn validate(&self) -> Result<()> {
        match self {
            Command::Nodes { .. } => Ok(()),
            Command::Eval { t, .. } | Command::Interp { t, .. } => {
                if t.iter().all(|x| x.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::Usage("abscissae must be finite".into()))
                }
            }
            Command::MzRatio { space, list, trials, .. } => {
                space.spec()?;
                check_list("n-list", &list.n_list)?;
                if *trials == 0 {
                    return Err(Error::Usage("trials must be at least 1".into()));
                }
                Ok(())
            }
            Command::Growth { p, list } => {
                check_p(*p)?;
                if p.is_infinite() {
                    return Err(Error::Usage("growth needs a finite p".into()));
                }
                check_list("n-list", &list.n_list)
            }
            Command::Counterexample { p, alpha, list } => {
                check_p(*p)?;
                if !(alpha.is_finite() && *alpha >= 0.0) || p.is_infinite() {
                    return Err(Error::Usage("counterexample needs finite p and α ≥ 0".into()));
                }
                check_list("n-list", &list.n_list)
            }
            Command::InterpConvergence { function, space, alpha, list } => {
                space.spec()?;
                function.handle(space.d).map_err(usage)?;
                if !alpha.is_finite() {
                    return Err(Error::Usage("alpha must be finite".into()));
                }
                check_list("n-list", &list.n_list)
            }
            Command::ExpansionConvergence { function, space, list } => {
                space.spec()?;
                function.handle(space.d).map_err(usage)?;
                check_list("n-list", &list.n_list)
            }
            Command::KernelBound { delta, m_list, n_list, edge_n_list } => {
                if !(*delta > 0.0 && *delta < 1.0) {
                    return Err(Error::Usage(format!("delta must lie in (0, 1), got {delta}")));
                }
                check_list("m-list", m_list)?;
                check_list("n-list", n_list)?;
                check_list("edge-n-list", edge_n_list)
            }
            Command::Hilbert { n_list, p, sizes } => {
                check_p(*p)?;
                check_list("n-list", n_list)?;
                check_list("sizes", sizes)?;
                if n_list[0] < 8 {
                    return Err(Error::Usage("hilbert n-list entries must be at least 8".into()));
                }
                if sizes[0] < 2 {
                    return Err(Error::Usage("section sizes must be at least 2".into()));
                }
                Ok(())
            }
        }
    }
}

/// Output of one command: either experiment reports or a plain table.
enum Output {
    Reports(Vec<ExperimentReport>),
    Table { json: Value, header: Vec<String>, rows: Vec<Vec<f64>>, index_column: bool },
}

impl Output {
    fn render(&self, format: Format) -> String {
        match (self, format) {
            (Output::Reports(r), Format::Json) if r.len() == 1 => r[0].to_json() + "\n",
            (Output::Reports(r), Format::Json) => {
                serde_json::to_string_pretty(r).expect("reports serialise") + "\n"
            }
            (Output::Reports(r), Format::Csv) => {
                // One block per report, separated by a blank line.
                let blocks: Vec<String> = r.iter().map(|r| format!("# {}\n{}", r.id, r.to_csv())).collect();
                if blocks.len() == 1 {
                    r[0].to_csv()
                } else {
                    blocks.join("\n")
                }
            }
            (Output::Table { json, .. }, Format::Json) => {
                serde_json::to_string_pretty(json).expect("table serialises") + "\n"
            }
            (Output::Table { header, rows, index_column, .. }, Format::Csv) => {
                let mut out = header.join(",");
                out.push('\n');
                for row in rows {
                    let cells: Vec<String> = row
                        .iter()
                        .enumerate()
                        .map(|(i, &x)| if i == 0 && *index_column { format!("{}", x as usize) } else { format_float(x) })
                        .collect();
                    let _ = writeln!(out, "{}", cells.join(","));
                }
                out
            }
        }
    }
}

fn nodes_table(n: usize) -> Result<Output> {
    let rule = build_rule(n)?;
    let rows: Vec<Vec<f64>> = (0..rule.len())
        .map(|j| vec![j as f64, rule.nodes()[j], rule.lambda()[j], rule.mu()[j]])
        .collect();
    let json = json!({
        "n": n,
        "nodes": rows.iter().map(|r| json!({"j": r[0] as usize, "t": r[1], "lambda": r[2], "mu": r[3]})).collect::<Vec<_>>(),
    });
    let header = ["j", "t", "lambda", "mu"].map(String::from).to_vec();
    Ok(Output::Table { json, header, rows, index_column: true })
}

fn eval_table(n: usize, ts: &[f64]) -> Output {
    let values = hermite_table(n, ts);
    let rows: Vec<Vec<f64>> = ts
        .iter()
        .zip(&values)
        .map(|(&t, v)| std::iter::once(t).chain(v.iter().copied()).collect())
        .collect();
    let json = json!({
        "n": n,
        "rows": ts.iter().zip(&values).map(|(&t, v)| json!({"t": t, "values": v})).collect::<Vec<_>>(),
    });
    let header = std::iter::once("t".to_string()).chain((0..=n).map(|k| format!("h{k}"))).collect();
    Output::Table { json, header, rows, index_column: false }
}

fn interp_table(n: usize, profile: Profile, d: usize, ts: &[f64]) -> Result<Output> {
    let rule = build_rule(n)?;
    let g = profile.handle(d)?;
    let interp = interpolate(&rule, &sample_weighted_at_nodes(&rule, &g))?;
    let mut rows = Vec::with_capacity(ts.len());
    let mut json_rows = Vec::with_capacity(ts.len());
    for &t in ts {
        let v = interp.eval(t);
        let exact = g.eval(t);
        let err = v.0.iter().zip(&exact.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let mut row = vec![t];
        row.extend_from_slice(&v.0);
        row.extend_from_slice(&exact.0);
        row.push(err);
        json_rows.push(json!({"t": t, "interpolant": v.0, "exact": exact.0, "error": err}));
        rows.push(row);
    }
    let mut header = vec!["t".to_string()];
    header.extend((0..d).map(|i| format!("interpolant{i}")));
    header.extend((0..d).map(|i| format!("exact{i}")));
    header.push("error".into());
    let json = json!({"n": n, "function": profile.to_string(), "d": d, "rows": json_rows});
    Ok(Output::Table { json, header, rows, index_column: false })
}

fn dispatch(command: &Command) -> Result<Output> {
    Ok(match command {
        Command::Nodes { n } => nodes_table(*n)?,
        Command::Eval { n, t } => eval_table(*n, t),
        Command::Interp { n, function, d, t } => interp_table(*n, *function, *d, t)?,
        Command::MzRatio { space, list, trials, seed } => {
            Output::Reports(vec![mz_ratio_sweep(&space.spec()?, &list.n_list, *trials, *seed)?])
        }
        Command::Growth { p, list } => Output::Reports(vec![
            hermite_norm_growth(*p, &list.n_list)?,
            mz_witness_hn(*p, &list.n_list)?,
        ]),
        Command::Counterexample { p, alpha, list } => {
            Output::Reports(vec![counterexample_growth(*p, *alpha, &list.n_list)?])
        }
        Command::InterpConvergence { function, space, alpha, list } => {
            let g = function.handle(space.d)?;
            let mut report = interpolation_convergence(&g, &space.spec()?, *alpha, &list.n_list)?;
            report.params.insert("function".into(), Value::from(function.to_string()));
            Output::Reports(vec![report])
        }
        Command::ExpansionConvergence { function, space, list } => {
            let f = function.handle(space.d)?;
            let mut report = expansion_convergence(&f, &space.spec()?, &list.n_list)?;
            report.params.insert("function".into(), Value::from(function.to_string()));
            Output::Reports(vec![report])
        }
        Command::KernelBound { delta, m_list, n_list, edge_n_list } => Output::Reports(vec![
            freud_poiani_bound(m_list)?,
            discrete_kernel_bound(n_list, *delta)?,
            edge_kernel_growth(edge_n_list)?,
        ]),
        Command::Hilbert { n_list, p, sizes } => Output::Reports(vec![
            hilbert_section_deviation(n_list)?,
            hilbert_norm_growth(*p, sizes)?,
        ]),
    })
}

fn resolve_output(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() && !dir.is_empty() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    use std::io::Write;
    match path {
        Some(p) => {
            let p = resolve_output(p);
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(p, text)
        }
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numerical(_) => 1,
        _ => 2,
    }
}

/// Runs the command line `argv` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Err(e) = cli.command.validate() {
        eprintln!("hermite-mz: {e}");
        return 2;
    }
    let threads = match cli.threads {
        Some(0) => {
            eprintln!("hermite-mz: --threads must be at least 1");
            return 2;
        }
        Some(t) => t,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("hermite-mz: cannot start {threads} worker threads: {e}");
            return 1;
        }
    };
    let output = match pool.install(|| dispatch(&cli.command)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("hermite-mz: {e}");
            return exit_code(&e);
        }
    };
    match write_output(cli.output.as_deref(), &output.render(cli.format)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("hermite-mz: cannot write output: {e}");
            1
        }
    }
}

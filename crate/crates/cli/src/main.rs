use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dro_path::example::example1_report;
use dro_path::harness::{
    run_comparison, run_sweep, run_timing, summarize, write_results, write_summary, write_sweep, write_sweep_summary,
    write_timing, write_timing_summary, Sweep,
};
use dro_path::io::{read_json, to_json, ConfigJson, InstanceJson, NominalJson, SolutionJson};
use dro_path::{CliError, EXIT_SOLVER};
use dro_path_core::baselines::{budgeted_robust_sp, censored_moment_estimates, dr0_solve};
use dro_path_core::datagen::{generate, ExperimentConfig};
use dro_path_core::moment::bounds_all;
use dro_path_core::solver::{oracle_solve, solve_mip_with, solve_no_expectation, MipOptions};
use serde_json::json;

#[derive(Parser)]
#[command(name = "dro-path", version, about = "Distributionally robust shortest paths: solver and experiment harness")]
struct Cli {
    /// Base random seed; instance i of a run uses seed + i.
    #[arg(long, global = true, env = "DRO_PATH_SEED")]
    seed: Option<u64>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for instance-level parallelism.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random layered instance, its nominal model and samples.
    Generate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Write the nominal model JSON here.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Write the cost samples (one array per sample) here.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Solve an instance; prints solution JSON.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        #[arg(long, default_value_t = 1_000_000)]
        node_limit: usize,
        /// Maximum number of paths enumerated by the oracle.
        #[arg(long, default_value_t = 1_000_000)]
        oracle_cap: usize,
        /// Return the first optimum found instead of the lexicographically
        /// smallest one.
        #[arg(long)]
        any_optimum: bool,
    },
    /// Run a comparison method on an instance; prints solution JSON.
    Baseline {
        instance: PathBuf,
        #[arg(long, value_enum)]
        method: BaselineMethod,
        /// Deviation budget for the robust baseline.
        #[arg(long)]
        gamma: Option<usize>,
        /// Cost samples for the moment baseline, as written by `generate`.
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        eta0: f64,
    },
    /// Per-arc best- and worst-case expected costs as CSV.
    Bounds { instance: PathBuf },
    /// Compare all methods over random instances; rows as CSV.
    Compare {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Repeat the comparison over a list of kappa or n1 values.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', conflicts_with = "n1_values", required_unless_present = "n1_values")]
        kappa_values: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        n1_values: Vec<usize>,
    },
    /// Stage times (cost bounds, MIP) over a list of layer counts.
    Timing {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_value = "5,10,20")]
        v_list: Vec<usize>,
    },
    /// Per-path costs of the four-node worked example as CSV.
    Example1,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// `poly` without expectation rows, `mip` otherwise.
    Auto,
    Poly,
    Mip,
    Oracle,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BaselineMethod {
    Budget,
    Dr0,
}

/// Experiment parameters; flags override the config file.
#[derive(Args)]
struct ConfigArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Intermediate layers [default: 20].
    #[arg(long)]
    v: Option<usize>,
    /// Nodes per layer [default: 10].
    #[arg(long)]
    r: Option<usize>,
    /// Samples per arc [default: 100].
    #[arg(long)]
    n0: Option<usize>,
    /// Quantile subintervals per arc [default: 4].
    #[arg(long)]
    n1: Option<usize>,
    /// Relative subinterval width [default: 0.6].
    #[arg(long)]
    kappa: Option<f64>,
    /// Violation probability of the whole set [default: 0.05].
    #[arg(long)]
    eta0: Option<f64>,
    /// Robust-baseline budgets [default: 0, 1/3, 2/3 and all of v+1].
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<usize>>,
    /// Leave out the expectation rows.
    #[arg(long)]
    no_expectation_rows: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 100)]
    instances: usize,
    /// Also write per-method summary CSV here (default: stderr).
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Leave timing columns empty so output is reproducible byte for byte.
    #[arg(long)]
    no_times: bool,
    #[arg(long, default_value_t = 1_000_000)]
    node_limit: usize,
}

impl ConfigArgs {
    fn resolve(&self, seed: Option<u64>) -> Result<ExperimentConfig, CliError> {
        let mut json = match &self.config {
            Some(p) => read_json::<ConfigJson>(p)?,
            None => ConfigJson::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(x) = self.$f { json.$f = x; })* };
        }
        set!(v, r, n0, n1, kappa, eta0);
        if let Some(g) = &self.gammas {
            json.gamma_list = Some(g.clone());
        }
        if self.no_expectation_rows {
            json.expectation_rows = false;
        }
        if let Some(s) = seed {
            json.seed = s;
        }
        let cfg = ExperimentConfig::from(&json);
        cfg.validate().map_err(|e| CliError::InvalidConfig(e.to_string()))?;
        Ok(cfg)
    }
}

fn open_out(path: Option<&FsPath>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_text(path: Option<&FsPath>, text: &str) -> Result<(), CliError> {
    let mut out = open_out(path)?;
    let target = path.unwrap_or(FsPath::new("<stdout>"));
    out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| CliError::io(target, e))
}

fn summary_out(path: Option<&PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?)),
        None => Box::new(io::stderr().lock()),
    })
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Generate { config, model, samples } => {
            let cfg = config.resolve(cli.seed)?;
            let gen = generate(&cfg)?;
            let inst = InstanceJson::from_parts(&gen.graph, gen.source, gen.sink, &gen.ambiguity.set);
            write_text(out, &to_json(&inst))?;
            if let Some(p) = model {
                write_text(Some(p), &to_json(&NominalJson::from(&gen.model)))?;
            }
            if let Some(p) = samples {
                write_text(Some(p), &to_json(&gen.samples))?;
            }
            Ok(0)
        }
        Command::Solve {
            instance,
            method,
            node_limit,
            oracle_cap,
            any_optimum,
        } => {
            let file: InstanceJson = read_json(instance)?;
            let inst = file.instance()?;
            let has_rows = !inst.ambiguity().expectation_rows().is_empty();
            let opts = MipOptions {
                node_limit: *node_limit,
                lexicographic_ties: !any_optimum,
                ..MipOptions::default()
            };
            let (name, sol) = match method {
                Method::Auto if !has_rows => ("poly", solve_no_expectation(&inst)?),
                Method::Poly => ("poly", solve_no_expectation(&inst)?),
                Method::Auto | Method::Mip => ("mip", solve_mip_with(&inst, &opts)?),
                Method::Oracle => ("oracle", oracle_solve(&inst, *oracle_cap)?),
            };
            write_text(out, &to_json(&SolutionJson::new(name, inst.graph(), &sol)))?;
            Ok(0)
        }
        Command::Baseline {
            instance,
            method,
            gamma,
            samples,
            eta0,
        } => {
            let file: InstanceJson = read_json(instance)?;
            let inst = file.instance()?;
            let (g, s, t) = (inst.graph(), inst.source(), inst.sink());
            let (l, u): (Vec<f64>, Vec<f64>) = inst.ambiguity().per_arc().iter().map(|a| a.support()).unzip();
            let report = match method {
                BaselineMethod::Budget => {
                    let gamma = gamma.ok_or_else(|| CliError::InvalidConfig("--gamma is required".into()))?;
                    let (path, value) = budgeted_robust_sp(g, s, t, &l, &u, gamma)?;
                    json!({ "method": format!("R0:{gamma}"), "path": path.arcs(), "nodes": path.nodes(g), "objective": value })
                }
                BaselineMethod::Dr0 => {
                    let p = samples
                        .as_ref()
                        .ok_or_else(|| CliError::InvalidConfig("--samples is required".into()))?;
                    let rows: Vec<Vec<f64>> = read_json(p)?;
                    if rows.iter().any(|r| r.len() != g.arc_count()) {
                        return Err(CliError::InvalidConfig("sample width differs from the arc count".into()));
                    }
                    let set = inst.ambiguity();
                    let flags: Vec<Vec<Vec<bool>>> = (0..g.arc_count())
                        .map(|a| rows.iter().map(|r| set.arc(a).censor(r[a])).collect())
                        .collect();
                    let est = censored_moment_estimates(set.per_arc(), &flags, *eta0)?;
                    let (path, value, costs) = dr0_solve(g, s, t, &l, &u, &est)?;
                    json!({ "method": "DR0", "path": path.arcs(), "nodes": path.nodes(g), "objective": value, "costs": costs })
                }
            };
            write_text(out, &to_json(&report))?;
            Ok(0)
        }
        Command::Bounds { instance } => {
            let file: InstanceJson = read_json(instance)?;
            let inst = file.instance()?;
            let b = bounds_all(inst.ambiguity())?;
            let mut w = csv::Writer::from_writer(open_out(out)?);
            w.write_record(["arc", "tail", "head", "c_min", "c_max"])?;
            for a in inst.graph().arcs() {
                w.write_record([
                    a.id.to_string(),
                    a.tail.to_string(),
                    a.head.to_string(),
                    b.c_min[a.id].to_string(),
                    b.c_max[a.id].to_string(),
                ])?;
            }
            w.flush().map_err(|e| CliError::io(out.unwrap_or(FsPath::new("<stdout>")), e))?;
            Ok(0)
        }
        Command::Compare { config, run } => {
            let cfg = config.resolve(cli.seed)?;
            let opts = MipOptions {
                node_limit: run.node_limit,
                ..MipOptions::default()
            };
            let rows = run_comparison(&cfg, run.instances, cli.workers, &opts)?;
            write_results(open_out(out)?, &rows, !run.no_times)?;
            write_summary(summary_out(run.summary.as_ref())?, &summarize(&rows), !run.no_times)?;
            Ok(if rows.iter().all(|r| r.is_ok()) { 0 } else { EXIT_SOLVER })
        }
        Command::Sweep {
            config,
            run,
            kappa_values,
            n1_values,
        } => {
            let cfg = config.resolve(cli.seed)?;
            let sweep = if kappa_values.is_empty() {
                Sweep::N1(n1_values.clone())
            } else {
                Sweep::Kappa(kappa_values.clone())
            };
            let opts = MipOptions {
                node_limit: run.node_limit,
                ..MipOptions::default()
            };
            let points = run_sweep(&cfg, &sweep, run.instances, cli.workers, &opts)?;
            write_sweep(open_out(out)?, &points, !run.no_times)?;
            write_sweep_summary(summary_out(run.summary.as_ref())?, &points, !run.no_times)?;
            let ok = points.iter().all(|p| p.rows.iter().all(|r| r.is_ok()));
            Ok(if ok { 0 } else { EXIT_SOLVER })
        }
        Command::Timing { config, run, v_list } => {
            let cfg = config.resolve(cli.seed)?;
            let opts = MipOptions {
                node_limit: run.node_limit,
                ..MipOptions::default()
            };
            let rows = run_timing(v_list, &cfg, run.instances, cli.workers, &opts)?;
            write_timing(open_out(out)?, &rows, !run.no_times)?;
            write_timing_summary(summary_out(run.summary.as_ref())?, &rows)?;
            Ok(if rows.iter().all(|r| r.error.is_none()) { 0 } else { EXIT_SOLVER })
        }
        Command::Example1 => {
            let report = example1_report()?;
            let mut w = csv::Writer::from_writer(open_out(out)?);
            w.write_record(["path", "naive_robust", "distributionally_robust", "nominal"])?;
            for p in &report.paths {
                w.write_record([
                    p.label.clone(),
                    p.naive_robust.to_string(),
                    p.distributionally_robust.to_string(),
                    p.nominal.to_string(),
                ])?;
            }
            w.flush().map_err(|e| CliError::io(out.unwrap_or(FsPath::new("<stdout>")), e))?;
            eprintln!("c_max: {:?}", report.c_max);
            eprintln!("worst-case distribution of arc 1-2: {:?}", report.worst_distribution);
            eprintln!("distributionally robust optimum: {} ({})", report.dr_optimum.0, report.dr_optimum.1);
            eprintln!("interval robust optimum: {} ({})", report.naive_optimum.0, report.naive_optimum.1);
            eprintln!("nominal optimum: {} ({})", report.nominal_optimum.0, report.nominal_optimum.1);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.workers == 0 {
        eprintln!("error: --workers must be at least 1");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

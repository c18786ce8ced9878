//! Experiment protocol: per-instance method comparison, parameter sweeps and
//! stage timing, with CSV output.
//!
//! Instance `i` of a run uses seed `cfg.seed + i`. Results are collected in
//! seed order whatever the worker count.

use std::io::Write;
use std::time::Instant;

use dro_path_core::baselines::{budgeted_robust_sp, censored_moment_estimates, dr0_solve};
use dro_path_core::datagen::{generate, relative_expected_loss, ExperimentConfig, GeneratedInstance};
use dro_path_core::graph::Path;
use dro_path_core::moment::bounds_all;
use dro_path_core::solver::{solve_mip_with_bounds, solve_no_expectation, DrsppInstance, MipOptions};
use rayon::prelude::*;
use statrs::statistics::Statistics;

use crate::CliError;

/// Method tags, in row order.
pub const F1: &str = "F1";
pub const F1_QUANTILE: &str = "F1'";
pub const DR0: &str = "DR0";

pub fn r0_tag(gamma: usize) -> String {
    format!("R0:{gamma}")
}

/// One `(seed, method)` outcome. Failed methods keep their tag and carry the
/// error message instead of numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub seed: u64,
    pub method: String,
    pub rho: Option<f64>,
    pub objective: Option<f64>,
    pub wall_time_s: f64,
    /// Cost-bound stage, F1 only.
    pub bounds_time_s: Option<f64>,
    /// Branch-and-bound stage, F1 only.
    pub mip_time_s: Option<f64>,
    pub nodes: Option<usize>,
    pub error: Option<String>,
}

impl ResultRow {
    pub const HEADER: [&'static str; 9] = [
        "seed",
        "method",
        "rho",
        "objective",
        "wall_time_s",
        "bounds_time_s",
        "mip_time_s",
        "nodes",
        "error",
    ];

    fn failed(seed: u64, method: String, error: String) -> Self {
        Self {
            seed,
            method,
            rho: None,
            objective: None,
            wall_time_s: 0.0,
            bounds_time_s: None,
            mip_time_s: None,
            nodes: None,
            error: Some(error),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    fn record(&self, times: bool) -> Vec<String> {
        let time = |t: f64| if times { fmt(t) } else { String::new() };
        vec![
            self.seed.to_string(),
            self.method.clone(),
            opt(self.rho),
            opt(self.objective),
            if self.is_ok() { time(self.wall_time_s) } else { String::new() },
            self.bounds_time_s.map(time).unwrap_or_default(),
            self.mip_time_s.map(time).unwrap_or_default(),
            self.nodes.map(|n| n.to_string()).unwrap_or_default(),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

fn seconds_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

fn scored(
    seed: u64,
    method: String,
    gen: &GeneratedInstance,
    path: &Path,
    objective: f64,
    wall_time_s: f64,
) -> ResultRow {
    match relative_expected_loss(path, &gen.model, &gen.graph, gen.source, gen.sink) {
        Ok(rho) => ResultRow {
            seed,
            method,
            rho: Some(rho),
            objective: Some(objective),
            wall_time_s,
            bounds_time_s: None,
            mip_time_s: None,
            nodes: None,
            error: None,
        },
        Err(e) => ResultRow::failed(seed, method, e.to_string()),
    }
}

fn method_tags(cfg: &ExperimentConfig) -> Vec<String> {
    let mut tags = vec![F1.to_owned(), F1_QUANTILE.to_owned(), DR0.to_owned()];
    tags.extend(cfg.gamma_list.iter().map(|&g| r0_tag(g)));
    tags
}

/// Runs every method on the instance generated from `cfg` (its seed included).
pub fn run_instance(cfg: &ExperimentConfig, opts: &MipOptions) -> Vec<ResultRow> {
    let seed = cfg.seed;
    let gen = match generate(cfg) {
        Ok(g) => g,
        Err(e) => {
            return method_tags(cfg)
                .into_iter()
                .map(|m| ResultRow::failed(seed, m, e.to_string()))
                .collect()
        }
    };
    let mut rows = Vec::with_capacity(3 + cfg.gamma_list.len());

    let full = DrsppInstance::new(gen.graph.clone(), gen.source, gen.sink, gen.ambiguity.set.clone());
    let start = Instant::now();
    let f1 = full.and_then(|inst| {
        let bounds = bounds_all(inst.ambiguity())?;
        let bounds_time = seconds_since(start);
        let mip_start = Instant::now();
        let sol = solve_mip_with_bounds(&inst, &bounds, opts)?;
        Ok((sol, bounds_time, seconds_since(mip_start)))
    });
    rows.push(match f1 {
        Ok((sol, bounds_time, mip_time)) => {
            let mut row = scored(seed, F1.into(), &gen, &sol.path, sol.objective, seconds_since(start));
            row.bounds_time_s = Some(bounds_time);
            row.mip_time_s = Some(mip_time);
            row.nodes = Some(sol.stats.nodes_explored);
            row
        }
        Err(e) => ResultRow::failed(seed, F1.into(), e.to_string()),
    });

    let quantile_only = gen.ambiguity.set.quantile_only();
    let start = Instant::now();
    let f1q = DrsppInstance::new(gen.graph.clone(), gen.source, gen.sink, quantile_only.clone())
        .and_then(|inst| solve_no_expectation(&inst));
    rows.push(match f1q {
        Ok(sol) => scored(seed, F1_QUANTILE.into(), &gen, &sol.path, sol.objective, seconds_since(start)),
        Err(e) => ResultRow::failed(seed, F1_QUANTILE.into(), e.to_string()),
    });

    let (l, u) = (gen.model.lower(), gen.model.upper());
    let start = Instant::now();
    let flags: Vec<Vec<Vec<bool>>> = (0..gen.graph.arc_count())
        .map(|a| gen.samples.iter().map(|row| quantile_only.arc(a).censor(row[a])).collect())
        .collect();
    let dr0 = censored_moment_estimates(quantile_only.per_arc(), &flags, cfg.eta0)
        .and_then(|est| dr0_solve(&gen.graph, gen.source, gen.sink, &l, &u, &est));
    rows.push(match dr0 {
        Ok((path, value, _)) => scored(seed, DR0.into(), &gen, &path, value, seconds_since(start)),
        Err(e) => ResultRow::failed(seed, DR0.into(), e.to_string()),
    });

    for &gamma in &cfg.gamma_list {
        let start = Instant::now();
        rows.push(match budgeted_robust_sp(&gen.graph, gen.source, gen.sink, &l, &u, gamma) {
            Ok((path, value)) => scored(seed, r0_tag(gamma), &gen, &path, value, seconds_since(start)),
            Err(e) => ResultRow::failed(seed, r0_tag(gamma), e.to_string()),
        });
    }
    rows
}

/// Maps `f` over `items` on `workers` threads, keeping input order.
pub fn par_map<T, R, F>(workers: usize, items: Vec<T>, f: F) -> Result<Vec<R>, CliError>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Send + Sync,
{
    if workers <= 1 {
        return Ok(items.into_iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::InvalidConfig(e.to_string()))?;
    Ok(pool.install(|| items.into_par_iter().map(f).collect()))
}

fn instance_configs(cfg: &ExperimentConfig, instances: usize) -> Vec<ExperimentConfig> {
    (0..instances as u64)
        .map(|i| ExperimentConfig {
            seed: cfg.seed.wrapping_add(i),
            ..cfg.clone()
        })
        .collect()
}

fn check(cfg: &ExperimentConfig) -> Result<(), CliError> {
    cfg.validate().map_err(|e| CliError::InvalidConfig(e.to_string()))
}

pub fn run_comparison(
    cfg: &ExperimentConfig,
    instances: usize,
    workers: usize,
    opts: &MipOptions,
) -> Result<Vec<ResultRow>, CliError> {
    check(cfg)?;
    let per_seed = par_map(workers, instance_configs(cfg, instances), |c| run_instance(&c, opts))?;
    Ok(per_seed.into_iter().flatten().collect())
}

/// Per-method statistics over successful rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    pub instances: usize,
    pub failures: usize,
    pub mean_rho: f64,
    /// Sample standard deviation; zero for a single instance.
    pub sd_rho: f64,
    pub mean_time_s: f64,
    pub max_time_s: f64,
}

impl SummaryRow {
    pub const HEADER: [&'static str; 7] =
        ["method", "instances", "failures", "mean_rho", "sd_rho", "mean_time_s", "max_time_s"];

    fn record(&self, times: bool) -> Vec<String> {
        let time = |t: f64| if times { fmt(t) } else { String::new() };
        vec![
            self.method.clone(),
            self.instances.to_string(),
            self.failures.to_string(),
            fmt(self.mean_rho),
            fmt(self.sd_rho),
            time(self.mean_time_s),
            time(self.max_time_s),
        ]
    }
}

/// Summary per method, in first-appearance order.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut methods: Vec<&str> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    methods
        .into_iter()
        .map(|m| {
            let ok: Vec<&ResultRow> = rows.iter().filter(|r| r.method == m && r.is_ok()).collect();
            let rhos: Vec<f64> = ok.iter().filter_map(|r| r.rho).collect();
            let times: Vec<f64> = ok.iter().map(|r| r.wall_time_s).collect();
            SummaryRow {
                method: m.to_owned(),
                instances: ok.len(),
                failures: rows.iter().filter(|r| r.method == m && !r.is_ok()).count(),
                mean_rho: if rhos.is_empty() { f64::NAN } else { rhos.as_slice().mean() },
                sd_rho: if rhos.len() > 1 { rhos.as_slice().std_dev() } else { 0.0 },
                mean_time_s: if times.is_empty() { f64::NAN } else { times.as_slice().mean() },
                max_time_s: times.iter().copied().fold(0.0, f64::max),
            }
        })
        .collect()
}

/// Mean relative loss of `method`, if any instance succeeded.
pub fn mean_rho(summary: &[SummaryRow], method: &str) -> Option<f64> {
    summary.iter().find(|s| s.method == method && s.instances > 0).map(|s| s.mean_rho)
}

/// Lowest mean relative loss over the robust-baseline budgets.
pub fn best_r0(summary: &[SummaryRow]) -> Option<f64> {
    summary
        .iter()
        .filter(|s| s.method.starts_with("R0:") && s.instances > 0)
        .map(|s| s.mean_rho)
        .reduce(f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    Kappa(Vec<f64>),
    N1(Vec<usize>),
}

impl Sweep {
    pub fn name(&self) -> &'static str {
        match self {
            Sweep::Kappa(_) => "kappa",
            Sweep::N1(_) => "n1",
        }
    }

    fn points(&self, cfg: &ExperimentConfig) -> Vec<(String, ExperimentConfig)> {
        match self {
            Sweep::Kappa(values) => values
                .iter()
                .map(|&kappa| (fmt(kappa), ExperimentConfig { kappa, ..cfg.clone() }))
                .collect(),
            Sweep::N1(values) => values
                .iter()
                .map(|&n1| (n1.to_string(), ExperimentConfig { n1, ..cfg.clone() }))
                .collect(),
        }
    }
}

/// Results of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub param: &'static str,
    pub value: String,
    pub rows: Vec<ResultRow>,
}

pub fn run_sweep(
    cfg: &ExperimentConfig,
    sweep: &Sweep,
    instances: usize,
    workers: usize,
    opts: &MipOptions,
) -> Result<Vec<SweepPoint>, CliError> {
    let points = sweep.points(cfg);
    if points.is_empty() {
        return Err(CliError::InvalidConfig("empty sweep".into()));
    }
    for (_, c) in &points {
        check(c)?;
    }
    let jobs: Vec<(usize, ExperimentConfig)> = points
        .iter()
        .enumerate()
        .flat_map(|(k, (_, c))| instance_configs(c, instances).into_iter().map(move |c| (k, c)))
        .collect();
    let results = par_map(workers, jobs, |(k, c)| (k, run_instance(&c, opts)))?;
    let mut out: Vec<SweepPoint> = points
        .into_iter()
        .map(|(value, _)| SweepPoint {
            param: sweep.name(),
            value,
            rows: Vec::new(),
        })
        .collect();
    for (k, rows) in results {
        out[k].rows.extend(rows);
    }
    Ok(out)
}

/// Stage times of one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub v: usize,
    pub r: usize,
    pub arcs: usize,
    pub seed: u64,
    pub bounds_time_s: f64,
    pub mip_time_s: f64,
    pub nodes: usize,
    pub gap: f64,
    pub error: Option<String>,
}

impl TimingRow {
    pub const HEADER: [&'static str; 9] =
        ["v", "r", "arcs", "seed", "bounds_time_s", "mip_time_s", "nodes", "gap", "error"];

    fn record(&self, times: bool) -> Vec<String> {
        let time = |t: f64| if times { fmt(t) } else { String::new() };
        vec![
            self.v.to_string(),
            self.r.to_string(),
            self.arcs.to_string(),
            self.seed.to_string(),
            time(self.bounds_time_s),
            time(self.mip_time_s),
            self.nodes.to_string(),
            fmt(self.gap),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

/// Generation is excluded; stage (i) computes the cost bounds, stage (ii)
/// solves the MIP.
pub fn time_instance(cfg: &ExperimentConfig, opts: &MipOptions) -> TimingRow {
    let arcs = 2 * cfg.r + (cfg.v - 1) * cfg.r * cfg.r;
    let mut row = TimingRow {
        v: cfg.v,
        r: cfg.r,
        arcs,
        seed: cfg.seed,
        bounds_time_s: 0.0,
        mip_time_s: 0.0,
        nodes: 0,
        gap: 0.0,
        error: None,
    };
    let outcome = generate(cfg).map_err(|e| e.to_string()).and_then(|gen| {
        let inst = DrsppInstance::new(gen.graph, gen.source, gen.sink, gen.ambiguity.set).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let bounds = bounds_all(inst.ambiguity()).map_err(|e| e.to_string())?;
        row.bounds_time_s = seconds_since(start);
        let start = Instant::now();
        let sol = solve_mip_with_bounds(&inst, &bounds, opts).map_err(|e| e.to_string())?;
        row.mip_time_s = seconds_since(start);
        row.nodes = sol.stats.nodes_explored;
        row.gap = sol.stats.gap;
        Ok(())
    });
    row.error = outcome.err();
    row
}

pub fn run_timing(
    v_list: &[usize],
    cfg: &ExperimentConfig,
    instances: usize,
    workers: usize,
    opts: &MipOptions,
) -> Result<Vec<TimingRow>, CliError> {
    let mut jobs = Vec::new();
    for &v in v_list {
        let c = ExperimentConfig {
            v,
            gamma_list: Vec::new(),
            ..cfg.clone()
        };
        check(&c)?;
        jobs.extend(instance_configs(&c, instances));
    }
    par_map(workers, jobs, |c| time_instance(&c, opts))
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(out)
}

/// With `times` false every timing column is left empty, making the output a
/// pure function of the flags.
pub fn write_results<W: Write>(out: W, rows: &[ResultRow], times: bool) -> Result<(), CliError> {
    let mut w = csv_writer(out);
    w.write_record(ResultRow::HEADER)?;
    for r in rows {
        w.write_record(r.record(times))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_summary<W: Write>(out: W, summary: &[SummaryRow], times: bool) -> Result<(), CliError> {
    let mut w = csv_writer(out);
    w.write_record(SummaryRow::HEADER)?;
    for s in summary {
        w.write_record(s.record(times))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_sweep<W: Write>(out: W, points: &[SweepPoint], times: bool) -> Result<(), CliError> {
    let mut w = csv_writer(out);
    let header: Vec<&str> = ["param", "value"].into_iter().chain(ResultRow::HEADER).collect();
    w.write_record(header)?;
    for p in points {
        for r in &p.rows {
            let mut rec = vec![p.param.to_owned(), p.value.clone()];
            rec.extend(r.record(times));
            w.write_record(rec)?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_sweep_summary<W: Write>(out: W, points: &[SweepPoint], times: bool) -> Result<(), CliError> {
    let mut w = csv_writer(out);
    let header: Vec<&str> = ["param", "value"].into_iter().chain(SummaryRow::HEADER).collect();
    w.write_record(header)?;
    for p in points {
        for s in summarize(&p.rows) {
            let mut rec = vec![p.param.to_owned(), p.value.clone()];
            rec.extend(s.record(times));
            w.write_record(rec)?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_timing<W: Write>(out: W, rows: &[TimingRow], times: bool) -> Result<(), CliError> {
    let mut w = csv_writer(out);
    w.write_record(TimingRow::HEADER)?;
    for r in rows {
        w.write_record(r.record(times))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Mean and maximum of each stage per `v`, in input order.
pub fn write_timing_summary<W: Write>(out: W, rows: &[TimingRow]) -> Result<(), CliError> {
    let mut w = csv_writer(out);
    w.write_record(["v", "arcs", "instances", "mean_bounds_s", "max_bounds_s", "mean_mip_s", "max_mip_s"])?;
    let mut vs: Vec<usize> = rows.iter().map(|r| r.v).collect();
    vs.dedup();
    for v in vs {
        let ok: Vec<&TimingRow> = rows.iter().filter(|r| r.v == v && r.error.is_none()).collect();
        let b: Vec<f64> = ok.iter().map(|r| r.bounds_time_s).collect();
        let m: Vec<f64> = ok.iter().map(|r| r.mip_time_s).collect();
        let arcs = rows.iter().find(|r| r.v == v).map_or(0, |r| r.arcs);
        w.write_record([
            v.to_string(),
            arcs.to_string(),
            ok.len().to_string(),
            fmt(b.as_slice().mean()),
            fmt(b.iter().copied().fold(0.0, f64::max)),
            fmt(m.as_slice().mean()),
            fmt(m.iter().copied().fold(0.0, f64::max)),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use dro_path::example::example1_report;
use dro_path::harness::{
    best_r0, mean_rho, run_comparison, run_sweep, summarize, time_instance, Sweep, DR0, F1, F1_QUANTILE,
};
use dro_path_core::ambiguity::{
    elementary_partition, expectation_from_samples, quantile_from_samples, AmbiguityError, ArcAmbiguity,
    QuantileConstraint,
};
use dro_path_core::baselines::{budgeted_robust_sp, censored_moment_estimates, dr0_costs, MomentEstimates};
use dro_path_core::datagen::{generate, ExperimentConfig, Marginal, NominalArc, SIGMA_TILDE};
use dro_path_core::fixtures::{random_arc, random_instance};
use dro_path_core::graph::{enumerate_paths, shortest_path, DirectedGraph};
use dro_path_core::lp::{solve_lp, LinearProgram, LpStatus, Relation, Sense};
use dro_path_core::moment::{best_case_cost, best_case_dual_value, worst_case_cost, worst_case_dual_value};
use dro_path_core::solver::{oracle_solve, solve_mip, solve_no_expectation, MipOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Beta, Binomial, ContinuousCDF, DiscreteCDF};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn example_exact() -> Outcome {
    let start = Instant::now();
    let arc = ArcAmbiguity::new(0.0, 100.0, [QuantileConstraint::new(70.0, 100.0, 0.0, 0.1)]).unwrap();
    let worst = worst_case_cost(&arc).map_err(|e| e.to_string())?;
    ensure(close(worst.value, 73.0, 1e-9), || format!("worst case {}", worst.value))?;
    let atoms = worst.distribution.atoms();
    ensure(
        atoms.len() == 2
            && atoms[0].0 == 70.0
            && close(atoms[0].1, 0.9, 1e-9)
            && atoms[1].0 == 100.0
            && close(atoms[1].1, 0.1, 1e-9),
        || format!("distribution {atoms:?}"),
    )?;
    let report = example1_report().map_err(|e| e.to_string())?;
    let expected_c_max = [73.0, 101.0, 100.0, 100.0, 100.0];
    ensure(
        report.c_max.iter().zip(expected_c_max).all(|(a, b)| close(*a, b, 1e-9)),
        || format!("c_max {:?}", report.c_max),
    )?;
    let table = [
        ("1-2-4", 201.0, 174.0, 88.5),
        ("1-3-4", 200.0, 200.0, 100.0),
        ("1-2-3-4", 300.0, 273.0, 137.5),
    ];
    ensure(report.paths.len() == 3, || format!("{} paths", report.paths.len()))?;
    for (row, (label, naive, dr, nominal)) in report.paths.iter().zip(table) {
        ensure(
            row.label == label
                && close(row.naive_robust, naive, 1e-9)
                && close(row.distributionally_robust, dr, 1e-9)
                && close(row.nominal, nominal, 1e-9),
            || format!("row {row:?}"),
        )?;
    }
    ensure(report.dr_optimum.0 == "1-2-4" && close(report.dr_optimum.1, 174.0, 1e-9), || {
        format!("DR optimum {:?}", report.dr_optimum)
    })?;
    ensure(report.naive_optimum.0 == "1-3-4" && close(report.naive_optimum.1, 200.0, 1e-9), || {
        format!("naive optimum {:?}", report.naive_optimum)
    })?;
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 1.0, || format!("took {elapsed:.3} s"))?;
    Ok(format!("table reproduced in {elapsed:.4} s"))
}

fn partition_exact() -> Outcome {
    let arc = ArcAmbiguity::new(
        0.0,
        100.0,
        [
            QuantileConstraint::new(20.0, 60.0, 0.3, 0.7),
            QuantileConstraint::new(30.0, 70.0, 0.3, 0.7),
        ],
    )
    .unwrap();
    let part = elementary_partition(&arc);
    let expected = [(0.0, 20.0), (20.0, 30.0), (30.0, 60.0), (60.0, 70.0), (70.0, 100.0)];
    ensure(part.bounds() == expected, || format!("regions {:?}", part.bounds()))?;
    let members: [&[usize]; 3] = [&[0, 1, 2, 3, 4], &[1, 2], &[2, 3]];
    for (i, m) in members.iter().enumerate() {
        ensure(part.regions_in(i) == *m, || format!("W({i}) = {:?}", part.regions_in(i)))?;
    }
    let containing: [&[usize]; 5] = [&[0], &[0, 1], &[0, 1, 2], &[0, 2], &[0]];
    for (j, c) in containing.iter().enumerate() {
        ensure(part.baselines_of(j) == *c, || format!("D({j}) = {:?}", part.baselines_of(j)))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let u = rng.random_range(2..40);
        let (a, _) = random_arc(&mut rng, 0, u, 5);
        let w = elementary_partition(&a).len();
        ensure(w < 2 * a.len(), || format!("W = {w} for D = {}", a.len()))?;
    }
    Ok("five regions with exact membership; W <= 2D-1 on 1000 random arcs".into())
}

fn a2_rejection() -> Outcome {
    let arc = ArcAmbiguity::new(
        0.0,
        100.0,
        [
            QuantileConstraint::new(0.0, 50.0, 0.4, 0.6),
            QuantileConstraint::new(50.0, 100.0, 0.4, 0.6),
        ],
    )
    .unwrap();
    match arc.validate() {
        Err(AmbiguityError::A2Violation { endpoint, .. }) if endpoint == 50.0 => {
            Ok("refused with A2Violation at 50".into())
        }
        other => Err(format!("got {other:?}")),
    }
}

fn cross_solver() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..100 {
        let v = rng.random_range(1..=3);
        let r = rng.random_range(1..=3);
        let rows = rng.random_range(0..=4);
        let inst = random_instance(&mut rng, v, r, 2, rows);
        let mip = solve_mip(&inst).map_err(|e| format!("case {case}: {e}"))?;
        let oracle = oracle_solve(&inst, 100_000).map_err(|e| format!("case {case}: {e}"))?;
        ensure(close(mip.objective, oracle.objective, 1e-6), || {
            format!("case {case}: {} vs {}", mip.objective, oracle.objective)
        })?;
        ensure(mip.path == oracle.path, || format!("case {case}: paths differ"))?;
    }
    for case in 0..50 {
        let v = rng.random_range(1..=3);
        let r = rng.random_range(1..=3);
        let inst = random_instance(&mut rng, v, r, 2, 0);
        let mip = solve_mip(&inst).map_err(|e| e.to_string())?;
        let poly = solve_no_expectation(&inst).map_err(|e| e.to_string())?;
        ensure(close(mip.objective, poly.objective, 1e-6) && mip.path == poly.path, || {
            format!("row-free case {case}: {} vs {}", mip.objective, poly.objective)
        })?;
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 60.0, || format!("took {elapsed:.1} s"))?;
    Ok(format!("150 instances agree in {elapsed:.2} s"))
}

/// Optimal expectation over point masses at the midpoints of a regular grid.
fn grid_oracle(a: &ArcAmbiguity, step: f64, maximise: bool) -> f64 {
    let (l, u) = a.support();
    let n = ((u - l) / step).round() as usize;
    let points: Vec<f64> = (0..n).map(|k| l + (k as f64 + 0.5) * step).collect();
    let sense = if maximise { Sense::Maximize } else { Sense::Minimize };
    let mut lp = LinearProgram::new(sense, points.clone());
    lp.add_row(vec![1.0; n], Relation::Eq, 1.0);
    for q in a.quantiles() {
        let row: Vec<f64> = points.iter().map(|&x| if q.contains(x) { 1.0 } else { 0.0 }).collect();
        lp.add_row(row.clone(), Relation::Ge, q.q_lo);
        lp.add_row(row, Relation::Le, q.q_hi);
    }
    let sol = solve_lp(&lp).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    sol.objective_value
}

fn moment_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut largest_gap: f64 = 0.0;
    for case in 0..200 {
        let l = rng.random_range(0..5);
        let u = l + rng.random_range(2..=10);
        let (a, _) = random_arc(&mut rng, l, u, 2);
        let worst = worst_case_cost(&a).map_err(|e| e.to_string())?.value;
        let best = best_case_cost(&a).map_err(|e| e.to_string())?.value;
        let mut previous = (f64::INFINITY, f64::INFINITY);
        for step in [0.5, 0.25, 0.125, 0.0625] {
            let err = (worst - grid_oracle(&a, step, true), grid_oracle(&a, step, false) - best);
            ensure(err.0 >= -1e-9 && err.1 >= -1e-9, || format!("case {case}: grid beats the LP"))?;
            ensure(err.0 <= step / 2.0 + 1e-9 && err.1 <= step / 2.0 + 1e-9, || {
                format!("case {case}: grid error {err:?} at step {step}")
            })?;
            ensure(err.0 <= previous.0 + 1e-9 && err.1 <= previous.1 + 1e-9, || {
                format!("case {case}: not converging")
            })?;
            previous = err;
        }
        let gaps = (
            (worst_case_dual_value(&a).map_err(|e| e.to_string())? - worst).abs(),
            (best_case_dual_value(&a).map_err(|e| e.to_string())? - best).abs(),
        );
        largest_gap = largest_gap.max(gaps.0).max(gaps.1);
    }
    ensure(largest_gap <= 1e-9, || format!("duality gap {largest_gap:e}"))?;
    Ok(format!("200 arcs within grid error; max duality gap {largest_gap:.1e}"))
}

fn hoeffding_coverage() -> Outcome {
    let arc = NominalArc::beta(10.0, 90.0, 0.4, SIGMA_TILDE);
    let Marginal::Beta { alpha, beta } = arc.marginal else { unreachable!() };
    let reference = Beta::new(alpha, beta).unwrap();
    let (lo, hi) = (30.0, 50.0);
    let p_true = reference.cdf((hi - 10.0) / 80.0) - reference.cdf((lo - 10.0) / 80.0);
    let trials: u64 = 1000;
    let n = 100;
    let (mut q_hits, mut m_hits) = (0u64, 0u64);
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(10_000 + trial);
        let xs: Vec<f64> = (0..n).map(|_| arc.sample(&mut rng)).collect();
        let hits = xs.iter().filter(|&&x| lo <= x && x <= hi).count();
        let q = quantile_from_samples(hits, n, (lo, hi), 0.05).map_err(|e| e.to_string())?;
        q_hits += u64::from(q.q_lo <= p_true && p_true <= q.q_hi);
        let [upper, lower] = expectation_from_samples(&xs, &[0], 10.0, 90.0, 0.05).map_err(|e| e.to_string())?;
        m_hits += u64::from(arc.mean() <= upper.rhs() && -arc.mean() <= lower.rhs());
    }
    let null = Binomial::new(0.95, trials).unwrap();
    let (pq, pm) = (null.cdf(q_hits), null.cdf(m_hits));
    ensure(pq >= 0.01 && pm >= 0.01, || {
        format!("quantile {q_hits}/{trials} (p={pq:.3e}), mean {m_hits}/{trials} (p={pm:.3e})")
    })?;
    Ok(format!("quantile {q_hits}/{trials}, mean {m_hits}/{trials} covered"))
}

fn small_dag(rng: &mut ChaCha8Rng) -> DirectedGraph {
    let n = rng.random_range(2..=6);
    let mut arcs: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    while arcs.len() < 10 && rng.random_bool(0.8) {
        let a = rng.random_range(0..n - 1);
        arcs.push((a, rng.random_range(a + 1..n)));
    }
    DirectedGraph::new(n, &arcs).unwrap()
}

fn r0_exact() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..100 {
        let g = small_dag(&mut rng);
        let m = g.arc_count();
        let t = g.node_count() - 1;
        let l: Vec<f64> = (0..m).map(|_| rng.random_range(0..30) as f64).collect();
        let u: Vec<f64> = l.iter().map(|x| x + rng.random_range(0..30) as f64).collect();
        let paths = enumerate_paths(&g, 0, t, 10_000).unwrap();
        for gamma in 0..=3.min(m) {
            let (_, value) = budgeted_robust_sp(&g, 0, t, &l, &u, gamma).map_err(|e| e.to_string())?;
            let oracle = paths
                .iter()
                .map(|p| {
                    (0u32..1 << m)
                        .filter(|s| s.count_ones() as usize <= gamma)
                        .map(|s| p.arcs().iter().map(|&a| if s >> a & 1 == 1 { u[a] } else { l[a] }).sum::<f64>())
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .fold(f64::INFINITY, f64::min);
            ensure(close(value, oracle, 1e-9), || format!("case {case}, gamma {gamma}: {value} vs {oracle}"))?;
        }
        let zero = budgeted_robust_sp(&g, 0, t, &l, &u, 0).unwrap();
        let full = budgeted_robust_sp(&g, 0, t, &l, &u, m).unwrap();
        ensure(zero == shortest_path(&g, &l, 0, t).unwrap(), || format!("case {case}: gamma 0"))?;
        ensure(full == shortest_path(&g, &u, 0, t).unwrap(), || format!("case {case}: gamma |A|"))?;
    }
    Ok("100 graphs match subset enumeration; both endpoints exact".into())
}

fn dr0_formula() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut checked = 0;
    let mut check = |l: &[f64], u: &[f64], est: &MomentEstimates| -> Result<(), String> {
        let est = est.clone().truncated(u);
        for (a, c) in dr0_costs(l, u, &est).into_iter().enumerate() {
            let expected = est.mu_hat[a].min(est.sigma2_hat[a].sqrt()).max(l[a]);
            ensure(c == expected, || format!("arc {a}: {c} vs {expected}"))?;
            checked += 1;
        }
        Ok(())
    };
    for _ in 0..200 {
        let m = 8;
        let l: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..50.0)).collect();
        let u: Vec<f64> = l.iter().map(|x| x + rng.random_range(1.0..50.0)).collect();
        let est = MomentEstimates {
            mu_hat: (0..m).map(|a| rng.random_range(l[a]..u[a] + 20.0)).collect(),
            sigma2_hat: (0..m).map(|a| rng.random_range(l[a] * l[a]..(u[a] + 20.0).powi(2))).collect(),
            eps_mu: vec![0.0; m],
            eps_sigma2: vec![0.0; m],
        };
        check(&l, &u, &est)?;
    }
    for seed in 0..5 {
        let cfg = ExperimentConfig {
            expectation_rows: false,
            ..ExperimentConfig::new(3, 3, seed)
        };
        let gen = generate(&cfg).map_err(|e| e.to_string())?;
        let set = &gen.ambiguity.set;
        let flags: Vec<Vec<Vec<bool>>> = (0..gen.graph.arc_count())
            .map(|a| gen.samples.iter().map(|r| set.arc(a).censor(r[a])).collect())
            .collect();
        let est = censored_moment_estimates(set.per_arc(), &flags, cfg.eta0).map_err(|e| e.to_string())?;
        check(&gen.model.lower(), &gen.model.upper(), &est)?;
    }
    Ok(format!("{checked} arc costs equal min(mu, sigma) after truncation"))
}

const SLACK: f64 = 0.02;

fn trends() -> Outcome {
    let start = Instant::now();
    let cfg = ExperimentConfig::new(6, 4, 0);
    let opts = MipOptions::default();
    let summary = summarize(&run_comparison(&cfg, 30, 1, &opts).map_err(|e| e.to_string())?);
    let get = |m: &str| mean_rho(&summary, m).ok_or_else(|| format!("no successful {m} runs"));
    let chain = [get(F1)?, get(F1_QUANTILE)?, get(DR0)?, best_r0(&summary).ok_or("no R0 runs")?];
    ensure(chain.windows(2).all(|w| w[0] <= w[1] + SLACK), || format!("ordering F1, F1', DR0, R0: {chain:?}"))?;

    let n1 = run_sweep(&cfg, &Sweep::N1(vec![1, 2, 3, 4]), 30, 1, &opts).map_err(|e| e.to_string())?;
    let n1_means: Vec<f64> = n1.iter().map(|p| mean_rho(&summarize(&p.rows), F1_QUANTILE).unwrap_or(f64::NAN)).collect();
    ensure(n1_means.windows(2).all(|w| w[1] <= w[0] + SLACK), || format!("n1 sweep F1': {n1_means:?}"))?;

    let kappa = run_sweep(&cfg, &Sweep::Kappa(vec![0.2, 0.4, 0.6, 0.8]), 30, 1, &opts).map_err(|e| e.to_string())?;
    let k_means: Vec<f64> =
        kappa.iter().map(|p| mean_rho(&summarize(&p.rows), F1_QUANTILE).unwrap_or(f64::NAN)).collect();
    let interior = k_means[1].min(k_means[2]);
    ensure(interior <= k_means[0] && interior <= k_means[3], || format!("kappa sweep F1': {k_means:?}"))?;

    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 600.0, || format!("took {elapsed:.0} s"))?;
    Ok(format!(
        "means {chain:.4?}; n1 {n1_means:.4?}; kappa {k_means:.4?}; {elapsed:.1} s"
    ))
}

fn scale_smoke() -> Outcome {
    let start = Instant::now();
    let row = time_instance(&ExperimentConfig::new(20, 10, 0), &MipOptions::default());
    let elapsed = start.elapsed().as_secs_f64();
    if let Some(e) = &row.error {
        return Err(e.clone());
    }
    ensure(row.arcs == 1920, || format!("{} arcs", row.arcs))?;
    ensure(row.gap <= 1e-6, || format!("gap {}", row.gap))?;
    ensure(elapsed < 120.0, || format!("took {elapsed:.1} s"))?;
    Ok(format!(
        "1920 arcs: bounds {:.2} s, MIP {:.2} s, {} nodes, gap {:.1e}",
        row.bounds_time_s, row.mip_time_s, row.nodes, row.gap
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("worked example reproduced exactly", example_exact),
        ("elementary partition exact", partition_exact),
        ("endpoint clash rejected", a2_rejection),
        ("MIP agrees with enumeration", cross_solver),
        ("moment LP agrees with grid oracle", moment_oracle),
        ("Hoeffding coverage", hoeffding_coverage),
        ("budgeted robust path exact", r0_exact),
        ("moment-model costs follow the formula", dr0_formula),
        ("method and sweep trends", trends),
        ("1920-arc instance solves", scale_smoke),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

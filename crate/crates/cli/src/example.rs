//! The four-node worked example: per-path costs under the interval, the
//! ambiguity-set and the nominal views.

use dro_path_core::baselines::budgeted_robust_sp;
use dro_path_core::datagen::example1;
use dro_path_core::graph::{enumerate_paths, Path};
use dro_path_core::moment::{worst_case_cost, worst_case_costs};
use dro_path_core::solver::{solve_no_expectation, DrsppInstance};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct PathCosts {
    /// 1-based node labels joined by `-`.
    pub label: String,
    pub arcs: Vec<usize>,
    pub naive_robust: f64,
    pub distributionally_robust: f64,
    pub nominal: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example1Report {
    pub c_max: Vec<f64>,
    /// Worst-case atoms `(value, mass)` of the first arc.
    pub worst_distribution: Vec<(f64, f64)>,
    pub paths: Vec<PathCosts>,
    pub dr_optimum: (String, f64),
    pub naive_optimum: (String, f64),
    pub nominal_optimum: (String, f64),
}

fn label(p: &Path, graph: &dro_path_core::graph::DirectedGraph) -> String {
    p.nodes(graph).iter().map(|n| (n + 1).to_string()).collect::<Vec<_>>().join("-")
}

pub fn example1_report() -> Result<Example1Report, CliError> {
    let ex = example1();
    let c_max = worst_case_costs(&ex.ambiguity)?;
    let worst = worst_case_cost(ex.ambiguity.arc(0))?;
    let u = ex.model.upper();
    let l = ex.model.lower();
    let means = ex.model.means();
    let mut paths: Vec<PathCosts> = enumerate_paths(&ex.graph, ex.source, ex.sink, 16)?
        .iter()
        .map(|p| PathCosts {
            label: label(p, &ex.graph),
            arcs: p.arcs().to_vec(),
            naive_robust: p.cost(&u),
            distributionally_robust: p.cost(&c_max),
            nominal: p.cost(&means),
        })
        .collect();
    paths.sort_by(|a, b| a.arcs.len().cmp(&b.arcs.len()).then(a.arcs.cmp(&b.arcs)));

    let inst = DrsppInstance::new(ex.graph.clone(), ex.source, ex.sink, ex.ambiguity.clone())?;
    let dr = solve_no_expectation(&inst)?;
    let (naive, naive_value) = budgeted_robust_sp(&ex.graph, ex.source, ex.sink, &l, &u, ex.graph.arc_count())?;
    let nominal = paths
        .iter()
        .min_by(|a, b| a.nominal.total_cmp(&b.nominal))
        .expect("the example has paths");
    Ok(Example1Report {
        c_max,
        worst_distribution: worst.distribution.atoms().to_vec(),
        dr_optimum: (label(&dr.path, &ex.graph), dr.objective),
        naive_optimum: (label(&naive, &ex.graph), naive_value),
        nominal_optimum: (nominal.label.clone(), nominal.nominal),
        paths,
    })
}

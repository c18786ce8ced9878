//! DRSPP solvers: the polynomial algorithm without expectation rows, the MIP
//! reformulation with branch-and-bound, and a path-enumeration oracle.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::Range;

use crate::ambiguity::{AmbiguityError, AmbiguitySet};
use crate::graph::{
    distances_from, distances_to, enumerate_paths, flow_system, shortest_path, shortest_path_with, Algorithm, ArcId, DirectedGraph,
    GraphError, NodeId, Path,
};
use crate::lp::{solve_lp, LinearProgram, LpError, LpStatus, Relation, Sense};
use crate::moment::{bounds_all, worst_case_costs, CostBounds};

/// Relative tolerance under which two objective values count as tied.
pub const OBJECTIVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Ambiguity(#[from] AmbiguityError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("ambiguity covers {got} arcs, graph has {expected}")]
    Coverage { expected: usize, got: usize },
    #[error("expectation rows present; use the MIP solver")]
    RequiresMip,
    #[error("expectation rows contradict the cost bounds")]
    AmbiguityInfeasible,
    #[error("branch-and-bound node limit {0} reached")]
    NodeLimit(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrsppInstance {
    graph: DirectedGraph,
    source: NodeId,
    sink: NodeId,
    ambiguity: AmbiguitySet,
}

impl DrsppInstance {
    pub fn new(
        graph: DirectedGraph,
        source: NodeId,
        sink: NodeId,
        ambiguity: AmbiguitySet,
    ) -> Result<Self, SolverError> {
        if ambiguity.arc_count() != graph.arc_count() {
            return Err(SolverError::Coverage {
                expected: graph.arc_count(),
                got: ambiguity.arc_count(),
            });
        }
        for node in [source, sink] {
            if node >= graph.node_count() {
                return Err(GraphError::NoPath { from: source, to: sink }.into());
            }
        }
        shortest_path(&graph, &vec![0.0; graph.arc_count()], source, sink)?;
        Ok(Self {
            graph,
            source,
            sink,
            ambiguity,
        })
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn sink(&self) -> NodeId {
        self.sink
    }

    pub fn ambiguity(&self) -> &AmbiguitySet {
        &self.ambiguity
    }

    pub fn with_ambiguity(&self, ambiguity: AmbiguitySet) -> Result<Self, SolverError> {
        Self::new(self.graph.clone(), self.source, self.sink, ambiguity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverStats {
    pub nodes_explored: usize,
    pub lp_solves: usize,
    pub wall_time_s: f64,
    /// Relative gap between incumbent and best bound at termination.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrsppSolution {
    pub path: Path,
    pub objective: f64,
    /// A maximising cost vector in `S` for the chosen path.
    pub worst_case_costs: Vec<f64>,
    pub stats: SolverStats,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MipOptions {
    pub node_limit: usize,
    pub integrality_tol: f64,
    /// After optimality, search for the lexicographically smallest optimal
    /// path.
    pub lexicographic_ties: bool,
}

impl Default for MipOptions {
    fn default() -> Self {
        Self {
            node_limit: 1_000_000,
            integrality_tol: 1e-6,
            lexicographic_ties: true,
        }
    }
}

fn tie_slack(value: f64) -> f64 {
    OBJECTIVE_TOL * value.abs().max(1.0)
}

/// Whether `(value, path)` beats `(best_value, best_path)`: strictly smaller
/// objective, or a tie broken by the lexicographically smaller arc sequence.
pub fn improves(value: f64, path: &Path, best_value: f64, best_path: &Path) -> bool {
    let slack = tie_slack(best_value);
    value < best_value - slack || (value <= best_value + slack && path.arcs() < best_path.arcs())
}

struct Clock {
    #[cfg(feature = "std")]
    start: std::time::Instant,
}

impl Clock {
    fn start() -> Self {
        Self {
            #[cfg(feature = "std")]
            start: std::time::Instant::now(),
        }
    }

    fn seconds(&self) -> f64 {
        #[cfg(feature = "std")]
        {
            self.start.elapsed().as_secs_f64()
        }
        #[cfg(not(feature = "std"))]
        {
            0.0
        }
    }
}

/// Shortest path under `c_max`; requires an empty expectation-row set.
pub fn solve_no_expectation(inst: &DrsppInstance) -> Result<DrsppSolution, SolverError> {
    if !inst.ambiguity.expectation_rows().is_empty() {
        return Err(SolverError::RequiresMip);
    }
    let clock = Clock::start();
    let c_max = worst_case_costs(&inst.ambiguity)?;
    let (path, objective) = shortest_path(&inst.graph, &c_max, inst.source, inst.sink)?;
    Ok(DrsppSolution {
        path,
        objective,
        worst_case_costs: c_max,
        stats: SolverStats {
            lp_solves: 2 * inst.graph.arc_count(),
            wall_time_s: clock.seconds(),
            ..SolverStats::default()
        },
    })
}

/// Arcs with a nonzero coefficient in some expectation row, ascending.
fn covered_arcs(amb: &AmbiguitySet) -> Vec<ArcId> {
    let mut arcs: Vec<ArcId> = amb
        .expectation_rows()
        .iter()
        .flat_map(|r| r.coeffs().iter().map(|&(a, _)| a))
        .collect();
    arcs.sort_unstable();
    arcs.dedup();
    arcs
}

/// `max c^T y` over `S = {c_min <= c <= c_max, B c <= b}`.
pub fn worst_case_scenario(
    inst: &DrsppInstance,
    bounds: &CostBounds,
    path: &Path,
) -> Result<(Vec<f64>, f64), SolverError> {
    let y: Vec<f64> = path.incidence().iter().map(|&b| f64::from(b)).collect();
    scenario_for(inst, bounds, &y)
}

fn scenario_for(inst: &DrsppInstance, bounds: &CostBounds, y: &[f64]) -> Result<(Vec<f64>, f64), SolverError> {
    let rows = inst.ambiguity.expectation_rows();
    let mut c = bounds.c_max.clone();
    if rows.is_empty() {
        let value = y.iter().zip(&c).filter(|(&w, _)| w != 0.0).map(|(w, c)| w * c).sum();
        return Ok((c, value));
    }
    let mut vars = covered_arcs(&inst.ambiguity);
    vars.extend((0..y.len()).filter(|&a| y[a] != 0.0));
    vars.sort_unstable();
    vars.dedup();
    let index: BTreeMap<ArcId, usize> = vars.iter().enumerate().map(|(k, &a)| (a, k)).collect();
    let mut lp = LinearProgram::new(Sense::Maximize, vars.iter().map(|&a| y[a]).collect());
    for (k, &a) in vars.iter().enumerate() {
        lp.set_bounds(k, bounds.c_min[a], bounds.c_max[a]);
    }
    for r in rows {
        let mut row = vec![0.0; vars.len()];
        for &(a, v) in r.coeffs() {
            row[index[&a]] = v;
        }
        lp.add_row(row, Relation::Le, r.rhs());
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(SolverError::AmbiguityInfeasible);
    }
    for (k, &a) in vars.iter().enumerate() {
        c[a] = sol.x[k];
    }
    // Recompute in arc order so equal paths give bit-identical values.
    let value = (0..y.len()).filter(|&a| y[a] != 0.0).map(|a| y[a] * c[a]).sum();
    Ok((c, value))
}

/// Whether `S` is nonempty.
pub fn scenario_set_is_nonempty(inst: &DrsppInstance, bounds: &CostBounds) -> Result<bool, SolverError> {
    match scenario_for(inst, bounds, &vec![0.0; inst.graph.arc_count()]) {
        Ok(_) => Ok(true),
        Err(SolverError::AmbiguityInfeasible) => Ok(false),
        Err(e) => Err(e),
    }
}

/// The MIP reformulation with its variable layout; columns are
/// `y | lambda | mu | nu`, rows are one equality per arc followed by one
/// flow-balance row per node.
#[derive(Debug, Clone, PartialEq)]
pub struct MipModel {
    pub lp: LinearProgram,
    pub y: Range<usize>,
    pub lambda: Range<usize>,
    pub mu: Range<usize>,
    pub nu: Range<usize>,
}

impl MipModel {
    pub fn integer_vars(&self) -> Range<usize> {
        self.y.clone()
    }
}

pub fn build_mip(inst: &DrsppInstance, bounds: &CostBounds) -> MipModel {
    let m = inst.graph.arc_count();
    let rows = inst.ambiguity.expectation_rows();
    let d0 = rows.len();
    let y = 0..m;
    let lambda = m..m + d0;
    let mu = m + d0..2 * m + d0;
    let nu = 2 * m + d0..3 * m + d0;
    let width = 3 * m + d0;

    let mut objective = vec![0.0; width];
    for (r, row) in rows.iter().enumerate() {
        objective[lambda.start + r] = row.rhs();
    }
    for a in 0..m {
        objective[mu.start + a] = -bounds.c_min[a];
        objective[nu.start + a] = bounds.c_max[a];
    }
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    for a in y.clone() {
        lp.set_bounds(a, 0.0, 1.0);
    }
    for a in 0..m {
        let mut coeffs = vec![0.0; width];
        coeffs[a] = -1.0;
        for (r, row) in rows.iter().enumerate() {
            coeffs[lambda.start + r] = row.coefficient(a);
        }
        coeffs[nu.start + a] = 1.0;
        coeffs[mu.start + a] = -1.0;
        lp.add_row(coeffs, Relation::Eq, 0.0);
    }
    let fs = flow_system(&inst.graph, inst.source, inst.sink).expect("instance endpoints differ");
    for node in 0..inst.graph.node_count() {
        let mut coeffs = vec![0.0; width];
        for (a, &g) in fs.row(node).iter().enumerate() {
            coeffs[a] = f64::from(g);
        }
        lp.add_row(coeffs, Relation::Eq, f64::from(fs.rhs()[node]));
    }
    MipModel {
        lp,
        y,
        lambda,
        mu,
        nu,
    }
}

/// Compact relaxation used inside branch-and-bound. Arcs outside every
/// expectation row keep only `y` (their dual pair collapses to `c_max y`),
/// eliminated and fixed arcs are substituted out, and the sink's flow row is
/// dropped as redundant.
struct Relaxation {
    arcs: Vec<(NodeId, NodeId)>,
    source: NodeId,
    sink: NodeId,
    node_count: usize,
    c_min: Vec<f64>,
    c_max: Vec<f64>,
    rows: Vec<(Vec<f64>, f64)>,
    covered: Vec<ArcId>,
    is_covered: Vec<bool>,
    alive: Vec<bool>,
}

impl Relaxation {
    fn new(inst: &DrsppInstance, bounds: &CostBounds, alive: Vec<bool>) -> Self {
        let m = inst.graph.arc_count();
        let covered = covered_arcs(&inst.ambiguity);
        let mut is_covered = vec![false; m];
        for &a in &covered {
            is_covered[a] = true;
        }
        let rows = inst
            .ambiguity
            .expectation_rows()
            .iter()
            .map(|r| ((0..m).map(|a| r.coefficient(a)).collect(), r.rhs()))
            .collect();
        Self {
            arcs: inst.graph.arcs().iter().map(|a| (a.tail, a.head)).collect(),
            source: inst.source,
            sink: inst.sink,
            node_count: inst.graph.node_count(),
            c_min: bounds.c_min.clone(),
            c_max: bounds.c_max.clone(),
            rows,
            covered,
            is_covered,
            alive,
        }
    }

    /// Solves with `y` fixings (`-1` free, `0`, `1`); `None` when infeasible.
    fn solve(&self, fixings: &[i8], stats: &mut SolverStats) -> Result<Option<(f64, Vec<f64>)>, SolverError> {
        let m = self.arcs.len();
        if (0..m).any(|a| fixings[a] == 1 && !self.alive[a]) {
            return Ok(None);
        }
        let free: Vec<ArcId> = (0..m).filter(|&a| self.alive[a] && fixings[a] < 0).collect();
        let nf = free.len();
        let d0 = self.rows.len();
        let width = nf + d0 + 2 * self.covered.len();
        let mut objective = vec![0.0; width];
        let mut constant = 0.0;
        for (k, &a) in free.iter().enumerate() {
            if !self.is_covered[a] {
                objective[k] = self.c_max[a];
            }
        }
        for a in (0..m).filter(|&a| fixings[a] == 1 && !self.is_covered[a]) {
            constant += self.c_max[a];
        }
        for (r, (_, rhs)) in self.rows.iter().enumerate() {
            objective[nf + r] = *rhs;
        }
        for (idx, &a) in self.covered.iter().enumerate() {
            objective[nf + d0 + 2 * idx] = -self.c_min[a];
            objective[nf + d0 + 2 * idx + 1] = self.c_max[a];
        }
        let mut lp = LinearProgram::new(Sense::Minimize, objective);
        for k in 0..nf {
            lp.set_bounds(k, 0.0, 1.0);
        }
        let mut column = vec![usize::MAX; m];
        for (k, &a) in free.iter().enumerate() {
            column[a] = k;
        }
        for (idx, &a) in self.covered.iter().enumerate() {
            let mut coeffs = vec![0.0; width];
            if column[a] != usize::MAX {
                coeffs[column[a]] = -1.0;
            }
            for (r, (b, _)) in self.rows.iter().enumerate() {
                coeffs[nf + r] = b[a];
            }
            coeffs[nf + d0 + 2 * idx] = -1.0;
            coeffs[nf + d0 + 2 * idx + 1] = 1.0;
            let rhs = if fixings[a] == 1 { 1.0 } else { 0.0 };
            lp.add_row(coeffs, Relation::Eq, rhs);
        }
        let mut flow = vec![vec![0.0; width]; self.node_count];
        let mut rhs = vec![0.0; self.node_count];
        rhs[self.source] = 1.0;
        rhs[self.sink] = -1.0;
        for (a, &(tail, head)) in self.arcs.iter().enumerate() {
            if column[a] != usize::MAX {
                flow[tail][column[a]] = 1.0;
                flow[head][column[a]] = -1.0;
            } else if fixings[a] == 1 {
                rhs[tail] -= 1.0;
                rhs[head] += 1.0;
            }
        }
        for (node, (coeffs, b)) in flow.into_iter().zip(rhs).enumerate() {
            if node != self.sink {
                lp.add_row(coeffs, Relation::Eq, b);
            }
        }
        stats.lp_solves += 1;
        let sol = solve_lp(&lp)?;
        Ok(match sol.status {
            LpStatus::Optimal => {
                let mut y: Vec<f64> = fixings.iter().map(|&f| if f == 1 { 1.0 } else { 0.0 }).collect();
                for (k, &a) in free.iter().enumerate() {
                    y[a] = sol.x[k];
                }
                Some((sol.objective_value + constant, y))
            }
            LpStatus::Infeasible => None,
            LpStatus::Unbounded => return Err(SolverError::AmbiguityInfeasible),
        })
    }
}

/// Arcs that can lie on a path of value at most `cutoff`: for each scenario
/// `c` in `S`, a path through `a` is worth at least
/// `dist_c(s, tail) + c_a + dist_c(head, t)`.
fn surviving_arcs(inst: &DrsppInstance, scenarios: &[Vec<f64>], cutoff: f64) -> Result<Vec<bool>, SolverError> {
    let g = &inst.graph;
    let mut alive = vec![true; g.arc_count()];
    for c in scenarios {
        let from = distances_from(g, c, inst.source)?;
        let to = distances_to(g, c, inst.sink)?;
        for arc in g.arcs() {
            if from[arc.tail] + c[arc.id] + to[arc.head] > cutoff {
                alive[arc.id] = false;
            }
        }
    }
    Ok(alive)
}

struct OpenNode {
    bound: f64,
    seq: usize,
    fixings: Vec<i8>,
    y: Vec<f64>,
}

impl PartialEq for OpenNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenNode {}

impl PartialOrd for OpenNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenNode {
    // Max-heap on the reversed key: smallest bound first, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Search<'a> {
    inst: &'a DrsppInstance,
    bounds: &'a CostBounds,
    relaxation: Relaxation,
    opts: MipOptions,
    stats: SolverStats,
    evaluated: BTreeMap<Vec<ArcId>, f64>,
    /// Worst-case cost vectors found so far; each lies in `S`.
    scenarios: Vec<Vec<f64>>,
}

/// Outcome of one branch-and-bound run.
struct Run {
    best: Option<(Path, f64)>,
    lower: f64,
}

impl<'a> Search<'a> {
    fn evaluate(&mut self, path: &Path) -> Result<f64, SolverError> {
        if let Some(&v) = self.evaluated.get(path.arcs()) {
            return Ok(v);
        }
        self.stats.lp_solves += 1;
        let (c, v) = worst_case_scenario(self.inst, self.bounds, path)?;
        self.evaluated.insert(path.arcs().to_vec(), v);
        self.scenarios.push(c);
        Ok(v)
    }

    /// Path through the arcs with `y` near one, fewest arcs first.
    fn decompose(&self, y: &[f64]) -> Option<Path> {
        let removed: Vec<bool> = y.iter().map(|&v| v < 0.5).collect();
        let unit = vec![1.0; y.len()];
        let g = &self.inst.graph;
        shortest_path_with(g, &unit, self.inst.source, self.inst.sink, Some(&removed), Algorithm::Dijkstra)
            .ok()
            .map(|(p, _)| p)
    }

    /// Rounding heuristic: shortest path under costs `1 - y`.
    fn round(&self, y: &[f64], fixings: &[i8]) -> Option<Path> {
        let costs: Vec<f64> = y.iter().map(|&v| (1.0 - v).max(0.0)).collect();
        let removed: Vec<bool> = fixings.iter().map(|&f| f == 0).collect();
        let g = &self.inst.graph;
        shortest_path_with(g, &costs, self.inst.source, self.inst.sink, Some(&removed), Algorithm::Dijkstra)
            .ok()
            .map(|(p, _)| p)
    }

    fn is_integral(&self, y: &[f64]) -> bool {
        y.iter()
            .all(|&v| (v - libm::round(v)).abs() <= self.opts.integrality_tol)
    }

    /// Best-bound search from `fixings`. With `accept = Some((cutoff,
    /// prefix))` it stops at the first path starting with `prefix` whose value
    /// is within `cutoff`; otherwise it optimises, seeded by `incumbent`.
    fn run(
        &mut self,
        fixings: Vec<i8>,
        incumbent: Option<(Path, f64)>,
        accept: Option<(f64, &[ArcId])>,
    ) -> Result<Run, SolverError> {
        let mut best = incumbent;
        let mut lower = f64::INFINITY;
        let mut heap = BinaryHeap::new();
        let mut seq = 0usize;
        let Some((bound, y)) = self.relaxation.solve(&fixings, &mut self.stats)? else {
            return Ok(Run { best: None, lower });
        };
        heap.push(OpenNode {
            bound,
            seq,
            fixings,
            y,
        });
        let prune_level = |best: &Option<(Path, f64)>| -> f64 {
            match (accept, best) {
                (Some((cutoff, _)), _) => cutoff,
                (None, Some((_, v))) => v - tie_slack(*v),
                (None, None) => f64::INFINITY,
            }
        };
        let acceptable = |p: &Path, v: f64| -> bool {
            match accept {
                Some((cutoff, prefix)) => v <= cutoff && p.arcs().starts_with(prefix),
                None => true,
            }
        };

        while let Some(node) = heap.pop() {
            let level = prune_level(&best);
            let pruned = if accept.is_some() { node.bound > level } else { node.bound >= level };
            if pruned {
                lower = lower.min(node.bound);
                continue;
            }
            if self.stats.nodes_explored >= self.opts.node_limit {
                return Err(SolverError::NodeLimit(self.opts.node_limit));
            }
            self.stats.nodes_explored += 1;

            let integral = self.is_integral(&node.y);
            let candidates = [
                if integral { self.decompose(&node.y) } else { None },
                self.round(&node.y, &node.fixings),
            ];
            for p in candidates.into_iter().flatten() {
                let v = self.evaluate(&p)?;
                if !acceptable(&p, v) {
                    continue;
                }
                if accept.is_some() {
                    return Ok(Run {
                        best: Some((p, v)),
                        lower,
                    });
                }
                let better = match &best {
                    Some((bp, bv)) => improves(v, &p, *bv, bp),
                    None => true,
                };
                if better {
                    best = Some((p, v));
                }
            }
            if integral {
                lower = lower.min(node.bound);
                continue;
            }

            // Most fractional, lowest index on ties.
            let branch = (0..node.y.len())
                .filter(|&a| node.fixings[a] < 0)
                .map(|a| (a, (node.y[a] - libm::round(node.y[a])).abs()))
                .fold(None::<(usize, f64)>, |acc, (a, f)| match acc {
                    Some((_, g)) if g >= f => acc,
                    _ => Some((a, f)),
                });
            let Some((arc, _)) = branch else {
                lower = lower.min(node.bound);
                continue;
            };
            for value in [1i8, 0] {
                let mut fixings = node.fixings.clone();
                fixings[arc] = value;
                if let Some((bound, y)) = self.relaxation.solve(&fixings, &mut self.stats)? {
                    seq += 1;
                    heap.push(OpenNode {
                        bound: bound.max(node.bound),
                        seq,
                        fixings,
                        y,
                    });
                }
            }
        }
        Ok(Run { best, lower })
    }

    /// Walks the incumbent's positions, swapping in the smallest-id arc that
    /// still admits an optimal completion.
    fn lexicographic_refine(&mut self, mut best: (Path, f64)) -> Result<(Path, f64), SolverError> {
        let g = &self.inst.graph;
        let cutoff = best.1 + tie_slack(best.1);
        // Any c in S bounds every path from below: value(P) >= c^T y_P.
        let screens: Vec<(Vec<f64>, Vec<f64>)> = self
            .scenarios
            .iter()
            .map(|c| distances_to(g, c, self.inst.sink).map(|d| (c.clone(), d)))
            .collect::<Result<_, _>>()?;
        self.relaxation.alive = surviving_arcs(self.inst, &self.scenarios, cutoff)?;
        let mut pos = 0;
        while pos < best.0.len() {
            let arcs = best.0.arcs().to_vec();
            let at = g.arc(arcs[pos]).tail;
            let prefix_nodes: Vec<NodeId> = best.0.nodes(g)[..=pos].to_vec();
            let candidates: Vec<ArcId> = g
                .out_arcs(at)
                .iter()
                .copied()
                .filter(|&a| a < arcs[pos] && !prefix_nodes.contains(&g.arc(a).head))
                .collect();
            for cand in candidates {
                let mut prefix = arcs[..pos].to_vec();
                prefix.push(cand);
                let head = g.arc(cand).head;
                let screened = screens.iter().any(|(c, dist)| {
                    prefix.iter().map(|&a| c[a]).sum::<f64>() + dist[head] > cutoff
                });
                if screened {
                    continue;
                }
                // Pin the prefix: its arcs on, every other arc into its nodes off.
                let mut fixings = vec![-1i8; g.arc_count()];
                let mut on_prefix = prefix_nodes.clone();
                on_prefix.push(g.arc(cand).head);
                for arc in g.arcs() {
                    if on_prefix.contains(&arc.head) || arc.tail == at {
                        fixings[arc.id] = 0;
                    }
                }
                for &a in &prefix {
                    fixings[a] = 1;
                }
                let run = self.run(fixings, None, Some((cutoff, &prefix)))?;
                if let Some((p, v)) = run.best {
                    best = (p, v);
                    break;
                }
            }
            pos += 1;
        }
        Ok(best)
    }
}

/// Global optimum of the MIP reformulation by best-bound branch-and-bound.
pub fn solve_mip(inst: &DrsppInstance) -> Result<DrsppSolution, SolverError> {
    solve_mip_with(inst, &MipOptions::default())
}

pub fn solve_mip_with(inst: &DrsppInstance, opts: &MipOptions) -> Result<DrsppSolution, SolverError> {
    let clock = Clock::start();
    let bounds = bounds_all(&inst.ambiguity)?;
    let mut sol = solve_mip_with_bounds(inst, &bounds, opts)?;
    sol.stats.wall_time_s = clock.seconds();
    Ok(sol)
}

/// As [`solve_mip_with`] but reusing precomputed cost bounds.
pub fn solve_mip_with_bounds(
    inst: &DrsppInstance,
    bounds: &CostBounds,
    opts: &MipOptions,
) -> Result<DrsppSolution, SolverError> {
    let clock = Clock::start();
    if !scenario_set_is_nonempty(inst, bounds)? {
        return Err(SolverError::AmbiguityInfeasible);
    }
    let mut search = Search {
        inst,
        bounds,
        relaxation: Relaxation::new(inst, bounds, vec![true; inst.graph.arc_count()]),
        opts: *opts,
        stats: SolverStats {
            lp_solves: 1,
            ..SolverStats::default()
        },
        evaluated: BTreeMap::new(),
        scenarios: Vec::new(),
    };
    let (warm, _) = shortest_path(&inst.graph, &bounds.c_max, inst.source, inst.sink)?;
    let warm_value = search.evaluate(&warm)?;
    let alive = surviving_arcs(inst, &search.scenarios, warm_value + tie_slack(warm_value))?;
    search.relaxation.alive = alive;
    let run = search.run(vec![-1; inst.graph.arc_count()], Some((warm, warm_value)), None)?;
    let mut best = run.best.expect("warm start provides an incumbent");
    let gap = ((best.1 - run.lower.min(best.1)) / best.1.abs().max(1.0)).max(0.0);
    if opts.lexicographic_ties {
        best = search.lexicographic_refine(best)?;
    }
    let (worst, objective) = worst_case_scenario(inst, bounds, &best.0)?;
    let mut stats = search.stats;
    stats.lp_solves += 1;
    stats.gap = gap;
    stats.wall_time_s = clock.seconds();
    Ok(DrsppSolution {
        path: best.0,
        objective,
        worst_case_costs: worst,
        stats,
    })
}

/// Exhaustive minimum over all simple paths (at most `cap`).
pub fn oracle_solve(inst: &DrsppInstance, cap: usize) -> Result<DrsppSolution, SolverError> {
    let clock = Clock::start();
    let bounds = bounds_all(&inst.ambiguity)?;
    if !scenario_set_is_nonempty(inst, &bounds)? {
        return Err(SolverError::AmbiguityInfeasible);
    }
    let paths = enumerate_paths(&inst.graph, inst.source, inst.sink, cap)?;
    let mut best: Option<(Path, f64, Vec<f64>)> = None;
    let mut lp_solves = 0;
    for p in paths {
        let (c, v) = worst_case_scenario(inst, &bounds, &p)?;
        lp_solves += 1;
        let better = match &best {
            Some((bp, bv, _)) => improves(v, &p, *bv, bp),
            None => true,
        };
        if better {
            best = Some((p, v, c));
        }
    }
    let (path, objective, worst_case_costs) = best.expect("instance has a path");
    Ok(DrsppSolution {
        path,
        objective,
        worst_case_costs,
        stats: SolverStats {
            lp_solves,
            wall_time_s: clock.seconds(),
            ..SolverStats::default()
        },
    })
}

//! Comparison methods: budgeted-uncertainty robust shortest path and the
//! marginal-moment model fed by interval-censored moment estimates.

use alloc::vec::Vec;

use crate::ambiguity::{elementary_partition, AmbiguityError, ArcAmbiguity, ElementaryPartition};
use crate::graph::{shortest_path, DirectedGraph, GraphError, NodeId, Path};
use crate::solver::improves;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BaselineError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Ambiguity(#[from] AmbiguityError),
    #[error("budget {gamma} outside 0..={arc_count}")]
    BudgetOutOfRange { gamma: usize, arc_count: usize },
    #[error("bounds invalid on arc {0}")]
    InvalidBounds(usize),
    #[error("arc {arc}: sample {sample} matches no elementary region")]
    UnresolvableSample { arc: usize, sample: usize },
    #[error("no samples for arc {0}")]
    NoSamples(usize),
    #[error("violation probability must lie in (0, 1)")]
    InvalidEta,
}

/// Robust value of `path`: nominal `l` plus the `gamma` largest deviations.
pub fn budgeted_path_value(path: &Path, l: &[f64], u: &[f64], gamma: usize) -> f64 {
    let mut order: Vec<usize> = path.arcs().to_vec();
    order.sort_by(|&a, &b| (u[b] - l[b]).total_cmp(&(u[a] - l[a])).then(a.cmp(&b)));
    let raised = &order[..gamma.min(order.len())];
    path.arcs()
        .iter()
        .map(|&a| if raised.contains(&a) { u[a] } else { l[a] })
        .sum()
}

/// Exact budgeted robust shortest path by the threshold method: one shortest
/// path per candidate deviation threshold.
pub fn budgeted_robust_sp(
    graph: &DirectedGraph,
    source: NodeId,
    sink: NodeId,
    l: &[f64],
    u: &[f64],
    gamma: usize,
) -> Result<(Path, f64), BaselineError> {
    let m = graph.arc_count();
    if gamma > m {
        return Err(BaselineError::BudgetOutOfRange { gamma, arc_count: m });
    }
    if l.len() != m || u.len() != m {
        return Err(GraphError::CostLength {
            expected: m,
            got: l.len().min(u.len()),
        }
        .into());
    }
    if let Some(a) = (0..m).find(|&a| !(l[a] <= u[a])) {
        return Err(BaselineError::InvalidBounds(a));
    }
    let mut thresholds: Vec<f64> = (0..m).map(|a| u[a] - l[a]).collect();
    thresholds.push(0.0);
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();

    let mut best: Option<(Path, f64)> = None;
    let mut costs = Vec::with_capacity(m);
    for theta in thresholds {
        costs.clear();
        costs.extend((0..m).map(|a| if u[a] - l[a] > theta { u[a] - theta } else { l[a] }));
        let (path, _) = shortest_path(graph, &costs, source, sink)?;
        let value = budgeted_path_value(&path, l, u, gamma);
        let better = match &best {
            Some((bp, bv)) => improves(value, &path, *bv, bp),
            None => true,
        };
        if better {
            best = Some((path, value));
        }
    }
    Ok(best.expect("at least the zero threshold"))
}

/// Moment upper bounds per arc for the marginal-moment model.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimates {
    pub mu_hat: Vec<f64>,
    pub sigma2_hat: Vec<f64>,
    pub eps_mu: Vec<f64>,
    pub eps_sigma2: Vec<f64>,
}

impl MomentEstimates {
    /// Clamps `mu_hat` to `u` and `sigma2_hat` to `u^2`.
    pub fn truncated(mut self, u: &[f64]) -> Self {
        for (a, &ua) in u.iter().enumerate() {
            self.mu_hat[a] = self.mu_hat[a].min(ua);
            self.sigma2_hat[a] = self.sigma2_hat[a].min(ua * ua);
        }
        self
    }
}

/// Worst-case expected cost per arc: `min(mu_hat, sigma_hat)`, kept in
/// `[l, u]`.
pub fn dr0_costs(l: &[f64], u: &[f64], est: &MomentEstimates) -> Vec<f64> {
    (0..l.len())
        .map(|a| {
            let mu = est.mu_hat[a].min(u[a]);
            let sigma = libm::sqrt(est.sigma2_hat[a].max(0.0)).min(u[a]);
            mu.min(sigma).max(l[a])
        })
        .collect()
}

pub fn dr0_solve(
    graph: &DirectedGraph,
    source: NodeId,
    sink: NodeId,
    l: &[f64],
    u: &[f64],
    est: &MomentEstimates,
) -> Result<(Path, f64, Vec<f64>), BaselineError> {
    let costs = dr0_costs(l, u, est);
    let (path, value) = shortest_path(graph, &costs, source, sink)?;
    Ok((path, value, costs))
}

/// Maximal value consistent with membership in elementary region `j`: the
/// smallest left endpoint at or above the region that still covers the
/// tightest containing right endpoint, else that right endpoint.
pub fn maximal_value(a: &ArcAmbiguity, part: &ElementaryPartition, region: usize) -> f64 {
    let baselines = a.baselines();
    let upper = part.bounds()[region].1;
    let u_star = part
        .baselines_of(region)
        .iter()
        .map(|&i| baselines[i].hi)
        .fold(f64::INFINITY, f64::min);
    baselines
        .iter()
        .filter(|b| b.lo >= upper && b.lo <= u_star && u_star <= b.hi)
        .map(|b| b.lo)
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |y| y.min(x))))
        .unwrap_or(u_star)
}

/// Solves `2 |A| sum_j exp(-2 n0 (eps / (W xi_j))^2) = eta0` for `eps`.
/// Terms with `xi_j = 0` vanish.
pub fn bonferroni_width(xi: &[f64], n0: usize, arc_count: usize, eta0: f64) -> f64 {
    let w = xi.len() as f64;
    let scale = 2.0 * arc_count as f64;
    let total = |eps: f64| -> f64 {
        scale
            * xi.iter()
                .filter(|&&x| x > 0.0)
                .map(|&x| {
                    let e = eps / (w * x);
                    libm::exp(-2.0 * n0 as f64 * e * e)
                })
                .sum::<f64>()
    };
    if total(0.0) <= eta0 {
        return 0.0;
    }
    let mut hi = w * xi.iter().copied().fold(0.0, f64::max);
    while total(hi) > eta0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if total(mid) > eta0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// First- and second-moment upper bounds from interval-censored samples.
///
/// `flags[a][k]` holds the baseline-membership flags of sample `k` on arc
/// `a` (support first). The result is truncated to each arc's support.
pub fn censored_moment_estimates(
    ambiguities: &[ArcAmbiguity],
    flags: &[Vec<Vec<bool>>],
    eta0: f64,
) -> Result<MomentEstimates, BaselineError> {
    if !(0.0 < eta0 && eta0 < 1.0) {
        return Err(BaselineError::InvalidEta);
    }
    let arc_count = ambiguities.len();
    let mut est = MomentEstimates {
        mu_hat: Vec::with_capacity(arc_count),
        sigma2_hat: Vec::with_capacity(arc_count),
        eps_mu: Vec::with_capacity(arc_count),
        eps_sigma2: Vec::with_capacity(arc_count),
    };
    let mut u = Vec::with_capacity(arc_count);
    for (arc, a) in ambiguities.iter().enumerate() {
        let samples = &flags[arc];
        if samples.is_empty() {
            return Err(BaselineError::NoSamples(arc));
        }
        let part = elementary_partition(a);
        let xi: Vec<f64> = (0..part.len()).map(|j| maximal_value(a, &part, j)).collect();
        let xi2: Vec<f64> = xi.iter().map(|x| x * x).collect();
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for (sample, f) in samples.iter().enumerate() {
            let j = part
                .resolve(f)
                .ok_or(BaselineError::UnresolvableSample { arc, sample })?;
            sum += xi[j];
            sum2 += xi2[j];
        }
        let n0 = samples.len();
        let eps = bonferroni_width(&xi, n0, arc_count, eta0);
        let eps2 = bonferroni_width(&xi2, n0, arc_count, eta0);
        est.mu_hat.push(sum / n0 as f64 + eps);
        est.sigma2_hat.push(sum2 / n0 as f64 + eps2);
        est.eps_mu.push(eps);
        est.eps_sigma2.push(eps2);
        u.push(a.support().1);
    }
    Ok(est.truncated(&u))
}

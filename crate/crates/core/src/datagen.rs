//! Layered test graphs, beta nominal models, seeded sampling, ambiguity-set
//! synthesis from samples, and out-of-sample scoring.
//!
//! Randomness comes from ChaCha8 generators keyed by `(seed, purpose)` with
//! one stream per arc, so any arc's draws are independent of evaluation order.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

use crate::ambiguity::{
    bonferroni_eta, expectation_from_samples, quantile_from_samples, AmbiguityError, AmbiguitySet,
    ArcAmbiguity, ExpectationConstraint, QuantileConstraint,
};
use crate::graph::{near_optimal_paths, shortest_path, DirectedGraph, GraphError, NodeId, Path};
use crate::moment::worst_case_costs;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatagenError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Ambiguity(#[from] AmbiguityError),
}

/// Normalised variance used for every generated arc.
pub const SIGMA_TILDE: f64 = 1.0 / 64.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Intermediate layers.
    pub v: usize,
    /// Nodes per intermediate layer.
    pub r: usize,
    /// Samples per arc.
    pub n0: usize,
    /// Quantile subintervals per arc.
    pub n1: usize,
    /// Relative subinterval width.
    pub kappa: f64,
    /// Violation probability of the whole ambiguity set.
    pub eta0: f64,
    /// Budgets for the robust baseline.
    pub gamma_list: Vec<usize>,
    pub seed: u64,
    /// Whether to add expectation rows over near-optimal paths.
    pub expectation_rows: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::new(20, 10, 0)
    }
}

/// `round(k (v + 1) / 3)` for `k = 0..=3`: none, a third, two thirds and all
/// of an s-t path's arcs.
pub fn default_gammas(v: usize) -> Vec<usize> {
    (0..=3).map(|k| (2 * k * (v + 1) + 3) / 6).collect()
}

impl ExperimentConfig {
    pub fn new(v: usize, r: usize, seed: u64) -> Self {
        Self {
            v,
            r,
            n0: 100,
            n1: 4,
            kappa: 0.6,
            eta0: 0.05,
            gamma_list: default_gammas(v),
            seed,
            expectation_rows: true,
        }
    }

    pub fn validate(&self) -> Result<(), DatagenError> {
        if self.v == 0 || self.r == 0 {
            return Err(DatagenError::InvalidConfig("v and r must be at least 1"));
        }
        if self.n0 == 0 {
            return Err(DatagenError::InvalidConfig("n0 must be at least 1"));
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(DatagenError::InvalidConfig("kappa must lie in (0, 1)"));
        }
        if !(self.eta0 > 0.0 && self.eta0 < 1.0) {
            return Err(DatagenError::InvalidConfig("eta0 must lie in (0, 1)"));
        }
        let arcs = 2 * self.r + (self.v - 1) * self.r * self.r;
        if self.gamma_list.iter().any(|&g| g > arcs) {
            return Err(DatagenError::InvalidConfig("gamma exceeds the arc count"));
        }
        Ok(())
    }
}

/// Random-stream purposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Nominal = 1,
    Samples = 2,
    Subintervals = 3,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The generator for `(seed, purpose)` positioned on stream `arc`.
pub fn arc_rng(seed: u64, purpose: Purpose, arc: usize) -> ChaCha8Rng {
    let mut state = seed ^ (purpose as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93);
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(arc as u64);
    rng
}

/// Layered graph: node 0 is the source, then `v` layers of `r` nodes, then
/// the sink. Consecutive layers are completely connected; arcs are numbered
/// layer by layer, by tail then head.
pub fn gen_layered(v: usize, r: usize) -> Result<(DirectedGraph, NodeId, NodeId), DatagenError> {
    if v == 0 || r == 0 {
        return Err(DatagenError::InvalidConfig("v and r must be at least 1"));
    }
    let sink = 1 + v * r;
    let layer = |k: usize| (1 + k * r)..(1 + (k + 1) * r);
    let mut arcs = Vec::with_capacity(2 * r + (v - 1) * r * r);
    arcs.extend(layer(0).map(|h| (0, h)));
    for k in 0..v - 1 {
        for t in layer(k) {
            arcs.extend(layer(k + 1).map(|h| (t, h)));
        }
    }
    arcs.extend(layer(v - 1).map(|t| (t, sink)));
    Ok((DirectedGraph::new(sink + 1, &arcs)?, 0, sink))
}

/// Ground-truth cost distribution of one arc.
#[derive(Debug, Clone, PartialEq)]
pub enum Marginal {
    /// Beta on `[l, u]`.
    Beta { alpha: f64, beta: f64 },
    /// Mixture of uniforms `(weight, lo, hi)`.
    UniformMixture(Vec<(f64, f64, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NominalArc {
    pub l: f64,
    pub u: f64,
    pub marginal: Marginal,
}

impl NominalArc {
    /// Beta arc with normalised mean `m_tilde` and normalised variance
    /// `sigma_tilde`.
    pub fn beta(l: f64, u: f64, m_tilde: f64, sigma_tilde: f64) -> Self {
        let (alpha, beta) = beta_parameters(m_tilde, sigma_tilde);
        Self {
            l,
            u,
            marginal: Marginal::Beta { alpha, beta },
        }
    }

    pub fn uniform(l: f64, u: f64) -> Self {
        Self {
            l,
            u,
            marginal: Marginal::UniformMixture(vec![(1.0, l, u)]),
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.marginal {
            Marginal::Beta { alpha, beta } => self.l + (self.u - self.l) * alpha / (alpha + beta),
            Marginal::UniformMixture(parts) => parts.iter().map(|&(w, lo, hi)| w * 0.5 * (lo + hi)).sum(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.marginal {
            Marginal::Beta { alpha, beta } => {
                let x: f64 = Beta::new(*alpha, *beta).expect("positive shapes").sample(rng);
                (self.l + (self.u - self.l) * x).clamp(self.l, self.u)
            }
            Marginal::UniformMixture(parts) => {
                let mut pick: f64 = rng.random();
                let mut chosen = parts[parts.len() - 1];
                for &part in parts {
                    if pick < part.0 {
                        chosen = part;
                        break;
                    }
                    pick -= part.0;
                }
                let x: f64 = rng.random();
                chosen.1 + (chosen.2 - chosen.1) * x
            }
        }
    }
}

/// Beta shapes with normalised mean `m` and normalised variance `s`.
pub fn beta_parameters(m: f64, s: f64) -> (f64, f64) {
    let alpha = m * m * (1.0 - m) / s - m;
    (alpha, alpha * (1.0 / m - 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NominalModel {
    pub arcs: Vec<NominalArc>,
}

impl NominalModel {
    pub fn means(&self) -> Vec<f64> {
        self.arcs.iter().map(NominalArc::mean).collect()
    }

    pub fn lower(&self) -> Vec<f64> {
        self.arcs.iter().map(|a| a.l).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.arcs.iter().map(|a| a.u).collect()
    }
}

/// Open range of normalised means for which both beta shapes are positive.
pub fn m_tilde_range(sigma_tilde: f64) -> (f64, f64) {
    let root = libm::sqrt(1.0 - 4.0 * sigma_tilde);
    (0.5 * (1.0 - root), 0.5 * (1.0 + root))
}

pub fn gen_nominal(graph: &DirectedGraph, seed: u64) -> NominalModel {
    let (lo, hi) = m_tilde_range(SIGMA_TILDE);
    let arcs = (0..graph.arc_count())
        .map(|a| {
            let mut rng = arc_rng(seed, Purpose::Nominal, a);
            let l = 100.0 * rng.random::<f64>();
            let u = l + 100.0 * rng.random::<f64>();
            let mut m = lo + (hi - lo) * rng.random::<f64>();
            while !(lo < m && m < hi) {
                m = lo + (hi - lo) * rng.random::<f64>();
            }
            NominalArc::beta(l, u, m, SIGMA_TILDE)
        })
        .collect();
    NominalModel { arcs }
}

/// `n` cost vectors; row `k` holds sample `k` of every arc.
pub fn sample_costs(model: &NominalModel, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let columns: Vec<Vec<f64>> = model
        .arcs
        .iter()
        .enumerate()
        .map(|(a, arc)| {
            let mut rng = arc_rng(seed, Purpose::Samples, a);
            (0..n).map(|_| arc.sample(&mut rng)).collect()
        })
        .collect();
    (0..n).map(|k| columns.iter().map(|c| c[k]).collect()).collect()
}

/// An ambiguity set built from samples, with its construction details.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedAmbiguity {
    pub set: AmbiguitySet,
    /// Near-optimal paths carrying the expectation rows.
    pub paths: Vec<Path>,
    /// Per-constraint violation probability.
    pub eta: f64,
}

/// Quantile constraints on random width-`kappa` subintervals, then two
/// expectation rows per near-optimal path under the quantile-only `c_max`.
///
/// The per-constraint probability counts one event per quantile constraint
/// and one per path; since the path count depends on the quantiles, the
/// count is raised until it covers the paths found.
pub fn build_ambiguity(
    graph: &DirectedGraph,
    source: NodeId,
    sink: NodeId,
    model: &NominalModel,
    samples: &[Vec<f64>],
    cfg: &ExperimentConfig,
) -> Result<GeneratedAmbiguity, DatagenError> {
    let m = graph.arc_count();
    let n = samples.len();
    if n == 0 {
        return Err(DatagenError::InvalidConfig("no samples"));
    }
    let subintervals: Vec<Vec<(f64, f64, usize)>> = (0..m)
        .map(|a| {
            let NominalArc { l, u, .. } = model.arcs[a];
            let width = cfg.kappa * (u - l);
            let mut rng = arc_rng(cfg.seed, Purpose::Subintervals, a);
            (0..cfg.n1)
                .map(|_| {
                    let lo = l + (u - l - width) * rng.random::<f64>();
                    let hi = (lo + width).min(u);
                    let hits = samples.iter().filter(|s| lo <= s[a] && s[a] <= hi).count();
                    (lo, hi, hits)
                })
                .collect()
        })
        .collect();

    let quantile_set = |eta: f64| -> Result<AmbiguitySet, DatagenError> {
        let per_arc = (0..m)
            .map(|a| {
                let qs = subintervals[a]
                    .iter()
                    .map(|&(lo, hi, hits)| quantile_from_samples(hits, n, (lo, hi), eta))
                    .collect::<Result<Vec<QuantileConstraint>, _>>()?;
                ArcAmbiguity::new(model.arcs[a].l, model.arcs[a].u, qs).map_err(|e| e.on_arc(a))
            })
            .collect::<Result<Vec<_>, AmbiguityError>>()?;
        Ok(AmbiguitySet::new(per_arc, Vec::new())?)
    };

    let mut events = 0;
    loop {
        let eta = bonferroni_eta(cfg.eta0, cfg.n1, m, events);
        let set = quantile_set(eta)?;
        if !cfg.expectation_rows {
            return Ok(GeneratedAmbiguity {
                set,
                paths: Vec::new(),
                eta,
            });
        }
        let c_max = worst_case_costs(&set)?;
        let paths = near_optimal_paths(graph, &c_max, source, sink)?;
        if paths.len() > events {
            events = paths.len();
            continue;
        }
        let mut rows: Vec<ExpectationConstraint> = Vec::with_capacity(2 * paths.len());
        for p in &paths {
            let lo: f64 = p.arcs().iter().map(|&a| model.arcs[a].l).sum();
            let hi: f64 = p.arcs().iter().map(|&a| model.arcs[a].u).sum();
            let totals: Vec<f64> = samples
                .iter()
                .map(|s| p.arcs().iter().map(|&a| s[a]).sum::<f64>().clamp(lo, hi))
                .collect();
            rows.extend(expectation_from_samples(&totals, p.arcs(), lo, hi, eta)?);
        }
        return Ok(GeneratedAmbiguity {
            set: set.with_rows(rows)?,
            paths,
            eta,
        });
    }
}

/// Everything derived from one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstance {
    pub graph: DirectedGraph,
    pub source: NodeId,
    pub sink: NodeId,
    pub model: NominalModel,
    pub samples: Vec<Vec<f64>>,
    pub ambiguity: GeneratedAmbiguity,
}

pub fn generate(cfg: &ExperimentConfig) -> Result<GeneratedInstance, DatagenError> {
    cfg.validate()?;
    let (graph, source, sink) = gen_layered(cfg.v, cfg.r)?;
    let model = gen_nominal(&graph, cfg.seed);
    let samples = sample_costs(&model, cfg.n0, cfg.seed);
    let ambiguity = build_ambiguity(&graph, source, sink, &model, &samples, cfg)?;
    Ok(GeneratedInstance {
        graph,
        source,
        sink,
        model,
        samples,
        ambiguity,
    })
}

/// Nominal expected cost of `path` over the best achievable, at least 1.
pub fn relative_expected_loss(
    path: &Path,
    model: &NominalModel,
    graph: &DirectedGraph,
    source: NodeId,
    sink: NodeId,
) -> Result<f64, DatagenError> {
    let means = model.means();
    let (_, best) = shortest_path(graph, &means, source, sink)?;
    let cost = path.cost(&means);
    Ok(if best > 0.0 { (cost / best).max(1.0) } else { 1.0 })
}

/// The four-node example network: nodes 1..4 are ids 0..3, arcs are
/// (1,2), (2,4), (1,3), (2,3), (3,4) in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct Example1 {
    pub graph: DirectedGraph,
    pub source: NodeId,
    pub sink: NodeId,
    pub ambiguity: AmbiguitySet,
    pub model: NominalModel,
}

pub fn example1() -> Example1 {
    let graph = DirectedGraph::new(4, &[(0, 1), (1, 3), (0, 2), (1, 2), (2, 3)]).expect("valid graph");
    let first = ArcAmbiguity::new(0.0, 100.0, [QuantileConstraint::new(70.0, 100.0, 0.0, 0.1)]).expect("valid arc");
    let second = ArcAmbiguity::support_only(1.0, 101.0).expect("valid arc");
    let plain = ArcAmbiguity::support_only(0.0, 100.0).expect("valid arc");
    let ambiguity = AmbiguitySet::new(vec![first, second, plain.clone(), plain.clone(), plain], Vec::new())
        .expect("valid set");
    let mixture = NominalArc {
        l: 0.0,
        u: 100.0,
        marginal: Marginal::UniformMixture(vec![(0.95, 0.0, 70.0), (0.05, 70.0, 100.0)]),
    };
    let model = NominalModel {
        arcs: vec![
            mixture,
            NominalArc::uniform(1.0, 101.0),
            NominalArc::uniform(0.0, 100.0),
            NominalArc::uniform(0.0, 100.0),
            NominalArc::uniform(0.0, 100.0),
        ],
    };
    Example1 {
        graph,
        source: 0,
        sink: 3,
        ambiguity,
        model,
    }
}

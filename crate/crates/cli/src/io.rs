//! JSON file formats: instances, nominal models, experiment configurations
//! and solutions.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path as FsPath;

use dro_path_core::ambiguity::{AmbiguitySet, ArcAmbiguity, ExpectationConstraint, QuantileConstraint};
use dro_path_core::datagen::{default_gammas, ExperimentConfig, Marginal, NominalArc, NominalModel};
use dro_path_core::graph::{Arc, DirectedGraph};
use dro_path_core::solver::{DrsppInstance, DrsppSolution, SolverStats};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcJson {
    pub id: usize,
    pub tail: usize,
    pub head: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileJson {
    pub lo: f64,
    pub hi: f64,
    pub qlo: f64,
    pub qhi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcAmbiguityJson {
    pub support: [f64; 2],
    #[serde(default)]
    pub quantiles: Vec<QuantileJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationRowJson {
    /// Arc id to coefficient.
    pub coeffs: BTreeMap<usize, f64>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityJson {
    pub arcs: Vec<ArcAmbiguityJson>,
    #[serde(default)]
    pub expectation_rows: Vec<ExpectationRowJson>,
}

/// Graph plus ambiguity set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceJson {
    pub nodes: usize,
    pub source: usize,
    pub sink: usize,
    pub arcs: Vec<ArcJson>,
    pub ambiguity: AmbiguityJson,
}

impl InstanceJson {
    pub fn from_parts(graph: &DirectedGraph, source: usize, sink: usize, set: &AmbiguitySet) -> Self {
        let arcs = graph
            .arcs()
            .iter()
            .map(|a| ArcJson {
                id: a.id,
                tail: a.tail,
                head: a.head,
            })
            .collect();
        let per_arc = set
            .per_arc()
            .iter()
            .map(|a| ArcAmbiguityJson {
                support: [a.support().0, a.support().1],
                quantiles: a
                    .quantiles()
                    .iter()
                    .map(|q| QuantileJson {
                        lo: q.lo,
                        hi: q.hi,
                        qlo: q.q_lo,
                        qhi: q.q_hi,
                    })
                    .collect(),
            })
            .collect();
        let expectation_rows = set
            .expectation_rows()
            .iter()
            .map(|r| ExpectationRowJson {
                coeffs: r.coeffs().iter().copied().collect(),
                rhs: r.rhs(),
            })
            .collect();
        Self {
            nodes: graph.node_count(),
            source,
            sink,
            arcs,
            ambiguity: AmbiguityJson {
                arcs: per_arc,
                expectation_rows,
            },
        }
    }

    pub fn graph(&self) -> Result<DirectedGraph, CliError> {
        let arcs = self
            .arcs
            .iter()
            .map(|a| Arc {
                id: a.id,
                tail: a.tail,
                head: a.head,
            })
            .collect();
        Ok(DirectedGraph::from_arcs(self.nodes, arcs)?)
    }

    pub fn ambiguity(&self) -> Result<AmbiguitySet, CliError> {
        let per_arc = self
            .ambiguity
            .arcs
            .iter()
            .enumerate()
            .map(|(arc, a)| {
                let qs = a.quantiles.iter().map(|q| QuantileConstraint::new(q.lo, q.hi, q.qlo, q.qhi));
                ArcAmbiguity::new(a.support[0], a.support[1], qs).map_err(|e| e.on_arc(arc))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let rows = self
            .ambiguity
            .expectation_rows
            .iter()
            .map(|r| ExpectationConstraint::new(r.coeffs.iter().map(|(&a, &v)| (a, v)), r.rhs))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(AmbiguitySet::new(per_arc, rows)?)
    }

    pub fn instance(&self) -> Result<DrsppInstance, CliError> {
        Ok(DrsppInstance::new(self.graph()?, self.source, self.sink, self.ambiguity()?)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MarginalJson {
    Beta { alpha: f64, beta: f64 },
    /// `(weight, lo, hi)` triples.
    UniformMixture { parts: Vec<(f64, f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NominalArcJson {
    pub l: f64,
    pub u: f64,
    pub mean: f64,
    pub marginal: MarginalJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NominalJson {
    pub arcs: Vec<NominalArcJson>,
}

impl From<&NominalModel> for NominalJson {
    fn from(model: &NominalModel) -> Self {
        let arcs = model
            .arcs
            .iter()
            .map(|a| NominalArcJson {
                l: a.l,
                u: a.u,
                mean: a.mean(),
                marginal: match &a.marginal {
                    Marginal::Beta { alpha, beta } => MarginalJson::Beta {
                        alpha: *alpha,
                        beta: *beta,
                    },
                    Marginal::UniformMixture(parts) => MarginalJson::UniformMixture { parts: parts.clone() },
                },
            })
            .collect();
        Self { arcs }
    }
}

impl From<&NominalJson> for NominalModel {
    fn from(json: &NominalJson) -> Self {
        let arcs = json
            .arcs
            .iter()
            .map(|a| NominalArc {
                l: a.l,
                u: a.u,
                marginal: match &a.marginal {
                    MarginalJson::Beta { alpha, beta } => Marginal::Beta {
                        alpha: *alpha,
                        beta: *beta,
                    },
                    MarginalJson::UniformMixture { parts } => Marginal::UniformMixture(parts.clone()),
                },
            })
            .collect();
        NominalModel { arcs }
    }
}

/// Experiment configuration file; missing fields take the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigJson {
    pub v: usize,
    pub r: usize,
    pub n0: usize,
    pub n1: usize,
    pub kappa: f64,
    pub eta0: f64,
    /// Defaults to none, a third, two thirds and all of a path's arcs.
    pub gamma_list: Option<Vec<usize>>,
    pub seed: u64,
    pub expectation_rows: bool,
}

impl Default for ConfigJson {
    fn default() -> Self {
        Self {
            gamma_list: None,
            ..(&ExperimentConfig::default()).into()
        }
    }
}

impl From<&ExperimentConfig> for ConfigJson {
    fn from(cfg: &ExperimentConfig) -> Self {
        Self {
            v: cfg.v,
            r: cfg.r,
            n0: cfg.n0,
            n1: cfg.n1,
            kappa: cfg.kappa,
            eta0: cfg.eta0,
            gamma_list: Some(cfg.gamma_list.clone()),
            seed: cfg.seed,
            expectation_rows: cfg.expectation_rows,
        }
    }
}

impl From<&ConfigJson> for ExperimentConfig {
    fn from(json: &ConfigJson) -> Self {
        Self {
            v: json.v,
            r: json.r,
            n0: json.n0,
            n1: json.n1,
            kappa: json.kappa,
            eta0: json.eta0,
            gamma_list: json.gamma_list.clone().unwrap_or_else(|| default_gammas(json.v)),
            seed: json.seed,
            expectation_rows: json.expectation_rows,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsJson {
    pub nodes_explored: usize,
    pub lp_solves: usize,
    pub wall_time_s: f64,
    pub gap: f64,
}

impl From<&SolverStats> for StatsJson {
    fn from(s: &SolverStats) -> Self {
        Self {
            nodes_explored: s.nodes_explored,
            lp_solves: s.lp_solves,
            wall_time_s: s.wall_time_s,
            gap: s.gap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionJson {
    pub method: String,
    /// Arc ids from source to sink.
    pub path: Vec<usize>,
    pub nodes: Vec<usize>,
    pub objective: f64,
    pub worst_case_costs: Vec<f64>,
    pub stats: StatsJson,
}

impl SolutionJson {
    pub fn new(method: &str, graph: &DirectedGraph, sol: &DrsppSolution) -> Self {
        Self {
            method: method.to_owned(),
            path: sol.path.arcs().to_vec(),
            nodes: sol.path.nodes(graph),
            objective: sol.objective,
            worst_case_costs: sol.worst_case_costs.clone(),
            stats: (&sol.stats).into(),
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &FsPath) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serialises");
    s.push('\n');
    s
}

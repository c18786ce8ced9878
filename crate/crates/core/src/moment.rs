//! Worst- and best-case expected cost of a single arc over its quantile
//! ambiguity set, solved as an LP over the elementary partition.

use alloc::vec;
use alloc::vec::Vec;

use crate::ambiguity::{elementary_partition, AmbiguityError, AmbiguitySet, ArcAmbiguity, ElementaryPartition};
use crate::lp::{solve_lp, LinearProgram, LpStatus, Relation, Sense};

/// Masses at or below this are dropped from reported atoms.
const MASS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteDistribution {
    /// Merges equal values and drops negligible masses; atoms sorted by value.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut raw: Vec<(f64, f64)> = atoms.into_iter().filter(|&(_, m)| m > MASS_FLOOR).collect();
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (v, m) in raw {
            match atoms.last_mut() {
                Some((w, n)) if *w == v => *n += m,
                _ => atoms.push((v, m)),
            }
        }
        Self { atoms }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|&(v, m)| v * m).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|&(_, m)| m).sum()
    }
}

/// An optimal moment-problem answer.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentBound {
    pub value: f64,
    pub distribution: DiscreteDistribution,
    /// Mass per elementary region, in partition order.
    pub region_masses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostBounds {
    pub c_min: Vec<f64>,
    pub c_max: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Extreme {
    Worst,
    Best,
}

fn primal(a: &ArcAmbiguity, part: &ElementaryPartition, extreme: Extreme) -> LinearProgram {
    let (sense, objective): (Sense, Vec<f64>) = match extreme {
        Extreme::Worst => (Sense::Maximize, part.bounds().iter().map(|b| b.1).collect()),
        Extreme::Best => (Sense::Minimize, part.bounds().iter().map(|b| b.0).collect()),
    };
    let w = part.len();
    let mut lp = LinearProgram::new(sense, objective);
    lp.add_row(vec![1.0; w], Relation::Eq, 1.0);
    for (i, b) in a.baselines().iter().enumerate().skip(1) {
        let mut row = vec![0.0; w];
        for &j in part.regions_in(i) {
            row[j] = 1.0;
        }
        if b.q_lo == b.q_hi {
            lp.add_row(row, Relation::Eq, b.q_lo);
        } else {
            if b.q_lo > 0.0 {
                lp.add_row(row.clone(), Relation::Ge, b.q_lo);
            }
            if b.q_hi < 1.0 {
                lp.add_row(row, Relation::Le, b.q_hi);
            }
        }
    }
    lp
}

fn solve_extreme(a: &ArcAmbiguity, extreme: Extreme) -> Result<MomentBound, AmbiguityError> {
    a.validate()?;
    let part = elementary_partition(a);
    let sol = solve_lp(&primal(a, &part, extreme))?;
    if sol.status != LpStatus::Optimal {
        return Err(AmbiguityError::A1Infeasible);
    }
    let atoms = part.bounds().iter().zip(&sol.x).map(|(&(lo, hi), &m)| {
        let at = if extreme == Extreme::Worst { hi } else { lo };
        (at, m)
    });
    Ok(MomentBound {
        value: sol.objective_value,
        distribution: DiscreteDistribution::new(atoms),
        region_masses: sol.x,
    })
}

/// Maximum of `E{c_a}` over the arc's ambiguity set.
pub fn worst_case_cost(a: &ArcAmbiguity) -> Result<MomentBound, AmbiguityError> {
    solve_extreme(a, Extreme::Worst)
}

/// Minimum of `E{c_a}` over the arc's ambiguity set.
pub fn best_case_cost(a: &ArcAmbiguity) -> Result<MomentBound, AmbiguityError> {
    solve_extreme(a, Extreme::Best)
}

/// Optimal value of the dual in `(k, h)` space, with `k_i, h_i >= 0` priced
/// at the upper and lower probability bounds of every baseline:
///
/// worst: `min sum q_hi k - q_lo h` s.t. `sum_{i in D(j)} (k_i - h_i) >= U_j`;
/// best:  `max sum q_lo h - q_hi k` s.t. `sum_{i in D(j)} (h_i - k_i) <= L_j`.
fn dual_value(a: &ArcAmbiguity, extreme: Extreme) -> Result<f64, AmbiguityError> {
    a.validate()?;
    let part = elementary_partition(a);
    let d = a.len();
    let baselines = a.baselines();
    let (sense, sign) = match extreme {
        Extreme::Worst => (Sense::Minimize, 1.0),
        Extreme::Best => (Sense::Maximize, -1.0),
    };
    let mut objective = vec![0.0; 2 * d];
    for (i, b) in baselines.iter().enumerate() {
        objective[i] = sign * b.q_hi;
        objective[d + i] = -sign * b.q_lo;
    }
    let mut lp = LinearProgram::new(sense, objective);
    for (j, &(lo, hi)) in part.bounds().iter().enumerate() {
        let mut row = vec![0.0; 2 * d];
        for &i in part.baselines_of(j) {
            row[i] = sign;
            row[d + i] = -sign;
        }
        match extreme {
            Extreme::Worst => lp.add_row(row, Relation::Ge, hi),
            Extreme::Best => lp.add_row(row, Relation::Le, lo),
        };
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(AmbiguityError::A1Infeasible);
    }
    Ok(sol.objective_value)
}

pub fn worst_case_dual_value(a: &ArcAmbiguity) -> Result<f64, AmbiguityError> {
    dual_value(a, Extreme::Worst)
}

pub fn best_case_dual_value(a: &ArcAmbiguity) -> Result<f64, AmbiguityError> {
    dual_value(a, Extreme::Best)
}

/// `c_max` per arc; errors are tagged with the arc id.
pub fn worst_case_costs(amb: &AmbiguitySet) -> Result<Vec<f64>, AmbiguityError> {
    amb.per_arc()
        .iter()
        .enumerate()
        .map(|(arc, a)| worst_case_cost(a).map(|b| b.value).map_err(|e| e.on_arc(arc)))
        .collect()
}

pub fn bounds_all(amb: &AmbiguitySet) -> Result<CostBounds, AmbiguityError> {
    let mut c_min = Vec::with_capacity(amb.arc_count());
    let mut c_max = Vec::with_capacity(amb.arc_count());
    for (arc, a) in amb.per_arc().iter().enumerate() {
        let lo = best_case_cost(a).map_err(|e| e.on_arc(arc))?.value;
        let hi = worst_case_cost(a).map_err(|e| e.on_arc(arc))?.value;
        c_min.push(lo);
        c_max.push(hi);
    }
    Ok(CostBounds { c_min, c_max })
}

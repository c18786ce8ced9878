//! Per-arc support and quantile constraints, linear expectation rows, the
//! elementary partition of an arc's support, and the data-driven constructors.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::graph::ArcId;
use crate::lp::{solve_lp, LinearProgram, LpError, LpStatus, Relation, Sense};

/// Smallest slack accepted as strict feasibility in the interiority check.
const STRICT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AmbiguityError {
    #[error("invalid support [{l}, {u}]")]
    InvalidSupport { l: f64, u: f64 },
    #[error("quantile constraint {index} is malformed")]
    MalformedQuantile { index: usize },
    #[error("quantile constraint {index} leaves the support")]
    OutsideSupport { index: usize },
    #[error("baseline {lower} starts at {endpoint}, where baseline {upper} ends")]
    A2Violation {
        endpoint: f64,
        lower: usize,
        upper: usize,
    },
    #[error("no distribution satisfies the quantile constraints strictly")]
    A1Infeasible,
    #[error("expectation row has no nonzero coefficient")]
    EmptyExpectationRow,
    #[error("expectation row references arc {0} outside the instance")]
    UnknownArc(ArcId),
    #[error("ambiguity covers {got} arcs, graph has {expected}")]
    Coverage { expected: usize, got: usize },
    #[error("sample {value} lies outside [{lo}, {hi}]")]
    SampleOutOfSupport { value: f64, lo: f64, hi: f64 },
    #[error("invalid sample size or violation probability")]
    InvalidSampling,
    #[error("arc {arc}: {source}")]
    OnArc {
        arc: ArcId,
        source: Box<AmbiguityError>,
    },
    #[error(transparent)]
    Lp(#[from] LpError),
}

impl AmbiguityError {
    pub fn on_arc(self, arc: ArcId) -> Self {
        match self {
            e @ AmbiguityError::OnArc { .. } => e,
            e => AmbiguityError::OnArc {
                arc,
                source: Box::new(e),
            },
        }
    }

    /// The underlying error with any arc tag removed.
    pub fn root(&self) -> &AmbiguityError {
        match self {
            AmbiguityError::OnArc { source, .. } => source.root(),
            e => e,
        }
    }
}

/// `q_lo <= Q(c in [lo, hi]) <= q_hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileConstraint {
    pub lo: f64,
    pub hi: f64,
    pub q_lo: f64,
    pub q_hi: f64,
}

impl QuantileConstraint {
    pub fn new(lo: f64, hi: f64, q_lo: f64, q_hi: f64) -> Self {
        Self { lo, hi, q_lo, q_hi }
    }

    pub fn is_well_formed(&self) -> bool {
        [self.lo, self.hi, self.q_lo, self.q_hi]
            .iter()
            .all(|x| x.is_finite())
            && self.lo <= self.hi
            && 0.0 <= self.q_lo
            && self.q_lo <= self.q_hi
            && self.q_hi <= 1.0
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lo <= value && value <= self.hi
    }
}

/// Support `[l, u]` plus quantile constraints. The support is stored as
/// baseline 0 with probability bounds `[1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcAmbiguity {
    baselines: Vec<QuantileConstraint>,
}

impl ArcAmbiguity {
    pub fn new(
        l: f64,
        u: f64,
        quantiles: impl IntoIterator<Item = QuantileConstraint>,
    ) -> Result<Self, AmbiguityError> {
        if !(l.is_finite() && u.is_finite() && 0.0 <= l && l <= u) {
            return Err(AmbiguityError::InvalidSupport { l, u });
        }
        let mut baselines = vec![QuantileConstraint::new(l, u, 1.0, 1.0)];
        for (k, q) in quantiles.into_iter().enumerate() {
            let index = k + 1;
            if !q.is_well_formed() {
                return Err(AmbiguityError::MalformedQuantile { index });
            }
            if q.lo < l || q.hi > u {
                return Err(AmbiguityError::OutsideSupport { index });
            }
            baselines.push(q);
        }
        Ok(Self { baselines })
    }

    pub fn support_only(l: f64, u: f64) -> Result<Self, AmbiguityError> {
        Self::new(l, u, [])
    }

    pub fn support(&self) -> (f64, f64) {
        (self.baselines[0].lo, self.baselines[0].hi)
    }

    /// All baselines, support first.
    pub fn baselines(&self) -> &[QuantileConstraint] {
        &self.baselines
    }

    /// Quantile constraints other than the support.
    pub fn quantiles(&self) -> &[QuantileConstraint] {
        &self.baselines[1..]
    }

    /// Baseline count `D_a`, support included.
    pub fn len(&self) -> usize {
        self.baselines.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Membership flags of `value` in each baseline, support first.
    pub fn censor(&self, value: f64) -> Vec<bool> {
        self.baselines.iter().map(|b| b.contains(value)).collect()
    }

    /// Endpoint clash check over distinct baseline pairs.
    pub fn check_a2(&self) -> Result<(), AmbiguityError> {
        for (lower, a) in self.baselines.iter().enumerate() {
            for (upper, b) in self.baselines.iter().enumerate() {
                if lower != upper && a.lo == b.hi {
                    return Err(AmbiguityError::A2Violation {
                        endpoint: a.lo,
                        lower,
                        upper,
                    });
                }
            }
        }
        Ok(())
    }

    /// Strict feasibility of the quantile rows over the elementary partition,
    /// via a slack-maximisation LP.
    pub fn check_a1(&self) -> Result<(), AmbiguityError> {
        let part = elementary_partition(self);
        let w = part.len();
        let t = w;
        let mut lp = LinearProgram::new(Sense::Maximize, {
            let mut c = vec![0.0; w + 1];
            c[t] = 1.0;
            c
        });
        lp.set_bounds(t, 0.0, 1.0);
        let mut any_strict = false;
        for (i, b) in self.baselines.iter().enumerate() {
            let mut row = vec![0.0; w + 1];
            for &j in part.regions_in(i) {
                row[j] = 1.0;
            }
            if i == 0 || b.q_lo == b.q_hi {
                lp.add_row(row, Relation::Eq, b.q_lo);
                continue;
            }
            any_strict = true;
            let mut lower = row.clone();
            lower[t] = -1.0;
            lp.add_row(lower, Relation::Ge, b.q_lo);
            let mut upper = row;
            upper[t] = 1.0;
            lp.add_row(upper, Relation::Le, b.q_hi);
        }
        let sol = solve_lp(&lp)?;
        match sol.status {
            LpStatus::Optimal if !any_strict || sol.x[t] > STRICT_SLACK => Ok(()),
            _ => Err(AmbiguityError::A1Infeasible),
        }
    }

    /// Both assumptions; the clash check runs first.
    pub fn validate(&self) -> Result<(), AmbiguityError> {
        self.check_a2()?;
        self.check_a1()
    }

    /// Resolves endpoint clashes by raising the clashing left endpoint by
    /// `delta`, or lowering the right endpoint when the left one cannot move.
    /// `delta` defaults to `1e-6 * (u - l)`.
    pub fn repair_a2(&self, delta: Option<f64>) -> Self {
        let (l, u) = self.support();
        let delta = delta.unwrap_or(1e-6 * (u - l));
        let mut out = self.clone();
        // Bounded: each pass moves one endpoint strictly.
        for _ in 0..4 * out.baselines.len() * out.baselines.len() + 1 {
            let Err(AmbiguityError::A2Violation { lower, upper, .. }) = out.check_a2() else {
                break;
            };
            let b = out.baselines[lower];
            if lower != 0 && b.lo + delta <= b.hi {
                out.baselines[lower].lo += delta;
            } else {
                let c = out.baselines[upper];
                if upper != 0 && c.hi - delta >= c.lo {
                    out.baselines[upper].hi -= delta;
                } else {
                    break;
                }
            }
        }
        out
    }
}

/// Linear row `sum coeffs[a] * E{c_a} <= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationConstraint {
    coeffs: Vec<(ArcId, f64)>,
    rhs: f64,
}

impl ExpectationConstraint {
    /// Coefficients are merged per arc, sorted by arc id, zeros dropped.
    pub fn new(
        coeffs: impl IntoIterator<Item = (ArcId, f64)>,
        rhs: f64,
    ) -> Result<Self, AmbiguityError> {
        let mut merged: Vec<(ArcId, f64)> = Vec::new();
        let mut raw: Vec<(ArcId, f64)> = coeffs.into_iter().collect();
        raw.sort_by_key(|&(a, _)| a);
        for (a, v) in raw {
            match merged.last_mut() {
                Some((b, w)) if *b == a => *w += v,
                _ => merged.push((a, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        if merged.is_empty() {
            return Err(AmbiguityError::EmptyExpectationRow);
        }
        Ok(Self { coeffs: merged, rhs })
    }

    pub fn coeffs(&self) -> &[(ArcId, f64)] {
        &self.coeffs
    }

    pub fn rhs(&self) -> f64 {
        self.rhs
    }

    pub fn coefficient(&self, arc: ArcId) -> f64 {
        self.coeffs
            .binary_search_by_key(&arc, |&(a, _)| a)
            .map_or(0.0, |k| self.coeffs[k].1)
    }

    pub fn evaluate(&self, c: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(a, v)| v * c[a]).sum()
    }
}

/// Elementary subintervals `[L_j, U_j]` induced by the sorted baseline
/// endpoints, with membership maps in both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementaryPartition {
    bounds: Vec<(f64, f64)>,
    baseline_to_elementary: Vec<Vec<usize>>,
    elementary_to_baseline: Vec<Vec<usize>>,
}

impl ElementaryPartition {
    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn len(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_empty()
    }

    /// `W(i)`: regions contained in baseline `i`.
    pub fn regions_in(&self, baseline: usize) -> &[usize] {
        &self.baseline_to_elementary[baseline]
    }

    /// `D(j)`: baselines containing region `j`.
    pub fn baselines_of(&self, region: usize) -> &[usize] {
        &self.elementary_to_baseline[region]
    }

    /// The region whose containing baselines are exactly the flagged ones.
    pub fn resolve(&self, flags: &[bool]) -> Option<usize> {
        (0..self.len()).find(|&j| {
            let d = self.baselines_of(j);
            flags.iter().filter(|&&f| f).count() == d.len() && d.iter().all(|&i| flags[i])
        })
    }
}

pub fn elementary_partition(a: &ArcAmbiguity) -> ElementaryPartition {
    let baselines = a.baselines();
    let mut points: Vec<f64> = baselines.iter().flat_map(|b| [b.lo, b.hi]).collect();
    points.sort_by(f64::total_cmp);
    points.dedup();

    let mut bounds: Vec<(f64, f64)> = Vec::with_capacity(2 * points.len());
    for (k, &p) in points.iter().enumerate() {
        if baselines.iter().any(|b| b.lo == p && b.hi == p) {
            bounds.push((p, p));
        }
        if let Some(&next) = points.get(k + 1) {
            bounds.push((p, next));
        }
    }
    let elementary_to_baseline: Vec<Vec<usize>> = bounds
        .iter()
        .map(|&(lo, hi)| {
            (0..baselines.len())
                .filter(|&i| baselines[i].lo <= lo && hi <= baselines[i].hi)
                .collect()
        })
        .collect();
    let mut baseline_to_elementary = vec![Vec::new(); baselines.len()];
    for (j, members) in elementary_to_baseline.iter().enumerate() {
        for &i in members {
            baseline_to_elementary[i].push(j);
        }
    }
    ElementaryPartition {
        bounds,
        baseline_to_elementary,
        elementary_to_baseline,
    }
}

/// All arc ambiguities (indexed by arc id) plus linear expectation rows.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguitySet {
    per_arc: Vec<ArcAmbiguity>,
    expectation_rows: Vec<ExpectationConstraint>,
}

impl AmbiguitySet {
    pub fn new(
        per_arc: Vec<ArcAmbiguity>,
        expectation_rows: Vec<ExpectationConstraint>,
    ) -> Result<Self, AmbiguityError> {
        if let Some(a) = expectation_rows
            .iter()
            .flat_map(|r| r.coeffs().iter().map(|&(a, _)| a))
            .find(|&a| a >= per_arc.len())
        {
            return Err(AmbiguityError::UnknownArc(a));
        }
        Ok(Self {
            per_arc,
            expectation_rows,
        })
    }

    pub fn arc(&self, arc: ArcId) -> &ArcAmbiguity {
        &self.per_arc[arc]
    }

    pub fn per_arc(&self) -> &[ArcAmbiguity] {
        &self.per_arc
    }

    pub fn expectation_rows(&self) -> &[ExpectationConstraint] {
        &self.expectation_rows
    }

    pub fn arc_count(&self) -> usize {
        self.per_arc.len()
    }

    /// The same set without expectation rows.
    pub fn quantile_only(&self) -> Self {
        Self {
            per_arc: self.per_arc.clone(),
            expectation_rows: Vec::new(),
        }
    }

    pub fn with_rows(&self, rows: Vec<ExpectationConstraint>) -> Result<Self, AmbiguityError> {
        Self::new(self.per_arc.clone(), rows)
    }

    pub fn validate(&self) -> Result<(), AmbiguityError> {
        for (arc, a) in self.per_arc.iter().enumerate() {
            a.validate().map_err(|e| e.on_arc(arc))?;
        }
        Ok(())
    }
}

/// Two-sided Hoeffding half-width `sqrt(ln(2/eta) / (2r))`.
pub fn hoeffding_epsilon(r: usize, eta: f64) -> f64 {
    libm::sqrt(libm::log(2.0 / eta) / (2.0 * r as f64))
}

/// Confidence interval for `Q(c in [lo, hi])` from `hits` of `r` samples.
pub fn quantile_from_samples(
    hits: usize,
    r: usize,
    subinterval: (f64, f64),
    eta: f64,
) -> Result<QuantileConstraint, AmbiguityError> {
    if r == 0 || hits > r || !(0.0 < eta && eta < 1.0) {
        return Err(AmbiguityError::InvalidSampling);
    }
    let p = hits as f64 / r as f64;
    let eps = hoeffding_epsilon(r, eta);
    Ok(QuantileConstraint::new(
        subinterval.0,
        subinterval.1,
        (p - eps).max(0.0),
        (p + eps).min(1.0),
    ))
}

/// Upper and lower rows for `E{sum_{a in arcs} c_a}` from observed totals,
/// each total lying in `[lo, hi]`. The lower bound is stored negated.
pub fn expectation_from_samples(
    totals: &[f64],
    arcs: &[ArcId],
    lo: f64,
    hi: f64,
    eta: f64,
) -> Result<[ExpectationConstraint; 2], AmbiguityError> {
    if totals.is_empty() || !(0.0 < eta && eta < 1.0) || !(lo <= hi) {
        return Err(AmbiguityError::InvalidSampling);
    }
    if let Some(&value) = totals.iter().find(|&&x| !(lo <= x && x <= hi)) {
        return Err(AmbiguityError::SampleOutOfSupport { value, lo, hi });
    }
    let mean = totals.iter().sum::<f64>() / totals.len() as f64;
    let eps = (hi - lo) * hoeffding_epsilon(totals.len(), eta);
    let upper = ExpectationConstraint::new(arcs.iter().map(|&a| (a, 1.0)), mean + eps)?;
    let lower = ExpectationConstraint::new(arcs.iter().map(|&a| (a, -1.0)), -(mean - eps))?;
    Ok([upper, lower])
}

/// Per-constraint violation probability `eta0 / (n1 * arc_count + d0)`.
pub fn bonferroni_eta(eta0: f64, n1: usize, arc_count: usize, d0: usize) -> f64 {
    eta0 / (n1 * arc_count + d0) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(lo: f64, hi: f64, q_lo: f64, q_hi: f64) -> QuantileConstraint {
        QuantileConstraint::new(lo, hi, q_lo, q_hi)
    }

    fn example_arc() -> ArcAmbiguity {
        ArcAmbiguity::new(0.0, 100.0, [q(70.0, 100.0, 0.0, 0.1)]).unwrap()
    }

    #[test]
    fn partition_of_three_baselines() {
        let a = ArcAmbiguity::new(
            0.0,
            100.0,
            [q(20.0, 60.0, 0.0, 1.0), q(30.0, 70.0, 0.0, 1.0)],
        )
        .unwrap();
        let p = elementary_partition(&a);
        assert_eq!(
            p.bounds(),
            &[(0.0, 20.0), (20.0, 30.0), (30.0, 60.0), (60.0, 70.0), (70.0, 100.0)]
        );
        assert_eq!(p.regions_in(0), &[0, 1, 2, 3, 4]);
        assert_eq!(p.regions_in(1), &[1, 2]);
        assert_eq!(p.regions_in(2), &[2, 3]);
        assert_eq!(p.baselines_of(2), &[0, 1, 2]);
        assert_eq!(p.baselines_of(4), &[0]);
    }

    #[test]
    fn partition_of_example_arc() {
        let p = elementary_partition(&example_arc());
        assert_eq!(p.bounds(), &[(0.0, 70.0), (70.0, 100.0)]);
        assert_eq!(p.regions_in(0), &[0, 1]);
        assert_eq!(p.regions_in(1), &[1]);
        let support = elementary_partition(&ArcAmbiguity::support_only(3.0, 9.0).unwrap());
        assert_eq!(support.bounds(), &[(3.0, 9.0)]);
    }

    #[test]
    fn degenerate_support_and_baselines() {
        let point = ArcAmbiguity::support_only(5.0, 5.0).unwrap();
        assert_eq!(elementary_partition(&point).bounds(), &[(5.0, 5.0)]);
        point.validate().unwrap();

        let a = ArcAmbiguity::new(0.0, 10.0, [q(4.0, 4.0, 0.2, 0.6)]).unwrap();
        let p = elementary_partition(&a);
        assert_eq!(p.bounds(), &[(0.0, 4.0), (4.0, 4.0), (4.0, 10.0)]);
        assert_eq!(p.regions_in(1), &[1]);
        a.validate().unwrap();
    }

    #[test]
    fn a2_violation_names_endpoint() {
        let a = ArcAmbiguity::new(
            0.0,
            100.0,
            [q(0.0, 50.0, 0.4, 0.6), q(50.0, 100.0, 0.4, 0.6)],
        )
        .unwrap();
        match a.validate() {
            Err(AmbiguityError::A2Violation { endpoint, lower, upper }) => {
                assert_eq!(endpoint, 50.0);
                assert_eq!((lower, upper), (2, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
        let fixed = a.repair_a2(None);
        fixed.validate().unwrap();
        assert_eq!(fixed.quantiles()[1].lo, 50.0 + 1e-4);
    }

    #[test]
    fn a1_checks() {
        example_arc().validate().unwrap();
        let crowded = ArcAmbiguity::new(
            0.0,
            100.0,
            [q(0.0, 40.0, 0.9, 1.0), q(60.0, 100.0, 0.9, 1.0)],
        )
        .unwrap();
        assert_eq!(crowded.validate(), Err(AmbiguityError::A1Infeasible));
        // Feasible only on the boundary: not strictly interior.
        let tight = ArcAmbiguity::new(
            0.0,
            100.0,
            [q(0.0, 40.0, 0.6, 0.8), q(60.0, 100.0, 0.4, 0.6)],
        )
        .unwrap();
        assert_eq!(tight.validate(), Err(AmbiguityError::A1Infeasible));
        // Pinned probabilities need no slack.
        let pinned = ArcAmbiguity::new(0.0, 100.0, [q(0.0, 40.0, 0.5, 0.5)]).unwrap();
        pinned.validate().unwrap();
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            ArcAmbiguity::new(-1.0, 5.0, []),
            Err(AmbiguityError::InvalidSupport { .. })
        ));
        assert_eq!(
            ArcAmbiguity::new(0.0, 5.0, [q(1.0, 6.0, 0.0, 1.0)]),
            Err(AmbiguityError::OutsideSupport { index: 1 })
        );
        assert_eq!(
            ArcAmbiguity::new(0.0, 5.0, [q(1.0, 2.0, 0.6, 0.5)]),
            Err(AmbiguityError::MalformedQuantile { index: 1 })
        );
        assert_eq!(
            ExpectationConstraint::new([(0, 1.0), (0, -1.0)], 3.0),
            Err(AmbiguityError::EmptyExpectationRow)
        );
        let arcs = vec![example_arc()];
        let row = ExpectationConstraint::new([(1, 1.0)], 3.0).unwrap();
        assert_eq!(
            AmbiguitySet::new(arcs, vec![row]),
            Err(AmbiguityError::UnknownArc(1))
        );
    }

    #[test]
    fn set_validation_tags_arc() {
        let bad = ArcAmbiguity::new(
            0.0,
            100.0,
            [q(0.0, 50.0, 0.4, 0.6), q(50.0, 100.0, 0.4, 0.6)],
        )
        .unwrap();
        let set = AmbiguitySet::new(vec![example_arc(), bad], vec![]).unwrap();
        let err = set.validate().unwrap_err();
        assert!(matches!(err, AmbiguityError::OnArc { arc: 1, .. }));
        assert!(matches!(err.root(), AmbiguityError::A2Violation { .. }));
    }

    #[test]
    fn quantile_interval() {
        let c = quantile_from_samples(37, 100, (1.0, 2.0), 0.05).unwrap();
        let eps = libm::sqrt(libm::log(40.0) / 200.0);
        assert!((eps - 0.135_810_151_574).abs() < 1e-11);
        assert!((2.0 * libm::exp(-200.0 * eps * eps) - 0.05).abs() < 1e-12);
        assert!((c.q_lo - 0.234_189_848_426).abs() < 1e-11);
        assert!((c.q_hi - 0.505_810_151_574).abs() < 1e-11);
        let vacuous = quantile_from_samples(3, 3, (1.0, 2.0), 0.9).unwrap();
        assert!(hoeffding_epsilon(3, 0.9) < 1.0);
        assert_eq!(vacuous.q_hi, 1.0);
        let vacuous = quantile_from_samples(1, 1, (1.0, 2.0), 0.01).unwrap();
        assert_eq!((vacuous.q_lo, vacuous.q_hi), (0.0, 1.0));
        assert!(quantile_from_samples(2, 1, (1.0, 2.0), 0.05).is_err());
    }

    #[test]
    fn expectation_rows() {
        let [up, down] =
            expectation_from_samples(&[100.0, 100.0, 100.0], &[0, 2], 0.0, 300.0, 0.05).unwrap();
        let eps = 300.0 * libm::sqrt(libm::log(40.0) / 6.0);
        assert!((up.rhs() - (100.0 + eps)).abs() < 1e-9);
        assert!((down.rhs() - (eps - 100.0)).abs() < 1e-9);
        assert_eq!(up.coeffs(), &[(0, 1.0), (2, 1.0)]);
        assert_eq!(down.coefficient(2), -1.0);
        assert_eq!(down.coefficient(1), 0.0);
        assert!(matches!(
            expectation_from_samples(&[400.0], &[0], 0.0, 300.0, 0.05),
            Err(AmbiguityError::SampleOutOfSupport { .. })
        ));
    }

    #[test]
    fn bonferroni() {
        assert!((bonferroni_eta(0.05, 4, 10, 2) - 0.05 / 42.0).abs() < 1e-15);
        assert_eq!(bonferroni_eta(0.05, 1, 1, 0), 0.05);
    }

    #[test]
    fn censor_and_resolve() {
        let a = example_arc();
        let p = elementary_partition(&a);
        assert_eq!(p.resolve(&a.censor(30.0)), Some(0));
        assert_eq!(p.resolve(&a.censor(70.0)), Some(1));
        assert_eq!(p.resolve(&[false, true]), None);
    }
}

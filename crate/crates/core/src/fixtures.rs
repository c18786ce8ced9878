//! Seeded random instances for tests and benchmarks.
//!
//! Quantile bounds are drawn around a hidden reference distribution, so every
//! generated ambiguity set contains at least that distribution, and every
//! expectation row is satisfied by the reference means.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::ambiguity::{ArcAmbiguity, AmbiguitySet, ExpectationConstraint, QuantileConstraint};
use crate::datagen::gen_layered;
use crate::graph::enumerate_paths;
use crate::solver::DrsppInstance;

/// Random arc with support `[l, u]` and at most `max_quantiles` quantile
/// constraints on integer endpoints; satisfies both validity assumptions.
/// Returns the arc and the mean of its reference distribution.
pub fn random_arc<R: Rng + ?Sized>(rng: &mut R, l: u32, u: u32, max_quantiles: usize) -> (ArcAmbiguity, f64) {
    assert!(l < u);
    loop {
        let atoms: Vec<(f64, f64)> = (0..3)
            .map(|_| (rng.random_range(l as f64..u as f64), rng.random_range(0.1..1.0)))
            .collect();
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        let mean = atoms.iter().map(|a| a.0 * a.1).sum::<f64>() / total;
        let k = rng.random_range(0..=max_quantiles);
        let quantiles: Vec<QuantileConstraint> = (0..k)
            .map(|_| {
                let lo = rng.random_range(l..u);
                let hi = rng.random_range(lo + 1..=u);
                let p = atoms
                    .iter()
                    .filter(|a| lo as f64 <= a.0 && a.0 <= hi as f64)
                    .map(|a| a.1)
                    .sum::<f64>()
                    / total;
                let q_lo = (p - rng.random_range(0.01..0.3)).max(0.0);
                let q_hi = (p + rng.random_range(0.01..0.3)).min(1.0);
                QuantileConstraint::new(lo as f64, hi as f64, q_lo, q_hi)
            })
            .collect();
        let arc = ArcAmbiguity::new(l as f64, u as f64, quantiles).expect("endpoints inside the support");
        if arc.validate().is_ok() {
            return (arc, mean);
        }
    }
}

/// Random instance on the layered graph `(v, r)`: per-arc supports within
/// `[0, 100]`, up to `max_quantiles` quantile constraints per arc and exactly
/// `rows` expectation rows (path sums and random nonnegative combinations,
/// bounded above or below near the reference means).
pub fn random_instance<R: Rng + ?Sized>(
    rng: &mut R,
    v: usize,
    r: usize,
    max_quantiles: usize,
    rows: usize,
) -> DrsppInstance {
    let (graph, s, t) = gen_layered(v, r).expect("positive sizes");
    let m = graph.arc_count();
    let mut per_arc = Vec::with_capacity(m);
    let mut means = Vec::with_capacity(m);
    for _ in 0..m {
        let l = rng.random_range(0..50);
        let u = l + rng.random_range(5..=50);
        let (arc, mean) = random_arc(rng, l, u, max_quantiles);
        per_arc.push(arc);
        means.push(mean);
    }
    let paths = enumerate_paths(&graph, s, t, usize::MAX).expect("layered graphs are acyclic");
    let mut expectation = Vec::with_capacity(rows);
    while expectation.len() < rows {
        let coeffs: Vec<(usize, f64)> = if rng.random_bool(0.6) {
            let p = &paths[rng.random_range(0..paths.len())];
            p.arcs().iter().map(|&a| (a, 1.0)).collect()
        } else {
            let mut picked = Vec::new();
            for a in 0..m {
                if rng.random_bool(0.3) {
                    picked.push((a, rng.random_range(1..=3) as f64));
                }
            }
            picked
        };
        if coeffs.is_empty() {
            continue;
        }
        let at_mean: f64 = coeffs.iter().map(|&(a, w)| w * means[a]).sum();
        let slack = rng.random_range(0.0..5.0);
        let row = if rng.random_bool(0.7) {
            ExpectationConstraint::new(coeffs, at_mean + slack)
        } else {
            ExpectationConstraint::new(coeffs.into_iter().map(|(a, w)| (a, -w)), -(at_mean - slack))
        };
        expectation.push(row.expect("nonempty row"));
    }
    let set = AmbiguitySet::new(per_arc, expectation).expect("rows reference graph arcs");
    DrsppInstance::new(graph, s, t, set).expect("layered graphs connect source and sink")
}

/// Uniformly random integer costs in `[lo, hi]`, one per arc.
pub fn random_costs<R: Rng + ?Sized>(rng: &mut R, m: usize, lo: i32, hi: i32) -> Vec<f64> {
    let mut out = vec![0.0; m];
    for c in &mut out {
        *c = rng.random_range(lo..=hi) as f64;
    }
    out
}

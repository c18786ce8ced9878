use dro_path_core::lp::{solve_lp, LinearProgram, LpStatus, Relation, Sense};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Solves `a x = b` for square `a` by Gaussian elimination with partial
/// pivoting; `None` when singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = combinations(n - 1, k);
    for mut c in combinations(n - 1, k - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out
}

/// Best vertex of a box-bounded LP, or `None` when infeasible.
fn vertex_oracle(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars();
    let mut planes: Vec<(Vec<f64>, f64)> = lp.rows.iter().map(|r| (r.coeffs.clone(), r.rhs)).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lp.bounds[j].0));
        planes.push((e, lp.bounds[j].1));
    }
    let mut best: Option<f64> = None;
    for active in combinations(planes.len(), n) {
        let a = active.iter().map(|&i| planes[i].0.clone()).collect();
        let b = active.iter().map(|&i| planes[i].1).collect();
        let Some(x) = solve_square(a, b) else { continue };
        if lp.primal_residual(&x) > 1e-7 {
            continue;
        }
        let v = lp.evaluate(&x);
        best = Some(match (best, lp.sense) {
            (None, _) => v,
            (Some(w), Sense::Minimize) => w.min(v),
            (Some(w), Sense::Maximize) => w.max(v),
        });
    }
    best
}

fn random_lp(rng: &mut ChaCha8Rng) -> LinearProgram {
    let n = rng.random_range(1..=3);
    let sense = if rng.random_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
    let objective = (0..n).map(|_| rng.random_range(-5..=5) as f64).collect();
    let mut lp = LinearProgram::new(sense, objective);
    for j in 0..n {
        let lo = rng.random_range(-3..=1) as f64;
        lp.set_bounds(j, lo, lo + rng.random_range(1..=6) as f64);
    }
    for _ in 0..rng.random_range(0..=4) {
        let coeffs = (0..n).map(|_| rng.random_range(-4..=4) as f64).collect();
        let relation = match rng.random_range(0..5) {
            0 => Relation::Eq,
            1 | 2 => Relation::Le,
            _ => Relation::Ge,
        };
        lp.add_row(coeffs, relation, rng.random_range(-6..=6) as f64);
    }
    lp
}

#[test]
fn simplex_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut optimal, mut infeasible) = (0, 0);
    for case in 0..1000 {
        let lp = random_lp(&mut rng);
        let sol = solve_lp(&lp).unwrap();
        match vertex_oracle(&lp) {
            Some(v) => {
                assert_eq!(sol.status, LpStatus::Optimal, "case {case}: {lp:?}");
                assert!((sol.objective_value - v).abs() < 1e-7, "case {case}: {} vs {v}", sol.objective_value);
                let cert = sol.certificate(&lp);
                assert!(cert.primal_residual < 1e-9 && cert.dual_residual < 1e-9, "case {case}: {cert:?}");
                assert!(cert.gap() < 1e-8 && cert.complementary_slackness < 1e-8, "case {case}: {cert:?}");
                optimal += 1;
            }
            None => {
                assert_eq!(sol.status, LpStatus::Infeasible, "case {case}: {lp:?}");
                infeasible += 1;
            }
        }
    }
    assert!(optimal > 300 && infeasible > 50, "{optimal} optimal, {infeasible} infeasible");
}

#[test]
fn unbounded_direction_is_detected() {
    let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 1.0]);
    lp.add_row(vec![1.0, -1.0], Relation::Le, 2.0);
    assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
}

use fairot::transport::{
    barycenter_from_coupling, displacement_interpolation, monotone_coupling, solve_transport,
    variance_functional, wasserstein2_1d, wasserstein2_squared,
};
use fairot::EmpiricalMeasure;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Minimum cost over every basic solution of the transportation polytope.
///
/// Bases are spanning trees of the complete bipartite graph; flows on a tree
/// are forced and are found by repeatedly peeling a leaf.
fn brute_force_cost(cost: &[Vec<f64>], supply: &[f64], demand: &[f64]) -> f64 {
    let (n0, n1) = (supply.len(), demand.len());
    let edges: Vec<(usize, usize)> = (0..n0).flat_map(|i| (0..n1).map(move |j| (i, j))).collect();
    let k = n0 + n1 - 1;
    let mut best = f64::INFINITY;
    let mut pick = Vec::with_capacity(k);
    fn rec(
        start: usize,
        k: usize,
        edges: &[(usize, usize)],
        pick: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if pick.len() == k {
            visit(pick);
            return;
        }
        for e in start..edges.len() {
            if edges.len() - e < k - pick.len() {
                break;
            }
            pick.push(e);
            rec(e + 1, k, edges, pick, visit);
            pick.pop();
        }
    }
    let mut visit = |set: &[usize]| {
        // Spanning tree check with union-find.
        let mut parent: Vec<usize> = (0..n0 + n1).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for &e in set {
            let (i, j) = edges[e];
            let (a, b) = (find(&mut parent, i), find(&mut parent, n0 + j));
            if a == b {
                return;
            }
            parent[a] = b;
        }
        let mut rest: Vec<f64> = supply.iter().chain(demand).copied().collect();
        let mut alive: Vec<bool> = vec![true; set.len()];
        let mut flow = vec![0.0; set.len()];
        for _ in 0..set.len() {
            let mut degree = vec![0usize; n0 + n1];
            for (t, &e) in set.iter().enumerate() {
                if alive[t] {
                    let (i, j) = edges[e];
                    degree[i] += 1;
                    degree[n0 + j] += 1;
                }
            }
            let (t, leaf) = set
                .iter()
                .enumerate()
                .filter(|&(t, _)| alive[t])
                .find_map(|(t, &e)| {
                    let (i, j) = edges[e];
                    if degree[i] == 1 {
                        Some((t, i))
                    } else if degree[n0 + j] == 1 {
                        Some((t, n0 + j))
                    } else {
                        None
                    }
                })
                .unwrap();
            let (i, j) = edges[set[t]];
            let other = if leaf == i { n0 + j } else { i };
            flow[t] = rest[leaf];
            rest[other] -= rest[leaf];
            rest[leaf] = 0.0;
            alive[t] = false;
        }
        if flow.iter().any(|&f| f < -1e-12) {
            return;
        }
        let c: f64 = set
            .iter()
            .zip(&flow)
            .map(|(&e, f)| cost[edges[e].0][edges[e].1] * f)
            .sum();
        best = best.min(c);
    };
    rec(0, k, &edges, &mut pick, &mut visit);
    best
}

fn random_measure(rng: &mut ChaCha8Rng, n: usize, dim: usize, uniform: bool) -> EmpiricalMeasure {
    let points = (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect())
        .collect();
    let weights = (0..n)
        .map(|_| if uniform { 1.0 } else { rng.random_range(0.05..1.0) })
        .collect();
    EmpiricalMeasure::new(points, weights).unwrap()
}

fn squared_costs(mu0: &EmpiricalMeasure, mu1: &EmpiricalMeasure) -> Vec<Vec<f64>> {
    mu0.points()
        .map(|x| {
            mu1.points()
                .map(|y| x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum())
                .collect()
        })
        .collect()
}

#[test]
fn solver_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for case in 0..150 {
        let n0 = rng.random_range(1..=4);
        let n1 = rng.random_range(1..=(16 / n0).min(5));
        let dim = rng.random_range(1..=3);
        let uniform = case % 2 == 0;
        let mu0 = random_measure(&mut rng, n0, dim, uniform);
        let mu1 = random_measure(&mut rng, n1, dim, uniform);
        let solved = solve_transport(&mu0, &mu1).unwrap();
        let oracle = brute_force_cost(&squared_costs(&mu0, &mu1), mu0.weights(), mu1.weights());
        assert!(
            (solved.cost - oracle).abs() <= 1e-9,
            "case {case}: solver {} vs oracle {oracle}",
            solved.cost
        );
        assert!(solved.coupling.support_size() <= n0 + n1 - 1);
        assert!((solved.w2 * solved.w2 - solved.cost).abs() <= 1e-12 * solved.cost.max(1.0));
    }
}

#[test]
fn four_by_seven_line_example() {
    // Any sorted distinct samples of sizes 4 and 7 give the same plan.
    let mu0 = EmpiricalMeasure::uniform(vec![vec![0.0], vec![1.1], vec![2.3], vec![3.0]]).unwrap();
    let mu1 = EmpiricalMeasure::uniform(
        [-0.5, 0.4, 0.9, 1.6, 2.0, 2.7, 3.8].iter().map(|&x| vec![x]).collect(),
    )
    .unwrap();
    let g = solve_transport(&mu0, &mu1).unwrap().coupling.to_dense();
    let r = |k: i32| f64::from(k) / 28.0;
    let expected = [
        [r(4), r(3), 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, r(1), r(4), r(2), 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, r(2), r(4), r(1), 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, r(3), r(4)],
    ];
    for i in 0..4 {
        for j in 0..7 {
            assert_eq!(g[i][j], expected[i][j], "entry ({i}, {j})");
        }
    }
    // The same values written as differences of unit fractions.
    assert!((g[0][1] - (1.0 / 4.0 - 1.0 / 7.0)).abs() < 1e-16);
    assert!((g[1][1] - (2.0 / 7.0 - 1.0 / 4.0)).abs() < 1e-16);
    assert_eq!(g[1][3], 1.0 / 14.0);
    assert_eq!(g[0][0], 1.0 / 7.0);

    let bary = barycenter_from_coupling(&mu0, &mu1, &solve_transport(&mu0, &mu1).unwrap().coupling, 4.0 / 11.0, 7.0 / 11.0)
        .unwrap();
    assert_eq!(bary.len(), 10);
}

#[test]
fn equal_sizes_give_midpoints_of_the_matching() {
    let mu0 = EmpiricalMeasure::uniform(vec![vec![0.0, 0.0], vec![4.0, 0.0], vec![0.0, 4.0]]).unwrap();
    let mu1 = EmpiricalMeasure::uniform(vec![vec![4.0, 1.0], vec![1.0, 4.0], vec![1.0, 0.0]]).unwrap();
    let r = solve_transport(&mu0, &mu1).unwrap();
    let bary = barycenter_from_coupling(&mu0, &mu1, &r.coupling, 0.5, 0.5).unwrap();
    let mut pts: Vec<Vec<f64>> = bary.points().map(<[f64]>::to_vec).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(pts, vec![vec![0.5, 0.0], vec![0.5, 4.0], vec![4.0, 0.5]]);
}

#[test]
fn line_plans_are_monotone_and_match_quantile_w2() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let n0 = rng.random_range(1..30);
        let n1 = rng.random_range(1..30);
        let mu0 = random_measure(&mut rng, n0, 1, false);
        let mu1 = random_measure(&mut rng, n1, 1, false);
        let r = solve_transport(&mu0, &mu1).unwrap();
        assert!((r.w2 - wasserstein2_1d(&mu0, &mu1).unwrap()).abs() <= 1e-9);
        let cells = r.coupling.entries();
        for a in cells {
            for b in cells {
                if mu0.point(a.row)[0] < mu0.point(b.row)[0] {
                    assert!(mu1.point(a.col)[0] <= mu1.point(b.col)[0]);
                }
            }
        }
        let mono = monotone_coupling(&mu0, &mu1).unwrap();
        assert!((mono.cost(&mu0, &mu1) - r.cost).abs() <= 1e-9);
    }
}

#[test]
fn uniform_line_pair_at_distance_one() {
    let a = EmpiricalMeasure::uniform(vec![vec![0.0], vec![1.0]]).unwrap();
    let b = EmpiricalMeasure::uniform(vec![vec![1.0], vec![2.0]]).unwrap();
    assert_eq!(solve_transport(&a, &b).unwrap().w2, 1.0);
    assert_eq!(wasserstein2_1d(&a, &b).unwrap(), 1.0);
}

#[test]
fn displacement_interpolation_is_a_geodesic() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let mu0 = random_measure(&mut rng, 6, 2, true);
        let mu1 = random_measure(&mut rng, 9, 2, true);
        let r = solve_transport(&mu0, &mu1).unwrap();
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let nu = displacement_interpolation(&mu0, &mu1, &r.coupling, t).unwrap();
            let d = wasserstein2_squared(&mu0, &nu).unwrap().sqrt();
            assert!((d - t * r.w2).abs() <= 1e-9, "t = {t}: {d} vs {}", t * r.w2);
        }
    }
}

#[test]
fn barycenter_minimises_the_variance_functional() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10 {
        let mu0 = random_measure(&mut rng, 5, 2, true);
        let mu1 = random_measure(&mut rng, 8, 2, true);
        let (p0, p1) = (5.0 / 13.0, 8.0 / 13.0);
        let r = solve_transport(&mu0, &mu1).unwrap();
        let bary = barycenter_from_coupling(&mu0, &mu1, &r.coupling, p0, p1).unwrap();
        let mus = [mu0.clone(), mu1.clone()];
        let v = |nu: &EmpiricalMeasure| variance_functional(nu, &mus, &[p0, p1]).unwrap();
        let vb = v(&bary);
        assert!((vb - p0 * p1 * r.cost).abs() <= 1e-9);
        assert!(vb <= v(&mu0) + 1e-12 && vb <= v(&mu1) + 1e-12);
        for t in [0.1, 0.3, 0.5, 0.9] {
            let other = displacement_interpolation(&mu0, &mu1, &r.coupling, t).unwrap();
            assert!(vb <= v(&other) + 1e-9);
        }
    }
}

fn small_measure() -> impl Strategy<Value = EmpiricalMeasure> {
    prop::collection::vec((-4i32..4, -4i32..4, 1u32..10), 1..5).prop_map(|cells| {
        let points = cells.iter().map(|&(a, b, _)| vec![f64::from(a), f64::from(b)]).collect();
        let weights = cells.iter().map(|&(_, _, w)| f64::from(w)).collect();
        EmpiricalMeasure::new(points, weights).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn w2_is_a_metric(p in small_measure(), q in small_measure(), r in small_measure()) {
        let pq = solve_transport(&p, &q).unwrap().w2;
        let qp = solve_transport(&q, &p).unwrap().w2;
        let pr = solve_transport(&p, &r).unwrap().w2;
        let rq = solve_transport(&r, &q).unwrap().w2;
        prop_assert!((pq - qp).abs() <= 1e-12);
        prop_assert!(pq <= pr + rq + 1e-9);
        prop_assert_eq!(solve_transport(&p, &p).unwrap().cost, 0.0);
    }

    #[test]
    fn barycenter_is_a_probability_measure(p in small_measure(), q in small_measure(), t in 0.0f64..=1.0) {
        let r = solve_transport(&p, &q).unwrap();
        let nu = barycenter_from_coupling(&p, &q, &r.coupling, 1.0 - t, t).unwrap();
        prop_assert!((nu.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert_eq!(nu.len(), r.coupling.support_size());
    }
}

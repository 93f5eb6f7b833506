use fairot::riskbound::{
    evaluate_repair, excess_risk_bound, plan_for, random_repair_risk_mixture, risk, GaussianCovariates,
    Regression, SyntheticProblem,
};
use fairot::{build_repair_plan, Group};

fn planar_problem() -> SyntheticProblem {
    SyntheticProblem {
        p0: 0.35,
        covariates: [
            GaussianCovariates { mean: vec![-0.5, 0.2], sd: 1.0 },
            GaussianCovariates { mean: vec![0.6, -0.3], sd: 0.8 },
        ],
        eta: [
            Regression::Logistic { w: vec![1.5, -0.5], c: 0.1 },
            Regression::Ramp { w: vec![0.3, 0.2], c: -0.05 },
        ],
    }
}

#[test]
fn bayes_rule_beats_every_threshold_rule() {
    for index in 0..6 {
        let problem = SyntheticProblem::random_1d(10, index);
        let data = problem.sample(4000, index).unwrap();
        let (bayes, _) = risk(&problem, &data, |s, x| problem.bayes(s, x));
        for c in [-2.0, -1.0, -0.3, 0.0, 0.4, 1.0, 2.0] {
            for flip in [false, true] {
                let (other, _) = risk(&problem, &data, |_, x| (x[0] > c) != flip);
                assert!(bayes <= other + 1e-15, "problem {index}, c = {c}");
            }
        }
    }
}

#[test]
fn excess_risk_stays_under_both_bounds_on_the_line() {
    for index in 0..8 {
        let problem = SyntheticProblem::random_1d(42, index);
        let data = problem.sample(20_000, 1000 + index).unwrap();
        let plan = plan_for(&data).unwrap();
        let ev = evaluate_repair(&problem, &data, &plan.total_b()).unwrap();
        assert!(ev.excess >= 0.0);
        assert!(ev.excess <= ev.coupling_bound + 1e-12);
        let k = problem.lipschitz_max();
        assert!(ev.coupling_bound <= ev.bound(k) + 1e-12);
        assert!((ev.bound(k) - excess_risk_bound(&problem, &plan)).abs() < 1e-9);
    }
}

#[test]
fn excess_risk_stays_under_both_bounds_in_the_plane() {
    let problem = planar_problem();
    let data = problem.sample(400, 5).unwrap();
    let plan = build_repair_plan(&data).unwrap();
    let ev = evaluate_repair(&problem, &data, &plan.total_b()).unwrap();
    assert!(ev.excess >= 0.0);
    assert!(ev.excess <= ev.coupling_bound + 1e-12);
    assert!(ev.coupling_bound <= ev.bound(problem.lipschitz_max()) + 1e-12);
}

#[test]
fn random_repair_risk_is_linear_in_lambda_on_average() {
    let problem = SyntheticProblem::random_1d(3, 0);
    let data = problem.sample(2000, 3).unwrap();
    let plan = plan_for(&data).unwrap();
    let lambda = 0.3;
    let seeds = 200;
    let mut total = 0.0;
    let (mut original, mut full) = (0.0, 0.0);
    for seed in 0..seeds {
        let (r, o, f) = random_repair_risk_mixture(&problem, &plan, lambda, seed).unwrap();
        total += r;
        (original, full) = (o, f);
    }
    let mean = total / seeds as f64;
    let mix = (1.0 - lambda) * original + lambda * full;
    assert!((mean - mix).abs() < 0.25 * (full - original).abs().max(1e-3), "{mean} vs {mix}");
    let rule = |_: Group, x: &[f64]| problem.bayes(Group::Default, x);
    assert!((risk(&problem, &data, rule).0 - original).abs() < 1e-12);
}

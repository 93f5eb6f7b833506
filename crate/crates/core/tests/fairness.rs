use fairot::fairness::{
    audit, balanced_error_rate, di_at_most, di_ber_equivalence_check, disparate_impact,
    disparate_impact_weighted, min_ber_closed_form, min_ber_exhaustive, oae_gap, tv_lower_bound_di,
};
use fairot::{tv_distance_discrete, EmpiricalMeasure, Group};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Measure on a small integer grid with weights in units of 1/64.
fn dyadic_measure(rng: &mut ChaCha8Rng) -> EmpiricalMeasure {
    let n = rng.random_range(1..=6);
    let mut units = vec![1u32; n];
    for _ in n..64 {
        units[rng.random_range(0..n)] += 1;
    }
    let points = (0..n).map(|_| vec![f64::from(rng.random_range(0..5u8))]).collect();
    let weights = units.iter().map(|&u| f64::from(u) / 64.0).collect();
    EmpiricalMeasure::new(points, weights).unwrap()
}

#[test]
fn best_classifier_error_equals_half_of_one_minus_tv() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let p = dyadic_measure(&mut rng);
        let q = dyadic_measure(&mut rng);
        let exact = min_ber_exhaustive(&p, &q).unwrap();
        let closed = min_ber_closed_form(&p, &q).unwrap();
        assert_eq!(exact.min_ber, closed.min_ber);
        assert_eq!(exact.tv, closed.tv);
    }
}

#[test]
fn di_threshold_and_ber_threshold_agree() {
    for i in 1..=100 {
        for k in 1..=100 {
            let (a, b) = (f64::from(i) / 128.0, f64::from(k + 27) / 128.0);
            let ber = ((1.0 - b) + a) / 2.0;
            for t in 1..=10 {
                let tau = f64::from(t + 6) / 16.0;
                assert_eq!(
                    di_at_most(a, b, tau),
                    di_ber_equivalence_check(a, tau, ber).unwrap(),
                    "a = {a}, b = {b}, tau = {tau}"
                );
            }
        }
    }
}

#[test]
fn tv_bounds_the_disparate_impact_of_every_classifier() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let p = dyadic_measure(&mut rng);
        let q = dyadic_measure(&mut rng);
        let tv = tv_distance_discrete(&p, &q).unwrap();
        // Every threshold set {x >= c} and its complement.
        for c in 0..=5 {
            for above in [true, false] {
                let hit = |x: f64| (x >= f64::from(c)) == above;
                let rate = |m: &EmpiricalMeasure| -> f64 {
                    m.points().zip(m.weights()).filter(|(x, _)| hit(x[0])).map(|(_, w)| w).sum()
                };
                let (a, b) = (rate(&p), rate(&q));
                if a > 0.0 && b > 0.0 {
                    assert!(a / b >= tv_lower_bound_di(tv, a).unwrap() - 1e-12);
                }
            }
        }
    }
}

#[test]
fn hand_computed_audit() {
    let groups: Vec<Group> = [0, 0, 0, 0, 1, 1, 1, 1, 1]
        .iter()
        .map(|&s| Group::from_index(s).unwrap())
        .collect();
    let pred = [true, false, false, false, true, true, true, false, false];
    let labels = [true, true, false, false, true, true, false, false, false];
    let r = audit(&pred, &groups, Some(&labels), None, 0.95).unwrap();
    assert_eq!(r.a, 0.25);
    assert_eq!(r.b, 0.6);
    assert!((r.di - 0.25 / 0.6).abs() < 1e-15);
    assert!((r.ber - (0.4 + 0.25) / 2.0).abs() < 1e-15);
    assert!((r.oae_gap.unwrap() - (0.75 - 0.8f64).abs()).abs() < 1e-15);
    assert_eq!(balanced_error_rate(&pred, &groups).unwrap(), r.ber);
    assert_eq!(oae_gap(&pred, &labels, &groups).unwrap(), r.oae_gap.unwrap());
    assert!(r.di_lo < r.di && r.di < r.di_hi);
}

#[test]
fn unit_masses_reproduce_the_unweighted_audit() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let groups: Vec<Group> = (0..300)
        .map(|i| if i % 3 == 0 { Group::Minority } else { Group::Default })
        .collect();
    let pred: Vec<bool> = (0..300).map(|_| rng.random_bool(0.4)).collect();
    let w: Vec<f64> = groups
        .iter()
        .map(|&s| if s == Group::Minority { 1.0 / 100.0 } else { 1.0 / 200.0 })
        .collect();
    let plain = disparate_impact(&pred, &groups, 0.95).unwrap();
    let weighted = disparate_impact_weighted(&pred, &groups, &w, 0.95).unwrap();
    for (x, y) in [
        (plain.di, weighted.di),
        (plain.di_lo, weighted.di_lo),
        (plain.di_hi, weighted.di_hi),
        (plain.n0, weighted.n0),
        (plain.n1, weighted.n1),
    ] {
        assert!((x - y).abs() < 1e-9, "{x} vs {y}");
    }
}

#[test]
fn interval_covers_the_true_ratio_at_its_nominal_rate() {
    let (pa, pb, n0, n1) = (0.3, 0.5, 800usize, 1200usize);
    let truth = pa / pb;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let reps = 1000;
    let mut covered = 0;
    for _ in 0..reps {
        let mut groups = vec![Group::Minority; n0];
        groups.extend(vec![Group::Default; n1]);
        let pred: Vec<bool> = groups
            .iter()
            .map(|&s| rng.random_bool(if s == Group::Minority { pa } else { pb }))
            .collect();
        let r = disparate_impact(&pred, &groups, 0.95).unwrap();
        if r.di_lo <= truth && truth <= r.di_hi {
            covered += 1;
        }
    }
    let rate = f64::from(covered) / f64::from(reps);
    assert!((0.93..=0.97).contains(&rate), "coverage {rate}");
}

#[test]
fn degenerate_predictions_are_rejected() {
    let groups = [Group::Minority, Group::Default];
    assert!(disparate_impact(&[false, true], &groups, 0.95).is_err());
    assert!(disparate_impact(&[true, false], &groups, 0.95).is_err());
    assert!(disparate_impact(&[true, true], &groups, 1.0).is_err());
}

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tractafair::metrics::{
    calibration_gaps, disparate_classification_impact, probabilistic_disparate_impact, FairnessReport, GroupRoles,
};

const ROLES: GroupRoles = GroupRoles { a: 0, b: 1 };

#[derive(Debug, Clone)]
struct Rows {
    predictions: Vec<usize>,
    probabilities: Vec<f64>,
    labels: Vec<usize>,
    protected: Vec<usize>,
    targets: Vec<f64>,
    estimates: Vec<f64>,
}

impl Rows {
    fn reorder(&self, order: &[usize]) -> Rows {
        Rows {
            predictions: order.iter().map(|&i| self.predictions[i]).collect(),
            probabilities: order.iter().map(|&i| self.probabilities[i]).collect(),
            labels: order.iter().map(|&i| self.labels[i]).collect(),
            protected: order.iter().map(|&i| self.protected[i]).collect(),
            targets: order.iter().map(|&i| self.targets[i]).collect(),
            estimates: order.iter().map(|&i| self.estimates[i]).collect(),
        }
    }

    fn classification(&self, roles: GroupRoles) -> FairnessReport {
        FairnessReport::classification(
            &self.predictions,
            &self.probabilities,
            &self.labels,
            &self.protected,
            roles,
            5,
        )
        .unwrap()
    }

    fn regression(&self, roles: GroupRoles) -> FairnessReport {
        FairnessReport::regression(&self.estimates, &self.targets, &self.protected, roles).unwrap()
    }
}

/// At least four rows per group with varied targets, so every quartile is populated.
fn rows() -> impl Strategy<Value = Rows> {
    (any::<u64>(), 8usize..80).prop_map(|(seed, n)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let protected: Vec<usize> = (0..n)
            .map(|i| {
                if i < 4 {
                    0
                } else if i < 8 {
                    1
                } else {
                    rng.random_range(0..2)
                }
            })
            .collect();
        let probabilities: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
        Rows {
            predictions: probabilities.iter().map(|&p| usize::from(p >= 0.5)).collect(),
            labels: (0..n).map(|_| rng.random_range(0..2)).collect(),
            targets: (0..n).map(|i| i as f64 * 0.37 + rng.random_range(-1.0..1.0)).collect(),
            estimates: (0..n).map(|_| rng.random_range(0.0..30.0)).collect(),
            probabilities,
            protected,
        }
    })
}

fn same_gaps(x: &FairnessReport, y: &FairnessReport, sign: f64) -> Result<(), TestCaseError> {
    let tol = 1e-12;
    let close = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) => (a - sign * b).abs() <= tol,
        (None, None) => true,
        _ => false,
    };
    prop_assert!(close(
        x.disparate_classification_impact,
        y.disparate_classification_impact
    ));
    prop_assert!(close(
        x.probabilistic_disparate_impact,
        y.probabilistic_disparate_impact
    ));
    prop_assert!(close(Some(x.demographic_parity_gap), Some(y.demographic_parity_gap)));
    prop_assert!(close(x.equality_of_opportunity_gap, y.equality_of_opportunity_gap));
    prop_assert!(close(
        x.equality_of_opportunity_recall_gap,
        y.equality_of_opportunity_recall_gap
    ));
    // Calibration gaps are magnitudes, unaffected by orientation.
    prop_assert_eq!(x.calibration_gaps.len(), y.calibration_gaps.len());
    for (a, b) in x.calibration_gaps.iter().zip(&y.calibration_gaps) {
        let agree = match (a, b) {
            (Some(a), Some(b)) => (a - b).abs() <= tol,
            (None, None) => true,
            _ => false,
        };
        prop_assert!(agree);
    }
    Ok(())
}

proptest! {
    #[test]
    fn swapping_roles_negates_gaps(r in rows()) {
        same_gaps(&r.classification(ROLES), &r.classification(ROLES.swapped()), -1.0)?;
        same_gaps(&r.regression(ROLES), &r.regression(ROLES.swapped()), -1.0)?;
    }

    #[test]
    fn row_order_does_not_matter(r in rows(), seed in any::<u64>()) {
        let mut order: Vec<usize> = (0..r.labels.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..order.len()).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let p = r.reorder(&order);
        same_gaps(&r.classification(ROLES), &p.classification(ROLES), 1.0)?;
        let (a, b) = (r.regression(ROLES), p.regression(ROLES));
        same_gaps(&a, &b, 1.0)?;
        for (x, y) in a.underestimation_by_quartile.unwrap().iter().zip(&b.underestimation_by_quartile.unwrap()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn duplicating_rows_changes_nothing(r in rows(), k in 2usize..5) {
        let order: Vec<usize> = (0..k).flat_map(|_| 0..r.labels.len()).collect();
        let d = r.reorder(&order);
        let (a, b) = (r.classification(ROLES), d.classification(ROLES));
        same_gaps(&a, &b, 1.0)?;
        prop_assert!((a.accuracy.unwrap() - b.accuracy.unwrap()).abs() <= 1e-12);
        let (a, b) = (r.regression(ROLES), d.regression(ROLES));
        prop_assert!((a.mean_squared_error.unwrap() - b.mean_squared_error.unwrap()).abs() <= 1e-9);
        for (x, y) in a.underestimation_by_quartile.unwrap().iter().zip(&b.underestimation_by_quartile.unwrap()) {
            prop_assert!((x - y).abs() <= 1e-9, "{:?} vs {:?}", a.underestimation_by_quartile, b.underestimation_by_quartile);
        }
    }

    #[test]
    fn hard_probabilities_reproduce_classification_impact(r in rows()) {
        let hard: Vec<f64> = r.predictions.iter().map(|&p| p as f64).collect();
        let pdi = probabilistic_disparate_impact(&hard, &r.protected, ROLES).unwrap();
        let dci = disparate_classification_impact(&r.predictions, &r.protected, ROLES).unwrap();
        prop_assert_eq!(pdi.to_bits(), dci.to_bits());
    }
}

#[test]
fn calibrated_groups_have_small_gaps() {
    let n = 10_000;
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut scores, mut outcomes, mut protected) = (Vec::new(), Vec::new(), Vec::new());
        for g in 0..2 {
            for _ in 0..n {
                let s: f64 = rng.random_range(0.0..1.0);
                scores.push(s);
                outcomes.push(usize::from(rng.random_bool(s)));
                protected.push(g);
            }
        }
        let gap = calibration_gaps(&scores, &outcomes, &protected, ROLES, 1).unwrap()[0].unwrap();
        assert!(gap <= 0.03, "seed {seed}: {gap}");
    }
}

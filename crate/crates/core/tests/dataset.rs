use proptest::prelude::*;
use tractafair::dataset::{encode, scale_unit_interval, SplitPlan};
use tractafair::pipeline::german_credit;
use tractafair::Matrix;

#[test]
fn german_one_hot_blocks_decode_to_the_source_levels() {
    let ds = german_credit();
    let enc = encode(&ds, 10).unwrap();
    assert_eq!(enc.n_cols(), 93);
    for (g, group) in enc.groups.iter().enumerate() {
        if !group.categorical {
            continue;
        }
        for r in 0..ds.len() {
            assert_eq!(enc.level(r, g), ds.level(r, group.attribute), "{} row {r}", group.name);
        }
    }
}

proptest! {
    #[test]
    fn split_plans_depend_only_on_their_inputs(n in 5usize..400, frac in 0.05f64..0.6, k in 1usize..6, seed in any::<u64>()) {
        let (a, b) = (SplitPlan::new(n, frac, k, seed), SplitPlan::new(n, frac, k, seed));
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(&a, &b);
                let mut all: Vec<usize> = a.test.iter().chain(a.folds.iter().flatten()).copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            }
            (Err(a), Err(b)) => prop_assert_eq!(a.to_string(), b.to_string()),
            _ => prop_assert!(false, "same inputs, different outcomes"),
        }
    }

    #[test]
    fn scaling_twice_is_scaling_once(
        data in proptest::collection::vec(-1e3f64..1e3, 4 * 12),
        fit_mask in proptest::collection::vec(any::<bool>(), 12),
    ) {
        let m = Matrix::from_vec(12, 4, data);
        let mut fit: Vec<usize> = (0..12).filter(|&r| fit_mask[r]).collect();
        if fit.is_empty() {
            fit.push(0);
        }
        let (once, _) = scale_unit_interval(&m, &fit);
        let (twice, _) = scale_unit_interval(&once, &fit);
        for (a, b) in once.as_slice().iter().zip(twice.as_slice()) {
            prop_assert!((a - b).abs() <= 1e-12, "{} vs {}", a, b);
        }
    }
}

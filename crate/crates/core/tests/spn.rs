use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tractafair::spn::{Evidence, LeafDistribution, NodeId, Spn, SpnBuilder};

fn random_leaf(b: &mut SpnBuilder, var: usize, domain: usize, rng: &mut ChaCha8Rng) -> NodeId {
    let mut probs: Vec<f64> = (0..domain).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    b.leaf(var, LeafDistribution::Categorical { probs })
}

/// A valid node over `scope`: products split the scope, sums repeat it with
/// unnormalized weights.
fn random_node(b: &mut SpnBuilder, scope: &[usize], domains: &[usize], depth: usize, rng: &mut ChaCha8Rng) -> NodeId {
    if scope.len() == 1 && (depth == 0 || rng.random_bool(0.5)) {
        return random_leaf(b, scope[0], domains[scope[0]], rng);
    }
    if depth == 0 {
        let children = scope.iter().map(|&v| random_leaf(b, v, domains[v], rng)).collect();
        return b.product(children);
    }
    if scope.len() > 1 && rng.random_bool(0.5) {
        let cut = rng.random_range(1..scope.len());
        let children = vec![
            random_node(b, &scope[..cut], domains, depth - 1, rng),
            random_node(b, &scope[cut..], domains, depth - 1, rng),
        ];
        b.product(children)
    } else {
        let k = rng.random_range(2..4);
        let children = (0..k).map(|_| random_node(b, scope, domains, depth - 1, rng)).collect();
        let weights = (0..k).map(|_| rng.random_range(0.1..2.0)).collect();
        b.sum(children, weights)
    }
}

fn random_spn(seed: u64, n_vars: usize) -> (Spn, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domains: Vec<usize> = (0..n_vars).map(|_| rng.random_range(2..4)).collect();
    let scope: Vec<usize> = (0..n_vars).collect();
    let mut b = SpnBuilder::new();
    let root = random_node(&mut b, &scope, &domains, 4, &mut rng);
    (b.build_relaxed(root).unwrap(), domains)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn summing_out_a_variable_recovers_the_marginal(
        seed in any::<u64>(),
        n_vars in 2usize..7,
        observed in proptest::collection::vec(proptest::option::of(0usize..4), 7),
        target in 0usize..7,
    ) {
        let (spn, domains) = random_spn(seed, n_vars);
        let x = target % n_vars;
        let mut ev = Evidence::new();
        for (v, o) in observed.iter().enumerate().take(n_vars) {
            if let Some(val) = o {
                if v != x {
                    ev.set(v, val % domains[v]);
                }
            }
        }
        let whole = spn.probability(&ev).unwrap();
        let parts: f64 = (0..domains[x])
            .map(|val| spn.probability(&ev.clone().with(x, val)).unwrap())
            .sum();
        prop_assert!((whole - parts).abs() <= 1e-9, "{whole} vs {parts}");
    }

    #[test]
    fn conditionals_are_distributions(seed in any::<u64>(), n_vars in 2usize..6) {
        let (spn, domains) = random_spn(seed, n_vars);
        let ev = Evidence::new().with(0, 0);
        let c = spn.conditional(n_vars - 1, &ev).unwrap();
        prop_assert_eq!(c.len(), domains[n_vars - 1]);
        prop_assert!(c.iter().all(|p| (0.0..=1.0).contains(p)));
        prop_assert!((c.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DiscreteData, LearnConfig};
use crate::seed;

/// Hard cluster assignment of a row block.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Cluster id of each row, parallel to the `rows` argument.
    pub assignment: Vec<usize>,
    /// Cluster fractions, one per non-empty cluster.
    pub priors: Vec<f64>,
}

impl Clustering {
    pub fn n_clusters(&self) -> usize {
        self.priors.len()
    }

    /// Rows of each cluster, in input order.
    pub fn blocks(&self, rows: &[usize]) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.priors.len()];
        for (&r, &c) in rows.iter().zip(&self.assignment) {
            out[c].push(r);
        }
        out
    }
}

/// Sufficient statistics of a naive-Bayes mixture under hard assignment.
struct Counts {
    alpha: f64,
    domains: Vec<usize>,
    sizes: Vec<f64>,
    // [cluster][variable][level]
    table: Vec<Vec<Vec<f64>>>,
}

impl Counts {
    fn new(k: usize, domains: &[usize], alpha: f64) -> Self {
        Self {
            alpha,
            domains: domains.to_vec(),
            sizes: vec![0.0; k],
            table: (0..k)
                .map(|_| domains.iter().map(|&d| vec![0.0; d]).collect())
                .collect(),
        }
    }

    fn add(&mut self, c: usize, x: &[usize], w: f64) {
        self.sizes[c] += w;
        for (v, &l) in x.iter().enumerate() {
            self.table[c][v][l] += w;
        }
    }

    fn log_conditional(&self, c: usize, x: &[usize]) -> f64 {
        let size = self.sizes[c];
        x.iter()
            .enumerate()
            .map(|(v, &l)| ((self.table[c][v][l] + self.alpha) / (size + self.alpha * self.domains[v] as f64)).ln())
            .sum()
    }

    fn log_score(&self, c: usize, x: &[usize], n: f64) -> f64 {
        let k = self.sizes.len() as f64;
        ((self.sizes[c] + self.alpha) / (n + self.alpha * k)).ln() + self.log_conditional(c, x)
    }
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Hard incremental EM for a naive-Bayes mixture over `vars` on `rows`.
///
/// Each restart starts from a random assignment. A sweep takes each row out
/// of the counts, reassigns it to its highest-scoring cluster and puts it back;
/// sweeps repeat until nothing moves or `em_max_iters` is reached. The restart
/// with the highest complete-data log-likelihood wins, and empty clusters are
/// dropped.
pub fn cluster_instances(
    data: &DiscreteData,
    rows: &[usize],
    vars: &[usize],
    config: &LearnConfig,
    seed_value: u64,
) -> Clustering {
    let k = config.n_clusters;
    let n = rows.len();
    let domains: Vec<usize> = vars.iter().map(|&v| data.domain(v)).collect();
    let xs: Vec<Vec<usize>> = rows
        .iter()
        .map(|&r| vars.iter().map(|&v| data.level(r, v)).collect())
        .collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for restart in 0..config.em_restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive_indexed(seed_value, restart as u64));
        let mut assign: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let mut counts = Counts::new(k, &domains, config.laplace_alpha);
        for (x, &c) in xs.iter().zip(&assign) {
            counts.add(c, x, 1.0);
        }
        let mut scores = vec![0.0; k];
        for _ in 0..config.em_max_iters {
            let mut moved = false;
            for (i, x) in xs.iter().enumerate() {
                counts.add(assign[i], x, -1.0);
                for (c, s) in scores.iter_mut().enumerate() {
                    *s = counts.log_score(c, x, (n - 1) as f64);
                }
                let c = argmax(&scores);
                if c != assign[i] {
                    assign[i] = c;
                    moved = true;
                }
                counts.add(c, x, 1.0);
            }
            if !moved {
                break;
            }
        }
        let ll = complete_log_likelihood(&counts, &xs, &assign, n as f64);
        if best.as_ref().is_none_or(|(b, _)| ll > *b) {
            best = Some((ll, assign));
        }
    }
    let (_, assign) = best.expect("at least one restart");
    compact(assign, k)
}

fn complete_log_likelihood(counts: &Counts, xs: &[Vec<usize>], assign: &[usize], n: f64) -> f64 {
    xs.iter()
        .zip(assign)
        .map(|(x, &c)| (counts.sizes[c] / n).ln() + counts.log_conditional(c, x))
        .sum()
}

/// Drops empty clusters and renumbers the rest in ascending order.
fn compact(assign: Vec<usize>, k: usize) -> Clustering {
    let mut sizes = vec![0usize; k];
    for &c in &assign {
        sizes[c] += 1;
    }
    let mut relabel = vec![usize::MAX; k];
    let mut next = 0;
    for c in 0..k {
        if sizes[c] > 0 {
            relabel[c] = next;
            next += 1;
        }
    }
    let n = assign.len() as f64;
    let priors = (0..k).filter(|&c| sizes[c] > 0).map(|c| sizes[c] as f64 / n).collect();
    Clustering {
        assignment: assign.into_iter().map(|c| relabel[c]).collect(),
        priors,
    }
}

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Joint counts of two discrete columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    counts: Vec<Vec<f64>>,
}

/// Outcome of a G-test of independence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GTestResult {
    pub statistic: f64,
    /// `(observed rows - 1) * (observed cols - 1)`.
    pub dof: usize,
    pub p_value: f64,
    /// Set when either column has a single observed level; the statistic is
    /// then 0 and the p-value 1.
    pub degenerate: bool,
}

impl ContingencyTable {
    pub fn from_counts(counts: Vec<Vec<f64>>) -> Self {
        assert!(!counts.is_empty(), "contingency table needs a row");
        let width = counts[0].len();
        assert!(counts.iter().all(|r| r.len() == width), "ragged contingency table");
        Self { counts }
    }

    /// Counts of `(a[k], b[k])` pairs; `dom_a`/`dom_b` bound the level indices.
    pub fn from_levels(a: &[usize], b: &[usize], dom_a: usize, dom_b: usize) -> Self {
        assert_eq!(a.len(), b.len());
        let mut counts = vec![vec![0.0; dom_b]; dom_a];
        for (&x, &y) in a.iter().zip(b) {
            counts[x][y] += 1.0;
        }
        Self { counts }
    }

    pub fn counts(&self) -> &[Vec<f64>] {
        &self.counts
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().flatten().sum()
    }

    pub fn transpose(&self) -> Self {
        let w = self.counts[0].len();
        Self {
            counts: (0..w).map(|j| self.counts.iter().map(|r| r[j]).collect()).collect(),
        }
    }

    fn row_sums(&self) -> Vec<f64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    fn col_sums(&self) -> Vec<f64> {
        let w = self.counts[0].len();
        (0..w).map(|j| self.counts.iter().map(|r| r[j]).sum()).collect()
    }

    /// Number of rows with a positive marginal.
    pub fn observed_rows(&self) -> usize {
        self.row_sums().iter().filter(|&&s| s > 0.0).count()
    }

    pub fn observed_cols(&self) -> usize {
        self.col_sums().iter().filter(|&&s| s > 0.0).count()
    }

    /// Pools row `j` into row `i` and removes row `j`.
    pub fn merge_rows(&self, i: usize, j: usize) -> Self {
        assert!(i != j && i < self.counts.len() && j < self.counts.len());
        let mut counts = self.counts.clone();
        let moved = counts[j].clone();
        for (t, m) in counts[i].iter_mut().zip(moved) {
            *t += m;
        }
        counts.remove(j);
        Self { counts }
    }

    /// `G = 2 sum c(a,b) ln(c(a,b) N / (c(a) c(b)))` over non-empty cells.
    pub fn g_statistic(&self) -> f64 {
        let n = self.total();
        if n == 0.0 {
            return 0.0;
        }
        let rs = self.row_sums();
        let cs = self.col_sums();
        let mut g = 0.0;
        for (i, row) in self.counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c > 0.0 {
                    g += c * (c * n / (rs[i] * cs[j])).ln();
                }
            }
        }
        // Rounding can leave tiny negatives for exactly independent tables.
        (2.0 * g).max(0.0)
    }

    pub fn g_test(&self) -> GTestResult {
        let (r, c) = (self.observed_rows(), self.observed_cols());
        if r < 2 || c < 2 {
            return GTestResult {
                statistic: 0.0,
                dof: 0,
                p_value: 1.0,
                degenerate: true,
            };
        }
        let statistic = self.g_statistic();
        let dof = (r - 1) * (c - 1);
        let chi = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
        GTestResult {
            statistic,
            dof,
            p_value: chi.sf(statistic),
            degenerate: false,
        }
    }
}

/// G-test between two level columns over the same rows.
pub fn g_test(a: &[usize], b: &[usize]) -> GTestResult {
    let dom_a = a.iter().max().map_or(1, |m| m + 1);
    let dom_b = b.iter().max().map_or(1, |m| m + 1);
    ContingencyTable::from_levels(a, b, dom_a, dom_b).g_test()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportional_table_has_zero_statistic() {
        let t = ContingencyTable::from_counts(vec![vec![16.0, 24.0], vec![24.0, 36.0]]);
        assert!(t.g_statistic().abs() < 1e-12);
        let r = t.g_test();
        assert_eq!(r.dof, 1);
        assert!((r.p_value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn hand_evaluated_two_by_two() {
        let t = ContingencyTable::from_counts(vec![vec![30.0, 10.0], vec![10.0, 30.0]]);
        // each of the four cells contributes c * ln(c * 80 / 1600)
        let oracle = 2.0 * (2.0 * 30.0 * (1.5f64).ln() + 2.0 * 10.0 * (0.5f64).ln());
        assert!((t.g_statistic() - oracle).abs() < 1e-12);
        assert!((t.g_statistic() - 20.93).abs() < 5e-3);
        assert!(t.g_test().p_value < 1e-4);
    }

    #[test]
    fn single_observed_level_is_flagged() {
        let r = g_test(&[0, 0, 0, 0], &[0, 1, 0, 1]);
        assert!(r.degenerate);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn symmetric_in_arguments() {
        let a = [0, 1, 2, 1, 0, 2, 2, 1, 0, 0, 1];
        let b = [1, 1, 0, 0, 1, 0, 1, 1, 0, 1, 0];
        let (x, y) = (g_test(&a, &b), g_test(&b, &a));
        assert!((x.statistic - y.statistic).abs() < 1e-12);
        assert_eq!(x.dof, y.dof);
    }

    #[test]
    fn pooling_never_adds_levels() {
        let t = ContingencyTable::from_counts(vec![vec![1.0, 0.0, 2.0], vec![0.0, 0.0, 0.0], vec![3.0, 1.0, 0.0]]);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let m = t.merge_rows(i, j);
                    assert!(m.observed_rows() <= t.observed_rows());
                    assert_eq!(m.total(), t.total());
                }
            }
        }
    }
}

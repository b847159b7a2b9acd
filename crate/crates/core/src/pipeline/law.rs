//! Law-school style regression: predict a continuous outcome from numeric
//! admission scores after removing the protected group's influence.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{scaled_pair, CrossValidated, PipelineError, Variant};
use crate::dataset::{AttributeSchema, Cell, Dataset, Role, Schema, SplitPlan};
use crate::matrix::Matrix;
use crate::metrics::{FairnessReport, GroupRoles};
use crate::models::LinearRegressionModel;
use crate::quantile::fit_quantile_map;
use crate::seed;

/// Per-group score statistics of the mirror.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreStats {
    pub name: String,
    pub share: f64,
    pub gpa_mean: f64,
    pub gpa_sd: f64,
    pub lsat_mean: f64,
    pub lsat_sd: f64,
}

/// A latent ability `K ~ N(0, 1)` drives both scores and the outcome:
/// `score = mean + sd * (rho * K + sqrt(1 - rho^2) * e)`,
/// `outcome = alpha * K + sqrt(1 - alpha^2) * e'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawMirrorSpec {
    pub n: usize,
    pub groups: [ScoreStats; 2],
    pub rho_gpa: f64,
    pub rho_lsat: f64,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for LawMirrorSpec {
    fn default() -> Self {
        Self {
            n: 21_790,
            groups: [
                ScoreStats {
                    name: "white_asian".into(),
                    share: 0.88,
                    gpa_mean: 3.26,
                    gpa_sd: 0.401,
                    lsat_mean: 37.5,
                    lsat_sd: 4.9,
                },
                ScoreStats {
                    name: "black_hispanic".into(),
                    share: 0.12,
                    gpa_mean: 2.89,
                    gpa_sd: 0.426,
                    lsat_mean: 29.3,
                    lsat_sd: 5.9,
                },
            ],
            rho_gpa: 0.6,
            rho_lsat: 0.5,
            alpha: 0.62,
            seed: 0,
        }
    }
}

pub fn law_schema(group_names: [&str; 2]) -> Schema {
    Schema::new(vec![
        AttributeSchema::continuous("gpa", Role::Feature),
        AttributeSchema::continuous("lsat", Role::Feature),
        AttributeSchema::categorical("race", &group_names, Role::Protected),
        AttributeSchema::continuous("fya", Role::Label),
    ])
    .expect("static schema is valid")
}

/// Rows `(gpa, lsat, race, fya)`; minority rows are spread evenly through the table.
pub fn generate_law_mirror(spec: &LawMirrorSpec) -> Result<Dataset, PipelineError> {
    for (name, v) in [
        ("rho_gpa", spec.rho_gpa),
        ("rho_lsat", spec.rho_lsat),
        ("alpha", spec.alpha),
    ] {
        if !(v.abs() <= 1.0) {
            return Err(PipelineError::Config(format!("{name} must lie in [-1, 1]")));
        }
    }
    if !(spec.groups[1].share > 0.0 && spec.groups[1].share < 1.0) {
        return Err(PipelineError::Config("group shares must lie in (0, 1)".into()));
    }
    let schema = law_schema([&spec.groups[0].name, &spec.groups[1].name]);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let mix = |rho: f64, k: f64, e: f64| rho * k + (1.0 - rho * rho).sqrt() * e;
    let n_minority = (spec.n as f64 * spec.groups[1].share).round() as usize;
    let mut rows = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let g = usize::from(i * n_minority % spec.n < n_minority);
        let s = &spec.groups[g];
        let k = normal();
        let gpa = s.gpa_mean + s.gpa_sd * mix(spec.rho_gpa, k, normal());
        let lsat = s.lsat_mean + s.lsat_sd * mix(spec.rho_lsat, k, normal());
        let fya = mix(spec.alpha, k, normal());
        rows.push(vec![Cell::Real(gpa), Cell::Real(lsat), Cell::Level(g), Cell::Real(fya)]);
    }
    Ok(Dataset::from_rows(schema, &rows)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawSchoolConfig {
    pub seed: u64,
    pub test_fraction: f64,
    pub folds: usize,
    /// `None`: black_hispanic minus white_asian when those levels exist.
    pub roles: Option<GroupRoles>,
}

impl Default for LawSchoolConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            test_fraction: 0.2,
            folds: 5,
            roles: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawSchoolReport {
    pub seed: u64,
    pub roles: GroupRoles,
    pub group_names: [String; 2],
    /// variant -> fold-averaged report.
    pub cross_validation: BTreeMap<String, CrossValidated>,
    /// variant -> report on the held-out rows. Repairs at test time are refit
    /// on the held-out features (they never see the outcome).
    pub test: BTreeMap<String, FairnessReport>,
}

impl LawSchoolReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub const LAW_VARIANTS: [Variant; 5] = [
    Variant::Unfair,
    Variant::Unaware,
    Variant::Technique1,
    Variant::Technique2,
    Variant::Quantile,
];

struct Columns {
    features: Vec<Vec<f64>>,
    groups: Vec<usize>,
    n_groups: usize,
    target: Vec<f64>,
}

fn columns(ds: &Dataset) -> Result<Columns, PipelineError> {
    let schema = ds.schema();
    let features = schema
        .features()
        .into_iter()
        .map(|a| {
            ds.numeric_column(a)
                .ok_or_else(|| PipelineError::Config(format!("{} is not numeric", schema.attribute(a).name)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let target = ds
        .numeric_column(schema.label())
        .ok_or_else(|| PipelineError::Config("label must be numeric".into()))?;
    Ok(Columns {
        features,
        groups: ds.protected_levels(),
        n_groups: ds.level_names(schema.protected()).len(),
        target,
    })
}

fn group_means(
    col: &[f64],
    groups: &[usize],
    n_groups: usize,
    rows: &[usize],
) -> Result<(Vec<f64>, Vec<f64>), PipelineError> {
    let mut sums = vec![0.0; n_groups];
    let mut counts = vec![0usize; n_groups];
    for &r in rows {
        sums[groups[r]] += col[r];
        counts[groups[r]] += 1;
    }
    if counts.contains(&0) {
        return Err(PipelineError::Config("a protected group has no rows in a split".into()));
    }
    let means: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    let priors: Vec<f64> = counts.iter().map(|&c| c as f64 / rows.len() as f64).collect();
    Ok((means, priors))
}

/// Full-length feature matrix for `variant`, with every repair fitted on `fit_rows`.
/// Technique 2 returns the centered (training-side) form.
fn variant_matrix(c: &Columns, variant: Variant, fit_rows: &[usize]) -> Result<Matrix, PipelineError> {
    let n = c.groups.len();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for col in &c.features {
        cols.push(match variant {
            Variant::Unfair | Variant::Unaware => col.clone(),
            Variant::Technique1 => {
                let (m, _) = group_means(col, &c.groups, c.n_groups, fit_rows)?;
                (0..n).map(|r| col[r] - m[c.groups[r]]).collect()
            }
            Variant::Technique2 => {
                let (m, p) = group_means(col, &c.groups, c.n_groups, fit_rows)?;
                let centre: f64 = m.iter().zip(&p).map(|(a, b)| a * b).sum();
                col.iter().map(|v| v - centre).collect()
            }
            Variant::Quantile => {
                let vals: Vec<f64> = fit_rows.iter().map(|&r| col[r]).collect();
                let grp: Vec<usize> = fit_rows.iter().map(|&r| c.groups[r]).collect();
                fit_quantile_map(&vals, &grp, c.n_groups)?.apply_all(col, &c.groups)?
            }
        });
    }
    if variant == Variant::Unfair {
        for level in 1..c.n_groups {
            cols.push(c.groups.iter().map(|&g| f64::from(u8::from(g == level))).collect());
        }
    }
    let d = cols.len();
    let mut data = Vec::with_capacity(n * d);
    for r in 0..n {
        data.extend(cols.iter().map(|col| col[r]));
    }
    Ok(Matrix::from_vec(n, d, data))
}

fn evaluate(
    c: &Columns,
    variant: Variant,
    train: &[usize],
    eval: &[usize],
    eval_fit: &[usize],
    roles: GroupRoles,
) -> Result<(LinearRegressionModel, FairnessReport), PipelineError> {
    let fit_m = variant_matrix(c, variant, train)?;
    let eval_variant = if variant == Variant::Technique2 {
        Variant::Technique1
    } else {
        variant
    };
    let eval_m = variant_matrix(c, eval_variant, eval_fit)?;
    let (x_train, x_eval) = scaled_pair(&fit_m, train, &eval_m, eval);
    let y_train: Vec<f64> = train.iter().map(|&r| c.target[r]).collect();
    let model = LinearRegressionModel::fit(&x_train, &y_train)?;
    let pred = model.predict(&x_eval)?;
    let y_eval: Vec<f64> = eval.iter().map(|&r| c.target[r]).collect();
    let a_eval: Vec<usize> = eval.iter().map(|&r| c.groups[r]).collect();
    let report = FairnessReport::regression(&pred, &y_eval, &a_eval, roles)?;
    Ok((model, report))
}

fn resolve_roles(ds: &Dataset, config: &LawSchoolConfig) -> Result<GroupRoles, PipelineError> {
    let roles = config
        .roles
        .unwrap_or_else(|| super::roles_by_name(ds, "black_hispanic", "white_asian"));
    let n = ds.level_names(ds.schema().protected()).len();
    if roles.a >= n || roles.b >= n {
        return Err(PipelineError::Config("group roles outside the protected levels".into()));
    }
    Ok(roles)
}

/// A single regression trained on all non-test rows and scored on the test rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionRun {
    pub seed: u64,
    pub variant: Variant,
    pub model: LinearRegressionModel,
    pub report: FairnessReport,
}

/// The test pass of [`run_law_school`] for one variant.
pub fn run_regression(
    ds: &Dataset,
    config: &LawSchoolConfig,
    variant: Variant,
) -> Result<RegressionRun, PipelineError> {
    let c = columns(ds)?;
    let roles = resolve_roles(ds, config)?;
    let plan = SplitPlan::new(
        ds.len(),
        config.test_fraction,
        config.folds,
        seed::derive(config.seed, "split"),
    )?;
    let (model, report) = evaluate(
        &c,
        variant,
        &plan.train_validation_rows(),
        &plan.test,
        &plan.test,
        roles,
    )?;
    Ok(RegressionRun {
        seed: config.seed,
        variant,
        model,
        report,
    })
}

/// Cross-validation with repairs fitted on the training folds, then a final
/// model on all non-test rows.
pub fn run_law_school(ds: &Dataset, config: &LawSchoolConfig) -> Result<LawSchoolReport, PipelineError> {
    let c = columns(ds)?;
    let roles = resolve_roles(ds, config)?;
    let names = ds.level_names(ds.schema().protected());
    let plan = SplitPlan::new(
        ds.len(),
        config.test_fraction,
        config.folds,
        seed::derive(config.seed, "split"),
    )?;
    let mut cross_validation = BTreeMap::new();
    let mut test = BTreeMap::new();
    let all_train = plan.train_validation_rows();
    for variant in LAW_VARIANTS {
        let folds = (0..plan.k())
            .map(|f| {
                let train = plan.training_rows(f);
                evaluate(&c, variant, &train, plan.validation_rows(f), &train, roles).map(|(_, r)| r)
            })
            .collect::<Result<Vec<_>, _>>()?;
        cross_validation.insert(variant.name().to_string(), CrossValidated::from_folds(folds));
        test.insert(
            variant.name().to_string(),
            evaluate(&c, variant, &all_train, &plan.test, &plan.test, roles)?.1,
        );
    }
    Ok(LawSchoolReport {
        seed: config.seed,
        roles,
        group_names: [names[roles.a].clone(), names[roles.b].clone()],
        cross_validation,
        test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirror_moments() {
        let spec = LawMirrorSpec {
            n: 20_000,
            ..LawMirrorSpec::default()
        };
        let ds = generate_law_mirror(&spec).unwrap();
        let g = ds.protected_levels();
        assert_eq!(g.iter().filter(|&&x| x == 1).count(), 2400);
        let lsat = ds.numeric_column(1).unwrap();
        let minority: Vec<f64> = (0..ds.len()).filter(|&r| g[r] == 1).map(|r| lsat[r]).collect();
        let m = minority.iter().sum::<f64>() / minority.len() as f64;
        let sd = (minority.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / minority.len() as f64).sqrt();
        assert!((m - 29.3).abs() < 0.4, "{m}");
        assert!((sd - 5.9).abs() < 0.3, "{sd}");
        assert_eq!(generate_law_mirror(&spec).unwrap(), ds);
    }

    #[test]
    fn technique1_centres_training_groups() {
        let ds = generate_law_mirror(&LawMirrorSpec {
            n: 500,
            ..LawMirrorSpec::default()
        })
        .unwrap();
        let c = columns(&ds).unwrap();
        let rows: Vec<usize> = (0..500).collect();
        let m = variant_matrix(&c, Variant::Technique1, &rows).unwrap();
        for g in 0..2 {
            let r: Vec<usize> = rows.iter().copied().filter(|&r| c.groups[r] == g).collect();
            for col in 0..2 {
                let mean = r.iter().map(|&i| m.get(i, col)).sum::<f64>() / r.len() as f64;
                assert!(mean.abs() < 1e-9);
            }
        }
        assert_eq!(variant_matrix(&c, Variant::Unfair, &rows).unwrap().cols(), 3);
    }
}

//! German Credit: dependence partition, adjustment, three classifiers, four
//! data variants, cross-validation plus a held-out test evaluation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{scaled_pair, CrossValidated, PipelineError, Variant};
use crate::dataset::{read_delimited, CsvOptions, Dataset, EncodedMatrix, Encoder, NumericMode, Schema, SplitPlan};
use crate::fair_adjust::{
    adjust_technique1, center_technique2, drop_protected, fit_adjusters, partition_by_protected, AdjustmentModel,
    DependencyPartition,
};
use crate::learn::{first_split_subsets, learn_spn, DiscreteData, LearnConfig};
use crate::matrix::Matrix;
use crate::metrics::{FairnessReport, GroupRoles};
use crate::models::{ClassifierKind, ClassifierParams, TrainedModel};
use crate::seed;

const GERMAN_DATA: &str = include_str!("../../data/german.data");
const GERMAN_SCHEMA: &str = include_str!("../../data/german.schema.json");

pub fn german_schema() -> Schema {
    Schema::from_json_str(GERMAN_SCHEMA).expect("bundled schema is valid")
}

/// The bundled 1,000-row German Credit table.
pub fn german_credit() -> Dataset {
    let opts = CsvOptions {
        delimiter: b' ',
        has_header: false,
    };
    read_delimited(german_schema(), GERMAN_DATA.as_bytes(), opts).expect("bundled data is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GermanCreditConfig {
    pub seed: u64,
    pub test_fraction: f64,
    pub folds: usize,
    /// Equal-width bins for continuous attributes in the discrete view.
    pub n_bins: usize,
    pub calibration_bins: usize,
    /// Settings for the first independence split that decides the partition.
    pub partition_learn: LearnConfig,
    /// Settings for the SPN that estimates each dependent attribute given the
    /// protected one. A looser test keeps weak dependencies on the protected
    /// attribute that a strict one would factor away.
    pub adjustment_learn: LearnConfig,
    pub params: ClassifierParams,
    pub models: Vec<ClassifierKind>,
    /// `None`: female minus male when those levels exist.
    pub roles: Option<GroupRoles>,
}

impl Default for GermanCreditConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            test_fraction: 0.2,
            folds: 5,
            n_bins: 10,
            calibration_bins: 10,
            partition_learn: LearnConfig::default(),
            adjustment_learn: LearnConfig {
                g_threshold: 0.05,
                ..LearnConfig::default()
            },
            params: ClassifierParams::default(),
            models: ClassifierKind::ALL.to_vec(),
            roles: None,
        }
    }
}

/// Which attributes landed with the protected attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    /// Every variable subset of the first independence split, by name.
    pub subsets: Vec<Vec<String>>,
    pub dependent: Vec<String>,
    pub safe: Vec<String>,
    /// Adjustments applied; absent when nothing depends on the protected attribute.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adjustment: Option<serde_json::Value>,
}

type VariantReports<T> = BTreeMap<String, BTreeMap<String, T>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GermanCreditReport {
    pub seed: u64,
    pub roles: GroupRoles,
    pub group_names: [String; 2],
    pub fold_partitions: Vec<PartitionSummary>,
    pub test_partition: PartitionSummary,
    /// variant -> model -> fold-averaged report.
    pub cross_validation: VariantReports<CrossValidated>,
    /// variant -> model -> report on the held-out rows.
    pub test: VariantReports<FairnessReport>,
}

impl GermanCreditReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct SplitOutcome {
    partition: PartitionSummary,
    reports: Vec<(Variant, ClassifierKind, TrainedModel, FairnessReport)>,
}

fn partition_names(enc: &EncodedMatrix, groups: &[usize]) -> Vec<String> {
    groups.iter().map(|&g| enc.groups[g].name.clone()).collect()
}

struct Partitioned {
    disc: EncodedMatrix,
    partition: DependencyPartition,
    summary: PartitionSummary,
}

fn partition_rows(ds: &Dataset, train: &[usize], config: &GermanCreditConfig) -> Result<Partitioned, PipelineError> {
    let disc = Encoder::fit(ds, train, NumericMode::Binned { n_bins: config.n_bins })?.transform(ds);
    let subsets = first_split_subsets(&disc, train, &config.partition_learn)?;
    let protected = disc
        .protected_group
        .ok_or_else(|| PipelineError::Config("no protected attribute".into()))?;
    let partition = partition_by_protected(&subsets, protected)?;
    let names: Vec<String> = disc.groups.iter().map(|g| g.name.clone()).collect();
    let summary = PartitionSummary {
        subsets: subsets.named(&names),
        dependent: partition_names(&disc, &partition.dependent),
        safe: partition_names(&disc, &partition.safe),
        adjustment: None,
    };
    Ok(Partitioned {
        disc,
        partition,
        summary,
    })
}

/// The first independence split on `rows`, read relative to the protected attribute.
pub fn dependency_partition(
    ds: &Dataset,
    rows: &[usize],
    config: &GermanCreditConfig,
) -> Result<PartitionSummary, PipelineError> {
    Ok(partition_rows(ds, rows, config)?.summary)
}

/// Learns the adjustment on `train` rows only; `None` when no attribute
/// depends on the protected one.
pub fn fit_adjustment(
    ds: &Dataset,
    train: &[usize],
    config: &GermanCreditConfig,
    learn_seed: u64,
) -> Result<(Option<AdjustmentModel>, PartitionSummary), PipelineError> {
    let Partitioned {
        disc,
        partition,
        mut summary,
    } = partition_rows(ds, train, config)?;
    if partition.dependent.is_empty() {
        return Ok((None, summary));
    }
    let data = DiscreteData::from_encoded(&disc)?;
    let mut vars = partition.dependent.clone();
    vars.push(partition.protected);
    vars.sort_unstable();
    let learn = LearnConfig {
        seed: learn_seed,
        ..config.adjustment_learn.clone()
    };
    let spn = learn_spn(&data, train, &vars, &learn)?;
    let model = fit_adjusters(&spn, &partition, &disc, train)?;
    summary.adjustment = serde_json::from_str(&model.to_json_string()).ok();
    Ok((Some(model), summary))
}

/// Fits everything on `train`, evaluates each requested variant and model on `eval`.
fn run_split(
    ds: &Dataset,
    train: &[usize],
    eval: &[usize],
    config: &GermanCreditConfig,
    roles: GroupRoles,
    learn_seed: u64,
    runs: &[(Variant, ClassifierKind)],
) -> Result<SplitOutcome, PipelineError> {
    let (model, partition) = fit_adjustment(ds, train, config, learn_seed)?;
    let design = Encoder::fit(ds, train, NumericMode::Raw)?.transform(ds);
    let label = ds.schema().label();
    let labels = ds
        .level_column(label)
        .ok_or_else(|| PipelineError::Config("label must be categorical".into()))?;
    let protected = ds.protected_levels();

    let unfair = design.retain_groups(&design.input_groups());
    let unaware = drop_protected(&design);
    let (t1, t2) = match &model {
        Some(m) => (
            adjust_technique1(&design, m, &protected)?,
            center_technique2(&design, m)?,
        ),
        None => (unaware.clone(), unaware.clone()),
    };
    let y_train: Vec<usize> = train.iter().map(|&r| labels[r]).collect();
    let y_eval: Vec<usize> = eval.iter().map(|&r| labels[r]).collect();
    let a_eval: Vec<usize> = eval.iter().map(|&r| protected[r]).collect();

    let mut reports = Vec::new();
    let mut scaled: Option<(Variant, Matrix, Matrix)> = None;
    for &(variant, kind) in runs {
        if scaled.as_ref().is_none_or(|(v, _, _)| *v != variant) {
            let (fit_m, eval_m) = match variant {
                Variant::Unfair => (&unfair, &unfair),
                Variant::Unaware => (&unaware, &unaware),
                Variant::Technique1 => (&t1, &t1),
                Variant::Technique2 => (&t2, &t1),
                Variant::Quantile => {
                    return Err(PipelineError::Config(
                        "percentile repair applies to regression tasks".into(),
                    ))
                }
            };
            let (x_train, x_eval) = scaled_pair(&fit_m.matrix, train, &eval_m.matrix, eval);
            scaled = Some((variant, x_train, x_eval));
        }
        let (_, x_train, x_eval) = scaled.as_ref().expect("set above");
        let trained = TrainedModel::train(kind, x_train, &y_train, &config.params)?;
        let scores = trained.predict_scores(x_eval)?;
        let classes = trained.predict_classes(x_eval)?;
        let report =
            FairnessReport::classification(&classes, &scores, &y_eval, &a_eval, roles, config.calibration_bins)?;
        reports.push((variant, kind, trained, report));
    }
    Ok(SplitOutcome { partition, reports })
}

fn resolve_roles(ds: &Dataset, config: &GermanCreditConfig) -> Result<GroupRoles, PipelineError> {
    if !ds.schema().attribute(ds.schema().label()).kind.is_categorical() {
        return Err(PipelineError::Config("classification needs a categorical label".into()));
    }
    let roles = config
        .roles
        .unwrap_or_else(|| super::roles_by_name(ds, "female", "male"));
    let names = ds.level_names(ds.schema().protected());
    if roles.a >= names.len() || roles.b >= names.len() {
        return Err(PipelineError::Config("group roles outside the protected levels".into()));
    }
    Ok(roles)
}

fn plan_for(ds: &Dataset, config: &GermanCreditConfig) -> Result<SplitPlan, PipelineError> {
    Ok(SplitPlan::new(
        ds.len(),
        config.test_fraction,
        config.folds,
        seed::derive(config.seed, "split"),
    )?)
}

/// A single model trained on all non-test rows and scored on the test rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierRun {
    pub seed: u64,
    pub variant: Variant,
    pub partition: PartitionSummary,
    pub model: TrainedModel,
    pub report: FairnessReport,
}

/// The test pass of [`run_german_credit`] for one variant and model.
pub fn run_classifier(
    ds: &Dataset,
    config: &GermanCreditConfig,
    variant: Variant,
    kind: ClassifierKind,
) -> Result<ClassifierRun, PipelineError> {
    let roles = resolve_roles(ds, config)?;
    let plan = plan_for(ds, config)?;
    let learn_seed = seed::derive_indexed(seed::derive(config.seed, "spn"), plan.k() as u64);
    let out = run_split(
        ds,
        &plan.train_validation_rows(),
        &plan.test,
        config,
        roles,
        learn_seed,
        &[(variant, kind)],
    )?;
    let (_, _, model, report) = out.reports.into_iter().next().expect("one run requested");
    Ok(ClassifierRun {
        seed: config.seed,
        variant,
        partition: out.partition,
        model,
        report,
    })
}

/// One seed of the full recipe. Sub-seeds: `split` for the row split and
/// `spn` (indexed by fold, test pass last) for structure learning.
pub fn run_german_credit(ds: &Dataset, config: &GermanCreditConfig) -> Result<GermanCreditReport, PipelineError> {
    if config.models.is_empty() {
        return Err(PipelineError::Config("no models selected".into()));
    }
    let roles = resolve_roles(ds, config)?;
    let names = ds.level_names(ds.schema().protected());
    let plan = plan_for(ds, config)?;
    let spn_root = seed::derive(config.seed, "spn");
    let runs: Vec<(Variant, ClassifierKind)> = Variant::ADJUSTMENTS
        .into_iter()
        .flat_map(|v| config.models.iter().map(move |&k| (v, k)))
        .collect();

    let mut fold_partitions = Vec::new();
    let mut per_fold: BTreeMap<(Variant, ClassifierKind), Vec<FairnessReport>> = BTreeMap::new();
    for fold in 0..plan.k() {
        let out = run_split(
            ds,
            &plan.training_rows(fold),
            plan.validation_rows(fold),
            config,
            roles,
            seed::derive_indexed(spn_root, fold as u64),
            &runs,
        )?;
        fold_partitions.push(out.partition);
        for (v, k, _, r) in out.reports {
            per_fold.entry((v, k)).or_default().push(r);
        }
    }
    let test_out = run_split(
        ds,
        &plan.train_validation_rows(),
        &plan.test,
        config,
        roles,
        seed::derive_indexed(spn_root, plan.k() as u64),
        &runs,
    )?;

    let mut cross_validation: VariantReports<CrossValidated> = BTreeMap::new();
    for ((v, k), folds) in per_fold {
        cross_validation
            .entry(v.name().to_string())
            .or_default()
            .insert(k.name().to_string(), CrossValidated::from_folds(folds));
    }
    let mut test: VariantReports<FairnessReport> = BTreeMap::new();
    for (v, k, _, r) in test_out.reports {
        test.entry(v.name().to_string())
            .or_default()
            .insert(k.name().to_string(), r);
    }
    Ok(GermanCreditReport {
        seed: config.seed,
        roles,
        group_names: [names[roles.a].clone(), names[roles.b].clone()],
        fold_partitions,
        test_partition: test_out.partition,
        cross_validation,
        test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_shape() {
        let ds = german_credit();
        assert_eq!(ds.len(), 1000);
        assert_eq!(ds.schema().len(), 21);
        let sex = ds.protected_levels();
        assert_eq!(sex.iter().filter(|&&s| s == 0).count(), 310);
        let bad = ds
            .level_column(ds.schema().label())
            .unwrap()
            .iter()
            .filter(|&&y| y == 1)
            .count();
        assert_eq!(bad, 300);
    }
}

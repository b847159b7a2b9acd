use serde_json::json;
use tractafair::dataset::Dataset;
use tractafair::metrics::FairnessReport;
use tractafair::models::ClassifierKind;
use tractafair::pipeline::{run_classifier, run_regression, LawSchoolConfig, Variant};

use super::{german_config, load_args, parse_variant, write_artifact};
use crate::failure::Failure;
use crate::RunArgs;

/// What `train` and `evaluate` produce: the model JSON, extra artifacts and the report.
struct Fitted {
    model_json: String,
    extras: Vec<(&'static str, String)>,
    report: FairnessReport,
}

fn fit(a: &RunArgs, ds: &Dataset) -> Result<Fitted, Failure> {
    let variant = parse_variant(&a.technique)?;
    let label_is_numeric = !ds.schema().attribute(ds.schema().label()).kind.is_categorical();
    let seed = a.seed.seed;
    if a.model == "linreg" || a.model == "linear" {
        if !label_is_numeric {
            return Err(Failure::config("linreg needs a numeric label"));
        }
        let config = LawSchoolConfig {
            seed,
            test_fraction: a.split.test_fraction,
            folds: a.split.folds,
            roles: None,
        };
        let run = run_regression(ds, &config, variant)?;
        return Ok(Fitted {
            model_json: serde_json::to_string_pretty(&run.model).expect("model serializes"),
            extras: Vec::new(),
            report: run.report,
        });
    }
    let kind = ClassifierKind::parse(&a.model).ok_or_else(|| {
        Failure::config(format!(
            "unknown model {:?}; expected logreg, gnb, svm or linreg",
            a.model
        ))
    })?;
    if label_is_numeric {
        return Err(Failure::config("classifiers need a categorical label; use linreg"));
    }
    if variant == Variant::Quantile {
        return Err(Failure::config(
            "the quantile technique pairs with linreg on regression tasks",
        ));
    }
    let config = german_config(seed, &a.learn, &a.hyper, &a.split);
    let run = run_classifier(ds, &config, variant, kind)?;
    Ok(Fitted {
        model_json: run.model.to_json_string(),
        extras: vec![(
            "partition.json",
            serde_json::to_string_pretty(&run.partition).expect("partition serializes"),
        )],
        report: run.report,
    })
}

pub fn train(a: RunArgs) -> Result<(), Failure> {
    let out = a.out.clone().ok_or_else(|| Failure::config("train needs --out"))?;
    let ds = load_args(&a.data)?;
    let fitted = fit(&a, &ds)?;
    write_artifact(&out, "model.json", &fitted.model_json)?;
    for (name, text) in &fitted.extras {
        write_artifact(&out, name, text)?;
    }
    let summary = json!({
        "technique": a.technique,
        "model": a.model,
        "seed": a.seed.seed,
        "model_path": out.join("model.json"),
    });
    say!(
        "{}",
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    )?;
    Ok(())
}

pub fn evaluate(a: RunArgs) -> Result<(), Failure> {
    let ds = load_args(&a.data)?;
    let fitted = fit(&a, &ds)?;
    match &a.out {
        Some(out) => {
            write_artifact(out, "report.json", &fitted.report.to_json_string())?;
            if !fitted.report.calibration_gaps.is_empty() {
                write_artifact(out, "calibration.csv", &fitted.report.calibration_csv())?;
            }
            say!("{}", fitted.report.to_table().trim_end())?;
        }
        None => say!("{}", fitted.report.to_json_string())?,
    }
    Ok(())
}

use tractafair::models::ClassifierKind;
use tractafair::pipeline::{
    generate_law_mirror, german_credit, run_german_credit, run_law_school, LawMirrorSpec, LawSchoolConfig, Variant,
};

use super::{german_config, load, parse_variant, write_artifact};
use crate::failure::Failure;
use crate::{GermanArgs, LawArgs, OptionalDataArgs};

fn optional_data(d: &OptionalDataArgs) -> Result<Option<tractafair::dataset::Dataset>, Failure> {
    match (&d.data, &d.schema) {
        (Some(data), Some(schema)) => load(data, schema, d.delimiter, d.header).map(Some),
        _ => Ok(None),
    }
}

pub fn german(a: GermanArgs) -> Result<(), Failure> {
    let variant = parse_variant(&a.technique)?;
    if variant == Variant::Quantile {
        return Err(Failure::config("the German Credit recipe has no quantile variant"));
    }
    let mut config = german_config(a.seed.seed, &a.learn, &a.hyper, &a.split);
    if let Some(m) = &a.model {
        let kind = ClassifierKind::parse(m)
            .ok_or_else(|| Failure::config(format!("unknown model {m:?}; expected logreg, gnb or svm")))?;
        config.models = vec![kind];
    }
    let ds = optional_data(&a.data)?.unwrap_or_else(german_credit);
    let report = run_german_credit(&ds, &config)?;
    let json = report.to_json_string();
    match &a.out {
        Some(dir) => {
            write_artifact(dir, "german_credit_report.json", &json)?;
            for kind in &config.models {
                let r = &report.test[variant.name()][kind.name()];
                say!("{} / {} (test rows)", variant.name(), kind.name())?;
                say!("{}", r.to_table())?;
            }
        }
        None => say!("{json}")?,
    }
    Ok(())
}

pub fn law(a: LawArgs) -> Result<(), Failure> {
    let variant = parse_variant(&a.technique)?;
    let ds = match optional_data(&a.data)? {
        Some(ds) => ds,
        None => generate_law_mirror(&LawMirrorSpec {
            n: a.n,
            seed: a.seed.seed,
            ..LawMirrorSpec::default()
        })?,
    };
    let config = LawSchoolConfig {
        seed: a.seed.seed,
        test_fraction: a.split.test_fraction,
        folds: a.split.folds,
        roles: None,
    };
    let report = run_law_school(&ds, &config)?;
    let json = report.to_json_string();
    match &a.out {
        Some(dir) => {
            write_artifact(dir, "law_school_report.json", &json)?;
            say!("{} (test rows)", variant.name())?;
            say!("{}", report.test[variant.name()].to_table())?;
        }
        None => say!("{json}")?,
    }
    Ok(())
}

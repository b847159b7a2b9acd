/// `println!` that treats a closed stdout (piped into `head`, say) as success.
macro_rules! say {
    ($($arg:tt)*) => {
        $crate::commands::say(format_args!($($arg)*))
    };
}

pub mod fair;
pub mod model;
pub mod pipeline;
pub mod spn;
pub mod synth;

use std::path::Path;

use tractafair::dataset::{load_csv, CsvOptions, Dataset, Schema};
use tractafair::learn::{GMode, LearnConfig};
use tractafair::models::ClassifierParams;
use tractafair::pipeline::{GermanCreditConfig, Variant};

use crate::failure::Failure;
use crate::{DataArgs, GModeArg, HyperArgs, LearnArgs, SplitArgs};

fn csv_options(delimiter: char, header: bool) -> Result<CsvOptions, Failure> {
    if !delimiter.is_ascii() {
        return Err(Failure::config("delimiter must be a single ASCII character"));
    }
    Ok(CsvOptions {
        delimiter: delimiter as u8,
        has_header: header,
    })
}

pub fn load(data: &Path, schema: &Path, delimiter: char, header: bool) -> Result<Dataset, Failure> {
    let schema = Schema::load(schema)?;
    Ok(load_csv(schema, data, csv_options(delimiter, header)?)?)
}

pub fn load_args(a: &DataArgs) -> Result<Dataset, Failure> {
    load(&a.data, &a.schema, a.delimiter, a.header)
}

pub fn say(args: std::fmt::Arguments<'_>) -> Result<(), Failure> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{args}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

/// Writes `contents` to `dir/name`, creating `dir`.
pub fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

fn learn_config(base: LearnConfig, threshold: Option<f64>, mode: GModeArg) -> LearnConfig {
    LearnConfig {
        g_threshold: threshold.unwrap_or(base.g_threshold),
        mode: match mode {
            GModeArg::PValue => GMode::PValue,
            GModeArg::Raw => GMode::RawStatistic,
        },
        ..base
    }
}

pub fn parse_variant(s: &str) -> Result<Variant, Failure> {
    Variant::parse(s).ok_or_else(|| {
        Failure::config(format!(
            "unknown technique {s:?}; expected unfair, unaware, technique1, technique2 or quantile"
        ))
    })
}

fn classifier_params(h: &HyperArgs) -> ClassifierParams {
    let mut p = ClassifierParams::default();
    if let Some(l) = h.lambda {
        p.logistic.lambda = l;
    }
    if let Some(g) = h.gamma {
        p.svm.gamma = g;
    }
    if let Some(c) = h.c {
        p.svm.c = c;
    }
    p
}

/// Classification recipe settings from the shared flags.
pub fn german_config(seed: u64, learn: &LearnArgs, hyper: &HyperArgs, split: &SplitArgs) -> GermanCreditConfig {
    let base = GermanCreditConfig::default();
    GermanCreditConfig {
        seed,
        test_fraction: split.test_fraction,
        folds: split.folds,
        n_bins: learn.bins,
        partition_learn: learn_config(base.partition_learn.clone(), learn.g_threshold, learn.g_mode),
        adjustment_learn: learn_config(base.adjustment_learn.clone(), learn.adjust_g_threshold, learn.g_mode),
        params: classifier_params(hyper),
        ..base
    }
}

use tractafair::dataset::{Dataset, EncodedMatrix, Encoder, GroupEncoding, NumericMode};
use tractafair::fair_adjust::{adjust_technique1, center_technique2, drop_protected};
use tractafair::pipeline::{dependency_partition, fit_adjustment, Variant};
use tractafair::quantile::QuantileRepairMap;
use tractafair::seed;

use super::{csv_options, german_config, load_args, parse_variant, write_artifact};
use crate::failure::Failure;
use crate::{AdjustArgs, HyperArgs, PartitionArgs, QuantileArgs, SplitArgs};

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("value serializes")
}

fn no_split() -> SplitArgs {
    SplitArgs {
        folds: 5,
        test_fraction: 0.2,
    }
}

fn no_hyper() -> HyperArgs {
    HyperArgs {
        lambda: None,
        gamma: None,
        c: None,
    }
}

pub fn partition(a: PartitionArgs) -> Result<(), Failure> {
    let ds = load_args(&a.data)?;
    let config = german_config(0, &a.learn, &no_hyper(), &no_split());
    let rows: Vec<usize> = (0..ds.len()).collect();
    let summary = dependency_partition(&ds, &rows, &config)?;
    let text = pretty(&summary);
    match &a.out {
        Some(path) => std::fs::write(path, text)?,
        None => say!("{text}")?,
    }
    Ok(())
}

fn column_names(enc: &EncodedMatrix) -> Vec<String> {
    enc.groups
        .iter()
        .flat_map(|g| match g.encoding {
            GroupEncoding::Numeric => vec![g.name.clone()],
            GroupEncoding::Binary => vec![format!("{}={}", g.name, g.levels[1])],
            GroupEncoding::OneHot => g.levels.iter().map(|l| format!("{}={l}", g.name)).collect(),
        })
        .collect()
}

/// The encoded columns followed by the untouched label.
fn design_csv(enc: &EncodedMatrix, ds: &Dataset) -> Result<String, Failure> {
    let label = ds.schema().label();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = column_names(enc);
    header.push(ds.schema().attribute(label).name.clone());
    w.write_record(&header).map_err(|e| Failure::Data(e.to_string()))?;
    for r in 0..enc.n_rows() {
        let mut rec: Vec<String> = enc.matrix.row(r).iter().map(|v| v.to_string()).collect();
        rec.push(ds.display_value(r, label));
        w.write_record(&rec).map_err(|e| Failure::Data(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Data(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn adjust(a: AdjustArgs) -> Result<(), Failure> {
    let variant = parse_variant(&a.technique)?;
    if !matches!(variant, Variant::Technique1 | Variant::Technique2) {
        return Err(Failure::config("fair adjust takes technique1 or technique2"));
    }
    let ds = load_args(&a.data)?;
    let config = german_config(a.seed.seed, &a.learn, &no_hyper(), &no_split());
    let rows: Vec<usize> = (0..ds.len()).collect();
    let (model, summary) = fit_adjustment(&ds, &rows, &config, seed::derive(a.seed.seed, "spn"))?;
    let design = Encoder::fit(&ds, &rows, NumericMode::Raw)?.transform(&ds);
    let adjusted = match (&model, variant) {
        (Some(m), Variant::Technique1) => adjust_technique1(&design, m, &ds.protected_levels())?,
        (Some(m), _) => center_technique2(&design, m)?,
        (None, _) => drop_protected(&design),
    };
    write_artifact(&a.out, "adjusted.csv", &design_csv(&adjusted, &ds)?)?;
    write_artifact(&a.out, "partition.json", &pretty(&summary))?;
    match &model {
        Some(m) => write_artifact(&a.out, "adjustment.json", &m.to_json_string())?,
        None => eprintln!("tractafair: no attribute depends on the protected attribute; nothing adjusted"),
    }
    say!("dependent: {}", summary.dependent.join(", "))?;
    Ok(())
}

pub fn quantile(a: QuantileArgs) -> Result<(), Failure> {
    let ds = load_args(&a.data)?;
    let schema = ds.schema();
    let protected = schema.protected();
    let groups = ds.protected_levels();
    let mut map = QuantileRepairMap::new(ds.level_names(protected));
    let mut repaired: Vec<Option<Vec<f64>>> = vec![None; schema.len()];
    for attr in schema.features() {
        let Some(values) = ds.numeric_column(attr) else {
            continue;
        };
        let name = &schema.attribute(attr).name;
        map.fit_attribute(name, &values, &groups)?;
        let out = values
            .iter()
            .zip(&groups)
            .map(|(&v, &g)| map.apply_repair(name, v, g))
            .collect::<Result<Vec<_>, _>>()?;
        repaired[attr] = Some(out);
    }
    if map.attributes.is_empty() {
        return Err(Failure::config("no numeric feature to repair"));
    }
    let opts = csv_options(a.data.delimiter, a.data.header)?;
    let mut w = csv::WriterBuilder::new()
        .delimiter(opts.delimiter)
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| Failure::Data(e.to_string());
    if opts.has_header {
        w.write_record(schema.attributes().iter().map(|a| a.name.as_str()))
            .map_err(csv_err)?;
    }
    for r in 0..ds.len() {
        let rec: Vec<String> = (0..schema.len())
            .map(|attr| match &repaired[attr] {
                Some(col) => col[r].to_string(),
                None => ds.display_value(r, attr),
            })
            .collect();
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Data(e.to_string()))?;
    write_artifact(
        &a.out,
        "repaired.csv",
        &String::from_utf8(bytes).expect("csv output is utf-8"),
    )?;
    write_artifact(&a.out, "repair_map.json", &map.to_json_string())?;
    say!(
        "repaired: {}",
        map.attributes.keys().cloned().collect::<Vec<_>>().join(", ")
    )?;
    Ok(())
}

use serde_json::json;
use tractafair::dataset::{Encoder, NumericMode};
use tractafair::learn::{learn_spn, DiscreteData, LearnConfig};
use tractafair::spn::{Evidence, Spn};

use super::{learn_config, load_args};
use crate::failure::Failure;
use crate::{SpnLearnArgs, SpnQueryArgs};

pub fn learn(a: SpnLearnArgs) -> Result<(), Failure> {
    let ds = load_args(&a.data)?;
    let rows: Vec<usize> = (0..ds.len()).collect();
    let enc = Encoder::fit(&ds, &rows, NumericMode::Binned { n_bins: a.learn.bins })?.transform(&ds);
    let data = DiscreteData::from_encoded(&enc)?;
    let vars: Vec<usize> = (0..data.n_vars()).collect();
    let config = LearnConfig {
        seed: a.seed.seed,
        ..learn_config(LearnConfig::default(), a.learn.g_threshold, a.learn.g_mode)
    };
    let spn = learn_spn(&data, &rows, &vars, &config)?;
    match &a.out {
        Some(path) => {
            std::fs::write(path, spn.to_json_string())?;
            let summary = json!({
                "variables": data.names(),
                "nodes": spn.node_count(),
                "edges": spn.edge_count(),
            });
            say!(
                "{}",
                serde_json::to_string_pretty(&summary).expect("summary serializes")
            )?;
        }
        None => say!("{}", spn.to_json_string())?,
    }
    Ok(())
}

fn parse_evidence(text: &str) -> Result<Evidence, Failure> {
    let mut ev = Evidence::new();
    for pair in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (var, value) = pair
            .split_once('=')
            .ok_or_else(|| Failure::config(format!("evidence {pair:?} is not var=value")))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Failure::config(format!("evidence {pair:?} is not var=value")))
        };
        ev.set(parse(var)?, parse(value)?);
    }
    Ok(ev)
}

pub fn query(a: SpnQueryArgs) -> Result<(), Failure> {
    let spn = Spn::load(&a.spn)?;
    let ev = parse_evidence(&a.evidence)?;
    let out = match (a.query, &a.values) {
        (Some(q), Some(values)) => json!({ "expectation": spn.expectation(q, values, &ev)? }),
        (Some(q), None) => json!({ "conditional": spn.conditional(q, &ev)? }),
        _ => json!({ "probability": spn.probability(&ev)? }),
    };
    say!("{}", serde_json::to_string_pretty(&out).expect("result serializes"))?;
    Ok(())
}

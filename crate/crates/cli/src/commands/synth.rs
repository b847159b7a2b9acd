use tractafair::synth::{generate, selection_study, write_study_csv, DemoSummary, LogNormalGroupSpec, RepairMode};

use super::write_artifact;
use crate::failure::Failure;
use crate::SynthDemoArgs;

pub fn demo(a: SynthDemoArgs) -> Result<(), Failure> {
    let spec = LogNormalGroupSpec::demo(a.n, a.seed.seed);
    let ds = generate(&spec)?;
    let outcomes = RepairMode::ALL
        .into_iter()
        .map(|m| selection_study(&ds, m, a.selection_quantile))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = DemoSummary::new(&spec, &outcomes).to_json_string();
    match &a.out {
        Some(dir) => {
            for o in &outcomes {
                let mut buf = Vec::new();
                write_study_csv(&ds, o, &mut buf)?;
                let text = String::from_utf8(buf).expect("csv output is utf-8");
                write_artifact(dir, &format!("study_{}.csv", o.mode.name()), &text)?;
            }
            write_artifact(dir, "summary.json", &summary)?;
        }
        None => say!("{summary}")?,
    }
    Ok(())
}

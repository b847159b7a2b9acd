//! `tractafair`: batch command line over the tractafair library.

mod commands;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use failure::Failure;

#[derive(Parser)]
#[command(name = "tractafair", version, about = "Fair preprocessing with sum-product networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn or query a sum-product network.
    #[command(subcommand)]
    Spn(SpnCommand),
    /// Dependence partition, adjustment and percentile repair.
    #[command(subcommand)]
    Fair(FairCommand),
    /// Fit one model on the non-test rows and save it.
    Train(RunArgs),
    /// Fit one model on the non-test rows and report on the test rows.
    Evaluate(RunArgs),
    /// Synthetic selection study.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// End-to-end experiment recipes.
    #[command(subcommand)]
    Pipeline(PipelineCommand),
}

#[derive(Subcommand)]
enum SpnCommand {
    /// Learn an SPN over every attribute of a discretized table.
    Learn(SpnLearnArgs),
    /// Probability, conditional or expectation under evidence.
    Query(SpnQueryArgs),
}

#[derive(Subcommand)]
enum FairCommand {
    /// Variable subsets of the first independence split.
    Partition(PartitionArgs),
    /// Remove the protected attribute's contribution from dependent attributes.
    Adjust(AdjustArgs),
    /// Percentile-equivalence repair of every numeric feature.
    Quantile(QuantileArgs),
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Two log-normal salary groups under each repair mode.
    Demo(SynthDemoArgs),
}

#[derive(Subcommand)]
enum PipelineCommand {
    /// Classification on German Credit (bundled unless --data is given).
    GermanCredit(GermanArgs),
    /// Regression on law-school admissions (a synthetic mirror unless --data is given).
    LawSchool(LawArgs),
}

#[derive(Args, Clone)]
struct SeedArg {
    /// Root seed; every random stage derives its own stream from it.
    #[arg(long, env = "TRACTAFAIR_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Clone)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    /// Field delimiter of the data file.
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// The data file starts with a header row.
    #[arg(long)]
    header: bool,
}

#[derive(Args, Clone)]
struct OptionalDataArgs {
    #[arg(long, requires = "schema")]
    data: Option<PathBuf>,
    #[arg(long, requires = "data")]
    schema: Option<PathBuf>,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    #[arg(long)]
    header: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum GModeArg {
    /// Dependent when the p-value is at most the threshold.
    PValue,
    /// Dependent when the G statistic is at least the threshold.
    Raw,
}

#[derive(Args, Clone)]
struct LearnArgs {
    /// Equal-width bins for continuous attributes.
    #[arg(long, default_value_t = 10)]
    bins: usize,
    /// Independence threshold of the structure learner.
    #[arg(long)]
    g_threshold: Option<f64>,
    #[arg(long, value_enum, default_value_t = GModeArg::PValue)]
    g_mode: GModeArg,
    /// Independence threshold of the SPN behind the adjustment.
    #[arg(long)]
    adjust_g_threshold: Option<f64>,
}

#[derive(Args, Clone)]
struct HyperArgs {
    /// L2 penalty of logistic regression.
    #[arg(long)]
    lambda: Option<f64>,
    /// RBF kernel width of the SVM.
    #[arg(long)]
    gamma: Option<f64>,
    /// Soft-margin penalty of the SVM.
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Args, Clone)]
struct SplitArgs {
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,
}

#[derive(Args)]
struct SpnLearnArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    learn: LearnArgs,
    #[command(flatten)]
    seed: SeedArg,
    /// SPN JSON output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpnQueryArgs {
    /// SPN JSON file.
    #[arg(long)]
    spn: PathBuf,
    /// Observed values as `var=value` pairs separated by commas; empty
    /// marginalizes every variable.
    #[arg(long, default_value = "")]
    evidence: String,
    /// Variable whose conditional distribution is wanted.
    #[arg(long)]
    query: Option<usize>,
    /// Numeric value of each level of the query variable, comma separated;
    /// turns the conditional into an expectation.
    #[arg(long, requires = "query", value_delimiter = ',')]
    values: Option<Vec<f64>>,
}

#[derive(Args)]
struct PartitionArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    learn: LearnArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AdjustArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    learn: LearnArgs,
    #[command(flatten)]
    seed: SeedArg,
    /// technique1 (own protected level) or technique2 (prior-weighted centering).
    #[arg(long, default_value = "technique1")]
    technique: String,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct QuantileArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    learn: LearnArgs,
    #[command(flatten)]
    hyper: HyperArgs,
    #[command(flatten)]
    split: SplitArgs,
    #[command(flatten)]
    seed: SeedArg,
    /// unfair, unaware, technique1, technique2 or quantile.
    #[arg(long)]
    technique: String,
    /// logreg, gnb, svm or linreg.
    #[arg(long)]
    model: String,
    /// Output directory; `evaluate` prints JSON to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthDemoArgs {
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Rows at or above this quantile of the repaired salary are selected.
    #[arg(long, default_value_t = 0.9)]
    selection_quantile: f64,
    #[command(flatten)]
    seed: SeedArg,
    /// Output directory for the per-mode CSVs and the summary; summary to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GermanArgs {
    #[command(flatten)]
    data: OptionalDataArgs,
    #[command(flatten)]
    learn: LearnArgs,
    #[command(flatten)]
    hyper: HyperArgs,
    #[command(flatten)]
    split: SplitArgs,
    #[command(flatten)]
    seed: SeedArg,
    /// Restrict the run to one classifier.
    #[arg(long)]
    model: Option<String>,
    /// Variant whose test report is printed.
    #[arg(long, default_value = "technique1")]
    technique: String,
    /// Output directory; the full report goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LawArgs {
    #[command(flatten)]
    data: OptionalDataArgs,
    #[command(flatten)]
    split: SplitArgs,
    #[command(flatten)]
    seed: SeedArg,
    /// Rows of the synthetic mirror.
    #[arg(long, default_value_t = 21_790)]
    n: usize,
    /// Variant whose test report is printed.
    #[arg(long, default_value = "quantile")]
    technique: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Spn(SpnCommand::Learn(a)) => commands::spn::learn(a),
        Command::Spn(SpnCommand::Query(a)) => commands::spn::query(a),
        Command::Fair(FairCommand::Partition(a)) => commands::fair::partition(a),
        Command::Fair(FairCommand::Adjust(a)) => commands::fair::adjust(a),
        Command::Fair(FairCommand::Quantile(a)) => commands::fair::quantile(a),
        Command::Train(a) => commands::model::train(a),
        Command::Evaluate(a) => commands::model::evaluate(a),
        Command::Synth(SynthCommand::Demo(a)) => commands::synth::demo(a),
        Command::Pipeline(PipelineCommand::GermanCredit(a)) => commands::pipeline::german(a),
        Command::Pipeline(PipelineCommand::LawSchool(a)) => commands::pipeline::law(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage mistakes are configuration errors; help and version are not errors.
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("tractafair: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}

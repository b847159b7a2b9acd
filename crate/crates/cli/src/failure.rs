use std::fmt;

use tractafair::dataset::DataError;
use tractafair::fair_adjust::FairError;
use tractafair::learn::LearnError;
use tractafair::models::ModelError;
use tractafair::pipeline::PipelineError;
use tractafair::quantile::QuantileError;
use tractafair::spn::SpnError;
use tractafair::synth::SynthError;

/// A failed run, classified by exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Data(String),
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Data(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Failure::Config(msg.into())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Data(m) => write!(f, "data error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<DataError> for Failure {
    fn from(e: DataError) -> Self {
        match e {
            DataError::InvalidFraction(_) | DataError::KTooLarge { .. } => Failure::Config(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<LearnError> for Failure {
    fn from(e: LearnError) -> Self {
        match e {
            LearnError::Config(_) => Failure::Config(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<SpnError> for Failure {
    fn from(e: SpnError) -> Self {
        match e {
            SpnError::ZeroEvidence => Failure::Numerical(e.to_string()),
            SpnError::InvalidStructure(_) | SpnError::Json(_) => Failure::Data(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<FairError> for Failure {
    fn from(e: FairError) -> Self {
        match e {
            FairError::Spn(inner) => inner.into(),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidParameter(_) => Failure::Config(e.to_string()),
            ModelError::Numerical(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<QuantileError> for Failure {
    fn from(e: QuantileError) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<SynthError> for Failure {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::InvalidSpec(_) | SynthError::InvalidQuantile(_) => Failure::Config(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Config(m) => Failure::Config(m),
            PipelineError::Data(e) => e.into(),
            PipelineError::Learn(e) => e.into(),
            PipelineError::Fair(e) => e.into(),
            PipelineError::Model(e) => e.into(),
            PipelineError::Metric(e) => Failure::Data(e.to_string()),
            PipelineError::Quantile(e) => e.into(),
        }
    }
}

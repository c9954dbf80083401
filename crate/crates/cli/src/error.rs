use darkwatch_core::cnn::CnnError;
use darkwatch_core::corpus::CorpusError;
use darkwatch_core::dataset::DatasetError;
use darkwatch_core::eda::EdaError;
use darkwatch_core::imaging::ImageError;
use darkwatch_core::linear::LinearError;
use darkwatch_core::metrics::MetricsError;
use darkwatch_core::pipeline::PipelineError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Divergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Divergence(_) => 3,
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError::Data(format!("{}: {err}", path.display()))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::BadRatio(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<EdaError> for CliError {
    fn from(e: EdaError) -> Self {
        match e {
            EdaError::BadBinCount(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<LinearError> for CliError {
    fn from(e: LinearError) -> Self {
        match e {
            LinearError::DivergenceDetected { .. } => CliError::Divergence(e.to_string()),
            LinearError::BadConfig(_) | LinearError::UnknownModel(..) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ImageError> for CliError {
    fn from(e: ImageError) -> Self {
        match e {
            ImageError::UnknownFilter(_)
            | ImageError::BadRadius(_)
            | ImageError::BadSigma(_)
            | ImageError::BadHogParams(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<CnnError> for CliError {
    fn from(e: CnnError) -> Self {
        match e {
            CnnError::DivergenceDetected { .. } => CliError::Divergence(e.to_string()),
            CnnError::BadConfig(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Image(e) => e.into(),
            PipelineError::Cnn(e) => e.into(),
            PipelineError::Linear(e) => e.into(),
            PipelineError::UnknownMode(..) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

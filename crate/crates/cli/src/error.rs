use std::fmt;

use vtspot_core::annotations::AnnotationError;
use vtspot_core::matching::MatchingError;
use vtspot_core::metrics::MetricsError;
use vtspot_core::synth::SynthError;
use vtspot_core::tracker::TrackError;

/// A failure together with the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or option values: exit 1.
    Usage(String),
    /// Unreadable or malformed input, unwritable output: exit 2.
    Schema(String),
    /// Inputs that parse but do not fit together: exit 3.
    Semantic(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 1,
            Self::Schema(_) => 2,
            Self::Semantic(_) => 3,
        }
    }

    pub fn context(self, what: impl fmt::Display) -> Self {
        match self {
            Self::Usage(m) => Self::Usage(format!("{what}: {m}")),
            Self::Schema(m) => Self::Schema(format!("{what}: {m}")),
            Self::Semantic(m) => Self::Semantic(format!("{what}: {m}")),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Schema(m) => write!(f, "input error: {m}"),
            Self::Semantic(m) => write!(f, "mismatch: {m}"),
        }
    }
}

impl From<AnnotationError> for CliError {
    fn from(e: AnnotationError) -> Self {
        match e {
            AnnotationError::CornerCorrespondence { .. } => Self::Semantic(e.to_string()),
            AnnotationError::InvalidSamplingStep(_) => Self::Usage(e.to_string()),
            _ => Self::Schema(e.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::VideoMismatch(_) | MetricsError::Matching(_) => Self::Semantic(e.to_string()),
            MetricsError::MissingTranscription { .. } => Self::Schema(e.to_string()),
            MetricsError::EmptyInput | MetricsError::InvalidOption(_) => Self::Usage(e.to_string()),
        }
    }
}

impl From<TrackError> for CliError {
    fn from(e: TrackError) -> Self {
        match e {
            TrackError::NonMonotonicFrame { .. } => Self::Schema(e.to_string()),
            TrackError::InvalidConfig(_) => Self::Usage(e.to_string()),
            TrackError::Matching(_) => Self::Semantic(e.to_string()),
        }
    }
}

impl From<MatchingError> for CliError {
    fn from(e: MatchingError) -> Self {
        match e {
            MatchingError::InvalidWeight { .. } => Self::Usage(e.to_string()),
            _ => Self::Semantic(e.to_string()),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        Self::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Schema(e.to_string())
    }
}

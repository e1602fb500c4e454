use std::fmt;
use std::process::ExitCode;

use rankgauge::analysis::AnalysisError;
use rankgauge::ingest::IngestError;
use rankgauge::metrics::MetricsError;
use rankgauge::selection::SelectionError;
use rankgauge::spectrum::SpectrumError;
use rankgauge::Error;

/// Process exit status classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    /// Unreadable or malformed input, or a violated precondition.
    Input = 1,
    /// Numerical failure while computing a spectrum or fit.
    Numeric = 2,
    /// A run lacks the score the selection strategy needs.
    MissingScore = 3,
}

impl From<ExitClass> for ExitCode {
    fn from(c: ExitClass) -> Self {
        ExitCode::from(c as u8)
    }
}

#[derive(Debug)]
pub struct CliError {
    pub class: ExitClass,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            class: ExitClass::Input,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn spectrum_class(e: &SpectrumError) -> ExitClass {
    match e {
        SpectrumError::ConvergenceFailure { .. } | SpectrumError::InvalidSpectrum(_) => ExitClass::Numeric,
        SpectrumError::TooFewRows(_) => ExitClass::Input,
    }
}

fn classify(e: &Error) -> ExitClass {
    match e {
        Error::Ingest(_) => ExitClass::Input,
        Error::Spectrum(s) | Error::Analysis(AnalysisError::Spectrum(s)) => spectrum_class(s),
        Error::Metrics(MetricsError::InvalidFitRange(_)) => ExitClass::Input,
        Error::Metrics(_) => ExitClass::Numeric,
        Error::Selection(SelectionError::MissingRank(_) | SelectionError::MissingAlpha(_)) => {
            ExitClass::MissingScore
        }
        Error::Selection(_) | Error::Analysis(_) => ExitClass::Input,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self {
            class: classify(&e),
            message: e.to_string(),
        }
    }
}

macro_rules! via_library_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                Error::from(e).into()
            }
        }
    )*};
}

via_library_error!(IngestError, SpectrumError, MetricsError, SelectionError, AnalysisError);

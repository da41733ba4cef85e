use std::fmt;

use mbqs_core::Error;

/// Process exit codes.
pub mod code {
    pub const IO: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const FORMAT: u8 = 3;
    pub const RESOURCE: u8 = 4;
    pub const NUMERICAL: u8 = 5;
    pub const UNSUPPORTED: u8 = 6;
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: code::USAGE,
            message: message.into(),
        }
    }

    pub fn format(message: impl Into<String>) -> Self {
        CliError {
            code: code::FORMAT,
            message: message.into(),
        }
    }

    /// Failure while reading an input file: I/O and parse errors both count
    /// as bad input.
    pub fn input(path: &std::path::Path, err: Error) -> Self {
        let mut e = CliError::from(err);
        if e.code == code::IO {
            e.code = code::FORMAT;
        }
        e.message = format!("{}: {}", path.display(), e.message);
        e
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = match &err {
            Error::Argument(_) => code::USAGE,
            Error::Format(_) | Error::Json(_) | Error::Csv(_) => code::FORMAT,
            Error::Resource(_) => code::RESOURCE,
            Error::Unsupported(_) => code::UNSUPPORTED,
            Error::Io(_) => code::IO,
            Error::Domain(_)
            | Error::PfaffianBreakdown { .. }
            | Error::PeakDetection { .. }
            | Error::Regression(_)
            | Error::Estimation { .. }
            | Error::Integration(_)
            | Error::ChannelNotInvertible(_)
            | Error::DivisionGuard { .. } => code::NUMERICAL,
        };
        CliError {
            code,
            message: err.to_string(),
        }
    }
}

use std::fmt;

/// Exit status classes of the binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Bad flags, recipes, paths or inputs.
    Validation,
    /// I/O failures and numerical breakdowns.
    Runtime,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub stage: Option<String>,
    pub message: String,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            kind: Kind::Validation,
            stage: None,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        CliError {
            kind: Kind::Runtime,
            stage: None,
            message: message.into(),
        }
    }

    pub fn in_stage(mut self, stage: impl Into<String>) -> Self {
        self.stage.get_or_insert_with(|| stage.into());
        self
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            Kind::Validation => 2,
            Kind::Runtime => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.stage {
            Some(stage) => write!(f, "stage `{stage}`: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl From<gsd_core::Error> for CliError {
    fn from(e: gsd_core::Error) -> Self {
        let runtime = e.is_numeric() || matches!(e, gsd_core::Error::Io { .. });
        let message = e.to_string();
        if runtime {
            CliError::runtime(message)
        } else {
            CliError::validation(message)
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::validation(format!("json: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::validation(format!("csv: {e}"))
    }
}

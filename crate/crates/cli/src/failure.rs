use thiserror::Error;

/// Why a command stopped, mapped onto the exit code.
#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] expfun::Error),
    #[error("{0}")]
    Validation(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Core(e) if e.is_config_error() => 2,
            Failure::Core(_) => 3,
            Failure::Validation(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Failure::Config(_) => "config",
            Failure::Core(e) => e.kind(),
            Failure::Validation(_) => "validation_failed",
        }
    }

    /// `error: kind=<kind> message="<text>"`, quotes and newlines escaped.
    pub fn line(&self) -> String {
        let msg = self
            .to_string()
            .replace('\\', "\\\\")
            .replace('"', "\\\"")
            .replace('\n', "\\n");
        format!("error: kind={} message=\"{}\"", self.kind(), msg)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(e.into())
    }
}

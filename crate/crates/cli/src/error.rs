use latticeport::ErrorClass;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Run(#[from] latticeport::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(e) => match e.class() {
                ErrorClass::Physics => 3,
                ErrorClass::Numerical => 4,
                ErrorClass::Io => 1,
            },
            CliError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            3 => "physics",
            4 => "numerical",
            _ => "io",
        }
    }

    /// `error kind=<kind>: <message>` on one line.
    pub fn line(&self) -> String {
        let message = self.to_string().split_whitespace().collect::<Vec<_>>().join(" ");
        format!("error kind={}: {message}", self.kind())
    }
}

//! JSON schemas and errors of the `multipole` command line tool.

pub mod json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Core(#[from] multipole::Error),
}

impl CliError {
    /// 2 for bad input, 3 when `Q` divides the polynomial, 4 for other numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Core(multipole::Error::DivisibleByQ) => 3,
            CliError::Core(_) => 4,
        }
    }
}

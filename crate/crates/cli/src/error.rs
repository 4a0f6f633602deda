use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },

    #[error(transparent)]
    Core(#[from] qrom_core::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("output: {0}")]
    Output(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// 0 ok, 2 config, 3 cap, 4 numeric, 5 internal.
    pub fn exit_code(&self) -> u8 {
        use qrom_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::ChecksFailed { .. } => 4,
            CliError::Core(e) => match e {
                E::CapExceeded { .. } => 3,
                E::EigensolverFailure
                | E::ZeroMean
                | E::ZeroSuccess
                | E::DegenerateEigenvalue(_)
                | E::NeverAccepts
                | E::NotUnitary(_) => 4,
                E::Io(_) | E::Csv(_) => 5,
                _ => 2,
            },
            CliError::Io(_) | CliError::Output(_) => 5,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_classes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(qrom_core::Error::CapExceeded { requested: 9, cap: 1 }).exit_code(), 3);
        assert_eq!(CliError::Core(qrom_core::Error::EigensolverFailure).exit_code(), 4);
        assert_eq!(CliError::ChecksFailed { failed: 1, total: 10 }.exit_code(), 4);
        assert_eq!(CliError::Output("disk".into()).exit_code(), 5);
    }
}

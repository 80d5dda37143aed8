use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("simulation diverged: {0}")]
    Diverged(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Diverged(_) => 4,
            CliError::Failed(_) => 1,
        }
    }
}

impl From<sotneuron::Error> for CliError {
    fn from(e: sotneuron::Error) -> Self {
        use sotneuron::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidGeometry(_) | E::InvalidParameter(_) | E::Calibration(_) | E::Toml(_) => CliError::Config(msg),
            E::Io(_) | E::Format(_) | E::Dataset(_) | E::Json(_) => CliError::Io(msg),
            E::Diverged { .. } => CliError::Diverged(msg),
            _ => CliError::Failed(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_distinct_per_failure_class() {
        let code = |e: sotneuron::Error| CliError::from(e).exit_code();
        assert_eq!(code(sotneuron::Error::InvalidParameter("x".into())), 2);
        assert_eq!(code(sotneuron::Error::Calibration("x".into())), 2);
        assert_eq!(code(sotneuron::Error::Dataset("x".into())), 3);
        assert_eq!(code(sotneuron::Error::Format("x".into())), 3);
        assert_eq!(code(sotneuron::Error::Diverged { step: 1, time: 0.0 }), 4);
        assert_eq!(code(sotneuron::Error::Training("x".into())), 1);
    }
}

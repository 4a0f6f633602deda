use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("enumeration of {requested} items exceeds the configured cap of {cap}")]
    CapExceeded { requested: u128, cap: u128 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("salt {salt} out of range for salt space of size {salts}")]
    SaltOutOfRange { salt: usize, salts: usize },

    #[error("coin {coin} out of range for coin space of size {coins}")]
    CoinOutOfRange { coin: usize, coins: usize },

    #[error("answer {answer} out of range for answer space of size {answers}")]
    AnswerOutOfRange { answer: usize, answers: usize },

    #[error("strategy has no program for challenge {0} and no default program")]
    UnknownChallenge(usize),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("invalid register layout: {0}")]
    InvalidLayout(String),

    #[error("invalid oracle table: {0}")]
    InvalidOracle(String),

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("advice: {0}")]
    InvalidAdvice(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("missing parameter `{0}`")]
    MissingParam(&'static str),

    #[error("Hermitian eigensolver did not converge")]
    EigensolverFailure,

    #[error("weighted mean is zero; ratio undefined")]
    ZeroMean,

    #[error("round-one success probability is zero")]
    ZeroSuccess,

    #[error("eigenvalue {0} is degenerate for this construction")]
    DegenerateEigenvalue(f64),

    #[error("bit-fixing prefix never accepts")]
    NeverAccepts,

    #[error("prefix built from {0} alternating rounds; the reduction needs an odd round count k")]
    EvenRounds(usize),

    #[error("empty gamma grid")]
    EmptyGrid,

    #[error("unknown game selector `{0}`")]
    UnknownGame(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

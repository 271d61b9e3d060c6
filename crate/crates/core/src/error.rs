use crate::formula::Var;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("variable {var} out of range (declared {nvars} variables)")]
    VarOutOfRange { var: i64, nvars: u32 },

    #[error("variable {0} is declared both as input and as output")]
    OverlappingIo(Var),

    #[error("variable {0} occurs in a clause but is neither an input nor an output")]
    UndeclaredVar(Var),

    #[error("missing {0} declaration")]
    MissingDeclaration(&'static str),

    #[error("unknown variable {0}")]
    UnknownVariable(Var),

    #[error("contradictory literals on variable {0}")]
    ContradictoryLiterals(Var),

    #[error("{what} too large: {size} exceeds the limit of {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    /// A satisfiable branch left an output unassigned, so two solutions share
    /// their inputs.
    #[error("not a circuit formula: output {var} is unconstrained in a satisfiable branch")]
    CircuitViolation { var: Var },

    #[error("variable {0} is missing from the elimination order")]
    MissingFromOrder(Var),

    #[error("no output variable to branch on")]
    NoOutputVariable,

    #[error("time limit exceeded")]
    Timeout,

    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),

    #[error("invalid trace: {0}")]
    InvalidTrace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("duplicate index {0}")]
    DuplicateIndex(usize),
    #[error("value {value} at index {index} is outside 1..={k}")]
    ValueOutOfRange { index: usize, value: u32, k: u32 },
    #[error("zero value stored at index {0}")]
    ZeroValue(usize),
    #[error("empty support")]
    EmptySupport,
    #[error("overlapping supports at index {0}")]
    OverlappingSupport(usize),
    #[error("k must be positive")]
    ZeroK,
    #[error("{elem} is not in FIN_{k}")]
    NotFinK { elem: String, k: u32 },
    #[error("block sequence is not increasing at position {0}")]
    NotIncreasing(usize),
    #[error("code position {index} out of range for a block sequence of length {len}")]
    CodeOutOfRange { index: usize, len: usize },
    #[error("{0} is not in the span")]
    NotInSpan(String),
    #[error("tetris image needs k >= 2, got k = {0}")]
    AmbientTooSmall(u32),
    #[error("ambient mismatch: expected FIN_{expected}, found FIN_{found}")]
    AmbientMismatch { expected: u32, found: u32 },
    #[error("expected even length, got {0}")]
    OddLength(usize),
    #[error("({i},{j}) is not in Comb_{k}")]
    NotComb { i: u32, j: u32, k: u32 },
    #[error("horizon {len} exceeds the block sequence length {available}")]
    HorizonTooLong { len: usize, available: usize },
    #[error("enumeration cap of {0} exceeded")]
    CapExceeded(u64),
    #[error("search exhausted: {0}")]
    Exhausted(String),
    #[error("budget of {0} candidates exhausted")]
    BudgetExhausted(u64),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier \"{name}\" at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("builtin {0} is undefined on the null function")]
    EmptySupportBuiltin(&'static str),
    #[error("modulo by zero")]
    ModuloByZero,
    #[error("arithmetic overflow")]
    Overflow,
    #[error("malformed literal: {0}")]
    Literal(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

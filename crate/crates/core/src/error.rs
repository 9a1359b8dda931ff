use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An assignment has the wrong arity or holds a symbol outside a register's alphabet.
    AlphabetMismatch { register: String, symbol: String },
    NonHermitianBlock { deviation: f64 },
    NegativeBlock { min_eigenvalue: f64 },
    TraceExceedsOne { trace: f64 },
    UnknownRegister(String),
    UnknownValue { register: String, value: String },
    DuplicateRegister(String),
    /// Empty alphabet, repeated symbols, or a bit width over 64.
    InvalidRegister(String),
    DimensionMismatch { expected: usize, found: usize },
    EveDimOutOfRange(usize),
    MixedAbortTerm,
    /// Key registers handed to an ideal-state construction disagree on their key alphabet.
    KeyAlphabetMismatch,
    NoConvergence { sweeps: usize, residual: f64 },
    ShapeMismatch,
    AbortSymbolPresent(String),
    NonDiagonalEve { off_diagonal: f64 },
    LengthMismatch { expected: usize, found: usize },
    FamilyTooLarge { seed_bits: usize },
    EqualInputs,
    OutOfRange(&'static str),
    InvalidHashShape { n_in: usize, n_out: usize },
    KeyLengthNonpositive { key_length: i64 },
    NoDisagreementMass,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::AlphabetMismatch { register, symbol } => {
                write!(f, "symbol {symbol} is not in the alphabet of register {register}")
            }
            Error::NonHermitianBlock { deviation } => {
                write!(f, "block is not Hermitian (max deviation {deviation:e})")
            }
            Error::NegativeBlock { min_eigenvalue } => {
                write!(f, "block is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")
            }
            Error::TraceExceedsOne { trace } => write!(f, "total trace {trace} exceeds 1"),
            Error::UnknownRegister(name) => write!(f, "unknown register {name}"),
            Error::UnknownValue { register, value } => {
                write!(f, "value {value} is not in the alphabet of register {register}")
            }
            Error::DuplicateRegister(name) => write!(f, "register {name} already exists"),
            Error::InvalidRegister(msg) => write!(f, "invalid register: {msg}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "block dimension {found} does not match Eve dimension {expected}")
            }
            Error::EveDimOutOfRange(d) => write!(f, "Eve dimension {d} outside 1..=64"),
            Error::MixedAbortTerm => {
                write!(f, "a term has some but not all key registers set to the abort symbol")
            }
            Error::KeyAlphabetMismatch => write!(f, "key registers have different key alphabets"),
            Error::NoConvergence { sweeps, residual } => {
                write!(f, "eigensolver did not converge after {sweeps} sweeps (residual {residual:e})")
            }
            Error::ShapeMismatch => write!(f, "states have different registers or Eve dimension"),
            Error::AbortSymbolPresent(reg) => write!(f, "register {reg} holds the abort symbol"),
            Error::NonDiagonalEve { off_diagonal } => write!(
                f,
                "Eve block has off-diagonal magnitude {off_diagonal:e}; quantum side information is not supported"
            ),
            Error::LengthMismatch { expected, found } => {
                write!(f, "expected {expected} bits, found {found}")
            }
            Error::FamilyTooLarge { seed_bits } => {
                write!(f, "hash family with {seed_bits} seed bits exceeds the enumeration cap of 20")
            }
            Error::EqualInputs => write!(f, "collision fraction needs distinct inputs"),
            Error::OutOfRange(what) => write!(f, "{what} out of range"),
            Error::InvalidHashShape { n_in, n_out } => {
                write!(f, "invalid hash shape n_in={n_in}, n_out={n_out} (need 1 <= n_out <= n_in <= 64)")
            }
            Error::KeyLengthNonpositive { key_length } => {
                write!(f, "final key length {key_length} is not positive")
            }
            Error::NoDisagreementMass => write!(f, "Pr[A != B] is zero"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

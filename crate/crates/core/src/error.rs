use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a channel needs at least one user")]
    NoUsers,
    #[error("power of user {user} must be positive and finite, got {value}")]
    InvalidPower { user: usize, value: f64 },
    #[error("noise must be positive and finite, got {0}")]
    InvalidNoise(f64),
    #[error("expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("entry {index} must be nonnegative and finite, got {value}")]
    InvalidRate { index: usize, value: f64 },
    #[error("{what} is limited to {cap} users, got {users}")]
    TooManyUsers {
        what: &'static str,
        users: usize,
        cap: usize,
    },
    #[error("subset must be nonempty")]
    EmptySubset,
    #[error("user index {index} out of range for {users} users")]
    IndexOutOfRange { index: usize, users: usize },
    #[error("duplicate user index {0}")]
    DuplicateIndex(usize),
    #[error("order is not a permutation of {0} users")]
    InvalidPermutation(usize),
    #[error("domain error: {0}")]
    Domain(String),
}

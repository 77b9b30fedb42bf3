use thiserror::Error;

/// Errors produced while parsing inputs or constructing phylogenetic objects.
#[derive(Debug, Error)]
pub enum Error {
    /// Newick input is malformed; `offset` is the byte position of the first
    /// offending character.
    #[error("newick parse error at byte {offset}: {message}")]
    NewickParse { offset: usize, message: String },

    /// Character input (csv or sets form) is malformed at the given 1-based line.
    #[error("character input error at line {line}: {message}")]
    MatrixFormat { line: usize, message: String },

    /// Structured network input is malformed at the given 1-based line.
    #[error("network input error at line {line}: {message}")]
    NetworkFormat { line: usize, message: String },

    /// A label was used that is not present in the taxa registry.
    #[error("unknown taxon `{0}`")]
    UnknownTaxon(String),

    /// A label was registered twice where uniqueness is required.
    #[error("duplicate taxon `{0}`")]
    DuplicateTaxon(String),

    /// Characters must contain at least one taxon.
    #[error("character `{0}` has no members")]
    EmptyCharacter(String),

    /// A tree violated a structural requirement.
    #[error("invalid tree: {0}")]
    InvalidTree(String),

    /// A network violated a structural requirement.
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

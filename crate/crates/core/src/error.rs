use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("angular momentum: {0}")]
    AngularMomentum(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("isotope `{name}` is missing `{field}`, which this operation needs")]
    IncompleteIsotope { name: String, field: &'static str },

    #[error("unknown isotope `{0}`")]
    UnknownIsotope(String),

    #[error("isotope table: {0}")]
    Database(String),

    #[error("time grid: {0}")]
    Grid(String),

    #[error("time resolution too coarse: {0}")]
    Resolution(String),

    #[error("numerical instability: {0}")]
    Unstable(String),

    #[error("spectral grid: {0}")]
    SpectralGrid(String),

    #[error("analysis window: {0}")]
    Window(String),

    #[error("sweep plan: {0}")]
    Plan(String),
}

pub type Result<T> = std::result::Result<T, Error>;

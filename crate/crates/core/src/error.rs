use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A†| = {residue:.3e})")]
    NotHermitian { residue: f64 },
    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid noise model: {0}")]
    InvalidModel(String),
    #[error("closed form left an imaginary residue of {residue:.3e} in coefficient `{name}`")]
    NonRealResult { name: &'static str, residue: f64 },
    #[error("Kraus probability p{index} = {value:.3e} is negative")]
    NegativeProbability { index: usize, value: f64 },
    #[error("{name} = {value} is outside {range}")]
    OutOfRange { name: &'static str, value: f64, range: &'static str },
    #[error("{n} qubits exceeds the dense-matrix limit of {max}")]
    TooLarge { n: usize, max: usize },
    #[error("parity derivative {derivative:.3e} vanishes; precision diverges at t = {t}")]
    DivergentPrecision { t: f64, derivative: f64 },
    #[error("noiseless model has no interior optimum in t")]
    NoInteriorMinimum,
    #[error("quantum Fisher information is zero at t = {t}")]
    ZeroInformation { t: f64 },
    #[error("need at least 3 points in window, found {found}")]
    InsufficientPoints { found: usize },
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("invalid frequency range [{0}, {1}]")]
    InvalidRange(f64, f64),
    #[error("node count {0} must be even and at least 4")]
    OddN(usize),
    #[error("left and right nodes collide near {0}")]
    NodeCollision(f64),
    #[error("rules or samples are not closed under conjugation")]
    NotConjugateClosed,
    #[error("system is not square")]
    NonSquareSystem,

    #[error("sI - A is singular at s = {0}{1:+}i")]
    SingularResolvent(f64, f64),
    #[error("feedthrough matrix is singular")]
    SingularFeedthrough,
    #[error("D is singular")]
    SingularD,
    #[error("eigenvalue on or too close to the imaginary axis")]
    ImaginaryAxisEigenvalue,
    #[error("system is unstable (spectral abscissa {0:.3e})")]
    UnstableSystem(f64),
    #[error("A is not stable (spectral abscissa {0:.3e})")]
    UnstableA(f64),
    #[error("Sylvester separation below pivot threshold")]
    IllConditionedSeparation,
    #[error("no stabilizing solution: {0}")]
    NoStabilizingSolution(String),
    #[error("R is not positive definite")]
    IndefiniteR,
    #[error("system is not strictly positive real: {0}")]
    NotPositiveReal(String),
    #[error("system is not strictly bounded real: {0}")]
    NotBoundedReal(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("imaginary residue {0:.3e} exceeds threshold")]
    ResidualImaginary(f64),
    #[error("sigma_r and sigma_(r+1) are not separated at r = {0}")]
    DegenerateGap(usize),
    #[error("order {r} exceeds numerical rank {rank}")]
    RankDeficient { r: usize, rank: usize },
    #[error("LAPACK {routine} returned info = {info}")]
    Lapack { routine: &'static str, info: i32 },
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of the numerics on well-formed input.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::DimensionMismatch(_)
                | Error::NonFinite(_)
                | Error::InvalidInput(_)
                | Error::InvalidSpec(_)
                | Error::InvalidRange(..)
                | Error::OddN(_)
                | Error::NodeCollision(_)
                | Error::NotConjugateClosed
                | Error::NonSquareSystem
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidInput(e.to_string())
    }
}

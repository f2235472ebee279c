use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Variants are grouped by the exit-code class the CLI maps them to:
/// input errors (bad parameters, unstable couplings) and numerical failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("unstable coupling: |alpha| = {alpha} (needs |kappa| < m*omega0^2)")]
    UnstableSystem { alpha: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate spectrum: min |lambda_i - lambda_j| = {min_gap:e} below {threshold:e}")]
    DegenerateSpectrum { min_gap: f64, threshold: f64 },

    #[error("singular eigenvector normalization: {0}")]
    SingularNormalization(String),

    #[error("imaginary residue {residue:e} in coefficient {name} exceeds tolerance")]
    ImaginaryResidue { name: &'static str, residue: f64 },

    #[error("Gaussian exponent is not normalizable: {name} = {value:e}")]
    NonNormalizable { name: &'static str, value: f64 },

    #[error("eigenvalues of -sigma*G*sigma*G do not pair up: {0:?}")]
    UnpairedSpectrum([f64; 4]),

    #[error("non-positive eigenvalue of -sigma*G*sigma*G: {re:e} + {im:e}i")]
    NonPositive { re: f64, im: f64 },

    #[error("non-physical state: symplectic eigenvalue {nu} < 1")]
    NonPhysical { nu: f64 },

    #[error("steady-state closed form differs from the Lyapunov solution in {moment} (relative deviation {deviation:e})")]
    ClosedFormMismatch { moment: String, deviation: f64 },

    #[error("drift matrix is not Hurwitz: max Re(eigenvalue) = {max_re:e}")]
    NotHurwitz { max_re: f64 },

    #[error("step size {dt:e} below the 1e-12 floor")]
    StepSizeUnderflow { dt: f64 },

    #[error("eigenvalue iteration did not converge in {iterations} steps")]
    NoConvergence { iterations: usize },

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    /// Short variant name, used to mark failed rows and sweep cells.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Config { .. } => "Config",
            Error::UnstableSystem { .. } => "UnstableSystem",
            Error::Domain(_) => "Domain",
            Error::DegenerateSpectrum { .. } => "DegenerateSpectrum",
            Error::SingularNormalization(_) => "SingularNormalization",
            Error::ImaginaryResidue { .. } => "ImaginaryResidue",
            Error::NonNormalizable { .. } => "NonNormalizable",
            Error::UnpairedSpectrum(_) => "UnpairedSpectrum",
            Error::NonPositive { .. } => "NonPositive",
            Error::NonPhysical { .. } => "NonPhysical",
            Error::ClosedFormMismatch { .. } => "ClosedFormMismatch",
            Error::NotHurwitz { .. } => "NotHurwitz",
            Error::StepSizeUnderflow { .. } => "StepSizeUnderflow",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::Singular(_) => "Singular",
            Error::Io(_) => "Io",
        }
    }

    /// True for errors caused by the caller's input rather than by numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::Config { .. }
                | Error::UnstableSystem { .. }
                | Error::Domain(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinError {
    #[error("parameter {0} is not finite")]
    NonFiniteParam(&'static str),
    #[error("singular geometry: r = {0} nm")]
    SingularGeometry(f64),
    #[error("polar angle {0} rad outside [0, π]")]
    AngleOutOfRange(f64),
    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("operator is not unitary (‖U†U − I‖ = {0:e})")]
    NotUnitary(f64),
    #[error("density matrix trace {0} ≠ 1")]
    BadTrace(f64),
    #[error("density matrix has eigenvalue {0:e} < 0")]
    NegativeEigenvalue(f64),
    #[error("evolution time {0} µs must be finite and non-negative")]
    NegativeTime(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PulseError {
    #[error(transparent)]
    Spin(#[from] SpinError),
    #[error("sequence has {0} readout markers; expected 1 or 2")]
    ReadoutCount(usize),
    #[error("invalid pulse: {0}")]
    InvalidPulse(String),
    #[error("contrast undefined: y1 + y2 = 0")]
    UndefinedContrast,
    #[error("contrast needs two readouts")]
    MissingSecondReadout,
    #[error("decay time must be positive, got {0}")]
    BadDecayTime(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("length mismatch: {0} axis points, {1} values")]
    LengthMismatch(usize, usize),
    #[error("axis is not strictly increasing")]
    NotIncreasing,
    #[error("time grid is not uniform")]
    NonUniform,
    #[error("need at least {0} samples")]
    TooShort(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Spin(#[from] SpinError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("Nyquist violation: step {step} µs needs < {limit} µs")]
    Nyquist { step: f64, limit: f64 },
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("degenerate spectrum: Δ₁Δ₂ = 0")]
    DegenerateSpectrum,
    #[error("pulse error undefined for δ = Ω = 0")]
    ZeroDrive,
    #[error("no real solution: {0}")]
    NoRealSolution(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("found {found} peaks, need {needed}")]
    NotEnoughPeaks { found: usize, needed: usize },
    #[error("singular normal equations")]
    Singular,
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("parse: {0}")]
    Parse(String),
    #[error(transparent)]
    Signal(#[from] SignalError),
}

/// Umbrella error for callers that mix modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Spin(#[from] SpinError),
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Io(#[from] IoError),
}

use crate::C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not diagonalizable within threshold (condition {cond:e})")]
    NonDiagonalizable { cond: f64 },
    #[error("argument {z} is within the guard radius of a pole")]
    PoleHit { z: C64 },
    #[error("group element is singular")]
    SingularValue,
    #[error("finite-difference step {step:e} is too large")]
    FdStepTooLarge { step: f64 },
    #[error("A0 is not regular diagonal (margin {margin:e})")]
    DegenerateA0 { margin: f64 },
    #[error("base direction {angle} lies on a Stokes ray")]
    BaseOnRay { angle: f64 },
    #[error("asymptotic seed cannot reach tolerance (first omitted term {term:e})")]
    SeedAccuracy { term: f64 },
    #[error("integrator failure: {0}")]
    IntegratorFailure(String),
    #[error("residue is resonant at order {k}")]
    Resonant { k: usize },
    #[error("Stokes matrix off-structure magnitude {magnitude:e}")]
    TriangularityViolation { magnitude: f64 },
    #[error("G* membership residual {residual:e}")]
    MembershipViolation { residual: f64 },
    #[error("matrix is outside the big cell")]
    OutsideBigCell,
    #[error("eigenvalue on or near the principal log branch cut")]
    LogBranch,
    #[error("constraint violated (residual {residual:e})")]
    ConstraintViolation { residual: f64 },
    #[error("lambda is not in t' (margin {margin:e})")]
    TPrimeViolation { margin: f64 },
    #[error("unsupported pole order {0}")]
    UnsupportedOrder(usize),
    #[error("pair is not composable")]
    NotComposable,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

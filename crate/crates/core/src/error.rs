use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {0:.3e})")]
    NonHermitian(f64),
    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("matrix is not positive definite (smallest eigenvalue {0:.3e})")]
    NotPd(f64),
    #[error("operator norm {0:.12} exceeds 1")]
    NotContraction(f64),
    #[error("-1 lies in the spectrum (smallest singular value of I + A is {0:.3e})")]
    SingularShift(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry in input")]
    NonFinite,
    #[error("angle {0} outside [0, pi/2]")]
    InvalidAngle(f64),
    #[error("quadratic inequality has no solution")]
    Infeasible,
    #[error("kernels of the two radii differ")]
    KernelMismatch,
    #[error("hole shift is inconsistent with the radii")]
    InconsistentHole,
    #[error("blocks do not form a dual pair of contractions")]
    NotDualPairContractions,
    #[error("factorization residual {0:.3e} too large")]
    FactorInconsistent(f64),
    #[error("corner blocks of T do not match the pair")]
    BlockMismatch,
    #[error("t11 is not Hermitian")]
    NotSymmetricPair,
    #[error("pair is not proper (t12 != t21*)")]
    NotProperPair,
    #[error("column is not symmetric (t11 not Hermitian)")]
    NotSymmetricColumn,
    #[error("angle {phi} is below the critical angle {phi1}")]
    BelowCriticalAngle { phi: f64, phi1: f64 },
    #[error("Q is inconsistent: only the pi/2 class is reachable")]
    InconsistentQ,
    #[error("column fails the C(phi) condition")]
    NotInPhiZeroClass,
    #[error("K is not in the loone L(Q; phi)")]
    NotInLoone,
    #[error("matrix is not in C(phi)")]
    NotInCphi,
    #[error("T_K is not in C(phi)")]
    NotInClass,
    #[error("H11 is not positive semidefinite")]
    H11NotPsd,
    #[error("off-diagonal block is not in the range of the root of H11")]
    RangeViolation,
    #[error("Shmul'yan factors are inconsistent")]
    FactorsInconsistent,
}

pub type Result<T> = std::result::Result<T, Error>;

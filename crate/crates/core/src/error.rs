use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Every failure the simulator and controllers can report.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// `vee` was handed a matrix whose symmetric part exceeds the tolerance.
    NotSkewSymmetric { asymmetry: f64 },
    /// Projection onto SO(3) produced a reflection or a degenerate matrix.
    NotARotation { det: f64 },
    /// An inertia tensor could not be inverted.
    SingularInertia,
    /// A matrix expected to be symmetric positive-definite is not.
    NotPositiveDefinite,
    /// The companion matrix built from the PD gains is not Hurwitz.
    NotHurwitz { k_p: f64, k_d: f64 },
    /// A computation produced NaN or infinity.
    NonFinite { what: &'static str },
    /// The requested wrench is outside the range of the allocation map.
    InfeasibleAllocation { residual: f64 },
    /// Desired tension too small to define a cable direction.
    DegenerateTension { norm: f64 },
    /// Force command too small to define a thrust axis.
    ZeroThrust { norm: f64 },
    /// Desired heading is parallel to the thrust axis.
    DegenerateHeading,
    /// Parallel/normal force components are not parallel/normal to the cable.
    ComponentMismatch { parallel_residual: f64, normal_residual: f64 },
    /// An integrator stage evaluated to a non-finite derivative.
    StageNotFinite { t: f64 },
    /// Facing-direction attitude requested while the reference is not moving.
    StationaryReference { t: f64 },
    /// A state norm exceeded the divergence bound.
    Diverged { t: f64 },
    /// Dimension or length mismatch between related inputs.
    LengthMismatch { expected: usize, found: usize },
    /// Configuration rejected at construction time.
    InvalidConfig(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotSkewSymmetric { asymmetry } => {
                write!(f, "matrix is not skew-symmetric (|S + S^T| = {asymmetry:e})")
            }
            Error::NotARotation { det } => {
                write!(f, "matrix cannot be projected onto SO(3) (det = {det})")
            }
            Error::SingularInertia => write!(f, "inertia tensor is singular"),
            Error::NotPositiveDefinite => write!(f, "matrix is not symmetric positive-definite"),
            Error::NotHurwitz { k_p, k_d } => {
                write!(f, "gains k_p = {k_p}, k_d = {k_d} do not give a Hurwitz matrix")
            }
            Error::NonFinite { what } => write!(f, "non-finite value in {what}"),
            Error::InfeasibleAllocation { residual } => {
                write!(f, "wrench is not realizable by the cables (residual {residual:e})")
            }
            Error::DegenerateTension { norm } => {
                write!(f, "desired tension norm {norm:e} is below the floor")
            }
            Error::ZeroThrust { norm } => write!(f, "force command norm {norm:e} is below the floor"),
            Error::DegenerateHeading => write!(f, "desired heading is parallel to the thrust axis"),
            Error::ComponentMismatch { parallel_residual, normal_residual } => write!(
                f,
                "force components violate cable alignment (parallel {parallel_residual:e}, normal {normal_residual:e})"
            ),
            Error::StageNotFinite { t } => write!(f, "non-finite integrator stage at t = {t}"),
            Error::StationaryReference { t } => {
                write!(f, "reference velocity vanishes at t = {t}; facing attitude undefined")
            }
            Error::Diverged { t } => write!(f, "simulation diverged at t = {t}"),
            Error::LengthMismatch { expected, found } => {
                write!(f, "length mismatch: expected {expected}, found {found}")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

use crate::C64;
use thiserror::Error;

/// Errors reported by contour, operator, quadrature and projection
/// operations. Variants mirror the failure modes of the individual
/// operations; diagnostic quantities ride along where they are cheap to
/// produce.
#[derive(Debug, Clone, Error)]
pub enum SpectralCutError {
    #[error("point {point} lies on the cycle (distance {distance:.3e} ≤ tolerance {tolerance:.3e})")]
    PointOnCycle {
        point: C64,
        distance: f64,
        tolerance: f64,
    },

    #[error("cycle is not positive: probe point {probe} has unsigned index {index}")]
    NotPositive { probe: C64, index: i32 },

    #[error("curves overlap: curve {first} and curve {second} are at distance {distance:.3e}")]
    Overlapping {
        first: usize,
        second: usize,
        distance: f64,
    },

    #[error("interiors of the cycles are not disjoint: {detail}")]
    InteriorsOverlap { detail: String },

    #[error("all grid cells are marked; the exterior would be empty")]
    AllMarked,

    #[error("no grid cell is marked; the interior would be empty")]
    NoneMarked,

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("dimension mismatch: operator dimension {expected}, argument dimension {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("resolvent is singular at z = {z}: distance {distance:.3e} to the spectrum")]
    SingularResolvent { z: C64, distance: f64 },

    #[error("eigenvalue {eigenvalue} lies within {distance:.3e} of the region boundary")]
    BoundaryEigenvalue { eigenvalue: C64, distance: f64 },

    #[error("eigenvalue {eigenvalue} lies on the contour (distance {distance:.3e})")]
    EigenvalueOnContour { eigenvalue: C64, distance: f64 },

    #[error("quadrature diverged: {detail}")]
    QuadratureDiverged { detail: String },

    #[error("integrand evaluation failed at z = {z}: {detail}")]
    EvaluationFailure { z: C64, detail: String },

    #[error(
        "resolvent is not integrable near {point}: fitted growth exponent {exponent:.3} ≥ 0.95"
    )]
    NonIntegrableResolvent { point: C64, exponent: f64 },

    #[error("projection product is not zero: ‖P₁P₂‖ = {norm:.3e}")]
    ProductNotZero { norm: f64 },

    #[error("intersection cycle has empty interior")]
    EmptyIntersection,

    #[error("spectrum misses the intersection: {detail}")]
    SpectrumMissesIntersection { detail: String },

    #[error("function domain is too small: {detail}")]
    DomainTooSmall { detail: String },

    #[error("domain violation at z = {z}")]
    DomainViolation { z: C64 },

    #[error("expression parse error: {0}")]
    ExprParse(String),

    #[error("coordinate {x} lies on an eigenvalue line (minimum distance {distance:.3e})")]
    OnEigenvalueLine { x: f64, distance: f64 },

    #[error("z = {z} hits a pole of the kernel (distance {distance:.3e})")]
    PoleHit { z: C64, distance: f64 },

    #[error("I + YX is numerically singular at z = {z} (condition estimate {cond:.3e})")]
    SingularM { z: C64, cond: f64 },

    #[error("curve is not appropriate: {detail}")]
    NotAppropriateCurve { detail: String },

    #[error("only {found} candidate coordinates pass the cap; {needed} are required")]
    InsufficientCandidates { found: usize, needed: usize },

    #[error("cover does not admit the shrunk separation: {detail}")]
    CoverTooTight { detail: String },

    #[error("cover is invalid: {detail}")]
    CoverInvalid { detail: String },

    #[error(
        "decomposability grid too coarse for mesh {required_mesh:.3e}; densest achievable mesh {achievable_mesh:.3e}"
    )]
    GridUnavailable {
        required_mesh: f64,
        achievable_mesh: f64,
    },

    #[error("line Re/Im = {line} passes within {distance:.3e} of eigenvalue {eigenvalue}")]
    LineHitsEigenvalue {
        line: f64,
        eigenvalue: C64,
        distance: f64,
    },

    #[error("cell projections do not commute: ‖[P_v, P_h]‖ = {norm:.3e}")]
    CellProductNotCommuting { norm: f64 },

    #[error("witness integral vanished: {detail}")]
    ZeroWitness { detail: String },

    #[error("split postcondition failed: {detail}")]
    SplitPostconditionFailed { detail: String },

    #[error("eigenvalue iteration did not converge")]
    EigKoFailure,

    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, SpectralCutError>;

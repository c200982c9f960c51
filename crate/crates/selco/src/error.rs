use thiserror::Error;

/// Errors surfaced by the synthesis and evaluation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("path parameter {alpha} outside domain [{lower}, {upper}]")]
    ParameterOutOfDomain { alpha: f64, lower: f64, upper: f64 },

    #[error("desired deformation derivative degenerates at alpha = {alpha} (norm {norm:.3e})")]
    DegenerateTangent { alpha: f64, norm: f64 },

    #[error("boundary location ({x}, {y}) does not resolve to a grid node within tolerance")]
    FixityResolution { x: f64, y: f64 },

    #[error("Poisson's ratio {nu} at or beyond the incompressible limit 0.5")]
    IncompressibleLimit { nu: f64 },

    #[error("element {element}: non-positive reference Jacobian")]
    ElementGeometry { element: usize },

    #[error("inverted deformation state{}", element.map(|e| format!(" in element {e}")).unwrap_or_default())]
    InvertedState { element: Option<usize> },

    #[error("matrix not positive definite at row {index} (pivot {pivot:.3e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("equilibrium iteration failed; last converged load fraction {last_fraction}")]
    EquilibriumFailure { last_fraction: f64 },

    #[error("static condensation failed: near-zero pivot at passive row {index} (pivot {pivot:.3e})")]
    Condensation { index: usize, pivot: f64 },

    #[error("constraint matrix rank-deficient while building the orthonormal base (step {step})")]
    DegenerateBase { step: usize },

    #[error("non-positive quadratic form {value:.3e} at stationary point {point}; tangent indefinite")]
    NonpositiveQuadraticForm { point: usize, value: f64 },

    #[error("stiffness-volume weight undefined: objective value is zero at the current densities")]
    WeightUndefined,

    #[error("linear program infeasible; violated constraint: {constraint}")]
    LpInfeasible { constraint: String },

    #[error("linear program unbounded")]
    LpUnbounded,

    #[error("tangent stiffness lost positive definiteness (lambda_1 = {lambda1:.3e}); structure buckles")]
    Buckled { lambda1: f64 },

    #[error("density field has {got} entries, problem grid expects {expected}")]
    DensityDimensionMismatch { got: usize, expected: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Numerical rank fell short of what the operation requires.
    #[error("rank-deficient: numerical rank {rank} < required {required}")]
    RankDeficient { rank: usize, required: usize },

    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),

    /// The max family has no implemented prox.
    #[error("prox unavailable for this nonsmooth part")]
    ProxUnavailable,

    /// Reference-minimizer search exhausted its budget.
    #[error("no-reference: could not certify a minimizer (best residual {best_residual:.3e})")]
    NoReference { best_residual: f64 },

    /// Inner V-space minimization of the U-Lagrangian failed to converge.
    #[error("inner-solve: V-space minimization did not converge")]
    InnerSolve,

    #[error("point off manifold: infeasibility {0:.3e}")]
    OffManifold(f64),

    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("indefinite reduced Hessian")]
    IndefiniteHessian,

    /// Active-piece gradients disagree after tangent projection.
    #[error("representative disagreement {0:.3e} (chart/activity mismatch)")]
    RepresentativeMismatch(f64),

    #[error("not a subgradient: distance {0:.3e} to the subdifferential")]
    NotASubgradient(f64),

    /// A direction that should be tangent (or in the U-space) is not.
    #[error("direction has a transverse component {0:.3e} beyond tolerance")]
    NotTangent(f64),

    #[error("empty sample set for {0}")]
    EmptySamples(&'static str),

    #[error("invalid {what}: {why}")]
    Invalid { what: &'static str, why: String },

    /// An estimator failed while evaluating a specific claim.
    #[error("claim {claim}: {source}")]
    Claim {
        claim: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn invalid(what: &'static str, why: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            why: why.into(),
        }
    }

    pub fn for_claim(self, claim: &str) -> Self {
        Error::Claim {
            claim: claim.to_string(),
            source: Box::new(self),
        }
    }
}

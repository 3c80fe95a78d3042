//! Exact subdifferential-set oracles, VU-decomposition, identifiable-manifold
//! charts, proximal-gradient solvers, and empirical estimators for the
//! regularity constants (error bound, sharpness, linear growth, slope) of
//! nonsmooth composite problems, together with automated consistency checks
//! between the ambient and on-manifold views of those constants.
//!
//! The crate is organized around desk-scale, analytically controlled problem
//! fixtures: an l1-regularized quadratic (with a degenerate variant), a finite
//! max of convex quadratics whose active set is a curved level-set manifold,
//! and a nonconvex l1 composite. Every estimate is a deterministic function of
//! a [`reglab::SamplePlan`], so reports are reproducible byte for byte.
//!
//! ```
//! use eblab_core::fixtures::fixture;
//! use eblab_core::reglab::{check_equivalences, SamplePlan, Stratification, Verdict};
//!
//! let fx = fixture("lasso2d").unwrap();
//! let plan = SamplePlan {
//!     center: fx.reference_minimizer().unwrap(),
//!     radii: vec![0.1, 0.01],
//!     per_radius_count: 100,
//!     seed: 42,
//!     stratification: Stratification {
//!         on_manifold: 0.4,
//!         off_manifold: 0.4,
//!         mixed: 0.2,
//!     },
//! };
//! let report = check_equivalences(&fx, 1.0, &plan).unwrap();
//! assert!(report.verdicts.iter().all(|v| v.verdict == Verdict::Pass));
//! let mu = report.mu_ambient.value().unwrap();
//! assert!((mu - 1.0).abs() < 0.05);
//! ```

pub mod error;
pub mod fixtures;
pub mod manifolds;
pub mod numkit;
pub mod problems;
pub mod reglab;
pub mod rng;
pub mod solvers;
pub mod subdiff;

pub use error::{Error, Result};
pub use solvers::reference_minimizer;

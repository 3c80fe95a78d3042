//! Registry of analytically controlled problem fixtures.
//!
//! Each fixture bundles a composite problem with the chart of its active
//! manifold, a start point from which the reference minimizer is reachable,
//! and the declared hypotheses (convexity, strict complementarity) that
//! decide which claims apply to it.

use crate::error::Result;
use crate::manifolds::{ManifoldChart, PieceGap};
use crate::numkit::{DenseMatrix, Vector};
use crate::problems::{
    CompositeProblem, NonsmoothPart, QuadCosine, QuadPiece, QuadraticDistance, ZeroSmooth,
};
use crate::solvers::reference_minimizer;
use std::sync::Arc;

/// Problem family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// l1 composite with smooth convex g.
    L1Composite,
    /// Finite max of convex quadratics.
    FiniteMax,
    /// l1 composite with smooth nonconvex g.
    NonconvexL1,
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::L1Composite => "A",
            Family::FiniteMax => "B",
            Family::NonconvexL1 => "C",
        }
    }
}

pub struct Fixture {
    pub name: &'static str,
    pub family: Family,
    pub convex: bool,
    /// Declared nondegeneracy: 0 in the relative interior of the
    /// subdifferential at the minimizer.
    pub strict_complementarity: bool,
    pub problem: CompositeProblem,
    pub chart: ManifoldChart,
    /// Start point for solver traces and the reference-minimizer search.
    pub start_point: Vector,
    pub default_step: f64,
    /// Radius within which the chart (and sample plans) are trusted.
    pub chart_radius: f64,
    /// Declared Lipschitz constant for the U-gradient along the manifold.
    pub u_gradient_lipschitz: f64,
    /// V-ball radius for U-Lagrangian evaluations (large surrogate when convex).
    pub ball_eps: f64,
}

impl Fixture {
    pub fn reference_minimizer(&self) -> Result<Vector> {
        reference_minimizer(&self.problem, &self.start_point)
    }
}

fn lasso2d() -> Fixture {
    Fixture {
        name: "lasso2d",
        family: Family::L1Composite,
        convex: true,
        strict_complementarity: true,
        problem: CompositeProblem::new(
            2,
            Arc::new(QuadraticDistance {
                target: Vector::new(vec![2.0, 0.5]),
            }),
            1.0,
            NonsmoothPart::L1 { weight: 1.0 },
            true,
        )
        .expect("valid fixture"),
        chart: ManifoldChart::coord(2, [1]),
        start_point: Vector::new(vec![5.0, 5.0]),
        default_step: 1.0,
        chart_radius: 0.5,
        u_gradient_lipschitz: 2.0,
        ball_eps: 1e3,
    }
}

fn lasso2d_degenerate() -> Fixture {
    Fixture {
        name: "lasso2d-degenerate",
        family: Family::L1Composite,
        convex: true,
        strict_complementarity: false,
        problem: CompositeProblem::new(
            2,
            Arc::new(QuadraticDistance {
                target: Vector::new(vec![2.0, 1.0]),
            }),
            1.0,
            NonsmoothPart::L1 { weight: 1.0 },
            true,
        )
        .expect("valid fixture"),
        chart: ManifoldChart::coord(2, [1]),
        start_point: Vector::new(vec![5.0, 5.0]),
        // with step 1 the prox-gradient map is exact for identity-Hessian g
        // and identification would be immediate; 0.5 exposes the geometric
        // decay that never reaches the manifold
        default_step: 0.5,
        chart_radius: 0.5,
        u_gradient_lipschitz: 2.0,
        ball_eps: 1e3,
    }
}

fn maxquad_hyperbola() -> Fixture {
    // max(x2^2 - x2, x1^2 - x2 + 1): the pieces tie exactly on the hyperbola
    // x2^2 - x1^2 = 1, the unique minimizer is (0, 1) with value 0, and the
    // subdifferential there is the segment conv{(0,1), (0,-1)}.
    let up = QuadPiece::new(
        DenseMatrix::new(2, 2, vec![0.0, 0.0, 0.0, 2.0]),
        Vector::new(vec![0.0, -1.0]),
        0.0,
    )
    .expect("PSD piece");
    let side = QuadPiece::new(
        DenseMatrix::new(2, 2, vec![2.0, 0.0, 0.0, 0.0]),
        Vector::new(vec![0.0, -1.0]),
        1.0,
    )
    .expect("PSD piece");
    let chart = ManifoldChart::level_set(Arc::new(PieceGap::new(2, up.clone(), side.clone())), 0.5);
    Fixture {
        name: "maxquad-hyperbola",
        family: Family::FiniteMax,
        convex: true,
        strict_complementarity: true,
        problem: CompositeProblem::new(
            2,
            Arc::new(ZeroSmooth),
            1.0,
            NonsmoothPart::Max {
                pieces: vec![up, side],
            },
            true,
        )
        .expect("valid fixture"),
        chart,
        start_point: Vector::new(vec![0.5, 1.2]),
        default_step: 1.0,
        chart_radius: 0.4,
        u_gradient_lipschitz: 5.0,
        ball_eps: 1e3,
    }
}

fn noncvx2d() -> Fixture {
    Fixture {
        name: "noncvx2d",
        family: Family::NonconvexL1,
        convex: false,
        strict_complementarity: true,
        problem: CompositeProblem::new(
            2,
            Arc::new(QuadCosine {
                quad_target: 2.0,
                cos_weight: 0.3,
            }),
            1.0,
            NonsmoothPart::L1 { weight: 1.0 },
            false,
        )
        .expect("valid fixture"),
        chart: ManifoldChart::coord(2, [1]),
        start_point: Vector::new(vec![0.5, 0.5]),
        default_step: 1.0,
        chart_radius: 0.5,
        u_gradient_lipschitz: 2.0,
        ball_eps: 0.4,
    }
}

pub fn fixture_names() -> Vec<&'static str> {
    vec![
        "lasso2d",
        "lasso2d-degenerate",
        "maxquad-hyperbola",
        "noncvx2d",
    ]
}

pub fn fixture(name: &str) -> Option<Fixture> {
    match name {
        "lasso2d" => Some(lasso2d()),
        "lasso2d-degenerate" => Some(lasso2d_degenerate()),
        "maxquad-hyperbola" => Some(maxquad_hyperbola()),
        "noncvx2d" => Some(noncvx2d()),
        _ => None,
    }
}

pub fn all_fixtures() -> Vec<Fixture> {
    fixture_names()
        .into_iter()
        .map(|n| fixture(n).expect("registered"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    #[test]
    fn registry_contents() {
        let names = fixture_names();
        assert!(names.contains(&"lasso2d"));
        assert!(names.contains(&"lasso2d-degenerate"));
        assert!(names.contains(&"noncvx2d"));
        assert!(fixture("missing").is_none());

        let degenerate = fixture("lasso2d-degenerate").unwrap();
        assert!(!degenerate.strict_complementarity);
        let noncvx = fixture("noncvx2d").unwrap();
        assert!(!noncvx.convex);
        assert_eq!(fixture("maxquad-hyperbola").unwrap().family.tag(), "B");
    }

    #[test]
    fn reference_minimizers() {
        let x = lasso2d().reference_minimizer().unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && x[1] == 0.0);

        let x = lasso2d_degenerate().reference_minimizer().unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && x[1] == 0.0);

        let x = noncvx2d().reference_minimizer().unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && x[1] == 0.0);

        let x = maxquad_hyperbola().reference_minimizer().unwrap();
        assert!(x[0].abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9, "x = {x:?}");
    }

    #[test]
    fn lipschitz_constants_hold_on_samples() {
        for fx in all_fixtures() {
            let mut stream = Stream::derive(99, &[fx.name.len() as u64]);
            for _ in 0..200 {
                let a = stream.gaussian_vector(2).scale(2.0);
                let b = stream.gaussian_vector(2).scale(2.0);
                let ga = fx.problem.smooth_gradient(&a);
                let gb = fx.problem.smooth_gradient(&b);
                let lhs = (&ga - &gb).norm();
                let rhs = fx.problem.lipschitz() * (&a - &b).norm();
                assert!(lhs <= rhs + 1e-12, "{}: {lhs} > {rhs}", fx.name);
            }
        }
    }

    #[test]
    fn maxquad_minimizer_is_nondegenerate() {
        let fx = maxquad_hyperbola();
        let xbar = Vector::new(vec![0.0, 1.0]);
        assert!((fx.problem.eval_f(&xbar).unwrap()).abs() < 1e-15);
        let s = fx
            .problem
            .subdiff_at(&xbar, crate::problems::DEFAULT_ACTIVITY_TOL)
            .unwrap();
        assert!(crate::subdiff::ri_contains_zero(&s));
    }
}

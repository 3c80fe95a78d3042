//! Composite problems f = g + h and their exact subdifferential oracles.
//!
//! Three nonsmooth families are supported: `L1` (weighted l1 norm, with a
//! coordinatewise soft-threshold prox), `Max` (finite max of convex
//! quadratics, subdifferential = convex hull of active-piece gradients, no
//! prox), and `None` (smooth problems). Subdifferentials are returned as
//! exact convex-set descriptions, never as single elements.

use crate::error::{Error, Result};
use crate::numkit::{cholesky, DenseMatrix, Vector};
use std::sync::Arc;

/// Default activity threshold: far below fixture scales, far above round-off.
pub const DEFAULT_ACTIVITY_TOL: f64 = 1e-9;

/// Value/gradient oracle for the smooth part g.
pub trait SmoothOracle: Send + Sync {
    fn value(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;
}

/// g = 0.
pub struct ZeroSmooth;

impl SmoothOracle for ZeroSmooth {
    fn value(&self, _x: &Vector) -> f64 {
        0.0
    }
    fn gradient(&self, x: &Vector) -> Vector {
        Vector::zeros(x.len())
    }
}

/// g(x) = 1/2 ||x - target||^2 (identity Hessian, gradient Lipschitz constant 1).
pub struct QuadraticDistance {
    pub target: Vector,
}

impl SmoothOracle for QuadraticDistance {
    fn value(&self, x: &Vector) -> f64 {
        0.5 * (x - &self.target).dot(&(x - &self.target))
    }
    fn gradient(&self, x: &Vector) -> Vector {
        x - &self.target
    }
}

/// g(x) = 1/2 (x_1 - quad_target)^2 + cos_weight * (1 - cos x_2), a bounded
/// trigonometric nonconvexity with explicit gradient Lipschitz constant
/// max(1, cos_weight) and an isolated reduced minimizer.
pub struct QuadCosine {
    pub quad_target: f64,
    pub cos_weight: f64,
}

impl SmoothOracle for QuadCosine {
    fn value(&self, x: &Vector) -> f64 {
        0.5 * (x[0] - self.quad_target).powi(2) + self.cos_weight * (1.0 - x[1].cos())
    }
    fn gradient(&self, x: &Vector) -> Vector {
        Vector::new(vec![x[0] - self.quad_target, self.cos_weight * x[1].sin()])
    }
}

/// One quadratic piece 1/2 x^T Q x + b^T x + c of a max function.
#[derive(Clone)]
pub struct QuadPiece {
    quad: DenseMatrix,
    lin: Vector,
    constant: f64,
}

impl QuadPiece {
    /// Q must be symmetric positive semidefinite.
    pub fn new(quad: DenseMatrix, lin: Vector, constant: f64) -> Result<Self> {
        let n = quad.rows();
        if quad.cols() != n || lin.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: quad.cols().max(lin.len()),
            });
        }
        let sym_err = quad.sub(&quad.transpose()).norm_inf();
        if sym_err > 1e-12 {
            return Err(Error::invalid(
                "quadratic piece",
                format!("asymmetry {sym_err:.3e}"),
            ));
        }
        // PSD check via Cholesky of Q + jitter
        let mut shifted = quad.clone();
        for i in 0..n {
            shifted[(i, i)] += 1e-10;
        }
        if cholesky(&shifted).is_none() {
            return Err(Error::invalid("quadratic piece", "Q is not PSD"));
        }
        Ok(QuadPiece {
            quad,
            lin,
            constant,
        })
    }

    pub fn value(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&self.quad.matvec(x)) + self.lin.dot(x) + self.constant
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        &self.quad.matvec(x) + &self.lin
    }
}

/// Nonsmooth part h of the composite.
pub enum NonsmoothPart {
    None,
    /// h(x) = weight * ||x||_1
    L1 {
        weight: f64,
    },
    /// h(x) = max_i piece_i(x); no prox is implemented for this family.
    Max {
        pieces: Vec<QuadPiece>,
    },
}

/// f = g + h with oracles for value, gradient, prox, and subdifferential.
pub struct CompositeProblem {
    dimension: usize,
    smooth: Arc<dyn SmoothOracle>,
    lipschitz: f64,
    nonsmooth: NonsmoothPart,
    smooth_convex: bool,
}

impl CompositeProblem {
    pub fn new(
        dimension: usize,
        smooth: Arc<dyn SmoothOracle>,
        lipschitz: f64,
        nonsmooth: NonsmoothPart,
        smooth_convex: bool,
    ) -> Result<Self> {
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(Error::invalid("lipschitz_L", "must be positive and finite"));
        }
        if let NonsmoothPart::L1 { weight } = nonsmooth {
            if !(weight > 0.0 && weight.is_finite()) {
                return Err(Error::invalid("l1 weight", "must be positive and finite"));
            }
        }
        if let NonsmoothPart::Max { ref pieces } = nonsmooth {
            if pieces.is_empty() {
                return Err(Error::invalid("max pieces", "need at least one piece"));
            }
            for p in pieces {
                if p.lin.len() != dimension {
                    return Err(Error::DimensionMismatch {
                        expected: dimension,
                        got: p.lin.len(),
                    });
                }
            }
        }
        Ok(CompositeProblem {
            dimension,
            smooth,
            lipschitz,
            nonsmooth,
            smooth_convex,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn nonsmooth(&self) -> &NonsmoothPart {
        &self.nonsmooth
    }

    /// The nonsmooth parts are convex by construction, so convexity of f is
    /// convexity of g.
    pub fn is_convex(&self) -> bool {
        self.smooth_convex
    }

    pub fn smooth_value(&self, x: &Vector) -> f64 {
        self.smooth.value(x)
    }

    pub fn smooth_gradient(&self, x: &Vector) -> Vector {
        self.smooth.gradient(x)
    }

    pub fn nonsmooth_value(&self, x: &Vector) -> f64 {
        match &self.nonsmooth {
            NonsmoothPart::None => 0.0,
            NonsmoothPart::L1 { weight } => {
                weight * x.entries().iter().map(|v| v.abs()).sum::<f64>()
            }
            NonsmoothPart::Max { pieces } => pieces
                .iter()
                .map(|p| p.value(x))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn eval_f(&self, x: &Vector) -> Result<f64> {
        x.check_dim(self.dimension)?;
        Ok(self.smooth_value(x) + self.nonsmooth_value(x))
    }

    /// Indices of pieces active at x within `tol` of the max (Max family only).
    pub fn active_pieces(&self, x: &Vector, tol: f64) -> Vec<usize> {
        match &self.nonsmooth {
            NonsmoothPart::Max { pieces } => {
                let vals: Vec<f64> = pieces.iter().map(|p| p.value(x)).collect();
                let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                vals.iter()
                    .enumerate()
                    .filter(|(_, v)| top - *v <= tol)
                    .map(|(i, _)| i)
                    .collect()
            }
            _ => Vec::new(),
        }
    }

    /// The prox of the nonsmooth part alone: prox_{t h}(v).
    ///
    /// For L1 this is the coordinatewise soft threshold; for None the
    /// identity. The max family has no implemented prox.
    pub fn prox_nonsmooth(&self, v: &Vector, t: f64) -> Result<Vector> {
        v.check_dim(self.dimension)?;
        match &self.nonsmooth {
            NonsmoothPart::None => Ok(v.clone()),
            NonsmoothPart::L1 { weight } => {
                let tau = t * weight;
                Ok(Vector::new(
                    v.entries()
                        .iter()
                        .map(|&vi| vi.signum() * (vi.abs() - tau).max(0.0))
                        .collect(),
                ))
            }
            NonsmoothPart::Max { .. } => Err(Error::ProxUnavailable),
        }
    }

    /// One proximal-gradient application: prox_{t h}(x - t grad g(x)).
    ///
    /// The L1 branch evaluates the soft threshold through the branch
    /// candidates x_i - t (g_i ± w) rather than by composing the forward step
    /// with the threshold; near the threshold boundary the composed form
    /// absorbs a geometrically decaying coordinate into the constant and
    /// collapses it to an exact zero that the underlying map never produces.
    pub fn prox_step(&self, x: &Vector, t: f64) -> Result<Vector> {
        x.check_dim(self.dimension)?;
        if t <= 0.0 || t.is_nan() {
            return Err(Error::invalid("step", "t must be positive"));
        }
        match &self.nonsmooth {
            NonsmoothPart::None => Ok(x.axpy(-t, &self.smooth_gradient(x))),
            NonsmoothPart::L1 { weight } => {
                let g = self.smooth_gradient(x);
                let mut out = Vector::zeros(self.dimension);
                for i in 0..self.dimension {
                    let pos = x[i] - t * (g[i] + weight);
                    let neg = x[i] - t * (g[i] - weight);
                    out[i] = if pos > 0.0 {
                        pos
                    } else if neg < 0.0 {
                        neg
                    } else {
                        0.0
                    };
                }
                Ok(out)
            }
            NonsmoothPart::Max { .. } => Err(Error::ProxUnavailable),
        }
    }

    /// Exact convex-set description of the subdifferential at x.
    ///
    /// L1: a box offset by grad g(x); coordinates with |x_i| > activity_tol
    /// contribute the singleton grad g_i + w sign(x_i), the rest the interval
    /// [grad g_i - w, grad g_i + w]. Max: the convex hull of the gradients of
    /// the pieces active within activity_tol. None: the gradient singleton.
    pub fn subdiff_at(&self, x: &Vector, activity_tol: f64) -> Result<SubdiffSet> {
        x.check_dim(self.dimension)?;
        let grad = self.smooth_gradient(x);
        match &self.nonsmooth {
            NonsmoothPart::None => Ok(SubdiffSet::singleton(grad)),
            NonsmoothPart::L1 { weight } => {
                let n = self.dimension;
                let mut lo = Vector::zeros(n);
                let mut hi = Vector::zeros(n);
                for i in 0..n {
                    if x[i].abs() > activity_tol {
                        let v = grad[i] + weight * x[i].signum();
                        lo[i] = v;
                        hi[i] = v;
                    } else {
                        lo[i] = grad[i] - weight;
                        hi[i] = grad[i] + weight;
                    }
                }
                SubdiffSet::new_box(lo, hi)
            }
            NonsmoothPart::Max { pieces } => {
                let active = self.active_pieces(x, activity_tol);
                let vertices: Vec<Vector> = active
                    .iter()
                    .map(|&i| &pieces[i].gradient(x) + &grad)
                    .collect();
                SubdiffSet::new_hull(vertices)
            }
        }
    }
}

/// Exact convex-set representation of a subdifferential.
#[derive(Debug, Clone, PartialEq)]
pub enum SubdiffSet {
    /// Axis-aligned box: lo_i = hi_i marks a singleton coordinate.
    Box { lo: Vector, hi: Vector },
    /// Convex hull of finitely many gradient vectors.
    Hull { vertices: Vec<Vector> },
}

impl SubdiffSet {
    pub fn new_box(lo: Vector, hi: Vector) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        for i in 0..lo.len() {
            if lo[i] > hi[i] {
                return Err(Error::invalid("box bounds", format!("lo > hi at {i}")));
            }
        }
        Ok(SubdiffSet::Box { lo, hi })
    }

    pub fn new_hull(vertices: Vec<Vector>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::invalid("hull", "needs at least one vertex"));
        }
        let n = vertices[0].len();
        for v in &vertices {
            v.check_dim(n)?;
        }
        Ok(SubdiffSet::Hull { vertices })
    }

    pub fn singleton(v: Vector) -> Self {
        SubdiffSet::Box {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SubdiffSet::Box { lo, .. } => lo.len(),
            SubdiffSet::Hull { vertices } => vertices[0].len(),
        }
    }

    /// True when every box coordinate is a singleton or the hull has one vertex.
    pub fn is_singleton(&self) -> bool {
        match self {
            SubdiffSet::Box { lo, hi } => (0..lo.len()).all(|i| lo[i] == hi[i]),
            SubdiffSet::Hull { vertices } => vertices.len() == 1,
        }
    }

    /// The single element, when `is_singleton` holds.
    pub fn as_singleton(&self) -> Option<Vector> {
        if !self.is_singleton() {
            return None;
        }
        Some(match self {
            SubdiffSet::Box { lo, .. } => lo.clone(),
            SubdiffSet::Hull { vertices } => vertices[0].clone(),
        })
    }

    /// Extreme points: box corners over the interval coordinates, or the hull
    /// vertices. Intended for invariant checks on small sets.
    pub fn extreme_points(&self) -> Vec<Vector> {
        match self {
            SubdiffSet::Hull { vertices } => vertices.clone(),
            SubdiffSet::Box { lo, hi } => {
                let free: Vec<usize> = (0..lo.len()).filter(|&i| lo[i] < hi[i]).collect();
                assert!(
                    free.len() <= 20,
                    "too many interval coordinates to enumerate"
                );
                let mut out = Vec::with_capacity(1 << free.len());
                for mask in 0..(1u32 << free.len()) {
                    let mut p = lo.clone();
                    for (b, &i) in free.iter().enumerate() {
                        if mask & (1 << b) != 0 {
                            p[i] = hi[i];
                        }
                    }
                    out.push(p);
                }
                out
            }
        }
    }

    /// Translate the set by -g (so membership of g becomes membership of 0).
    pub fn translated(&self, g: &Vector) -> SubdiffSet {
        match self {
            SubdiffSet::Box { lo, hi } => SubdiffSet::Box {
                lo: lo - g,
                hi: hi - g,
            },
            SubdiffSet::Hull { vertices } => SubdiffSet::Hull {
                vertices: vertices.iter().map(|v| v - g).collect(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn lasso2d() -> CompositeProblem {
        CompositeProblem::new(
            2,
            Arc::new(QuadraticDistance {
                target: Vector::new(vec![2.0, 0.5]),
            }),
            1.0,
            NonsmoothPart::L1 { weight: 1.0 },
            true,
        )
        .unwrap()
    }

    fn abs_max_1d() -> CompositeProblem {
        // max(x, -x) = |x| as a two-piece max function
        let up = QuadPiece::new(DenseMatrix::zeros(1, 1), Vector::new(vec![1.0]), 0.0).unwrap();
        let dn = QuadPiece::new(DenseMatrix::zeros(1, 1), Vector::new(vec![-1.0]), 0.0).unwrap();
        CompositeProblem::new(
            1,
            Arc::new(ZeroSmooth),
            1.0,
            NonsmoothPart::Max {
                pieces: vec![up, dn],
            },
            true,
        )
        .unwrap()
    }

    #[test]
    fn eval_lasso2d_at_minimizer() {
        let p = lasso2d();
        let f = p.eval_f(&Vector::new(vec![1.0, 0.0])).unwrap();
        assert!((f - 1.625).abs() < 1e-14, "f = {f}");
    }

    #[test]
    fn eval_l1_all_terms_vanish() {
        let p = CompositeProblem::new(
            2,
            Arc::new(ZeroSmooth),
            1.0,
            NonsmoothPart::L1 { weight: 1.0 },
            true,
        )
        .unwrap();
        assert_eq!(p.eval_f(&Vector::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn eval_max_pieces() {
        let p = abs_max_1d();
        assert!((p.eval_f(&Vector::new(vec![0.3])).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn prox_step_lasso() {
        let p = lasso2d();
        // x - grad g(x) = b, and soft-threshold(b, 1) = (1, 0)
        let x = p.prox_step(&Vector::new(vec![2.0, 0.0]), 1.0).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!(x[1].abs() < 1e-14);
    }

    #[test]
    fn prox_fixes_minimizer() {
        let p = lasso2d();
        let xbar = Vector::new(vec![1.0, 0.0]);
        let x = p.prox_step(&xbar, 1.0).unwrap();
        assert!((&x - &xbar).norm() < 1e-14);
    }

    #[test]
    fn prox_soft_threshold_formula() {
        let p = CompositeProblem::new(
            1,
            Arc::new(ZeroSmooth),
            1.0,
            NonsmoothPart::L1 { weight: 1.0 },
            true,
        )
        .unwrap();
        let x = p.prox_step(&Vector::new(vec![2.5]), 1.0).unwrap();
        assert!((x[0] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn prox_unavailable_for_max() {
        let p = abs_max_1d();
        assert!(matches!(
            p.prox_step(&Vector::new(vec![0.3]), 1.0),
            Err(Error::ProxUnavailable)
        ));
    }

    #[test]
    fn subdiff_lasso_at_minimizer() {
        let p = lasso2d();
        let s = p
            .subdiff_at(&Vector::new(vec![1.0, 0.0]), DEFAULT_ACTIVITY_TOL)
            .unwrap();
        match s {
            SubdiffSet::Box { lo, hi } => {
                assert!((lo[0] - 0.0).abs() < 1e-14 && (hi[0] - 0.0).abs() < 1e-14);
                assert!((lo[1] + 1.5).abs() < 1e-14 && (hi[1] - 0.5).abs() < 1e-14);
            }
            _ => panic!("expected box"),
        }
    }

    #[test]
    fn subdiff_lasso_off_minimizer() {
        let p = lasso2d();
        let s = p
            .subdiff_at(&Vector::new(vec![2.0, 0.0]), DEFAULT_ACTIVITY_TOL)
            .unwrap();
        match s {
            SubdiffSet::Box { lo, hi } => {
                assert!((lo[0] - 1.0).abs() < 1e-14 && (hi[0] - 1.0).abs() < 1e-14);
                assert!((lo[1] + 1.5).abs() < 1e-14 && (hi[1] - 0.5).abs() < 1e-14);
            }
            _ => panic!("expected box"),
        }
    }

    #[test]
    fn subdiff_abs_at_zero() {
        let p = CompositeProblem::new(
            1,
            Arc::new(ZeroSmooth),
            1.0,
            NonsmoothPart::L1 { weight: 1.0 },
            true,
        )
        .unwrap();
        let s = p
            .subdiff_at(&Vector::zeros(1), DEFAULT_ACTIVITY_TOL)
            .unwrap();
        match s {
            SubdiffSet::Box { lo, hi } => {
                assert_eq!(lo[0], -1.0);
                assert_eq!(hi[0], 1.0);
            }
            _ => panic!("expected box"),
        }
    }

    #[test]
    fn subdiff_singleton_away_from_ties() {
        let p = lasso2d();
        let s = p.subdiff_at(&Vector::new(vec![1.5, -0.25]), 0.0).unwrap();
        let g = s.as_singleton().expect("no zeros or ties: singleton");
        // grad g + weight * sign pattern
        assert!((g[0] - (1.5 - 2.0 + 1.0)).abs() < 1e-14);
        assert!((g[1] - (-0.25 - 0.5 - 1.0)).abs() < 1e-14);

        let m = abs_max_1d();
        let s = m.subdiff_at(&Vector::new(vec![0.3]), 0.0).unwrap();
        let g = s.as_singleton().expect("unique active piece");
        assert_eq!(g[0], 1.0);
    }

    #[test]
    fn max_subdiff_hull_of_active_gradients() {
        let p = abs_max_1d();
        let s = p
            .subdiff_at(&Vector::zeros(1), DEFAULT_ACTIVITY_TOL)
            .unwrap();
        match s {
            SubdiffSet::Hull { vertices } => {
                assert_eq!(vertices.len(), 2);
                let mut vals: Vec<f64> = vertices.iter().map(|v| v[0]).collect();
                vals.sort_by(f64::total_cmp);
                assert_eq!(vals, vec![-1.0, 1.0]);
            }
            _ => panic!("expected hull"),
        }
    }

    #[test]
    fn quad_piece_rejects_indefinite() {
        let q = DenseMatrix::new(2, 2, vec![0.0, 0.0, 0.0, -1.0]);
        assert!(QuadPiece::new(q, Vector::zeros(2), 0.0).is_err());
    }

    #[test]
    fn quad_piece_rejects_asymmetric() {
        let q = DenseMatrix::new(2, 2, vec![1.0, 0.5, 0.0, 1.0]);
        assert!(QuadPiece::new(q, Vector::zeros(2), 0.0).is_err());
    }

    #[test]
    fn set_constructors_validate() {
        assert!(SubdiffSet::new_box(Vector::new(vec![1.0]), Vector::new(vec![0.5])).is_err());
        assert!(SubdiffSet::new_hull(vec![]).is_err());
        assert!(SubdiffSet::new_hull(vec![Vector::zeros(2), Vector::zeros(3)]).is_err());
    }

    #[test]
    fn box_extreme_points_are_corners() {
        let s =
            SubdiffSet::new_box(Vector::new(vec![1.0, -1.5]), Vector::new(vec![1.0, 0.5])).unwrap();
        let pts = s.extreme_points();
        assert_eq!(pts.len(), 2);
        assert!(pts.iter().any(|p| p[1] == -1.5));
        assert!(pts.iter().any(|p| p[1] == 0.5));
    }
}

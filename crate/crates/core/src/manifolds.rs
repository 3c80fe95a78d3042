//! Identifiable-manifold charts: tangent/normal projectors, nearest-point
//! projection, Riemannian gradients of the restriction, and the normal
//! correction v(u) that puts tangent steps back on the manifold.
//!
//! Two chart kinds cover the fixtures: coordinate subspaces {x : x_i = 0 for
//! i in I} and level sets F(x) = 0 with a full-rank Jacobian oracle. Curved
//! charts use Gauss-Newton for projection and Newton over the normal frame
//! for v(u). Geodesics are never integrated: the projection retraction
//! agrees with them to first order, which is all the downstream claims use.

use crate::error::{Error, Result};
use crate::numkit::{
    orthogonal_projector, pivoted_qr, range_and_complement, solve_full_rank, DenseMatrix, Vector,
};
use crate::problems::{CompositeProblem, NonsmoothPart, QuadPiece, DEFAULT_ACTIVITY_TOL};
use std::collections::BTreeSet;
use std::sync::Arc;

/// Feasibility tolerance for "x is on M" preconditions.
pub const ON_MANIFOLD_TOL: f64 = 1e-8;

/// Residual target for Newton / Gauss-Newton feasibility iterations.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// First-order stationarity target for the nearest-point projection.
pub const STATIONARITY_TOL: f64 = 1e-10;

const MAX_NEWTON_ITER: usize = 100;

/// Value-and-Jacobian oracle for a level-set chart M = F^{-1}(0).
pub trait LevelSetOracle: Send + Sync {
    /// Ambient dimension n.
    fn dim(&self) -> usize;
    /// Number of constraints m (the codimension).
    fn codim(&self) -> usize;
    /// F(x), an m-vector.
    fn value(&self, x: &Vector) -> Vector;
    /// The m x n Jacobian of F at x.
    fn jacobian(&self, x: &Vector) -> DenseMatrix;
}

/// Tie-set oracle for two quadratic pieces of a max function:
/// F(x) = piece_a(x) - piece_b(x).
pub struct PieceGap {
    dim: usize,
    a: QuadPiece,
    b: QuadPiece,
}

impl PieceGap {
    pub fn new(dim: usize, a: QuadPiece, b: QuadPiece) -> Self {
        PieceGap { dim, a, b }
    }
}

impl LevelSetOracle for PieceGap {
    fn dim(&self) -> usize {
        self.dim
    }
    fn codim(&self) -> usize {
        1
    }
    fn value(&self, x: &Vector) -> Vector {
        Vector::new(vec![self.a.value(x) - self.b.value(x)])
    }
    fn jacobian(&self, x: &Vector) -> DenseMatrix {
        DenseMatrix::from_rows(&[&self.a.gradient(x) - &self.b.gradient(x)])
    }
}

/// Local chart for an identifiable manifold.
#[derive(Clone)]
pub enum ManifoldChart {
    /// M = {x : x_i = 0 for all i in zero_set}.
    Coord {
        dim: usize,
        zero_set: BTreeSet<usize>,
    },
    /// M = F^{-1}(0) near the fixture's base point.
    LevelSet {
        oracle: Arc<dyn LevelSetOracle>,
        /// Radius within which the nearest-point projection is trusted.
        projection_radius: f64,
    },
}

/// Complementary orthogonal projectors onto T_x M and N_x M.
#[derive(Debug, Clone)]
pub struct TangentFrame {
    pub projector: DenseMatrix,
    pub normal_projector: DenseMatrix,
}

impl ManifoldChart {
    pub fn coord(dim: usize, zero_set: impl IntoIterator<Item = usize>) -> Self {
        let zero_set: BTreeSet<usize> = zero_set.into_iter().collect();
        assert!(zero_set.iter().all(|&i| i < dim));
        ManifoldChart::Coord { dim, zero_set }
    }

    pub fn level_set(oracle: Arc<dyn LevelSetOracle>, projection_radius: f64) -> Self {
        ManifoldChart::LevelSet {
            oracle,
            projection_radius,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ManifoldChart::Coord { dim, .. } => *dim,
            ManifoldChart::LevelSet { oracle, .. } => oracle.dim(),
        }
    }

    /// Dimension of the manifold itself.
    pub fn manifold_dim(&self) -> usize {
        match self {
            ManifoldChart::Coord { dim, zero_set } => dim - zero_set.len(),
            ManifoldChart::LevelSet { oracle, .. } => oracle.dim() - oracle.codim(),
        }
    }

    /// Constraint violation at x: max |x_i| over the zero set, or ||F(x)||.
    pub fn infeasibility(&self, x: &Vector) -> f64 {
        match self {
            ManifoldChart::Coord { zero_set, .. } => {
                zero_set.iter().map(|&i| x[i].abs()).fold(0.0, f64::max)
            }
            ManifoldChart::LevelSet { oracle, .. } => oracle.value(x).norm(),
        }
    }

    pub fn is_on_manifold(&self, x: &Vector, tol: f64) -> bool {
        self.infeasibility(x) <= tol
    }

    fn require_on_manifold(&self, x: &Vector) -> Result<()> {
        let infeas = self.infeasibility(x);
        if infeas <= ON_MANIFOLD_TOL {
            Ok(())
        } else {
            Err(Error::OffManifold(infeas))
        }
    }
}

/// Projectors onto the tangent and normal spaces at an on-manifold point.
pub fn tangent_projector(chart: &ManifoldChart, x: &Vector) -> Result<TangentFrame> {
    x.check_dim(chart.dim())?;
    chart.require_on_manifold(x)?;
    let n = chart.dim();
    match chart {
        ManifoldChart::Coord { zero_set, .. } => {
            let mut p = DenseMatrix::zeros(n, n);
            let mut q = DenseMatrix::zeros(n, n);
            for i in 0..n {
                if zero_set.contains(&i) {
                    q[(i, i)] = 1.0;
                } else {
                    p[(i, i)] = 1.0;
                }
            }
            Ok(TangentFrame {
                projector: p,
                normal_projector: q,
            })
        }
        ManifoldChart::LevelSet { oracle, .. } => {
            let jac = oracle.jacobian(x);
            let p = orthogonal_projector(&jac)?;
            let mut q = DenseMatrix::identity(n);
            for i in 0..n {
                for j in 0..n {
                    q[(i, j)] -= p[(i, j)];
                }
            }
            Ok(TangentFrame {
                projector: p,
                normal_projector: q,
            })
        }
    }
}

/// Orthonormal bases (tangent, normal) of T_x M and N_x M as matrix columns.
pub fn tangent_normal_bases(
    chart: &ManifoldChart,
    x: &Vector,
) -> Result<(DenseMatrix, DenseMatrix)> {
    x.check_dim(chart.dim())?;
    chart.require_on_manifold(x)?;
    let n = chart.dim();
    match chart {
        ManifoldChart::Coord { zero_set, .. } => {
            let t_cols: Vec<Vector> = (0..n)
                .filter(|i| !zero_set.contains(i))
                .map(|i| Vector::unit(n, i))
                .collect();
            let n_cols: Vec<Vector> = zero_set.iter().map(|&i| Vector::unit(n, i)).collect();
            Ok((
                DenseMatrix::from_columns(n, &t_cols),
                DenseMatrix::from_columns(n, &n_cols),
            ))
        }
        ManifoldChart::LevelSet { oracle, .. } => {
            let jac = oracle.jacobian(x);
            let jt = jac.transpose();
            if pivoted_qr(&jt).rank < oracle.codim() {
                return Err(Error::RankDeficient {
                    rank: pivoted_qr(&jt).rank,
                    required: oracle.codim(),
                });
            }
            let (normal, tangent) = range_and_complement(&jt);
            Ok((tangent, normal))
        }
    }
}

/// Nearest-point projection onto the manifold.
///
/// Coordinate charts zero out the constrained coordinates; level-set charts
/// run Gauss-Newton on min ||y - x||^2 s.t. F(y) = 0 until the residual and
/// first-order stationarity targets are met.
pub fn project_to_manifold(chart: &ManifoldChart, x: &Vector) -> Result<Vector> {
    x.check_dim(chart.dim())?;
    match chart {
        ManifoldChart::Coord { zero_set, .. } => {
            let mut y = x.clone();
            for &i in zero_set {
                y[i] = 0.0;
            }
            Ok(y)
        }
        ManifoldChart::LevelSet { oracle, .. } => {
            let mut y = x.clone();
            for _ in 0..MAX_NEWTON_ITER {
                let f = oracle.value(&y);
                let jac = oracle.jacobian(&y);
                let jjt = jac.matmul(&jac.transpose());
                // stationarity: the offset y - x must be purely normal
                let offset = &y - x;
                let mu_stat = solve_full_rank(&jjt, &jac.matvec(&offset))?;
                let tangential = &offset - &jac.transpose().matvec(&mu_stat);
                if f.norm() <= FEASIBILITY_TOL && tangential.norm() <= STATIONARITY_TOL {
                    return Ok(y);
                }
                // Gauss-Newton step: linearize the constraint at y, project x
                let rhs = &jac.matvec(&offset) - &f;
                let mu = solve_full_rank(&jjt, &rhs)?;
                y = x + &jac.transpose().matvec(&mu);
            }
            Err(Error::NoConvergence {
                what: "gauss-newton projection",
                iterations: MAX_NEWTON_ITER,
            })
        }
    }
}

/// Riemannian gradient of f restricted to M at an on-manifold point:
/// the tangent projection of a smooth representative's gradient.
///
/// For l1 composites the representative is grad g + weight * s with the sign
/// pattern frozen on the chart; for max functions every active piece must
/// project to the same tangent vector (disagreement above 1e-8 signals a
/// chart/activity mismatch).
pub fn riemannian_grad(
    chart: &ManifoldChart,
    problem: &CompositeProblem,
    x: &Vector,
) -> Result<Vector> {
    x.check_dim(problem.dimension())?;
    let frame = tangent_projector(chart, x)?;
    let grad_g = problem.smooth_gradient(x);
    let reps: Vec<Vector> = match problem.nonsmooth() {
        NonsmoothPart::None => vec![grad_g],
        NonsmoothPart::L1 { weight } => {
            let n = problem.dimension();
            let zero_set: Option<&BTreeSet<usize>> = match chart {
                ManifoldChart::Coord { zero_set, .. } => Some(zero_set),
                _ => None,
            };
            let mut s = Vector::zeros(n);
            for i in 0..n {
                let constrained = zero_set.is_some_and(|z| z.contains(&i));
                if !constrained {
                    s[i] = x[i].signum() * if x[i] == 0.0 { 0.0 } else { 1.0 };
                }
            }
            vec![grad_g.axpy(*weight, &s)]
        }
        NonsmoothPart::Max { pieces } => {
            let active = problem.active_pieces(x, DEFAULT_ACTIVITY_TOL);
            active
                .iter()
                .map(|&i| &grad_g + &pieces[i].gradient(x))
                .collect()
        }
    };
    let projected: Vec<Vector> = reps.iter().map(|r| frame.projector.matvec(r)).collect();
    for other in projected.iter().skip(1) {
        let diff = (other - &projected[0]).norm_inf();
        if diff > 1e-8 {
            return Err(Error::RepresentativeMismatch(diff));
        }
    }
    Ok(projected[0].clone())
}

/// The unique small normal correction v with x + u + v on M, for a tangent
/// step u. Coordinate charts are affine, so v = 0; level-set charts solve
/// F(x + u + N w) = 0 for w by Newton over the normal frame.
pub fn v_correction(chart: &ManifoldChart, x: &Vector, u: &Vector) -> Result<Vector> {
    x.check_dim(chart.dim())?;
    u.check_dim(chart.dim())?;
    chart.require_on_manifold(x)?;
    let frame = tangent_projector(chart, x)?;
    let transverse = frame.normal_projector.matvec(u).norm();
    if transverse > 1e-10 {
        return Err(Error::NotTangent(transverse));
    }
    match chart {
        ManifoldChart::Coord { .. } => Ok(Vector::zeros(chart.dim())),
        ManifoldChart::LevelSet { oracle, .. } => {
            let (_, normal) = tangent_normal_bases(chart, x)?;
            let m = oracle.codim();
            let mut w = Vector::zeros(m);
            let base = x + u;
            for _ in 0..MAX_NEWTON_ITER {
                let y = &base + &normal.matvec(&w);
                let f = oracle.value(&y);
                if f.norm() <= FEASIBILITY_TOL {
                    return Ok(normal.matvec(&w));
                }
                let jn = oracle.jacobian(&y).matmul(&normal);
                let delta = solve_full_rank(&jn, &f)?;
                w = w.axpy(-1.0, &delta);
            }
            Err(Error::NoConvergence {
                what: "v-correction newton",
                iterations: MAX_NEWTON_ITER,
            })
        }
    }
}

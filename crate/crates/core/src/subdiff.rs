//! Convex geometry on subdifferential sets: distances and projections,
//! affine hulls, the VU splitting, relative-interior tests, U-gradients, and
//! the U-Lagrangian evaluator.
//!
//! Polytope projections are exact for up to three hull vertices; larger hulls
//! fall back to accelerated projected gradient over the simplex with a
//! duality-gap stop.

use crate::error::{Error, Result};
use crate::numkit::{least_squares_solve, pivoted_qr, range_and_complement, DenseMatrix, Vector};
use crate::problems::{CompositeProblem, SubdiffSet, DEFAULT_ACTIVITY_TOL};

/// Absolute margin for relative-interior tests; fixture intervals have width
/// at least 0.5, so this cannot produce false positives from round-off.
pub const RI_MARGIN: f64 = 1e-10;

/// Membership tolerance for exact projection paths (boxes, hulls with <= 3
/// vertices).
pub const MEMBERSHIP_TOL: f64 = 1e-10;

/// Membership tolerance when the iterative simplex solver is involved: its
/// duality-gap stop of 1e-12 bounds the distance error by ~sqrt(2 gap).
pub const MEMBERSHIP_TOL_ITERATIVE: f64 = 3e-6;

const SIMPLEX_GAP_TOL: f64 = 1e-12;

/// Orthonormal bases for the VU decomposition at a point.
///
/// V spans the subdifferential differences (the sharp directions), U its
/// orthogonal complement (the smooth directions); dim U + dim V = n.
#[derive(Debug, Clone)]
pub struct VuSplit {
    pub u_basis: DenseMatrix,
    pub v_basis: DenseMatrix,
}

/// The common projection of all subgradients onto the U-space, together with
/// the outcome of the relative-interior membership test.
#[derive(Debug, Clone)]
pub struct UGradient {
    pub vector: Vector,
    pub in_relative_interior: bool,
}

/// Distance from the origin to the set and the unique nearest point.
pub fn dist_zero(s: &SubdiffSet) -> (f64, Vector) {
    match s {
        SubdiffSet::Box { lo, hi } => {
            let proj = Vector::new((0..lo.len()).map(|i| 0.0_f64.clamp(lo[i], hi[i])).collect());
            (proj.norm(), proj)
        }
        SubdiffSet::Hull { vertices } => hull_project_zero(vertices),
    }
}

/// Distance from an arbitrary point to the set.
pub fn dist_to_set(s: &SubdiffSet, g: &Vector) -> f64 {
    dist_zero(&s.translated(g)).0
}

fn hull_project_zero(vertices: &[Vector]) -> (f64, Vector) {
    match vertices.len() {
        1 => (vertices[0].norm(), vertices[0].clone()),
        2 => segment_project_zero(&vertices[0], &vertices[1]),
        3 => triangle_project_zero(vertices),
        _ => simplex_project_zero(vertices),
    }
}

fn segment_project_zero(a: &Vector, b: &Vector) -> (f64, Vector) {
    let d = b - a;
    let dd = d.dot(&d);
    if dd == 0.0 {
        return (a.norm(), a.clone());
    }
    let t = (-a.dot(&d) / dd).clamp(0.0, 1.0);
    let p = a.axpy(t, &d);
    (p.norm(), p)
}

fn triangle_project_zero(vertices: &[Vector]) -> (f64, Vector) {
    // interior candidate from the unconstrained affine least squares
    let n = vertices[0].len();
    let d = DenseMatrix::from_columns(
        n,
        &[&vertices[1] - &vertices[0], &vertices[2] - &vertices[0]],
    );
    let mut best: Option<(f64, Vector)> = None;
    if let Ok(beta) = least_squares_solve(&d, &(-&vertices[0])) {
        let b1 = beta[0];
        let b2 = beta[1];
        if b1 >= 0.0 && b2 >= 0.0 && b1 + b2 <= 1.0 {
            let p = vertices[0].axpy(b1, &d.column(0)).axpy(b2, &d.column(1));
            best = Some((p.norm(), p));
        }
    }
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let cand = segment_project_zero(&vertices[i], &vertices[j]);
        if best.as_ref().is_none_or(|(bn, _)| cand.0 < *bn) {
            best = Some(cand);
        }
    }
    best.expect("triangle projection has a candidate")
}

/// Accelerated projected gradient on the unit simplex for
/// min 1/2 || sum_i alpha_i v_i ||^2, stopped at duality gap 1e-12.
fn simplex_project_zero(vertices: &[Vector]) -> (f64, Vector) {
    let k = vertices.len();
    let mut gram = DenseMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            gram[(i, j)] = vertices[i].dot(&vertices[j]);
        }
    }
    let lip: f64 = (0..k).map(|i| gram[(i, i)]).sum::<f64>().max(1e-30);
    let step = 1.0 / lip;

    let mut alpha = Vector::new(vec![1.0 / k as f64; k]);
    let mut momentum = alpha.clone();
    let mut t_prev = 1.0_f64;
    for _ in 0..200_000 {
        let grad = gram.matvec(&momentum);
        let next = project_to_simplex(&momentum.axpy(-step, &grad));
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_prev * t_prev).sqrt());
        let beta = (t_prev - 1.0) / t_next;
        momentum = next.axpy(beta, &(&next - &alpha));
        alpha = next;
        t_prev = t_next;

        let g = gram.matvec(&alpha);
        let gap = alpha.dot(&g) - g.entries().iter().cloned().fold(f64::INFINITY, f64::min);
        if gap.abs() <= SIMPLEX_GAP_TOL {
            break;
        }
    }
    let mut p = Vector::zeros(vertices[0].len());
    for i in 0..k {
        p = p.axpy(alpha[i], &vertices[i]);
    }
    (p.norm(), p)
}

/// Euclidean projection onto {alpha >= 0, sum alpha = 1}.
fn project_to_simplex(a: &Vector) -> Vector {
    let mut sorted: Vec<f64> = a.entries().to_vec();
    sorted.sort_by(|x, y| y.total_cmp(x));
    let mut cumsum = 0.0;
    let mut rho = 0;
    let mut theta = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let candidate = (cumsum - 1.0) / (i + 1) as f64;
        if v - candidate > 0.0 {
            rho = i + 1;
            theta = candidate;
        }
    }
    debug_assert!(rho > 0);
    Vector::new(a.entries().iter().map(|&v| (v - theta).max(0.0)).collect())
}

/// Projection of the origin onto the affine hull of the set.
pub fn aff_project_zero(s: &SubdiffSet) -> Vector {
    match s {
        SubdiffSet::Box { lo, hi } => Vector::new(
            (0..lo.len())
                .map(|i| if lo[i] < hi[i] { 0.0 } else { lo[i] })
                .collect(),
        ),
        SubdiffSet::Hull { vertices } => {
            if vertices.len() == 1 {
                return vertices[0].clone();
            }
            let n = vertices[0].len();
            let diffs: Vec<Vector> = vertices[1..].iter().map(|v| v - &vertices[0]).collect();
            let d = DenseMatrix::from_columns(n, &diffs);
            let beta = least_squares_solve(&d, &(-&vertices[0]))
                .expect("affine least squares is always solvable");
            &vertices[0] + &d.matvec(&beta)
        }
    }
}

/// V = span(S - g) for any g in S, U = its orthogonal complement.
pub fn vu_split(s: &SubdiffSet) -> VuSplit {
    match s {
        SubdiffSet::Box { lo, hi } => {
            let n = lo.len();
            let free: Vec<usize> = (0..n).filter(|&i| lo[i] < hi[i]).collect();
            let fixed: Vec<usize> = (0..n).filter(|&i| lo[i] >= hi[i]).collect();
            let v_cols: Vec<Vector> = free.iter().map(|&i| Vector::unit(n, i)).collect();
            let u_cols: Vec<Vector> = fixed.iter().map(|&i| Vector::unit(n, i)).collect();
            VuSplit {
                u_basis: DenseMatrix::from_columns(n, &u_cols),
                v_basis: DenseMatrix::from_columns(n, &v_cols),
            }
        }
        SubdiffSet::Hull { vertices } => {
            let n = vertices[0].len();
            let diffs: Vec<Vector> = vertices[1..].iter().map(|v| v - &vertices[0]).collect();
            let d = DenseMatrix::from_columns(n, &diffs);
            let (v_basis, u_basis) = range_and_complement(&d);
            VuSplit { u_basis, v_basis }
        }
    }
}

/// Whether the origin lies in the relative interior of the set.
pub fn ri_contains_zero(s: &SubdiffSet) -> bool {
    match s {
        SubdiffSet::Box { lo, hi } => (0..lo.len()).all(|i| {
            if lo[i] < hi[i] {
                lo[i] < -RI_MARGIN && hi[i] > RI_MARGIN
            } else {
                lo[i].abs() <= RI_MARGIN
            }
        }),
        SubdiffSet::Hull { vertices } => hull_ri_contains_zero(vertices),
    }
}

fn hull_ri_contains_zero(vertices: &[Vector]) -> bool {
    let k = vertices.len();
    let n = vertices[0].len();
    let scale = vertices.iter().map(|v| v.norm()).fold(1.0_f64, f64::max);
    if k == 1 {
        return vertices[0].norm() <= RI_MARGIN;
    }
    let diffs: Vec<Vector> = vertices[1..].iter().map(|v| v - &vertices[0]).collect();
    let d = DenseMatrix::from_columns(n, &diffs);
    let affine_rank = pivoted_qr(&d).rank;

    if k == affine_rank + 1 {
        // affinely independent: the barycentric coordinates of 0 are unique
        let mut m = DenseMatrix::zeros(n + 1, k);
        for j in 0..k {
            for i in 0..n {
                m[(i, j)] = vertices[j][i];
            }
            m[(n, j)] = 1.0;
        }
        let mut rhs = Vector::zeros(n + 1);
        rhs[n] = 1.0;
        let alpha = match least_squares_solve(&m, &rhs) {
            Ok(a) => a,
            Err(_) => return false,
        };
        let residual = (&m.matvec(&alpha) - &rhs).norm();
        if residual > RI_MARGIN * scale.max(1.0) {
            return false; // 0 is not even in the affine hull
        }
        alpha.entries().iter().all(|&a| a > 1e-9)
    } else {
        // affinely dependent vertices: probe a small ball inside the affine
        // hull for membership (iterative projections, coarser tolerance)
        if aff_project_zero(&SubdiffSet::Hull {
            vertices: vertices.to_vec(),
        })
        .norm()
            > RI_MARGIN * scale.max(1.0)
        {
            return false;
        }
        let split = vu_split(&SubdiffSet::Hull {
            vertices: vertices.to_vec(),
        });
        let eps = 1e-3 * scale;
        let tol = MEMBERSHIP_TOL_ITERATIVE * scale.max(1.0);
        for j in 0..split.v_basis.cols() {
            let dir = split.v_basis.column(j).scale(eps);
            let hull = SubdiffSet::Hull {
                vertices: vertices.to_vec(),
            };
            if dist_to_set(&hull, &dir) > tol || dist_to_set(&hull, &dir.scale(-1.0)) > tol {
                return false;
            }
        }
        true
    }
}

/// The U-gradient at x: the projection of the origin onto the affine hull of
/// the subdifferential, flagged with whether it lies in the relative interior
/// of the subdifferential.
pub fn u_gradient(p: &CompositeProblem, x: &Vector) -> Result<UGradient> {
    let s = p.subdiff_at(x, DEFAULT_ACTIVITY_TOL)?;
    let vector = aff_project_zero(&s);
    let in_relative_interior = ri_contains_zero(&s.translated(&vector));
    Ok(UGradient {
        vector,
        in_relative_interior,
    })
}

fn membership_tol(s: &SubdiffSet) -> f64 {
    match s {
        SubdiffSet::Box { .. } => MEMBERSHIP_TOL,
        SubdiffSet::Hull { vertices } if vertices.len() <= 3 => MEMBERSHIP_TOL,
        SubdiffSet::Hull { .. } => MEMBERSHIP_TOL_ITERATIVE,
    }
}

/// Evaluate the U-Lagrangian inf over the V-ball of radius `ball_eps` of
/// f(x + u + v) - <g, v>, by cyclic coordinate descent over the V-basis with
/// golden-section line searches. Returns the value and the minimizing v.
///
/// `g` must be a subgradient at x and `u` a U-space direction; convex callers
/// pass a large `ball_eps` surrogate, the nonconvex path a genuinely local
/// radius.
pub fn u_lagrangian_eval(
    p: &CompositeProblem,
    x: &Vector,
    g: &Vector,
    u: &Vector,
    ball_eps: f64,
) -> Result<(f64, Vector)> {
    x.check_dim(p.dimension())?;
    g.check_dim(p.dimension())?;
    u.check_dim(p.dimension())?;
    if ball_eps <= 0.0 || ball_eps.is_nan() {
        return Err(Error::invalid("ball_eps", "must be positive"));
    }
    let s = p.subdiff_at(x, DEFAULT_ACTIVITY_TOL)?;
    let memb = dist_to_set(&s, g);
    if memb > membership_tol(&s) {
        return Err(Error::NotASubgradient(memb));
    }
    let split = vu_split(&s);
    let v_comp = split.v_basis.matvec_t(u).norm();
    if v_comp > 1e-10 {
        return Err(Error::NotTangent(v_comp));
    }

    let dv = split.v_basis.cols();
    let base = x + u;
    let objective = |c: &Vector| -> f64 {
        let v = split.v_basis.matvec(c);
        let y = &base + &v;
        p.eval_f(&y).expect("in-dimension evaluation") - g.dot(&v)
    };

    if dv == 0 {
        return Ok((objective(&Vector::zeros(0)), Vector::zeros(p.dimension())));
    }

    let mut c = Vector::zeros(dv);
    let mut value = objective(&c);
    let x_tol = 1e-11;
    let mut converged = false;
    for _cycle in 0..500 {
        let mut max_move = 0.0_f64;
        let start_value = value;
        for j in 0..dv {
            let others: f64 = (0..dv).filter(|&k| k != j).map(|k| c[k] * c[k]).sum();
            let bound = (ball_eps * ball_eps - others).max(0.0).sqrt();
            let f1 = |t: f64| {
                let mut ct = c.clone();
                ct[j] = t;
                objective(&ct)
            };
            let t_star = golden_section(&f1, -bound, bound, x_tol);
            max_move = max_move.max((t_star - c[j]).abs());
            c[j] = t_star;
        }
        value = objective(&c);
        if max_move <= x_tol && start_value - value <= 1e-13 * (1.0 + value.abs()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::InnerSolve);
    }
    Ok((value, split.v_basis.matvec(&c)))
}

/// Golden-section search for the minimum of a unimodal function on [a, b].
fn golden_section(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, x_tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > x_tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    // the boundary of the original interval may beat the interior bracket
    if f(mid) <= fc.min(fd) {
        mid
    } else if fc < fd {
        c
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{NonsmoothPart, QuadraticDistance};
    use std::sync::Arc;

    fn lasso2d() -> CompositeProblem {
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

    fn vbox(lo: &[f64], hi: &[f64]) -> SubdiffSet {
        SubdiffSet::new_box(Vector::new(lo.to_vec()), Vector::new(hi.to_vec())).unwrap()
    }

    fn vhull(vs: &[&[f64]]) -> SubdiffSet {
        SubdiffSet::new_hull(vs.iter().map(|v| Vector::new(v.to_vec())).collect()).unwrap()
    }

    #[test]
    fn dist_zero_box_containing_origin() {
        let (d, p) = dist_zero(&vbox(&[0.0, -1.5], &[0.0, 0.5]));
        assert_eq!(d, 0.0);
        assert_eq!(p.entries(), &[0.0, 0.0]);
    }

    #[test]
    fn dist_zero_box_offset() {
        let (d, p) = dist_zero(&vbox(&[1.0, -1.5], &[1.0, 0.5]));
        assert!((d - 1.0).abs() < 1e-15);
        assert_eq!(p.entries(), &[1.0, 0.0]);
    }

    #[test]
    fn dist_zero_segment_midpoint() {
        let (d, p) = dist_zero(&vhull(&[&[1.0, 0.0], &[0.0, 1.0]]));
        assert!((d - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        assert!((p[0] - 0.5).abs() < 1e-14 && (p[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn dist_zero_triangle_interior_and_vertex() {
        // triangle containing the origin strictly
        let (d, _) = dist_zero(&vhull(&[&[-1.0, -1.0], &[2.0, -1.0], &[0.0, 2.0]]));
        assert!(d < 1e-12);
        // triangle with nearest point at a vertex
        let (d, p) = dist_zero(&vhull(&[&[1.0, 1.0], &[2.0, 1.0], &[1.0, 2.0]]));
        assert!((d - (2.0_f64).sqrt()).abs() < 1e-12);
        assert!((p[0] - 1.0).abs() < 1e-12 && (p[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dist_zero_big_hull_matches_brute_force() {
        // 4 vertices forces the iterative simplex path; oracle = dense
        // sampling of barycentric coordinates
        let vs = [&[1.0, 0.2][..], &[2.0, 0.0], &[1.0, 1.0], &[2.5, 1.5]];
        let set = vhull(&vs);
        let (d, p) = dist_zero(&set);
        let verts: Vec<Vector> = vs.iter().map(|v| Vector::new(v.to_vec())).collect();
        let mut best = f64::INFINITY;
        let m = 60;
        for i in 0..=m {
            for j in 0..=(m - i) {
                for k in 0..=(m - i - j) {
                    let l = m - i - j - k;
                    let w = [i, j, k, l].map(|v| v as f64 / m as f64);
                    let mut q = Vector::zeros(2);
                    for (idx, &wi) in w.iter().enumerate() {
                        q = q.axpy(wi, &verts[idx]);
                    }
                    best = best.min(q.norm());
                }
            }
        }
        assert!((d - best).abs() < 1e-3, "simplex {d} vs brute {best}");
        // projection lies in the set
        assert!(dist_to_set(&set, &p) < 1e-6);
    }

    #[test]
    fn aff_project_examples() {
        assert_eq!(
            aff_project_zero(&vbox(&[1.0, -1.5], &[1.0, 0.5])).entries(),
            &[1.0, 0.0]
        );
        assert_eq!(
            aff_project_zero(&vbox(&[0.0, -1.5], &[0.0, 0.5])).entries(),
            &[0.0, 0.0]
        );
        assert_eq!(
            aff_project_zero(&vhull(&[&[3.0, 4.0]])).entries(),
            &[3.0, 4.0]
        );
    }

    #[test]
    fn vu_split_box_free_second_coordinate() {
        let split = vu_split(&vbox(&[0.0, -1.5], &[0.0, 0.5]));
        assert_eq!(split.v_basis.cols(), 1);
        assert_eq!(split.u_basis.cols(), 1);
        assert_eq!(split.v_basis.column(0).entries(), &[0.0, 1.0]);
        assert_eq!(split.u_basis.column(0).entries(), &[1.0, 0.0]);
    }

    #[test]
    fn vu_split_singleton_hull_full_u() {
        let split = vu_split(&vhull(&[&[3.0, 4.0]]));
        assert_eq!(split.v_basis.cols(), 0);
        assert_eq!(split.u_basis.cols(), 2);
    }

    #[test]
    fn vu_split_box_all_free() {
        let split = vu_split(&vbox(&[-1.0, -1.0], &[1.0, 1.0]));
        assert_eq!(split.v_basis.cols(), 2);
        assert_eq!(split.u_basis.cols(), 0);
    }

    #[test]
    fn ri_examples() {
        assert!(ri_contains_zero(&vbox(&[0.0, -1.5], &[0.0, 0.5])));
        assert!(!ri_contains_zero(&vbox(&[0.0, -2.0], &[0.0, 0.0])));
        assert!(!ri_contains_zero(&vbox(&[1.0, -1.5], &[1.0, 0.5])));
    }

    #[test]
    fn ri_hull_segment() {
        assert!(ri_contains_zero(&vhull(&[&[0.0, 1.0], &[0.0, -1.0]])));
        // origin at an endpoint is not in the relative interior
        assert!(!ri_contains_zero(&vhull(&[&[0.0, 0.0], &[0.0, 1.0]])));
        assert!(!ri_contains_zero(&vhull(&[&[0.0, 0.5], &[0.0, 1.0]])));
    }

    #[test]
    fn ri_hull_affinely_dependent_fallback() {
        // square (4 vertices, affine rank 2) strictly containing the origin
        let inside = vhull(&[&[-1.0, -1.0], &[1.0, -1.0], &[1.0, 1.0], &[-1.0, 1.0]]);
        assert!(ri_contains_zero(&inside));
        // origin on the boundary edge
        let boundary = vhull(&[&[0.0, -1.0], &[0.0, 1.0], &[1.0, 1.0], &[1.0, -1.0]]);
        assert!(!ri_contains_zero(&boundary));
    }

    #[test]
    fn u_gradient_lasso_examples() {
        let p = lasso2d();
        let g = u_gradient(&p, &Vector::new(vec![2.0, 0.0])).unwrap();
        assert!((g.vector[0] - 1.0).abs() < 1e-12 && g.vector[1].abs() < 1e-12);
        assert!(g.in_relative_interior);

        let g = u_gradient(&p, &Vector::new(vec![1.0, 0.0])).unwrap();
        assert!(g.vector.norm() < 1e-12);
        assert!(g.in_relative_interior);
    }

    #[test]
    fn u_gradient_smooth_point() {
        let p = CompositeProblem::new(
            2,
            Arc::new(QuadraticDistance {
                target: Vector::new(vec![2.0, 0.5]),
            }),
            1.0,
            NonsmoothPart::None,
            true,
        )
        .unwrap();
        let x = Vector::new(vec![0.5, 0.25]);
        let g = u_gradient(&p, &x).unwrap();
        let grad = p.smooth_gradient(&x);
        assert!((&g.vector - &grad).norm() < 1e-14);
        assert!(g.in_relative_interior);
    }

    #[test]
    fn u_lagrangian_at_zero_direction() {
        let p = lasso2d();
        let x = Vector::new(vec![1.0, 0.0]);
        let (val, v) =
            u_lagrangian_eval(&p, &x, &Vector::zeros(2), &Vector::zeros(2), 1e3).unwrap();
        assert!((val - p.eval_f(&x).unwrap()).abs() < 1e-9);
        assert!(v.norm() < 1e-8);
    }

    #[test]
    fn u_lagrangian_lasso_value() {
        // brute-force oracle over the V line confirms the frozen value 1.63
        let p = lasso2d();
        let x = Vector::new(vec![1.0, 0.0]);
        let u = Vector::new(vec![0.1, 0.0]);
        let mut oracle = f64::INFINITY;
        let grid = 400_001;
        for i in 0..grid {
            let v2 = -2.0 + 4.0 * i as f64 / (grid - 1) as f64;
            let y = Vector::new(vec![1.1, v2]);
            oracle = oracle.min(p.eval_f(&y).unwrap());
        }
        assert!((oracle - 1.63).abs() < 1e-8, "oracle {oracle}");

        let (val, v) = u_lagrangian_eval(&p, &x, &Vector::zeros(2), &u, 1e3).unwrap();
        assert!((val - 1.63).abs() < 1e-9, "value {val}");
        assert!(v.norm() < 1e-8);
    }

    #[test]
    fn u_lagrangian_first_order_decay() {
        let p = lasso2d();
        let x = Vector::new(vec![1.0, 0.0]);
        let f0 = p.eval_f(&x).unwrap();
        let scales = [0.1, 0.05, 0.025];
        let mut logs = Vec::new();
        for &s in &scales {
            let u = Vector::new(vec![s, 0.0]);
            let (val, _) = u_lagrangian_eval(&p, &x, &Vector::zeros(2), &u, 1e3).unwrap();
            let gap = val - f0; // <g_U, u> = 0 at the minimizer
            assert!(gap > 0.0);
            logs.push((s.ln(), gap.ln()));
        }
        let slope = crate::numkit::fit_line_slope(&logs);
        assert!(slope >= 1.9, "log-log slope {slope}");
    }

    #[test]
    fn u_lagrangian_rejects_non_subgradient() {
        let p = lasso2d();
        let x = Vector::new(vec![1.0, 0.0]);
        let g = Vector::new(vec![5.0, 0.0]);
        assert!(matches!(
            u_lagrangian_eval(&p, &x, &g, &Vector::zeros(2), 1e3),
            Err(Error::NotASubgradient(_))
        ));
    }

    #[test]
    fn u_lagrangian_rejects_v_direction() {
        let p = lasso2d();
        let x = Vector::new(vec![1.0, 0.0]);
        let u = Vector::new(vec![0.0, 0.1]); // V direction at the minimizer
        assert!(matches!(
            u_lagrangian_eval(&p, &x, &Vector::zeros(2), &u, 1e3),
            Err(Error::NotTangent(_))
        ));
    }
}

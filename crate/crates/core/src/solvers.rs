//! Proximal-gradient iteration with identification detection, a reduced
//! Newton polisher on an identified chart, and the reference-minimizer
//! pipeline that chains them.

use crate::error::{Error, Result};
use crate::manifolds::{
    project_to_manifold, riemannian_grad, tangent_normal_bases, ManifoldChart, PieceGap,
};
use crate::numkit::{solve_spd, DenseMatrix, Vector};
use crate::problems::{CompositeProblem, NonsmoothPart, DEFAULT_ACTIVITY_TOL};
use crate::subdiff::dist_zero;
use std::collections::BTreeSet;
use std::io::{self, Write};
use std::sync::Arc;

/// Iterate history of a proximal-gradient run.
///
/// `supports[k]` is the set of coordinates with |x_i| > 0 at iterate k, and
/// `residuals[k] = ||x_k - prox_step(x_k)|| / t`.
#[derive(Debug, Clone)]
pub struct SolveTrace {
    pub iterates: Vec<Vector>,
    pub supports: Vec<BTreeSet<usize>>,
    pub residuals: Vec<f64>,
    pub step: f64,
}

impl SolveTrace {
    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    pub fn final_iterate(&self) -> &Vector {
        self.iterates.last().expect("nonempty trace")
    }
}

fn support_of(x: &Vector) -> BTreeSet<usize> {
    (0..x.len()).filter(|&i| x[i] != 0.0).collect()
}

/// Repeated application of x -> prox_{th}(x - t grad g(x)), recording every
/// iterate, its support, and its residual, until the residual drops to `tol`
/// or `max_iter` prox applications have been made. The starting point is
/// recorded, so a fixed point terminates at iteration 0.
pub fn prox_gradient_solve(
    problem: &CompositeProblem,
    x0: &Vector,
    t: f64,
    tol: f64,
    max_iter: usize,
) -> Result<SolveTrace> {
    x0.check_dim(problem.dimension())?;
    if !(t > 0.0 && tol > 0.0) {
        return Err(Error::invalid(
            "solver parameters",
            "t and tol must be positive",
        ));
    }
    let mut trace = SolveTrace {
        iterates: Vec::new(),
        supports: Vec::new(),
        residuals: Vec::new(),
        step: t,
    };
    let mut x = x0.clone();
    loop {
        let next = problem.prox_step(&x, t)?;
        let residual = (&x - &next).norm() / t;
        trace.iterates.push(x.clone());
        trace.supports.push(support_of(&x));
        trace.residuals.push(residual);
        if residual <= tol || trace.iterates.len() > max_iter {
            return Ok(trace);
        }
        x = next;
    }
}

/// Outcome of scanning a trace for finite identification of a manifold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Identification {
    Identified {
        index: usize,
        stable_support: BTreeSet<usize>,
    },
    NotIdentified,
}

/// Smallest index k such that every iterate from k onward lies on the
/// manifold within `membership_tol`. Pass 0.0 for exact membership on
/// coordinate charts (the support bookkeeping is exact as well); level-set
/// charts need a positive tolerance.
pub fn identification_index(
    trace: &SolveTrace,
    chart: &ManifoldChart,
    membership_tol: f64,
) -> Identification {
    if trace.is_empty() {
        return Identification::NotIdentified;
    }
    let on: Vec<bool> = trace
        .iterates
        .iter()
        .map(|x| chart.is_on_manifold(x, membership_tol))
        .collect();
    if !*on.last().expect("nonempty") {
        return Identification::NotIdentified;
    }
    let mut index = on.len() - 1;
    while index > 0 && on[index - 1] {
        index -= 1;
    }
    Identification::Identified {
        index,
        stable_support: trace.supports.last().expect("nonempty").clone(),
    }
}

const FD_STEP: f64 = 1e-5;
const MAX_POLISH_ITER: usize = 50;

/// Newton on the chart-reduced function with a central-difference Hessian and
/// Armijo backtracking; stops when the Riemannian gradient norm reaches `tol`.
pub fn reduced_newton_polish(
    problem: &CompositeProblem,
    chart: &ManifoldChart,
    x: &Vector,
    tol: f64,
) -> Result<Vector> {
    x.check_dim(problem.dimension())?;
    let d = chart.manifold_dim();
    let mut x = project_to_manifold(chart, x)?;
    for _ in 0..MAX_POLISH_ITER {
        let grad = riemannian_grad(chart, problem, &x)?;
        if grad.norm() <= tol {
            return Ok(x);
        }
        if d == 0 {
            // zero-dimensional manifold: the point cannot move
            return Err(Error::NoConvergence {
                what: "reduced newton",
                iterations: 0,
            });
        }
        let (tangent, _) = tangent_normal_bases(chart, &x)?;
        let g_red = tangent.matvec_t(&grad);

        let retract = |delta: &Vector| -> Result<Vector> {
            project_to_manifold(chart, &(&x + &tangent.matvec(delta)))
        };
        let value_at = |delta: &Vector| -> Result<f64> { problem.eval_f(&retract(delta)?) };

        // central-difference reduced Hessian
        let mut hess = DenseMatrix::zeros(d, d);
        let f0 = value_at(&Vector::zeros(d))?;
        for j in 0..d {
            let mut ej = Vector::zeros(d);
            ej[j] = FD_STEP;
            let fp = value_at(&ej)?;
            let fm = value_at(&ej.scale(-1.0))?;
            hess[(j, j)] = (fp - 2.0 * f0 + fm) / (FD_STEP * FD_STEP);
        }
        for j in 0..d {
            for k in j + 1..d {
                let mut e = Vector::zeros(d);
                e[j] = FD_STEP;
                e[k] = FD_STEP;
                let fpp = value_at(&e)?;
                e[k] = -FD_STEP;
                let fpm = value_at(&e)?;
                e[j] = -FD_STEP;
                let fmm = value_at(&e)?;
                e[k] = FD_STEP;
                let fmp = value_at(&e)?;
                let v = (fpp - fpm - fmp + fmm) / (4.0 * FD_STEP * FD_STEP);
                hess[(j, k)] = v;
                hess[(k, j)] = v;
            }
        }
        let step = solve_spd(&hess, &g_red.scale(-1.0)).ok_or(Error::IndefiniteHessian)?;
        let slope = g_red.dot(&step);

        // full Newton step first: in the quadratic phase the function values
        // sit at the retraction noise floor and a value-based line search
        // cannot resolve the decrease, but the analytic gradient can
        let full = retract(&step)?;
        let g_full = riemannian_grad(chart, problem, &full)?;
        if g_full.norm() <= 0.9 * grad.norm() {
            x = full;
            continue;
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = step.scale(alpha);
            let f_trial = value_at(&trial)?;
            if f_trial <= f0 + 1e-4 * alpha * slope {
                accepted = Some(retract(&trial)?);
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some(next) => x = next,
            None => {
                return Err(Error::NoConvergence {
                    what: "reduced newton line search",
                    iterations: 40,
                })
            }
        }
    }
    Err(Error::NoConvergence {
        what: "reduced newton",
        iterations: MAX_POLISH_ITER,
    })
}

const REFERENCE_TOL: f64 = 1e-12;

/// Compute a point with dist(0, subdifferential) below 1e-12 reachable from
/// x0: proximal gradient (or subgradient descent for the max family) to get
/// near the minimizer, then reduced Newton on the identified chart, then an
/// optimality certificate from the exact subdifferential oracle.
pub fn reference_minimizer(problem: &CompositeProblem, x0: &Vector) -> Result<Vector> {
    x0.check_dim(problem.dimension())?;
    match problem.nonsmooth() {
        NonsmoothPart::None | NonsmoothPart::L1 { .. } => {
            let t = 1.0 / problem.lipschitz();
            let trace = prox_gradient_solve(problem, x0, t, 1e-12, 5_000)?;
            let xk = trace.final_iterate().clone();
            let zero_set: Vec<usize> = match problem.nonsmooth() {
                NonsmoothPart::L1 { .. } => (0..xk.len()).filter(|&i| xk[i] == 0.0).collect(),
                _ => Vec::new(),
            };
            let chart = ManifoldChart::coord(problem.dimension(), zero_set);
            let polished = reduced_newton_polish(problem, &chart, &xk, 1e-13)?;
            certify(problem, polished)
        }
        NonsmoothPart::Max { pieces } => {
            let x = subgradient_descent(problem, x0, 3_000);
            let npieces = pieces.len();
            // candidate active sets, nearest ties first
            let vals: Vec<f64> = pieces.iter().map(|p| p.value(&x)).collect();
            let mut pairs: Vec<(usize, usize)> = Vec::new();
            for i in 0..npieces {
                for j in i + 1..npieces {
                    pairs.push((i, j));
                }
            }
            pairs.sort_by(|a, b| {
                let ga = (vals[a.0] - vals[a.1]).abs();
                let gb = (vals[b.0] - vals[b.1]).abs();
                ga.total_cmp(&gb)
            });
            let mut best_residual = f64::INFINITY;
            for (i, j) in pairs {
                let chart = ManifoldChart::level_set(
                    Arc::new(PieceGap::new(
                        problem.dimension(),
                        pieces[i].clone(),
                        pieces[j].clone(),
                    )),
                    0.5,
                );
                if let Ok(polished) = project_to_manifold(&chart, &x)
                    .and_then(|xc| reduced_newton_polish(problem, &chart, &xc, 1e-13))
                {
                    match certify(problem, polished) {
                        Ok(p) => return Ok(p),
                        Err(Error::NoReference { best_residual: r }) => {
                            best_residual = best_residual.min(r)
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
            // single-piece candidates: smooth Newton on the full space
            let full = ManifoldChart::coord(problem.dimension(), []);
            if let Ok(polished) = reduced_newton_polish(problem, &full, &x, 1e-13) {
                match certify(problem, polished) {
                    Ok(p) => return Ok(p),
                    Err(Error::NoReference { best_residual: r }) => {
                        best_residual = best_residual.min(r)
                    }
                    Err(e) => return Err(e),
                }
            }
            Err(Error::NoReference { best_residual })
        }
    }
}

fn certify(problem: &CompositeProblem, x: Vector) -> Result<Vector> {
    let s = problem.subdiff_at(&x, DEFAULT_ACTIVITY_TOL)?;
    let (dist, _) = dist_zero(&s);
    if dist <= REFERENCE_TOL {
        Ok(x)
    } else {
        Err(Error::NoReference {
            best_residual: dist,
        })
    }
}

/// Plain subgradient descent with diminishing steps, keeping the best point.
fn subgradient_descent(problem: &CompositeProblem, x0: &Vector, iterations: usize) -> Vector {
    let mut x = x0.clone();
    let mut best = x.clone();
    let mut best_val = problem.eval_f(&x).expect("in-dimension");
    for k in 0..iterations {
        let s = problem
            .subdiff_at(&x, DEFAULT_ACTIVITY_TOL)
            .expect("in-dimension");
        let (norm, g) = dist_zero(&s);
        if norm <= 1e-14 {
            break;
        }
        let alpha = 0.3 / ((k + 1) as f64).sqrt();
        x = x.axpy(-alpha / norm, &g);
        let v = problem.eval_f(&x).expect("in-dimension");
        if v < best_val {
            best_val = v;
            best = x.clone();
        }
    }
    best
}

/// CSV export: one row per iteration with columns
/// k, x_1..x_n, f, residual, support (semicolon-joined 1-based indices).
pub fn write_trace_csv<W: Write>(
    problem: &CompositeProblem,
    trace: &SolveTrace,
    out: &mut W,
) -> io::Result<()> {
    let n = problem.dimension();
    write!(out, "k")?;
    for i in 1..=n {
        write!(out, ",x_{i}")?;
    }
    writeln!(out, ",f,residual,support")?;
    for (k, x) in trace.iterates.iter().enumerate() {
        write!(out, "{k}")?;
        for i in 0..n {
            write!(out, ",{}", x[i])?;
        }
        let f = problem.eval_f(x).expect("in-dimension");
        let support: Vec<String> = trace.supports[k]
            .iter()
            .map(|i| (i + 1).to_string())
            .collect();
        writeln!(out, ",{f},{},{}", trace.residuals[k], support.join(";"))?;
    }
    Ok(())
}

//! Exact solvers for the three shapes every estimator reduces to:
//! unconstrained least squares, least squares with one linear equality, and
//! least squares with one linear inequality (two-phase), plus the two
//! penalty augmentations (rank-one quadratic and linear).
//!
//! All solves go through an SVD-backed symmetric solve with a relative rank
//! cutoff; rank-deficient systems get the minimum-norm completion and a
//! diagnostic flag.

use crate::error::Error;
use nalgebra::{DMatrix, DVector};

/// Relative singular-value cutoff for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// Default KKT residual acceptance (relative).
pub const DEFAULT_SOLVER_TOL: f64 = 1e-8;

/// One linear constraint `a' theta (= | <=) b`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    pub a: DVector<f64>,
    pub b: f64,
    pub sense: ConstraintSense,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintSense {
    Equality,
    Le,
}

impl LinearConstraint {
    pub fn equality(a: DVector<f64>, b: f64) -> Self {
        Self {
            a,
            b,
            sense: ConstraintSense::Equality,
        }
    }

    pub fn le(a: DVector<f64>, b: f64) -> Self {
        Self {
            a,
            b,
            sense: ConstraintSense::Le,
        }
    }
}

/// Solution of one of the solver shapes.
///
/// `multiplier` is the Lagrange multiplier of the constraint row in the
/// normalized system `[X'X, a; a', 0] (theta, mu) = (X'y, b)` (zero for
/// unconstrained solves). With that normalization a binding net-compensation
/// constraint corresponds to the penalized fit at `lambda = 2 * multiplier`.
#[derive(Clone, Debug)]
pub struct KktSolution {
    pub theta: DVector<f64>,
    pub multiplier: f64,
    /// Max-norm of stationarity + feasibility residuals, relative.
    pub residual_norm: f64,
    /// Sum of squared errors at `theta` plus any penalty term with its
    /// constants restored.
    pub objective_value: f64,
    pub constraint_active: bool,
    pub rank_deficient: bool,
    /// Set when an inequality with `a = 0, b >= 0` was dropped as constant.
    pub vacuous_constraint: bool,
}

fn check_finite(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<(), Error> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("design matrix".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("outcome vector".into()));
    }
    Ok(())
}

/// Minimum-norm solution of a (possibly singular) symmetric system.
fn solve_min_norm(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<(DVector<f64>, bool), Error> {
    let svd = m.clone().svd(true, true);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    if max_sv == 0.0 {
        // zero matrix: min-norm solution is zero iff rhs is zero
        if rhs.amax() > 0.0 {
            return Err(Error::Solver("singular system with nonzero right-hand side".into()));
        }
        return Ok((DVector::zeros(m.ncols()), true));
    }
    let cutoff = RANK_TOL * max_sv;
    let rank_deficient = svd.singular_values.iter().any(|&s| s <= cutoff);
    let u = svd.u.as_ref().expect("svd computed with u");
    let vt = svd.v_t.as_ref().expect("svd computed with v_t");
    let apply = |b: &DVector<f64>| -> DVector<f64> {
        let mut coeffs = u.transpose() * b;
        for (i, c) in coeffs.iter_mut().enumerate() {
            let s = svd.singular_values[i];
            *c = if s > cutoff { *c / s } else { 0.0 };
        }
        vt.transpose() * coeffs
    };
    let mut sol = apply(rhs);
    // a couple of refinement sweeps recover digits lost to roundoff when
    // the system mixes very different magnitudes
    for _ in 0..2 {
        let r = rhs - m * &sol;
        sol += apply(&r);
    }
    Ok((sol, rank_deficient))
}

fn sse(x: &DMatrix<f64>, y: &DVector<f64>, theta: &DVector<f64>) -> f64 {
    let r = y - x * theta;
    r.dot(&r)
}

fn stationarity_residual(gram: &DMatrix<f64>, rhs: &DVector<f64>, theta: &DVector<f64>) -> f64 {
    let r = gram * theta - rhs;
    r.amax() / rhs.amax().max(1.0)
}

/// Ordinary least squares: `X'X theta = X'y`, minimum-norm under rank
/// deficiency.
pub fn solve_ls(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<KktSolution, Error> {
    check_finite(x, y)?;
    let gram = x.transpose() * x;
    let rhs = x.transpose() * y;
    let (theta, rank_deficient) = solve_min_norm(&gram, &rhs)?;
    let residual_norm = stationarity_residual(&gram, &rhs, &theta);
    Ok(KktSolution {
        objective_value: sse(x, y, &theta),
        theta,
        multiplier: 0.0,
        residual_norm,
        constraint_active: false,
        rank_deficient,
        vacuous_constraint: false,
    })
}

/// Least squares subject to one linear equality, via the bordered KKT
/// system `[X'X, a; a', 0] (theta, mu) = (X'y, b)`.
pub fn solve_ls_eq(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    c: &LinearConstraint,
) -> Result<KktSolution, Error> {
    check_finite(x, y)?;
    if c.a.amax() == 0.0 {
        return Err(Error::InvalidConstraint(
            "equality constraint has an all-zero coefficient vector".into(),
        ));
    }
    let p = x.ncols();
    let gram = x.transpose() * x;
    let xty = x.transpose() * y;

    // Scale the border row/column to the magnitude of the Gram block so a
    // single SVD rank cutoff treats both; the multiplier scales back exactly.
    let border_scale = (gram.amax().max(1.0) / c.a.amax()).sqrt();
    let mut bordered = DMatrix::zeros(p + 1, p + 1);
    bordered.view_mut((0, 0), (p, p)).copy_from(&gram);
    for i in 0..p {
        bordered[(i, p)] = border_scale * c.a[i];
        bordered[(p, i)] = border_scale * c.a[i];
    }
    let mut rhs = DVector::zeros(p + 1);
    rhs.rows_mut(0, p).copy_from(&xty);
    rhs[p] = border_scale * c.b;

    let (sol, rank_deficient) = solve_min_norm(&bordered, &rhs)?;
    let theta = DVector::from_iterator(p, sol.iter().take(p).cloned());
    let multiplier = border_scale * sol[p];

    let scale = xty.amax().max(1.0);
    let stationarity = (&gram * &theta + &c.a * multiplier - &xty).amax() / scale;
    let feasibility = (c.a.dot(&theta) - c.b).abs() / c.b.abs().max(1.0);
    let residual_norm = stationarity.max(feasibility);
    if residual_norm > 1e-6 {
        return Err(Error::Solver(format!(
            "bordered KKT system left residual {residual_norm:.3e}; system is singular beyond rank tolerance"
        )));
    }
    Ok(KktSolution {
        objective_value: sse(x, y, &theta),
        theta,
        multiplier,
        residual_norm,
        constraint_active: true,
        rank_deficient,
        vacuous_constraint: false,
    })
}

/// Least squares subject to one `a' theta <= b` constraint, two-phase:
/// return the unconstrained optimum if feasible, otherwise the equality
/// solve on the boundary. Complementary slackness holds by construction.
pub fn solve_ls_ineq(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    c: &LinearConstraint,
) -> Result<KktSolution, Error> {
    check_finite(x, y)?;
    if c.a.amax() == 0.0 {
        if c.b < 0.0 {
            return Err(Error::InfeasibleConstraint(format!(
                "constraint 0 <= {} can never hold",
                c.b
            )));
        }
        let mut sol = solve_ls(x, y)?;
        sol.vacuous_constraint = true;
        return Ok(sol);
    }
    let unconstrained = solve_ls(x, y)?;
    let slack_tol = 1e-9 * c.b.abs().max(1.0);
    if c.a.dot(&unconstrained.theta) <= c.b + slack_tol {
        return Ok(unconstrained);
    }
    let eq = LinearConstraint::equality(c.a.clone(), c.b);
    let mut sol = solve_ls_eq(x, y, &eq)?;
    // convexity guarantees mu >= 0 when the unconstrained optimum is
    // infeasible; clamp numeric dust
    if sol.multiplier < 0.0 && sol.multiplier > -1e-9 {
        sol.multiplier = 0.0;
    }
    sol.constraint_active = true;
    Ok(sol)
}

/// Least squares plus a rank-one quadratic penalty
/// `lambda * (r0 - theta' d)^2`, solved exactly through its stationarity
/// system `(X'X + lambda d d') theta = X'y + lambda r0 d`.
pub fn solve_ls_rank1_penalty(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    d: &DVector<f64>,
    r0: f64,
    lambda: f64,
) -> Result<KktSolution, Error> {
    check_finite(x, y)?;
    if lambda < 0.0 {
        return Err(Error::InvalidHyperparameter(format!(
            "penalty weight {lambda} must be nonnegative"
        )));
    }
    let gram = x.transpose() * x + d * d.transpose() * lambda;
    let rhs = x.transpose() * y + d * (lambda * r0);
    let (theta, rank_deficient) = solve_min_norm(&gram, &rhs)?;
    let residual_norm = stationarity_residual(&gram, &rhs, &theta);
    let gap = r0 - theta.dot(d);
    Ok(KktSolution {
        objective_value: sse(x, y, &theta) + lambda * gap * gap,
        theta,
        multiplier: 0.0,
        residual_norm,
        constraint_active: false,
        rank_deficient,
        vacuous_constraint: false,
    })
}

/// Least squares plus a linear penalty `lambda * (r0 - theta' a)`, solved
/// through `X'X theta = X'y + (lambda / 2) a`. The constant `r0` does not
/// affect the minimizer; it is only restored in the reported objective.
pub fn solve_ls_linear_penalty(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    a: &DVector<f64>,
    r0: f64,
    lambda: f64,
) -> Result<KktSolution, Error> {
    check_finite(x, y)?;
    if lambda < 0.0 {
        return Err(Error::InvalidHyperparameter(format!(
            "penalty weight {lambda} must be nonnegative"
        )));
    }
    let gram = x.transpose() * x;
    let rhs = x.transpose() * y + a * (lambda / 2.0);
    let (theta, rank_deficient) = solve_min_norm(&gram, &rhs)?;
    let residual_norm = stationarity_residual(&gram, &rhs, &theta);
    Ok(KktSolution {
        objective_value: sse(x, y, &theta) + lambda * (r0 - theta.dot(a)),
        theta,
        multiplier: 0.0,
        residual_norm,
        constraint_active: false,
        rank_deficient,
        vacuous_constraint: false,
    })
}

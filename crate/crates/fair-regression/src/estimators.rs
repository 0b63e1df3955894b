//! The six estimators: plain OLS plus five fairness-aware variants, each
//! reduced to one of the `solver` shapes by building its constraint or
//! penalty from group aggregates.
//!
//! Sign conventions: penalties and constraints are expressed in the
//! outcome-minus-prediction residual (so the net compensation penalty adds
//! to the squared error when the group is underpredicted), while reported
//! metrics use prediction-minus-outcome.

use crate::data::{Dataset, FitResult, FitSpec, GroupView};
use crate::error::Error;
use crate::solver::{
    solve_ls, solve_ls_eq, solve_ls_ineq, solve_ls_linear_penalty, solve_ls_rank1_penalty,
    KktSolution, LinearConstraint,
};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// Estimator selector with its hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Estimator {
    Ols,
    AvgConstrained,
    WeightedAvgConstrained { alpha: f64 },
    CovConstrained { m: f64 },
    MrdPenalized { lambda: f64 },
    NetcompPenalized { lambda: f64 },
    NetcompConstrained {
        z: f64,
        /// Interpret `z` as a fraction of the group mean outcome instead of
        /// absolute outcome units.
        #[serde(default)]
        z_fraction_of_group_mean: bool,
    },
}

impl Estimator {
    pub fn validate(&self) -> Result<(), Error> {
        match *self {
            Estimator::Ols | Estimator::AvgConstrained => Ok(()),
            Estimator::WeightedAvgConstrained { alpha } => {
                if (0.0..=1.0).contains(&alpha) {
                    Ok(())
                } else {
                    Err(Error::InvalidHyperparameter(format!(
                        "alpha {alpha} must lie in [0, 1]"
                    )))
                }
            }
            Estimator::CovConstrained { m } => {
                if (0.0..=1.0).contains(&m) {
                    Ok(())
                } else {
                    Err(Error::InvalidHyperparameter(format!(
                        "m {m} must lie in [0, 1]"
                    )))
                }
            }
            Estimator::MrdPenalized { lambda } | Estimator::NetcompPenalized { lambda } => {
                if lambda >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidHyperparameter(format!(
                        "lambda {lambda} must be nonnegative"
                    )))
                }
            }
            Estimator::NetcompConstrained { z, .. } => {
                if z >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidHyperparameter(format!(
                        "z {z} must be nonnegative"
                    )))
                }
            }
        }
    }

    /// Short name used in tables and error context.
    pub fn label(&self) -> String {
        match self {
            Estimator::Ols => "ols".into(),
            Estimator::AvgConstrained => "avg_constrained".into(),
            Estimator::WeightedAvgConstrained { alpha } => {
                format!("weighted_avg(alpha={alpha})")
            }
            Estimator::CovConstrained { m } => format!("cov_constrained(m={m})"),
            Estimator::MrdPenalized { lambda } => format!("mrd_penalized(lambda={lambda})"),
            Estimator::NetcompPenalized { lambda } => {
                format!("netcomp_penalized(lambda={lambda})")
            }
            Estimator::NetcompConstrained { z, z_fraction_of_group_mean } => {
                if *z_fraction_of_group_mean {
                    format!("netcomp_constrained(z={z}*ybar_g)")
                } else {
                    format!("netcomp_constrained(z={z})")
                }
            }
        }
    }
}

/// Guideline default for the net compensation penalty weight.
pub fn lambda_guideline(n: usize) -> f64 {
    n as f64 / 10.0
}

/// Per-group design aggregates feeding every constraint and penalty.
#[derive(Clone, Debug)]
pub struct GroupAggregates {
    /// Mean feature row over group members.
    pub a_g: DVector<f64>,
    /// Mean feature row over the complement.
    pub a_c: DVector<f64>,
    pub ybar_g: f64,
    pub ybar_c: f64,
    pub sum_x_g: DVector<f64>,
    pub sum_x_c: DVector<f64>,
    pub sum_y_g: f64,
    pub sum_y_c: f64,
}

impl GroupAggregates {
    pub fn compute(ds: &Dataset, g: &GroupView) -> Self {
        let p = ds.p();
        let mut sum_x_g = DVector::zeros(p);
        let mut sum_x_c = DVector::zeros(p);
        let mut sum_y_g = 0.0;
        let mut sum_y_c = 0.0;
        for i in 0..ds.n() {
            let row = ds.x.row(i).transpose();
            if g.mask[i] {
                sum_x_g += row;
                sum_y_g += ds.y[i];
            } else {
                sum_x_c += row;
                sum_y_c += ds.y[i];
            }
        }
        GroupAggregates {
            a_g: &sum_x_g / g.n_g as f64,
            a_c: &sum_x_c / g.n_c as f64,
            ybar_g: sum_y_g / g.n_g as f64,
            ybar_c: sum_y_c / g.n_c as f64,
            sum_x_g,
            sum_x_c,
            sum_y_g,
            sum_y_c,
        }
    }
}

fn to_result(sol: KktSolution, spec: &FitSpec, notes: Vec<String>) -> Result<FitResult, Error> {
    if sol.residual_norm > spec.solver_tol {
        return Err(Error::Solver(format!(
            "KKT residual {:.3e} exceeds tolerance {:.3e}",
            sol.residual_norm, spec.solver_tol
        )));
    }
    let mut notes = notes;
    if sol.rank_deficient {
        notes.push("rank-deficient normal equations; minimum-norm solution".into());
    }
    if sol.vacuous_constraint {
        notes.push("constraint is constant in theta; solved unconstrained".into());
    }
    Ok(FitResult {
        theta: sol.theta,
        spec: spec.clone(),
        constraint_active: sol.constraint_active,
        kkt_residual: sol.residual_norm,
        objective_value: sol.objective_value,
        multiplier: sol.multiplier,
        rank_deficient: sol.rank_deficient,
        notes,
    })
}

/// Fit `spec` on `ds`, dispatching to the matching estimator.
pub fn fit(ds: &Dataset, spec: &FitSpec) -> Result<FitResult, Error> {
    spec.validate()?;
    let inner = || -> Result<FitResult, Error> {
        match spec.estimator {
            Estimator::Ols => to_result(solve_ls(&ds.x, &ds.y)?, spec, vec![]),
            Estimator::AvgConstrained => {
                let g = ds.group_view(&spec.group_label)?;
                fit_avg_constrained(ds, &g, spec)
            }
            Estimator::WeightedAvgConstrained { alpha } => {
                let g = ds.group_view(&spec.group_label)?;
                fit_weighted_avg(ds, &g, alpha, spec)
            }
            Estimator::CovConstrained { m } => {
                let g = ds.group_view(&spec.group_label)?;
                fit_cov_constrained(ds, &g, m, spec)
            }
            Estimator::MrdPenalized { lambda } => {
                let g = ds.group_view(&spec.group_label)?;
                fit_mrd_penalized(ds, &g, lambda, spec)
            }
            Estimator::NetcompPenalized { lambda } => {
                let g = ds.group_view(&spec.group_label)?;
                fit_netcomp_penalized(ds, &g, lambda, spec)
            }
            Estimator::NetcompConstrained {
                z,
                z_fraction_of_group_mean,
            } => {
                let g = ds.group_view(&spec.group_label)?;
                fit_netcomp_constrained(ds, &g, z, z_fraction_of_group_mean, spec)
            }
        }
    };
    inner().map_err(|e| e.in_estimator(&spec.estimator.label()))
}

/// Equality constraint: group mean prediction equals the group mean outcome,
/// i.e. zero training-set net compensation for the group.
pub fn fit_avg_constrained(
    ds: &Dataset,
    g: &GroupView,
    spec: &FitSpec,
) -> Result<FitResult, Error> {
    let agg = GroupAggregates::compute(ds, g);
    if agg.a_g.amax() == 0.0 && agg.ybar_g != 0.0 {
        return Err(Error::InfeasibleConstraint(format!(
            "group `{}` has all-zero features but nonzero mean outcome {}",
            g.label, agg.ybar_g
        )));
    }
    let c = LinearConstraint::equality(agg.a_g.clone(), agg.ybar_g);
    to_result(solve_ls_eq(&ds.x, &ds.y, &c)?, spec, vec![])
}

/// Two-stage: fit OLS, then constrain the group mean prediction to the
/// alpha-weighted average of the group mean outcome and the OLS group mean
/// prediction.
pub fn fit_weighted_avg(
    ds: &Dataset,
    g: &GroupView,
    alpha: f64,
    spec: &FitSpec,
) -> Result<FitResult, Error> {
    let agg = GroupAggregates::compute(ds, g);
    let ols = solve_ls(&ds.x, &ds.y)?;
    let target = (1.0 - alpha) * agg.ybar_g + alpha * agg.a_g.dot(&ols.theta);
    if agg.a_g.amax() == 0.0 && target != 0.0 {
        return Err(Error::InfeasibleConstraint(format!(
            "group `{}` has all-zero features but nonzero target {target}",
            g.label
        )));
    }
    let c = LinearConstraint::equality(agg.a_g.clone(), target);
    to_result(solve_ls_eq(&ds.x, &ds.y, &c)?, spec, vec![])
}

/// One-sided covariance constraint. The covariance proxy at `theta` is
/// `(1 - p) sum_g (Y - X theta) - p sum_c (Y - X theta)` with
/// `p = n_g / N`; the bound is `m` times its value at the OLS solution, so
/// `m = 1` is exactly non-binding at OLS.
pub fn fit_cov_constrained(
    ds: &Dataset,
    g: &GroupView,
    m: f64,
    spec: &FitSpec,
) -> Result<FitResult, Error> {
    let agg = GroupAggregates::compute(ds, g);
    let p = g.p_hat;
    // proxy(theta) = v - w' theta
    let w = &agg.sum_x_g * (1.0 - p) - &agg.sum_x_c * p;
    let v = (1.0 - p) * agg.sum_y_g - p * agg.sum_y_c;
    let ols = solve_ls(&ds.x, &ds.y)?;
    let cstar = v - w.dot(&ols.theta);
    if cstar <= 0.0 {
        // group is not underpredicted at OLS: any nonnegative bound fraction
        // of cstar is no tighter than the OLS value
        let mut result = to_result(ols, spec, vec![])?;
        result
            .notes
            .push(format!(
                "covariance constraint vacuous: OLS covariance proxy {cstar} <= 0"
            ));
        return Ok(result);
    }
    let bound = m * cstar;
    // v - w' theta <= bound  <=>  -w' theta <= bound - v
    let c = LinearConstraint::le(-&w, bound - v);
    to_result(solve_ls_ineq(&ds.x, &ds.y, &c)?, spec, vec![])
}

/// Quadratic penalty on the mean residual difference between group and
/// complement.
pub fn fit_mrd_penalized(
    ds: &Dataset,
    g: &GroupView,
    lambda: f64,
    spec: &FitSpec,
) -> Result<FitResult, Error> {
    let agg = GroupAggregates::compute(ds, g);
    let d = &agg.a_g - &agg.a_c;
    let r0 = agg.ybar_g - agg.ybar_c;
    to_result(
        solve_ls_rank1_penalty(&ds.x, &ds.y, &d, r0, lambda)?,
        spec,
        vec![],
    )
}

/// Linear penalty on the group mean residual (outcome minus prediction).
pub fn fit_netcomp_penalized(
    ds: &Dataset,
    g: &GroupView,
    lambda: f64,
    spec: &FitSpec,
) -> Result<FitResult, Error> {
    let agg = GroupAggregates::compute(ds, g);
    to_result(
        solve_ls_linear_penalty(&ds.x, &ds.y, &agg.a_g, agg.ybar_g, lambda)?,
        spec,
        vec![],
    )
}

/// Constraint form of the net compensation penalty:
/// group mean residual (outcome minus prediction) at most `z`. When binding,
/// the penalized fit at `lambda = 2 * multiplier` yields the same theta.
pub fn fit_netcomp_constrained(
    ds: &Dataset,
    g: &GroupView,
    z: f64,
    z_fraction_of_group_mean: bool,
    spec: &FitSpec,
) -> Result<FitResult, Error> {
    let agg = GroupAggregates::compute(ds, g);
    let z_abs = if z_fraction_of_group_mean {
        z * agg.ybar_g
    } else {
        z
    };
    // ybar_g - a_g' theta <= z  <=>  -a_g' theta <= z - ybar_g
    let c = LinearConstraint::le(-&agg.a_g, z_abs - agg.ybar_g);
    to_result(solve_ls_ineq(&ds.x, &ds.y, &c)?, spec, vec![])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::net_compensation;
    use crate::rng::CounterRng;
    use indexmap::IndexMap;

    fn random_dataset(seed: u64, n: usize, p: usize) -> Dataset {
        let mut rng = CounterRng::new(seed, 0);
        let mut rows = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        let mut mask = Vec::with_capacity(n);
        for _ in 0..n {
            let mut row = vec![1.0];
            for _ in 1..p {
                row.push(rng.normal(0.0, 1.0));
            }
            let noise = rng.normal(0.0, 0.5);
            let member = rng.bernoulli(0.3);
            // group members cost more than the features explain
            let extra = if member { 2.0 } else { 0.0 };
            y.push(row.iter().sum::<f64>() + extra + noise);
            rows.push(row);
            mask.push(member);
        }
        // guarantee nondegeneracy
        mask[0] = true;
        mask[1] = false;
        let names = (0..p).map(|j| format!("x{j}")).collect();
        let mut groups = IndexMap::new();
        groups.insert("g".to_string(), mask);
        let ids = (0..n).map(|i| i.to_string()).collect();
        Dataset::new(y, rows, names, groups, ids).unwrap()
    }

    fn spec(est: Estimator) -> FitSpec {
        FitSpec::new(est, "g")
    }

    fn theta_gap(a: &FitResult, b: &FitResult) -> f64 {
        (&a.theta - &b.theta).amax()
    }

    #[test]
    fn ols_dispatch_matches_solver() {
        let ds = random_dataset(1, 60, 4);
        let f = fit(&ds, &spec(Estimator::Ols)).unwrap();
        let direct = solve_ls(&ds.x, &ds.y).unwrap();
        assert_eq!(f.theta, direct.theta);
    }

    #[test]
    fn avg_constrained_zeroes_training_net_compensation() {
        let ds = random_dataset(2, 80, 5);
        let f = fit(&ds, &spec(Estimator::AvgConstrained)).unwrap();
        let yhat = ds.predict(&f.theta);
        let nc = net_compensation(
            yhat.as_slice(),
            ds.y.as_slice(),
            &ds.groups["g"],
        )
        .unwrap();
        let scale = ds.y.iter().map(|v| v.abs()).sum::<f64>() / ds.n() as f64;
        assert!(nc.abs() <= 1e-6 * scale.max(1.0), "net comp {nc}");
    }

    #[test]
    fn avg_constrained_hand_example() {
        // intercept-only, y = (0,0,3), g = {row 3} -> theta = 3
        let mut groups = IndexMap::new();
        groups.insert("g".into(), vec![false, false, true]);
        let ds = Dataset::new(
            vec![0.0, 0.0, 3.0],
            vec![vec![1.0]; 3],
            vec!["intercept".into()],
            groups,
            vec!["0".into(), "1".into(), "2".into()],
        )
        .unwrap();
        let f = fit(&ds, &spec(Estimator::AvgConstrained)).unwrap();
        assert!((f.theta[0] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn weighted_avg_endpoints() {
        for seed in [3, 4, 5] {
            let ds = random_dataset(seed, 70, 4);
            let ols = fit(&ds, &spec(Estimator::Ols)).unwrap();
            let avg = fit(&ds, &spec(Estimator::AvgConstrained)).unwrap();
            let w1 = fit(&ds, &spec(Estimator::WeightedAvgConstrained { alpha: 1.0 })).unwrap();
            let w0 = fit(&ds, &spec(Estimator::WeightedAvgConstrained { alpha: 0.0 })).unwrap();
            assert!(theta_gap(&w1, &ols) < 1e-8);
            assert!(theta_gap(&w0, &avg) < 1e-8);
        }
    }

    #[test]
    fn weighted_avg_midpoint_constraint() {
        let ds = random_dataset(6, 90, 5);
        let g = ds.group_view("g").unwrap();
        let agg = GroupAggregates::compute(&ds, &g);
        let ols = fit(&ds, &spec(Estimator::Ols)).unwrap();
        let half = fit(&ds, &spec(Estimator::WeightedAvgConstrained { alpha: 0.5 })).unwrap();
        let got = agg.a_g.dot(&half.theta);
        let want = 0.5 * agg.ybar_g + 0.5 * agg.a_g.dot(&ols.theta);
        assert!((got - want).abs() < 1e-8);
    }

    #[test]
    fn cov_constrained_endpoints() {
        let ds = random_dataset(7, 80, 4);
        let ols = fit(&ds, &spec(Estimator::Ols)).unwrap();
        let m1 = fit(&ds, &spec(Estimator::CovConstrained { m: 1.0 })).unwrap();
        assert!(theta_gap(&m1, &ols) < 1e-8);
        assert!(!m1.constraint_active);
        // m = 0: covariance proxy driven to zero
        let m0 = fit(&ds, &spec(Estimator::CovConstrained { m: 0.0 })).unwrap();
        let g = ds.group_view("g").unwrap();
        let agg = GroupAggregates::compute(&ds, &g);
        let p = g.p_hat;
        let w = &agg.sum_x_g * (1.0 - p) - &agg.sum_x_c * p;
        let v = (1.0 - p) * agg.sum_y_g - p * agg.sum_y_c;
        let proxy = v - w.dot(&m0.theta);
        assert!(proxy.abs() < 1e-6 * v.abs().max(1.0), "proxy {proxy}");
    }

    #[test]
    fn cov_constrained_vacuous_when_group_overpredicted() {
        // flip the group effect so OLS overpredicts g
        let mut ds = random_dataset(8, 80, 4);
        for i in 0..ds.n() {
            if ds.groups["g"][i] {
                ds.y[i] -= 6.0;
            }
        }
        let f = fit(&ds, &spec(Estimator::CovConstrained { m: 0.5 })).unwrap();
        let ols = fit(&ds, &spec(Estimator::Ols)).unwrap();
        assert!(theta_gap(&f, &ols) < 1e-10);
        assert!(f.notes.iter().any(|n| n.contains("vacuous")));
    }

    #[test]
    fn penalized_lambda_zero_equals_ols() {
        let ds = random_dataset(9, 60, 4);
        let ols = fit(&ds, &spec(Estimator::Ols)).unwrap();
        let mrd = fit(&ds, &spec(Estimator::MrdPenalized { lambda: 0.0 })).unwrap();
        let nc = fit(&ds, &spec(Estimator::NetcompPenalized { lambda: 0.0 })).unwrap();
        assert!(theta_gap(&mrd, &ols) < 1e-8);
        assert!(theta_gap(&nc, &ols) < 1e-8);
    }

    #[test]
    fn netcomp_penalized_closed_form() {
        // intercept-only, y=(0,0,3), g={row 3}, lambda=6 -> theta = 2
        let mut groups = IndexMap::new();
        groups.insert("g".into(), vec![false, false, true]);
        let ds = Dataset::new(
            vec![0.0, 0.0, 3.0],
            vec![vec![1.0]; 3],
            vec!["intercept".into()],
            groups,
            vec!["0".into(), "1".into(), "2".into()],
        )
        .unwrap();
        let f = fit(&ds, &spec(Estimator::NetcompPenalized { lambda: 6.0 })).unwrap();
        assert!((f.theta[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn netcomp_group_prediction_monotone_in_lambda() {
        let ds = random_dataset(10, 100, 5);
        let g = ds.group_view("g").unwrap();
        let agg = GroupAggregates::compute(&ds, &g);
        let mut last = f64::NEG_INFINITY;
        for lambda in [0.0, 1.0, 5.0, 20.0, 100.0] {
            let f = fit(&ds, &spec(Estimator::NetcompPenalized { lambda })).unwrap();
            let group_pred = agg.a_g.dot(&f.theta);
            assert!(group_pred >= last - 1e-10, "lambda {lambda}");
            last = group_pred;
        }
    }

    #[test]
    fn netcomp_constrained_slack_and_binding() {
        let ds = random_dataset(11, 80, 4);
        // huge z: slack, equals OLS
        let slack = fit(
            &ds,
            &spec(Estimator::NetcompConstrained {
                z: 1e9,
                z_fraction_of_group_mean: false,
            }),
        )
        .unwrap();
        let ols = fit(&ds, &spec(Estimator::Ols)).unwrap();
        assert!(!slack.constraint_active);
        assert!(theta_gap(&slack, &ols) < 1e-10);
        // z = 0 equals avg_constrained when OLS underpredicts g
        let zero = fit(
            &ds,
            &spec(Estimator::NetcompConstrained {
                z: 0.0,
                z_fraction_of_group_mean: false,
            }),
        )
        .unwrap();
        let avg = fit(&ds, &spec(Estimator::AvgConstrained)).unwrap();
        assert!(zero.constraint_active);
        assert!(theta_gap(&zero, &avg) < 1e-8);
    }

    #[test]
    fn netcomp_duality_lambda_is_twice_multiplier() {
        for seed in [12, 13, 14] {
            let ds = random_dataset(seed, 80, 5);
            let con = fit(
                &ds,
                &spec(Estimator::NetcompConstrained {
                    z: 0.5,
                    z_fraction_of_group_mean: false,
                }),
            )
            .unwrap();
            assert!(con.constraint_active);
            let lambda = 2.0 * con.multiplier;
            assert!(lambda >= 0.0);
            let pen = fit(&ds, &spec(Estimator::NetcompPenalized { lambda })).unwrap();
            assert!(theta_gap(&con, &pen) < 1e-6);
        }
    }

    #[test]
    fn sse_ordering_ols_is_minimal() {
        let ds = random_dataset(15, 90, 5);
        let ols_sse = fit(&ds, &spec(Estimator::Ols)).unwrap();
        let sse = |f: &FitResult| {
            let r = &ds.y - ds.predict(&f.theta);
            r.dot(&r)
        };
        let base = sse(&ols_sse);
        for est in [
            Estimator::AvgConstrained,
            Estimator::WeightedAvgConstrained { alpha: 0.3 },
            Estimator::CovConstrained { m: 0.2 },
            Estimator::MrdPenalized { lambda: 50.0 },
            Estimator::NetcompPenalized { lambda: 50.0 },
        ] {
            let f = fit(&ds, &spec(est.clone())).unwrap();
            assert!(sse(&f) >= base - 1e-9, "{}", est.label());
        }
    }

    #[test]
    fn hyperparameter_ranges_enforced() {
        let ds = random_dataset(16, 30, 3);
        for est in [
            Estimator::WeightedAvgConstrained { alpha: 1.5 },
            Estimator::CovConstrained { m: -0.1 },
            Estimator::MrdPenalized { lambda: -1.0 },
            Estimator::NetcompConstrained {
                z: -2.0,
                z_fraction_of_group_mean: false,
            },
        ] {
            assert!(fit(&ds, &spec(est)).is_err());
        }
    }
}

//! Property-based invariants for fold construction and the fairness
//! measures.

use fair_regression::eval::make_folds;
use fair_regression::metrics::{
    abs_distance, fair_covariance, group_residual_difference, mean_residual_difference,
    net_compensation, GrdOptions,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn folds_partition_evenly(n in 2usize..400, k in 2usize..12, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let plan = make_folds(n, k, seed).unwrap();
        prop_assert_eq!(plan.assignment.len(), n);
        let mut counts = vec![0usize; k];
        for &f in &plan.assignment {
            prop_assert!(f < k);
            counts[f] += 1;
        }
        let (min, max) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
        prop_assert!(min >= &1);
        prop_assert!(max - min <= 1, "fold sizes {:?}", counts);
    }

    #[test]
    fn folds_are_seed_deterministic(n in 2usize..200, seed in any::<u64>()) {
        let a = make_folds(n, 2, seed).unwrap();
        let b = make_folds(n, 2, seed).unwrap();
        prop_assert_eq!(a.assignment, b.assignment);
    }

    #[test]
    fn mrd_is_difference_of_net_compensations(
        vals in prop::collection::vec((-1e4f64..1e4, -1e4f64..1e4, any::<bool>()), 4..120)
    ) {
        let yhat: Vec<f64> = vals.iter().map(|v| v.0).collect();
        let y: Vec<f64> = vals.iter().map(|v| v.1).collect();
        let mut mask: Vec<bool> = vals.iter().map(|v| v.2).collect();
        mask[0] = true;
        mask[1] = false;
        let inverted: Vec<bool> = mask.iter().map(|m| !m).collect();

        let mrd = mean_residual_difference(&yhat, &y, &mask).unwrap();
        let g = net_compensation(&yhat, &y, &mask).unwrap();
        let c = net_compensation(&yhat, &y, &inverted).unwrap();
        prop_assert_eq!(mrd, g - c);
        // swapping group and complement flips the sign
        let flipped = mean_residual_difference(&yhat, &y, &inverted).unwrap();
        prop_assert!((mrd + flipped).abs() <= 1e-9 * mrd.abs().max(1.0));
    }

    #[test]
    fn fair_covariance_flips_sign_with_mask(
        vals in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3, any::<bool>()), 4..120)
    ) {
        let yhat: Vec<f64> = vals.iter().map(|v| v.0).collect();
        let y: Vec<f64> = vals.iter().map(|v| v.1).collect();
        let mut mask: Vec<bool> = vals.iter().map(|v| v.2).collect();
        mask[0] = true;
        mask[1] = false;
        let inverted: Vec<bool> = mask.iter().map(|m| !m).collect();
        let a = fair_covariance(&yhat, &y, &mask).unwrap();
        let b = fair_covariance(&yhat, &y, &inverted).unwrap();
        prop_assert!((a + b).abs() <= 1e-9 * a.abs().max(1.0), "{} vs {}", a, b);
    }

    #[test]
    fn group_residual_difference_is_nonnegative(
        vals in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3, any::<bool>()), 4..60)
    ) {
        let yhat: Vec<f64> = vals.iter().map(|v| v.0).collect();
        let y: Vec<f64> = vals.iter().map(|v| v.1).collect();
        let mut mask: Vec<bool> = vals.iter().map(|v| v.2).collect();
        mask[0] = true;
        mask[1] = false;
        let grd = group_residual_difference(&yhat, &y, &mask, abs_distance, &GrdOptions::default())
            .unwrap();
        prop_assert!(grd >= 0.0);
    }
}

mod common;

use aia::attack::spatial_loss;
use aia::skeldata::SkeletonSequence;

#[test]
fn closed_form_matches_sampled_minimum() {
    let gap = common::sphere_oracle_gap(100, 1_000_000, 17);
    assert!(gap < 1e-2, "worst gap {gap}");
}

#[test]
fn closed_form_point_cases() {
    let o = SkeletonSequence::new(1, vec![5.0, 0.0, 0.0]).unwrap();
    let y = SkeletonSequence::new(1, vec![0.0; 3]).unwrap();
    assert_eq!(spatial_loss(&o, &y, 2.0).unwrap(), 3.0);
    assert_eq!(spatial_loss(&o, &y, 5.0).unwrap(), 0.0);
    // inside the sphere the nearest point is straight outward
    assert_eq!(spatial_loss(&o, &y, 7.0).unwrap(), 2.0);
}

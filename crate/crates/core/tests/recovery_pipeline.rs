use num_bigint::BigInt;
use proptest::prelude::*;

use unitlat::linalg::ratio;
use unitlat::recovery::{
    compute_k, planted_instance, planted_instance_with, precision_gap_report, recover_baseline, recover_with_sublattice,
    verify_recovery, BaselineOutcome, RecoveryReport,
};
use unitlat::Error;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn planted_lattice_is_recovered(dim in 1usize..6, index in 1u64..=16, seed in any::<u64>()) {
        let inst = planted_instance(dim, index, seed).unwrap();
        let r = recover_with_sublattice(&inst.problem).unwrap();
        prop_assert!(verify_recovery(&inst.problem, &r));
        prop_assert_eq!(&r.index, &BigInt::from(index));
        prop_assert_eq!(r.abs_det() * ratio(index as i64, 1), inst.problem.b_m.abs_det());
        prop_assert_eq!(r.abs_det(), inst.b_l.abs_det());
    }

    #[test]
    fn sample_count_grows_with_dimension(m in 1usize..40, lip in 0.0f64..50.0, detl in 0.0f64..200.0) {
        let a = compute_k(m, lip, detl, 3.0).unwrap();
        let b = compute_k(m + 1, lip, detl, 3.0).unwrap();
        prop_assert!(a >= m && b >= a);
    }
}

#[test]
fn recovery_is_deterministic() {
    let inst = planted_instance(4, 10, 99).unwrap();
    let a = RecoveryReport::new(&inst.problem, &recover_with_sublattice(&inst.problem).unwrap());
    let b = RecoveryReport::new(&inst.problem, &recover_with_sublattice(&inst.problem).unwrap());
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn oversized_noise_is_rejected_or_misdecodes() {
    assert!(planted_instance_with(3, 4, 1, &ratio(5, 4)).is_ok());
    let mut wrong = 0;
    for seed in 0..20 {
        let inst = planted_instance_with(3, 4, seed, &ratio(4, 1)).unwrap();
        match recover_with_sublattice(&inst.problem) {
            Ok(r) if verify_recovery(&inst.problem, &r) => {}
            _ => wrong += 1,
        }
    }
    assert!(wrong > 0, "noise far past the decoding radius never broke recovery");
}

#[test]
fn baseline_needs_more_precision_than_sublattice() {
    let inst = planted_instance(3, 6, 5).unwrap();
    let gap = precision_gap_report(&inst.problem).unwrap();
    assert!(gap.q_baseline > gap.q_sublattice);
    match recover_baseline(&inst.problem, None, 4).unwrap() {
        BaselineOutcome::Infeasible { required_q, available } => assert!(required_q > available),
        BaselineOutcome::Recovered(_) => panic!("4 bits cannot be enough"),
    }
    match recover_baseline(&inst.problem, None, 128).unwrap() {
        BaselineOutcome::Recovered(r) => {
            assert!(r.relation_check);
            assert!((r.abs_det_l() - unitlat::linalg::rat_to_f64(&inst.b_l.abs_det())).abs() < 1e-6);
        }
        BaselineOutcome::Infeasible { .. } => panic!("128 bits should suffice"),
    }
}

#[test]
fn bad_parameters_are_reported() {
    assert!(matches!(planted_instance(0, 3, 1), Err(Error::Parameter(_))));
    assert!(compute_k(3, 0.0, 0.0, 1.0).is_err());
}

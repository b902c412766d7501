use unitlat::cyclotomic::{euler_phi, unit_lattice, CyclotomicField, CyclotomicReport};
use unitlat::interval;

fn regulator(m: u64) -> f64 {
    let lat = unit_lattice(&CyclotomicField::new(m).unwrap(), 128).unwrap();
    interval::to_f64(&lat.covolume)
}

#[test]
fn log_span_has_full_unit_rank() {
    for m in 3..=40u64 {
        if m % 4 == 2 {
            assert!(CyclotomicField::new(m).is_err());
            continue;
        }
        let field = CyclotomicField::new(m).unwrap();
        let lat = unit_lattice(&field, 96).unwrap();
        assert_eq!(lat.rank, (euler_phi(m) / 2 - 1) as usize, "m = {m}");
        assert_eq!(lat.basis_indices.len(), lat.rank);
    }
}

#[test]
fn known_real_quadratic_and_cubic_regulators() {
    // h⁺ = 1 and the cyclotomic units are the full unit group for these conductors
    let cases = [
        (5, ((1.0 + 5f64.sqrt()) / 2.0).ln()),
        (8, (1.0 + 2f64.sqrt()).ln()),
        (7, 0.525_454_682_122_572_4),
        (9, 0.849_287_450_646_168_7),
    ];
    for (m, want) in cases {
        let got = regulator(m);
        assert!((got - want).abs() < 1e-12, "m = {m}: {got} vs {want}");
    }
}

#[test]
fn covolume_interval_is_tight() {
    let lat = unit_lattice(&CyclotomicField::new(11).unwrap(), 128).unwrap();
    assert!(lat.covolume.width_log2() < -80.0);
    assert!(lat.covolume.is_positive());
}

#[test]
fn report_serializes() {
    let lat = unit_lattice(&CyclotomicField::new(13).unwrap(), 96).unwrap();
    let r = CyclotomicReport::new(&lat);
    let s = serde_json::to_string(&r).unwrap();
    assert!(s.contains("\"unit_rank\":5"));
}

use cavswap::metrics::fidelity_ceiling;
use cavswap::pipeline::swap_identical;
use cavswap::sweep::output::write_curve;
use cavswap::sweep::pareto::bin_of;
use cavswap::sweep::{
    bound_check_from_curves, loop_orientation, run_tradeoff_sweep, signed_area, Family, Frontier, Orientation,
    RunConfig, ScanSample, SigmaRange, Spacing,
};
use cavswap::{Error, PulsePolicy, Regime, SolverSettings};
use proptest::prelude::*;

fn small_settings() -> SolverSettings {
    SolverSettings { grid_points: Some(300), ..SolverSettings::default() }
}

fn sweep_bytes(threads: usize) -> Vec<u8> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let p = Regime::Intermediate.params();
    let range = SigmaRange::new(0.5, 8.0, 6, Spacing::Log).unwrap();
    let settings = small_settings();
    let curves = pool.install(|| run_tradeoff_sweep(&p, "a", &[1.5], &range, &settings)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = write_curve(dir.path(), &curves[0], &p, &settings).unwrap();
    std::fs::read(path).unwrap()
}

#[test]
fn csv_output_is_identical_across_thread_counts() {
    let one = sweep_bytes(1);
    let three = sweep_bytes(3);
    assert_eq!(one, three);
    let text = String::from_utf8(one).unwrap();
    assert_eq!(text.lines().next().unwrap(), "sigma,p_ex,fidelity,p_pure_ratio");
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn equal_widths_reproduce_symmetric_family() {
    let p = Regime::Strong.params();
    for (area, sigma) in [(0.7, 0.3), (3.0, 2.0), (1.5, 8.0)] {
        let sym = PulsePolicy::symmetric_with_area(area, sigma).unwrap();
        let asym = PulsePolicy::asymmetric_with_area(area, sigma, sigma).unwrap();
        let a = swap_identical(&p, &sym, &small_settings()).unwrap();
        let b = swap_identical(&p, &asym, &small_settings()).unwrap();
        assert!((a.p_ex() - b.p_ex()).abs() < 1e-8);
        assert!((a.fidelity() - b.fidelity()).abs() < 1e-8);
    }
}

#[test]
fn reference_ceilings_of_the_regimes() {
    let range = SigmaRange::new(1.0, 4.0, 2, Spacing::Log).unwrap();
    for (regime, expect) in [
        (Regime::Intermediate, 0.75),
        (Regime::Strong, 0.954545),
        (Regime::Weak, 0.545455),
    ] {
        let p = regime.params();
        let curves = run_tradeoff_sweep(&p, regime.label(), &[2.0], &range, &small_settings()).unwrap();
        let check = bound_check_from_curves(&p, regime.label(), &curves, 1e-3).unwrap();
        assert!((check.reference_fidelity - expect).abs() < 1e-6);
        assert_eq!(check.reference_fidelity, fidelity_ceiling(check.cooperativity));
        assert_eq!(check.points_checked, 2);
        assert!(check.worst_bound_margin < 1e-6);
    }
}

#[test]
fn unreachable_threshold_is_reported() {
    let p = Regime::Weak.params();
    let range = SigmaRange::new(0.2, 1.0, 2, Spacing::Log).unwrap();
    let curves = run_tradeoff_sweep(&p, "c", &[0.3], &range, &small_settings()).unwrap();
    let err = bound_check_from_curves(&p, "c", &curves, 0.97).unwrap_err();
    assert!(matches!(err, Error::NoHighEmissionPoint { .. }));
}

#[test]
fn config_errors_are_typed() {
    assert!(matches!(RunConfig::from_json("{\"regime\": \"z\"}"), Err(Error::Config(_))));
    assert!(matches!(RunConfig::from_json("{\"unknown\": 1}"), Err(Error::Config(_))));
    let cfg = RunConfig::from_json("{\"g\": 1.0, \"kappa\": 1.0}").unwrap();
    assert!(matches!(cfg.params(), Err(Error::Config(_))));
    let cfg = RunConfig::from_json("{\"regime\": \"b\", \"pulse\": {\"shape\": \"symmetric\", \"area\": 3.0, \"sigma\": 2.0}}").unwrap();
    cfg.validate().unwrap();
    assert_eq!(cfg.pulse().unwrap(), PulsePolicy::symmetric_with_area(3.0, 2.0).unwrap());
}

fn samples() -> impl Strategy<Value = Vec<ScanSample>> {
    prop::collection::vec((0.0f64..1.0, 0.4f64..1.0), 1..200).prop_map(|v| {
        v.into_iter()
            .map(|(p_ex, fidelity)| ScanSample {
                area: 1.0,
                sigma1: 1.0,
                sigma2: 1.0,
                p_ex,
                fidelity,
                family: Family::Symmetric,
            })
            .collect()
    })
}

fn polygon() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 3..30)
}

proptest! {
    #[test]
    fn frontier_entries_are_undominated(s in samples()) {
        let f = Frontier::from_samples(s.iter().enumerate());
        for x in &s {
            let b = bin_of(x.p_ex);
            let e = f.get(b).expect("occupied bin has an entry");
            prop_assert!(e.fidelity >= x.fidelity);
        }
        for e in f.bins.iter().flatten() {
            let src = &s[e.sample];
            prop_assert_eq!(bin_of(src.p_ex), e.bin);
            prop_assert_eq!(src.fidelity, e.fidelity);
        }
    }

    #[test]
    fn orientation_follows_signed_area(poly in polygon()) {
        let area = signed_area(&poly).unwrap();
        let mut rev = poly.clone();
        rev.reverse();
        prop_assert!((signed_area(&rev).unwrap() + area).abs() < 1e-12);
        match loop_orientation(&poly) {
            Orientation::Counterclockwise => prop_assert!(area > 0.0 && loop_orientation(&rev) == Orientation::Clockwise),
            Orientation::Clockwise => prop_assert!(area < 0.0 && loop_orientation(&rev) == Orientation::Counterclockwise),
            Orientation::Undefined => prop_assert!(loop_orientation(&rev) == Orientation::Undefined),
        }
    }

    #[test]
    fn log_ranges_are_increasing_and_pinned(lo in 0.001f64..1.0, span in 1.5f64..1000.0, n in 2usize..80) {
        let r = SigmaRange::new(lo, lo * span, n, Spacing::Log).unwrap();
        let v = r.values();
        prop_assert_eq!(v.len(), n);
        prop_assert_eq!(v[0], lo);
        prop_assert_eq!(*v.last().unwrap(), lo * span);
        prop_assert!(v.windows(2).all(|w| w[1] > w[0]));
    }
}

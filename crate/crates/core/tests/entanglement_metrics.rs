use cavswap::metrics::{
    analytic_bound, bell_fidelity, correlation_j, entanglement_rate, fidelity_ceiling, identical_j, EMISSION_FLOOR,
};
use cavswap::pipeline::{simulate_pair, swap_identical, swap_pair};
use cavswap::qrt::CorrelationSummary;
use cavswap::{Error, PulsePolicy, Regime, SolverSettings, SystemParams};
use num_complex::Complex64;
use proptest::prelude::*;

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[test]
fn pure_identical_sources_are_indistinguishable() {
    let p = SystemParams::new(1.5, 1.0, 0.0).unwrap();
    let pulse = PulsePolicy::symmetric_with_area(3.0, 4.0).unwrap();
    let r = swap_identical(&p, &pulse, &SolverSettings::default()).unwrap();
    assert!((r.swap.j_avg.re - 1.0).abs() < 1e-6);
    assert!((r.fidelity() - 1.0).abs() < 1e-6);
    assert!((r.p_pure - r.p_ex()).abs() < 1e-8);
}

#[test]
fn time_separated_photons_do_not_interfere() {
    let p = SystemParams::new(2.0, 1.0, 0.0).unwrap();
    let early = PulsePolicy::symmetric_with_area(3.0, 1.5).unwrap();
    let late = early.shifted(80.0);
    let r = swap_pair((&p, &early), (&p, &late), &SolverSettings::default()).unwrap();
    assert!(r.j_avg.norm() < 1e-6);
    assert!((r.fidelity - 0.5).abs() < 1e-6);
    assert!((r.p_ex_1 - r.p_ex_2).abs() < 1e-6);
}

#[test]
fn closed_form_values() {
    assert_eq!(bell_fidelity(real(1.0)), 1.0);
    assert_eq!(bell_fidelity(real(0.0)), 0.5);
    assert!((bell_fidelity(real(0.5)) - 0.75).abs() < 1e-15);
    assert_eq!(entanglement_rate(1.0), 0.5);
    assert_eq!(entanglement_rate(0.0), 0.0);
    assert!((entanglement_rate(0.6) - 0.18).abs() < 1e-15);
    assert_eq!(fidelity_ceiling(1.0), 0.75);
    assert!((fidelity_ceiling(10.0) - 0.954545).abs() < 1e-6);
}

#[test]
fn truncated_bound_at_unit_emission() {
    let summary = CorrelationSummary::default();
    let a = analytic_bound(&Regime::Intermediate.params(), 1.0, &summary).unwrap();
    assert!((a.truncated_bound - 0.5).abs() < 1e-15);
    assert!((a.bound_value - 0.5).abs() < 1e-15);
    let b = analytic_bound(&Regime::Strong.params(), 1.0, &summary).unwrap();
    assert!((b.truncated_bound - 10.0 / 11.0).abs() < 1e-12);
    assert!((bell_fidelity(real(b.truncated_bound)) - 0.9545).abs() < 1e-4);
}

#[test]
fn undriven_pair_heralds_nothing() {
    let p = Regime::Intermediate.params();
    let dark = PulsePolicy::SymmetricGaussian { omega0: 0.0, sigma: 2.0, t_c: 10.0 };
    let bright = PulsePolicy::symmetric_with_area(2.0, 2.0).unwrap();
    let err = swap_pair((&p, &dark), (&p, &bright), &SolverSettings::default()).unwrap_err();
    assert!(matches!(err, Error::EmissionZero(_)));
    assert!(matches!(
        identical_j(&CorrelationSummary::default(), 1.0, EMISSION_FLOOR.sqrt() * 0.5),
        Err(Error::EmissionZero(_))
    ));
}

#[test]
fn row_a_overlap_converges_under_refinement() {
    let p = Regime::Intermediate.params();
    let pulse = PulsePolicy::symmetric_with_area(3.0, 10.0).unwrap();
    let base = swap_identical(&p, &pulse, &SolverSettings::default()).unwrap();
    let n = base.grid.n;
    let fine = SolverSettings { grid_points: Some(2 * n - 1), ..SolverSettings::default() };
    let refined = swap_identical(&p, &pulse, &fine).unwrap();
    assert_eq!(refined.grid.end, base.grid.end);
    let rel = (base.swap.j_avg.re - refined.swap.j_avg.re).abs() / refined.swap.j_avg.re;
    assert!(rel < 1e-4, "relative change {rel:e}");
    assert!(base.fidelity() > 0.5 && base.fidelity() < fidelity_ceiling(1.0) + 0.2);
}

#[test]
fn lossy_atom_exceeds_truncated_bound_but_not_full_bound() {
    let p = Regime::LossyAtom.params();
    let pulse = PulsePolicy::symmetric_with_area(20.0, 50.0).unwrap();
    let r = swap_identical(&p, &pulse, &SolverSettings::default()).unwrap();
    assert!(r.p_ex() > 0.97);
    let bound = r.bound(&p).unwrap();
    let j = r.swap.j_avg.re;
    let excess = j - bound.truncated_bound;
    assert!((0.04..=0.10).contains(&excess), "J excess {excess}");
    assert!(j <= bound.bound_value + 1e-6, "J {j} above bound {}", bound.bound_value);
}

#[test]
fn pair_route_is_real_and_symmetric_for_identical_sources() {
    let p = Regime::Strong.params();
    let pulse = PulsePolicy::asymmetric_with_area(2.5, 3.0, 1.0).unwrap();
    let settings = SolverSettings::default();
    let (a, b) = simulate_pair((&p, &pulse), (&p, &pulse), &settings).unwrap();
    let (ca, cb) = (a.correlation().unwrap(), b.correlation().unwrap());
    let j = correlation_j(&ca, &cb, a.p_ex, b.p_ex).unwrap();
    assert!(j.im.abs() < 1e-8);
    let ident = identical_j(&a.summary().unwrap(), p.kappa, a.p_ex).unwrap();
    assert!((j.re - ident).abs() < 1e-10);
}

fn random_point() -> impl Strategy<Value = (SystemParams, PulsePolicy)> {
    (
        prop::sample::select(Regime::ALL.to_vec()),
        0.5f64..6.0,
        (-0.7f64..1.5).prop_map(|e| 10f64.powf(e)),
    )
        .prop_map(|(r, area, sigma)| (r.params(), PulsePolicy::symmetric_with_area(area, sigma).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn overlap_respects_cooperativity_bound((p, pulse) in random_point()) {
        let r = swap_identical(&p, &pulse, &SolverSettings::default()).unwrap();
        let j = r.swap.j_avg;
        prop_assert!(j.re >= 0.0 && j.re <= 1.0 + 1e-8);
        prop_assert!(j.im.abs() < 1e-8);
        prop_assert!(r.fidelity() >= 0.5 && r.fidelity() <= 1.0 + 1e-8);
        let bound = r.bound(&p).unwrap();
        prop_assert!(j.re <= bound.bound_value + 1e-6, "J {} bound {}", j.re, bound.bound_value);
        prop_assert!(bound.term_lambda_diag >= 0.0 && bound.term_derivative >= 0.0 && bound.term_residual >= 0.0);
        prop_assert!((r.swap.p_ent - entanglement_rate(r.p_ex())).abs() < 1e-15);
    }
}

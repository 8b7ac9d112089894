use cavswap::model::{adiabaticity_report, effective_hamiltonian, hamiltonian_with_drive};
use cavswap::{PulsePolicy, Regime, SystemParams};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn simpson_area(pulse: &PulsePolicy, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = pulse.eval(a).re + pulse.eval(b).re;
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * pulse.eval(a + k as f64 * h).re;
    }
    s * h / 3.0 / (2.0 * std::f64::consts::PI).sqrt()
}

#[test]
fn hamiltonian_reference_entries() {
    let p = SystemParams::new(1.0, 1.0, 1.0).unwrap();
    let h = hamiltonian_with_drive(&p, c(0.0, 0.0));
    let expect = [
        [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(0.0, -1.0), c(1.0, 0.0)],
        [c(0.0, 0.0), c(1.0, 0.0), c(0.0, -1.0)],
    ];
    assert_eq!(h, expect);

    let strong = Regime::Strong.params();
    let pulse = PulsePolicy::SymmetricGaussian { omega0: 2.0, sigma: 3.0, t_c: 7.0 };
    let h = effective_hamiltonian(&strong, &pulse, 7.0);
    assert_eq!(h[0][2], c(2.0, 0.0));
    assert_eq!(h[2][2], c(0.0, -1.0));

    let detuned = SystemParams::new(1.0, 1.0, 1.0).unwrap().with_detunings(0.5, 0.3);
    let h = hamiltonian_with_drive(&detuned, c(0.0, 0.0));
    assert_eq!(h[0][0], c(0.5, 0.0));
    assert_eq!(h[2][2], c(0.3, -1.0));
}

#[test]
fn reference_cooperativities() {
    let close = |r: Regime, v: f64| (r.params().cooperativity().unwrap() - v).abs() < 1e-12;
    assert!(close(Regime::Intermediate, 1.0));
    assert!(close(Regime::Strong, 10.0));
    assert!(close(Regime::Weak, 0.1));
    assert!(close(Regime::Purcell, 1.0));
    assert!(close(Regime::LossyAtom, 1.0));
}

#[test]
fn adiabaticity_reference_cases() {
    let times: Vec<f64> = (0..=400).map(|k| k as f64 * 0.1).collect();
    let flat = PulsePolicy::Tabulated { samples: vec![(-1.0, c(2.0, 0.0)), (100.0, c(2.0, 0.0))] };
    let p = SystemParams::new(1.0, 1.0, 1.0).unwrap();
    assert_eq!(adiabaticity_report(&p, &flat, &times).adiabatic.ratio, 0.0);

    let pulse = PulsePolicy::SymmetricGaussian { omega0: 3.0, sigma: 4.0, t_c: 20.0 };
    let report = adiabaticity_report(&p, &pulse, &times);
    assert!((report.transfer.ratio - 1.0 / 3.0).abs() < 1e-12);
    assert!(report.transfer.satisfied);
    assert_eq!(report.strong_coupling.ratio, 1.0);
    assert!(!report.strong_coupling.satisfied);
}

#[test]
fn reference_pulse_values() {
    let p = PulsePolicy::SymmetricGaussian { omega0: 1.0, sigma: 2.0, t_c: 0.0 };
    assert_eq!(p.eval(0.0).re, 1.0);
    assert!((p.eval(2.0).re - (-0.5f64).exp()).abs() < 1e-15);
    let a = PulsePolicy::AsymmetricGaussian { omega0: 1.0, sigma1: 4.0, sigma2: 1.0, t_c: 0.0 };
    assert!((a.eval(-1e-12).re - 1.6).abs() < 1e-10);
    assert!((a.eval(1e-12).re - 1.6).abs() < 1e-10);
    assert!((PulsePolicy::SymmetricGaussian { omega0: 1.5, sigma: 2.0, t_c: 0.0 }.area() - 3.0).abs() < 1e-12);
    assert_eq!(PulsePolicy::SymmetricGaussian { omega0: 0.0, sigma: 5.0, t_c: 0.0 }.area(), 0.0);
    let even = PulsePolicy::AsymmetricGaussian { omega0: 1.0, sigma1: 2.0, sigma2: 2.0, t_c: 0.0 };
    assert!((simpson_area(&even, -30.0, 30.0, 6000) - 2.0).abs() < 1e-9);
}

proptest! {
    #[test]
    fn cooperativity_is_scale_invariant(g in 0.01f64..10.0, kappa in 0.01f64..10.0, gamma in 0.01f64..10.0, s in 0.1f64..10.0) {
        let base = SystemParams::new(g, kappa, gamma).unwrap().cooperativity().unwrap();
        let scaled = SystemParams::new(s * g, s * kappa, s * gamma).unwrap().cooperativity().unwrap();
        prop_assert!((base - scaled).abs() <= 1e-12 * base.max(1.0));
    }

    #[test]
    fn asymmetric_pulse_is_continuous_at_centre(omega0 in 0.01f64..5.0, s1 in 0.1f64..20.0, s2 in 0.1f64..20.0, tc in -10.0f64..10.0) {
        let p = PulsePolicy::AsymmetricGaussian { omega0, sigma1: s1, sigma2: s2, t_c: tc };
        let eps = 1e-12 * tc.abs().max(1.0);
        prop_assert!((p.eval(tc - eps) - p.eval(tc + eps)).norm() < 1e-10 * p.peak().max(1.0));
        let r = (s2 / s1).powi(2);
        prop_assert!((p.peak() - 2.0 * omega0 / (1.0 + r.sqrt())).abs() < 1e-12 * p.peak());
    }

    #[test]
    fn symmetric_area_closed_form(omega0 in 0.0f64..5.0, sigma in 0.1f64..20.0) {
        let p = PulsePolicy::SymmetricGaussian { omega0, sigma, t_c: 0.0 };
        prop_assert!((p.area() - omega0 * sigma).abs() <= 1e-12 * (omega0 * sigma).max(1.0));
        let q = simpson_area(&p, -12.0 * sigma, 12.0 * sigma, 4000);
        prop_assert!((q - omega0 * sigma).abs() <= 1e-8 * (omega0 * sigma).max(1.0));
    }

    #[test]
    fn asymmetric_area_matches_quadrature(omega0 in 0.01f64..5.0, s1 in 0.2f64..10.0, s2 in 0.2f64..10.0) {
        let p = PulsePolicy::AsymmetricGaussian { omega0, sigma1: s1, sigma2: s2, t_c: 0.0 };
        let w = 12.0 * s1.max(s2);
        let q = simpson_area(&p, -w, w, 6000);
        prop_assert!((q - p.area()).abs() <= 1e-8 * p.area());
    }

    #[test]
    fn hamiltonian_anti_hermitian_part_is_the_damping(g in 0.0f64..5.0, kappa in 0.0f64..5.0, gamma in 0.0f64..5.0, re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let p = SystemParams::new(g, kappa, gamma).unwrap().with_detunings(0.2, -0.4);
        let h = hamiltonian_with_drive(&p, c(re, im));
        for i in 0..3 {
            for j in 0..3 {
                let anti = (h[i][j] - h[j][i].conj()) * 0.5;
                let expect = match (i, j) {
                    (1, 1) => c(0.0, -kappa),
                    (2, 2) => c(0.0, -gamma),
                    _ => c(0.0, 0.0),
                };
                prop_assert!((anti - expect).norm() < 1e-14);
            }
        }
    }
}

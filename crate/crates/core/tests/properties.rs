//! Property tests over randomised inputs.

use adiabaton::direct::evolve_atoms;
use adiabaton::numeric::{cumulative_trapezoid, trapezoid};
use adiabaton::shaping::{probe_from_theta, theta_from_probe};
use adiabaton::{
    mixing_angle, photon_invariant, pulse_metrics, sample_envelope, CharacteristicField,
    EnvelopeSpec, FieldState, MediumSpec, SolverConfig, TauGrid,
};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn grid() -> TauGrid {
    TauGrid::new(-20.0, 20.0, 2048).unwrap()
}

proptest! {
    #[test]
    fn theta_from_probe_inverts_probe_from_theta(
        kappa_c in 0.1f64..10.0,
        v in 1.0f64..1000.0,
        share in 0.0f64..0.99,
    ) {
        let medium = MediumSpec::new(kappa_c).unwrap();
        let g = (share * v).sqrt();
        let theta = theta_from_probe(g, v, &medium).unwrap();
        prop_assert!((0.0..=std::f64::consts::FRAC_PI_2).contains(&theta));
        let back = probe_from_theta(theta, v, &medium);
        prop_assert!((back - g).abs() <= 1e-9 * g.max(1.0));
    }

    #[test]
    fn infeasible_targets_are_rejected(kappa_c in 0.1f64..10.0, v in 0.1f64..1000.0, excess in 1.0f64..4.0) {
        let medium = MediumSpec::new(kappa_c).unwrap();
        prop_assert!(theta_from_probe((excess * v).sqrt(), v, &medium).is_err());
    }

    #[test]
    fn invariant_and_angle_stay_in_range(
        pairs in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0, -50.0f64..50.0, -50.0f64..50.0), 1..64),
        kappa_c in 0.1f64..10.0,
    ) {
        let g_p: Vec<C64> = pairs.iter().map(|p| C64::new(p.0, p.1)).collect();
        let g_c: Vec<C64> = pairs.iter().map(|p| C64::new(p.2, p.3)).collect();
        let f = FieldState { zeta: 0.0, g_p, g_c };
        let medium = MediumSpec::new(kappa_c).unwrap();
        for v in photon_invariant(&f, &medium) {
            prop_assert!(v >= 0.0);
        }
        for th in mixing_angle(&f) {
            prop_assert!((0.0..=std::f64::consts::FRAC_PI_2).contains(&th));
        }
    }

    #[test]
    fn gaussian_metrics_match_closed_form(amp in 0.5f64..30.0, center in -5.0f64..5.0, width in 0.5f64..3.0) {
        let g = grid();
        let y = sample_envelope(&EnvelopeSpec::gaussian(amp, center, width), &g).unwrap();
        let m = pulse_metrics(&y, &g).unwrap();
        prop_assert!((m.fwhm - 2.0 * width * 2f64.ln().sqrt()).abs() < 1e-3 * width);
        prop_assert!((m.centroid - center).abs() < 1e-9);
        // ∫ a² e^{-2x²/w²} = a² w sqrt(π/2)
        let energy = amp * amp * width * (std::f64::consts::PI / 2.0).sqrt();
        prop_assert!((m.energy - energy).abs() < 1e-9 * energy);
        prop_assert_eq!(m.n_local_maxima, 1);
    }

    #[test]
    fn cumulative_quadrature_ends_at_the_total(y in prop::collection::vec(-10.0f64..10.0, 2..200), dx in 0.01f64..1.0) {
        let c = cumulative_trapezoid(&y, dx);
        prop_assert_eq!(c[0], 0.0);
        prop_assert!((c[c.len() - 1] - trapezoid(&y, dx)).abs() < 1e-9 * (1.0 + c[c.len() - 1].abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn atoms_stay_normalised(
        a_p in 0.0f64..10.0,
        a_c in 1.0f64..10.0,
        t_p in -5.0f64..5.0,
        w_p in 0.5f64..2.0,
        w_c in 2.0f64..4.0,
    ) {
        let g = grid();
        let f = FieldState::from_real(
            0.0,
            &sample_envelope(&EnvelopeSpec::gaussian(a_p, t_p, w_p), &g).unwrap(),
            &sample_envelope(&EnvelopeSpec::gaussian(a_c, 0.0, w_c), &g).unwrap(),
        );
        let atoms = evolve_atoms(&f, &g, &SolverConfig::default()).unwrap();
        prop_assert!(atoms.unitarity_residual() < 1e-6);
    }

    #[test]
    fn equal_constants_transport_without_crossing(
        a_p in 0.5f64..20.0,
        a_c in 1.0f64..20.0,
        t_p in -5.0f64..5.0,
        w_p in 0.5f64..3.0,
    ) {
        let g = grid();
        let f = FieldState::from_real(
            0.0,
            &sample_envelope(&EnvelopeSpec::gaussian(a_p, t_p, w_p), &g).unwrap(),
            &sample_envelope(&EnvelopeSpec::gaussian(a_c, 0.0, 4.0), &g).unwrap(),
        );
        let chi = CharacteristicField::build(&f, &g, &MediumSpec::equal()).unwrap();
        prop_assert!(chi.detect_crossing(1e6).is_none());
        // characteristics stay ordered in τ₀; the depth keeps them in the window
        let total = chi.cumulative()[g.n_tau - 1];
        let zeta = 0.2 * total;
        let taus: Vec<f64> = (0..g.n_tau)
            .filter(|&i| chi.cumulative()[i] > 0.01 * total && chi.cumulative()[i] < 0.5 * total)
            .map(|i| chi.characteristic_tau(g.tau(i), zeta).unwrap())
            .collect();
        prop_assert!(taus.len() > 4);
        prop_assert!(taus.windows(2).all(|w| w[1] > w[0]));
    }
}

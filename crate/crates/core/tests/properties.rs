use nalgebra::Matrix3;
use num_complex::Complex64;
use proptest::prelude::*;

use vic_core::analytic::{rho13_no_vic, sigma23_exact, sigma23_small_theta};
use vic_core::dressed::{dressed_basis, evolve_secular, gamma_uc, SecularState};
use vic_core::floquet::{solve_floquet_converged, FloquetOptions};
use vic_core::master::{integrate, rhs, MasterRhs};
use vic_core::model::eta;
use vic_core::{make_params, parse_config, DensityMatrix, Error, SystemParams};

fn params() -> impl Strategy<Value = SystemParams> {
    (
        (0.2f64..5.0, 0.2f64..5.0, 0.0f64..90.0, 0u8..2),
        (0.1f64..30.0, 0.0f64..1.0, -40.0f64..40.0, -10.0f64..10.0, -40.0f64..40.0),
    )
        .prop_map(|((gamma1, gamma2, theta_deg, eta0), (big_g, small_g, w12, delta2, delta1))| {
            SystemParams { gamma1, gamma2, theta_deg, eta0, big_g, small_g, w12, delta2, delta1 }
        })
}

fn closed_form_params() -> impl Strategy<Value = SystemParams> {
    (0.2f64..5.0, 0.2f64..5.0, 0.0f64..90.0, 0.5f64..50.0).prop_map(|(gamma1, gamma2, theta_deg, big_g)| {
        SystemParams {
            gamma1,
            gamma2,
            theta_deg,
            eta0: 1,
            big_g,
            small_g: 0.0,
            w12: -big_g,
            delta2: 0.0,
            delta1: 0.0,
        }
    })
}

fn state() -> impl Strategy<Value = DensityMatrix> {
    proptest::collection::vec(-1.0f64..1.0, 18).prop_map(|v| {
        let a = Matrix3::from_fn(|i, j| Complex64::new(v[3 * i + j], v[9 + 3 * i + j]));
        let m = a * a.adjoint();
        let tr = m.trace();
        DensityMatrix::from_matrix_unchecked(m / tr)
    })
}

fn min_eigenvalue(rho: &DensityMatrix) -> f64 {
    rho.matrix().symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

proptest! {
    #[test]
    fn derivative_is_traceless_and_hermitian(p in params(), rho in state(), t in 0.0f64..20.0) {
        let d = rhs(t, &rho, &MasterRhs::driven(p));
        prop_assert!((d[(0, 0)] + d[(1, 1)] + d[(2, 2)]).norm() <= 1e-14);
        prop_assert!((d - d.adjoint()).iter().all(|z| z.norm() <= 1e-14));
    }

    #[test]
    fn field_free_derivative_is_traceless(p in params(), rho in state(), t in 0.0f64..20.0) {
        let d = rhs(t, &rho, &MasterRhs::field_free(p));
        prop_assert!((d[(0, 0)] + d[(1, 1)] + d[(2, 2)]).norm() <= 1e-14);
    }

    #[test]
    fn config_round_trip_is_exact(p in params()) {
        let back = make_params(&parse_config(&p.to_config_string()).unwrap()).unwrap();
        prop_assert_eq!(back, p);
        prop_assert_eq!(make_params(&p.to_raw()).unwrap(), p);
    }

    #[test]
    fn eta_decreases_with_angle(p in params(), a in 0.0f64..90.0, b in 0.0f64..90.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let p = SystemParams { eta0: 1, ..p };
        let e_lo = eta(&SystemParams { theta_deg: lo, ..p });
        let e_hi = eta(&SystemParams { theta_deg: hi, ..p });
        prop_assert!(e_lo >= e_hi);
        prop_assert!(e_lo <= (p.gamma1 * p.gamma2).sqrt() * (1.0 + 1e-15));
    }

    #[test]
    fn dressed_eigenvalues_and_bases(p in params()) {
        let b = dressed_basis(&p).unwrap();
        let scale = p.delta2.abs() + p.big_g.powi(2) + 1.0;
        prop_assert!((b.lambda_plus + b.lambda_minus - p.delta2).abs() <= 1e-12 * scale);
        prop_assert!((b.lambda_plus * b.lambda_minus + p.big_g.powi(2)).abs() <= 1e-12 * scale);
        for m in [b.dressed, b.trap] {
            prop_assert!((m * m.transpose() - Matrix3::identity()).amax() <= 1e-14);
        }
        // |+⟩ is an eigenvector of the pump Hamiltonian on {|2⟩, |3⟩}
        let (c, s) = (b.dressed[(1, 1)], b.dressed[(1, 2)]);
        let h2 = p.delta2 * c - p.big_g * s;
        let h3 = -p.big_g * c;
        prop_assert!((h2 - b.lambda_plus * c).abs() <= 1e-10 * scale);
        prop_assert!((h3 - b.lambda_plus * s).abs() <= 1e-10 * scale);
    }

    #[test]
    fn trapped_state_decay_rate_is_nonnegative(p in params()) {
        prop_assert!(gamma_uc(&p) >= 0.0);
    }

    #[test]
    fn closed_form_populations_sum_to_one(p in closed_form_params()) {
        let r = sigma23_exact(&p).unwrap();
        prop_assert!((r.population_sum() - 1.0).abs() <= 1e-10);
        prop_assert!(r.dressed_identity_error() <= 1e-10);
        prop_assert!(r.b_const != 0.0);
    }

    #[test]
    fn small_angle_deviation_grows_with_angle(p in closed_form_params()) {
        let dev = |theta: f64| {
            let q = SystemParams { theta_deg: theta, ..p };
            (sigma23_exact(&q).unwrap().sigma23 - sigma23_small_theta(&q).unwrap()).norm()
        };
        let (d1, d5, d15) = (dev(1.0), dev(5.0), dev(15.0));
        prop_assert!(d1 < d5 && d5 < d15, "{} {} {}", d1, d5, d15);
    }

    #[test]
    fn weak_probe_absorption_is_positive(p in params()) {
        let p = SystemParams { small_g: 1.0, ..p };
        match rho13_no_vic(&p) {
            Ok(r) => prop_assert!(r.im > 0.0),
            Err(e) => prop_assert_eq!(e, Error::ZeroDenominator),
        }
    }

    #[test]
    fn harmonics_are_conjugate_symmetric(p in params()) {
        let p = SystemParams { small_g: p.small_g * 0.2, ..p };
        match solve_floquet_converged(&p, &FloquetOptions::default()) {
            Ok(h) => prop_assert!(h.conjugation_error() <= 1e-10),
            Err(Error::DegenerateDetuning) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn secular_evolution_conserves_population(p in closed_form_params()) {
        let x0 = SecularState::ground(&p).unwrap();
        for (_, x) in evolve_secular(&p, &x0, 30.0).unwrap() {
            prop_assert!((x.total_population() - 1.0).abs() <= 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evolution_stays_a_density_matrix(p in params(), rho0 in state()) {
        let traj = integrate(&MasterRhs::driven(p), &rho0, 50.0, 0.01).unwrap();
        for rho in &traj.states {
            prop_assert!((rho.trace() - 1.0).abs() <= 1e-10);
            prop_assert!(min_eigenvalue(rho) >= -1e-8);
        }
    }
}

//! Cross-module consistency over random noise models.

use ghz_metrology::channel::{channel_distance, coefficients, kraus, s_matrix, s_matrix_from_master_equation, NoiseModel};
use ghz_metrology::metrology::{parity_expectation, precision, qfi_frequency, qfi_frequency_dense, StencilConfig};
use ghz_metrology::numerics::{kron_power, pauli};
use ghz_metrology::scaling::stable_precision;
use ghz_metrology::states::{apply_product_channel, evolve_ghz, expand, ghz, Basis};
use proptest::prelude::*;

fn model() -> impl Strategy<Value = NoiseModel> {
    (0.0f64..2.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0).prop_map(|(g, x, y, z)| {
        let s = x + y + z;
        if s == 0.0 {
            NoiseModel::transversal(g)
        } else {
            NoiseModel::new(g, x / s, y / s, 1.0 - x / s - y / s).unwrap()
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closed_form_channel_matches_integrator(m in model(), omega in -2.0f64..2.0, t in 0.0f64..2.0) {
        let closed = s_matrix(&coefficients(&m, omega, t).unwrap());
        let oracle = s_matrix_from_master_equation(&m, omega, t, 2e-3);
        prop_assert!(channel_distance(&closed, &oracle) <= 1e-8);
    }

    #[test]
    fn kraus_is_a_valid_channel(m in model(), omega in -2.0f64..2.0, t in 0.0f64..3.0) {
        let k = kraus(&coefficients(&m, omega, t).unwrap()).unwrap();
        prop_assert!(k.completeness_residue() <= 1e-10);
        prop_assert!(k.probs.iter().all(|&p| p >= -1e-12));
        prop_assert!(channel_distance(&k.s_matrix(), &s_matrix(&coefficients(&m, omega, t).unwrap())) <= 1e-12);
    }

    #[test]
    fn probe_parity_three_ways(m in model(), omega in -2.0f64..2.0, t in 0.0f64..2.0, n in 1usize..5) {
        let k = coefficients(&m, omega, t).unwrap();
        let px = parity_expectation(n, &k);
        let x = evolve_ghz(n, &k);
        prop_assert!((x.parity_x() - px).abs() <= 1e-12);
        let brute = apply_product_channel(&ghz(n, Basis::Computational).unwrap(), &kraus(&k).unwrap(), n).unwrap();
        prop_assert!(expand(&x).unwrap().max_abs_diff(&brute) <= 1e-12);
        prop_assert!((brute.trace_product(&kron_power(&pauli::x(), n)).re - px).abs() <= 1e-12);
    }

    #[test]
    fn block_and_dense_qfi_agree(m in model(), t in 0.05f64..2.0, n in 1usize..5) {
        let a = qfi_frequency(n, &m, 1.0, t).unwrap();
        let b = qfi_frequency_dense(n, &m, 1.0, t).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a));
    }

    #[test]
    fn stable_and_direct_precision_agree(t in 0.05f64..2.0, n in 1usize..7) {
        let m = NoiseModel::transversal(1.0);
        let p = precision(n, &m, 1.0, t, StencilConfig::analytic());
        // near a blind spot the relative comparison is ill-conditioned
        if let Some(p) = p.ok().filter(|p| p.dpx_domega.abs() > 1e-3) {
            let q = stable_precision(n, &m, 1.0, t, 1.0).unwrap();
            prop_assert!((p.var_omega_t - q.var_omega_t).abs() <= 1e-8 * p.var_omega_t);
        }
    }
}

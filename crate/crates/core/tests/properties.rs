use proptest::prelude::*;
use trispin::linalg::{self, c};
use trispin::liouvillian::{apply_generator, build_generator, tilt_generator};
use trispin::spectral::dynamical_free_energy;
use trispin::{CMat, Convention, ModelParams};

fn params() -> impl Strategy<Value = ModelParams> {
    (
        0.1f64..15.0,
        -2.0f64..2.0,
        0.01f64..0.2,
        0.0f64..0.02,
        0.0f64..6.0,
        any::<bool>(),
    )
        .prop_map(|(alpha, b_field, gamma_coll, gamma_single, nbar, halved)| ModelParams {
            alpha,
            b_field,
            gamma_coll,
            gamma_single,
            nbar,
            convention: if halved { Convention::Halved } else { Convention::Unhalved },
        })
}

fn hermitian(entries: &[f64]) -> CMat {
    let a = CMat::from_fn(8, 8, |i, j| c(entries[i * 8 + j], entries[64 + i * 8 + j]));
    &a + &linalg::adjoint(&a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generator_preserves_trace_and_hermiticity(
        p in params(),
        entries in prop::collection::vec(-1.0f64..1.0, 128),
    ) {
        let rho = hermitian(&entries);
        let out = apply_generator(&build_generator(&p).unwrap(), &rho).unwrap();
        let scale = linalg::max_abs(&rho) * (p.alpha + p.b_field.abs() + 10.0 * (1.0 + p.nbar));
        prop_assert!(linalg::trace(&out).norm() < 1e-12 * scale);
        prop_assert!(linalg::hermiticity_defect(&out) < 1e-12 * scale);
    }

    #[test]
    fn tilt_at_zero_is_the_generator(p in params()) {
        let w = build_generator(&p).unwrap();
        let w0 = tilt_generator(&p, 0.0).unwrap();
        prop_assert!(linalg::max_abs_diff(&w.matrix, &w0.matrix) < 1e-14);
    }

    #[test]
    fn theta_vanishes_without_bias(p in params()) {
        let t = dynamical_free_energy(&p, 0.0).unwrap();
        prop_assert!(t.abs() < 1e-9, "{}", t);
    }

    #[test]
    fn theta_is_convex(p in params(), lo in -1.5f64..0.0, width in 0.2f64..1.5) {
        let n = 9;
        let h = width / (n - 1) as f64;
        let theta: Vec<f64> = (0..n)
            .map(|i| dynamical_free_energy(&p, lo + h * i as f64).unwrap())
            .collect();
        for w in theta.windows(3) {
            let second = w[0] - 2.0 * w[1] + w[2];
            prop_assert!(second >= -1e-8, "{:?}", theta);
        }
    }
}

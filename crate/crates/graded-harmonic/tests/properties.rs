use graded_harmonic::group::QuasiNorm;
use graded_harmonic::harness::{ExperimentConfig, Operation};
use graded_harmonic::GroupSpec;
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    -3.0f64..3.0
}

proptest! {
    #[test]
    fn heisenberg_law_is_associative_and_dilation_homogeneous(
        x in prop::array::uniform3(coord()),
        y in prop::array::uniform3(coord()),
        z in prop::array::uniform3(coord()),
        lambda in 0.1f64..5.0,
    ) {
        let g = GroupSpec::heisenberg();
        let mul = |a: &[f64], b: &[f64]| {
            let mut out = [0.0; 3];
            g.mul_into(a, b, &mut out);
            out
        };
        let left = mul(&mul(&x, &y), &z);
        let right = mul(&x, &mul(&y, &z));
        for (l, r) in left.iter().zip(&right) {
            prop_assert!((l - r).abs() < 1e-12 * (1.0 + l.abs()));
        }

        let mut inv = [0.0; 3];
        g.inv_into(&x, &mut inv);
        prop_assert!(mul(&x, &inv).iter().all(|c| c.abs() < 1e-12));

        let mut scaled = [0.0; 3];
        g.dilate_into(lambda, &x, &mut scaled);
        for variant in [QuasiNorm::Max, QuasiNorm::Sum, QuasiNorm::Smooth] {
            let norm = g.norm_of(&x, variant);
            prop_assert!((g.norm_of(&scaled, variant) - lambda * norm).abs() < 1e-10 * (1.0 + lambda * norm));
            prop_assert!((g.norm_of(&inv, variant) - norm).abs() < 1e-12 * (1.0 + norm));
        }
    }

    #[test]
    fn config_survives_toml(seed in any::<u64>(), alpha in 0.01f64..0.99, points in 2usize..5000) {
        let cfg = ExperimentConfig {
            seed,
            operation: Some(Operation::Figure {
                n: 1,
                alpha,
                r_max: 10.0,
                points,
                output: "phi.csv".into(),
            }),
            ..ExperimentConfig::default()
        };
        match cfg.to_toml_string() {
            Ok(text) => prop_assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg),
            Err(_) => prop_assert!(seed > i64::MAX as u64),
        }
    }
}

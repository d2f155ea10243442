use mcg_core::analysis::{
    exact_discrepancy, exp_sum_with, koksma_szusz_bound, korobov_reduction_check, reduction_residual, vinogradov_count,
    SumMethod,
};
use mcg_core::arith::{det_exact, IntMatrix, PrimePowerModulus, ResidueVector};
use mcg_core::generator::GeneratorConfig;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use proptest::prelude::*;

fn generator() -> impl Strategy<Value = GeneratorConfig> {
    (1usize..=3, prop::sample::select(vec![2u64, 3, 5, 7]), 1u32..=4)
        .prop_flat_map(|(d, p, t)| {
            (prop::collection::vec(-9i64..=9, d * d), prop::collection::vec(0i64..100, 2 * d), Just((d, p, t)))
        })
        .prop_filter_map("singular mod p", |(xs, uv, (d, p, t))| {
            let rows: Vec<Vec<BigInt>> = xs.chunks(d).map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
            let a = IntMatrix::from_rows(rows).unwrap();
            if det_exact(&a).mod_floor(&BigInt::from(p)).is_zero() {
                return None;
            }
            let m = PrimePowerModulus::new(p, t).unwrap();
            let u = ResidueVector::from_i64(&uv[..d]);
            let v = ResidueVector::from_i64(&uv[d..]);
            GeneratorConfig::new(a, m, u, Some(v)).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sum_methods_agree_and_respect_the_trivial_bound(cfg in generator(), n in 1u64..20_000) {
        let direct = exp_sum_with(&cfg, n, SumMethod::Direct).unwrap();
        let hist = exp_sum_with(&cfg, n, SumMethod::Histogram).unwrap();
        let tol = 1e-9 * n as f64;
        prop_assert!((direct.re - hist.re).abs() <= tol && (direct.im - hist.im).abs() <= tol);
        for r in [&direct, &hist] {
            prop_assert!(r.abs <= n as f64 * (1.0 + 1e-12));
            prop_assert!(r.normalized <= 1.0 + 1e-12);
            let q = cfg.modulus().modulus_u64().unwrap();
            if n <= q {
                prop_assert!(r.rho > 0.0 || n == 1);
                prop_assert!(r.rho <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn reduction_inequality_holds(cfg in generator(), n in 1u64..300, m in 1u64..6, a in 0u64..6) {
        let check = korobov_reduction_check(&cfg, n, m, a).unwrap();
        prop_assert!(check.residual >= -1e-9 * n as f64, "{:?}", check);
    }

    #[test]
    fn reduction_inequality_holds_for_polynomial_phases(coeffs in prop::collection::vec(0u64..1000, 4), q in 2u64..500, n in 1u64..300, m in 1u64..5, a in 0u64..5) {
        let phase = |x: u64| {
            let v = coeffs.iter().rev().fold(0u128, |acc, &c| (acc * x as u128 + c as u128) % q as u128);
            v as f64 / q as f64
        };
        let check = reduction_residual(phase, n, m, a);
        prop_assert!(check.residual >= -1e-9 * n as f64, "{:?}", check);
    }

    #[test]
    fn discrepancy_lies_below_the_koksma_szusz_bound(cfg in generator(), n in 1usize..200, v in 1u32..5) {
        prop_assume!(cfg.dim() <= 2);
        let points = cfg.fractional_points(n).unwrap();
        let report = exact_discrepancy(&points).unwrap();
        prop_assert!((0.0..=1.0).contains(&report.approx));
        let ks = koksma_szusz_bound(&cfg, n as u64, v).unwrap();
        prop_assert!(report.approx <= ks.bound.to_f64(), "D = {} bound = {}", report.approx, ks.bound);
    }

    #[test]
    fn vinogradov_count_has_the_diagonal(k in 1u32..=3, r in 1u32..=3, m in 1u64..=6) {
        let count = vinogradov_count(k, r, m).unwrap();
        prop_assert!(count >= (m as u128).pow(k));
        prop_assert!(count <= (m as u128).pow(2 * k));
    }
}

use mcg_core::arith::{
    char_poly, det_exact, factorial, factorial_valuation, IntMatrix, IntPolynomial, PrimePowerModulus, ResidueVector,
    Valuation,
};
use mcg_core::fieldalg::{is_proper_pair, ValidationLevel};
use mcg_core::generator::GeneratorConfig;
use mcg_core::padic::{
    binomial_expansion_value, compute_w, h_coeffs, monomial_expansion_value, order_mod, period_profile, theta_matrix,
    window_min_valuations, H_coeffs, DEFAULT_ORDER_CAP,
};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use proptest::prelude::*;

fn fib() -> IntMatrix {
    IntMatrix::from_i64(&[&[0, 1], &[1, 1]]).unwrap()
}

/// Matrices accepted at theorem-2 level modulo the paired prime.
fn validated() -> Vec<(IntMatrix, u64)> {
    vec![
        (fib(), 3),
        (fib(), 7),
        (IntMatrix::from_i64(&[&[1, 1], &[1, 2]]).unwrap(), 3),
        (IntMatrix::companion(&IntPolynomial::from_i64(&[-1, -1, 0, 1])).unwrap(), 3),
        (IntMatrix::companion(&IntPolynomial::from_i64(&[-1, -1, 0, 1])).unwrap(), 2),
    ]
}

fn config(a: &IntMatrix, p: u64, t: u32, u: &[i64]) -> GeneratorConfig {
    let m = PrimePowerModulus::new(p, t).unwrap();
    GeneratorConfig::new(a.clone(), m, ResidueVector::from_i64(u), Some(ResidueVector::from_i64(u))).unwrap()
}

fn invertible_matrix() -> impl Strategy<Value = (IntMatrix, u64)> {
    (1usize..=3, prop::sample::select(vec![2u64, 3, 5, 7]))
        .prop_flat_map(|(d, p)| (prop::collection::vec(-9i64..=9, d * d), Just(d), Just(p)))
        .prop_filter_map("singular mod p", |(xs, d, p)| {
            let rows: Vec<Vec<BigInt>> = xs.chunks(d).map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
            let a = IntMatrix::from_rows(rows).unwrap();
            (!det_exact(&a).mod_floor(&BigInt::from(p)).is_zero()).then_some((a, p))
        })
}

#[test]
fn validated_matrices_pass_the_validator() {
    for (a, p) in validated() {
        let d = a.dim();
        let mut u = vec![0i64; d];
        u[0] = 1;
        let mut cfg = config(&a, p, 4, &u);
        assert!(cfg.validate(ValidationLevel::Thm2).unwrap().is_accepted(), "{a:?} p={p}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jump_matches_repeated_steps((a, p) in invertible_matrix(), t in 1u32..=5, k in 0u64..=10_000, seed in prop::collection::vec(0i64..1000, 3)) {
        let cfg = config(&a, p, t, &seed[..a.dim()]);
        let mut state = cfg.state();
        for _ in 0..k {
            cfg.step(&mut state);
        }
        prop_assert_eq!(&state, &cfg.jump_ahead(&cfg.state(), k));
        prop_assert_eq!(&state, &cfg.state_at(k));
    }

    #[test]
    fn sequence_has_the_matrix_period((a, p) in invertible_matrix(), t in 1u32..=3, seed in prop::collection::vec(0i64..1000, 3)) {
        let cfg = config(&a, p, t, &seed[..a.dim()]);
        let tau = order_mod(&a, cfg.modulus(), DEFAULT_ORDER_CAP).unwrap();
        prop_assume!(tau <= 20_000);
        let xs = cfg.vectors(0, 2 * tau as usize);
        for n in 0..tau as usize {
            prop_assert_eq!(&xs[n], &xs[n + tau as usize]);
        }
    }

    #[test]
    fn sequence_satisfies_the_characteristic_recurrence((a, p) in invertible_matrix(), t in 1u32..=6, n0 in 0u64..500, seed in prop::collection::vec(0i64..1000, 3)) {
        let cfg = config(&a, p, t, &seed[..a.dim()]);
        let m = cfg.modulus();
        let d = a.dim();
        let rec = char_poly(&a).recurrence_coefficients();
        let xs = cfg.vectors(n0, 40);
        let scalars = cfg.scalar_sequence(n0, 40).unwrap();
        for n in 0..40 - d {
            for c in 0..d {
                let predicted: BigInt = (0..d).map(|i| &rec[i] * &xs[n + i].0[c]).sum();
                prop_assert_eq!(m.reduce(&predicted), xs[n + d].0[c].clone());
            }
            let predicted: BigInt = (0..d).map(|i| &rec[i] * &scalars[n + i]).sum();
            prop_assert_eq!(m.reduce(&predicted), scalars[n + d].clone());
        }
    }

    #[test]
    fn binomial_expansion_reproduces_the_sequence(idx in 0usize..5, s in 1u32..=2, n in 0u64..=100, ms in prop::collection::vec(0u64..=50, 8)) {
        let (a, p) = validated().swap_remove(idx);
        let t = 6;
        let u = vec![1i64; a.dim()];
        let cfg = config(&a, p, t, &u);
        let mm = cfg.modulus();
        let tau = order_mod(&a, &mm.with_exponent(s).unwrap(), DEFAULT_ORDER_CAP).unwrap();
        let b = theta_matrix(&a, p, s, tau).unwrap();
        let uv = ResidueVector::from_i64(&u);
        let h = h_coeffs(&a, &uv, &uv, &b, n, 50).unwrap();
        let det = det_exact(&a);
        for m in ms {
            let lhs = mm.reduce(&(&det * &cfg.scalar_sequence(n + tau * m, 1).unwrap()[0]));
            prop_assert_eq!(lhs, binomial_expansion_value(&h, m, s, mm));
        }
    }

    #[test]
    fn monomial_expansion_reproduces_the_sequence(idx in 0usize..5, s in 1u32..=3, t in 2u32..=9, n in 0u64..=100, ms in prop::collection::vec(0u64..=60, 8)) {
        let (a, p) = validated().swap_remove(idx);
        let r = (t / s) as usize;
        prop_assume!(r >= 1 && (r as u64) <= p.pow(s));
        let u = vec![1i64; a.dim()];
        let cfg = config(&a, p, t, &u);
        let mm = cfg.modulus();
        let tau = order_mod(&a, &mm.with_exponent(s).unwrap(), DEFAULT_ORDER_CAP).unwrap();
        let b = theta_matrix(&a, p, s, tau).unwrap();
        let uv = ResidueVector::from_i64(&u);
        let h = h_coeffs(&a, &uv, &uv, &b, n, r).unwrap();
        let big_h = H_coeffs(&h, r, s, p).unwrap();
        let scale = factorial(r as u64) * det_exact(&a);
        for m in ms {
            let lhs = mm.reduce(&(&scale * &cfg.scalar_sequence(n + tau * m, 1).unwrap()[0]));
            prop_assert_eq!(lhs, monomial_expansion_value(&big_h, m, s, mm));
        }
    }

    #[test]
    fn expansion_windows_are_not_jointly_divisible(idx in 0usize..5, n in 0u64..200, uv in prop::collection::vec(-30i64..=30, 6)) {
        let (a, p) = validated().swap_remove(idx);
        let d = a.dim();
        let u = ResidueVector::from_i64(&uv[..d]);
        let v = ResidueVector::from_i64(&uv[3..3 + d]);
        prop_assume!(is_proper_pair(&a, &u, &v, p).unwrap());
        let w = compute_w(&char_poly(&a), p).unwrap().w;
        let profile = period_profile(&a, p, 2, DEFAULT_ORDER_CAP).unwrap();
        let s = (w as u32).max(profile.s_star).max(1);
        let m = PrimePowerModulus::new(p, s).unwrap();
        let tau = order_mod(&a, &m, DEFAULT_ORDER_CAP).unwrap();
        let b = theta_matrix(&a, p, s, tau).unwrap();
        let h = h_coeffs(&a, &u, &v, &b, n, 30).unwrap();
        for (j, min) in window_min_valuations(&h, d, p).into_iter().enumerate() {
            prop_assert!(min < Valuation::Finite(w as u32), "window at {} has valuation {:?}, w = {}", j, min, w);
        }
        let r = ((p.pow(s)) as usize).min(6);
        let big_h = H_coeffs(&h[..=r], r, s, p).unwrap();
        let slack = w + factorial_valuation(r as u64, p);
        for min in window_min_valuations(&big_h, d, p) {
            prop_assert!(min < Valuation::Finite(slack as u32));
        }
    }
}

#[test]
fn stable_growth_matches_the_closed_form() {
    for (a, p) in validated() {
        let profile = period_profile(&a, p, 7, DEFAULT_ORDER_CAP).unwrap();
        for s in 1..7u32 {
            let (lo, hi) = (profile.tau(s).unwrap(), profile.tau(s + 1).unwrap());
            assert!(hi == lo || hi == p * lo);
            if s >= profile.s_star {
                assert_eq!(hi, p * lo);
                assert_eq!(profile.predicted_tau(s), Some(lo));
            }
        }
        assert_eq!(profile.tau_star.gcd(&p), 1);
    }
}

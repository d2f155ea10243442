//! Parameter bookkeeping for the large-`N` argument: the choice of `s`, `r`,
//! `k`, the side conditions it needs, and the phase denominators of the
//! double-sum polynomial.

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::bigreal::BigReal;
use super::bounds::{ford_bound, ford_k, korobov_bound, rho, FordBound, KorobovBound};
use crate::arith::{det_exact, factorial, prime_power, valuation, Valuation};
use crate::error::{Error, Result};
use crate::generator::GeneratorConfig;
use crate::padic::{h_coeffs, order_mod, theta_matrix, H_coeffs, DEFAULT_ORDER_CAP};

#[derive(Clone, Debug, Serialize)]
pub struct ProofParameters {
    pub n: String,
    pub p: u64,
    pub t: u32,
    pub d: u32,
    /// Largest `s` with `p^{4s} <= N`.
    pub s: u32,
    /// `floor(t / s)`.
    pub r: u32,
    /// `floor(6 r^2 log d)`.
    pub k: u64,
    /// `floor((r - 1) / (2d))`.
    pub lambda: u32,
    pub rho: BigReal,
    pub r_lt_s: bool,
    pub w_and_s_star_le_s: bool,
    pub ps_le_quarter_root: bool,
    /// `N >= p^{8 sqrt t}`.
    pub n_above_threshold: bool,
    pub c0: f64,
    /// `r >= c0 d` selects the main branch; otherwise the fallback length applies.
    pub large_r: bool,
    /// `floor(N^{r / (4 c0 d)})`.
    pub fallback_n0: BigReal,
    /// `log N0 / (t log p)`.
    pub fallback_rho0: BigReal,
}

pub fn proof_parameters(n: &BigInt, p: u64, t: u32, d: u32, w: u64, s_star: u32, c0: f64) -> Result<ProofParameters> {
    if n < &BigInt::from(2) || d == 0 || t == 0 {
        return Err(Error::InvalidArgument("need N >= 2, d >= 1, t >= 1".into()));
    }
    let p4 = prime_power(p, 4);
    let mut s = 0u32;
    let mut pw = p4.clone();
    while &pw <= n {
        s += 1;
        pw *= &p4;
    }
    if s == 0 {
        return Err(Error::PreconditionViolated(format!("N = {n} is below p^4, so s = 0")));
    }
    let r = t / s;
    let k = if d >= 2 { ford_k(r, d) } else { 0 };
    let root_t = t.sqrt();
    let n_above_threshold = if root_t * root_t == t {
        n >= &prime_power(p, 8 * root_t)
    } else {
        BigReal::from_bigint(n).ln() >= BigReal::from_f64(8.0 * (t as f64).sqrt()).mul(&BigReal::from_u64(p).ln())
    };
    let exponent = BigReal::from_u64(r as u64).div(&BigReal::from_f64(4.0 * c0 * d as f64));
    // Relative slack absorbs the rounding of exp(ln) at exact integer powers.
    let slack = BigReal::from_u64(1).add(&BigReal::from_f64(1e-60));
    let n0 = exponent.mul(&BigReal::from_bigint(n).ln()).exp().mul(&slack).floor();
    let rho0 = n0.ln().div(&BigReal::from_u64(t as u64).mul(&BigReal::from_u64(p).ln()));
    Ok(ProofParameters {
        n: n.to_string(),
        p,
        t,
        d,
        s,
        r,
        k,
        lambda: r.saturating_sub(1) / (2 * d),
        rho: rho(n, p, t),
        r_lt_s: r < s,
        w_and_s_star_le_s: w.max(s_star as u64) <= s as u64,
        ps_le_quarter_root: prime_power(p, 4 * s) <= *n,
        n_above_threshold,
        c0,
        large_r: r as f64 >= c0 * d as f64,
        fallback_n0: n0,
        fallback_rho0: rho0,
    })
}

/// One coefficient `a_j / q_j = H_j p^{sj} / (p^t r! det A)` in lowest terms.
#[derive(Clone, Debug, Serialize)]
pub struct PhaseTerm {
    pub j: usize,
    /// `nu_p(H_j)`.
    pub omega: Valuation,
    pub a: String,
    pub q: String,
    /// `p^{t - sj - omega} <= q`.
    pub lower_holds: bool,
    /// `q <= r! p^{t - sj - omega} |det A|`.
    pub upper_holds: bool,
}

pub fn phase_terms(big_h: &[BigInt], p: u64, s: u32, t: u32, det: &BigInt) -> Result<Vec<PhaseTerm>> {
    if det.is_zero() {
        return Err(Error::InvalidArgument("singular matrix".into()));
    }
    let r = big_h.len().saturating_sub(1);
    let r_fact = factorial(r as u64);
    let denominator = prime_power(p, t) * &r_fact * det;
    let pb = BigInt::from(p);
    Ok(big_h
        .iter()
        .enumerate()
        .map(|(j, hj)| {
            let ratio = BigRational::new(hj * prime_power(p, s * j as u32), denominator.clone());
            let (a, q) = (ratio.numer().clone(), ratio.denom().clone());
            let omega = valuation(hj, p);
            let (lower_holds, upper_holds) = match omega {
                Valuation::Infinite => (true, true),
                Valuation::Finite(w) => {
                    let e = t as i64 - s as i64 * j as i64 - w as i64;
                    let pe = if e >= 0 {
                        BigRational::from_integer(pb.pow(e as u32))
                    } else {
                        BigRational::new(BigInt::one(), pb.pow((-e) as u32))
                    };
                    let qr = BigRational::from_integer(q.clone());
                    let upper = &pe * BigRational::from_integer(&r_fact * det.abs());
                    (pe <= qr, qr <= upper)
                }
            };
            debug_assert!(q.is_positive() && a.gcd(&q).is_one());
            PhaseTerm { j, omega, a: a.to_string(), q: q.to_string(), lower_holds, upper_holds }
        })
        .collect())
}

/// Ford's count at `M = p^s` fed into Korobov's bound for `sigma_n`.
#[derive(Clone, Debug, Serialize)]
pub struct SigmaBound {
    pub n: u64,
    pub s: u32,
    pub r: u32,
    pub terms: Vec<PhaseTerm>,
    pub ford: FordBound,
    /// `korobov.root` bounds `|sigma_n|`.
    pub korobov: KorobovBound,
}

/// Bound `|sigma_n|` with `k = floor(6 r^2 log d)`, `r = floor(t/s)` and moduli `q_1..q_r`.
pub fn sigma_bound(cfg: &GeneratorConfig, n: u64, s: u32, d: u32, c0: f64) -> Result<SigmaBound> {
    let v = cfg.projection().ok_or(Error::MissingProjection)?;
    let m = cfg.modulus();
    let p = m.p();
    if s == 0 {
        return Err(Error::InsufficientPrecision);
    }
    let r = m.t() / s;
    if r == 0 {
        return Err(Error::PreconditionViolated(format!("s = {s} exceeds t = {}", m.t())));
    }
    let side = prime_power(p, s).to_u64().ok_or(Error::InvalidArgument("p^s exceeds 64 bits".into()))?;
    let tau_s = order_mod(cfg.matrix(), &m.with_exponent(s)?, DEFAULT_ORDER_CAP)?;
    let b = theta_matrix(cfg.matrix(), p, s, tau_s)?;
    let h = h_coeffs(cfg.matrix(), cfg.start(), v, &b, n, r as usize)?;
    let big_h = H_coeffs(&h, r as usize, s, p)?;
    let terms = phase_terms(&big_h, p, s, m.t(), &det_exact(cfg.matrix()))?;
    let ford = ford_bound(r, d, side, c0)?;
    let q: Vec<BigInt> = terms[1..].iter().map(|t| t.q.parse().expect("decimal")).collect();
    let korobov = korobov_bound(&q, side, ford.k, r, &ford.bound)?;
    Ok(SigmaBound { n, s, r, terms, ford, korobov })
}

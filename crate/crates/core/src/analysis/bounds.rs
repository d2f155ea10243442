//! Explicit bound evaluators: Ford's form of the Vinogradov mean value
//! theorem, Korobov's double-sum bound and the theorem envelopes used as
//! overlays on measured sums and discrepancies.

use num_bigint::BigInt;
use serde::Serialize;

use super::bigreal::BigReal;
use crate::error::{Error, Result};

/// Default for the unspecified absolute constant in `r >= c0 d`.
pub const DEFAULT_C0: f64 = 1000.0;
/// Default power of `d` in the envelope exponent.
pub const DEFAULT_D_POWER: u32 = 4;

/// `floor(6 r^2 log d)`.
pub fn ford_k(r: u32, d: u32) -> u64 {
    let x = BigReal::from_u64(6 * r as u64 * r as u64).mul(&BigReal::from_u64(d as u64).ln());
    x.floor().to_f64() as u64
}

#[derive(Clone, Debug, Serialize)]
pub struct FordBound {
    pub r: u32,
    pub d: u32,
    pub m: u64,
    pub k: u64,
    /// `delta_r = 1/(1000 d)`, the worst case allowed.
    pub delta: BigReal,
    /// `2k - r(r+1)/2 + delta r^2`.
    pub exponent: BigReal,
    /// `r^{3r^3} M^{exponent}`.
    pub bound: BigReal,
    pub c0: f64,
    /// `r >= c0 d`; the bound is only claimed under this condition.
    pub valid: bool,
}

pub fn ford_bound(r: u32, d: u32, m: u64, c0: f64) -> Result<FordBound> {
    if d < 2 || r == 0 || m == 0 {
        return Err(Error::InvalidArgument("ford bound needs d >= 2, r >= 1, M >= 1".into()));
    }
    let k = ford_k(r, d);
    let delta = BigReal::from_u64(1).div(&BigReal::from_u64(1000 * d as u64));
    let rr = r as u64;
    let exponent = BigReal::from_u64(2 * k)
        .sub(&BigReal::from_u64(rr * (rr + 1) / 2))
        .add(&delta.mul(&BigReal::from_u64(rr * rr)));
    let log_bound = BigReal::from_u64(3 * rr * rr * rr)
        .mul(&BigReal::from_u64(rr).ln())
        .add(&exponent.mul(&BigReal::from_u64(m).ln()));
    Ok(FordBound { r, d, m, k, delta, exponent, bound: log_bound.exp(), c0, valid: r as f64 >= c0 * d as f64 })
}

#[derive(Clone, Debug, Serialize)]
pub struct KorobovBound {
    pub k: u64,
    pub r: u32,
    pub m: u64,
    pub q_max: String,
    /// Bound on `|S|^{2k^2}`.
    pub power_bound: BigReal,
    /// Its `2k^2`-th root, comparable with `|S|`.
    pub root: BigReal,
}

/// `(64 k^2 log 3Q)^{r/2} M^{4k^2-2k} N_{k,r}(M) prod_l min(M^l, sqrt(q_l) + M^l / sqrt(q_l))`.
pub fn korobov_bound(q: &[BigInt], m: u64, k: u64, r: u32, count: &BigReal) -> Result<KorobovBound> {
    if q.len() != r as usize || r == 0 || k == 0 || m == 0 {
        return Err(Error::InvalidArgument("korobov bound needs r moduli and k, r, M >= 1".into()));
    }
    if q.iter().any(|x| x < &BigInt::from(1)) {
        return Err(Error::InvalidArgument("moduli must be positive".into()));
    }
    let q_max = q.iter().max().expect("r >= 1").clone();
    let big_m = BigReal::from_u64(m);
    let kk = BigReal::from_u64(k * k);
    let log_term = BigReal::from_u64(64).mul(&kk).mul(&BigReal::from_u64(3).mul(&BigReal::from_bigint(&q_max)).ln());
    let mut bound =
        log_term.pow(&BigReal::ratio(r as u64, 2)).mul(&big_m.powi((4 * k * k - 2 * k) as usize)).mul(count);
    for (l, ql) in q.iter().enumerate() {
        let ml = big_m.powi(l + 1);
        let sq = BigReal::from_bigint(ql).sqrt();
        bound = bound.mul(&ml.min(&sq.add(&ml.div(&sq))));
    }
    let root = bound.pow(&BigReal::from_u64(1).div(&BigReal::from_u64(2 * k * k)));
    Ok(KorobovBound { k, r, m, q_max: q_max.to_string(), power_bound: bound, root })
}

/// `log N / (t log p)`.
pub fn rho(n: &BigInt, p: u64, t: u32) -> BigReal {
    BigReal::from_bigint(n).ln().div(&BigReal::from_u64(t as u64).mul(&BigReal::from_u64(p).ln()))
}

/// `eta rho^2 / (d^{d_power} (log d)^2)`.
fn saving(n: &BigInt, p: u64, t: u32, d: u32, eta: f64, d_power: u32) -> Result<BigReal> {
    if d < 2 {
        return Err(Error::InvalidArgument("envelopes need d >= 2".into()));
    }
    let r = rho(n, p, t);
    let ln_d = BigReal::from_u64(d as u64).ln();
    Ok(BigReal::from_f64(eta)
        .mul(&r.mul(&r))
        .div(&BigReal::from_u64(d as u64).powi(d_power as usize).mul(&ln_d.mul(&ln_d))))
}

/// `c N^{1 - eta rho^2 / (d^{d_power} (log d)^2)}`, the exponential-sum envelope.
pub fn theorem_envelope(n: &BigInt, p: u64, t: u32, d: u32, eta: f64, c: f64, d_power: u32) -> Result<BigReal> {
    if n < &BigInt::from(1) {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let e = BigReal::from_u64(1).sub(&saving(n, p, t, d, eta, d_power)?);
    Ok(BigReal::from_f64(c).mul(&e.mul(&BigReal::from_bigint(n).ln()).exp()))
}

/// `c0 N^{-eta0 rho^2 / (d^{d_power} (log d)^2)} (log N)^d`, the discrepancy envelope.
pub fn discrepancy_envelope(n: &BigInt, p: u64, t: u32, d: u32, eta0: f64, c0: f64, d_power: u32) -> Result<BigReal> {
    if n < &BigInt::from(1) {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let ln_n = BigReal::from_bigint(n).ln();
    let e = saving(n, p, t, d, eta0, d_power)?.neg();
    Ok(BigReal::from_f64(c0).mul(&e.mul(&ln_n).exp()).mul(&ln_n.powi(d as usize)))
}

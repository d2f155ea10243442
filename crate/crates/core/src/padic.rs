//! p-adic structure of the generator matrix.
//!
//! The order `tau_s` of `A` modulo `p^s` grows by a factor of `p` per step
//! once `s` is large enough, `tau_s = tau_* p^{s - beta_*}`. After choosing
//! such an `s`, `A^{tau_s} = I + p^s B` for an integer matrix `B`, and every
//! shifted term of a scalar sequence has the exact binomial expansion
//!
//! ```text
//! det(A) u_{n + tau_s m} = sum_{j <= m} h_{n,j} p^{sj} C(m, j),   h_{n,j} = det(A) v A^n B^j u.
//! ```
//!
//! Re-expanding the binomials in monomials of `m` gives the coefficients
//! `H_{n,j}`. Divisibility of windows of `d` consecutive coefficients is
//! controlled by the window constant `w`, which is computed from the roots of
//! the characteristic polynomial lifted into the unramified extension
//! `Z_p[X]/(f)`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{
    binomial, char_poly, det_exact, factorial, inverse_mod, mat_pow_mod, prime_power, valuation, IntMatrix,
    IntPolynomial, PrimePowerModulus, ResidueVector, Valuation,
};
use crate::error::{Error, Result};
use crate::fieldalg::{irreducible_mod_p, squarefree_mod_p, PolyModP};

/// Iteration cap for the order of `A` modulo `p`.
pub const DEFAULT_ORDER_CAP: u64 = 10_000_000;
/// Largest working precision used when resolving a valuation.
pub const DEFAULT_PRECISION_CAP: u32 = 64;
/// Consecutive factor-`p` steps required before growth counts as stable.
const STABLE_STEPS: u32 = 3;
/// How far past the requested table the growth scan may extend.
const GROWTH_SCAN_LIMIT: u32 = 64;

fn small_matmul(a: &[u64], b: &[u64], d: usize, p: u64) -> Vec<u64> {
    let mut out = vec![0u64; d * d];
    for i in 0..d {
        for j in 0..d {
            let mut acc: u128 = 0;
            for k in 0..d {
                acc += a[i * d + k] as u128 * b[k * d + j] as u128;
            }
            out[i * d + j] = (acc % p as u128) as u64;
        }
    }
    out
}

/// Order of `A` modulo `p` by bounded iteration.
pub fn order_mod_p(a: &IntMatrix, p: u64, cap: u64) -> Result<u64> {
    let m = PrimePowerModulus::new(p, 1)?;
    if !(det_exact(a).mod_floor(&BigInt::from(p))).is_zero() {
        let d = a.dim();
        let base: Vec<u64> = a.reduce(&m).entries().iter().map(|x| x.to_u64().expect("below p")).collect();
        let identity: Vec<u64> = (0..d * d).map(|k| u64::from(k % (d + 1) == 0)).collect();
        let mut cur = base.clone();
        let mut k = 1u64;
        while cur != identity {
            if k >= cap {
                return Err(Error::IterationCapExceeded { cap });
            }
            cur = small_matmul(&cur, &base, d, p);
            k += 1;
        }
        return Ok(k);
    }
    Err(Error::NotInvertible { p })
}

/// Smallest `tau >= 1` with `A^tau = I (mod p^s)`.
///
/// The order modulo `p` is found by iteration; each further exponent either
/// keeps the order or multiplies it by `p`.
pub fn order_mod(a: &IntMatrix, m: &PrimePowerModulus, cap: u64) -> Result<u64> {
    Ok(*order_table(a, m.p(), m.t(), cap)?.last().expect("t >= 1"))
}

/// `[tau_1, ..., tau_smax]`.
fn order_table(a: &IntMatrix, p: u64, s_max: u32, cap: u64) -> Result<Vec<u64>> {
    let mut taus = vec![order_mod_p(a, p, cap)?];
    for s in 2..=s_max {
        let prev = *taus.last().expect("nonempty");
        let ms = PrimePowerModulus::new(p, s)?;
        if mat_pow_mod(a, prev, &ms).is_identity() {
            taus.push(prev);
        } else {
            let next = prev.checked_mul(p).ok_or(Error::PeriodTooLarge { period: u64::MAX, limit: u64::MAX })?;
            taus.push(next);
        }
    }
    Ok(taus)
}

/// Order growth of `A` modulo `p^s`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodProfile {
    pub p: u64,
    /// `tau_s` for `s = 1..=s_max`.
    pub taus: Vec<u64>,
    pub tau_star: u64,
    pub beta_star: i64,
    pub s_star: u32,
}

impl PeriodProfile {
    pub fn tau(&self, s: u32) -> Option<u64> {
        self.taus.get((s as usize).checked_sub(1)?).copied()
    }

    /// `tau_* p^{s - beta_*}`, valid for `s >= s_star`.
    pub fn predicted_tau(&self, s: u32) -> Option<u64> {
        let e = s as i64 - self.beta_star;
        if e < 0 {
            return None;
        }
        self.p.checked_pow(e as u32).and_then(|q| q.checked_mul(self.tau_star))
    }
}

/// Compute `tau_1..tau_smax` and the stable growth parameters.
///
/// `s_star` is the smallest exponent from which every step multiplies the
/// order by `p`; the scan runs past `s_max` until that has been observed for
/// several consecutive steps.
pub fn period_profile(a: &IntMatrix, p: u64, s_max: u32, cap: u64) -> Result<PeriodProfile> {
    if s_max == 0 {
        return Err(Error::InvalidArgument("s_max must be at least 1".into()));
    }
    let limit = s_max + GROWTH_SCAN_LIMIT;
    let mut taus = order_table(a, p, s_max.max(STABLE_STEPS + 1), cap)?;
    let s_star = loop {
        // Start of the trailing run of factor-p steps.
        let mut start = taus.len();
        while start >= 2 && taus[start - 1] == taus[start - 2] * p {
            start -= 1;
        }
        let run = (taus.len() - start) as u32;
        if run >= STABLE_STEPS {
            break start as u32;
        }
        if taus.len() as u32 >= limit {
            return Err(Error::NoStableGrowth { limit });
        }
        let s = taus.len() as u32 + 1;
        let prev = *taus.last().expect("nonempty");
        let ms = PrimePowerModulus::new(p, s)?;
        let next = if mat_pow_mod(a, prev, &ms).is_identity() {
            prev
        } else {
            prev.checked_mul(p).ok_or(Error::NoStableGrowth { limit: s })?
        };
        taus.push(next);
    };
    let tau_s = taus[s_star as usize - 1];
    let mut tau_star = tau_s;
    let mut nu = 0i64;
    while tau_star % p == 0 {
        tau_star /= p;
        nu += 1;
    }
    taus.truncate(s_max as usize);
    Ok(PeriodProfile { p, taus, tau_star, beta_star: s_star as i64 - nu, s_star })
}

/// `B = (A^{tau_s} - I) / p^s`, exactly over the integers.
pub fn theta_matrix(a: &IntMatrix, p: u64, s: u32, tau_s: u64) -> Result<IntMatrix> {
    let diff = a.pow(tau_s).sub(&IntMatrix::identity(a.dim()))?;
    diff.exact_div(&prime_power(p, s))
}

/// `B` modulo `p^precision`, computed from `A^{tau_s}` modulo `p^{s + precision}`.
pub fn theta_matrix_mod(a: &IntMatrix, p: u64, s: u32, tau_s: u64, precision: u32) -> Result<IntMatrix> {
    let m = PrimePowerModulus::new(p, s + precision)?;
    let diff = mat_pow_mod(a, tau_s, &m).sub(&IntMatrix::identity(a.dim()))?;
    Ok(diff.exact_div(&prime_power(p, s))?.reduce(&m.with_exponent(precision)?))
}

/// `v A^n B^j u` for `j = 0..=j_max`, exactly.
pub fn scalar_moments(
    a: &IntMatrix,
    u: &ResidueVector,
    v: &ResidueVector,
    b: &IntMatrix,
    n: u64,
    j_max: usize,
) -> Result<Vec<BigInt>> {
    let mut x = a.pow(n).mul_vec(u)?;
    let mut out = Vec::with_capacity(j_max + 1);
    for j in 0..=j_max {
        if j > 0 {
            x = b.mul_vec(&x)?;
        }
        out.push(v.dot(&x)?);
    }
    Ok(out)
}

/// Expansion coefficients `h_{n,j} = det(A) v A^n B^j u` for `j = 0..=j_max`.
pub fn h_coeffs(
    a: &IntMatrix,
    u: &ResidueVector,
    v: &ResidueVector,
    b: &IntMatrix,
    n: u64,
    j_max: usize,
) -> Result<Vec<BigInt>> {
    let det = det_exact(a);
    Ok(scalar_moments(a, u, v, b, n, j_max)?.into_iter().map(|x| x * &det).collect())
}

/// Integers `c_{i,0..=i}` with `i! C(m, i) = sum_j c_{i,j} m^j` (signed Stirling numbers of the first kind).
pub fn binomial_to_monomial(i: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for k in 0..i {
        // Multiply by (m - k).
        let mut next = vec![BigInt::zero(); row.len() + 1];
        for (j, c) in row.iter().enumerate() {
            next[j + 1] += c;
            next[j] -= c * BigInt::from(k);
        }
        row = next;
    }
    row
}

/// `H_{n,j} = sum_{i=j}^{r} h_{n,i} (r!/i!) c_{i,j} p^{s(i-j)}` for `j = 0..=r`.
#[allow(non_snake_case)]
pub fn H_coeffs(h: &[BigInt], r: usize, s: u32, p: u64) -> Result<Vec<BigInt>> {
    let ps = prime_power(p, s);
    if BigInt::from(r) > ps {
        return Err(Error::PreconditionViolated(format!("r = {r} exceeds p^s = {ps}")));
    }
    if h.len() < r + 1 {
        return Err(Error::PreconditionViolated(format!("need {} h-coefficients, got {}", r + 1, h.len())));
    }
    let r_fact = factorial(r as u64);
    let stirling: Vec<Vec<BigInt>> = (0..=r).map(binomial_to_monomial).collect();
    let mut out = Vec::with_capacity(r + 1);
    for j in 0..=r {
        let mut acc = BigInt::zero();
        for i in j..=r {
            let ratio = &r_fact / factorial(i as u64);
            acc += &h[i] * ratio * &stirling[i][j] * num_traits::pow(ps.clone(), i - j);
        }
        out.push(acc);
    }
    Ok(out)
}

/// `sum_{j <= m} h_j p^{sj} C(m, j) mod p^t`.
pub fn binomial_expansion_value(h: &[BigInt], m: u64, s: u32, modulus: &PrimePowerModulus) -> BigInt {
    let ps = prime_power(modulus.p(), s);
    let mut acc = BigInt::zero();
    let mut pw = BigInt::one();
    for (j, hj) in h.iter().enumerate().take(m as usize + 1) {
        if pw.is_zero() {
            break;
        }
        acc += hj * &pw * binomial(m, j as u64);
        pw = modulus.reduce(&(pw * &ps));
    }
    modulus.reduce(&acc)
}

/// `sum_j H_j p^{sj} m^j mod p^t`.
#[allow(non_snake_case)]
pub fn monomial_expansion_value(H: &[BigInt], m: u64, s: u32, modulus: &PrimePowerModulus) -> BigInt {
    let step = prime_power(modulus.p(), s) * BigInt::from(m);
    let mut acc = BigInt::zero();
    let mut pw = BigInt::one();
    for hj in H {
        acc += hj * &pw;
        pw = modulus.reduce(&(pw * &step));
    }
    modulus.reduce(&acc)
}

/// Minimum valuation over each window of `d` consecutive entries.
pub fn window_min_valuations(coeffs: &[BigInt], d: usize, p: u64) -> Vec<Valuation> {
    if coeffs.len() < d || d == 0 {
        return Vec::new();
    }
    let vals: Vec<Valuation> = coeffs.iter().map(|c| valuation(c, p)).collect();
    vals.windows(d).map(|w| *w.iter().min().expect("nonempty window")).collect()
}

// ---------------------------------------------------------------------------
// The unramified extension Z_p[X]/(f) at finite precision.

#[derive(Debug, PartialEq, Eq)]
struct RingSpec {
    f: IntPolynomial,
    p: u64,
    s: u32,
    modulus: BigInt,
}

/// An element of `(Z/p^s)[X]/(f)` with `f` monic and squarefree mod `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnramifiedElement {
    ring: Arc<RingSpec>,
    coeffs: Vec<BigInt>,
}

impl UnramifiedElement {
    fn with_ring(ring: Arc<RingSpec>, coeffs: Vec<BigInt>) -> Self {
        let mut e = UnramifiedElement { ring, coeffs };
        e.normalize();
        e
    }

    /// Embed an integer polynomial (reduced modulo `f` and `p^s`).
    pub fn new(f: &IntPolynomial, p: u64, s: u32, coeffs: Vec<BigInt>) -> Result<Self> {
        if s == 0 {
            return Err(Error::InsufficientPrecision);
        }
        if !f.is_monic() || f.degree().unwrap_or(0) == 0 {
            return Err(Error::InvalidArgument("extension needs a monic polynomial of degree >= 1".into()));
        }
        let ring = Arc::new(RingSpec { f: f.clone(), p, s, modulus: prime_power(p, s) });
        Ok(UnramifiedElement::with_ring(ring, coeffs))
    }

    /// An integer viewed in `Z/p^s` (the extension of degree one).
    pub fn integer(x: i64, p: u64, s: u32) -> Result<Self> {
        UnramifiedElement::new(&IntPolynomial::from_i64(&[0, 1]), p, s, vec![BigInt::from(x)])
    }

    fn normalize(&mut self) {
        let f = &self.ring.f;
        let d = f.degree().expect("degree >= 1");
        // Reduce modulo the monic f, highest degree first.
        while self.coeffs.len() > d {
            let top = self.coeffs.pop().expect("nonempty");
            if top.is_zero() {
                continue;
            }
            let shift = self.coeffs.len() - d;
            for k in 0..d {
                self.coeffs[shift + k] -= &top * f.coeff(k);
            }
        }
        self.coeffs.resize(d, BigInt::zero());
        for c in self.coeffs.iter_mut() {
            *c = c.mod_floor(&self.ring.modulus);
        }
    }

    pub fn p(&self) -> u64 {
        self.ring.p
    }

    pub fn precision(&self) -> u32 {
        self.ring.s
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn polynomial(&self) -> &IntPolynomial {
        &self.ring.f
    }

    pub fn one_like(&self) -> Self {
        UnramifiedElement::with_ring(self.ring.clone(), vec![BigInt::one()])
    }

    pub fn from_int_like(&self, x: &BigInt) -> Self {
        UnramifiedElement::with_ring(self.ring.clone(), vec![x.clone()])
    }

    fn same_ring(&self, other: &Self) {
        assert!(self.ring == other.ring, "elements of different rings");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same_ring(other);
        UnramifiedElement::with_ring(
            self.ring.clone(),
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.same_ring(other);
        UnramifiedElement::with_ring(
            self.ring.clone(),
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.same_ring(other);
        let d = self.coeffs.len();
        let mut out = vec![BigInt::zero(); 2 * d - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UnramifiedElement::with_ring(self.ring.clone(), out)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.one_like();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        *self == self.one_like()
    }

    /// Minimum p-valuation of the coefficients; `Infinite` when the element
    /// vanishes at the working precision (the true valuation is then `>= s`).
    pub fn valuation(&self) -> Valuation {
        self.coeffs.iter().map(|c| valuation(c, self.ring.p)).min().unwrap_or(Valuation::Infinite)
    }

    fn mod_p(&self) -> (PolyModP, PolyModP) {
        let p = self.ring.p;
        let pb = BigInt::from(p);
        let reduce = |c: &BigInt| c.mod_floor(&pb).to_u64().expect("below p");
        (
            PolyModP::new(p, self.coeffs.iter().map(reduce).collect()),
            PolyModP::new(p, self.ring.f.coeffs().iter().map(reduce).collect()),
        )
    }

    pub fn is_unit(&self) -> bool {
        let (a, f) = self.mod_p();
        !a.is_zero() && a.gcd(&f).is_one()
    }

    /// Multiplicative inverse, Newton-lifted from the inverse modulo `p`.
    pub fn inverse(&self) -> Result<Self> {
        let (a, f) = self.mod_p();
        if a.is_zero() {
            return Err(Error::InvalidArgument("element is not a unit".into()));
        }
        // Extended Euclid in F_p[X] for a^{-1} mod f.
        let (mut r0, mut r1) = (f.clone(), a.clone());
        let (mut t0, mut t1) = (PolyModP::new(a.p(), vec![]), PolyModP::one(a.p()));
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            let t2 = t0.sub(&q.mul(&t1));
            r0 = r1;
            r1 = r;
            t0 = t1;
            t1 = t2;
        }
        if r0.degree() != Some(0) {
            return Err(Error::InvalidArgument("element is not a unit".into()));
        }
        let c_inv = inverse_mod(&BigInt::from(r0.coeffs()[0]), &BigInt::from(a.p()))
            .and_then(|c| c.to_u64())
            .expect("nonzero constant mod p");
        let inv_mod_p = t0.mul(&PolyModP::new(a.p(), vec![c_inv])).rem(&f);
        let mut y = UnramifiedElement::with_ring(
            self.ring.clone(),
            inv_mod_p.coeffs().iter().map(|&c| BigInt::from(c)).collect(),
        );
        // Each step doubles the number of correct p-adic digits.
        let two = self.from_int_like(&BigInt::from(2));
        for _ in 0..64 {
            let prod = self.mul(&y);
            if prod.is_one() {
                return Ok(y);
            }
            y = y.mul(&two.sub(&prod));
        }
        Err(Error::PrecisionCapExceeded { cap: self.ring.s })
    }

    /// Evaluate an integer polynomial at this element.
    pub fn eval_poly(&self, g: &IntPolynomial) -> Self {
        let mut acc = self.from_int_like(&BigInt::zero());
        for c in g.coeffs().iter().rev() {
            acc = acc.mul(self).add(&self.from_int_like(c));
        }
        acc
    }
}

/// The `d` roots of `f` in `Z_p[X]/(f)` at precision `p^s`, in Frobenius order.
#[derive(Clone, Debug)]
pub struct RootSet {
    pub p: u64,
    pub s: u32,
    pub roots: Vec<UnramifiedElement>,
}

/// Lift the roots of `f` (irreducible mod `p`) to precision `p^s`.
///
/// The first root is the class of `X` itself; the others are Newton lifts of
/// its Frobenius conjugates `X^{p^k} mod (f, p)`.
pub fn lift_roots(f: &IntPolynomial, p: u64, s: u32) -> Result<RootSet> {
    if s == 0 {
        return Err(Error::InsufficientPrecision);
    }
    let d = f.degree().ok_or(Error::ZeroPolynomial { p })?;
    if !f.is_monic() {
        return Err(Error::InvalidArgument("root lifting needs a monic polynomial".into()));
    }
    if !squarefree_mod_p(f, p)?.is_accepted() {
        return Err(Error::NonSquarefree { p });
    }
    if !irreducible_mod_p(f, p) {
        return Err(Error::NotIrreducible { p });
    }
    let x = UnramifiedElement::new(f, p, s, vec![BigInt::zero(), BigInt::one()])?;
    let fprime = f.derivative();
    let mut roots = vec![x.clone()];
    let fp = PolyModP::from_int(f, p);
    let mut conj = PolyModP::x(p).rem(&fp);
    let pb = BigInt::from(p);
    for _ in 1..d {
        conj = conj.pow_mod_poly(&pb, &fp);
        let mut g =
            UnramifiedElement::with_ring(x.ring.clone(), conj.coeffs().iter().map(|&c| BigInt::from(c)).collect());
        let mut resolved = false;
        for _ in 0..64 {
            let val = g.eval_poly(f);
            if val.is_zero() {
                resolved = true;
                break;
            }
            g = g.sub(&val.mul(&g.eval_poly(&fprime).inverse()?));
        }
        if !resolved {
            return Err(Error::PrecisionCapExceeded { cap: s });
        }
        roots.push(g);
    }
    Ok(RootSet { p, s, roots })
}

impl RootSet {
    /// Root `i` for `1 <= i <= d`; index `0` is the constant `1`.
    pub fn root(&self, i: usize) -> UnramifiedElement {
        if i == 0 {
            self.roots[0].one_like()
        } else {
            self.roots[i - 1].clone()
        }
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// Order of a unit modulo `p` by iteration.
fn unit_order_mod_p(mu: &UnramifiedElement, cap: u64) -> Result<u64> {
    let p = mu.p();
    let (a, f) = mu.mod_p();
    let one = PolyModP::one(p);
    let mut cur = a.rem(&f);
    let mut k = 1u64;
    while cur != one {
        if k >= cap {
            return Err(Error::IterationCapExceeded { cap });
        }
        cur = cur.mul_mod_poly(&a, &f);
        k += 1;
    }
    Ok(k)
}

/// Minimal `t >= 1` with `gamma^t = lambda^t (mod p^s)`.
pub fn tau_pair(gamma: &UnramifiedElement, lambda: &UnramifiedElement, s: u32) -> Result<u64> {
    if s == 0 {
        return Err(Error::InsufficientPrecision);
    }
    if s > gamma.precision() || s > lambda.precision() {
        return Err(Error::InsufficientPrecision);
    }
    let mu = gamma.mul(&lambda.inverse()?);
    let p = mu.p();
    let mut tau = unit_order_mod_p(&mu, DEFAULT_ORDER_CAP)?;
    for level in 2..=s {
        let reached = match mu.pow(tau).sub(&mu.one_like()).valuation() {
            Valuation::Infinite => true,
            Valuation::Finite(v) => v >= level,
        };
        if !reached {
            tau = tau.checked_mul(p).ok_or(Error::PeriodTooLarge { period: u64::MAX, limit: u64::MAX })?;
        }
    }
    Ok(tau)
}

/// `beta(gamma, lambda)` together with the exponent `tau_*` it was taken at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BetaValue {
    pub tau_star: u64,
    pub beta: u32,
    /// Precision at which the valuation was resolved.
    pub precision: u32,
}

/// `nu_p(gamma^{tau_*} - lambda^{tau_*})` with `tau_* = tau_1` (odd `p`) or `tau_2` (`p = 2`).
///
/// `elements(s)` must return the pair at precision `s`; the precision is
/// doubled from `initial` until the valuation is strictly below it.
pub fn beta_pair<F>(p: u64, initial: u32, cap: u32, mut elements: F) -> Result<BetaValue>
where
    F: FnMut(u32) -> Result<(UnramifiedElement, UnramifiedElement)>,
{
    let level = if p == 2 { 2 } else { 1 };
    let mut s = initial.max(level + 1);
    loop {
        let (g, l) = elements(s)?;
        let tau_star = tau_pair(&g, &l, level)?;
        if let Valuation::Finite(beta) = g.pow(tau_star).sub(&l.pow(tau_star)).valuation() {
            if beta < s {
                return Ok(BetaValue { tau_star, beta, precision: s });
            }
        }
        if s >= cap {
            return Err(Error::PrecisionCapExceeded { cap });
        }
        s = (2 * s).min(cap);
    }
}

/// `w = d(d+1)/2 * max(beta_ij - beta_*, 0) + 1`.
pub fn window_constant(d: usize, beta_star: i64, betas: &[i64]) -> u64 {
    let excess = betas.iter().map(|b| (b - beta_star).max(0)).max().unwrap_or(0) as u64;
    (d * (d + 1) / 2) as u64 * excess + 1
}

/// One pair entering the window constant; index 0 stands for the constant 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairBeta {
    pub i: usize,
    pub j: usize,
    pub tau_star: u64,
    pub beta: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WindowData {
    pub w: u64,
    pub beta_star: i64,
    pub pairs: Vec<PairBeta>,
}

/// The window constant `w` for `f` irreducible and squarefree modulo `p`.
///
/// Pairs range over `0 <= i < j <= d` with the root list extended by `gamma_0 = 1`.
pub fn compute_w(f: &IntPolynomial, p: u64) -> Result<WindowData> {
    let d = f.degree().ok_or(Error::ZeroPolynomial { p })?;
    // Validates irreducibility and squarefreeness up front.
    lift_roots(f, p, 1)?;
    let companion = IntMatrix::companion(f)?;
    let profile = period_profile(&companion, p, 2, DEFAULT_ORDER_CAP)?;
    let mut pairs = Vec::new();
    for i in 0..=d {
        for j in i + 1..=d {
            let b = beta_pair(p, 4, DEFAULT_PRECISION_CAP, |s| {
                let roots = lift_roots(f, p, s)?;
                Ok((roots.root(i), roots.root(j)))
            })?;
            pairs.push(PairBeta { i, j, tau_star: b.tau_star, beta: b.beta });
        }
    }
    let betas: Vec<i64> = pairs.iter().map(|b| b.beta as i64).collect();
    Ok(WindowData { w: window_constant(d, profile.beta_star, &betas), beta_star: profile.beta_star, pairs })
}

/// Everything needed to expand `u_{n + tau_s m}` at a fixed `s`.
#[derive(Clone, Debug)]
pub struct ExpansionData {
    pub p: u64,
    pub s: u32,
    pub tau_s: u64,
    pub b: IntMatrix,
    /// `None` when `f` is reducible modulo `p` (no lifted roots available).
    pub w: Option<u64>,
    /// `floor(t / s)`.
    pub r: usize,
    /// `c[i]` holds `c_{i,0..=i}`.
    pub c: Vec<Vec<BigInt>>,
}

impl ExpansionData {
    pub fn build(a: &IntMatrix, m: &PrimePowerModulus, s: u32) -> Result<Self> {
        if s == 0 {
            return Err(Error::InsufficientPrecision);
        }
        let p = m.p();
        let tau_s = order_mod(a, &m.with_exponent(s)?, DEFAULT_ORDER_CAP)?;
        let b = theta_matrix(a, p, s, tau_s)?;
        let f = char_poly(a);
        let w = match compute_w(&f, p) {
            Ok(data) => Some(data.w),
            Err(Error::NotIrreducible { .. }) | Err(Error::NonSquarefree { .. }) => None,
            Err(e) => return Err(e),
        };
        let r = (m.t() / s) as usize;
        Ok(ExpansionData { p, s, tau_s, b, w, r, c: (0..=r).map(binomial_to_monomial).collect() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fib() -> IntMatrix {
        IntMatrix::from_i64(&[&[0, 1], &[1, 1]]).unwrap()
    }

    fn golden() -> IntPolynomial {
        IntPolynomial::from_i64(&[-1, -1, 1])
    }

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    /// Brute-force order modulo p^s by plain iteration.
    fn brute_order(a: &IntMatrix, p: u64, s: u32) -> u64 {
        let m = PrimePowerModulus::new(p, s).unwrap();
        let mut cur = a.reduce(&m);
        let mut k = 1;
        while !cur.is_identity() {
            cur = cur.mul(a).unwrap().reduce(&m);
            k += 1;
        }
        k
    }

    #[test]
    fn orders() {
        let m3 = PrimePowerModulus::new(3, 1).unwrap();
        let m9 = PrimePowerModulus::new(3, 2).unwrap();
        assert_eq!(order_mod(&fib(), &m3, DEFAULT_ORDER_CAP).unwrap(), 8);
        assert_eq!(order_mod(&fib(), &m9, DEFAULT_ORDER_CAP).unwrap(), 24);
        assert_eq!(order_mod(&IntMatrix::identity(3), &m9, DEFAULT_ORDER_CAP).unwrap(), 1);
        assert_eq!(brute_order(&fib(), 3, 1), 8);
        assert_eq!(brute_order(&fib(), 3, 2), 24);
        for (p, s) in [(2, 1), (2, 2), (2, 3), (2, 4), (5, 2), (7, 2), (11, 2), (13, 1)] {
            let m = PrimePowerModulus::new(p, s).unwrap();
            assert_eq!(order_mod(&fib(), &m, DEFAULT_ORDER_CAP).unwrap(), brute_order(&fib(), p, s), "p={p} s={s}");
        }
        assert_eq!(order_mod_p(&fib(), 7, 10), Err(Error::IterationCapExceeded { cap: 10 }));
        let sing = IntMatrix::from_i64(&[&[3, 0], &[0, 1]]).unwrap();
        assert_eq!(order_mod_p(&sing, 3, 100), Err(Error::NotInvertible { p: 3 }));
    }

    #[test]
    fn profiles() {
        let pr = period_profile(&fib(), 3, 5, DEFAULT_ORDER_CAP).unwrap();
        assert_eq!(pr.taus, vec![8, 24, 72, 216, 648]);
        assert_eq!((pr.tau_star, pr.beta_star, pr.s_star), (8, 1, 1));
        let pr = period_profile(&fib(), 7, 3, DEFAULT_ORDER_CAP).unwrap();
        assert_eq!(pr.taus, vec![16, 112, 784]);
        assert_eq!((pr.tau_star, pr.beta_star), (16, 1));
        for s in pr.s_star..=3 {
            assert_eq!(pr.predicted_tau(s), pr.tau(s));
        }
        assert_eq!(
            period_profile(&IntMatrix::identity(2), 3, 2, DEFAULT_ORDER_CAP),
            Err(Error::NoStableGrowth { limit: 66 })
        );
        assert_eq!(period_profile(&fib(), 3, 1, DEFAULT_ORDER_CAP).unwrap().taus, vec![8]);
    }

    #[test]
    fn profile_with_late_growth() {
        // 10 = 1 + 9: the order of 10 mod 3^s is 1 until s = 2, then grows.
        let a = IntMatrix::from_i64(&[&[10]]).unwrap();
        let pr = period_profile(&a, 3, 6, DEFAULT_ORDER_CAP).unwrap();
        assert_eq!(pr.taus, vec![1, 1, 3, 9, 27, 81]);
        assert_eq!((pr.tau_star, pr.beta_star, pr.s_star), (1, 2, 2));
        // Fibonacci modulo powers of 2: 3, 6, 12, 24.
        let pr = period_profile(&fib(), 2, 4, DEFAULT_ORDER_CAP).unwrap();
        assert_eq!(pr.taus, vec![3, 6, 12, 24]);
        assert_eq!((pr.tau_star, pr.beta_star), (3, 1));
    }

    #[test]
    fn theta_examples() {
        let b = theta_matrix(&fib(), 3, 1, 8).unwrap();
        assert_eq!(b, IntMatrix::from_i64(&[&[4, 7], &[7, 11]]).unwrap());
        assert!(theta_matrix(&IntMatrix::identity(2), 3, 4, 1).unwrap().is_zero());
        let b2 = theta_matrix(&fib(), 3, 2, 24).unwrap();
        assert_eq!(fib().pow(24), IntMatrix::identity(2).add(&b2.scale(&big(9))).unwrap());
        assert!(b2.entries().iter().any(|x: &BigInt| !(x % big(3)).is_zero()));
        assert!(matches!(theta_matrix(&fib(), 3, 2, 8), Err(Error::ExactDivisionFailure(_))));
        let m = PrimePowerModulus::new(3, 5).unwrap();
        assert_eq!(theta_matrix_mod(&fib(), 3, 2, 24, 5).unwrap(), b2.reduce(&m));
    }

    #[test]
    fn h_examples() {
        let u = ResidueVector::from_i64(&[1, 0]);
        let b = theta_matrix(&fib(), 3, 1, 8).unwrap();
        let moments = scalar_moments(&fib(), &u, &u, &b, 0, 2).unwrap();
        assert_eq!(moments, vec![big(1), big(4), big(65)]);
        // det(A) = -1 scales the moments.
        assert_eq!(h_coeffs(&fib(), &u, &u, &b, 0, 2).unwrap(), vec![big(-1), big(-4), big(-65)]);
    }

    #[test]
    fn stirling_rows() {
        assert_eq!(binomial_to_monomial(0), vec![big(1)]);
        assert_eq!(binomial_to_monomial(2), vec![big(0), big(-1), big(1)]);
        assert_eq!(binomial_to_monomial(3), vec![big(0), big(2), big(-3), big(1)]);
        for i in 0..12usize {
            let c = binomial_to_monomial(i);
            assert_eq!(c[i], big(1));
            for m in 0..15u64 {
                let poly: BigInt = c.iter().enumerate().map(|(j, cj)| cj * BigInt::from(m).pow(j as u32)).sum();
                assert_eq!(poly, binomial(m, i as u64) * factorial(i as u64));
            }
        }
    }

    #[test]
    fn big_h_examples() {
        let h = vec![big(5), big(-3), big(7), big(2), big(11)];
        assert_eq!(H_coeffs(&h, 0, 1, 3).unwrap(), vec![big(5)]);
        let hh = H_coeffs(&h, 3, 1, 3).unwrap();
        assert_eq!(hh[3], h[3]);
        assert!(matches!(H_coeffs(&h, 4, 1, 3), Err(Error::PreconditionViolated(_))));
        assert!(matches!(H_coeffs(&h[..2], 3, 1, 3), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn big_h_congruence_fibonacci() {
        // p = 3, t = 6, s = 2, r = 3, n = 0, m = 0..=20.
        let m = PrimePowerModulus::new(3, 6).unwrap();
        let u = ResidueVector::from_i64(&[1, 0]);
        let b = theta_matrix(&fib(), 3, 2, 24).unwrap();
        let h = h_coeffs(&fib(), &u, &u, &b, 0, 3).unwrap();
        let hh = H_coeffs(&h, 3, 2, 3).unwrap();
        let det = det_exact(&fib());
        let mut x = u.reduce(&m);
        let mut seq = Vec::new();
        for _ in 0..=24 * 20 {
            seq.push(m.reduce(&u.dot(&x).unwrap()));
            x = fib().mul_vec(&x).unwrap().reduce(&m);
        }
        for mm in 0..=20u64 {
            let lhs = m.reduce(&(&seq[(24 * mm) as usize] * factorial(3) * &det));
            assert_eq!(lhs, monomial_expansion_value(&hh, mm, 2, &m), "m={mm}");
        }
    }

    #[test]
    fn roots_of_golden_polynomial() {
        let rs = lift_roots(&golden(), 3, 1).unwrap();
        assert_eq!(rs.roots[0].coeffs(), &[big(0), big(1)]);
        assert_eq!(rs.roots[1].coeffs(), &[big(1), big(2)]);
        for s in [1, 3, 8] {
            let rs = lift_roots(&golden(), 3, s).unwrap();
            for g in &rs.roots {
                assert!(g.eval_poly(&golden()).is_zero());
            }
            // Sum of roots is 1, product is -1.
            assert!(rs.root(1).add(&rs.root(2)).is_one());
            assert!(rs.root(1).mul(&rs.root(2)).add(&rs.root(0)).is_zero());
        }
        let lin = lift_roots(&IntPolynomial::from_i64(&[-5, 1]), 3, 4).unwrap();
        assert_eq!(lin.roots.len(), 1);
        assert_eq!(lin.roots[0].coeffs(), &[big(5)]);
        assert!(matches!(lift_roots(&golden(), 11, 2), Err(Error::NotIrreducible { p: 11 })));
        assert!(matches!(lift_roots(&golden(), 5, 2), Err(Error::NonSquarefree { p: 5 })));
    }

    #[test]
    fn cubic_roots_lift() {
        let f = IntPolynomial::from_i64(&[-1, -1, 0, 1]);
        let rs = lift_roots(&f, 3, 6).unwrap();
        assert_eq!(rs.len(), 3);
        let mut sum = rs.root(1).sub(&rs.root(1));
        for g in &rs.roots {
            assert!(g.eval_poly(&f).is_zero());
            sum = sum.add(g);
        }
        assert!(sum.is_zero());
    }

    #[test]
    fn inverses_in_extension() {
        let rs = lift_roots(&golden(), 3, 6).unwrap();
        for g in &rs.roots {
            assert!(g.mul(&g.inverse().unwrap()).is_one());
        }
        let three = rs.root(1).from_int_like(&big(3));
        assert!(three.inverse().is_err());
        assert!(!three.is_unit());
    }

    #[test]
    fn tau_pair_examples() {
        let rs = lift_roots(&golden(), 3, 1).unwrap();
        assert_eq!(tau_pair(&rs.root(1), &rs.root(0), 1).unwrap(), 8);
        assert_eq!(tau_pair(&rs.root(1), &rs.root(1), 1).unwrap(), 1);
        let minus_one = UnramifiedElement::integer(-1, 3, 4).unwrap();
        let one = UnramifiedElement::integer(1, 3, 4).unwrap();
        assert_eq!(tau_pair(&minus_one, &one, 4).unwrap(), 2);
        assert_eq!(tau_pair(&minus_one, &one, 0), Err(Error::InsufficientPrecision));
        // Brute-force oracle at higher precision.
        let rs = lift_roots(&golden(), 3, 4).unwrap();
        let g = rs.root(1);
        for s in 1..=4u32 {
            let target = PrimePowerModulus::new(3, s).unwrap();
            let mut k = 1u64;
            let mut cur = g.clone();
            while !cur.sub(&g.one_like()).coeffs().iter().all(|c| (c % target.modulus()).is_zero()) {
                cur = cur.mul(&g);
                k += 1;
            }
            assert_eq!(tau_pair(&g, &g.one_like(), s).unwrap(), k, "s={s}");
        }
    }

    #[test]
    fn beta_examples() {
        let b = beta_pair(3, 2, DEFAULT_PRECISION_CAP, |s| {
            let rs = lift_roots(&golden(), 3, s)?;
            Ok((rs.root(1), rs.root(2)))
        })
        .unwrap();
        assert_eq!(b.beta, 1);
        for (x, beta) in [(1 + 3, 1), (1 + 9, 2), (1 + 27, 3)] {
            let b = beta_pair(3, 2, DEFAULT_PRECISION_CAP, |s| {
                Ok((UnramifiedElement::integer(x, 3, s)?, UnramifiedElement::integer(1, 3, s)?))
            })
            .unwrap();
            assert_eq!((b.tau_star, b.beta), (1, beta));
        }
        // 1 + 3^10 forces the precision to be raised past the initial guess.
        let b = beta_pair(3, 2, DEFAULT_PRECISION_CAP, |s| {
            Ok((UnramifiedElement::integer(1 + 59049, 3, s)?, UnramifiedElement::integer(1, 3, s)?))
        })
        .unwrap();
        assert_eq!(b.beta, 10);
        assert!(b.precision > 10);
        let err =
            beta_pair(3, 2, 16, |s| Ok((UnramifiedElement::integer(1, 3, s)?, UnramifiedElement::integer(1, 3, s)?)));
        assert_eq!(err, Err(Error::PrecisionCapExceeded { cap: 16 }));
        // p = 2 uses tau_2: 3 = -1 + 4, 3^2 - 1 = 8.
        let b = beta_pair(2, 2, DEFAULT_PRECISION_CAP, |s| {
            Ok((UnramifiedElement::integer(3, 2, s)?, UnramifiedElement::integer(1, 2, s)?))
        })
        .unwrap();
        assert_eq!((b.tau_star, b.beta), (2, 3));
    }

    #[test]
    fn growth_dichotomy_for_pairs() {
        // tau_s(gamma, lambda) = tau_* for s <= beta and tau_* p^{s - beta} beyond.
        let f = IntPolynomial::from_i64(&[-1, -1, 0, 1]);
        for p in [2u64, 3] {
            let rs = lift_roots(&f, p, 10).unwrap();
            for i in 0..=3 {
                for j in i + 1..=3 {
                    let (g, l) = (rs.root(i), rs.root(j));
                    let b = beta_pair(p, 4, DEFAULT_PRECISION_CAP, |s| {
                        let rs = lift_roots(&f, p, s)?;
                        Ok((rs.root(i), rs.root(j)))
                    })
                    .unwrap();
                    for s in 2..=8u32 {
                        let expected = if s <= b.beta { b.tau_star } else { b.tau_star * p.pow(s - b.beta) };
                        assert_eq!(tau_pair(&g, &l, s).unwrap(), expected, "p={p} ({i},{j}) s={s}");
                    }
                }
            }
        }
    }

    #[test]
    fn window_constants() {
        assert_eq!(compute_w(&golden(), 3).unwrap().w, 1);
        assert_eq!(window_constant(2, 1, &[1, 1, 1]), 1);
        assert_eq!(window_constant(2, 1, &[1, 2, 1]), 4);
        assert_eq!(window_constant(3, 2, &[1, 1]), 1);
        let data = compute_w(&golden(), 3).unwrap();
        assert_eq!(data.pairs.len(), 3);
        assert!(data.pairs.iter().all(|b| b.beta == 1));
        assert!(matches!(compute_w(&golden(), 11), Err(Error::NotIrreducible { .. })));
    }

    #[test]
    fn eigenvalues_of_theta_match_lifted_roots() {
        // char_poly(B) = prod (X - theta_i / p^s) modulo p^{precision}.
        for (f, p, s) in [(golden(), 3u64, 1u32), (golden(), 3, 2), (IntPolynomial::from_i64(&[-1, -1, 0, 1]), 3, 1)] {
            let a = IntMatrix::companion(&f).unwrap();
            let m = PrimePowerModulus::new(p, s).unwrap();
            let tau = order_mod(&a, &m, DEFAULT_ORDER_CAP).unwrap();
            let b = theta_matrix(&a, p, s, tau).unwrap();
            let chi = char_poly(&b);
            let precision = 4;
            let rs = lift_roots(&f, p, s + precision).unwrap();
            let ps = prime_power(p, s);
            let scaled: Vec<UnramifiedElement> = rs
                .roots
                .iter()
                .map(|g| {
                    let theta = g.pow(tau).sub(&g.one_like());
                    let coeffs = theta.coeffs().iter().map(|c| c / &ps).collect();
                    UnramifiedElement::new(&f, p, precision, coeffs).unwrap()
                })
                .collect();
            // Expand prod (X - e_i) as a list of ring coefficients.
            let zero = scaled[0].sub(&scaled[0]);
            let mut poly = vec![scaled[0].one_like()];
            for e in &scaled {
                let mut next = vec![zero.clone(); poly.len() + 1];
                for (k, c) in poly.iter().enumerate() {
                    next[k + 1] = next[k + 1].add(c);
                    next[k] = next[k].sub(&c.mul(e));
                }
                poly = next;
            }
            let target = PrimePowerModulus::new(p, precision).unwrap();
            for (k, c) in poly.iter().enumerate() {
                assert!(c.coeffs()[1..].iter().all(Zero::is_zero), "coefficient {k} is not rational");
                assert_eq!(c.coeffs()[0], target.reduce(&chi.coeff(k)), "coefficient {k}");
            }
        }
    }
}

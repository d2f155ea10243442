//! Polynomial algebra over `F_p` and the validators for the generator's
//! hypotheses: squarefreeness and irreducibility modulo `p`, nondegeneracy
//! over `Q`, proper pairs and p-primitive vectors.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{char_poly, det_exact, IntMatrix, IntPolynomial, PrimePowerModulus, ResidueVector};
use crate::error::{Error, Result};

#[inline]
fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, p);
        }
        b = mul_mod(b, b, p);
        e >>= 1;
    }
    acc
}

/// Inverse in `F_p` (Fermat); `a` must be nonzero.
fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a, p - 2, p)
}

/// A polynomial over `F_p`, coefficients ascending and reduced into `[0, p)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyModP {
    p: u64,
    coeffs: Vec<u64>,
}

impl PolyModP {
    pub fn new(p: u64, mut coeffs: Vec<u64>) -> Self {
        for c in coeffs.iter_mut() {
            *c %= p;
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        PolyModP { p, coeffs }
    }

    pub fn from_int(f: &IntPolynomial, p: u64) -> Self {
        let pb = BigInt::from(p);
        PolyModP::new(p, f.coeffs().iter().map(|c| c.mod_floor(&pb).to_u64().expect("reduced below p")).collect())
    }

    pub fn x(p: u64) -> Self {
        PolyModP::new(p, vec![0, 1])
    }

    pub fn one(p: u64) -> Self {
        PolyModP::new(p, vec![1])
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn to_int(&self) -> IntPolynomial {
        IntPolynomial::new(self.coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn monic(&self) -> PolyModP {
        match self.coeffs.last() {
            None => self.clone(),
            Some(&lc) => {
                let inv = inv_mod(lc, self.p);
                PolyModP::new(self.p, self.coeffs.iter().map(|&c| mul_mod(c, inv, self.p)).collect())
            }
        }
    }

    pub fn add(&self, other: &PolyModP) -> PolyModP {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0);
        PolyModP::new(self.p, (0..n).map(|i| (get(&self.coeffs, i) + get(&other.coeffs, i)) % self.p).collect())
    }

    pub fn sub(&self, other: &PolyModP) -> PolyModP {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0);
        PolyModP::new(
            self.p,
            (0..n).map(|i| (get(&self.coeffs, i) + self.p - get(&other.coeffs, i)) % self.p).collect(),
        )
    }

    pub fn mul(&self, other: &PolyModP) -> PolyModP {
        if self.is_zero() || other.is_zero() {
            return PolyModP::new(self.p, vec![]);
        }
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + mul_mod(a, b, self.p)) % self.p;
            }
        }
        PolyModP::new(self.p, out)
    }

    /// Quotient and remainder; `divisor` must be nonzero.
    pub fn div_rem(&self, divisor: &PolyModP) -> (PolyModP, PolyModP) {
        let p = self.p;
        let dd = divisor.degree().expect("division by zero polynomial");
        let inv = inv_mod(divisor.coeffs[dd], p);
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (PolyModP::new(p, vec![]), self.clone());
        }
        let mut quo = vec![0u64; rem.len() - dd];
        for k in (0..quo.len()).rev() {
            let c = mul_mod(rem[k + dd], inv, p);
            quo[k] = c;
            if c == 0 {
                continue;
            }
            for (j, &b) in divisor.coeffs.iter().enumerate() {
                rem[k + j] = (rem[k + j] + p - mul_mod(c, b, p)) % p;
            }
        }
        rem.truncate(dd);
        (PolyModP::new(p, quo), PolyModP::new(p, rem))
    }

    pub fn rem(&self, divisor: &PolyModP) -> PolyModP {
        self.div_rem(divisor).1
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &PolyModP) -> PolyModP {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> PolyModP {
        PolyModP::new(
            self.p,
            self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| mul_mod(c, i as u64 % self.p, self.p)).collect(),
        )
    }

    pub fn mul_mod_poly(&self, other: &PolyModP, modulus: &PolyModP) -> PolyModP {
        self.mul(other).rem(modulus)
    }

    /// `self^e mod modulus` for a big exponent.
    pub fn pow_mod_poly(&self, e: &BigInt, modulus: &PolyModP) -> PolyModP {
        let mut acc = PolyModP::one(self.p).rem(modulus);
        let base = self.rem(modulus);
        for i in (0..e.bits()).rev() {
            acc = acc.mul_mod_poly(&acc, modulus);
            if e.bit(i) {
                acc = acc.mul_mod_poly(&base, modulus);
            }
        }
        acc
    }
}

impl fmt::Display for PolyModP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.to_int(), self.p)
    }
}

/// Outcome of a validation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Accepted,
    Rejected,
}

/// Machine-readable reason attached to a [`Verdict`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reason {
    Ok,
    Singular,
    Degenerate,
    MultipleRootsModP,
    ConstantTermDivisibleByP,
    ReducibleModP,
    ImproperPair,
    NotPPrimitive,
    DimensionMismatch,
}

impl Reason {
    pub fn code(self) -> &'static str {
        match self {
            Reason::Ok => "ok",
            Reason::Singular => "singular",
            Reason::Degenerate => "degenerate",
            Reason::MultipleRootsModP => "multiple-roots-mod-p",
            Reason::ConstantTermDivisibleByP => "constant-term-divisible-by-p",
            Reason::ReducibleModP => "reducible-mod-p",
            Reason::ImproperPair => "improper-pair",
            Reason::NotPPrimitive => "not-p-primitive",
            Reason::DimensionMismatch => "dimension-mismatch",
        }
    }
}

/// Evidence for a rejection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// A nontrivial common factor, coefficients ascending mod `p`.
    Factor {
        p: u64,
        coeffs: Vec<u64>,
    },
    /// `Phi_n` divides the polynomial whose roots are the roots (or root ratios) of `f`.
    CyclotomicRoot {
        n: u64,
    },
    CyclotomicRatio {
        n: u64,
    },
    RepeatedRoot,
    RecurrenceLength {
        found: usize,
        expected: usize,
    },
    Value {
        value: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub reason: Reason,
    pub witness: Option<Witness>,
}

impl Verdict {
    pub fn accepted() -> Self {
        Verdict { outcome: Outcome::Accepted, reason: Reason::Ok, witness: None }
    }

    pub fn rejected(reason: Reason, witness: Witness) -> Self {
        Verdict { outcome: Outcome::Rejected, reason, witness: Some(witness) }
    }

    pub fn is_accepted(&self) -> bool {
        self.outcome == Outcome::Accepted
    }
}

/// Accepted iff `gcd(f, f') = 1` over `F_p`.
pub fn squarefree_mod_p(f: &IntPolynomial, p: u64) -> Result<Verdict> {
    let fp = PolyModP::from_int(f, p);
    if fp.is_zero() {
        return Err(Error::ZeroPolynomial { p });
    }
    let g = fp.gcd(&fp.derivative());
    if g.degree().unwrap_or(0) == 0 {
        Ok(Verdict::accepted())
    } else {
        Ok(Verdict::rejected(Reason::MultipleRootsModP, Witness::Factor { p, coeffs: g.coeffs }))
    }
}

/// Irreducibility of `f mod p`: no factor of degree `k <= deg/2` divides
/// `X^{p^k} - X`, and `X^{p^deg} = X mod f`.
pub fn irreducible_mod_p(f: &IntPolynomial, p: u64) -> bool {
    let fp = PolyModP::from_int(f, p).monic();
    let Some(n) = fp.degree() else { return false };
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let x = PolyModP::x(p);
    let pb = BigInt::from(p);
    let mut frob = x.clone();
    for k in 1..=n {
        frob = frob.pow_mod_poly(&pb, &fp);
        if k <= n / 2 && !fp.gcd(&frob.sub(&x)).is_one() {
            return false;
        }
    }
    frob == x.rem(&fp)
}

// ---------------------------------------------------------------------------
// Exact integer polynomial helpers used by the nondegeneracy check.

fn zmul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn zsub(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    trim((0..n).map(|i| a.get(i).cloned().unwrap_or_default() - b.get(i).cloned().unwrap_or_default()).collect())
}

fn trim(mut v: Vec<BigInt>) -> Vec<BigInt> {
    while v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
    v
}

/// Exact quotient `a / b` over `Z[X]`; `None` if the division leaves a remainder.
fn zdiv_exact(a: &[BigInt], b: &[BigInt]) -> Option<Vec<BigInt>> {
    let b = trim(b.to_vec());
    let lb = b.last()?.clone();
    let mut rem = trim(a.to_vec());
    if rem.is_empty() {
        return Some(Vec::new());
    }
    if rem.len() < b.len() {
        return None;
    }
    let mut quo = vec![BigInt::zero(); rem.len() - b.len() + 1];
    for k in (0..quo.len()).rev() {
        let top = &rem[k + b.len() - 1];
        if top.is_zero() {
            continue;
        }
        let (q, r) = top.div_rem(&lb);
        if !r.is_zero() {
            return None;
        }
        for (j, y) in b.iter().enumerate() {
            rem[k + j] -= &q * y;
        }
        quo[k] = q;
    }
    if rem.iter().all(Zero::is_zero) {
        Some(trim(quo))
    } else {
        None
    }
}

/// Determinant of a matrix over `Z[X]` by fraction-free elimination.
fn zpoly_det(mut m: Vec<Vec<Vec<BigInt>>>) -> Vec<BigInt> {
    let n = m.len();
    let mut prev: Vec<BigInt> = vec![BigInt::one()];
    let mut negate = false;
    for k in 0..n {
        if m[k][k].is_empty() {
            let Some(s) = (k + 1..n).find(|&i| !m[i][k].is_empty()) else {
                return Vec::new();
            };
            m.swap(k, s);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = zsub(&zmul(&m[i][j], &m[k][k]), &zmul(&m[i][k], &m[k][j]));
                m[i][j] = zdiv_exact(&num, &prev).expect("Bareiss division is exact");
            }
            m[i][k] = Vec::new();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if negate {
        det.into_iter().map(|c| -c).collect()
    } else {
        det
    }
}

/// Resultant of two integer polynomials via the Sylvester matrix.
pub fn resultant(f: &IntPolynomial, g: &IntPolynomial) -> BigInt {
    let (Some(m), Some(n)) = (f.degree(), g.degree()) else {
        return BigInt::zero();
    };
    if m + n == 0 {
        return BigInt::one();
    }
    let size = m + n;
    let mut rows = Vec::with_capacity(size);
    for i in 0..n {
        let mut row = vec![BigInt::zero(); size];
        for (j, c) in f.coeffs().iter().rev().enumerate() {
            row[i + j] = c.clone();
        }
        rows.push(row);
    }
    for i in 0..m {
        let mut row = vec![BigInt::zero(); size];
        for (j, c) in g.coeffs().iter().rev().enumerate() {
            row[i + j] = c.clone();
        }
        rows.push(row);
    }
    det_exact(&IntMatrix::from_rows(rows).expect("square Sylvester matrix"))
}

/// `Res_Y(f(Y), f(XY))`, a polynomial in `X` whose roots are all ratios `lambda_j / lambda_i`.
pub fn ratio_resultant(f: &IntPolynomial) -> IntPolynomial {
    let d = f.degree().expect("nonzero polynomial");
    let size = 2 * d;
    let mut rows: Vec<Vec<Vec<BigInt>>> = Vec::with_capacity(size);
    // f(Y) rows: constant coefficients, descending powers of Y.
    for i in 0..d {
        let mut row = vec![Vec::new(); size];
        for (j, c) in f.coeffs().iter().rev().enumerate() {
            row[i + j] = trim(vec![c.clone()]);
        }
        rows.push(row);
    }
    // f(XY) rows: the coefficient of Y^k is a_k X^k.
    for i in 0..d {
        let mut row = vec![Vec::new(); size];
        for (j, c) in f.coeffs().iter().enumerate().rev() {
            let mut mono = vec![BigInt::zero(); j + 1];
            mono[j] = c.clone();
            row[i + (d - j)] = trim(mono);
        }
        rows.push(row);
    }
    IntPolynomial::new(zpoly_det(rows))
}

pub fn euler_phi(mut n: u64) -> u64 {
    let mut out = n;
    let mut q = 2;
    while q * q <= n {
        if n.is_multiple_of(q) {
            while n.is_multiple_of(q) {
                n /= q;
            }
            out -= out / q;
        }
        q += 1;
    }
    if n > 1 {
        out -= out / n;
    }
    out
}

fn mobius(mut n: u64) -> i32 {
    let mut sign = 1;
    let mut q = 2;
    while q * q <= n {
        if n.is_multiple_of(q) {
            n /= q;
            if n.is_multiple_of(q) {
                return 0;
            }
            sign = -sign;
        }
        q += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// The `n`-th cyclotomic polynomial, `prod_{k | n} (X^k - 1)^{mu(n/k)}`.
pub fn cyclotomic(n: u64) -> IntPolynomial {
    assert!(n >= 1);
    let divisors: Vec<u64> = (1..=n).filter(|k| n.is_multiple_of(*k)).collect();
    let mut num: Vec<i64> = vec![1];
    let mut den_factors = Vec::new();
    for &k in &divisors {
        match mobius(n / k) {
            1 => {
                let mut next = vec![0i64; num.len() + k as usize];
                for (i, &c) in num.iter().enumerate() {
                    next[i + k as usize] += c;
                    next[i] -= c;
                }
                num = next;
            }
            -1 => den_factors.push(k as usize),
            _ => {}
        }
    }
    for k in den_factors {
        // Synthetic division by X^k - 1, exact.
        let deg = num.len() - 1;
        let mut quo = vec![0i64; deg + 1 - k];
        for i in (0..quo.len()).rev() {
            let c = num[i + k];
            quo[i] = c;
            num[i + k] -= c;
            num[i] += c;
        }
        debug_assert!(num.iter().all(|&c| c == 0));
        num = quo;
    }
    IntPolynomial::new(num.into_iter().map(BigInt::from).collect())
}

/// All `n <= 2 * bound^2` with `phi(n) <= bound` (`phi(n) >= sqrt(n/2)` bounds the search).
fn cyclotomic_indices(bound: u64) -> impl Iterator<Item = u64> {
    (1..=2 * bound * bound).filter(move |&n| euler_phi(n) <= bound)
}

fn divides(divisor: &IntPolynomial, f: &IntPolynomial) -> bool {
    if divisor.degree() > f.degree() {
        return false;
    }
    zdiv_exact(f.coeffs(), divisor.coeffs()).is_some()
}

/// Accepted iff no root of `f` and no ratio of distinct roots is a root of unity.
pub fn nondegeneracy_check(f: &IntPolynomial) -> Result<Verdict> {
    let d = f.degree().ok_or(Error::InvalidArgument("zero polynomial".into()))?;
    if !f.is_monic() {
        return Err(Error::InvalidArgument("nondegeneracy check needs a monic polynomial".into()));
    }
    if f.coeff(0).is_zero() {
        return Err(Error::ZeroConstantTerm);
    }
    if d == 0 {
        return Ok(Verdict::accepted());
    }
    if resultant(f, &f.derivative()).is_zero() {
        return Err(Error::NotSquarefreeOverQ);
    }
    let d = d as u64;
    for n in cyclotomic_indices(d) {
        if divides(&cyclotomic(n), f) {
            return Ok(Verdict::rejected(Reason::Degenerate, Witness::CyclotomicRoot { n }));
        }
    }
    if d >= 2 {
        let mut g = ratio_resultant(f).coeffs().to_vec();
        let x_minus_one = [BigInt::from(-1), BigInt::one()];
        for _ in 0..d {
            g = zdiv_exact(&g, &x_minus_one).expect("(X - 1)^d divides the ratio resultant");
        }
        let g = IntPolynomial::new(g);
        for n in cyclotomic_indices(d * d) {
            if divides(&cyclotomic(n), &g) {
                return Ok(Verdict::rejected(Reason::Degenerate, Witness::CyclotomicRatio { n }));
            }
        }
    }
    Ok(Verdict::accepted())
}

/// Length of the shortest linear recurrence over `F_p` generating `seq` (Berlekamp-Massey).
pub fn minimal_recurrence_length(seq: &[u64], p: u64) -> usize {
    let s: Vec<u64> = seq.iter().map(|&x| x % p).collect();
    let mut c = vec![1u64];
    let mut b = vec![1u64];
    let mut l = 0usize;
    let mut m = 1usize;
    let mut last_disc = 1u64;
    for n in 0..s.len() {
        let mut disc = s[n];
        for i in 1..=l {
            disc = (disc + mul_mod(c.get(i).copied().unwrap_or(0), s[n - i], p)) % p;
        }
        if disc == 0 {
            m += 1;
            continue;
        }
        let coef = mul_mod(disc, inv_mod(last_disc, p), p);
        let prev = c.clone();
        if c.len() < b.len() + m {
            c.resize(b.len() + m, 0);
        }
        for (i, &bi) in b.iter().enumerate() {
            c[i + m] = (c[i + m] + p - mul_mod(coef, bi, p)) % p;
        }
        if 2 * l <= n {
            l = n + 1 - l;
            b = prev;
            last_disc = disc;
            m = 1;
        } else {
            m += 1;
        }
    }
    l
}

/// First `count` terms of `v A^n u mod p`.
pub fn scalar_terms_mod_p(
    a: &IntMatrix,
    u: &ResidueVector,
    v: &ResidueVector,
    p: u64,
    count: usize,
) -> Result<Vec<u64>> {
    let m = PrimePowerModulus::new(p, 1)?;
    let mut x = u.reduce(&m);
    let vr = v.reduce(&m);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(m.reduce(&vr.dot(&x)?).to_u64().expect("below p"));
        x = a.mul_vec(&x)?.reduce(&m);
    }
    Ok(out)
}

/// `(u, v)` is proper iff `v A^n u mod p` has minimal recurrence length exactly `d`.
pub fn is_proper_pair(a: &IntMatrix, u: &ResidueVector, v: &ResidueVector, p: u64) -> Result<bool> {
    let d = a.dim();
    let terms = scalar_terms_mod_p(a, u, v, p, 4 * d)?;
    Ok(minimal_recurrence_length(&terms, p) == d)
}

/// At least one coordinate is coprime to `p`.
pub fn is_p_primitive(u: &ResidueVector, p: u64) -> bool {
    let pb = BigInt::from(p);
    u.entries().iter().any(|x| !x.mod_floor(&pb).is_zero())
}

/// Which theorem's hypotheses to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValidationLevel {
    /// Nondegenerate, squarefree mod p, `p ∤ a_0`, proper pair.
    Thm1,
    /// Nondegenerate, irreducible mod p, p-primitive start vector.
    Thm2,
}

/// Aggregated hypothesis check; the verdict carries the first failing reason.
pub fn validate_theorem_hypotheses(
    a: &IntMatrix,
    u: &ResidueVector,
    v: &ResidueVector,
    m: &PrimePowerModulus,
    level: ValidationLevel,
) -> Verdict {
    let d = a.dim();
    for len in [u.len(), v.len()] {
        if len != d {
            return Verdict::rejected(Reason::DimensionMismatch, Witness::RecurrenceLength { found: len, expected: d });
        }
    }
    let p = m.p();
    let f = char_poly(a);
    match nondegeneracy_check(&f) {
        Ok(v) if !v.is_accepted() => return v,
        Ok(_) => {}
        // A repeated root makes some ratio of distinct roots equal to 1.
        Err(Error::NotSquarefreeOverQ) => return Verdict::rejected(Reason::Degenerate, Witness::RepeatedRoot),
        Err(_) => return Verdict::rejected(Reason::Singular, Witness::Value { value: f.coeff(0).to_string() }),
    }
    let a0 = f.coeff(0);
    if a0.mod_floor(&BigInt::from(p)).is_zero() {
        return Verdict::rejected(Reason::ConstantTermDivisibleByP, Witness::Value { value: a0.to_string() });
    }
    match level {
        ValidationLevel::Thm1 => {
            match squarefree_mod_p(&f, p) {
                Ok(v) if !v.is_accepted() => return v,
                Ok(_) => {}
                Err(_) => return Verdict::rejected(Reason::MultipleRootsModP, Witness::Factor { p, coeffs: vec![] }),
            }
            let terms = scalar_terms_mod_p(a, u, v, p, 4 * d).expect("dimensions checked");
            let len = minimal_recurrence_length(&terms, p);
            if len != d {
                return Verdict::rejected(Reason::ImproperPair, Witness::RecurrenceLength { found: len, expected: d });
            }
        }
        ValidationLevel::Thm2 => {
            if !irreducible_mod_p(&f, p) {
                let fp = PolyModP::from_int(&f, p);
                return Verdict::rejected(Reason::ReducibleModP, Witness::Factor { p, coeffs: fp.coeffs().to_vec() });
            }
            if !is_p_primitive(u, p) {
                return Verdict::rejected(
                    Reason::NotPPrimitive,
                    Witness::Value { value: u.entries().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",") },
                );
            }
        }
    }
    Verdict::accepted()
}

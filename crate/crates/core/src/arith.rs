//! Exact integer and residue arithmetic: matrices, vectors, determinants,
//! characteristic polynomials and p-adic valuations.
//!
//! Everything here works on arbitrary-precision integers. Residues modulo
//! `p^t` are always represented canonically in `[0, p^t)`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    // This base set is deterministic for all n < 2^64.
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The modulus `p^t` for a prime `p` and exponent `t >= 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimePowerModulus {
    p: u64,
    t: u32,
    modulus: BigInt,
}

impl PrimePowerModulus {
    pub fn new(p: u64, t: u32) -> Result<Self> {
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        if t == 0 {
            return Err(Error::ZeroExponent);
        }
        Ok(PrimePowerModulus { p, t, modulus: num_traits::pow(BigInt::from(p), t as usize) })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    /// The same prime at a different exponent.
    pub fn with_exponent(&self, t: u32) -> Result<Self> {
        PrimePowerModulus::new(self.p, t)
    }

    /// Canonical representative in `[0, p^t)`.
    pub fn reduce(&self, x: &BigInt) -> BigInt {
        x.mod_floor(&self.modulus)
    }

    /// `p^t` as a `u64`, if it fits.
    pub fn modulus_u64(&self) -> Option<u64> {
        self.modulus.to_u64()
    }
}

impl fmt::Display for PrimePowerModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.p, self.t)
    }
}

/// `p^k` as a big integer.
pub fn prime_power(p: u64, k: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), k as usize)
}

/// A square matrix of exact integers, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    d: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::InvalidArgument("matrix must have dimension >= 1".into()));
        }
        let mut entries = Vec::with_capacity(d * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: row.len() });
            }
            entries.extend(row);
        }
        Ok(IntMatrix { d, entries })
    }

    /// Convenience constructor for small literal matrices.
    pub fn from_i64(rows: &[&[i64]]) -> Result<Self> {
        IntMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
    }

    pub fn identity(d: usize) -> Self {
        let mut m = IntMatrix::zero(d);
        for i in 0..d {
            m.entries[i * d + i] = BigInt::one();
        }
        m
    }

    pub fn zero(d: usize) -> Self {
        IntMatrix { d, entries: vec![BigInt::zero(); d * d] }
    }

    /// Companion matrix of a monic polynomial, acting on column vectors so that
    /// its characteristic polynomial is `f`.
    pub fn companion(f: &IntPolynomial) -> Result<Self> {
        let d = f.degree().ok_or_else(|| Error::InvalidArgument("zero polynomial".into()))?;
        if d == 0 || !f.leading().is_one() {
            return Err(Error::InvalidArgument("companion matrix needs a monic polynomial of degree >= 1".into()));
        }
        let mut m = IntMatrix::zero(d);
        for i in 0..d - 1 {
            m.entries[i * d + i + 1] = BigInt::one();
        }
        for j in 0..d {
            m.entries[(d - 1) * d + j] = -f.coeff(j);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.d + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: BigInt) {
        self.entries[i * self.d + j] = x;
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        self.entries.chunks(self.d).map(|r| r.to_vec()).collect()
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if self.d != other {
            return Err(Error::DimensionMismatch { expected: self.d, found: other });
        }
        Ok(())
    }

    /// Exact product over the integers.
    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        self.check_dim(other.d)?;
        let d = self.d;
        let mut out = IntMatrix::zero(d);
        for i in 0..d {
            for k in 0..d {
                let a = &self.entries[i * d + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    out.entries[i * d + j] += a * &other.entries[k * d + j];
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &IntMatrix) -> Result<IntMatrix> {
        self.check_dim(other.d)?;
        Ok(IntMatrix { d: self.d, entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect() })
    }

    pub fn sub(&self, other: &IntMatrix) -> Result<IntMatrix> {
        self.check_dim(other.d)?;
        Ok(IntMatrix { d: self.d, entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect() })
    }

    pub fn scale(&self, c: &BigInt) -> IntMatrix {
        IntMatrix { d: self.d, entries: self.entries.iter().map(|a| a * c).collect() }
    }

    pub fn reduce(&self, m: &PrimePowerModulus) -> IntMatrix {
        IntMatrix { d: self.d, entries: self.entries.iter().map(|a| m.reduce(a)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        *self == IntMatrix::identity(self.d)
    }

    pub fn trace(&self) -> BigInt {
        (0..self.d).map(|i| self.get(i, i).clone()).sum()
    }

    /// Exact power over the integers.
    pub fn pow(&self, mut n: u64) -> IntMatrix {
        let mut base = self.clone();
        let mut acc = IntMatrix::identity(self.d);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base).expect("same dimension");
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base).expect("same dimension");
            }
        }
        acc
    }

    /// `M u` for a column vector `u`.
    pub fn mul_vec(&self, u: &ResidueVector) -> Result<ResidueVector> {
        self.check_dim(u.len())?;
        let d = self.d;
        Ok(ResidueVector((0..d).map(|i| (0..d).map(|j| &self.entries[i * d + j] * &u.0[j]).sum()).collect()))
    }

    /// `v M` for a row vector `v`.
    pub fn vec_mul(&self, v: &ResidueVector) -> Result<ResidueVector> {
        self.check_dim(v.len())?;
        let d = self.d;
        Ok(ResidueVector((0..d).map(|j| (0..d).map(|i| &v.0[i] * &self.entries[i * d + j]).sum()).collect()))
    }

    /// Entrywise exact division; fails if any entry is not divisible.
    pub fn exact_div(&self, q: &BigInt) -> Result<IntMatrix> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for a in &self.entries {
            let (quo, rem) = a.div_rem(q);
            if !rem.is_zero() {
                return Err(Error::ExactDivisionFailure(format!("{a} is not divisible by {q}")));
            }
            entries.push(quo);
        }
        Ok(IntMatrix { d: self.d, entries })
    }

    /// Minor obtained by deleting row `r` and column `c`.
    fn minor(&self, r: usize, c: usize) -> IntMatrix {
        let d = self.d;
        let mut entries = Vec::with_capacity((d - 1) * (d - 1));
        for i in (0..d).filter(|&i| i != r) {
            for j in (0..d).filter(|&j| j != c) {
                entries.push(self.entries[i * d + j].clone());
            }
        }
        IntMatrix { d: d - 1, entries }
    }

    /// Classical adjugate, `adj(M) M = det(M) I`.
    pub fn adjugate(&self) -> IntMatrix {
        let d = self.d;
        if d == 1 {
            return IntMatrix::identity(1);
        }
        let mut out = IntMatrix::zero(d);
        for i in 0..d {
            for j in 0..d {
                let cof = det_exact(&self.minor(i, j));
                let signed = if (i + j) % 2 == 0 { cof } else { -cof };
                out.entries[j * d + i] = signed;
            }
        }
        out
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.entries.chunks(self.d).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// A length-`d` integer vector; reduced into `[0, p^t)` when tied to a modulus.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ResidueVector(pub Vec<BigInt>);

impl ResidueVector {
    pub fn from_i64(xs: &[i64]) -> Self {
        ResidueVector(xs.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zero(d: usize) -> Self {
        ResidueVector(vec![BigInt::zero(); d])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.0
    }

    pub fn reduce(&self, m: &PrimePowerModulus) -> ResidueVector {
        ResidueVector(self.0.iter().map(|x| m.reduce(x)).collect())
    }

    pub fn dot(&self, other: &ResidueVector) -> Result<BigInt> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: other.len() });
        }
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }
}

/// Integer polynomial with coefficients in ascending degree order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        IntPolynomial::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPolynomial { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficient of `X^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_one()
    }

    pub fn derivative(&self) -> IntPolynomial {
        IntPolynomial::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect())
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// Horner evaluation at a square matrix, exactly over the integers.
    pub fn eval_matrix(&self, a: &IntMatrix) -> IntMatrix {
        let d = a.dim();
        let mut acc = IntMatrix::zero(d);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(a).expect("same dimension").add(&IntMatrix::identity(d).scale(c)).expect("same dimension");
        }
        acc
    }

    /// Coefficients `a_0..a_{d-1}` of the recurrence `u_{n+d} = a_{d-1} u_{n+d-1} + ... + a_0 u_n`
    /// encoded by a monic polynomial `X^d - a_{d-1} X^{d-1} - ... - a_0`.
    pub fn recurrence_coefficients(&self) -> Vec<BigInt> {
        let d = self.degree().unwrap_or(0);
        (0..d).map(|i| -self.coeff(i)).collect()
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            match (i, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "X")?,
                (1, false) => write!(f, "{mag}X")?,
                (_, true) => write!(f, "X^{i}")?,
                (_, false) => write!(f, "{mag}X^{i}")?,
            }
        }
        Ok(())
    }
}

pub fn mat_mul_mod(a: &IntMatrix, b: &IntMatrix, m: &PrimePowerModulus) -> Result<IntMatrix> {
    Ok(a.mul(b)?.reduce(m))
}

/// `A^n mod p^t` by binary exponentiation; `n = 0` gives the identity.
pub fn mat_pow_mod(a: &IntMatrix, mut n: u64, m: &PrimePowerModulus) -> IntMatrix {
    let mut base = a.reduce(m);
    let mut acc = IntMatrix::identity(a.dim()).reduce(m);
    while n > 0 {
        if n & 1 == 1 {
            acc = mat_mul_mod(&acc, &base, m).expect("same dimension");
        }
        n >>= 1;
        if n > 0 {
            base = mat_mul_mod(&base, &base, m).expect("same dimension");
        }
    }
    acc
}

/// Big-exponent variant of [`mat_pow_mod`].
pub fn mat_pow_mod_big(a: &IntMatrix, n: &BigInt, m: &PrimePowerModulus) -> IntMatrix {
    let mut base = a.reduce(m);
    let mut acc = IntMatrix::identity(a.dim()).reduce(m);
    let bits = n.bits();
    for i in 0..bits {
        if n.bit(i) {
            acc = mat_mul_mod(&acc, &base, m).expect("same dimension");
        }
        if i + 1 < bits {
            base = mat_mul_mod(&base, &base, m).expect("same dimension");
        }
    }
    acc
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn det_exact(a: &IntMatrix) -> BigInt {
    let d = a.dim();
    let mut m: Vec<Vec<BigInt>> = a.rows();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..d {
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..d).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..d {
            for j in k + 1..d {
                let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    sign * &m[d - 1][d - 1]
}

/// Characteristic polynomial `det(XI - A)` via the Faddeev-LeVerrier recurrence.
pub fn char_poly(a: &IntMatrix) -> IntPolynomial {
    let d = a.dim();
    let ar: Vec<BigRational> = a.entries().iter().map(|x| BigRational::from_integer(x.clone())).collect();
    let mat_mul = |x: &[BigRational], y: &[BigRational]| -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); d * d];
        for i in 0..d {
            for k in 0..d {
                for j in 0..d {
                    out[i * d + j] += &x[i * d + k] * &y[k * d + j];
                }
            }
        }
        out
    };
    // coeffs[d - k] = c_{d-k}, monic leading coefficient.
    let mut coeffs = vec![BigRational::zero(); d + 1];
    coeffs[d] = BigRational::one();
    let mut mk = vec![BigRational::zero(); d * d];
    for k in 1..=d {
        // M_k = A M_{k-1} + c_{d-k+1} I, with M_0 = 0.
        let mut next = mat_mul(&ar, &mk);
        for i in 0..d {
            next[i * d + i] += &coeffs[d - k + 1];
        }
        mk = next;
        let amk = mat_mul(&ar, &mk);
        let tr: BigRational = (0..d).map(|i| amk[i * d + i].clone()).sum();
        coeffs[d - k] = -tr / BigRational::from_integer(BigInt::from(k));
    }
    let ints = coeffs
        .into_iter()
        .map(|c| {
            assert!(c.is_integer(), "characteristic polynomial coefficient {c} is not integral");
            c.to_integer()
        })
        .collect();
    IntPolynomial::new(ints)
}

/// Modular inverse of `x` modulo `m`, if it exists.
pub fn inverse_mod(x: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = x.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// `A^{-1} mod p^t` as adjugate times the inverse of the determinant.
pub fn mat_inverse_mod(a: &IntMatrix, m: &PrimePowerModulus) -> Result<IntMatrix> {
    let det = det_exact(a);
    let inv = inverse_mod(&det, m.modulus()).ok_or(Error::NotInvertible { p: m.p() })?;
    Ok(a.adjugate().scale(&inv).reduce(m))
}

/// A p-adic valuation; `Infinite` is the valuation of zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Valuation {
    Finite(u32),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(k) => Some(k),
            Valuation::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Valuation::Finite(_))
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(k) => write!(f, "{k}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// Largest `k` with `p^k | x`.
pub fn valuation(x: &BigInt, p: u64) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    let p = BigInt::from(p);
    let mut k = 0;
    let mut y = x.clone();
    loop {
        let (q, r) = y.div_rem(&p);
        if !r.is_zero() {
            return Valuation::Finite(k);
        }
        y = q;
        k += 1;
    }
}

/// `nu_p(n!)` by Legendre's formula.
pub fn factorial_valuation(n: u64, p: u64) -> u64 {
    let mut acc = 0;
    let mut q = n;
    while q > 0 {
        q /= p;
        acc += q;
    }
    acc
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

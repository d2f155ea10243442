//! Exponential sums `S(N) = sum_{n<N} e(v A^n u / p^t)` and the double sums
//! obtained from the coefficient expansion.
//!
//! Every term is `e(x/q)` for an integer residue `x`, so the angle is exact up
//! to one rounding of `x/q`. Index ranges are cut into fixed chunks that are
//! summed with compensation and then combined in ascending order; the result
//! does not depend on the number of worker threads.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{det_exact, factorial, prime_power, IntMatrix, PrimePowerModulus, ResidueVector};
use crate::error::{Error, Result};
use crate::generator::GeneratorConfig;
use crate::padic::{h_coeffs, order_mod, theta_matrix, H_coeffs, DEFAULT_ORDER_CAP};

/// Moduli up to this size are summed through a residue histogram.
pub const HISTOGRAM_LIMIT: u64 = 1 << 24;
/// Fixed chunk length of the ordered parallel reduction.
pub const CHUNK: u64 = 4096;
/// Largest full period enumerated by [`full_period_exponent`].
pub const PERIOD_LIMIT: u64 = 10_000_000;
/// Largest grid `p^{2s}` summed by [`double_sum_sigma`].
pub const GRID_LIMIT: u128 = 100_000_000;
/// Largest sequence prefix read by [`korobov_reduction_check`].
pub const REDUCTION_LIMIT: u64 = 10_000_000;

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct ComplexSum {
    re: Compensated,
    im: Compensated,
}

impl ComplexSum {
    pub(crate) fn add_turns(&mut self, frac: f64, weight: f64) {
        let (s, c) = (std::f64::consts::TAU * frac).sin_cos();
        self.re.add(weight * c);
        self.im.add(weight * s);
    }

    pub(crate) fn add_sum(&mut self, other: &ComplexSum) {
        self.re.add(other.re.value());
        self.im.add(other.im.value());
    }

    pub(crate) fn value(&self) -> (f64, f64) {
        (self.re.value(), self.im.value())
    }
}

/// `x/q` in turns, folded into `[-1/2, 1/2)` before rounding.
fn turns_u64(x: u64, q: u64) -> f64 {
    if x > q / 2 {
        -((q - x) as f64 / q as f64)
    } else {
        x as f64 / q as f64
    }
}

fn turns_big(x: &BigInt, q: &BigInt) -> f64 {
    let r = x.mod_floor(q);
    let folded = if &r * 2 > *q { r - q } else { r };
    BigRational::new(folded, q.clone()).to_f64().unwrap_or(0.0)
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// `A` and `v` reduced to machine words, for moduli below `2^64`.
struct SmallEngine {
    d: usize,
    m: u64,
    a: Vec<u64>,
    v: Vec<u64>,
}

impl SmallEngine {
    fn new(a: &IntMatrix, v: &ResidueVector, m: &PrimePowerModulus) -> Option<Self> {
        let q = m.modulus_u64()?;
        let a_red = a.reduce(m).entries().iter().map(|x| x.to_u64()).collect::<Option<Vec<_>>>()?;
        let v_red = v.reduce(m).entries().iter().map(|x| x.to_u64()).collect::<Option<Vec<_>>>()?;
        Some(SmallEngine { d: a.dim(), m: q, a: a_red, v: v_red })
    }

    fn step(&self, x: &mut [u64], tmp: &mut [u64]) {
        for i in 0..self.d {
            let mut acc = 0u64;
            for k in 0..self.d {
                acc = (acc + mulmod(self.a[i * self.d + k], x[k], self.m)) % self.m;
            }
            tmp[i] = acc;
        }
        x.copy_from_slice(tmp);
    }

    fn dot(&self, x: &[u64]) -> u64 {
        x.iter().zip(&self.v).fold(0u64, |acc, (&xi, &vi)| (acc + mulmod(xi, vi, self.m)) % self.m)
    }
}

fn to_words(u: &ResidueVector) -> Vec<u64> {
    u.entries().iter().map(|x| x.to_u64().expect("reduced below a word modulus")).collect()
}

/// Scalar residues `v A^n u0 mod q` for `n in start..start + len`, delivered in order.
fn for_each_value(
    cfg: &GeneratorConfig,
    engine: Option<&SmallEngine>,
    start: u64,
    len: u64,
    mut f: impl FnMut(Residue<'_>),
) {
    let state = cfg.state_at(start);
    match engine {
        Some(e) => {
            let mut x = to_words(&state.u);
            let mut tmp = vec![0u64; e.d];
            for k in 0..len {
                if k > 0 {
                    e.step(&mut x, &mut tmp);
                }
                f(Residue::Small(e.dot(&x), e.m));
            }
        }
        None => {
            let v = cfg.projection().expect("checked by caller");
            let m = cfg.modulus();
            let mut st = state;
            for k in 0..len {
                if k > 0 {
                    cfg.step(&mut st);
                }
                let x = m.reduce(&v.dot(&st.u).expect("dimensions checked"));
                f(Residue::Big(&x, m.modulus()));
            }
        }
    }
}

enum Residue<'a> {
    Small(u64, u64),
    Big(&'a BigInt, &'a BigInt),
}

impl Residue<'_> {
    fn turns(&self) -> f64 {
        match self {
            Residue::Small(x, q) => turns_u64(*x, *q),
            Residue::Big(x, q) => turns_big(x, q),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SumMethod {
    Direct,
    Histogram,
}

impl SumMethod {
    pub fn name(self) -> &'static str {
        match self {
            SumMethod::Direct => "direct",
            SumMethod::Histogram => "histogram",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SumReport {
    pub n: u64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    /// `|S| / N`.
    pub normalized: f64,
    /// `log N / (t log p)`.
    pub rho: f64,
    pub method: SumMethod,
    /// A priori bound on the accumulated rounding error of `S`.
    pub error_bound: f64,
}

fn report(n: u64, (re, im): (f64, f64), m: &PrimePowerModulus, method: SumMethod) -> SumReport {
    let abs = re.hypot(im);
    SumReport {
        n,
        re,
        im,
        abs,
        normalized: abs / n as f64,
        rho: (n as f64).ln() / (m.t() as f64 * (m.p() as f64).ln()),
        method,
        // Per term: one rounding of x/q, one of the angle and sin_cos itself.
        error_bound: 16.0 * f64::EPSILON * n as f64,
    }
}

fn chunks(n: u64) -> Vec<(u64, u64)> {
    (0..n.div_ceil(CHUNK)).map(|c| (c * CHUNK, CHUNK.min(n - c * CHUNK))).collect()
}

/// `S(N)` for the configured `(u0, v)`, by histogram when `p^t <= 2^24`.
pub fn exp_sum(cfg: &GeneratorConfig, n: u64) -> Result<SumReport> {
    let small = cfg.modulus().modulus_u64().is_some_and(|q| q <= HISTOGRAM_LIMIT);
    exp_sum_with(cfg, n, if small { SumMethod::Histogram } else { SumMethod::Direct })
}

pub fn exp_sum_with(cfg: &GeneratorConfig, n: u64, method: SumMethod) -> Result<SumReport> {
    let v = cfg.projection().ok_or(Error::MissingProjection)?;
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let m = cfg.modulus();
    let engine = SmallEngine::new(cfg.matrix(), v, m);
    let total = match method {
        SumMethod::Direct => {
            let partials: Vec<ComplexSum> = chunks(n)
                .into_par_iter()
                .map(|(start, len)| {
                    let mut acc = ComplexSum::default();
                    for_each_value(cfg, engine.as_ref(), start, len, |x| acc.add_turns(x.turns(), 1.0));
                    acc
                })
                .collect();
            let mut acc = ComplexSum::default();
            for part in &partials {
                acc.add_sum(part);
            }
            acc.value()
        }
        SumMethod::Histogram => {
            let q = m
                .modulus_u64()
                .filter(|&q| q <= HISTOGRAM_LIMIT)
                .ok_or_else(|| Error::InvalidArgument(format!("histogram method needs p^t <= {HISTOGRAM_LIMIT}")))?;
            let engine = engine.as_ref().expect("word-sized modulus");
            let values: Vec<Vec<u32>> = chunks(n)
                .into_par_iter()
                .map(|(start, len)| {
                    let mut out = Vec::with_capacity(len as usize);
                    for_each_value(cfg, Some(engine), start, len, |x| match x {
                        Residue::Small(x, _) => out.push(x as u32),
                        Residue::Big(..) => unreachable!("small engine"),
                    });
                    out
                })
                .collect();
            let mut counts = vec![0u64; q as usize];
            for x in values.iter().flatten() {
                counts[*x as usize] += 1;
            }
            histogram_sum(&counts, q)
        }
    };
    Ok(report(n, total, m, method))
}

/// `sum_x counts[x] e(x/q)` with the same ordered chunking.
fn histogram_sum(counts: &[u64], q: u64) -> (f64, f64) {
    let partials: Vec<ComplexSum> = chunks(q)
        .into_par_iter()
        .map(|(start, len)| {
            let mut acc = ComplexSum::default();
            for x in start..start + len {
                let c = counts[x as usize];
                if c > 0 {
                    acc.add_turns(turns_u64(x, q), c as f64);
                }
            }
            acc
        })
        .collect();
    let mut acc = ComplexSum::default();
    for part in &partials {
        acc.add_sum(part);
    }
    acc.value()
}

/// Divide `h` by `p^nu = gcd(h, p^t)`; `None` when `h = 0 (mod p^t)`.
///
/// `e(h.u / p^t) = e((h/p^nu).u / p^{t-nu})`, so the sum is taken at the smaller modulus.
pub fn reduce_frequency(h: &ResidueVector, m: &PrimePowerModulus) -> Option<(ResidueVector, PrimePowerModulus)> {
    let reduced = h.reduce(m);
    if reduced.is_zero() {
        return None;
    }
    let p = BigInt::from(m.p());
    let mut entries = reduced.0;
    let mut t = m.t();
    while entries.iter().all(|x| (x % &p).is_zero()) {
        for x in entries.iter_mut() {
            *x /= &p;
        }
        t -= 1;
    }
    Some((ResidueVector(entries), m.with_exponent(t).expect("t >= 1 while h is nonzero")))
}

/// `S_{p^t}(N; u0, h)` after the gcd reduction of `h`.
pub fn frequency_sum(cfg: &GeneratorConfig, h: &ResidueVector, n: u64) -> Result<SumReport> {
    match reduce_frequency(h, cfg.modulus()) {
        None => Ok(report(n, (n as f64, 0.0), cfg.modulus(), SumMethod::Direct)),
        Some((h, m)) => {
            let sub = GeneratorConfig::new(cfg.matrix().clone(), m, cfg.start().clone(), Some(h))?;
            let mut r = exp_sum(&sub, n)?;
            r.rho = (n as f64).ln() / (cfg.modulus().t() as f64 * (cfg.modulus().p() as f64).ln());
            Ok(r)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FullPeriodRow {
    pub t: u32,
    pub tau: u64,
    pub abs: f64,
    /// `log |S(tau_t)| / log tau_t`.
    pub theta: f64,
    /// `1 - 1/d`.
    pub reference: f64,
}

/// Measured exponents of the full-period sums for each `t` in `ts`.
pub fn full_period_exponent(cfg: &GeneratorConfig, ts: impl IntoIterator<Item = u32>) -> Result<Vec<FullPeriodRow>> {
    let v = cfg.projection().ok_or(Error::MissingProjection)?;
    let p = cfg.modulus().p();
    let d = cfg.dim();
    let mut rows = Vec::new();
    for t in ts {
        let m = PrimePowerModulus::new(p, t)?;
        let tau = order_mod(cfg.matrix(), &m, DEFAULT_ORDER_CAP)?;
        if tau > PERIOD_LIMIT {
            return Err(Error::PeriodTooLarge { period: tau, limit: PERIOD_LIMIT });
        }
        let sub = GeneratorConfig::new(cfg.matrix().clone(), m, cfg.start().clone(), Some(v.clone()))?;
        let s = exp_sum(&sub, tau)?;
        rows.push(FullPeriodRow {
            t,
            tau,
            abs: s.abs,
            theta: s.abs.ln() / (tau as f64).ln(),
            reference: 1.0 - 1.0 / d as f64,
        });
    }
    Ok(rows)
}

/// `sum_{x,y=1}^{p^s} e(g(xy) / D)` with `g(k) = sum_j coeffs[j] p^{sj} k^j`.
pub fn double_sum_sigma(coeffs: &[BigInt], p: u64, s: u32, denominator: &BigInt) -> Result<(f64, f64)> {
    if denominator.is_zero() {
        return Err(Error::InvalidArgument("zero denominator".into()));
    }
    let side = prime_power(p, s);
    let size = side.to_u128().map(|x| x * x);
    match size {
        Some(g) if g <= GRID_LIMIT => {}
        _ => {
            return Err(Error::GridTooLarge { size: size.unwrap_or(u128::MAX), limit: GRID_LIMIT });
        }
    }
    let side = side.to_u64().expect("grid guard");
    let q = denominator.abs();
    let ps = prime_power(p, s);
    let mut pw = BigInt::from(1);
    // Coefficients of g reduced modulo |D|.
    let mut c = Vec::with_capacity(coeffs.len());
    for h in coeffs {
        c.push((h * &pw).mod_floor(&q));
        pw *= &ps;
    }
    let flip = denominator.is_negative();
    let small: Option<(u64, Vec<u64>)> = q.to_u64().zip(c.iter().map(|x| x.to_u64()).collect::<Option<Vec<_>>>());
    let rows: Vec<ComplexSum> = (1..=side)
        .into_par_iter()
        .map(|x| {
            let mut acc = ComplexSum::default();
            for y in 1..=side {
                let frac = match &small {
                    Some((qq, cc)) => {
                        let k = (x as u128 * y as u128 % *qq as u128) as u64;
                        let g = cc.iter().rev().fold(0u64, |acc, &cj| (mulmod(acc, k, *qq) + cj) % *qq);
                        turns_u64(g, *qq)
                    }
                    None => {
                        let k = BigInt::from(x) * BigInt::from(y);
                        let g = c.iter().rev().fold(BigInt::zero(), |acc, cj| (acc * &k + cj).mod_floor(&q));
                        turns_big(&g, &q)
                    }
                };
                acc.add_turns(if flip { -frac } else { frac }, 1.0);
            }
            acc
        })
        .collect();
    let mut acc = ComplexSum::default();
    for r in &rows {
        acc.add_sum(r);
    }
    Ok(acc.value())
}

#[derive(Clone, Debug, Serialize)]
pub struct SigmaReport {
    pub n: u64,
    pub s: u32,
    pub r: usize,
    pub tau_s: u64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

/// `sigma_n` for the configured generator, built from `H_{n,0..=r}` with `r = floor(t/s)`.
pub fn sigma_n(cfg: &GeneratorConfig, n: u64, s: u32) -> Result<SigmaReport> {
    let v = cfg.projection().ok_or(Error::MissingProjection)?;
    let m = cfg.modulus();
    if s == 0 {
        return Err(Error::InsufficientPrecision);
    }
    let r = (m.t() / s) as usize;
    let tau_s = order_mod(cfg.matrix(), &m.with_exponent(s)?, DEFAULT_ORDER_CAP)?;
    let b = theta_matrix(cfg.matrix(), m.p(), s, tau_s)?;
    let h = h_coeffs(cfg.matrix(), cfg.start(), v, &b, n, r)?;
    let big_h = H_coeffs(&h, r, s, m.p())?;
    let denominator = m.modulus() * factorial(r as u64) * det_exact(cfg.matrix());
    let (re, im) = double_sum_sigma(&big_h, m.p(), s, &denominator)?;
    Ok(SigmaReport { n, s, r, tau_s, re, im, abs: re.hypot(im) })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ReductionCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`, nonnegative by the single-to-double reduction inequality.
    pub residual: f64,
}

/// Both sides of `|sum_{x<N} e(f(x))| <= M^{-2} sum_{x<N} |sum_{y,z<=M} e(f(x+ayz))| + 2aM^2`.
///
/// `f` returns phases in turns.
pub fn reduction_residual<F>(f: F, n: u64, m: u64, a: u64) -> ReductionCheck
where
    F: Fn(u64) -> f64 + Sync,
{
    let mut lhs = ComplexSum::default();
    for x in 0..n {
        lhs.add_turns(f(x), 1.0);
    }
    let (re, im) = lhs.value();
    let inner: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut acc = ComplexSum::default();
            for y in 1..=m {
                for z in 1..=m {
                    acc.add_turns(f(x + a * y * z), 1.0);
                }
            }
            let (r, i) = acc.value();
            r.hypot(i)
        })
        .collect();
    let mut total = Compensated::default();
    for v in inner {
        total.add(v);
    }
    let m2 = (m * m) as f64;
    let rhs = total.value() / m2 + 2.0 * a as f64 * m2;
    let lhs = re.hypot(im);
    ReductionCheck { lhs, rhs, residual: rhs - lhs }
}

/// [`reduction_residual`] for `f(x) = u_x / p^t` of the configured generator.
pub fn korobov_reduction_check(cfg: &GeneratorConfig, n: u64, m: u64, a: u64) -> Result<ReductionCheck> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("N and M must be at least 1".into()));
    }
    let len = a
        .checked_mul(m * m)
        .and_then(|x| x.checked_add(n))
        .filter(|&l| l <= REDUCTION_LIMIT)
        .ok_or(Error::EnumerationTooLarge { size: u128::MAX, limit: REDUCTION_LIMIT as u128 })?;
    let v = cfg.projection().ok_or(Error::MissingProjection)?;
    let engine = SmallEngine::new(cfg.matrix(), v, cfg.modulus());
    let mut phases = Vec::with_capacity(len as usize);
    for_each_value(cfg, engine.as_ref(), 0, len, |x| phases.push(x.turns()));
    Ok(reduction_residual(|x| phases[x as usize], n, m, a))
}

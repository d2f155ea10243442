//! The generator stream `u_{n+1} = A u_n (mod p^t)` and its scalar projections.
//!
//! State is explicit and caller-driven: [`GeneratorState`] always holds
//! `u_n = A^n u_0 mod p^t` together with `n`.

use std::io::{self, Read, Write};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::arith::{det_exact, mat_pow_mod, IntMatrix, PrimePowerModulus, ResidueVector};
use crate::error::{Error, Result};
use crate::fieldalg::{validate_theorem_hypotheses, ValidationLevel, Verdict};

/// Magic bytes opening a binary stream dump.
pub const STREAM_MAGIC: &[u8; 4] = b"MCG1";

#[derive(Clone, Debug)]
pub struct GeneratorConfig {
    a: IntMatrix,
    m: PrimePowerModulus,
    u0: ResidueVector,
    v: Option<ResidueVector>,
    verdict: Option<Verdict>,
}

impl GeneratorConfig {
    /// Reduces `A`, `u0` and `v` modulo `p^t`; requires `p ∤ det A`.
    pub fn new(a: IntMatrix, m: PrimePowerModulus, u0: ResidueVector, v: Option<ResidueVector>) -> Result<Self> {
        let d = a.dim();
        for len in std::iter::once(u0.len()).chain(v.as_ref().map(ResidueVector::len)) {
            if len != d {
                return Err(Error::DimensionMismatch { expected: d, found: len });
            }
        }
        if det_exact(&a).mod_floor(&BigInt::from(m.p())).is_zero() {
            return Err(Error::NotInvertible { p: m.p() });
        }
        Ok(GeneratorConfig { a: a.reduce(&m), u0: u0.reduce(&m), v: v.map(|v| v.reduce(&m)), m, verdict: None })
    }

    /// Run the hypothesis validator and keep its verdict. Thm1 needs `v`.
    pub fn validate(&mut self, level: ValidationLevel) -> Result<&Verdict> {
        let v = match (&self.v, level) {
            (Some(v), _) => v.clone(),
            (None, ValidationLevel::Thm2) => ResidueVector::zero(self.dim()),
            (None, ValidationLevel::Thm1) => return Err(Error::MissingProjection),
        };
        self.verdict = Some(validate_theorem_hypotheses(&self.a, &self.u0, &v, &self.m, level));
        Ok(self.verdict.as_ref().expect("just set"))
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.a
    }

    pub fn modulus(&self) -> &PrimePowerModulus {
        &self.m
    }

    pub fn start(&self) -> &ResidueVector {
        &self.u0
    }

    pub fn projection(&self) -> Option<&ResidueVector> {
        self.v.as_ref()
    }

    pub fn verdict(&self) -> Option<&Verdict> {
        self.verdict.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn state(&self) -> GeneratorState {
        GeneratorState { n: 0, u: self.u0.clone() }
    }

    /// `u_n = A^n u_0 mod p^t` by one matrix power.
    pub fn state_at(&self, n: u64) -> GeneratorState {
        let u = mat_pow_mod(&self.a, n, &self.m).mul_vec(&self.u0).expect("dimensions checked").reduce(&self.m);
        GeneratorState { n, u }
    }

    /// Advance by one index.
    pub fn step(&self, state: &mut GeneratorState) -> ResidueVector {
        state.u = self.a.mul_vec(&state.u).expect("dimensions checked").reduce(&self.m);
        state.n += 1;
        state.u.clone()
    }

    /// Advance by `k` indices with a single matrix power.
    pub fn jump_ahead(&self, state: &GeneratorState, k: u64) -> GeneratorState {
        let u = mat_pow_mod(&self.a, k, &self.m).mul_vec(&state.u).expect("dimensions checked").reduce(&self.m);
        GeneratorState { n: state.n + k, u }
    }

    /// `v A^n u_0 mod p^t` for `n = n0..n0 + count`.
    pub fn scalar_sequence(&self, n0: u64, count: usize) -> Result<Vec<BigInt>> {
        let v = self.v.as_ref().ok_or(Error::MissingProjection)?;
        let mut state = self.state_at(n0);
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            if k > 0 {
                self.step(&mut state);
            }
            out.push(self.m.reduce(&v.dot(&state.u)?));
        }
        Ok(out)
    }

    /// The vectors `u_{n0}, ..., u_{n0 + count - 1}`.
    pub fn vectors(&self, n0: u64, count: usize) -> Vec<ResidueVector> {
        let mut state = self.state_at(n0);
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            if k > 0 {
                self.step(&mut state);
            }
            out.push(state.u.clone());
        }
        out
    }

    /// The points `u_n / p^t` for `n = 0..N`.
    pub fn fractional_points(&self, count: usize) -> Result<PointSet> {
        if count == 0 {
            return Err(Error::InvalidArgument("need at least one point".into()));
        }
        Ok(PointSet::new(self.m.modulus().clone(), self.vectors(0, count)))
    }
}

/// `u_n` reduced modulo `p^t` with its index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorState {
    pub n: u64,
    pub u: ResidueVector,
}

/// Points of `[0,1)^d` held as exact numerators over a shared denominator.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    pub denominator: BigInt,
    pub numerators: Vec<ResidueVector>,
}

impl PointSet {
    pub fn new(denominator: BigInt, numerators: Vec<ResidueVector>) -> Self {
        PointSet { denominator, numerators }
    }

    pub fn len(&self) -> usize {
        self.numerators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.numerators.first().map_or(0, ResidueVector::len)
    }

    /// Coordinates rounded to the nearest double (relative error below `2^-52`).
    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.numerators
            .iter()
            .map(|u| {
                u.entries()
                    .iter()
                    .map(|x| BigRational::new(x.clone(), self.denominator.clone()).to_f64().unwrap_or(f64::NAN))
                    .collect()
            })
            .collect()
    }

    /// Numerators and denominator as `u64`, if they fit.
    pub fn to_u64(&self) -> Option<(u64, Vec<Vec<u64>>)> {
        let den = self.denominator.to_u64()?;
        let pts = self
            .numerators
            .iter()
            .map(|u| u.entries().iter().map(ToPrimitive::to_u64).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()?;
        Some((den, pts))
    }
}

/// Write vectors as `MCG1`, `d: u32`, `count: u64`, then `count * d` records
/// of `len: u32` followed by `len` little-endian magnitude bytes. All integers
/// little-endian; values are nonnegative.
pub fn write_stream<W: Write>(out: &mut W, d: usize, vectors: &[ResidueVector]) -> io::Result<()> {
    out.write_all(STREAM_MAGIC)?;
    out.write_all(&(d as u32).to_le_bytes())?;
    out.write_all(&(vectors.len() as u64).to_le_bytes())?;
    for u in vectors {
        assert_eq!(u.len(), d, "vector length must match the header");
        for x in u.entries() {
            let (sign, bytes) = x.to_bytes_le();
            assert!(sign != Sign::Minus, "stream values are residues");
            let bytes = if x.is_zero() { Vec::new() } else { bytes };
            out.write_all(&(bytes.len() as u32).to_le_bytes())?;
            out.write_all(&bytes)?;
        }
    }
    Ok(())
}

/// Read a stream written by [`write_stream`].
pub fn read_stream<R: Read>(input: &mut R) -> io::Result<(usize, Vec<ResidueVector>)> {
    let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != STREAM_MAGIC {
        return Err(bad("bad magic"));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    input.read_exact(&mut b4)?;
    let d = u32::from_le_bytes(b4) as usize;
    input.read_exact(&mut b8)?;
    let count = u64::from_le_bytes(b8);
    let mut out = Vec::new();
    for _ in 0..count {
        let mut u = Vec::with_capacity(d);
        for _ in 0..d {
            input.read_exact(&mut b4)?;
            let mut bytes = vec![0u8; u32::from_le_bytes(b4) as usize];
            input.read_exact(&mut bytes)?;
            u.push(BigInt::from_bytes_le(Sign::Plus, &bytes));
        }
        out.push(ResidueVector(u));
    }
    Ok((d, out))
}

//! Arbitrary-precision reals for bound evaluation.
//!
//! Values carry 256 bits of mantissa and serialize as decimal strings rounded
//! to [`SIGNIFICANT_DIGITS`] significant digits.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use serde::{Serialize, Serializer};

const PRECISION: usize = 256;
// Correctly rounded modes can loop forever on exact results (4^0.5); the
// working precision leaves ample guard digits over the emitted ones.
const RM: RoundingMode = RoundingMode::None;
pub const SIGNIFICANT_DIGITS: usize = 30;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

#[derive(Clone, Debug)]
pub struct BigReal(BigFloat);

impl BigReal {
    pub fn from_u64(x: u64) -> Self {
        BigReal(BigFloat::from_u64(x, PRECISION))
    }

    pub fn from_i64(x: i64) -> Self {
        BigReal(BigFloat::from_i64(x, PRECISION))
    }

    /// Exact conversion of a double.
    pub fn from_f64(x: f64) -> Self {
        BigReal(BigFloat::from_f64(x, PRECISION))
    }

    pub fn from_bigint(x: &BigInt) -> Self {
        let s = x.to_string();
        BigReal(with_consts(|cc| BigFloat::parse(&s, Radix::Dec, PRECISION, RM, cc)))
    }

    pub fn ratio(num: u64, den: u64) -> Self {
        BigReal::from_u64(num).div(&BigReal::from_u64(den))
    }

    pub fn add(&self, o: &Self) -> Self {
        BigReal(self.0.add(&o.0, PRECISION, RM))
    }

    pub fn sub(&self, o: &Self) -> Self {
        BigReal(self.0.sub(&o.0, PRECISION, RM))
    }

    pub fn mul(&self, o: &Self) -> Self {
        BigReal(self.0.mul(&o.0, PRECISION, RM))
    }

    pub fn div(&self, o: &Self) -> Self {
        BigReal(self.0.div(&o.0, PRECISION, RM))
    }

    pub fn neg(&self) -> Self {
        BigReal(self.0.neg())
    }

    pub fn ln(&self) -> Self {
        BigReal(with_consts(|cc| self.0.ln(PRECISION, RM, cc)))
    }

    pub fn exp(&self) -> Self {
        BigReal(with_consts(|cc| self.0.exp(PRECISION, RM, cc)))
    }

    pub fn sqrt(&self) -> Self {
        BigReal(self.0.sqrt(PRECISION, RM))
    }

    pub fn pow(&self, e: &Self) -> Self {
        BigReal(with_consts(|cc| self.0.pow(&e.0, PRECISION, RM, cc)))
    }

    pub fn powi(&self, e: usize) -> Self {
        BigReal(self.0.powi(e, PRECISION, RM))
    }

    pub fn min(&self, o: &Self) -> Self {
        if self <= o {
            self.clone()
        } else {
            o.clone()
        }
    }

    pub fn max(&self, o: &Self) -> Self {
        if self >= o {
            self.clone()
        } else {
            o.clone()
        }
    }

    pub fn floor(&self) -> Self {
        BigReal(self.0.floor())
    }

    pub fn is_finite(&self) -> bool {
        !self.0.is_inf() && !self.0.is_nan()
    }

    /// Nearest double; `inf` outside the double range.
    pub fn to_f64(&self) -> f64 {
        self.to_decimal_string().parse().unwrap_or(f64::NAN)
    }

    /// Decimal mantissa/exponent form `d.ddd…e±X` with 30 significant digits
    /// (round half up on the full expansion). Special values render as
    /// `0`, `inf`, `-inf` and `nan`.
    pub fn to_decimal_string(&self) -> String {
        if self.0.is_nan() {
            return "nan".into();
        }
        if self.0.is_inf() {
            return if self.0.is_negative() { "-inf".into() } else { "inf".into() };
        }
        if self.0.is_zero() {
            return "0".into();
        }
        let raw = with_consts(|cc| self.0.format(Radix::Dec, RM, cc)).expect("finite value formats");
        round_scientific(&raw, SIGNIFICANT_DIGITS)
    }
}

/// Round a `[-]d.ddd…e±X` string to `digits` significant digits.
fn round_scientific(raw: &str, digits: usize) -> String {
    let (neg, body) = match raw.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, raw),
    };
    let (mant, exp) = body.split_once('e').unwrap_or((body, "0"));
    let mut exp: i64 = exp.parse().expect("decimal exponent");
    let mut ds: Vec<u8> = mant.bytes().filter(u8::is_ascii_digit).map(|b| b - b'0').collect();
    // Normalize a leading zero mantissa such as 0.0012.
    let lead = ds.iter().position(|&x| x != 0).unwrap_or(0);
    if mant.starts_with('0') {
        exp -= lead as i64;
    }
    ds.drain(..lead);
    let round_up = ds.get(digits).is_some_and(|&x| x >= 5);
    ds.truncate(digits);
    ds.resize(digits, 0);
    if round_up {
        let mut i = digits;
        loop {
            if i == 0 {
                ds.insert(0, 1);
                ds.truncate(digits);
                exp += 1;
                break;
            }
            i -= 1;
            if ds[i] == 9 {
                ds[i] = 0;
            } else {
                ds[i] += 1;
                break;
            }
        }
    }
    let digits_str: String = ds.iter().map(|d| char::from(b'0' + d)).collect();
    format!(
        "{}{}.{}e{}{}",
        if neg { "-" } else { "" },
        &digits_str[..1],
        &digits_str[1..],
        if exp < 0 { "-" } else { "+" },
        exp.abs()
    )
}

impl PartialEq for BigReal {
    fn eq(&self, o: &Self) -> bool {
        self.partial_cmp(o) == Some(Ordering::Equal)
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        self.0.cmp(&o.0).map(|c| c.cmp(&0))
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

impl Serialize for BigReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_decimal_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(BigReal::from_u64(30).to_decimal_string(), "3.00000000000000000000000000000e+1");
        assert_eq!(BigReal::from_u64(0).to_string(), "0");
        assert_eq!(BigReal::from_i64(-5).to_string(), "-5.00000000000000000000000000000e+0");
        assert_eq!(BigReal::ratio(1, 3).to_string(), "3.33333333333333333333333333333e-1");
        assert_eq!(BigReal::ratio(2, 3).to_string(), "6.66666666666666666666666666667e-1");
        assert_eq!(BigReal::from_u64(30).ln().to_string(), "3.40119738166215537541323669161e+0");
        assert_eq!(round_scientific("9.9999999e+3", 3), "1.00e+4");
        assert_eq!(round_scientific("1.25e-2", 2), "1.3e-2");
    }

    #[test]
    fn arithmetic() {
        let four = BigReal::from_u64(4);
        let e = BigReal::from_f64(0.5);
        assert_eq!(four.pow(&e).to_f64(), 2.0);
        assert_eq!(four.sqrt(), BigReal::from_u64(2));
        assert!(BigReal::from_u64(3) > BigReal::from_u64(2));
        assert_eq!(BigReal::from_f64(2.75).floor(), BigReal::from_u64(2));
        let big = BigReal::from_bigint(&(BigInt::from(10).pow(40) + 1));
        assert_eq!(big.to_string(), "1.00000000000000000000000000000e+40");
        assert!((BigReal::from_u64(1).exp().to_f64() - std::f64::consts::E).abs() < 1e-15);
    }
}

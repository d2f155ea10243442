//! The experiment configuration: one JSON document, integers as decimal
//! strings or plain numbers.

use std::path::PathBuf;

use mcg_core::arith::{IntMatrix, PrimePowerModulus, ResidueVector};
use mcg_core::fieldalg::ValidationLevel;
use mcg_core::generator::GeneratorConfig;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Deserialize;

use crate::CliError;

/// An integer written either as a JSON number or as a decimal string.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Int {
    Signed(i64),
    Unsigned(u64),
    Text(String),
}

impl Int {
    pub fn big(&self, field: &str) -> Result<BigInt, CliError> {
        match self {
            Int::Signed(x) => Ok(BigInt::from(*x)),
            Int::Unsigned(x) => Ok(BigInt::from(*x)),
            Int::Text(s) => s.trim().parse().map_err(|_| CliError::input(format!("{field}: `{s}` is not an integer"))),
        }
    }

    pub fn u64(&self, field: &str) -> Result<u64, CliError> {
        self.big(field)?.to_u64().ok_or_else(|| CliError::input(format!("{field}: expected a value in 0..2^64")))
    }

    pub fn u32(&self, field: &str) -> Result<u32, CliError> {
        self.big(field)?.to_u32().ok_or_else(|| CliError::input(format!("{field}: expected a value in 0..2^32")))
    }
}

/// `N = base^e` for `e = from..=to`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSchedule {
    pub base: Int,
    pub from: u32,
    pub to: u32,
}

/// Instances `(k, r, M)` over the Cartesian product of the three lists.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VmvtGrid {
    pub k: Vec<u32>,
    pub r: Vec<u32>,
    pub m: Vec<u64>,
}

/// Overlay knobs for the unquantified constants.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Constants {
    pub eta: f64,
    pub c: f64,
    pub eta0: f64,
    pub c_disc: f64,
    /// The constant in `r >= c0 d`.
    pub c0: f64,
    pub d_power: u32,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            eta: 1.0,
            c: 1.0,
            eta0: 1.0,
            c_disc: 1.0,
            c0: mcg_core::analysis::DEFAULT_C0,
            d_power: mcg_core::analysis::DEFAULT_D_POWER,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub p: Option<Int>,
    pub t: Option<Int>,
    pub matrix: Option<Vec<Vec<Int>>>,
    pub u0: Option<Vec<Int>>,
    pub v: Option<Vec<Int>>,
    pub level: Option<ValidationLevel>,
    /// Skip the hypothesis gate that analysis commands apply by default.
    #[serde(default)]
    pub skip_validation: bool,
    pub n: Option<Vec<Int>>,
    pub n_powers: Option<PowerSchedule>,
    /// Frequency cut-offs `V` for the Koksma–Szüsz bound.
    pub ks_v: Option<Vec<u32>>,
    pub s_max: Option<u32>,
    pub order_cap: Option<u64>,
    /// Exponents `t` swept by `report`.
    pub ts: Option<Vec<u32>>,
    /// First index and length of the `gen` stream.
    pub start: Option<u64>,
    pub count: Option<u64>,
    pub vmvt: Option<VmvtGrid>,
    /// Dimension used in Ford's bound when no matrix is given.
    pub ford_d: Option<u32>,
    /// Number of seeded spot checks in `report`.
    pub checks: Option<usize>,
    #[serde(default)]
    pub constants: Constants,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::input(format!("malformed config: {e}")))
    }

    pub fn modulus(&self) -> Result<PrimePowerModulus, CliError> {
        let p = self.p.as_ref().ok_or_else(|| CliError::input("missing field `p`"))?.u64("p")?;
        let t = self.t.as_ref().ok_or_else(|| CliError::input("missing field `t`"))?.u32("t")?;
        PrimePowerModulus::new(p, t).map_err(CliError::from)
    }

    pub fn matrix(&self) -> Result<IntMatrix, CliError> {
        let rows = self.matrix.as_ref().ok_or_else(|| CliError::input("missing field `matrix`"))?;
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|x| x.big("matrix")).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        IntMatrix::from_rows(rows).map_err(CliError::from)
    }

    fn vector(xs: &[Int], field: &str) -> Result<ResidueVector, CliError> {
        Ok(ResidueVector(xs.iter().map(|x| x.big(field)).collect::<Result<_, _>>()?))
    }

    /// The validation level, defaulting to thm1 when `v` is present and thm2 otherwise.
    pub fn level(&self) -> ValidationLevel {
        self.level.unwrap_or(if self.v.is_some() { ValidationLevel::Thm1 } else { ValidationLevel::Thm2 })
    }

    /// `u0` and the optional projection `v`.
    pub fn vectors(&self) -> Result<(ResidueVector, Option<ResidueVector>), CliError> {
        let u0 = self.u0.as_deref().ok_or_else(|| CliError::input("missing field `u0`"))?;
        let v = self.v.as_deref().map(|xs| Self::vector(xs, "v")).transpose()?;
        Ok((Self::vector(u0, "u0")?, v))
    }

    pub fn generator(&self) -> Result<GeneratorConfig, CliError> {
        let (u0, v) = self.vectors()?;
        GeneratorConfig::new(self.matrix()?, self.modulus()?, u0, v).map_err(CliError::from)
    }

    /// The `N` schedule: explicit list first, then the power schedule.
    pub fn schedule(&self) -> Result<Vec<BigInt>, CliError> {
        let mut out = Vec::new();
        if let Some(ns) = &self.n {
            for x in ns {
                out.push(x.big("n")?);
            }
        }
        if let Some(sched) = &self.n_powers {
            let base = sched.base.big("n_powers.base")?;
            if sched.from > sched.to {
                return Err(CliError::input("n_powers: `from` exceeds `to`"));
            }
            for e in sched.from..=sched.to {
                out.push(num_traits::pow(base.clone(), e as usize));
            }
        }
        if out.is_empty() {
            return Err(CliError::input("missing `n` or `n_powers`"));
        }
        if out.iter().any(|n| n < &BigInt::from(1)) {
            return Err(CliError::input("every N must be at least 1"));
        }
        Ok(out)
    }

    pub fn order_cap(&self) -> u64 {
        self.order_cap.unwrap_or(mcg_core::padic::DEFAULT_ORDER_CAP)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integers_as_strings_or_numbers() {
        let cfg = ExperimentConfig::parse(
            r#"{"p": "3", "t": 4, "matrix": [["0", 1], [1, "1"]], "u0": [1, 0],
                "n": ["123456789012345678901234567890", 5]}"#,
        )
        .unwrap();
        assert_eq!(cfg.modulus().unwrap().modulus(), &BigInt::from(81));
        assert_eq!(cfg.schedule().unwrap()[0].to_string(), "123456789012345678901234567890");
        assert_eq!(cfg.level(), ValidationLevel::Thm2);
        assert!(cfg.generator().is_ok());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::parse(r#"{"p": 3, "t": "#).is_err());
        assert!(ExperimentConfig::parse(r#"{"p": 3, "bogus": 1}"#).is_err());
        let cfg = ExperimentConfig::parse(r#"{"p": "x3", "t": 2}"#).unwrap();
        assert!(cfg.modulus().is_err());
        let cfg = ExperimentConfig::parse(r#"{"n_powers": {"base": 3, "from": 4, "to": 10}}"#).unwrap();
        let ns = cfg.schedule().unwrap();
        assert_eq!(ns.len(), 7);
        assert_eq!(ns[6], BigInt::from(59049));
    }
}

//! One function per subcommand. Each returns a table plus a JSON document;
//! `main` picks the serialization.

use mcg_core::analysis::{
    discrepancy_envelope, exact_discrepancy, exp_sum, ford_bound, full_period_exponent, koksma_szusz_bound,
    proof_parameters, sigma_bound, sigma_n, theorem_envelope, vinogradov_count,
};
use mcg_core::arith::{char_poly, det_exact, factorial, prime_power, PrimePowerModulus, ResidueVector};
use mcg_core::fieldalg::{validate_theorem_hypotheses, ValidationLevel};
use mcg_core::generator::{write_stream, GeneratorConfig};
use mcg_core::padic::{
    binomial_expansion_value, compute_w, h_coeffs, monomial_expansion_value, order_mod, period_profile, theta_matrix,
    H_coeffs, WindowData,
};
use mcg_core::Error;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::output::{float, opt, Table};
use crate::CliError;

/// Longest stream `gen` will emit.
pub const GEN_LIMIT: u64 = 10_000_000;
/// Largest `p^{2s}` grid for which `bounds` measures `sigma_0` directly.
pub const SIGMA_GRID_LIMIT: u64 = 1 << 22;

pub struct Report {
    pub table: Table,
    pub json: Value,
    /// Set when a hypothesis check rejected the configuration.
    pub rejected: bool,
}

impl Report {
    fn ok(table: Table, json: Value) -> Self {
        Report { table, json, rejected: false }
    }
}

/// Build the generator and, unless disabled, require the configured hypotheses.
fn gated(cfg: &ExperimentConfig) -> Result<GeneratorConfig, CliError> {
    let mut gen = cfg.generator()?;
    if !cfg.skip_validation {
        let verdict = gen.validate(cfg.level())?;
        if !verdict.is_accepted() {
            return Err(CliError::Rejected(serde_json::to_value(verdict).expect("verdict serializes")));
        }
    }
    Ok(gen)
}

fn window(f: &mcg_core::arith::IntPolynomial, p: u64) -> Result<Option<WindowData>, CliError> {
    match compute_w(f, p) {
        Ok(w) => Ok(Some(w)),
        Err(Error::NotIrreducible { .. }) | Err(Error::NonSquarefree { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn u64s(ns: &[BigInt]) -> Result<Vec<u64>, CliError> {
    ns.iter().map(|n| n.to_u64().ok_or_else(|| CliError::input(format!("N = {n} exceeds 2^64")))).collect()
}

pub fn validate(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let a = cfg.matrix()?;
    let m = cfg.modulus()?;
    let level = cfg.level();
    let (u0, v) = cfg.vectors()?;
    let v = match (v, level) {
        (Some(v), _) => v,
        (None, ValidationLevel::Thm2) => u0.clone(),
        (None, ValidationLevel::Thm1) => return Err(CliError::input("thm1 validation needs `v`")),
    };
    let verdict = validate_theorem_hypotheses(&a, &u0, &v, &m, level);
    let mut table = Table::new(&["level", "outcome", "reason"]);
    let level_name = serde_json::to_value(level).expect("level serializes");
    let level_name = level_name.as_str().expect("string").to_string();
    let outcome = if verdict.is_accepted() { "accepted" } else { "rejected" };
    table.push(vec![level_name.clone(), outcome.into(), verdict.reason.code().into()]);
    let json = json!({
        "level": level_name,
        "outcome": outcome,
        "reason": verdict.reason.code(),
        "witness": verdict.witness,
    });
    Ok(Report { table, json, rejected: !verdict.is_accepted() })
}

pub fn period(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let a = cfg.matrix()?;
    let p = cfg.p.as_ref().ok_or_else(|| CliError::input("missing field `p`"))?.u64("p")?;
    PrimePowerModulus::new(p, 1)?;
    let s_max = cfg.s_max.unwrap_or(5);
    let profile = period_profile(&a, p, s_max, cfg.order_cap())?;
    let w = window(&char_poly(&a), p)?;
    let mut table = Table::new(&["s", "tau_s"]);
    for (i, tau) in profile.taus.iter().enumerate() {
        table.push(vec![(i + 1).to_string(), tau.to_string()]);
    }
    let json = json!({
        "p": p,
        "s_max": s_max,
        "taus": profile.taus,
        "tau_star": profile.tau_star,
        "beta_star": profile.beta_star,
        "s_star": profile.s_star,
        "w": w.as_ref().map(|w| w.w),
        "pairs": w.as_ref().map(|w| &w.pairs),
    });
    Ok(Report::ok(table, json))
}

/// Rows `n, u_0..u_{d-1}` of the stream and the generator behind it.
pub fn gen_vectors(cfg: &ExperimentConfig) -> Result<(GeneratorConfig, u64, Vec<ResidueVector>), CliError> {
    let gen = gated(cfg)?;
    let start = cfg.start.unwrap_or(0);
    let count = cfg.count.unwrap_or(16);
    if count > GEN_LIMIT {
        return Err(Error::EnumerationTooLarge { size: count as u128, limit: GEN_LIMIT as u128 }.into());
    }
    let vectors = gen.vectors(start, count as usize);
    Ok((gen, start, vectors))
}

pub fn gen(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let (gen, start, vectors) = gen_vectors(cfg)?;
    let d = gen.dim();
    let names: Vec<String> = std::iter::once("n".to_string()).chain((0..d).map(|i| format!("u{i}"))).collect();
    let mut table = Table::new(&names);
    let mut rows = Vec::with_capacity(vectors.len());
    for (k, u) in vectors.iter().enumerate() {
        let n = start + k as u64;
        let entries: Vec<String> = u.entries().iter().map(|x| x.to_string()).collect();
        table.push(std::iter::once(n.to_string()).chain(entries.iter().cloned()).collect());
        rows.push(json!({ "n": n, "u": entries }));
    }
    let m = gen.modulus();
    let json = json!({ "p": m.p(), "t": m.t(), "modulus": m.modulus().to_string(), "rows": rows });
    Ok(Report::ok(table, json))
}

pub fn gen_binary(cfg: &ExperimentConfig) -> Result<Vec<u8>, CliError> {
    let (gen, _, vectors) = gen_vectors(cfg)?;
    let mut out = Vec::new();
    write_stream(&mut out, gen.dim(), &vectors).map_err(CliError::io)?;
    Ok(out)
}

pub fn expsum(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let gen = gated(cfg)?;
    let ns = cfg.schedule()?;
    let m = gen.modulus().clone();
    let d = gen.dim() as u32;
    let k = &cfg.constants;
    let mut table = Table::new(&["n", "rho", "re", "im", "abs", "normalized", "method", "error_bound", "envelope"]);
    for (n, big) in u64s(&ns)?.into_iter().zip(&ns) {
        let r = exp_sum(&gen, n)?;
        let envelope = if d >= 2 {
            theorem_envelope(big, m.p(), m.t(), d, k.eta, k.c, k.d_power)?.to_decimal_string()
        } else {
            String::new()
        };
        table.push(vec![
            n.to_string(),
            float(r.rho),
            float(r.re),
            float(r.im),
            float(r.abs),
            float(r.normalized),
            r.method.name().into(),
            float(r.error_bound),
            envelope,
        ]);
    }
    let json = json!({ "constants": constants_json(cfg), "rows": table.to_json() });
    Ok(Report::ok(table, json))
}

fn constants_json(cfg: &ExperimentConfig) -> Value {
    let k = &cfg.constants;
    json!({ "eta": k.eta, "c": k.c, "eta0": k.eta0, "c_disc": k.c_disc, "c0": k.c0, "d_power": k.d_power })
}

pub fn discrepancy(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let gen = gated(cfg)?;
    let ns = cfg.schedule()?;
    let vs = cfg.ks_v.clone().unwrap_or_else(|| vec![4]);
    let m = gen.modulus().clone();
    let d = gen.dim() as u32;
    let k = &cfg.constants;
    let mut table = Table::new(&[
        "n",
        "d",
        "kind",
        "exact",
        "approx",
        "extreme_upper",
        "log_ratio",
        "envelope",
        "v",
        "ks_bound",
        "bound_holds",
    ]);
    for (n, big) in u64s(&ns)?.into_iter().zip(&ns) {
        let points = gen.fractional_points(n as usize)?;
        let report = exact_discrepancy(&points)?;
        let log_ratio = if n > 1 { float(report.approx.ln() / (n as f64).ln()) } else { String::new() };
        let envelope = if d >= 2 {
            discrepancy_envelope(big, m.p(), m.t(), d, k.eta0, k.c_disc, k.d_power)?.to_decimal_string()
        } else {
            String::new()
        };
        let kind = serde_json::to_value(report.kind).expect("kind serializes");
        for &v in &vs {
            let ks = koksma_szusz_bound(&gen, n, v)?;
            table.push(vec![
                n.to_string(),
                d.to_string(),
                kind.as_str().unwrap_or_default().to_string(),
                report.exact.clone(),
                float(report.approx),
                opt(report.extreme_upper.map(float)),
                log_ratio.clone(),
                envelope.clone(),
                v.to_string(),
                ks.bound.to_decimal_string(),
                (report.approx <= ks.bound.to_f64()).to_string(),
            ]);
        }
    }
    let json = json!({ "constants": constants_json(cfg), "rows": table.to_json() });
    Ok(Report::ok(table, json))
}

pub fn vmvt(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let grid = cfg.vmvt.as_ref().ok_or_else(|| CliError::input("missing field `vmvt`"))?;
    let d = match (cfg.ford_d, &cfg.matrix) {
        (Some(d), _) => d,
        (None, Some(_)) => cfg.matrix()?.dim() as u32,
        (None, None) => 2,
    };
    let c0 = cfg.constants.c0;
    let mut table = Table::new(&[
        "k",
        "r",
        "m",
        "count",
        "diagonal",
        "trivial_upper",
        "ford_d",
        "ford_k",
        "ford_bound",
        "ford_valid",
        "ford_applies",
        "within_ford",
    ]);
    for &k in &grid.k {
        for &r in &grid.r {
            for &m in &grid.m {
                let count = vinogradov_count(k, r, m)?;
                let ford = ford_bound(r, d, m, c0)?;
                // Ford's bound speaks about k = floor(6 r^2 log d) only.
                let applies = ford.k == k as u64;
                let within =
                    applies.then(|| mcg_core::analysis::BigReal::from_bigint(&BigInt::from(count)) <= ford.bound);
                table.push(vec![
                    k.to_string(),
                    r.to_string(),
                    m.to_string(),
                    count.to_string(),
                    BigInt::from(m).pow(k).to_string(),
                    BigInt::from(m).pow(2 * k).to_string(),
                    d.to_string(),
                    ford.k.to_string(),
                    ford.bound.to_decimal_string(),
                    ford.valid.to_string(),
                    applies.to_string(),
                    opt(within),
                ]);
            }
        }
    }
    let json = json!({ "c0": c0, "rows": table.to_json() });
    Ok(Report::ok(table, json))
}

pub fn bounds(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let gen = gated(cfg)?;
    let ns = cfg.schedule()?;
    let m = gen.modulus().clone();
    let (p, t) = (m.p(), m.t());
    let d = gen.dim() as u32;
    let k = &cfg.constants;
    let profile = period_profile(gen.matrix(), p, 1, cfg.order_cap())?;
    let w = window(&char_poly(gen.matrix()), p)?.map(|w| w.w);
    let mut table = Table::new(&[
        "n",
        "rho",
        "s",
        "r",
        "k",
        "lambda",
        "r_lt_s",
        "w_and_s_star_le_s",
        "ps_le_quarter_root",
        "n_above_threshold",
        "large_r",
        "fallback_n0",
        "fallback_rho0",
        "theorem_envelope",
        "discrepancy_envelope",
        "ford_bound",
        "ford_valid",
        "q_max",
        "sigma_bound",
        "sigma_measured",
        "note",
    ]);
    for n in &ns {
        let rho = mcg_core::analysis::rho(n, p, t).to_decimal_string();
        let (env, denv) = if d >= 2 {
            (
                theorem_envelope(n, p, t, d, k.eta, k.c, k.d_power)?.to_decimal_string(),
                discrepancy_envelope(n, p, t, d, k.eta0, k.c_disc, k.d_power)?.to_decimal_string(),
            )
        } else {
            (String::new(), String::new())
        };
        let params = match proof_parameters(n, p, t, d, w.unwrap_or(u64::MAX), profile.s_star, k.c0) {
            Ok(pp) => pp,
            Err(e @ Error::PreconditionViolated(_)) => {
                let mut row = vec![n.to_string(), rho];
                row.extend(std::iter::repeat_n(String::new(), 11));
                row.extend([env, denv]);
                row.extend(std::iter::repeat_n(String::new(), 5));
                row.push(e.code().into());
                table.push(row);
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let mut notes = Vec::new();
        let (mut ford, mut valid, mut q_max, mut sigma, mut measured) =
            (String::new(), String::new(), String::new(), String::new(), String::new());
        if d >= 2 {
            match sigma_bound(&gen, 0, params.s, d, k.c0) {
                Ok(sb) => {
                    ford = sb.ford.bound.to_decimal_string();
                    valid = sb.ford.valid.to_string();
                    q_max = sb.korobov.q_max.clone();
                    sigma = sb.korobov.root.to_decimal_string();
                }
                Err(e) if e.is_resource_guard() => return Err(e.into()),
                Err(e) => notes.push(e.code()),
            }
            let grid = prime_power(p, 2 * params.s).to_u64().filter(|&g| g <= SIGMA_GRID_LIMIT);
            if grid.is_some() && !sigma.is_empty() {
                measured = float(sigma_n(&gen, 0, params.s)?.abs);
            }
        }
        table.push(vec![
            n.to_string(),
            rho,
            params.s.to_string(),
            params.r.to_string(),
            params.k.to_string(),
            params.lambda.to_string(),
            params.r_lt_s.to_string(),
            params.w_and_s_star_le_s.to_string(),
            params.ps_le_quarter_root.to_string(),
            params.n_above_threshold.to_string(),
            params.large_r.to_string(),
            params.fallback_n0.to_decimal_string(),
            params.fallback_rho0.to_decimal_string(),
            env,
            denv,
            ford,
            valid,
            q_max,
            sigma,
            measured,
            notes.join(";"),
        ]);
    }
    let json = json!({
        "w": w,
        "s_star": profile.s_star,
        "constants": constants_json(cfg),
        "rows": table.to_json(),
    });
    Ok(Report::ok(table, json))
}

/// Overlay of measured sums against the theorem envelope, full-period
/// exponents, and seeded spot checks of the expansion congruences.
pub fn report(cfg: &ExperimentConfig, seed: u64) -> Result<Report, CliError> {
    let gen = gated(cfg)?;
    let v = gen.projection().ok_or(Error::MissingProjection)?.clone();
    let p = gen.modulus().p();
    let d = gen.dim() as u32;
    let ts = cfg.ts.clone().unwrap_or_else(|| vec![gen.modulus().t()]);
    let k = &cfg.constants;
    let mut table = Table::new(&["t", "tau", "label", "n", "rho", "abs", "normalized", "envelope"]);
    let mut decreasing = Vec::new();
    let mut bounded = true;
    let mut discrepancies = Vec::new();
    for &t in &ts {
        let m = PrimePowerModulus::new(p, t)?;
        let sub = GeneratorConfig::new(gen.matrix().clone(), m.clone(), gen.start().clone(), Some(v.clone()))?;
        let tau = order_mod(gen.matrix(), &m, cfg.order_cap())?;
        let mut normalized = Vec::new();
        for (label, n) in [("tau/9", tau / 9), ("tau", tau)] {
            if n == 0 {
                continue;
            }
            let r = exp_sum(&sub, n)?;
            bounded &= r.normalized <= 1.0 + 1e-12;
            normalized.push(r.normalized);
            let envelope = if d >= 2 {
                theorem_envelope(&BigInt::from(n), p, t, d, k.eta, k.c, k.d_power)?.to_decimal_string()
            } else {
                String::new()
            };
            table.push(vec![
                t.to_string(),
                tau.to_string(),
                label.into(),
                n.to_string(),
                float(r.rho),
                float(r.abs),
                float(r.normalized),
                envelope,
            ]);
        }
        if let [ninth, full] = normalized[..] {
            decreasing.push(json!({ "t": t, "holds": full < ninth }));
        }
        if d <= 2 && tau <= mcg_core::analysis::EXTREME_POINT_LIMIT as u64 {
            let dr = exact_discrepancy(&sub.fractional_points(tau as usize)?)?;
            discrepancies.push(json!({
                "t": t,
                "n": tau,
                "exact": dr.exact,
                "approx": float(dr.approx),
                "log_ratio": float(dr.approx.ln() / (tau as f64).ln()),
            }));
        }
    }
    let full_period: Vec<Value> = full_period_exponent(&gen, ts.iter().copied())?
        .into_iter()
        .map(|r| json!({ "t": r.t, "tau": r.tau, "abs": float(r.abs), "theta": float(r.theta), "reference": float(r.reference) }))
        .collect();
    let checks = spot_checks(&gen, seed, cfg.checks.unwrap_or(20))?;
    let json = json!({
        "seed": seed,
        "constants": constants_json(cfg),
        "overlay": table.to_json(),
        "normalized_at_most_one": bounded,
        "full_period_below_ninth": decreasing,
        "full_period": full_period,
        "discrepancy": discrepancies,
        "checks": checks,
    });
    Ok(Report::ok(table, json))
}

/// Random `(n, m)` checks of both expansion congruences at `s = 1` and, where `r <= p^s`, at `s = 2`.
fn spot_checks(gen: &GeneratorConfig, seed: u64, count: usize) -> Result<Value, CliError> {
    let v = gen.projection().ok_or(Error::MissingProjection)?;
    let m = gen.modulus();
    let p = m.p();
    let det = det_exact(gen.matrix());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for s in 1..=2u32.min(m.t()) {
        let r = (m.t() / s) as usize;
        let tau = order_mod(gen.matrix(), &m.with_exponent(s)?, mcg_core::padic::DEFAULT_ORDER_CAP)?;
        let b = theta_matrix(gen.matrix(), p, s, tau)?;
        let monomial = BigInt::from(r) <= prime_power(p, s);
        let (mut binomial_ok, mut monomial_ok) = (0usize, 0usize);
        for _ in 0..count {
            let n = rng.gen_range(0..=100u64);
            let mm = rng.gen_range(0..=50u64);
            let h = h_coeffs(gen.matrix(), gen.start(), v, &b, n, 50.max(r))?;
            let u = &gen.scalar_sequence(n + tau * mm, 1)?[0];
            if m.reduce(&(&det * u)) == binomial_expansion_value(&h, mm, s, m) {
                binomial_ok += 1;
            }
            if monomial {
                let big_h = H_coeffs(&h[..=r], r, s, p)?;
                if m.reduce(&(factorial(r as u64) * &det * u)) == monomial_expansion_value(&big_h, mm, s, m) {
                    monomial_ok += 1;
                }
            }
        }
        out.push(json!({
            "s": s,
            "r": r,
            "samples": count,
            "binomial_ok": binomial_ok,
            "monomial_ok": if monomial { Some(monomial_ok) } else { None },
        }));
    }
    Ok(Value::Array(out))
}

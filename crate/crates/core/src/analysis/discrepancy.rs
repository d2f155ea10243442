//! Exact discrepancy of finite point sets with rational coordinates, and the
//! Koksma–Szüsz upper bound built from exponential sums.
//!
//! Coordinates are integers `x` in `[0, den)` standing for `x / den`. The
//! supremum over boxes is attained in the limit by one of two critical
//! families:
//!
//! - closed boxes whose faces pass through point coordinates (over-count);
//! - open boxes whose faces lie in `{0} ∪ coordinates ∪ {1}` (under-count).
//!
//! All comparisons are carried out on integers scaled by `N den^d`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use super::bigreal::BigReal;
use super::expsum::{frequency_sum, Compensated};
use crate::arith::ResidueVector;
use crate::error::{Error, Result};
use crate::generator::{GeneratorConfig, PointSet};

/// Point limit for exact extreme discrepancy (`d <= 2`).
pub const EXTREME_POINT_LIMIT: usize = 4096;
/// Point limit for exact star discrepancy (`d = 3`).
pub const STAR_POINT_LIMIT: usize = 512;
/// Largest denominator for `d <= 2` (keeps `N den^2` inside `i128`).
pub const EXTREME_DEN_LIMIT: u64 = 1 << 40;
/// Largest denominator for `d = 3`.
pub const STAR_DEN_LIMIT: u64 = 1 << 30;
/// Largest number of frequency vectors in a Koksma–Szüsz evaluation.
pub const FREQUENCY_LIMIT: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DiscrepancyKind {
    Extreme,
    Star,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscrepancyReport {
    pub n: usize,
    pub d: usize,
    pub kind: DiscrepancyKind,
    #[serde(skip)]
    pub value: BigRational,
    /// `value` as `numerator/denominator`.
    pub exact: String,
    pub approx: f64,
    /// `2^d D*`, an upper bound for the extreme discrepancy (star reports only).
    pub extreme_upper: Option<f64>,
}

impl DiscrepancyReport {
    fn new(n: usize, d: usize, kind: DiscrepancyKind, value: BigRational) -> Self {
        let approx = value.to_f64().unwrap_or(f64::NAN);
        DiscrepancyReport {
            n,
            d,
            kind,
            exact: format!("{}/{}", value.numer(), value.denom()),
            approx,
            extreme_upper: (kind == DiscrepancyKind::Star).then(|| approx * (1u64 << d) as f64),
            value,
        }
    }
}

fn word_points(points: &PointSet, den_limit: u64) -> Result<(u64, Vec<Vec<u64>>)> {
    let (den, pts) = points.to_u64().ok_or(Error::DenominatorTooLarge)?;
    if den > den_limit {
        return Err(Error::DenominatorTooLarge);
    }
    Ok((den, pts))
}

/// Exact extreme discrepancy for `d <= 2`, star discrepancy for `d = 3`.
pub fn exact_discrepancy(points: &PointSet) -> Result<DiscrepancyReport> {
    match points.dim() {
        1 | 2 => extreme_discrepancy(points),
        3 => star_discrepancy(points),
        d => Err(Error::DimensionTooLarge(d)),
    }
}

/// Sorted distinct values with multiplicities.
fn tally(mut xs: Vec<u64>) -> Vec<(u64, i128)> {
    xs.sort_unstable();
    let mut out: Vec<(u64, i128)> = Vec::new();
    for x in xs {
        match out.last_mut() {
            Some((y, c)) if *y == x => *c += 1,
            _ => out.push((x, 1)),
        }
    }
    out
}

/// `max_{i<=j} (sum_{i..=j} c) unit - scale (y_j - y_i)` over a sorted tally.
fn best_closed(ys: &[(u64, i128)], unit: i128, scale: i128) -> i128 {
    let mut best = i128::MIN;
    let mut cur = i128::MIN;
    let mut prev = 0u64;
    for &(y, c) in ys {
        cur = if cur == i128::MIN { c * unit } else { c * unit + (cur - scale * (y - prev) as i128).max(0) };
        best = best.max(cur);
        prev = y;
    }
    best
}

/// `max_{i<j} scale (b_j - b_i) - unit * #{points strictly between}` over
/// boundaries `0, ys..., den`.
fn best_open(ys: &[(u64, i128)], den: u64, unit: i128, scale: i128) -> i128 {
    let mut best = i128::MIN;
    let mut cur = i128::MIN;
    let (mut prev, mut prev_count) = (0u64, 0i128);
    for &(b, c) in ys.iter().chain(std::iter::once(&(den, 0))) {
        let gap = scale * (b - prev) as i128;
        cur = if cur == i128::MIN { gap } else { gap + (cur - prev_count * unit).max(0) };
        best = best.max(cur);
        prev = b;
        prev_count = c;
    }
    best
}

fn extreme_discrepancy(points: &PointSet) -> Result<DiscrepancyReport> {
    let n = points.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty point set".into()));
    }
    if n > EXTREME_POINT_LIMIT {
        return Err(Error::TooManyPoints { count: n, limit: EXTREME_POINT_LIMIT });
    }
    let (den, pts) = word_points(points, EXTREME_DEN_LIMIT)?;
    let d = points.dim();
    let nn = n as i128;
    let best = if d == 1 {
        let xs = tally(pts.iter().map(|p| p[0]).collect());
        best_closed(&xs, den as i128, nn).max(best_open(&xs, den, den as i128, nn))
    } else {
        extreme_2d(&pts, den, nn)
    };
    let scale = BigInt::from(n) * BigInt::from(den).pow(d as u32);
    Ok(DiscrepancyReport::new(n, d, DiscrepancyKind::Extreme, BigRational::new(BigInt::from(best), scale)))
}

/// Strips in `x`, one linear pass in `y` per strip.
fn extreme_2d(pts: &[Vec<u64>], den: u64, nn: i128) -> i128 {
    let unit = den as i128 * den as i128;
    let mut by_y: Vec<(u64, u64)> = pts.iter().map(|p| (p[1], p[0])).collect();
    by_y.sort_unstable();
    let xs: Vec<u64> = tally(pts.iter().map(|p| p[0]).collect()).into_iter().map(|(x, _)| x).collect();
    let strip = |inside: &dyn Fn(u64) -> bool| -> Vec<(u64, i128)> {
        let mut out: Vec<(u64, i128)> = Vec::new();
        for &(y, x) in &by_y {
            if inside(x) {
                match out.last_mut() {
                    Some((py, c)) if *py == y => *c += 1,
                    _ => out.push((y, 1)),
                }
            }
        }
        out
    };
    let over = (0..xs.len())
        .into_par_iter()
        .map(|a| {
            let mut best = i128::MIN;
            for b in a..xs.len() {
                let (lo, hi) = (xs[a], xs[b]);
                let ys = strip(&|x| lo <= x && x <= hi);
                best = best.max(best_closed(&ys, unit, nn * (hi - lo) as i128));
            }
            best
        })
        .max()
        .unwrap_or(i128::MIN);
    let mut bounds = vec![0u64];
    bounds.extend(xs.iter().copied().filter(|&x| x > 0));
    bounds.push(den);
    let under = (0..bounds.len())
        .into_par_iter()
        .map(|a| {
            let mut best = i128::MIN;
            for b in a + 1..bounds.len() {
                let (lo, hi) = (bounds[a], bounds[b]);
                let ys = strip(&|x| lo < x && x < hi);
                best = best.max(best_open(&ys, den, unit, nn * (hi - lo) as i128));
            }
            best
        })
        .max()
        .unwrap_or(i128::MIN);
    over.max(under)
}

/// Exact star discrepancy over anchored boxes `[0, b)` for `d = 3`.
pub fn star_discrepancy(points: &PointSet) -> Result<DiscrepancyReport> {
    let n = points.len();
    let d = points.dim();
    if d != 3 {
        return Err(Error::DimensionTooLarge(d));
    }
    if n > STAR_POINT_LIMIT {
        return Err(Error::TooManyPoints { count: n, limit: STAR_POINT_LIMIT });
    }
    let (den, pts) = word_points(points, STAR_DEN_LIMIT)?;
    let axes: Vec<Vec<u64>> =
        (0..3).map(|k| tally(pts.iter().map(|p| p[k]).collect()).into_iter().map(|(x, _)| x).collect()).collect();
    let index = |k: usize, x: u64| axes[k].binary_search(&x).expect("coordinate present");
    let (mx, my, mz) = (axes[0].len(), axes[1].len(), axes[2].len());
    let mut by_z: Vec<Vec<(usize, usize)>> = vec![Vec::new(); mz];
    for p in &pts {
        by_z[index(2, p[2])].push((index(0, p[0]), index(1, p[1])));
    }
    let nn = n as i128;
    let unit = den as i128 * den as i128 * den as i128;
    // Coordinate of grid index i on axis k; index m_k stands for 1.
    let coord = |k: usize, i: usize| -> i128 { axes[k].get(i).copied().unwrap_or(den) as i128 };
    // grid[i][j] = #points with x-index <= i, y-index <= j, z-index < current level.
    let mut grid = vec![vec![0i128; my]; mx];
    let mut best = i128::MIN;
    for k in 0..=mz {
        // Open boxes [0, x_i) x [0, y_j) x [0, z_k) count the grid below level k.
        let z = coord(2, k);
        for i in 0..=mx {
            for j in 0..=my {
                let count = if i == 0 || j == 0 { 0 } else { grid[i - 1][j - 1] };
                let vol = coord(0, i) * coord(1, j) * z;
                best = best.max(nn * vol - count * unit);
            }
        }
        if k == mz {
            break;
        }
        for &(px, py) in &by_z[k] {
            for row in grid.iter_mut().skip(px) {
                for cell in row.iter_mut().skip(py) {
                    *cell += 1;
                }
            }
        }
        // Closed boxes [0, x_i] x [0, y_j] x [0, z_k].
        for i in 0..mx {
            for j in 0..my {
                let vol = coord(0, i) * coord(1, j) * z;
                best = best.max(grid[i][j] * unit - nn * vol);
            }
        }
    }
    let scale = BigInt::from(n) * BigInt::from(den).pow(3);
    Ok(DiscrepancyReport::new(n, d, DiscrepancyKind::Star, BigRational::new(BigInt::from(best), scale)))
}

/// Number of points in the half-open box `[lower, upper)`.
pub fn box_count(points: &PointSet, lower: &[BigRational], upper: &[BigRational]) -> Result<usize> {
    let d = points.dim();
    if lower.len() != d || upper.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: lower.len().min(upper.len()) });
    }
    let den = &points.denominator;
    Ok(points
        .numerators
        .iter()
        .filter(|u| {
            u.entries().iter().enumerate().all(|(k, x)| {
                let q = BigRational::new(x.clone(), den.clone());
                lower[k] <= q && q < upper[k]
            })
        })
        .count())
}

#[derive(Clone, Debug, Serialize)]
pub struct KsReport {
    pub n: u64,
    pub v: u32,
    /// Number of frequency vectors `0 < |h|_inf <= V`.
    pub terms: usize,
    /// `(1/N) sum |S(h)| / r(h)`.
    pub weighted_sum: f64,
    /// `(3/2)^d`.
    pub constant: f64,
    pub bound: BigReal,
}

/// `(3/2)^d (2/(V+1) + (1/N) sum_{0<|h|<=V} |S(N; u, h)| / r(h))` with `r(h) = prod max(|h_j|, 1)`.
///
/// This is the classical explicit form of the Koksma–Szüsz inequality.
pub fn koksma_szusz_bound(cfg: &GeneratorConfig, n: u64, v: u32) -> Result<KsReport> {
    if v == 0 || n == 0 {
        return Err(Error::InvalidArgument("V and N must be at least 1".into()));
    }
    let d = cfg.dim();
    let side = 2 * v as u64 + 1;
    let total = side
        .checked_pow(d as u32)
        .filter(|&x| x - 1 <= FREQUENCY_LIMIT)
        .ok_or(Error::EnumerationTooLarge { size: u128::MAX, limit: FREQUENCY_LIMIT as u128 })?;
    // Lexicographic enumeration of [-V, V]^d without the origin.
    let freqs: Vec<Vec<i64>> = (0..total)
        .map(|mut idx| {
            let mut h = vec![0i64; d];
            for k in (0..d).rev() {
                h[k] = (idx % side) as i64 - v as i64;
                idx /= side;
            }
            h
        })
        .filter(|h| h.iter().any(|&x| x != 0))
        .collect();
    let terms: Vec<f64> = freqs
        .par_iter()
        .map(|h| {
            let r: f64 = h.iter().map(|&x| x.unsigned_abs().max(1) as f64).product();
            frequency_sum(cfg, &ResidueVector::from_i64(h), n).map(|s| s.abs / r)
        })
        .collect::<Result<_>>()?;
    let mut acc = Compensated::default();
    for t in &terms {
        acc.add(*t);
    }
    let weighted_sum = acc.value() / n as f64;
    let constant = 1.5f64.powi(d as i32);
    let bound = BigReal::from_f64(constant).mul(&BigReal::ratio(2, v as u64 + 1).add(&BigReal::from_f64(weighted_sum)));
    Ok(KsReport { n, v, terms: freqs.len(), weighted_sum, constant, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{IntMatrix, PrimePowerModulus};
    use num_traits::{One, Zero};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pset(den: u64, pts: &[&[u64]]) -> PointSet {
        PointSet::new(
            BigInt::from(den),
            pts.iter().map(|p| ResidueVector(p.iter().map(|&x| BigInt::from(x)).collect())).collect(),
        )
    }

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    /// Every box with faces in {0} ∪ coordinates ∪ {1}, closed and open.
    fn brute(points: &PointSet) -> BigRational {
        let (den, pts) = points.to_u64().unwrap();
        let d = points.dim();
        let n = pts.len() as i64;
        let mut cuts: Vec<Vec<u64>> = (0..d)
            .map(|k| {
                let mut c: Vec<u64> = pts.iter().map(|p| p[k]).collect();
                c.push(0);
                c.push(den);
                c.sort_unstable();
                c.dedup();
                c
            })
            .collect();
        let mut best = BigRational::zero();
        let boxes = |cuts: &mut Vec<Vec<u64>>| -> Vec<Vec<(u64, u64)>> {
            let mut acc: Vec<Vec<(u64, u64)>> = vec![vec![]];
            for c in cuts.iter() {
                let mut next = Vec::new();
                for partial in &acc {
                    for (i, &lo) in c.iter().enumerate() {
                        for &hi in &c[i..] {
                            let mut b = partial.clone();
                            b.push((lo, hi));
                            next.push(b);
                        }
                    }
                }
                acc = next;
            }
            acc
        };
        for b in boxes(&mut cuts) {
            let vol = b.iter().fold(BigRational::one(), |acc, &(lo, hi)| acc * q((hi - lo) as i64, den as i64));
            let closed =
                pts.iter().filter(|p| b.iter().zip(p.iter()).all(|(&(lo, hi), &x)| lo <= x && x <= hi)).count();
            let open = pts.iter().filter(|p| b.iter().zip(p.iter()).all(|(&(lo, hi), &x)| lo < x && x < hi)).count();
            let over = q(closed as i64, n) - &vol;
            let under = &vol - q(open as i64, n);
            best = best.max(over).max(under);
        }
        best
    }

    #[test]
    fn textbook_cases() {
        let origin = pset(7, &[&[0, 0]]);
        assert_eq!(exact_discrepancy(&origin).unwrap().value, q(1, 1));
        let two = pset(2, &[&[0], &[1]]);
        assert_eq!(exact_discrepancy(&two).unwrap().value, q(1, 2));
        for n in [1u64, 3, 10, 64] {
            let pts: Vec<Vec<u64>> = (0..n).map(|i| vec![i]).collect();
            let refs: Vec<&[u64]> = pts.iter().map(|p| p.as_slice()).collect();
            assert_eq!(exact_discrepancy(&pset(n, &refs)).unwrap().value, q(1, n as i64));
        }
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let d = rng.gen_range(1..=2);
            let den = rng.gen_range(2..=13u64);
            let n = rng.gen_range(1..=9);
            let pts: Vec<Vec<u64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(0..den)).collect()).collect();
            let refs: Vec<&[u64]> = pts.iter().map(|p| p.as_slice()).collect();
            let ps = pset(den, &refs);
            assert_eq!(exact_discrepancy(&ps).unwrap().value, brute(&ps), "{pts:?} / {den}");
        }
    }

    #[test]
    fn fibonacci_points_match_oracle() {
        for (t, n, expected) in [(3u32, 72usize, (359, 1458)), (3, 24, (103, 324)), (4, 216, (761, 6561))] {
            let cfg = GeneratorConfig::new(
                IntMatrix::from_i64(&[&[0, 1], &[1, 1]]).unwrap(),
                PrimePowerModulus::new(3, t).unwrap(),
                ResidueVector::from_i64(&[1, 0]),
                None,
            )
            .unwrap();
            let r = exact_discrepancy(&cfg.fractional_points(n).unwrap()).unwrap();
            assert_eq!(r.value, q(expected.0, expected.1), "t={t} N={n}");
        }
    }

    /// Star discrepancy by brute force over anchored boxes.
    fn brute_star(points: &PointSet) -> BigRational {
        let (den, pts) = points.to_u64().unwrap();
        let n = pts.len() as i64;
        let axes: Vec<Vec<u64>> = (0..3)
            .map(|k| {
                let mut c: Vec<u64> = pts.iter().map(|p| p[k]).collect();
                c.push(den);
                c.sort_unstable();
                c.dedup();
                c
            })
            .collect();
        let mut best = BigRational::zero();
        for &a in &axes[0] {
            for &b in &axes[1] {
                for &c in &axes[2] {
                    let vol = q((a * b * c) as i64, (den * den * den) as i64);
                    let closed = pts.iter().filter(|p| p[0] <= a && p[1] <= b && p[2] <= c).count();
                    let open = pts.iter().filter(|p| p[0] < a && p[1] < b && p[2] < c).count();
                    best = best.max(q(closed as i64, n) - &vol).max(&vol - q(open as i64, n));
                }
            }
        }
        best
    }

    #[test]
    fn star_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let den = rng.gen_range(2..=9u64);
            let n = rng.gen_range(1..=12);
            let pts: Vec<Vec<u64>> = (0..n).map(|_| (0..3).map(|_| rng.gen_range(0..den)).collect()).collect();
            let refs: Vec<&[u64]> = pts.iter().map(|p| p.as_slice()).collect();
            let ps = pset(den, &refs);
            let r = exact_discrepancy(&ps).unwrap();
            assert_eq!(r.kind, DiscrepancyKind::Star);
            assert_eq!(r.value, brute_star(&ps));
            assert!(r.extreme_upper.unwrap() >= r.approx);
        }
    }

    #[test]
    fn guards() {
        let four = pset(5, &[&[1, 1, 1, 1]]);
        assert_eq!(exact_discrepancy(&four).unwrap_err(), Error::DimensionTooLarge(4));
        let many: Vec<Vec<u64>> = (0..4097).map(|i| vec![i % 7]).collect();
        let refs: Vec<&[u64]> = many.iter().map(|p| p.as_slice()).collect();
        assert!(matches!(exact_discrepancy(&pset(7, &refs)), Err(Error::TooManyPoints { .. })));
    }

    #[test]
    fn box_counts() {
        let ps = pset(4, &[&[0, 0], &[1, 2], &[3, 3], &[2, 1]]);
        assert_eq!(box_count(&ps, &[q(0, 1), q(0, 1)], &[q(1, 1), q(1, 1)]).unwrap(), 4);
        assert_eq!(box_count(&ps, &[q(1, 4), q(1, 4)], &[q(3, 4), q(3, 4)]).unwrap(), 2);
        assert_eq!(box_count(&ps, &[q(1, 4), q(1, 4)], &[q(1, 2), q(3, 4)]).unwrap(), 1);
    }

    #[test]
    fn koksma_szusz_dominates() {
        for (t, n, v) in [(3u32, 72u64, 4u32), (4, 216, 8), (3, 72, 1)] {
            let cfg = GeneratorConfig::new(
                IntMatrix::from_i64(&[&[0, 1], &[1, 1]]).unwrap(),
                PrimePowerModulus::new(3, t).unwrap(),
                ResidueVector::from_i64(&[1, 0]),
                None,
            )
            .unwrap();
            let ks = koksma_szusz_bound(&cfg, n, v).unwrap();
            assert_eq!(ks.terms, ((2 * v + 1).pow(2) - 1) as usize);
            let exact = exact_discrepancy(&cfg.fractional_points(n as usize).unwrap()).unwrap();
            assert!(BigReal::from_f64(exact.approx) <= ks.bound);
        }
    }
}

//! The generalized tent map `T_α(x) = α min(x, 1 - x)` on `[0, 1]`.
//!
//! Its topological entropy is `log α`. Two estimators are provided: the growth
//! rate of the lap number of `T_α^n`, counted exactly, and the growth rate of
//! maximal `(n, ε)`-separated sets found greedily on a fine grid. Both fit a
//! slope over a range of `n` so that the multiplicative constants in the growth
//! drop out.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::math;

/// Largest iterate accepted by [`lap_count`].
pub const MAX_LAP_ITERATES: usize = 256;
/// Largest iterate accepted by [`lap_structure`], which stores every breakpoint.
pub const MAX_STRUCTURE_ITERATES: usize = 20;
/// Largest iterate accepted by the separated-set estimator.
pub const MAX_SEPARATED_ITERATES: usize = 18;
/// Grid size for separated sets.
pub const SEPARATED_GRID: usize = 100_000;
/// An image interval is split only when `1/2` lies this far inside it.
const SPLIT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TentMap {
    alpha: f64,
}

impl TentMap {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(Error::invalid("alpha", "must lie in (1, 2]"));
        }
        Ok(TentMap { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        if x <= 0.5 {
            self.alpha * x
        } else {
            self.alpha * (1.0 - x)
        }
    }

    pub fn iterate(&self, x: f64, n: usize) -> f64 {
        (0..n).fold(x, |y, _| self.apply(y))
    }
}

pub fn tent_eval(alpha: f64, x: f64) -> Result<f64> {
    let t = TentMap::new(alpha)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid("x", "must lie in [0, 1]"));
    }
    Ok(t.apply(x))
}

fn check_laps(n: usize, cap: usize) -> Result<()> {
    if n == 0 || n > cap {
        return Err(Error::invalid("n", alloc::format!("iterate count must lie in [1, {}]", cap)));
    }
    Ok(())
}

/// Exact number of maximal monotone pieces of `T_α^n`.
///
/// Each lap of `T_α^k` is tracked only through its image interval. Applying
/// `T_α` splits a lap in two exactly when `1/2` is interior to its image, with
/// images `[α lo, α/2]` and `[α (1 - hi), α/2]`. Laps with equal images
/// evolve identically, so they are merged into one multiplicity.
pub fn lap_count(alpha: f64, n: usize) -> Result<BigUint> {
    let t = TentMap::new(alpha)?;
    check_laps(n, MAX_LAP_ITERATES)?;
    let key = |lo: f64, hi: f64| (lo.to_bits(), hi.to_bits());
    let mut images: BTreeMap<(u64, u64), BigUint> = BTreeMap::new();
    images.insert(key(0.0, 1.0), BigUint::from(1u32));
    for _ in 0..n {
        let mut next: BTreeMap<(u64, u64), BigUint> = BTreeMap::new();
        for ((lo, hi), count) in images {
            let (lo, hi) = (f64::from_bits(lo), f64::from_bits(hi));
            let peak = alpha / 2.0;
            if lo < 0.5 - SPLIT_TOL && hi > 0.5 + SPLIT_TOL {
                *next.entry(key(t.apply(lo), peak)).or_insert_with(BigUint::zero) += &count;
                *next.entry(key(t.apply(hi), peak)).or_insert_with(BigUint::zero) += count;
            } else {
                let (a, b) = (t.apply(lo), t.apply(hi));
                *next.entry(key(a.min(b), a.max(b))).or_insert_with(BigUint::zero) += count;
            }
        }
        images = next;
    }
    Ok(images.into_values().sum())
}

/// Breakpoints of `T_α^n`: the interior points where it changes monotonicity.
#[derive(Clone, Debug, PartialEq)]
pub struct LapStructure {
    pub n: usize,
    pub breakpoints: Vec<f64>,
}

impl LapStructure {
    pub fn laps(&self) -> usize {
        self.breakpoints.len() + 1
    }
}

/// Explicit breakpoints, found by inverting `T_α^k` on each lap where it crosses `1/2`.
pub fn lap_structure(alpha: f64, n: usize) -> Result<LapStructure> {
    TentMap::new(alpha)?;
    check_laps(n, MAX_STRUCTURE_ITERATES)?;
    // Each lap: domain [a, b] with T^k(x) = s x + c there.
    let mut laps: Vec<(f64, f64, f64, f64)> = vec![(0.0, 1.0, 1.0, 0.0)];
    for _ in 0..n {
        let mut next = Vec::with_capacity(laps.len() * 2);
        for (a, b, s, c) in laps {
            let (fa, fb) = (s * a + c, s * b + c);
            let (lo, hi) = (fa.min(fb), fa.max(fb));
            let push = |next: &mut Vec<_>, a: f64, b: f64, fx: f64| {
                // Compose with the branch of T_α containing the image values.
                if fx <= 0.5 {
                    next.push((a, b, alpha * s, alpha * c));
                } else {
                    next.push((a, b, -alpha * s, alpha * (1.0 - c)));
                }
            };
            if lo < 0.5 - SPLIT_TOL && hi > 0.5 + SPLIT_TOL {
                let x = (0.5 - c) / s;
                push(&mut next, a, x, (fa + 0.5) / 2.0);
                push(&mut next, x, b, (fb + 0.5) / 2.0);
            } else {
                push(&mut next, a, b, (fa + fb) / 2.0);
            }
        }
        laps = next;
    }
    let breakpoints = laps.iter().skip(1).map(|l| l.0).collect();
    Ok(LapStructure { n, breakpoints })
}

/// Least-squares slope of `log lap_count(α, n)` over `n ∈ [n_lo, n_hi]`.
pub fn entropy_lap(alpha: f64, n_lo: usize, n_hi: usize) -> Result<f64> {
    if !(2 <= n_lo && n_lo < n_hi && n_hi <= MAX_LAP_ITERATES) {
        return Err(Error::invalid("n", "need 2 <= n_lo < n_hi <= 256"));
    }
    let xs: Vec<f64> = (n_lo..=n_hi).map(|n| n as f64).collect();
    let ys = (n_lo..=n_hi)
        .map(|n| Ok(math::ln_biguint(&lap_count(alpha, n)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(math::linear_fit(&xs, &ys).0)
}

/// Size of a greedy maximal `(m, ε)`-separated set among the grid points.
///
/// Two points are separated when `max_{j<m} |T^j x - T^j y| > ε`. Accepted
/// points are bucketed by `(x, T^{m-1} x)` on an `ε` lattice; a point within
/// `ε` of an accepted one must sit in a neighbouring bucket.
fn greedy_separated(t: &TentMap, grid: &[f64], m: usize, eps: f64) -> usize {
    let cell = |v: f64| math::floor(v / eps) as i64;
    let mut buckets: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
    let mut orbits: Vec<f64> = Vec::new();
    let mut orbit = vec![0.0; m];
    let mut accepted = 0;
    for &x in grid {
        orbit[0] = x;
        for j in 1..m {
            orbit[j] = t.apply(orbit[j - 1]);
        }
        let key = (cell(x), cell(orbit[m - 1]));
        let close = (-1..=1).any(|dx| {
            (-1..=1).any(|dy| {
                buckets.get(&(key.0 + dx, key.1 + dy)).is_some_and(|ids| {
                    ids.iter().any(|&id| {
                        let other = &orbits[id * m..(id + 1) * m];
                        orbit.iter().zip(other).all(|(a, b)| math::abs(a - b) <= eps)
                    })
                })
            })
        });
        if !close {
            buckets.entry(key).or_default().push(accepted);
            orbits.extend_from_slice(&orbit);
            accepted += 1;
        }
    }
    accepted
}

fn separated_grid(eps: f64) -> Result<Vec<f64>> {
    if !(1e-4..1.0).contains(&eps) {
        return Err(Error::invalid("epsilon", "must lie in [1e-4, 1)"));
    }
    let spacing = 1.0 / (SEPARATED_GRID - 1) as f64;
    if spacing >= eps {
        return Err(Error::invalid("epsilon", "grid too coarse for this epsilon"));
    }
    Ok((0..SEPARATED_GRID).map(|i| i as f64 * spacing).collect())
}

/// `(m, S_m)` for every `m` in `ms`, where `S_m` is the greedy separated-set size.
pub fn separated_counts(alpha: f64, ms: core::ops::RangeInclusive<usize>, eps: f64) -> Result<Vec<(usize, usize)>> {
    let t = TentMap::new(alpha)?;
    if *ms.start() == 0 || *ms.end() > MAX_SEPARATED_ITERATES {
        return Err(Error::invalid("n", "iterate count must lie in [1, 18]"));
    }
    let grid = separated_grid(eps)?;
    Ok(ms.map(|m| (m, greedy_separated(&t, &grid, m, eps))).collect())
}

/// Entropy from `(n, ε)`-separated sets.
///
/// Returns the least-squares slope of `log S_m` over `m ∈ [⌈n/2⌉, n]`, which
/// removes the `log(1/ε)` offset carried by `(1/n) log S_n`. For `n = 1` there
/// is no slope and `log S_1` is returned.
pub fn entropy_separated(alpha: f64, n: usize, eps: f64) -> Result<f64> {
    let lo = n.div_ceil(2).max(1);
    let counts = separated_counts(alpha, lo..=n, eps)?;
    if counts.len() == 1 {
        return Ok(math::ln(counts[0].1 as f64));
    }
    let xs: Vec<f64> = counts.iter().map(|&(m, _)| m as f64).collect();
    let ys: Vec<f64> = counts.iter().map(|&(_, s)| math::ln(s as f64)).collect();
    Ok(math::linear_fit(&xs, &ys).0)
}

/// Binary coding of the orbit of `x0`: 0 on `[0, 1/2]`, 1 on `(1/2, 1]`.
pub fn tent_itinerary(alpha: f64, x0: f64, n: usize) -> Result<Vec<u8>> {
    let t = TentMap::new(alpha)?;
    if !(0.0..=1.0).contains(&x0) {
        return Err(Error::invalid("x0", "must lie in [0, 1]"));
    }
    let mut x = x0;
    Ok((0..n)
        .map(|_| {
            let s = u8::from(x > 0.5);
            x = t.apply(x);
            s
        })
        .collect())
}

#[cfg(test)]
mod tests {
    extern crate std;

    use super::*;
    use approx::assert_abs_diff_eq;
    use num_traits::ToPrimitive;

    /// Counts monotonicity changes of T^n sampled on a uniform grid.
    fn grid_laps(alpha: f64, n: usize, points: usize) -> usize {
        let t = TentMap::new(alpha).unwrap();
        let values: Vec<f64> = (0..=points).map(|i| t.iterate(i as f64 / points as f64, n)).collect();
        let mut laps = 1;
        let mut dir = 0i8;
        for w in values.windows(2) {
            let d = if w[1] > w[0] { 1 } else if w[1] < w[0] { -1 } else { 0 };
            if d != 0 {
                if dir != 0 && d != dir {
                    laps += 1;
                }
                dir = d;
            }
        }
        laps
    }

    #[test]
    fn eval_examples() {
        assert_eq!(tent_eval(2.0, 0.5).unwrap(), 1.0);
        assert_abs_diff_eq!(tent_eval(2.0, 1.0 / 3.0).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(tent_eval(1.5, 0.9).unwrap(), 0.15, epsilon = 1e-15);
        assert!(tent_eval(2.5, 0.5).is_err());
        assert!(tent_eval(1.0, 0.5).is_err());
        assert!(tent_eval(1.5, 1.1).is_err());
    }

    #[test]
    fn full_tent_doubles() {
        for n in 1..=40 {
            assert_eq!(lap_count(2.0, n).unwrap(), BigUint::from(1u64) << n);
        }
        for alpha in [1.1, 1.2, 1.5, 1.9] {
            assert_eq!(lap_count(alpha, 1).unwrap(), BigUint::from(2u32));
        }
    }

    #[test]
    fn lap_count_matches_breakpoints_and_grid() {
        for alpha in [1.2, 1.5, 1.9] {
            for n in 1..=10 {
                let exact = lap_count(alpha, n).unwrap().to_usize().unwrap();
                assert_eq!(lap_structure(alpha, n).unwrap().laps(), exact, "alpha={alpha} n={n}");
            }
            assert_eq!(grid_laps(alpha, 8, 400_000), lap_count(alpha, 8).unwrap().to_usize().unwrap());
        }
        assert_eq!(lap_count(1.5, 10).unwrap(), BigUint::from(216u32));
        assert_eq!(lap_count(1.2, 10).unwrap(), BigUint::from(166u32));
    }

    #[test]
    fn breakpoints_are_sorted_and_monotone_between() {
        let alpha = 1.7;
        let s = lap_structure(alpha, 6).unwrap();
        assert!(s.breakpoints.windows(2).all(|w| w[0] < w[1]));
        let t = TentMap::new(alpha).unwrap();
        let mut edges = vec![0.0];
        edges.extend(&s.breakpoints);
        edges.push(1.0);
        for w in edges.windows(2) {
            let xs: Vec<f64> = (0..=50).map(|i| w[0] + (w[1] - w[0]) * i as f64 / 50.0).collect();
            let ys: Vec<f64> = xs.iter().map(|&x| t.iterate(x, 6)).collect();
            let up = ys.windows(2).all(|p| p[1] >= p[0] - 1e-12);
            let down = ys.windows(2).all(|p| p[1] <= p[0] + 1e-12);
            assert!(up || down);
        }
    }

    #[test]
    fn laps_are_submultiplicative() {
        for alpha in [1.2, 1.5, 1.9, 2.0] {
            for m in 1..=8 {
                for n in 1..=8 {
                    let lhs = lap_count(alpha, m + n).unwrap();
                    assert!(lhs <= lap_count(alpha, m).unwrap() * lap_count(alpha, n).unwrap());
                }
            }
        }
    }

    #[test]
    fn lap_ratio_tends_to_alpha() {
        for (alpha, n) in [(1.5, 20), (1.9, 20), (2.0, 20), (1.2, 60)] {
            let a = lap_count(alpha, n).unwrap().to_f64().unwrap();
            let b = lap_count(alpha, n + 1).unwrap().to_f64().unwrap();
            assert!((b / a - alpha).abs() < 0.01, "alpha={alpha}: {}", b / a);
        }
    }

    #[test]
    fn lap_entropy() {
        assert_abs_diff_eq!(entropy_lap(2.0, 10, 22).unwrap(), 2f64.ln(), epsilon = 1e-10);
        assert_abs_diff_eq!(entropy_lap(1.9, 10, 20).unwrap(), 1.9f64.ln(), epsilon = 0.01);
        assert_abs_diff_eq!(entropy_lap(1.5, 10, 22).unwrap(), 1.5f64.ln(), epsilon = 0.01);
        assert_abs_diff_eq!(entropy_lap(1.2, 40, 80).unwrap(), 1.2f64.ln(), epsilon = 0.001);
        assert!(entropy_lap(1.5, 10, 10).is_err());
        assert!(lap_count(1.5, 0).is_err());
        assert!(lap_count(1.5, 257).is_err());
    }

    #[test]
    fn images_stay_below_the_peak() {
        let alpha = 1.6;
        let t = TentMap::new(alpha).unwrap();
        let s = lap_structure(alpha, 8).unwrap();
        for &b in &s.breakpoints {
            for n in 1..=8 {
                assert!(t.iterate(b, n) <= alpha / 2.0 + 1e-12);
            }
        }
    }

    #[test]
    fn separated_entropy() {
        assert_abs_diff_eq!(entropy_separated(2.0, 10, 0.01).unwrap(), 2f64.ln(), epsilon = 0.1);
        assert_abs_diff_eq!(entropy_separated(1.5, 12, 0.01).unwrap(), 1.5f64.ln(), epsilon = 0.12);
        let one = entropy_separated(1.7, 1, 0.01).unwrap();
        assert!(one <= (1.0f64 / 0.01).ln() + 1.0);
        assert!(entropy_separated(1.5, 5, 1e-6).is_err());
        assert!(entropy_separated(1.5, 19, 0.01).is_err());
    }

    #[test]
    fn itineraries() {
        assert_eq!(tent_itinerary(2.0, 1.0 / 3.0, 6).unwrap(), vec![0, 1, 1, 1, 1, 1]);
        assert_eq!(tent_itinerary(1.5, 0.0, 5).unwrap(), vec![0; 5]);
        assert_eq!(tent_itinerary(2.0, 0.5, 5).unwrap(), vec![0, 1, 0, 0, 0]);
    }
}

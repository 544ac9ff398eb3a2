//! Central Cantor sets of prescribed dimension and box-counting estimates.
//!
//! The central Cantor set with ratio `r` keeps the two outer subintervals of
//! relative length `r` at every step. Its similarity dimension is
//! `log 2 / log(1/r)`, and for these sets Hausdorff and box-counting dimension
//! coincide, so box counting at the construction scales `ε = r^d` recovers it.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::tent;

/// Deepest construction level accepted.
pub const MAX_DEPTH: usize = 18;
/// Fits with a lower coefficient of determination are rejected.
pub const MIN_R_SQUARED: f64 = 0.99;

#[derive(Clone, Debug, PartialEq)]
pub struct CantorSpec {
    pub ratio: f64,
    pub depth: usize,
    /// The `2^depth` intervals of the final level, left to right.
    pub intervals: Vec<(f64, f64)>,
}

impl CantorSpec {
    /// Similarity dimension `log 2 / log(1/r)`.
    pub fn dimension(&self) -> f64 {
        core::f64::consts::LN_2 / -math::ln(self.ratio)
    }

    /// Construction scales `r^d` for `d = 2..=depth`.
    pub fn scales(&self) -> Vec<f64> {
        (2..=self.depth).map(|d| math::powf(self.ratio, d as f64)).collect()
    }
}

/// Central Cantor set with ratio `r ∈ (0, 1/2]`.
pub fn cantor_with_ratio(ratio: f64, depth: usize) -> Result<CantorSpec> {
    if !(ratio > 0.0 && ratio <= 0.5) {
        return Err(Error::invalid("ratio", "must lie in (0, 1/2]"));
    }
    if depth > MAX_DEPTH {
        return Err(Error::invalid("depth", "at most 18 levels"));
    }
    let mut intervals = alloc::vec![(0.0, 1.0)];
    for _ in 0..depth {
        intervals = intervals
            .iter()
            .flat_map(|&(a, b)| {
                let len = ratio * (b - a);
                [(a, a + len), (b - len, b)]
            })
            .collect();
    }
    Ok(CantorSpec {
        ratio,
        depth,
        intervals,
    })
}

/// Central Cantor set of dimension `s`: ratio `r = exp(-log 2 / s)`.
pub fn cantor_for_dimension(s: f64, depth: usize) -> Result<CantorSpec> {
    if !(s > 0.0 && s <= core::f64::consts::LN_2) {
        return Err(Error::invalid("s", "must lie in (0, log 2]"));
    }
    cantor_with_ratio(math::exp(-core::f64::consts::LN_2 / s), depth)
}

#[derive(Clone, Debug, PartialEq)]
pub enum PointSet {
    Points(Vec<f64>),
    Intervals(Vec<(f64, f64)>),
}

impl From<&CantorSpec> for PointSet {
    fn from(c: &CantorSpec) -> Self {
        PointSet::Intervals(c.intervals.clone())
    }
}

impl PointSet {
    fn is_empty(&self) -> bool {
        match self {
            PointSet::Points(p) => p.is_empty(),
            PointSet::Intervals(i) => i.is_empty(),
        }
    }

    /// Number of grid boxes `[iε, (i+1)ε)` meeting the set.
    pub fn occupied_boxes(&self, eps: f64) -> u64 {
        match self {
            PointSet::Points(points) => {
                let mut cells: Vec<i64> = points.iter().map(|&x| math::floor(x / eps) as i64).collect();
                cells.sort_unstable();
                cells.dedup();
                cells.len() as u64
            }
            PointSet::Intervals(intervals) => {
                let mut ranges: Vec<(i64, i64)> = intervals
                    .iter()
                    .map(|&(a, b)| {
                        let lo = math::floor(a / eps) as i64;
                        let hi = (math::ceil(b / eps) as i64 - 1).max(lo);
                        (lo, hi)
                    })
                    .collect();
                ranges.sort_unstable();
                let mut count = 0u64;
                let mut covered: Option<i64> = None;
                for (lo, hi) in ranges {
                    let start = match covered {
                        Some(c) if c >= lo => c + 1,
                        _ => lo,
                    };
                    if hi >= start {
                        count += (hi - start + 1) as u64;
                    }
                    covered = Some(covered.map_or(hi, |c| c.max(hi)));
                }
                count
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimensionEstimate {
    pub slope: f64,
    pub r_squared: f64,
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Least-squares slope of `log N(ε)` against `log(1/ε)`.
///
/// Needs at least six scales spanning two decades; a fit with `r² < 0.99` is an error.
pub fn box_dimension(set: &PointSet, scales: &[f64]) -> Result<DimensionEstimate> {
    if set.is_empty() {
        return Err(Error::invalid("set", "must be nonempty"));
    }
    if scales.len() < 6 || scales.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::invalid("scales", "need at least six positive scales"));
    }
    let (lo, hi) = scales
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    if hi / lo < 100.0 * (1.0 - 1e-12) {
        return Err(Error::invalid("scales", "scales must span at least two decades"));
    }
    let counts: Vec<u64> = scales.iter().map(|&e| set.occupied_boxes(e)).collect();
    let xs: Vec<f64> = scales.iter().map(|&e| -math::ln(e)).collect();
    let ys: Vec<f64> = counts.iter().map(|&n| math::ln(n as f64)).collect();
    let (slope, _, r_squared) = math::linear_fit(&xs, &ys);
    if r_squared < MIN_R_SQUARED {
        return Err(Error::PoorFit { slope, r_squared });
    }
    Ok(DimensionEstimate {
        slope,
        r_squared,
        scales: scales.to_vec(),
        counts,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorollaryCheck {
    pub s: f64,
    pub dim_estimate: f64,
    pub alpha: f64,
    pub entropy_estimate: f64,
    pub r_squared: f64,
}

/// Construction depth and lap window used by [`corollary_check`].
pub const COROLLARY_DEPTH: usize = 14;
pub const COROLLARY_LAPS: (usize, usize) = (10, 22);
pub const COROLLARY_TOL: f64 = 0.02;

/// Runs the chain `dim(A_s) = s = log α = h_top(T_α)` numerically.
///
/// Builds the central Cantor set of dimension `s`, estimates its box
/// dimension, and estimates the entropy of the tent map with `α = e^s` from lap
/// growth. Either estimate further than 0.02 from `s` is an error.
pub fn corollary_check(s: f64) -> Result<CorollaryCheck> {
    let report = corollary_estimates(s)?;
    for (what, value) in [("box dimension", report.dim_estimate), ("lap entropy", report.entropy_estimate)] {
        if math::abs(value - s) > COROLLARY_TOL {
            return Err(Error::ToleranceExceeded {
                what,
                value,
                target: s,
                tolerance: COROLLARY_TOL,
            });
        }
    }
    Ok(report)
}

/// The estimates behind [`corollary_check`], without the tolerance test.
pub fn corollary_estimates(s: f64) -> Result<CorollaryCheck> {
    if !(s > 0.3 && s <= core::f64::consts::LN_2) {
        return Err(Error::invalid("s", "must lie in (0.3, log 2]"));
    }
    let cantor = cantor_for_dimension(s, COROLLARY_DEPTH)?;
    let dim = box_dimension(&PointSet::from(&cantor), &cantor.scales())?;
    let alpha = math::exp(s).min(2.0);
    let entropy = tent::entropy_lap(alpha, COROLLARY_LAPS.0, COROLLARY_LAPS.1)?;
    Ok(CorollaryCheck {
        s,
        dim_estimate: dim.slope,
        alpha,
        entropy_estimate: entropy,
        r_squared: dim.r_squared,
    })
}

#[cfg(test)]
mod tests {
    extern crate std;

    use super::*;
    use approx::assert_abs_diff_eq;
    use alloc::vec;
    use core::f64::consts::LN_2;
    use proptest::prelude::*;

    fn decades(n: usize) -> Vec<f64> {
        (0..n).map(|i| 10f64.powf(-1.0 - 3.0 * i as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn ratios_for_dimension() {
        assert_abs_diff_eq!(cantor_for_dimension(LN_2, 1).unwrap().ratio, (-1f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(cantor_for_dimension(0.5, 1).unwrap().ratio, 0.25, epsilon = 1e-15);
        let third = cantor_for_dimension(2f64.ln() / 3f64.ln(), 1).unwrap();
        assert_abs_diff_eq!(third.ratio, 1.0 / 3.0, epsilon = 1e-15);
        assert!(cantor_for_dimension(0.7, 4).is_err());
        assert!(cantor_for_dimension(0.0, 4).is_err());
        assert!(cantor_for_dimension(0.5, 19).is_err());
    }

    #[test]
    fn construction_invariants() {
        let c = cantor_with_ratio(0.3, 8).unwrap();
        assert_eq!(c.intervals.len(), 256);
        for &(a, b) in &c.intervals {
            assert_abs_diff_eq!(b - a, 0.3f64.powi(8), epsilon = 1e-14);
        }
        assert!(c.intervals.windows(2).all(|w| w[0].1 < w[1].0));
    }

    #[test]
    fn middle_thirds() {
        let c = cantor_with_ratio(1.0 / 3.0, 14).unwrap();
        let est = box_dimension(&PointSet::from(&c), &c.scales()).unwrap();
        assert_abs_diff_eq!(est.slope, 2f64.ln() / 3f64.ln(), epsilon = 0.02);
    }

    #[test]
    fn self_similarity_consistency() {
        for s in [0.4, 0.5, 0.6, LN_2] {
            let c = cantor_for_dimension(s, 14).unwrap();
            let est = box_dimension(&PointSet::from(&c), &c.scales()).unwrap();
            assert_abs_diff_eq!(est.slope, s, epsilon = 0.02);
            // N(ε) never increases with ε.
            assert!(est.counts.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn interval_and_point() {
        let unit = box_dimension(&PointSet::Intervals(vec![(0.0, 1.0)]), &decades(7)).unwrap();
        assert_abs_diff_eq!(unit.slope, 1.0, epsilon = 0.01);
        let point = box_dimension(&PointSet::Points(vec![0.37]), &decades(7)).unwrap();
        assert_abs_diff_eq!(point.slope, 0.0, epsilon = 0.01);
        assert!(box_dimension(&PointSet::Points(vec![]), &decades(7)).is_err());
        assert!(box_dimension(&PointSet::Points(vec![0.1]), &decades(5)).is_err());
        assert!(box_dimension(&PointSet::Points(vec![0.1]), &[0.1, 0.09, 0.08, 0.07, 0.06, 0.05]).is_err());
    }

    #[test]
    fn poor_fits_are_reported() {
        // Two clusters: N(ε) is flat and then jumps, which no line fits well.
        let mut points: Vec<f64> = (0..2000).map(|i| i as f64 * 1e-6).collect();
        points.push(0.9);
        let scales = [0.5, 0.3, 0.2, 0.1, 0.01, 1e-3, 1e-4, 1e-5, 1e-6];
        let res = box_dimension(&PointSet::Points(points), &scales);
        assert!(matches!(res, Err(Error::PoorFit { .. })), "{res:?}");
    }

    #[test]
    fn corollary_chain() {
        for s in [0.5, LN_2] {
            let c = corollary_check(s).unwrap();
            assert_abs_diff_eq!(c.dim_estimate, s, epsilon = 0.02);
            assert_abs_diff_eq!(c.entropy_estimate, s, epsilon = 0.02);
            assert_abs_diff_eq!(c.alpha, s.exp().min(2.0), epsilon = 1e-15);
        }
        assert!(corollary_check(1.2f64.ln()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn affine_rescaling_keeps_dimension(scale in 0.2f64..5.0, shift in -3.0f64..3.0) {
            let c = cantor_with_ratio(0.25, 12).unwrap();
            let base = box_dimension(&PointSet::from(&c), &c.scales()).unwrap();
            let moved = PointSet::Intervals(c.intervals.iter().map(|&(a, b)| (scale * a + shift, scale * b + shift)).collect());
            let scales: Vec<f64> = c.scales().iter().map(|e| e * scale).collect();
            let est = box_dimension(&moved, &scales).unwrap();
            prop_assert!((est.slope - base.slope).abs() <= 0.02);
        }
    }
}

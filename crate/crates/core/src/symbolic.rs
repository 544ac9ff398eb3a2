//! Arc partitions of the invariant sets, transition graphs and itinerary coding.
//!
//! `Λ_k` is cut at the folds into `2k - 2` arcs, numbered top to bottom, left
//! to right:
//!
//! * `I_0`: the left boundary loop, leaving `p_1` leftwards on the lower curve,
//!   crossing `Σ` at `r0` and returning to `p_1` on the upper curve;
//! * `I_{2j-1}`: the upper arc from `p_j` to `p_{j+1}`;
//! * `I_{2j}`: the lower arc from `p_{j+1}` back to `p_j`;
//! * `I_{2k-3}`: the right boundary loop through `r1`, based at `p_{k-1}`.
//!
//! Every arc is traversed in unit time. A petal system has one arc per petal,
//! all of them starting and ending at the origin.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt::Write;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::flow::Trajectory;
use crate::math;
use crate::model::{build_pk, fold_abscissa, rotate, Family, Psvf, Side};
use crate::poly::Polynomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArcKind {
    LeftLoop,
    Upper,
    Lower,
    RightLoop,
    Petal,
}

/// Which of the curves `y = P_k(x)` / `y = -P_k(x)` an arc lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    Upper,
    Lower,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    pub index: usize,
    pub kind: ArcKind,
    pub branch: Branch,
    /// Closed hull of the arc's abscissae (petals: local frame `[0, 2]`).
    pub x_range: (f64, f64),
    /// Fold index `j` of `p_j` where the arc starts; 0 stands for the petal junction.
    pub start: usize,
    pub end: usize,
}

impl Arc {
    /// Side of `Σ` the arc is on when it reaches its end point.
    pub fn arrival_side(&self) -> Side {
        match self.kind {
            ArcKind::LeftLoop | ArcKind::Upper => Side::Plus,
            ArcKind::Lower | ArcKind::RightLoop | ArcKind::Petal => Side::Minus,
        }
    }

    /// Side of `Σ` the arc is on when it leaves its start point.
    pub fn departure_side(&self) -> Side {
        match self.kind {
            ArcKind::LeftLoop | ArcKind::Lower => Side::Minus,
            ArcKind::Upper | ArcKind::RightLoop | ArcKind::Petal => Side::Plus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Location {
    Arc(usize),
    /// The fold `p_j`, 1-based.
    Fold(usize),
    /// The common point of all petals.
    Junction,
}

#[derive(Clone, Debug, PartialEq)]
enum Shape {
    Zk {
        pk: Polynomial,
        folds: Vec<f64>,
        r0: f64,
        r1: f64,
    },
    Petal {
        slope: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArcPartition {
    family: Family,
    k: u32,
    arcs: Vec<Arc>,
    shape: Shape,
}

impl ArcPartition {
    /// The `2k - 2` arcs of `Λ_k`.
    pub fn zk(k: u32) -> Result<Self> {
        let pk = build_pk(k)?;
        let m = 2 * k as usize - 2;
        let last_fold = k as usize - 1;
        let folds: Vec<f64> = (1..k).map(|j| fold_abscissa(k, j)).collect();
        let r1 = (k as f64 - 1.0) / 2.0;
        let r0 = -r1;
        let mut arcs = Vec::with_capacity(m);
        for index in 0..m {
            let arc = if index == 0 {
                Arc {
                    index,
                    kind: ArcKind::LeftLoop,
                    branch: Branch::Both,
                    x_range: (r0, folds[0]),
                    start: 1,
                    end: 1,
                }
            } else if index == m - 1 {
                Arc {
                    index,
                    kind: ArcKind::RightLoop,
                    branch: Branch::Both,
                    x_range: (folds[last_fold - 1], r1),
                    start: last_fold,
                    end: last_fold,
                }
            } else if index % 2 == 1 {
                let j = index.div_ceil(2);
                Arc {
                    index,
                    kind: ArcKind::Upper,
                    branch: Branch::Upper,
                    x_range: (folds[j - 1], folds[j]),
                    start: j,
                    end: j + 1,
                }
            } else {
                let j = index / 2;
                Arc {
                    index,
                    kind: ArcKind::Lower,
                    branch: Branch::Lower,
                    x_range: (folds[j - 1], folds[j]),
                    start: j + 1,
                    end: j,
                }
            };
            arcs.push(arc);
        }
        Ok(ArcPartition {
            family: Family::Zk,
            k,
            arcs,
            shape: Shape::Zk { pk, folds, r0, r1 },
        })
    }

    /// One arc per petal of a petal system.
    pub fn petal(psvf: &Psvf) -> Result<Self> {
        let (slope, _) = psvf
            .petal_shape()
            .ok_or_else(|| Error::invalid("family", "petal partition needs a petal system"))?;
        let arcs = (0..psvf.k() as usize)
            .map(|index| Arc {
                index,
                kind: ArcKind::Petal,
                branch: Branch::Both,
                x_range: (0.0, 2.0),
                start: 0,
                end: 0,
            })
            .collect();
        Ok(ArcPartition {
            family: Family::Petal,
            k: psvf.k(),
            arcs,
            shape: Shape::Petal { slope },
        })
    }

    pub fn for_system(psvf: &Psvf) -> Result<Self> {
        match psvf.family() {
            Family::Zk => Self::zk(psvf.k()),
            Family::Petal => Self::petal(psvf),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, index: usize) -> &Arc {
        &self.arcs[index]
    }

    /// `P_k` for a `Z_k` partition.
    pub fn pk(&self) -> Option<&Polynomial> {
        match &self.shape {
            Shape::Zk { pk, .. } => Some(pk),
            Shape::Petal { .. } => None,
        }
    }

    pub fn fold_x(&self, j: usize) -> f64 {
        match &self.shape {
            Shape::Zk { folds, .. } => folds[j - 1],
            Shape::Petal { .. } => 0.0,
        }
    }

    pub(crate) fn crossing_x(&self) -> (f64, f64) {
        match &self.shape {
            Shape::Zk { r0, r1, .. } => (*r0, *r1),
            Shape::Petal { .. } => (2.0, 2.0),
        }
    }

    pub(crate) fn petal_slope(&self) -> f64 {
        match &self.shape {
            Shape::Petal { slope } => *slope,
            Shape::Zk { .. } => 0.0,
        }
    }

    /// Arc leaving fold `p_j` leftwards (on `X-`).
    pub fn left_of(&self, j: usize) -> usize {
        if j == 1 {
            0
        } else {
            2 * j - 2
        }
    }

    /// Arc leaving fold `p_j` rightwards (on `X+`).
    pub fn right_of(&self, j: usize) -> usize {
        if j == self.k as usize - 1 {
            self.len() - 1
        } else {
            2 * j - 1
        }
    }

    /// Arcs that may follow `arc` once it reaches its end point, left-going first.
    pub fn next_arcs(&self, arc: usize) -> Vec<usize> {
        match self.family {
            Family::Zk => {
                let j = self.arcs[arc].end;
                vec![self.left_of(j), self.right_of(j)]
            }
            Family::Petal => (0..self.len()).collect(),
        }
    }

    /// Arcs that may leave a point: a fold `p_j` or the petal junction.
    pub fn departures(&self, at: Location) -> Vec<usize> {
        match at {
            Location::Fold(j) => vec![self.left_of(j), self.right_of(j)],
            Location::Junction => (0..self.len()).collect(),
            Location::Arc(a) => vec![a],
        }
    }

    pub fn transition_graph(&self) -> TransitionGraph {
        let m = self.len();
        let mut adjacency = vec![false; m * m];
        for a in 0..m {
            for b in self.next_arcs(a) {
                adjacency[a * m + b] = true;
            }
        }
        TransitionGraph { m, adjacency }
    }

    /// Arc, fold or junction containing a point of the invariant set.
    ///
    /// Points within `tol` of a fold (or of the origin for petals) are reported
    /// as such; every other point must lie within `tol` of the invariant set.
    pub fn locate(&self, point: (f64, f64), tol: f64) -> Result<Location> {
        let (x, y) = point;
        let off = Error::OffInvariantSet { x, y };
        match &self.shape {
            Shape::Zk { pk, folds, r0, r1 } => {
                if let Some(j) = folds.iter().position(|&p| math::abs(x - p) <= tol && math::abs(y) <= tol) {
                    return Ok(Location::Fold(j + 1));
                }
                if x < r0 - tol || x > r1 + tol || math::abs(math::abs(y) - pk.eval(x)) > tol {
                    return Err(off);
                }
                let m = self.len();
                if x < folds[0] {
                    return Ok(Location::Arc(0));
                }
                if x >= folds[folds.len() - 1] {
                    return Ok(Location::Arc(m - 1));
                }
                let j = folds.iter().rposition(|&p| p <= x).unwrap_or(0) + 1;
                // Between folds P_k > 0, so the sign of y picks the branch.
                Ok(Location::Arc(if y >= 0.0 { 2 * j - 1 } else { 2 * j }))
            }
            Shape::Petal { slope } => {
                if math::hypot(x, y) <= tol {
                    return Ok(Location::Junction);
                }
                let k = self.k as usize;
                let mut angle = math::atan2(y, x);
                if angle < 0.0 {
                    angle += 2.0 * PI;
                }
                let sector = (math::floor(angle * k as f64 / PI) as usize) % (2 * k);
                let petal = if sector % 2 == 0 { sector / 2 } else { sector.div_ceil(2) % k };
                let (u, v) = rotate(point, -2.0 * PI * petal as f64 / k as f64);
                let height = slope * (u - u * u / 2.0);
                if u < -tol || u > 2.0 + tol || math::abs(math::abs(v) - height) > tol {
                    return Err(off);
                }
                Ok(Location::Arc(petal))
            }
        }
    }
}

/// Directed graph on the symbols of a subshift of finite type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionGraph {
    m: usize,
    adjacency: Vec<bool>,
}

impl TransitionGraph {
    pub fn zk(k: u32) -> Result<Self> {
        Ok(ArcPartition::zk(k)?.transition_graph())
    }

    /// Complete graph: every petal may follow every petal through the origin.
    pub fn petal(k: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid("k", "k must be at least 2"));
        }
        let m = k as usize;
        Ok(TransitionGraph {
            m,
            adjacency: vec![true; m * m],
        })
    }

    /// Star graph: symbol 0 talks to everything, the others only return to 0.
    pub fn golden_mean(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid("m", "need at least two symbols"));
        }
        let mut adjacency = vec![false; m * m];
        for i in 0..m {
            adjacency[i] = true;
            adjacency[i * m] = true;
        }
        Ok(TransitionGraph { m, adjacency })
    }

    pub fn from_adjacency(m: usize, adjacency: Vec<bool>) -> Result<Self> {
        if m == 0 || adjacency.len() != m * m {
            return Err(Error::invalid("adjacency", "expected a nonempty square matrix"));
        }
        Ok(TransitionGraph { m, adjacency })
    }

    /// Support graph of a nonnegative row-major matrix.
    pub fn from_matrix(m: usize, entries: &[f64]) -> Result<Self> {
        Self::from_adjacency(m, entries.iter().map(|&a| a > 0.0).collect())
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        from < self.m && to < self.m && self.adjacency[from * self.m + to]
    }

    pub fn successors(&self, from: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.m).filter(move |&to| self.adjacency[from * self.m + to])
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().filter(|&&e| e).count()
    }

    /// 0/1 matrix in row-major order.
    pub fn to_matrix(&self) -> Vec<f64> {
        self.adjacency.iter().map(|&e| if e { 1.0 } else { 0.0 }).collect()
    }

    pub fn check_word(&self, word: &[usize]) -> Result<()> {
        if let Some(&s) = word.iter().find(|&&s| s >= self.m) {
            return Err(Error::Inadmissible { from: None, symbol: s });
        }
        for pair in word.windows(2) {
            if !self.has_edge(pair[0], pair[1]) {
                return Err(Error::Inadmissible {
                    from: Some(pair[0]),
                    symbol: pair[1],
                });
            }
        }
        Ok(())
    }

    /// Number of admissible words of length `n`: the entry sum of `A^{n-1}`.
    pub fn admissible_word_count(&self, n: usize) -> Result<BigUint> {
        if n == 0 {
            return Err(Error::invalid("n", "word length must be at least 1"));
        }
        let mut ending: Vec<BigUint> = vec![BigUint::from(1u32); self.m];
        for _ in 1..n {
            let mut next = vec![BigUint::zero(); self.m];
            for (from, count) in ending.iter().enumerate() {
                if count.is_zero() {
                    continue;
                }
                for to in self.successors(from) {
                    next[to] += count;
                }
            }
            ending = next;
        }
        Ok(ending.into_iter().sum())
    }

    /// `(1/n) log #words_n`.
    pub fn word_growth(&self, n: usize) -> Result<f64> {
        let count = self.admissible_word_count(n)?;
        if count.is_zero() {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(math::ln_biguint(&count) / n as f64)
    }

    /// Uniformly stepped random path of the given length.
    pub fn random_word<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Result<Vec<usize>> {
        let mut word = Vec::with_capacity(len);
        if len == 0 {
            return Ok(word);
        }
        word.push(rng.gen_range(0..self.m));
        while word.len() < len {
            let last = word[word.len() - 1];
            let next: Vec<usize> = self.successors(last).collect();
            if next.is_empty() {
                return Err(Error::Inadmissible { from: Some(last), symbol: last });
            }
            word.push(next[rng.gen_range(0..next.len())]);
        }
        Ok(word)
    }

    /// Graphviz rendering with nodes `I0 … I{m-1}`.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph {} {{", name);
        for i in 0..self.m {
            let _ = writeln!(out, "  I{};", i);
        }
        for i in 0..self.m {
            for j in self.successors(i) {
                let _ = writeln!(out, "  I{} -> I{};", i, j);
            }
        }
        out.push_str("}\n");
        out
    }
}

/// A finite window `s_base, …, s_{base+len-1}` of a bi-infinite itinerary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Itinerary {
    pub symbols: Vec<usize>,
    pub base: i64,
    pub alphabet: usize,
}

impl Itinerary {
    pub fn new(symbols: Vec<usize>, base: i64, alphabet: usize) -> Self {
        Itinerary { symbols, base, alphabet }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// `s_i`, if `i` falls inside the window.
    pub fn get(&self, i: i64) -> Option<usize> {
        let offset = i.checked_sub(self.base)?;
        usize::try_from(offset).ok().and_then(|o| self.symbols.get(o).copied())
    }

    /// Window `[base, base + len)` as an index range.
    pub fn range(&self) -> (i64, i64) {
        (self.base, self.base + self.symbols.len() as i64)
    }

    /// `σ(s)_i = s_{i+1}`: same symbols, window moved one step to the left.
    pub fn shift(&self) -> Itinerary {
        Itinerary {
            symbols: self.symbols.clone(),
            base: self.base - 1,
            alphabet: self.alphabet,
        }
    }

    /// Symbol-by-symbol equality on the common window; false if the windows do not overlap.
    pub fn agrees_with(&self, other: &Itinerary) -> bool {
        let lo = self.base.max(other.base);
        let hi = self.range().1.min(other.range().1);
        lo < hi && (lo..hi).all(|i| self.get(i) == other.get(i))
    }

    pub fn to_symbol_string(&self) -> String {
        let parts: Vec<String> = self.symbols.iter().map(|s| format!("{}", s)).collect();
        parts.join(" ")
    }
}

/// A truncated metric value together with a bound on the omitted terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Distance {
    pub value: f64,
    pub tail_bound: f64,
}

/// `Σ_{|i| <= w} |x_i - y_i| / 2^{|i|}`, with the tail bounded by `2 (A - 1) 2^{-w}`.
pub fn seq_distance(x: &Itinerary, y: &Itinerary, window: usize) -> Result<Distance> {
    let w = window as i64;
    for s in [x, y] {
        if s.get(-w).is_none() || s.get(w).is_none() {
            return Err(Error::invalid("window", "sequence is not defined on [-window, window]"));
        }
    }
    let mut value = 0.0;
    for i in -w..=w {
        let (a, b) = (x.get(i).unwrap_or(0), y.get(i).unwrap_or(0));
        let diff = a.abs_diff(b) as f64;
        value += diff / math::powi2(i.unsigned_abs());
    }
    let alphabet = x.alphabet.max(y.alphabet).max(1);
    let tail_bound = 2.0 * (alphabet - 1) as f64 / math::powi2(window as u64);
    Ok(Distance { value, tail_bound })
}

/// Tolerance for recognising folds and junctions on integrated trajectories.
pub const LOCATE_TOL: f64 = 1e-6;

/// Itinerary of a trajectory at the integer times of its range.
///
/// The symbol at time `j` is the arc containing `γ(j)`; when `γ(j)` is a fold
/// (or the petal junction) it is the arc containing `γ(j + 1/2)`.
pub fn itinerary(traj: &Trajectory, partition: &ArcPartition) -> Result<Itinerary> {
    let (start, end) = traj.time_range();
    let first = math::ceil(start - 1e-9) as i64;
    let mut symbols = Vec::new();
    let mut j = first;
    while j as f64 <= end + 1e-9 {
        let t = (j as f64).clamp(start, end);
        let symbol = match partition.locate(traj.position_at(t)?, LOCATE_TOL)? {
            Location::Arc(a) => a,
            Location::Fold(_) | Location::Junction => {
                let half = t + 0.5;
                if half > end {
                    break;
                }
                match partition.locate(traj.position_at(half)?, LOCATE_TOL)? {
                    Location::Arc(a) => a,
                    _ => {
                        let (x, y) = traj.position_at(half)?;
                        return Err(Error::OffInvariantSet { x, y });
                    }
                }
            }
        };
        symbols.push(symbol);
        j += 1;
    }
    Ok(Itinerary::new(symbols, first, partition.len()))
}

/// Hausdorff distance between two finite point sets in the plane.
pub fn hausdorff(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    fn directed(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
        a.iter()
            .map(|p| {
                b.iter()
                    .map(|q| math::hypot(p.0 - q.0, p.1 - q.1))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }
    directed(a, b).max(directed(b, a))
}

/// Time step used to sample unit segments for [`traj_distance`].
pub const SEGMENT_DT: f64 = 1e-3;

fn segment_samples(traj: &Trajectory, i: i64) -> Result<Vec<(f64, f64)>> {
    let n = math::round(1.0 / SEGMENT_DT) as usize;
    (0..=n)
        .map(|s| traj.position_at(i as f64 + s as f64 / n as f64))
        .collect()
}

fn check_anchored(traj: &Trajectory, partition: &ArcPartition) -> Result<()> {
    let t = traj.time_range().0;
    match partition.locate(traj.position_at(t)?, LOCATE_TOL) {
        Ok(Location::Fold(_)) | Ok(Location::Junction) => Ok(()),
        _ => Err(Error::Unanchored { t }),
    }
}

/// `Σ_i d_H(γ1[i, i+1], γ2[i, i+1]) / 2^{|i|}` over the unit segments in `[-w, w)`
/// covered by both trajectories, each segment sampled every [`SEGMENT_DT`].
///
/// Both trajectories must start at a fold (or the petal junction). The tail
/// bound uses the diameter of the sampled segments.
pub fn traj_distance(
    a: &Trajectory,
    b: &Trajectory,
    partition: &ArcPartition,
    window: usize,
) -> Result<Distance> {
    check_anchored(a, partition)?;
    check_anchored(b, partition)?;
    let lo = a.time_range().0.max(b.time_range().0);
    let hi = a.time_range().1.min(b.time_range().1);
    let w = window as i64;
    let first = (math::ceil(lo - 1e-9) as i64).max(-w);
    let last = (math::floor(hi + 1e-9) as i64).min(w);
    if first >= last {
        return Err(Error::invalid("window", "trajectories share no unit segment"));
    }
    let mut value = 0.0;
    let mut diameter: f64 = 0.0;
    for i in first..last {
        let sa = segment_samples(a, i)?;
        let sb = segment_samples(b, i)?;
        for p in sa.iter().chain(sb.iter()) {
            diameter = diameter.max(math::hypot(p.0, p.1));
        }
        value += hausdorff(&sa, &sb) / math::powi2(i.unsigned_abs());
    }
    // Segments outside [first, last) are at most one diameter apart each.
    let omitted: f64 = (-w - 64..first)
        .chain(last..w + 64)
        .map(|i| 1.0 / math::powi2(i.unsigned_abs()))
        .sum();
    Ok(Distance {
        value,
        tail_bound: 2.0 * diameter * omitted,
    })
}

/// Checks `itinerary(γ(· + 1)) = σ(itinerary(γ))` on the common window.
pub fn verify_conjugacy(traj: &Trajectory, partition: &ArcPartition) -> Result<bool> {
    let s = itinerary(traj, partition)?;
    let shifted = itinerary(&traj.shifted(1.0)?, partition)?;
    Ok(shifted.agrees_with(&s.shift()))
}

/// Distinct symbols appearing in an itinerary.
pub fn alphabet_used(s: &Itinerary) -> BTreeSet<usize> {
    s.symbols.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    extern crate std;

    use super::*;
    use crate::model::{build_petal_system, build_zk};
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    /// Counts paths by enumerating every word of length n, independent of the DP.
    fn brute_force_paths(g: &TransitionGraph, n: usize) -> usize {
        let m = g.size();
        let total = m.pow(n as u32);
        (0..total)
            .filter(|&code| {
                let word: Vec<usize> = (0..n).map(|i| (code / m.pow(i as u32)) % m).collect();
                g.check_word(&word).is_ok()
            })
            .count()
    }

    #[test]
    fn arc_counts() {
        for k in 2..=6u32 {
            let p = ArcPartition::zk(k).unwrap();
            assert_eq!(p.len(), 2 * k as usize - 2);
        }
        let p2 = ArcPartition::zk(2).unwrap();
        assert_eq!(p2.arc(0).kind, ArcKind::LeftLoop);
        assert_eq!(p2.arc(1).kind, ArcKind::RightLoop);
    }

    #[test]
    fn k3_graph_is_the_displayed_matrix() {
        let g = TransitionGraph::zk(3).unwrap();
        let expected = [1., 1., 0., 0., 0., 0., 1., 1., 1., 1., 0., 0., 0., 0., 1., 1.];
        assert_eq!(g.to_matrix(), expected);
    }

    #[test]
    fn word_counts_match_enumeration() {
        let g = TransitionGraph::zk(3).unwrap();
        assert_eq!(g.admissible_word_count(2).unwrap(), BigUint::from(8u32));
        for n in 1..=6 {
            assert_eq!(g.admissible_word_count(n).unwrap(), BigUint::from(brute_force_paths(&g, n)));
        }
        let gm = TransitionGraph::golden_mean(4).unwrap();
        for n in 1..=6 {
            assert_eq!(gm.admissible_word_count(n).unwrap(), BigUint::from(brute_force_paths(&gm, n)));
        }
        let full = TransitionGraph::petal(3).unwrap();
        assert_eq!(full.admissible_word_count(5).unwrap(), BigUint::from(243u32));
        assert!(g.admissible_word_count(0).is_err());
    }

    #[test]
    fn golden_mean_ratio_tends_to_eigenvalue() {
        let gm = TransitionGraph::golden_mean(4).unwrap();
        let a = gm.admissible_word_count(60).unwrap();
        let b = gm.admissible_word_count(61).unwrap();
        let ratio = (b * BigUint::from(1_000_000_000u64) / a).to_f64().unwrap() / 1e9;
        assert!((ratio - (1.0 + 13f64.sqrt()) / 2.0).abs() < 1e-8, "{ratio}");
    }

    #[test]
    fn word_growth_uses_big_integers() {
        let full = TransitionGraph::petal(3).unwrap();
        assert!((full.word_growth(400).unwrap() - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn locate_on_z3() {
        let p = ArcPartition::zk(3).unwrap();
        let pk = p.pk().unwrap().clone();
        assert_eq!(p.locate((-0.5, 0.0), 1e-9).unwrap(), Location::Fold(1));
        assert_eq!(p.locate((0.0, pk.eval(0.0)), 1e-9).unwrap(), Location::Arc(1));
        assert_eq!(p.locate((0.0, -pk.eval(0.0)), 1e-9).unwrap(), Location::Arc(2));
        assert_eq!(p.locate((-0.8, pk.eval(-0.8)), 1e-9).unwrap(), Location::Arc(0));
        assert_eq!(p.locate((0.8, -pk.eval(0.8)), 1e-9).unwrap(), Location::Arc(3));
        assert_eq!(p.locate((-1.0, 0.0), 1e-9).unwrap(), Location::Arc(0));
        assert!(p.locate((0.0, 1.0), 1e-9).is_err());
        assert!(p.locate((2.0, 0.0), 1e-9).is_err());
    }

    #[test]
    fn locate_on_petals() {
        let psvf = build_petal_system(3).unwrap();
        let p = ArcPartition::petal(&psvf).unwrap();
        assert_eq!(p.locate((0.0, 0.0), 1e-9).unwrap(), Location::Junction);
        assert_eq!(p.locate((2.0, 0.0), 1e-9).unwrap(), Location::Arc(0));
        let tip = rotate((2.0, 0.0), 2.0 * PI / 3.0);
        assert_eq!(p.locate(tip, 1e-9).unwrap(), Location::Arc(1));
        let low = rotate((1.0, -0.5), 4.0 * PI / 3.0);
        assert_eq!(p.locate(low, 1e-9).unwrap(), Location::Arc(2));
    }

    #[test]
    fn departures_follow_direction() {
        let p = ArcPartition::zk(4).unwrap();
        assert_eq!(p.departures(Location::Fold(1)), vec![0, 1]);
        assert_eq!(p.departures(Location::Fold(2)), vec![2, 3]);
        assert_eq!(p.departures(Location::Fold(3)), vec![4, 5]);
        assert_eq!(p.arc(2).end, 1);
        assert_eq!(p.arc(3).end, 3);
    }

    #[test]
    fn sequence_metric_examples() {
        let base = Itinerary::new(vec![0; 7], -3, 4);
        let mut centre = base.clone();
        centre.symbols[3] = 1;
        let mut sides = base.clone();
        sides.symbols[2] = 1;
        sides.symbols[4] = 1;
        assert_eq!(seq_distance(&base, &base, 3).unwrap().value, 0.0);
        assert_eq!(seq_distance(&base, &centre, 3).unwrap().value, 1.0);
        assert_eq!(seq_distance(&base, &sides, 3).unwrap().value, 1.0);
        assert_eq!(seq_distance(&base, &base, 3).unwrap().tail_bound, 6.0 / 8.0);
        assert!(seq_distance(&base, &base, 4).is_err());
    }

    #[test]
    fn shift_moves_the_window() {
        let s = Itinerary::new(vec![0, 1, 2, 3], 0, 4);
        let t = s.shift();
        assert_eq!(t.get(0), Some(1));
        assert_eq!(t.get(-1), Some(0));
        let tail = Itinerary::new(vec![1, 2, 3], 0, 4);
        assert!(tail.agrees_with(&t));
        assert!(!tail.agrees_with(&s));
    }

    #[test]
    fn dot_output_lists_edges() {
        let dot = TransitionGraph::zk(3).unwrap().to_dot("Z3");
        assert!(dot.contains("I0 -> I1;"));
        assert!(dot.contains("I3 -> I2;"));
        assert!(!dot.contains("I0 -> I2;"));
        assert_eq!(dot.matches("->").count(), 8);
    }

    #[test]
    fn hausdorff_of_nested_samplings() {
        let fine: Vec<(f64, f64)> = (0..=100).map(|i| (i as f64 / 100.0, 0.0)).collect();
        let coarse: Vec<(f64, f64)> = (0..=10).map(|i| (i as f64 / 10.0, 0.0)).collect();
        assert!((hausdorff(&fine, &coarse) - 0.05).abs() < 1e-12);
        assert_eq!(hausdorff(&fine, &coarse), hausdorff(&coarse, &fine));
    }

    #[test]
    fn partition_matches_system() {
        let z = build_zk(4).unwrap();
        let p = ArcPartition::for_system(&z).unwrap();
        for (j, &x) in z.fold_abscissae().iter().enumerate() {
            assert_eq!(p.fold_x(j + 1), x);
        }
    }

    fn itinerary_strategy() -> impl Strategy<Value = Itinerary> {
        proptest::collection::vec(0usize..4, 11).prop_map(|s| Itinerary::new(s, -5, 4))
    }

    proptest! {
        #[test]
        fn seq_distance_is_a_metric(x in itinerary_strategy(), y in itinerary_strategy(), z in itinerary_strategy()) {
            let d = |a: &Itinerary, b: &Itinerary| seq_distance(a, b, 5).unwrap().value;
            prop_assert!(d(&x, &x).abs() <= 1e-12);
            prop_assert!((d(&x, &y) - d(&y, &x)).abs() <= 1e-12);
            prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
            if x != y {
                prop_assert!(d(&x, &y) > 0.0);
            }
        }
    }
}

//! Transfer matrices of the geometric potential and their Perron-Frobenius data.
//!
//! For a Markov partition `P_1, …, P_m` of the invariant set the potential
//! `-β log |det J T_1|` is represented by the matrix with entries
//! `A_ij = (μ(P_j ∩ T_1^{-1} P_i) / μ(P_j))^β`, and the pressure is `log ρ(A)`.
//! The measure ratios are branch probabilities: the families below take them as
//! parameters, and [`empirical_matrix`] estimates them by sampling the flow with
//! normalized arc length as reference measure.
//!
//! `0^0` is taken to be `0`, so zero-probability transitions stay forbidden at
//! `β = 0` and the `β = 0` matrix is exactly the adjacency of the support.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{self, arc_point, BranchPolicy, Brancher};
use crate::math;
use crate::model::Psvf;
use crate::symbolic::{ArcKind, ArcPartition, TransitionGraph};

/// Default spectral tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Power iteration cap.
pub const MAX_ITERATIONS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    PetalCirculant { p: Vec<f64> },
    ZkArcs { k: u32, p1: f64, p2: f64 },
    Z2 { p1: f64 },
    Empirical { samples: usize },
    Weighted,
}

/// A nonnegative square matrix in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    n: usize,
    entries: Vec<f64>,
    beta: f64,
    provenance: Provenance,
}

/// `p^β` with `0^β = 0` for every `β`, including `β = 0`.
pub fn beta_pow(p: f64, beta: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        math::powf(p, beta)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid("beta", "must be finite and nonnegative"));
    }
    Ok(())
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(name, "must lie in [0, 1]"));
    }
    Ok(())
}

impl TransferMatrix {
    pub fn new(n: usize, entries: Vec<f64>, beta: f64, provenance: Provenance) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::invalid("entries", "expected a nonempty square matrix"));
        }
        if entries.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::invalid("entries", "entries must be finite and nonnegative"));
        }
        Ok(TransferMatrix {
            n,
            entries,
            beta,
            provenance,
        })
    }

    /// 0/1 matrix of a transition graph (the `β = 0` matrix of any positive weighting).
    pub fn adjacency(graph: &TransitionGraph) -> Self {
        TransferMatrix {
            n: graph.size(),
            entries: graph.to_matrix(),
            beta: 0.0,
            provenance: Provenance::Weighted,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.n)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.rows().map(|r| r.iter().sum()).collect()
    }

    pub fn is_stochastic(&self, tol: f64) -> bool {
        self.row_sums().iter().all(|s| math::abs(s - 1.0) <= tol)
    }

    pub fn support(&self) -> TransitionGraph {
        TransitionGraph::from_matrix(self.n, &self.entries).expect("square by construction")
    }

    /// Zeroes every entry outside the edges of `graph`.
    pub fn restrict(&self, graph: &TransitionGraph) -> Result<Self> {
        if graph.size() != self.n {
            return Err(Error::invalid("graph", "graph size does not match the matrix"));
        }
        let mut out = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                if !graph.has_edge(i, j) {
                    out.entries[i * self.n + j] = 0.0;
                }
            }
        }
        Ok(out)
    }

    pub fn spectral_radius(&self, tol: f64) -> Result<SpectralResult> {
        spectral_radius(self, tol)
    }
}

/// Circulant matrix with row `i` equal to `(p_1^β, …, p_m^β)` shifted right by `i`.
pub fn petal_matrix(p: &[f64], beta: f64) -> Result<TransferMatrix> {
    check_beta(beta)?;
    if p.is_empty() || p.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::invalid("p", "probabilities must be nonnegative"));
    }
    if math::abs(p.iter().sum::<f64>() - 1.0) > 1e-12 {
        return Err(Error::invalid("p", "probabilities must sum to 1"));
    }
    let m = p.len();
    let mut entries = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            entries[i * m + j] = beta_pow(p[(j + m - i) % m], beta);
        }
    }
    TransferMatrix::new(m, entries, beta, Provenance::PetalCirculant { p: p.to_vec() })
}

/// The `(2k - 2)`-square matrix over the arcs of `Λ_k`.
///
/// At the end of each arc the orbit either turns back onto the arc of the
/// opposite branch or continues in the same direction. Boundary loops turn back
/// (onto themselves) with probability `p1`, interior arcs with probability `p2`.
/// For `k = 2` both arcs are loops and `p2` is unused.
pub fn zk_matrix(k: u32, p1: f64, p2: f64, beta: f64) -> Result<TransferMatrix> {
    check_beta(beta)?;
    check_probability("p1", p1)?;
    check_probability("p2", p2)?;
    let partition = ArcPartition::zk(k)?;
    let m = partition.len();
    let mut entries = vec![0.0; m * m];
    for a in 0..m {
        let arc = partition.arc(a);
        let own = match arc.kind {
            ArcKind::LeftLoop | ArcKind::RightLoop => p1,
            _ => p2,
        };
        let next = partition.next_arcs(a);
        let (back, on) = match arc.arrival_side() {
            crate::model::Side::Plus => (next[0], next[1]),
            crate::model::Side::Minus => (next[1], next[0]),
        };
        entries[a * m + back] = beta_pow(own, beta);
        entries[a * m + on] = beta_pow(1.0 - own, beta);
    }
    let provenance = if k == 2 {
        Provenance::Z2 { p1 }
    } else {
        Provenance::ZkArcs { k, p1, p2 }
    };
    TransferMatrix::new(m, entries, beta, provenance)
}

/// `(p_1, 1 - p_1; 1 - p_1, p_1)^β`.
pub fn z2_matrix(p1: f64, beta: f64) -> Result<TransferMatrix> {
    zk_matrix(2, p1, 1.0 - p1, beta)
}

/// Weights raised to `β` on the edges of `graph`, zero elsewhere.
pub fn weighted_matrix(graph: &TransitionGraph, weights: &[f64], beta: f64) -> Result<TransferMatrix> {
    check_beta(beta)?;
    let m = graph.size();
    if weights.len() != m * m {
        return Err(Error::invalid("weights", "expected an m × m weight matrix"));
    }
    let mut entries = vec![0.0; m * m];
    for i in 0..m {
        for j in graph.successors(i) {
            entries[i * m + j] = beta_pow(weights[i * m + j], beta);
        }
    }
    TransferMatrix::new(m, entries, beta, Provenance::Weighted)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub radius: f64,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
    pub iterations: usize,
    /// `max(‖A r - ρ r‖∞, ‖Aᵀ l - ρ l‖∞)` for the returned (sum-normalized) vectors.
    pub residual: f64,
}

/// Reachability closure of the support digraph (`reach[i*n + j]`: path of length >= 1).
fn reachability(n: usize, entries: &[f64]) -> Vec<bool> {
    let mut reach: Vec<bool> = entries.iter().map(|&a| a > 0.0).collect();
    for m in 0..n {
        for i in 0..n {
            if reach[i * n + m] {
                for j in 0..n {
                    if reach[m * n + j] {
                        reach[i * n + j] = true;
                    }
                }
            }
        }
    }
    reach
}

/// Strongly connected classes, each listed in increasing node order.
fn classes(n: usize, reach: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let class: Vec<usize> = (i..n)
            .filter(|&j| j == i || (reach[i * n + j] && reach[j * n + i]))
            .collect();
        for &j in &class {
            seen[j] = true;
        }
        out.push(class);
    }
    out
}

/// Strong connectivity of the support. A 1×1 matrix counts as irreducible.
pub fn is_irreducible_dense(n: usize, entries: &[f64]) -> bool {
    if n == 1 {
        return true;
    }
    reachability(n, entries).iter().all(|&r| r)
}

pub fn is_irreducible(a: &TransferMatrix) -> bool {
    is_irreducible_dense(a.n, &a.entries)
}

fn submatrix(n: usize, entries: &[f64], rows: &[usize], cols: &[usize]) -> Vec<f64> {
    rows.iter()
        .flat_map(|&i| cols.iter().map(move |&j| entries[i * n + j]))
        .collect()
}

/// Perron root and vector of an irreducible matrix by shifted power iteration.
///
/// The shift `s = max_row_sum / 2` makes `B + sI` primitive. Each iterate
/// brackets `λ + s` between the min and max of the Collatz-Wielandt ratios.
fn perron_irreducible(c: usize, b: &[f64], tol: f64, iterations: &mut usize) -> Result<(f64, Vec<f64>)> {
    let max_row = b.chunks(c).map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max);
    let shift = 0.5 * max_row;
    let mut v = vec![1.0; c];
    let mut w = vec![0.0; c];
    let mut gap = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        *iterations += 1;
        for i in 0..c {
            w[i] = shift * v[i] + b[i * c..(i + 1) * c].iter().zip(&v).map(|(a, x)| a * x).sum::<f64>();
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..c {
            let r = w[i] / v[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let scale = w.iter().fold(0.0, |m: f64, x| m.max(*x));
        for i in 0..c {
            v[i] = w[i] / scale;
        }
        let radius = 0.5 * (lo + hi) - shift;
        gap = hi - lo;
        if gap <= tol * radius.max(1.0) {
            return Ok((radius.max(0.0), v));
        }
    }
    Err(Error::NoConvergence {
        iterations: *iterations,
        gap,
    })
}

/// Solves `m x = rhs` by Gaussian elimination with partial pivoting.
fn solve(n: usize, mut m: Vec<f64>, mut rhs: Vec<f64>) -> Vec<f64> {
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| math::abs(m[a * n + col]).total_cmp(&math::abs(m[b * n + col])))
            .unwrap_or(col);
        if pivot != col {
            for j in 0..n {
                m.swap(col * n + j, pivot * n + j);
            }
            rhs.swap(col, pivot);
        }
        let d = m[col * n + col];
        for row in col + 1..n {
            let f = m[row * n + col] / d;
            if f != 0.0 {
                for j in col..n {
                    m[row * n + j] -= f * m[col * n + j];
                }
                rhs[row] -= f * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|j| m[row * n + j] * x[j]).sum();
        x[row] = (rhs[row] - s) / m[row * n + row];
    }
    x
}

/// Radius and right Perron vector of an arbitrary nonnegative matrix.
fn right_perron(n: usize, entries: &[f64], tol: f64, iterations: &mut usize) -> Result<(f64, Vec<f64>)> {
    if entries.iter().all(|&a| a == 0.0) {
        return Ok((0.0, vec![0.0; n]));
    }
    let reach = reachability(n, entries);
    let classes = classes(n, &reach);
    let mut radii = Vec::with_capacity(classes.len());
    let mut vectors = Vec::with_capacity(classes.len());
    for class in &classes {
        let trivial = class.len() == 1 && entries[class[0] * n + class[0]] == 0.0;
        if trivial {
            radii.push(0.0);
            vectors.push(vec![1.0]);
        } else {
            let b = submatrix(n, entries, class, class);
            let (r, v) = perron_irreducible(class.len(), &b, tol, iterations)?;
            radii.push(r);
            vectors.push(v);
        }
    }
    let rho = radii.iter().fold(0.0, |m: f64, r| m.max(*r));
    let mut v = vec![0.0; n];
    if rho == 0.0 {
        // Nilpotent: a node without incoming edges gives A e_j = 0.
        let j = (0..n).find(|&j| (0..n).all(|i| entries[i * n + j] == 0.0)).unwrap_or(0);
        v[j] = 1.0;
        return Ok((0.0, v));
    }
    let top: Vec<usize> = (0..classes.len())
        .filter(|&c| radii[c] >= rho - tol * rho.max(1.0) * 16.0)
        .collect();
    let upstream = |of: usize, by: usize| reach[classes[by][0] * n + classes[of][0]];
    // A top class with no other top class upstream keeps ρI - A_UU invertible.
    let chosen = *top
        .iter()
        .find(|&&c| top.iter().all(|&d| d == c || !upstream(c, d)))
        .unwrap_or(&top[0]);
    let class = &classes[chosen];
    for (idx, &i) in class.iter().enumerate() {
        v[i] = vectors[chosen][idx];
    }
    let head = class[0];
    let up: Vec<usize> = (0..n)
        .filter(|&i| !class.contains(&i) && reach[i * n + head])
        .collect();
    if !up.is_empty() {
        let u = up.len();
        let mut m = submatrix(n, entries, &up, &up);
        for x in m.iter_mut() {
            *x = -*x;
        }
        for i in 0..u {
            m[i * u + i] += rho;
        }
        let rhs: Vec<f64> = up
            .iter()
            .map(|&i| class.iter().map(|&j| entries[i * n + j] * v[j]).sum())
            .collect();
        for (&i, x) in up.iter().zip(solve(u, m, rhs)) {
            v[i] = x.max(0.0);
        }
    }
    Ok((rho, v))
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        for x in v.iter_mut() {
            *x /= s;
        }
    }
}

fn residual(n: usize, entries: &[f64], rho: f64, v: &[f64], transpose: bool) -> f64 {
    (0..n)
        .map(|i| {
            let av: f64 = (0..n)
                .map(|j| if transpose { entries[j * n + i] } else { entries[i * n + j] } * v[j])
                .sum();
            math::abs(av - rho * v[i])
        })
        .fold(0.0, f64::max)
}

/// Spectral radius with right and left Perron vectors of a dense nonnegative matrix.
pub fn spectral_radius_dense(n: usize, entries: &[f64], tol: f64) -> Result<SpectralResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid("tol", "must be positive"));
    }
    if n == 0 || entries.len() != n * n || entries.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(Error::invalid("entries", "expected a nonnegative square matrix"));
    }
    let mut iterations = 0;
    let (rho, mut right) = right_perron(n, entries, tol, &mut iterations)?;
    let transposed: Vec<f64> = (0..n * n).map(|idx| entries[(idx % n) * n + idx / n]).collect();
    let (rho_t, mut left) = right_perron(n, &transposed, tol, &mut iterations)?;
    let radius = 0.5 * (rho + rho_t);
    normalize(&mut right);
    normalize(&mut left);
    let res = residual(n, entries, radius, &right, false).max(residual(n, entries, radius, &left, true));
    Ok(SpectralResult {
        radius,
        right,
        left,
        iterations,
        residual: res,
    })
}

pub fn spectral_radius(a: &TransferMatrix, tol: f64) -> Result<SpectralResult> {
    spectral_radius_dense(a.n, &a.entries, tol)
}

/// Parameterized matrix families for pressure curves.
#[derive(Clone, Debug, PartialEq)]
pub enum MatrixFamily {
    Petal { p: Vec<f64> },
    Zk { k: u32, p1: f64, p2: f64 },
    /// Arbitrary weights on the edges of a graph (e.g. a restricted petal system).
    Weighted { graph: TransitionGraph, weights: Vec<f64> },
}

impl MatrixFamily {
    pub fn matrix(&self, beta: f64) -> Result<TransferMatrix> {
        match self {
            MatrixFamily::Petal { p } => petal_matrix(p, beta),
            MatrixFamily::Zk { k, p1, p2 } => zk_matrix(*k, *p1, *p2, beta),
            MatrixFamily::Weighted { graph, weights } => weighted_matrix(graph, weights, beta),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressurePoint {
    pub beta: f64,
    pub pressure: f64,
    pub radius: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureCurve {
    pub points: Vec<PressurePoint>,
}

impl PressureCurve {
    /// Topological entropy: the pressure at `β = 0`, if the grid contains it.
    pub fn entropy(&self) -> Option<f64> {
        self.points.iter().find(|p| p.beta == 0.0).map(|p| p.pressure)
    }
}

/// `β ↦ log ρ(A_β)` over a grid, in grid order.
pub fn pressure_curve(family: &MatrixFamily, betas: &[f64]) -> Result<PressureCurve> {
    let points = betas
        .iter()
        .map(|&beta| {
            let s = spectral_radius(&family.matrix(beta)?, DEFAULT_TOL)?;
            Ok(PressurePoint {
                beta,
                pressure: math::ln(s.radius),
                radius: s.radius,
                residual: s.residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PressureCurve { points })
}

/// Monte-Carlo transfer matrix together with its raw counts.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMatrix {
    pub matrix: TransferMatrix,
    /// Row-major landing counts.
    pub counts: Vec<u64>,
    /// Samples drawn in each source arc.
    pub per_row: usize,
    /// False when the sampled support is not strongly connected.
    pub irreducible: bool,
}

/// Minimum sample budget for [`empirical_matrix`].
pub const MIN_SAMPLES: usize = 10_000;
const ARC_TABLE: usize = 2048;

/// Cumulative arc length along an arc, parameterized by traversal time.
fn arc_length_table(partition: &ArcPartition, arc: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(ARC_TABLE + 1);
    table.push(0.0);
    let mut prev = arc_point(partition, arc, 0.0);
    let mut total = 0.0;
    for i in 1..=ARC_TABLE {
        let p = arc_point(partition, arc, i as f64 / ARC_TABLE as f64);
        total += math::hypot(p.0 - prev.0, p.1 - prev.1);
        table.push(total);
        prev = p;
    }
    table
}

/// Traversal time at which the arc length reaches `length`.
fn time_at_length(table: &[f64], length: f64) -> f64 {
    let i = table.partition_point(|&l| l <= length).clamp(1, table.len() - 1);
    let (l0, l1) = (table[i - 1], table[i]);
    let frac = if l1 > l0 { (length - l0) / (l1 - l0) } else { 0.0 };
    ((i - 1) as f64 + frac) / (table.len() - 1) as f64
}

/// Estimates the transfer matrix by flowing sampled points for unit time.
///
/// `n_samples` is the total budget, split evenly over the arcs. Starting points
/// are uniform in arc length on each arc; each is flowed for time 1 with the
/// weighted branch policy and its landing arc recorded. Entries are the
/// landing frequencies raised to `β`.
pub fn empirical_matrix(
    psvf: &Psvf,
    partition: &ArcPartition,
    beta: f64,
    n_samples: usize,
    weights: &[f64],
    seed: u64,
) -> Result<EmpiricalMatrix> {
    check_beta(beta)?;
    if n_samples < MIN_SAMPLES {
        return Err(Error::invalid("n_samples", "at least 10^4 samples are required"));
    }
    let m = partition.len();
    let per_row = n_samples / m;
    let policy = BranchPolicy::RandomWeighted {
        weights: weights.to_vec(),
        seed: seed.wrapping_add(1),
    };
    let mut brancher = Brancher::new(policy, partition)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; m * m];
    for a in 0..m {
        let table = arc_length_table(partition, a);
        let total = table[table.len() - 1];
        for _ in 0..per_row {
            let s = time_at_length(&table, rng.gen::<f64>() * total);
            let b = flow::land_after(psvf, partition, a, s, 1.0, flow::MAX_DT, &mut brancher)?;
            counts[a * m + b] += 1;
        }
    }
    let entries = counts
        .iter()
        .map(|&c| beta_pow(c as f64 / per_row as f64, beta))
        .collect();
    let matrix = TransferMatrix::new(m, entries, beta, Provenance::Empirical { samples: per_row * m })?;
    let irreducible = is_irreducible(&matrix);
    Ok(EmpiricalMatrix {
        matrix,
        counts,
        per_row,
        irreducible,
    })
}

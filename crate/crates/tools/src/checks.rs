//! The acceptance suite, shared by `psvf verify` and the acceptance tests.

use std::f64::consts::LN_2;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use psvf_core::dimension::corollary_estimates;
use psvf_core::flow::{arc_point, integrate};
use psvf_core::model::build_zk;
use psvf_core::symbolic::{itinerary, verify_conjugacy};
use psvf_core::tent::{entropy_lap, entropy_separated};
use psvf_core::transfer::{
    empirical_matrix, petal_matrix, spectral_radius, spectral_radius_dense, zk_matrix, TransferMatrix, DEFAULT_TOL,
};
use psvf_core::{ArcPartition, BranchPolicy, TransitionGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::oracle;

pub const GOLDEN_RHO: f64 = 2.302_775_637_731_995;
pub const GOLDEN_ENTROPY: f64 = 0.834_115_194_352_401_2;
pub const EXACT_TOL: f64 = 1e-9;
pub const GOLDEN_BUDGET: Duration = Duration::from_millis(1);
pub const CLOSED_FORM_TOL: f64 = 1e-8;
pub const CLOSED_FORM_BUDGET: Duration = Duration::from_secs(1);
pub const NULLITY_TOL: f64 = 1e-9;
pub const NULLITY_CASES: usize = 100;
pub const PF_CASES: usize = 1000;
pub const PF_MAX_DIM: usize = 12;
pub const PF_SLACK: f64 = 1e-9;
pub const ORACLE_TOL: f64 = 1e-8;
pub const CONJUGACY_WORDS: usize = 100;
pub const CONJUGACY_LEN: usize = 50;
pub const CONJUGACY_BUDGET: Duration = Duration::from_secs(30);
pub const FOLD_HORIZON: f64 = 20.0;
pub const FOLD_GAP_TOL: f64 = 1e-6;
pub const WORD_COUNT_LEN: usize = 30;
pub const WORD_COUNT_TOL: f64 = 0.05;
pub const TENT_ALPHAS: [f64; 4] = [1.2, 1.5, 1.9, 2.0];
pub const TENT_LAPS: (usize, usize) = (10, 22);
pub const TENT_LAP_TOL: f64 = 0.01;
pub const TENT_SEPARATED_N: usize = 12;
pub const TENT_SEPARATED_EPS: f64 = 0.01;
pub const TENT_SEPARATED_TOL: f64 = 0.12;
pub const TENT_BUDGET: Duration = Duration::from_secs(60);
pub const COROLLARY_S: [f64; 4] = [0.4, 0.5, 0.6, LN_2];
pub const COROLLARY_TOL: f64 = 0.02;
pub const EMPIRICAL_SAMPLES: usize = 100_000;
pub const EMPIRICAL_P: (f64, f64) = (0.3, 0.65);
pub const EMPIRICAL_SE: f64 = 3.0;

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub id: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl CheckReport {
    pub fn line(&self) -> String {
        format!(
            "{} {:<18} {} [{:.3} s]",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

fn timed(id: &'static str, f: impl FnOnce() -> (bool, String)) -> CheckReport {
    let start = Instant::now();
    let (passed, detail) = f();
    CheckReport {
        id,
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

pub type Check = fn() -> CheckReport;

pub const ALL: [(&str, Check); 11] = [
    ("golden-mean", golden_mean),
    ("k3-adjacency", k3_adjacency),
    ("k3-closed-form", k3_closed_form),
    ("stochastic-nullity", stochastic_nullity),
    ("pf-bounds-oracle", pf_bounds_and_oracle),
    ("conjugacy", conjugacy),
    ("fold-timing", fold_timing),
    ("word-count", word_count),
    ("tent-entropy", tent_entropy),
    ("corollary", corollary),
    ("empirical-matrix", empirical),
];

pub fn run_all() -> Vec<CheckReport> {
    ALL.iter().map(|(_, check)| check()).collect()
}

fn golden_adjacency() -> TransferMatrix {
    TransferMatrix::adjacency(&TransitionGraph::golden_mean(4).expect("4 symbols"))
}

pub fn golden_mean() -> CheckReport {
    let a = golden_adjacency();
    // Warm up once so the timing reflects the computation, not first-touch costs.
    let _ = spectral_radius(&a, DEFAULT_TOL);
    let start = Instant::now();
    let result = spectral_radius(&a, DEFAULT_TOL);
    let elapsed = start.elapsed();
    let mut report = match result {
        Ok(s) => {
            let (de, dh) = ((s.radius - GOLDEN_RHO).abs(), (s.radius.ln() - GOLDEN_ENTROPY).abs());
            let ok = de <= EXACT_TOL && dh <= EXACT_TOL && elapsed < GOLDEN_BUDGET;
            CheckReport {
                id: "golden-mean",
                passed: ok,
                detail: format!(
                    "rho={:.12} |drho|={de:.1e} |dh|={dh:.1e} time={:.1} us",
                    s.radius,
                    elapsed.as_secs_f64() * 1e6
                ),
                elapsed,
            }
        }
        Err(e) => CheckReport {
            id: "golden-mean",
            passed: false,
            detail: e.to_string(),
            elapsed,
        },
    };
    report.elapsed = elapsed;
    report
}

pub fn k3_adjacency() -> CheckReport {
    timed("k3-adjacency", || {
        let a = TransferMatrix::adjacency(&TransitionGraph::zk(3).expect("k = 3"));
        match spectral_radius(&a, DEFAULT_TOL) {
            Ok(s) => {
                let (de, dh) = ((s.radius - 2.0).abs(), (s.radius.ln() - LN_2).abs());
                (de <= EXACT_TOL && dh <= EXACT_TOL, format!("rho={:.12} |dh|={dh:.1e}", s.radius))
            }
            Err(e) => (false, e.to_string()),
        }
    })
}

/// `log ρ` of the `k = 3` matrix in closed form.
pub fn k3_pressure(p1: f64, p2: f64, beta: f64) -> f64 {
    let w = |p: f64| if p == 0.0 { 0.0 } else { p.powf(beta) };
    let (a, b, c, d) = (w(p1), w(1.0 - p1), w(p2), w(1.0 - p2));
    (((a + c) + ((a - c) * (a - c) + 4.0 * b * d).sqrt()) / 2.0).ln()
}

fn k3_closed_form_check() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let (p1, p2): (f64, f64) = (rng.gen_range(0.01..0.99), rng.gen_range(0.01..0.99));
        for i in 0..=20 {
            let beta = i as f64 / 10.0;
            let got = match zk_matrix(3, p1, p2, beta).and_then(|m| spectral_radius(&m, DEFAULT_TOL)) {
                Ok(s) => s.radius.ln(),
                Err(e) => return (false, format!("p=({p1},{p2}) beta={beta}: {e}")),
            };
            worst = worst.max((got - k3_pressure(p1, p2, beta)).abs());
        }
    }
    (worst <= CLOSED_FORM_TOL, format!("max |dP|={worst:.1e} over 5 pairs x 21 betas"))
}

pub fn k3_closed_form() -> CheckReport {
    let mut r = timed("k3-closed-form", k3_closed_form_check);
    if r.elapsed >= CLOSED_FORM_BUDGET {
        r.passed = false;
        let _ = write!(r.detail, " (over the 1 s budget)");
    }
    r
}

pub fn stochastic_nullity() -> CheckReport {
    timed("stochastic-nullity", || {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut worst: f64 = 0.0;
        for case in 0..NULLITY_CASES {
            let matrix = if case % 2 == 0 {
                let m = rng.gen_range(2..=8);
                let raw: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 1e-3).collect();
                let total: f64 = raw.iter().sum();
                let mut p: Vec<f64> = raw.iter().map(|x| x / total).collect();
                // Absorb rounding so the vector sums to 1 to machine precision.
                let rest: f64 = p[1..].iter().sum();
                p[0] = 1.0 - rest;
                petal_matrix(&p, 1.0)
            } else {
                zk_matrix(rng.gen_range(2..=6), rng.gen(), rng.gen(), 1.0)
            };
            match matrix.and_then(|m| spectral_radius(&m, DEFAULT_TOL)) {
                Ok(s) => worst = worst.max(s.radius.ln().abs()),
                Err(e) => return (false, format!("case {case}: {e}")),
            }
        }
        (worst <= NULLITY_TOL, format!("max |P(1)|={worst:.1e} over {NULLITY_CASES} matrices"))
    })
}

fn random_nonnegative(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let density: f64 = rng.gen_range(0.1..=1.0);
    let integer = rng.gen_bool(0.3);
    (0..n * n)
        .map(|_| {
            if !rng.gen_bool(density) {
                0.0
            } else if integer {
                rng.gen_range(1..=3) as f64
            } else {
                rng.gen::<f64>()
            }
        })
        .collect()
}

/// Small matrices compared against the characteristic-polynomial oracle.
pub fn oracle_suite() -> Vec<(usize, Vec<f64>)> {
    let mut suite = vec![
        (4, golden_adjacency().entries().to_vec()),
        (1, vec![0.0]),
        (1, vec![2.5]),
        (2, vec![1.0, 0.0, 0.0, 1.0]),
        (2, vec![1.0, 1.0, 0.0, 1.0]),
        (2, vec![0.0, 1.0, 1.0, 0.0]),
        (2, vec![0.0, 0.0, 0.0, 0.0]),
        (3, vec![0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]),
        (3, vec![0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]),
        (3, vec![2.0, 1.0, 0.0, 0.0, 2.0, 1.0, 0.0, 0.0, 2.0]),
        (4, TransferMatrix::adjacency(&TransitionGraph::zk(3).expect("k = 3")).entries().to_vec()),
    ];
    for &(p1, p2) in &[(0.5, 0.5), (0.3, 0.6), (0.9, 0.05)] {
        for &beta in &[0.0, 0.5, 1.0, 2.0] {
            for k in 2..=3 {
                let m = zk_matrix(k, p1, p2, beta).expect("valid parameters");
                suite.push((m.dim(), m.entries().to_vec()));
            }
        }
    }
    for p in [vec![0.5, 0.5], vec![0.2, 0.3, 0.5], vec![0.1, 0.2, 0.3, 0.4], vec![0.5, 0.0, 0.25, 0.0, 0.25]] {
        for &beta in &[0.0, 0.7, 1.0, 1.8] {
            let m = petal_matrix(&p, beta).expect("valid parameters");
            suite.push((m.dim(), m.entries().to_vec()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let n = rng.gen_range(1..=oracle::MAX_DIM);
        suite.push((n, random_nonnegative(&mut rng, n)));
    }
    suite
}

pub fn pf_bounds_and_oracle() -> CheckReport {
    timed("pf-bounds-oracle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for case in 0..PF_CASES {
            let n = rng.gen_range(1..=PF_MAX_DIM);
            let a = random_nonnegative(&mut rng, n);
            let sums: Vec<f64> = a.chunks(n).map(|r| r.iter().sum()).collect();
            let lo = sums.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = sums.iter().copied().fold(0.0, f64::max);
            match spectral_radius_dense(n, &a, DEFAULT_TOL) {
                Ok(s) if s.radius >= lo - PF_SLACK && s.radius <= hi + PF_SLACK => {}
                Ok(s) => return (false, format!("case {case}: rho={} outside [{lo}, {hi}]", s.radius)),
                Err(e) => return (false, format!("case {case}: {e}")),
            }
        }
        let suite = oracle_suite();
        let mut worst: f64 = 0.0;
        for (i, (n, a)) in suite.iter().enumerate() {
            let rho = match spectral_radius_dense(*n, a, DEFAULT_TOL) {
                Ok(s) => s.radius,
                Err(e) => return (false, format!("suite matrix {i}: {e}")),
            };
            let err = (rho - oracle::spectral_radius(*n, a)).abs();
            if err > ORACLE_TOL {
                return (false, format!("suite matrix {i}: power {rho} vs oracle, |d|={err:.1e}"));
            }
            worst = worst.max(err);
        }
        (
            true,
            format!("{PF_CASES} bound checks; {} oracle matrices, max |d|={worst:.1e}", suite.len()),
        )
    })
}

fn conjugacy_check() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in 0..CONJUGACY_WORDS {
        let k = if n % 2 == 0 { 2 } else { 3 };
        let (psvf, partition, graph) = match (build_zk(k), ArcPartition::zk(k), TransitionGraph::zk(k)) {
            (Ok(p), Ok(a), Ok(g)) => (p, a, g),
            _ => return (false, format!("k={k}: cannot build the system")),
        };
        let result = graph.random_word(CONJUGACY_LEN, &mut rng).and_then(|word| {
            let p0 = arc_point(&partition, word[0], 0.0);
            let t_end = CONJUGACY_LEN as f64 - 0.5;
            let traj = integrate(&psvf, p0, BranchPolicy::Prescribed(word.clone()), t_end, 1e-3)?;
            let s = itinerary(&traj, &partition)?;
            Ok((s.symbols == word, verify_conjugacy(&traj, &partition)?))
        });
        match result {
            Ok((true, true)) => {}
            Ok((coded, shifted)) => {
                return (false, format!("word {n} (k={k}): itinerary ok={coded}, shift ok={shifted}"));
            }
            Err(e) => return (false, format!("word {n} (k={k}): {e}")),
        }
    }
    (true, format!("{CONJUGACY_WORDS} words of length {CONJUGACY_LEN}"))
}

pub fn conjugacy() -> CheckReport {
    let mut r = timed("conjugacy", conjugacy_check);
    if r.elapsed >= CONJUGACY_BUDGET {
        r.passed = false;
        let _ = write!(r.detail, " (over the 30 s budget)");
    }
    r
}

pub fn fold_timing() -> CheckReport {
    timed("fold-timing", || {
        let mut worst: f64 = 0.0;
        for k in [2u32, 3, 4] {
            let run = || -> psvf_core::Result<Vec<(f64, usize)>> {
                let psvf = build_zk(k)?;
                let partition = ArcPartition::zk(k)?;
                let weights = zk_matrix(k, 0.45, 0.6, 1.0)?.entries().to_vec();
                let p0 = arc_point(&partition, partition.len() / 2, 0.3);
                let policy = BranchPolicy::RandomWeighted { weights, seed: k as u64 };
                Ok(integrate(&psvf, p0, policy, FOLD_HORIZON, 1e-3)?.fold_hits())
            };
            let hits = match run() {
                Ok(h) => h,
                Err(e) => return (false, format!("k={k}: {e}")),
            };
            for n in 0..FOLD_HORIZON as usize {
                let count = hits.iter().filter(|h| h.0 >= n as f64 && h.0 < n as f64 + 1.0).count();
                if count != 1 {
                    return (false, format!("k={k}: {count} fold hits in [{n}, {})", n + 1));
                }
            }
            for pair in hits.windows(2) {
                worst = worst.max((pair[1].0 - pair[0].0 - 1.0).abs());
            }
        }
        (worst <= FOLD_GAP_TOL, format!("one hit per window; max |gap - 1|={worst:.1e}"))
    })
}

pub fn word_count() -> CheckReport {
    timed("word-count", || {
        let mut detail = String::new();
        let mut ok = true;
        for (name, graph) in [("k=3", TransitionGraph::zk(3)), ("golden", TransitionGraph::golden_mean(4))] {
            let graph = graph.expect("graph builds");
            let growth = graph.word_growth(WORD_COUNT_LEN);
            let rho = spectral_radius(&TransferMatrix::adjacency(&graph), DEFAULT_TOL);
            match (growth, rho) {
                (Ok(g), Ok(s)) => {
                    let d = (g - s.radius.ln()).abs();
                    ok &= d <= WORD_COUNT_TOL;
                    let _ = write!(detail, "{name}: |d|={d:.4} ");
                }
                (Err(e), _) | (_, Err(e)) => return (false, format!("{name}: {e}")),
            }
        }
        (ok, detail.trim_end().to_string())
    })
}

/// Per-α tent results: `(α, lap entropy, separated entropy)`.
pub fn tent_rows() -> psvf_core::Result<Vec<(f64, f64, f64)>> {
    TENT_ALPHAS
        .iter()
        .map(|&alpha| {
            Ok((
                alpha,
                entropy_lap(alpha, TENT_LAPS.0, TENT_LAPS.1)?,
                entropy_separated(alpha, TENT_SEPARATED_N, TENT_SEPARATED_EPS)?,
            ))
        })
        .collect()
}

pub fn tent_entropy() -> CheckReport {
    let mut r = timed("tent-entropy", || match tent_rows() {
        Ok(rows) => {
            let mut ok = true;
            let mut detail = String::new();
            for (alpha, lap, sep) in rows {
                let (dl, ds) = ((lap - alpha.ln()).abs(), (sep - alpha.ln()).abs());
                let lap_ok = dl <= TENT_LAP_TOL;
                ok &= lap_ok && ds <= TENT_SEPARATED_TOL;
                let _ = write!(
                    detail,
                    "a={alpha}: lap {dl:.4}{} sep {ds:.4}; ",
                    if lap_ok { "" } else { "(!)" }
                );
            }
            (ok, detail.trim_end_matches("; ").to_string())
        }
        Err(e) => (false, e.to_string()),
    });
    if r.elapsed >= TENT_BUDGET {
        r.passed = false;
        let _ = write!(r.detail, " (over the 60 s budget)");
    }
    r
}

pub fn corollary() -> CheckReport {
    timed("corollary", || {
        let mut ok = true;
        let mut detail = String::new();
        for s in COROLLARY_S {
            match corollary_estimates(s) {
                Ok(c) => {
                    let (dd, dh) = ((c.dim_estimate - s).abs(), (c.entropy_estimate - s).abs());
                    ok &= dd <= COROLLARY_TOL && dh <= COROLLARY_TOL;
                    let _ = write!(detail, "s={s:.4}: dim {dd:.4} h {dh:.4}; ");
                }
                Err(e) => return (false, format!("s={s}: {e}")),
            }
        }
        (ok, detail.trim_end_matches("; ").to_string())
    })
}

pub fn empirical() -> CheckReport {
    timed("empirical-matrix", || {
        let (p1, p2) = EMPIRICAL_P;
        let run = || -> psvf_core::Result<(bool, String)> {
            let psvf = build_zk(3)?;
            let partition = ArcPartition::zk(3)?;
            let expected = zk_matrix(3, p1, p2, 1.0)?;
            let emp = empirical_matrix(&psvf, &partition, 1.0, EMPIRICAL_SAMPLES, expected.entries(), 17)?;
            let mut worst: f64 = 0.0;
            for (&c, &p) in emp.counts.iter().zip(expected.entries()) {
                let freq = c as f64 / emp.per_row as f64;
                let se = (p * (1.0 - p) / emp.per_row as f64).sqrt();
                let z = if se == 0.0 {
                    if freq == p { 0.0 } else { f64::INFINITY }
                } else {
                    (freq - p).abs() / se
                };
                worst = worst.max(z);
            }
            let zero = empirical_matrix(&psvf, &partition, 0.0, EMPIRICAL_SAMPLES, expected.entries(), 17)?;
            let support_ok = zero.matrix.support() == TransitionGraph::zk(3)?;
            Ok((
                worst <= EMPIRICAL_SE && support_ok,
                format!("max |z|={worst:.2}; beta=0 support matches adjacency: {support_ok}"),
            ))
        };
        run().unwrap_or_else(|e| (false, e.to_string()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_constants_agree() {
        assert!((GOLDEN_RHO - (1.0 + 13f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((GOLDEN_ENTROPY - GOLDEN_RHO.ln()).abs() < 1e-15);
    }

    #[test]
    fn closed_form_at_beta_zero_is_log_two() {
        assert!((k3_pressure(0.3, 0.8, 0.0) - LN_2).abs() < 1e-15);
        assert!(k3_pressure(0.3, 0.8, 1.0).abs() < 1e-15);
    }

    #[test]
    fn suite_fits_the_oracle() {
        assert!(oracle_suite().iter().all(|(n, a)| *n <= oracle::MAX_DIM && a.len() == n * n));
    }
}

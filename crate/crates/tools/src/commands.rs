//! One function per subcommand. Each writes its artifacts under the output
//! directory and a short summary to `out`.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use psvf_core::dimension::{corollary_estimates, COROLLARY_TOL};
use psvf_core::flow::{arc_point, integrate};
use psvf_core::model::Family;
use psvf_core::symbolic::{itinerary as itinerary_of, seq_distance};
use psvf_core::tent::{entropy_lap, entropy_separated};
use psvf_core::transfer::{beta_pow, empirical_matrix, spectral_radius, PressureCurve, PressurePoint, Provenance};
use psvf_core::{ArcPartition, Itinerary, TransferMatrix, Trajectory};

use crate::checks;
use crate::config::{CommandName, ConfigError, RunConfig};
use crate::formats::{self, TentRow};

/// What a command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    /// False when a check the command performs did not hold.
    pub success: bool,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    fn ok(files: Vec<PathBuf>) -> Self {
        Outcome { success: true, files }
    }
}

pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let command = cfg
        .command
        .ok_or_else(|| ConfigError::new("command", "no subcommand given"))?;
    match command {
        CommandName::Simulate => simulate(cfg, out),
        CommandName::Itinerary => itinerary(cfg, out),
        CommandName::Graph => graph(cfg, out),
        CommandName::Pressure => pressure(cfg, out),
        CommandName::Entropy => entropy(cfg, out),
        CommandName::Tent => tent(cfg, out),
        CommandName::Dimension => dimension(cfg, out),
        CommandName::Verify => verify(out),
    }
}

fn write(cfg: &RunConfig, name: &str, contents: &str) -> Result<PathBuf> {
    let dir = cfg.out_dir();
    formats::write_artifact(&dir, name, contents).with_context(|| format!("writing {}", dir.join(name).display()))
}

fn trajectory(cfg: &RunConfig) -> Result<Trajectory> {
    let psvf = cfg.system()?;
    let partition = ArcPartition::for_system(&psvf)?;
    let (arc, s) = cfg.start()?;
    let policy = cfg.policy()?;
    let p0 = arc_point(&partition, arc, s);
    integrate(&psvf, p0, policy, cfg.t_end()?, cfg.dt()?).context("integrating the trajectory")
}

pub fn simulate(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let traj = trajectory(cfg)?;
    let files = vec![
        write(cfg, "trajectory.csv", &formats::trajectory_csv(&traj))?,
        write(cfg, "events.jsonl", &formats::events_jsonl(traj.events()))?,
    ];
    writeln!(
        out,
        "samples {} events {} fold hits {} max drift {:.2e}",
        traj.samples().len(),
        traj.events().len(),
        traj.fold_hits().len(),
        traj.max_drift()
    )?;
    Ok(Outcome::ok(files))
}

pub fn itinerary(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let traj = trajectory(cfg)?;
    let s = itinerary_of(&traj, traj.partition()).context("coding the trajectory")?;
    let text = s.to_symbol_string();
    writeln!(out, "{text}")?;
    let files = vec![write(cfg, "itinerary.txt", &format!("{text}\n"))?];
    if let Some(word) = &cfg.compare {
        cfg.graph()?
            .check_word(word)
            .map_err(|e| ConfigError::new("compare", e.to_string()))?;
        let len = s.len().min(word.len());
        if len == 0 {
            return Err(ConfigError::new("compare", "nothing to compare").into());
        }
        let w = (len - 1) / 2;
        let centre = |symbols: &[usize]| Itinerary::new(symbols[..len].to_vec(), -(w as i64), s.alphabet);
        let d = seq_distance(&centre(&s.symbols), &centre(word), w)?;
        writeln!(out, "distance {} (tail bound {:.3e}, window {w})", d.value, d.tail_bound)?;
    }
    Ok(Outcome::ok(files))
}

pub fn graph(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let spec = cfg.spec()?;
    let name = match spec.family {
        Family::Zk => format!("Z{}", spec.k),
        Family::Petal => format!("petal{}", spec.k),
    };
    let dot = cfg.graph()?.to_dot(&name);
    out.write_all(dot.as_bytes())?;
    Ok(Outcome::ok(vec![write(cfg, "graph.dot", &dot)?]))
}

/// Transfer matrix at `β`, from the closed-form family or from empirical counts.
fn matrices(cfg: &RunConfig) -> Result<Box<dyn Fn(f64) -> Result<TransferMatrix>>> {
    let family = cfg.matrix_family()?;
    let Some(samples) = cfg.samples()? else {
        return Ok(Box::new(move |beta| Ok(family.matrix(beta)?)));
    };
    let seed = cfg.seed()?;
    let psvf = cfg.system()?;
    let partition = ArcPartition::for_system(&psvf)?;
    let weights = family.matrix(1.0)?.entries().to_vec();
    let emp = empirical_matrix(&psvf, &partition, 1.0, samples, &weights, seed).context("sampling the transfer matrix")?;
    let (m, per_row, counts) = (partition.len(), emp.per_row, emp.counts);
    Ok(Box::new(move |beta| {
        let entries = counts.iter().map(|&c| beta_pow(c as f64 / per_row as f64, beta)).collect();
        Ok(TransferMatrix::new(m, entries, beta, Provenance::Empirical { samples: per_row * m })?)
    }))
}

pub fn pressure(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let betas = cfg.betas()?;
    let tol = cfg.tol()?;
    let matrix_at = matrices(cfg)?;
    let points = betas
        .iter()
        .map(|&beta| {
            let s = spectral_radius(&matrix_at(beta)?, tol).with_context(|| format!("spectral radius at beta = {beta}"))?;
            Ok(PressurePoint {
                beta,
                pressure: s.radius.ln(),
                radius: s.radius,
                residual: s.residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let curve = PressureCurve { points };
    let one = matrix_at(1.0)?;
    let files = vec![
        write(cfg, "pressure.csv", &formats::pressure_csv(&curve))?,
        write(cfg, "matrix.txt", &formats::matrix_text(&one))?,
        write(cfg, "matrix.json", &formats::matrix_json(&one))?,
    ];
    write!(out, "{} points", curve.points.len())?;
    if let Some(h) = curve.entropy() {
        write!(out, "; entropy {h}")?;
    }
    writeln!(out)?;
    Ok(Outcome::ok(files))
}

pub fn entropy(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let spec = cfg.spec()?;
    let has_weights = cfg.p.is_some() || cfg.p1.is_some() || cfg.p2.is_some();
    let a = if has_weights {
        cfg.matrix_family()?.matrix(0.0)?
    } else {
        TransferMatrix::adjacency(&cfg.graph()?)
    };
    let s = spectral_radius(&a, cfg.tol()?)?;
    let h = s.radius.ln();
    let n = cfg.word_len()?;
    let growth = a.support().word_growth(n)?;
    let diff = (growth - h).abs();
    let family = match spec.family {
        Family::Zk => "zk",
        Family::Petal => "petal",
    };
    let csv = format!(
        "family,k,entropy,radius,word_len,word_growth,difference\n{family},{},{h},{},{n},{growth},{diff}\n",
        spec.k, s.radius
    );
    writeln!(out, "entropy {h} word growth ({n}) {growth} difference {diff:.3e}")?;
    Ok(Outcome::ok(vec![write(cfg, "entropy.csv", &csv)?]))
}

pub fn tent(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let (lo, hi) = cfg.laps()?;
    let (n, eps) = (cfg.sep_n()?, cfg.eps()?);
    let rows = cfg
        .alphas()?
        .into_iter()
        .map(|alpha| {
            Ok(TentRow {
                alpha,
                entropy_lap: entropy_lap(alpha, lo, hi)?,
                entropy_separated: entropy_separated(alpha, n, eps)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for r in &rows {
        writeln!(
            out,
            "alpha {} lap {:.6} separated {:.6} log alpha {:.6}",
            r.alpha,
            r.entropy_lap,
            r.entropy_separated,
            r.alpha.ln()
        )?;
    }
    Ok(Outcome::ok(vec![write(cfg, "tent.csv", &formats::tent_csv(&rows))?]))
}

pub fn dimension(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let rows = cfg
        .dimensions()?
        .into_iter()
        .map(|s| corollary_estimates(s).with_context(|| format!("s = {s}")))
        .collect::<Result<Vec<_>>>()?;
    let mut success = true;
    for r in &rows {
        let ok = (r.dim_estimate - r.s).abs() <= COROLLARY_TOL && (r.entropy_estimate - r.s).abs() <= COROLLARY_TOL;
        success &= ok;
        writeln!(
            out,
            "{} s {:.6} dim {:.6} entropy {:.6} (alpha {:.6}, r2 {:.5})",
            if ok { "ok " } else { "off" },
            r.s,
            r.dim_estimate,
            r.entropy_estimate,
            r.alpha,
            r.r_squared
        )?;
    }
    let files = vec![write(cfg, "dimension.csv", &formats::dimension_csv(&rows))?];
    Ok(Outcome { success, files })
}

pub fn verify(out: &mut dyn Write) -> Result<Outcome> {
    let mut success = true;
    for (_, check) in checks::ALL {
        let report = check();
        success &= report.passed;
        writeln!(out, "{}", report.line())?;
        out.flush()?;
    }
    Ok(Outcome {
        success,
        files: Vec::new(),
    })
}

//! Run configuration: JSON file, command-line flags and validation.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;
use psvf_core::model::Family;
use psvf_core::transfer::{self, MatrixFamily};
use psvf_core::{BranchPolicy, Psvf, SystemSpec, TransitionGraph};
use serde::{Deserialize, Serialize};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PSVF_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "psvf-out";

/// Slack used when deciding whether the grid's last point reaches `hi`.
const GRID_SLACK: f64 = 1e-12;

/// A configuration problem, naming the offending field.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub field: &'static str,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigError {
            field,
            reason: reason.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.field, self.reason)
    }
}

impl std::error::Error for ConfigError {}

type ConfigResult<T> = Result<T, ConfigError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandName {
    Simulate,
    Itinerary,
    Graph,
    Pressure,
    Entropy,
    Tent,
    Dimension,
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PolicyName {
    Left,
    Right,
    Random,
    Prescribed,
}

/// `lo:hi:step`, inclusive of `hi` up to 1e-12.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BetaGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl BetaGrid {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + GRID_SLACK).floor() as usize;
        (0..=n)
            .map(|i| {
                let b = self.lo + i as f64 * self.step;
                // Land exactly on round values such as 0.3 instead of 0.30000000000000004.
                let r = (b * 1e12).round() / 1e12;
                if (r - b).abs() <= GRID_SLACK { r } else { b }
            })
            .collect()
    }
}

impl FromStr for BetaGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let nums = match parts.as_slice() {
            [single] => {
                let b = parse_f64(single)?;
                return Ok(BetaGrid { lo: b, hi: b, step: 1.0 });
            }
            [lo, hi, step] => (parse_f64(lo)?, parse_f64(hi)?, parse_f64(step)?),
            _ => return Err(format!("expected lo:hi:step, got {s:?}")),
        };
        let (lo, hi, step) = nums;
        if lo < 0.0 || hi < lo {
            return Err("need 0 <= lo <= hi".into());
        }
        if step.is_nan() || step <= 0.0 {
            return Err("step must be positive".into());
        }
        if (hi - lo) / step > 1e6 {
            return Err("grid has more than 10^6 points".into());
        }
        Ok(BetaGrid { lo, hi, step })
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !v.is_finite() {
        return Err(format!("not finite: {s:?}"));
    }
    Ok(v)
}

impl TryFrom<String> for BetaGrid {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<BetaGrid> for String {
    fn from(g: BetaGrid) -> String {
        if g.lo == g.hi {
            format!("{}", g.lo)
        } else {
            format!("{}:{}:{}", g.lo, g.hi, g.step)
        }
    }
}

/// Everything a run needs. Every field is optional so that a JSON file and
/// the command line can each supply part of it; [`RunConfig::merge`] lets
/// flags win.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<CommandName>,
    pub family: Option<Family>,
    pub k: Option<u32>,
    /// Petal probability vector.
    pub p: Option<Vec<f64>>,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub beta: Option<BetaGrid>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub policy: Option<PolicyName>,
    pub word: Option<Vec<usize>>,
    pub compare: Option<Vec<usize>>,
    pub start_arc: Option<usize>,
    pub start_s: Option<f64>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    /// Empirical-matrix sample budget; switches `pressure` to Monte-Carlo matrices.
    pub samples: Option<usize>,
    /// Word length for the entropy cross-check.
    pub word_len: Option<usize>,
    pub alpha: Option<Vec<f64>>,
    pub laps: Option<(usize, usize)>,
    pub sep_n: Option<usize>,
    pub eps: Option<f64>,
    pub s: Option<Vec<f64>>,
}

macro_rules! take {
    ($base:ident, $over:ident, $($f:ident),*) => {
        RunConfig { $($f: $over.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merge(self, over: RunConfig) -> RunConfig {
        let base = self;
        take!(
            base, over, command, family, k, p, p1, p2, beta, out_dir, seed, tol, policy, word, compare,
            start_arc, start_s, t_end, dt, samples, word_len, alpha, laps, sep_n, eps, s
        )
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }

    pub fn spec(&self) -> ConfigResult<SystemSpec> {
        let family = self.family.ok_or_else(|| ConfigError::new("family", "required (zk or petal)"))?;
        let k = self.k.ok_or_else(|| ConfigError::new("k", "required"))?;
        if !(2..=64).contains(&k) {
            return Err(ConfigError::new("k", format!("must lie in 2..=64, got {k}")));
        }
        Ok(SystemSpec { family, k })
    }

    pub fn system(&self) -> ConfigResult<Psvf> {
        self.spec()?
            .build()
            .map_err(|e| ConfigError::new("k", e.to_string()))
    }

    pub fn graph(&self) -> ConfigResult<TransitionGraph> {
        let spec = self.spec()?;
        match spec.family {
            Family::Zk => TransitionGraph::zk(spec.k),
            Family::Petal => TransitionGraph::petal(spec.k),
        }
        .map_err(|e| ConfigError::new("k", e.to_string()))
    }

    fn probability(&self, field: &'static str, value: Option<f64>) -> ConfigResult<f64> {
        let v = value.ok_or_else(|| ConfigError::new(field, "required for this family"))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(ConfigError::new(field, format!("must lie in [0, 1], got {v}")));
        }
        Ok(v)
    }

    /// The parameterized transfer-matrix family of the chosen system.
    pub fn matrix_family(&self) -> ConfigResult<MatrixFamily> {
        let spec = self.spec()?;
        match spec.family {
            Family::Zk => Ok(MatrixFamily::Zk {
                k: spec.k,
                p1: self.probability("p1", self.p1)?,
                p2: self.probability("p2", self.p2)?,
            }),
            Family::Petal => {
                let p = self.p.clone().ok_or_else(|| ConfigError::new("p", "required for the petal family"))?;
                if p.len() != spec.k as usize {
                    return Err(ConfigError::new("p", format!("expected {} entries, got {}", spec.k, p.len())));
                }
                if p.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                    return Err(ConfigError::new("p", "entries must lie in [0, 1]"));
                }
                let sum: f64 = p.iter().sum();
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(ConfigError::new("p", format!("entries must sum to 1, got {sum}")));
                }
                Ok(MatrixFamily::Petal { p })
            }
        }
    }

    pub fn betas(&self) -> ConfigResult<Vec<f64>> {
        Ok(self
            .beta
            .ok_or_else(|| ConfigError::new("beta", "required (lo:hi:step)"))?
            .points())
    }

    pub fn seed(&self) -> ConfigResult<u64> {
        self.seed
            .ok_or_else(|| ConfigError::new("seed", "required for stochastic runs"))
    }

    pub fn tol(&self) -> ConfigResult<f64> {
        let tol = self.tol.unwrap_or(transfer::DEFAULT_TOL);
        if !(tol > 0.0 && tol < 1.0) {
            return Err(ConfigError::new("tol", format!("must lie in (0, 1), got {tol}")));
        }
        Ok(tol)
    }

    pub fn dt(&self) -> ConfigResult<f64> {
        let dt = self.dt.unwrap_or(psvf_core::flow::MAX_DT);
        if !(dt > 0.0 && dt <= psvf_core::flow::MAX_DT) {
            return Err(ConfigError::new("dt", format!("must lie in (0, 1e-3], got {dt}")));
        }
        Ok(dt)
    }

    pub fn t_end(&self) -> ConfigResult<f64> {
        let t = self.t_end.unwrap_or(10.0);
        if !(t > 0.0 && t <= 1e4) {
            return Err(ConfigError::new("t_end", format!("must lie in (0, 1e4], got {t}")));
        }
        Ok(t)
    }

    /// Branch policy. Random policies draw with the matrix-family weights at
    /// `β = 1` and need a seed; prescribed policies need a word.
    pub fn policy(&self) -> ConfigResult<BranchPolicy> {
        match self.policy.unwrap_or(PolicyName::Right) {
            PolicyName::Left => Ok(BranchPolicy::AlwaysLeft),
            PolicyName::Right => Ok(BranchPolicy::AlwaysRight),
            PolicyName::Prescribed => {
                let word = self
                    .word
                    .clone()
                    .ok_or_else(|| ConfigError::new("word", "required for the prescribed policy"))?;
                let graph = self.graph()?;
                graph
                    .check_word(&word)
                    .map_err(|e| ConfigError::new("word", e.to_string()))?;
                Ok(BranchPolicy::Prescribed(word))
            }
            PolicyName::Random => {
                let seed = self.seed()?;
                let weights = self
                    .matrix_family()?
                    .matrix(1.0)
                    .map_err(|e| ConfigError::new("p", e.to_string()))?
                    .entries()
                    .to_vec();
                Ok(BranchPolicy::RandomWeighted { weights, seed })
            }
        }
    }

    /// Starting arc and time along it. A prescribed word starts at the
    /// beginning of its first arc unless told otherwise.
    pub fn start(&self) -> ConfigResult<(usize, f64)> {
        let m = self.graph()?.size();
        let default_arc = match (&self.policy, &self.word) {
            (Some(PolicyName::Prescribed), Some(w)) if !w.is_empty() => w[0],
            _ => 0,
        };
        let arc = self.start_arc.unwrap_or(default_arc);
        if arc >= m {
            return Err(ConfigError::new("start_arc", format!("must be below {m}, got {arc}")));
        }
        let s = self.start_s.unwrap_or(0.0);
        if !(0.0..1.0).contains(&s) {
            return Err(ConfigError::new("start_s", format!("must lie in [0, 1), got {s}")));
        }
        Ok((arc, s))
    }

    pub fn samples(&self) -> ConfigResult<Option<usize>> {
        match self.samples {
            Some(n) if n < transfer::MIN_SAMPLES => Err(ConfigError::new(
                "samples",
                format!("at least {} required, got {n}", transfer::MIN_SAMPLES),
            )),
            other => Ok(other),
        }
    }

    pub fn word_len(&self) -> ConfigResult<usize> {
        let n = self.word_len.unwrap_or(30);
        if !(1..=4096).contains(&n) {
            return Err(ConfigError::new("word_len", format!("must lie in 1..=4096, got {n}")));
        }
        Ok(n)
    }

    pub fn alphas(&self) -> ConfigResult<Vec<f64>> {
        let alphas = self.alpha.clone().unwrap_or_else(|| vec![1.2, 1.5, 1.9, 2.0]);
        if alphas.is_empty() {
            return Err(ConfigError::new("alpha", "empty list"));
        }
        if let Some(a) = alphas.iter().find(|&&a| !(a > 1.0 && a <= 2.0)) {
            return Err(ConfigError::new("alpha", format!("must lie in (1, 2], got {a}")));
        }
        Ok(alphas)
    }

    pub fn laps(&self) -> ConfigResult<(usize, usize)> {
        let (lo, hi) = self.laps.unwrap_or((10, 22));
        if !(2 <= lo && lo < hi && hi <= psvf_core::tent::MAX_LAP_ITERATES) {
            return Err(ConfigError::new("laps", format!("need 2 <= lo < hi <= 256, got {lo}:{hi}")));
        }
        Ok((lo, hi))
    }

    pub fn sep_n(&self) -> ConfigResult<usize> {
        let n = self.sep_n.unwrap_or(12);
        if !(1..=psvf_core::tent::MAX_SEPARATED_ITERATES).contains(&n) {
            return Err(ConfigError::new("sep_n", format!("must lie in 1..=18, got {n}")));
        }
        Ok(n)
    }

    pub fn eps(&self) -> ConfigResult<f64> {
        let eps = self.eps.unwrap_or(0.01);
        if !(1e-4..1.0).contains(&eps) {
            return Err(ConfigError::new("eps", format!("must lie in [1e-4, 1), got {eps}")));
        }
        Ok(eps)
    }

    pub fn dimensions(&self) -> ConfigResult<Vec<f64>> {
        let s = self
            .s
            .clone()
            .unwrap_or_else(|| vec![0.4, 0.5, 0.6, std::f64::consts::LN_2]);
        if s.is_empty() {
            return Err(ConfigError::new("s", "empty list"));
        }
        if let Some(v) = s.iter().find(|&&v| !(v > 0.3 && v <= std::f64::consts::LN_2)) {
            return Err(ConfigError::new("s", format!("must lie in (0.3, log 2], got {v}")));
        }
        Ok(s)
    }
}

/// Parses `a:b` into a pair of integers.
pub fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let lo = a.trim().parse().map_err(|_| format!("not an integer: {a:?}"))?;
    let hi = b.trim().parse().map_err(|_| format!("not an integer: {b:?}"))?;
    Ok((lo, hi))
}

/// Parses a word written as `0 1 3 2` or `0,1,3,2`.
pub fn parse_word(s: &str) -> Result<Vec<usize>, String> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| format!("not a symbol: {t:?}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_grid_is_inclusive() {
        let g: BetaGrid = "0:2:0.1".parse().unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 21);
        assert_eq!(pts[3], 0.3);
        assert_eq!(*pts.last().unwrap(), 2.0);
        assert_eq!("1".parse::<BetaGrid>().unwrap().points(), vec![1.0]);
        assert!("2:1:0.1".parse::<BetaGrid>().is_err());
        assert!("0:1:0".parse::<BetaGrid>().is_err());
        assert!("0:1".parse::<BetaGrid>().is_err());
    }

    #[test]
    fn config_round_trips() {
        let cfg = RunConfig {
            command: Some(CommandName::Pressure),
            family: Some(Family::Zk),
            k: Some(3),
            p1: Some(0.25),
            p2: Some(0.5),
            beta: Some("0:2:0.1".parse().unwrap()),
            seed: Some(9),
            laps: Some((10, 22)),
            word: Some(vec![0, 1, 3]),
            ..Default::default()
        };
        let back = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(RunConfig::from_json(&back.to_json()).unwrap().to_json(), cfg.to_json());
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig {
            k: Some(3),
            p1: Some(0.1),
            ..Default::default()
        };
        let flags = RunConfig {
            p1: Some(0.9),
            ..Default::default()
        };
        let merged = file.merge(flags);
        assert_eq!((merged.k, merged.p1), (Some(3), Some(0.9)));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(RunConfig::from_json(r#"{"kk": 3}"#).is_err());
    }

    #[test]
    fn errors_name_the_field() {
        let cfg = RunConfig {
            family: Some(Family::Zk),
            k: Some(3),
            p1: Some(1.5),
            p2: Some(0.5),
            ..Default::default()
        };
        assert_eq!(cfg.matrix_family().unwrap_err().field, "p1");
        let random = RunConfig {
            policy: Some(PolicyName::Random),
            ..cfg.clone()
        };
        assert_eq!(random.policy().unwrap_err().field, "seed");
        let petal = RunConfig {
            family: Some(Family::Petal),
            p: Some(vec![0.5, 0.5]),
            ..cfg
        };
        assert_eq!(petal.matrix_family().unwrap_err().field, "p");
    }

    #[test]
    fn words_parse_with_commas_or_spaces() {
        assert_eq!(parse_word("0 1,3  2").unwrap(), vec![0, 1, 3, 2]);
        assert!(parse_word("0 x").is_err());
        assert_eq!(parse_range("10:22").unwrap(), (10, 22));
    }
}

//! Text artifacts: CSV tables, JSON lines, DOT and plain-text matrices.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use psvf_core::dimension::CorollaryCheck;
use psvf_core::flow::{Event, EventKind};
use psvf_core::transfer::PressureCurve;
use psvf_core::{TransferMatrix, Trajectory};
use serde_json::json;

pub fn event_label(kind: EventKind) -> String {
    match kind {
        EventKind::SigmaCross => "cross".into(),
        EventKind::FoldHit(j) => format!("fold:{j}"),
        EventKind::BranchChoice(a) => format!("branch:{a}"),
        EventKind::Junction => "junction".into(),
    }
}

/// `t,x,y,event`: one row per integration sample, with events interleaved in
/// time order as extra rows carrying their label.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,x,y,event\n");
    let mut events = traj.events().iter().peekable();
    for s in traj.samples() {
        while let Some(e) = events.next_if(|e| e.t <= s.t) {
            let _ = writeln!(out, "{},{},{},{}", e.t, e.x, e.y, event_label(e.kind));
        }
        let _ = writeln!(out, "{},{},{},", s.t, s.x, s.y);
    }
    for e in events {
        let _ = writeln!(out, "{},{},{},{}", e.t, e.x, e.y, event_label(e.kind));
    }
    out
}

pub fn events_jsonl(events: &[Event]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("events serialize"));
        out.push('\n');
    }
    out
}

pub fn pressure_csv(curve: &PressureCurve) -> String {
    let mut out = String::from("beta,pressure,radius,residual\n");
    for p in &curve.points {
        let _ = writeln!(out, "{},{},{},{:e}", p.beta, p.pressure, p.radius, p.residual);
    }
    out
}

/// Right-aligned columns, fixed precision.
pub fn matrix_text(m: &TransferMatrix) -> String {
    let cells: Vec<String> = m.entries().iter().map(|x| format!("{x:.12}")).collect();
    let width = cells.iter().map(String::len).max().unwrap_or(1);
    let mut out = String::new();
    for row in cells.chunks(m.dim()) {
        let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn matrix_json(m: &TransferMatrix) -> String {
    let rows: Vec<&[f64]> = m.rows().collect();
    let value = json!({
        "dim": m.dim(),
        "beta": m.beta(),
        "provenance": m.provenance(),
        "entries": rows,
    });
    let mut s = serde_json::to_string_pretty(&value).expect("matrix serializes");
    s.push('\n');
    s
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TentRow {
    pub alpha: f64,
    pub entropy_lap: f64,
    pub entropy_separated: f64,
}

pub fn tent_csv(rows: &[TentRow]) -> String {
    let mut out = String::from("alpha,entropy_lap,entropy_separated,log_alpha\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.alpha, r.entropy_lap, r.entropy_separated, r.alpha.ln());
    }
    out
}

pub fn dimension_csv(rows: &[CorollaryCheck]) -> String {
    let mut out = String::from("s,dim_estimate,alpha,entropy_estimate,r_squared\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.s, r.dim_estimate, r.alpha, r.entropy_estimate, r.r_squared);
    }
    out
}

/// Writes `contents` to `dir/name`, creating `dir` if needed.
pub fn write_artifact(dir: &Path, name: &str, contents: &str) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use psvf_core::transfer::zk_matrix;

    #[test]
    fn matrix_text_is_aligned() {
        let m = zk_matrix(2, 0.25, 0.25, 1.0).unwrap();
        let text = matrix_text(&m);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].len(), lines[1].len());
        assert!(lines[0].starts_with("0.250000000000"));
    }

    #[test]
    fn matrix_json_has_rows() {
        let m = zk_matrix(3, 0.3, 0.6, 1.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&matrix_json(&m)).unwrap();
        assert_eq!(v["dim"], 4);
        assert_eq!(v["entries"][0][1], 0.7);
    }

    #[test]
    fn labels() {
        assert_eq!(event_label(EventKind::FoldHit(2)), "fold:2");
        assert_eq!(event_label(EventKind::SigmaCross), "cross");
    }
}

//! Run reports: `key=value` lines plus a JSON sidecar with the same fields.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io_error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub algebra: String,
    pub p: u32,
    pub algorithm: String,
    pub rank: usize,
    pub r_s: Option<usize>,
    pub d: Option<usize>,
    /// Rank actually granted to the solver (`r_s·d` for the block path).
    pub rank_budget: usize,
    pub q: u32,
    pub restarts: usize,
    pub seed: u64,
    pub rows: usize,
    pub cols: usize,
    pub witness_width: usize,
    pub error: u64,
    pub real_l1_error: Option<u64>,
    pub iterations: Vec<usize>,
    pub wall_seconds: Option<f64>,
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunReport {
    /// One `key=value` per line; absent optional fields are left out,
    /// lists are comma-separated.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| writeln!(out, "{k}={v}").expect("writing to a string");
        line("command", self.command.clone());
        line("algebra", self.algebra.clone());
        line("p", self.p.to_string());
        line("algorithm", self.algorithm.clone());
        line("rank", self.rank.to_string());
        if let Some(r_s) = self.r_s {
            line("r_s", r_s.to_string());
        }
        if let Some(d) = self.d {
            line("d", d.to_string());
        }
        line("rank_budget", self.rank_budget.to_string());
        line("q", self.q.to_string());
        line("restarts", self.restarts.to_string());
        line("seed", self.seed.to_string());
        line("rows", self.rows.to_string());
        line("cols", self.cols.to_string());
        line("witness_width", self.witness_width.to_string());
        line("error", self.error.to_string());
        if let Some(e) = self.real_l1_error {
            line("real_l1_error", e.to_string());
        }
        line("iterations", join(&self.iterations));
        if let Some(t) = self.wall_seconds {
            line("wall_seconds", format!("{t:.6}"));
        }
        line("outputs", join(&self.outputs));
        for note in &self.notes {
            line("note", note.clone());
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn write(&self, text_path: &Path, json_path: &Path) -> Result<()> {
        fs::write(text_path, self.to_key_value()).map_err(io_error(text_path))?;
        fs::write(json_path, self.to_json()).map_err(io_error(json_path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunReport {
        RunReport {
            command: "lrmf factorize --input a.csv --p 2 --rank 3".into(),
            algebra: "GF(2)".into(),
            p: 2,
            algorithm: "lrmf".into(),
            rank: 3,
            r_s: None,
            d: None,
            rank_budget: 3,
            q: 1,
            restarts: 10,
            seed: 7,
            rows: 4,
            cols: 5,
            witness_width: 3,
            error: 2,
            real_l1_error: None,
            iterations: vec![2, 3],
            wall_seconds: None,
            outputs: vec!["out.B.csv".into(), "out.U.csv".into()],
            notes: vec![],
        }
    }

    #[test]
    fn key_value_layout() {
        let text = sample().to_key_value();
        assert!(text.starts_with("command=lrmf factorize"));
        assert!(text.contains("\nerror=2\n"));
        assert!(text.contains("\niterations=2,3\n"));
        assert!(!text.contains("r_s="));
        assert!(!text.contains("wall_seconds"));
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let back: RunReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}

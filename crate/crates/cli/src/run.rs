//! The `factorize` pipeline: load, pick an algorithm, solve, write artifacts.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lrmf_core::bigrank::DEFAULT_BLOCK_RANK;
use lrmf_core::{lrmf, plrmf, verify, Algebra, FactorizationResult, Matrix};

use crate::error::{CliError, Result};
use crate::io::{load_matrix_csv, load_pgm, write_matrix_csv, write_pgm};
use crate::quantize::{bucket, dequantize, l1_error, quantize};
use crate::report::RunReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Lrmf { rank: usize },
    Plrmf { r_s: usize, d: usize },
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Lrmf { .. } => "lrmf",
            Algorithm::Plrmf { .. } => "plrmf",
        }
    }

    pub fn rank_budget(&self) -> usize {
        match *self {
            Algorithm::Lrmf { rank } => rank,
            Algorithm::Plrmf { r_s, d } => r_s * d,
        }
    }

    pub fn run(&self, a: &Matrix, q: u32, restarts: usize, seed: u64) -> Result<FactorizationResult> {
        Ok(match *self {
            Algorithm::Lrmf { rank } => lrmf(a, rank, q, restarts, seed)?,
            Algorithm::Plrmf { r_s, d } => plrmf(a, r_s, d, q, restarts, seed)?.result,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub algorithm: Algorithm,
    pub notes: Vec<String>,
}

/// Picks the solver for a target rank.
///
/// An explicit `d` always means the block solver with `r_s` (default 5).
/// Otherwise ranks up to `r_s` go to the direct solver, and larger ranks to
/// the block solver with `d = ⌊rank / r_s⌋`.
pub fn select_algorithm(rank: usize, r_s: Option<usize>, d: Option<usize>) -> Result<Selection> {
    if rank == 0 {
        return Err(CliError::Flags("--rank must be at least 1".into()));
    }
    if r_s == Some(0) || d == Some(0) {
        return Err(CliError::Flags("--rs and --d must be at least 1".into()));
    }
    let block = r_s.unwrap_or(DEFAULT_BLOCK_RANK);
    let mut notes = Vec::new();
    let algorithm = match d {
        Some(d) => {
            let budget = block.saturating_mul(d);
            if budget > rank {
                return Err(CliError::Flags(format!(
                    "--rs {block} times --d {d} is {budget}, above --rank {rank}"
                )));
            }
            Algorithm::Plrmf { r_s: block, d }
        }
        None if rank <= block => Algorithm::Lrmf { rank },
        None => Algorithm::Plrmf {
            r_s: block,
            d: rank / block,
        },
    };
    if algorithm.rank_budget() < rank {
        notes.push(format!(
            "rank budget r_s*d = {} is below the requested rank {rank}",
            algorithm.rank_budget()
        ));
    }
    Ok(Selection { algorithm, notes })
}

pub fn resolve_algebra(p: Option<u32>, boolean: bool) -> Result<Algebra> {
    match (p, boolean) {
        (Some(p), true) if p != 2 => Err(CliError::Flags(format!("--boolean needs p=2, got --p {p}"))),
        (_, true) => Ok(Algebra::boolean()),
        (Some(p), false) => Ok(Algebra::field(p)?),
        (None, false) => Err(CliError::Flags("one of --p or --boolean is required".into())),
    }
}

/// `prefix` with `suffix` appended to its last component.
pub fn output_path(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = OsString::from(prefix.as_os_str());
    s.push(suffix);
    PathBuf::from(s)
}

#[derive(Debug, Clone)]
pub struct FactorizeOptions {
    pub input: PathBuf,
    pub output_prefix: PathBuf,
    pub p: Option<u32>,
    pub boolean: bool,
    pub rank: usize,
    pub r_s: Option<usize>,
    pub d: Option<usize>,
    pub q: u32,
    pub restarts: usize,
    pub seed: u64,
    /// Treat the input as a PGM image whatever its extension.
    pub image: bool,
    pub bucket: bool,
    pub timing: bool,
    pub command: String,
}

impl FactorizeOptions {
    fn is_image(&self) -> bool {
        self.image
            || self
                .input
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
    }
}

pub fn run_factorize(opts: &FactorizeOptions) -> Result<RunReport> {
    let algebra = resolve_algebra(opts.p, opts.boolean)?;
    let Selection { algorithm, mut notes } = select_algorithm(opts.rank, opts.r_s, opts.d)?;
    if opts.restarts == 0 {
        return Err(CliError::Flags("--restarts must be at least 1".into()));
    }
    if opts.bucket && !opts.is_image() {
        return Err(CliError::Flags("--bucket only applies to image input".into()));
    }

    let mut image = None;
    let a = if opts.is_image() {
        let original = load_pgm(&opts.input)?;
        let source = if opts.bucket {
            notes.push(format!("gray levels bucketed into {} bins", algebra.modulus()));
            bucket(&original, algebra.modulus() as u32)
        } else {
            original.clone()
        };
        let (a, map) = quantize(&source, algebra)?;
        image = Some((original, map));
        a
    } else {
        load_matrix_csv(&opts.input, algebra)?
    };

    let start = Instant::now();
    let result = algorithm.run(&a, opts.q, opts.restarts, opts.seed)?;
    let elapsed = start.elapsed().as_secs_f64();
    let check = verify(&result, &a, opts.q);
    if !check.is_ok() {
        return Err(CliError::Verification(check.issues.join("; ")));
    }

    let mut outputs = Vec::new();
    let mut emit = |suffix: &str| {
        let path = output_path(&opts.output_prefix, suffix);
        outputs.push(path.display().to_string());
        path
    };
    write_matrix_csv(&emit(".B.csv"), &result.b)?;
    write_matrix_csv(&emit(".U.csv"), &result.u)?;
    write_matrix_csv(&emit(".V.csv"), &result.v)?;
    let mut real_l1_error = None;
    if let Some((original, map)) = &image {
        let restored = dequantize(&result.b, map, original.maxval)?;
        write_pgm(&emit(".B.pgm"), &restored)?;
        real_l1_error = Some(l1_error(original, &restored));
    }
    let text_path = emit(".report.txt");
    let json_path = emit(".report.json");

    let (r_s, d) = match algorithm {
        Algorithm::Lrmf { .. } => (None, None),
        Algorithm::Plrmf { r_s, d } => (Some(r_s), Some(d)),
    };
    let report = RunReport {
        command: opts.command.clone(),
        algebra: algebra.to_string(),
        p: algebra.modulus() as u32,
        algorithm: algorithm.name().into(),
        rank: opts.rank,
        r_s,
        d,
        rank_budget: algorithm.rank_budget(),
        q: opts.q,
        restarts: opts.restarts,
        seed: opts.seed,
        rows: a.rows(),
        cols: a.cols(),
        witness_width: result.u.cols(),
        error: result.error,
        real_l1_error,
        iterations: result.iterations.clone(),
        wall_seconds: opts.timing.then_some(elapsed),
        outputs,
        notes,
    };
    report.write(&text_path, &json_path)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_rules() {
        let lr = select_algorithm(3, None, None).unwrap();
        assert_eq!(lr.algorithm, Algorithm::Lrmf { rank: 3 });
        assert!(lr.notes.is_empty());
        assert_eq!(select_algorithm(5, None, None).unwrap().algorithm, Algorithm::Lrmf { rank: 5 });

        let big = select_algorithm(12, None, None).unwrap();
        assert_eq!(big.algorithm, Algorithm::Plrmf { r_s: 5, d: 2 });
        assert_eq!(big.algorithm.rank_budget(), 10);
        assert_eq!(big.notes.len(), 1);

        assert_eq!(
            select_algorithm(10, Some(5), Some(2)).unwrap().algorithm,
            Algorithm::Plrmf { r_s: 5, d: 2 }
        );
        assert_eq!(
            select_algorithm(6, Some(3), Some(2)).unwrap().algorithm,
            Algorithm::Plrmf { r_s: 3, d: 2 }
        );
        assert_eq!(select_algorithm(4, Some(2), Some(1)).unwrap().algorithm, Algorithm::Plrmf { r_s: 2, d: 1 });
    }

    #[test]
    fn inconsistent_flags() {
        assert!(select_algorithm(0, None, None).is_err());
        assert!(select_algorithm(6, Some(4), Some(2)).is_err());
        assert!(select_algorithm(6, Some(0), None).is_err());
        assert!(select_algorithm(6, None, Some(0)).is_err());
        assert!(resolve_algebra(Some(5), true).is_err());
        assert!(resolve_algebra(None, false).is_err());
        assert!(resolve_algebra(Some(4), false).is_err());
        assert_eq!(resolve_algebra(Some(2), true).unwrap(), Algebra::Boolean);
        assert_eq!(resolve_algebra(None, true).unwrap(), Algebra::Boolean);
    }

    #[test]
    fn output_paths_append_suffix() {
        assert_eq!(output_path(Path::new("out/run1"), ".B.csv"), PathBuf::from("out/run1.B.csv"));
    }
}

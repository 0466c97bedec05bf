//! Synthetic benchmark: random matrices, one error column per rank.

use std::fmt::Write as _;
use std::time::Instant;

use lrmf_core::{derive_seed, Algebra, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, Result};
use crate::run::select_algorithm;

const SOLVER_SALT: u64 = 0x6265_6E63_685F_736C;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub m: usize,
    pub n: usize,
    pub density: f64,
    pub ranks: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub algebra: Algebra,
    pub q: u32,
    pub restarts: usize,
    pub r_s: Option<usize>,
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub rank: usize,
    pub errors: Vec<u64>,
    pub mean_error: f64,
    /// Sample standard deviation; 0 for a single trial.
    pub std_error: f64,
    pub mean_seconds: Option<f64>,
}

/// Each entry is nonzero with probability `density`; nonzero entries are
/// uniform over `1..p`.
pub fn synth_matrix<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize, density: f64, algebra: Algebra) -> Matrix {
    let p = algebra.modulus();
    let data = (0..m * n)
        .map(|_| {
            if rng.random_bool(density) {
                rng.random_range(1..p)
            } else {
                0
            }
        })
        .collect();
    Matrix::new(m, n, algebra, data).expect("dimensions validated by caller")
}

/// Matrix for trial `t` and the master seed its solver runs get.
pub fn trial_seeds(seed: u64, trial: usize) -> (u64, u64) {
    (derive_seed(seed, trial as u64), derive_seed(seed ^ SOLVER_SALT, trial as u64))
}

pub fn bench_synth(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.m == 0 || cfg.n == 0 {
        return Err(CliError::Flags("--m and --n must be positive".into()));
    }
    if !(0.0..=1.0).contains(&cfg.density) {
        return Err(CliError::Flags(format!("--density {} outside [0, 1]", cfg.density)));
    }
    if cfg.trials == 0 || cfg.ranks.is_empty() {
        return Err(CliError::Flags("need at least one trial and one rank".into()));
    }
    if cfg.restarts == 0 {
        return Err(CliError::Flags("--restarts must be at least 1".into()));
    }
    let algorithms = cfg
        .ranks
        .iter()
        .map(|&r| Ok(select_algorithm(r, cfg.r_s, None)?.algorithm))
        .collect::<Result<Vec<_>>>()?;
    let matrices: Vec<(Matrix, u64)> = (0..cfg.trials)
        .map(|t| {
            let (data_seed, solver_seed) = trial_seeds(cfg.seed, t);
            let a = synth_matrix(&mut ChaCha8Rng::seed_from_u64(data_seed), cfg.m, cfg.n, cfg.density, cfg.algebra);
            (a, solver_seed)
        })
        .collect();

    let mut rows = Vec::with_capacity(cfg.ranks.len());
    for (&rank, algorithm) in cfg.ranks.iter().zip(&algorithms) {
        let mut errors = Vec::with_capacity(cfg.trials);
        let mut seconds = 0.0;
        for (a, solver_seed) in &matrices {
            let start = Instant::now();
            let res = algorithm.run(a, cfg.q, cfg.restarts, *solver_seed)?;
            seconds += start.elapsed().as_secs_f64();
            errors.push(res.error);
        }
        let t = errors.len() as f64;
        let mean = errors.iter().sum::<u64>() as f64 / t;
        let var = if errors.len() > 1 {
            errors.iter().map(|&e| (e as f64 - mean).powi(2)).sum::<f64>() / (t - 1.0)
        } else {
            0.0
        };
        rows.push(BenchRow {
            rank,
            errors,
            mean_error: mean,
            std_error: var.sqrt(),
            mean_seconds: cfg.timing.then_some(seconds / t),
        });
    }
    Ok(rows)
}

/// `rank,mean_error,std_error,mean_seconds`; missing timings print as `NA`.
pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("rank,mean_error,std_error,mean_seconds\n");
    for row in rows {
        let secs = row.mean_seconds.map_or_else(|| "NA".to_string(), |s| format!("{s:.6}"));
        writeln!(out, "{},{:.3},{:.3},{}", row.rank, row.mean_error, row.std_error, secs).expect("writing to a string");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> BenchConfig {
        BenchConfig {
            m: 6,
            n: 10,
            density: 0.5,
            ranks: vec![1, 2],
            trials: 3,
            seed: 11,
            algebra: Algebra::field(2).unwrap(),
            q: 1,
            restarts: 2,
            r_s: None,
            timing: false,
        }
    }

    #[test]
    fn zero_density_gives_zero_error() {
        let cfg = BenchConfig {
            density: 0.0,
            ranks: vec![1],
            trials: 1,
            ..config()
        };
        let rows = bench_synth(&cfg).unwrap();
        assert_eq!(rows[0].mean_error, 0.0);
        assert_eq!(to_csv(&rows), "rank,mean_error,std_error,mean_seconds\n1,0.000,0.000,NA\n");
    }

    #[test]
    fn same_seed_same_table() {
        let a = to_csv(&bench_synth(&config()).unwrap());
        let b = to_csv(&bench_synth(&config()).unwrap());
        assert_eq!(a, b);
        let other = to_csv(&bench_synth(&BenchConfig { seed: 12, ..config() }).unwrap());
        assert_ne!(a, other);
    }

    #[test]
    fn sample_standard_deviation() {
        let rows = bench_synth(&config()).unwrap();
        for row in rows {
            let t = row.errors.len() as f64;
            let mean = row.errors.iter().sum::<u64>() as f64 / t;
            let ss: f64 = row.errors.iter().map(|&e| (e as f64 - mean).powi(2)).sum();
            assert!((row.std_error - (ss / (t - 1.0)).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn density_controls_fill() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = synth_matrix(&mut rng, 50, 100, 0.5, Algebra::field(5).unwrap());
        let nz = a.count_nonzero();
        assert!((2300..2700).contains(&nz), "{nz}");
        assert!(synth_matrix(&mut rng, 4, 4, 1.0, Algebra::Boolean).as_slice().iter().all(|&v| v == 1));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(bench_synth(&BenchConfig { density: 1.5, ..config() }).is_err());
        assert!(bench_synth(&BenchConfig { ranks: vec![], ..config() }).is_err());
        assert!(bench_synth(&BenchConfig { trials: 0, ..config() }).is_err());
    }
}

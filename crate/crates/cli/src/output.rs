use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use time4_netsim::{sweep, SimError, SweepPoint, SweepRow};

/// A grid of points, each run under the same number of seeds.
#[derive(Debug, Clone)]
pub struct Job {
    pub points: Vec<SweepPoint>,
    pub seeds: u64,
}

impl Job {
    pub fn seed_list(&self, base: u64) -> Vec<u64> {
        (0..self.seeds).map(|i| base.wrapping_add(i)).collect()
    }

    pub fn run(&self, base: u64) -> Result<Vec<SweepRow>, SimError> {
        sweep(&self.points, &self.seed_list(base))
    }
}

/// Runs `f` on a pool of `jobs` threads, or on the global pool.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(crate::usage("--jobs must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().context("building the worker pool")?;
            Ok(pool.install(f))
        }
    }
}

pub fn write_csv<T: Serialize>(w: &mut dyn Write, rows: &[T]) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes to `path` when given, else to `stdout`.
pub fn emit(path: Option<&Path>, stdout: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> anyhow::Result<()>) -> anyhow::Result<()> {
    match path {
        Some(p) => {
            let mut file = std::io::BufWriter::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?);
            f(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => f(stdout),
    }
}

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use spdc_core::stats_io::fmt_f64;
use spdc_core::TimeGrid;

use super::exact::run_exact;
use super::{default_tau_max, grid, Output};
use crate::config::{at_least, positive, ConfigFile, Resolver};
use crate::error::CliError;
use crate::BenchArgs;

pub const DEFAULT_N_LIST: [u64; 3] = [1, 100, 10_000];

/// Peak resident set size of this process in MiB (Linux only).
pub fn peak_rss_mib() -> Option<f64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kib: f64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kib / 1024.0)
}

pub fn run(args: BenchArgs, config: Option<&ConfigFile>, out: &Path) -> Result<(), CliError> {
    let mut r = Resolver::new(config);
    let mut ns: Vec<u64> = r.take("n", args.n, || DEFAULT_N_LIST.to_vec())?;
    let tau_override = r.take_opt("tau-max", args.tau_max)?;
    let samples = at_least("samples", r.take("samples", args.samples, || 101)?, 2)?;
    let max_rss = r.take_opt("max-rss-mib", args.max_rss_mib)?;
    if let Some(t) = tau_override {
        positive("tau-max", t)?;
    }
    if let Some(m) = max_rss {
        positive("max-rss-mib", m)?;
    }
    if ns.is_empty() || ns.contains(&0) {
        return Err(CliError::Validation("--n needs positive values".into()));
    }
    // peak memory is process-wide, so ascending order attributes it to the largest n so far
    ns.sort_unstable();
    ns.dedup();
    let grids = ns
        .iter()
        .map(|&n| grid(tau_override.unwrap_or_else(|| default_tau_max(n)), samples, TimeGrid::DEFAULT_REL_TOL))
        .collect::<Result<Vec<_>, _>>()?;
    let mut output = Output::create(out, "bench", r.finish()?)?;

    let mut csv = String::from("n,tau_max,samples,wall_seconds,peak_rss_mib,state_mib,norm_drift\n");
    println!("{:>9} {:>12} {:>12} {:>14} {:>10}", "n", "tau_max", "wall [s]", "peak RSS [MiB]", "state [MiB]");
    let mut worst_rss: f64 = 0.0;
    for (&n, g) in ns.iter().zip(&grids) {
        let start = Instant::now();
        let run = run_exact(n, g)?;
        let wall = start.elapsed().as_secs_f64();
        let rss = peak_rss_mib().unwrap_or(f64::NAN);
        worst_rss = worst_rss.max(rss);
        // ten integrator buffers plus the sampled state and its distribution
        let state = 13.0 * 8.0 * (n + 1) as f64 / (1024.0 * 1024.0);
        let _ = writeln!(
            csv,
            "{n},{},{samples},{},{},{},{}",
            fmt_f64(g.tau_max),
            fmt_f64(wall),
            fmt_f64(rss),
            fmt_f64(state),
            fmt_f64(run.max_norm_drift)
        );
        println!("{n:>9} {:>12.4e} {wall:>12.4} {rss:>14.1} {state:>10.2}", g.tau_max);
    }
    fs::write(output.path("bench.csv"), csv).map_err(|e| CliError::Io(e.to_string()))?;
    output.record("bench.csv")?;
    output.finish()?;

    match max_rss {
        Some(limit) if !(worst_rss <= limit) => {
            Err(CliError::Check(format!("peak resident memory {worst_rss:.1} MiB exceeds {limit} MiB")))
        }
        _ => Ok(()),
    }
}

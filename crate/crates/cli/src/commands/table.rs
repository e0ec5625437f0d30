use std::path::Path;

use rayon::prelude::*;
use spdc_core::exact::{find_mu_max, MuMaxResult, MuMaxSearchConfig};
use spdc_core::stats_io::{mumax_table, write_mumax_table, TableFormat};

use super::Output;
use crate::config::{positive, ConfigFile, Resolver};
use crate::error::CliError;
use crate::{FormatArg, TableArgs};

pub const DEFAULT_N_LIST: [u64; 7] = [1, 2, 10, 100, 500, 1000, 10_000];

/// One row per `n`; a failed search becomes a non-converged NaN row.
pub fn mumax_rows(ns: &[u64], cfg: &MuMaxSearchConfig) -> Vec<(MuMaxResult, Option<String>)> {
    ns.par_iter()
        .map(|&n| match find_mu_max(n as usize, cfg) {
            Ok(r) => (r, None),
            Err(e) => (MuMaxResult::failed(n as usize), Some(e.to_string())),
        })
        .collect()
}

pub fn run(args: TableArgs, config: Option<&ConfigFile>, out: &Path) -> Result<(), CliError> {
    let mut r = Resolver::new(config);
    let mut ns: Vec<u64> = r.take("n", args.n, || DEFAULT_N_LIST.to_vec())?;
    let format: FormatArg = r.take("format", args.format, || FormatArg::Markdown)?;
    let tol = positive("tol", r.take("tol", args.tol, || MuMaxSearchConfig::default().rel_tol)?)?;
    if ns.is_empty() {
        return Err(CliError::Validation("--n needs at least one value".into()));
    }
    if ns.contains(&0) {
        return Err(CliError::Validation("--n values must be positive".into()));
    }
    ns.sort_unstable();
    if ns.windows(2).any(|w| w[0] == w[1]) {
        return Err(CliError::Validation("--n contains duplicates".into()));
    }
    let params = r.finish()?;
    let mut output = Output::create(out, "mumax-table", params)?;

    let cfg = MuMaxSearchConfig { rel_tol: tol, abs_tol: tol * 1e-2, ..Default::default() };
    let rows = mumax_rows(&ns, &cfg);
    for (row, err) in &rows {
        if let Some(e) = err {
            eprintln!("n = {}: {e}", row.n);
        }
    }
    let results: Vec<MuMaxResult> = rows.iter().map(|(r, _)| r.clone()).collect();
    let (name, fmt) = match format {
        FormatArg::Csv => ("mumax.csv", TableFormat::Csv),
        FormatArg::Markdown => ("mumax.md", TableFormat::Markdown),
    };
    write_mumax_table(&results, &output.path(name), fmt)?;
    output.record(name)?;
    output.finish()?;
    print!("{}", mumax_table(&results, TableFormat::Markdown));

    let failed: Vec<String> = rows.iter().filter(|(_, e)| e.is_some()).map(|(r, _)| r.n.to_string()).collect();
    if !failed.is_empty() {
        return Err(CliError::Numerical(format!("search failed for n = {}", failed.join(", "))));
    }
    Ok(())
}

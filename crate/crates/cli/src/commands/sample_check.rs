use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use spdc_core::phase_space::{
    sample_pump_fock_pp, sample_pump_fock_tw, sample_vacuum, tw_ring_fourth_moment, Representation, TrajectoryRng,
};
use spdc_core::stats_io::fmt_f64;

use super::Output;
use crate::config::{at_least, required, ConfigFile, Resolver};
use crate::error::CliError;
use crate::{RepresentationArg, SampleCheckArgs};

pub const Z_LIMIT: f64 = 5.0;

#[derive(Debug, Clone)]
pub struct MomentCheck {
    pub name: &'static str,
    pub estimate: f64,
    pub se: f64,
    pub expected: f64,
}

impl MomentCheck {
    fn from_samples(name: &'static str, xs: &[f64], expected: f64) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        MomentCheck { name, estimate: mean, se: (var / n).sqrt(), expected }
    }

    /// Round-off allowance for moments that are deterministic.
    fn slack(&self) -> f64 {
        1e-9 * self.expected.abs().max(1.0)
    }

    pub fn passes(&self) -> bool {
        (self.estimate - self.expected).abs() <= Z_LIMIT * self.se + self.slack()
    }

    pub fn z(&self) -> f64 {
        let diff = (self.estimate - self.expected).abs();
        if self.se > 0.0 {
            diff / self.se
        } else if diff <= self.slack() {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

pub fn sample_moments(rep: Representation, n: u64, samples: usize, seed: u64) -> Vec<MomentCheck> {
    let mut rng = TrajectoryRng::new(seed, 0);
    let nf = n as f64;
    match rep {
        Representation::PositiveP => {
            let mut first = Vec::with_capacity(samples);
            let mut second = Vec::with_capacity(samples);
            let mut amp = Vec::with_capacity(samples);
            for _ in 0..samples {
                let (g, gp) = sample_pump_fock_pp(n, &mut rng);
                first.push((gp * g).re);
                second.push((gp * gp * g * g).re);
                amp.push(g.re);
            }
            vec![
                MomentCheck::from_samples("gamma+ gamma", &first, nf),
                MomentCheck::from_samples("gamma+^2 gamma^2", &second, nf * (nf - 1.0)),
                MomentCheck::from_samples("re gamma", &amp, 0.0),
            ]
        }
        Representation::TruncatedWigner => {
            let mut second = Vec::with_capacity(samples);
            let mut fourth = Vec::with_capacity(samples);
            let mut vac = Vec::with_capacity(samples);
            let mut vac_sq = Vec::with_capacity(samples);
            for _ in 0..samples {
                let g = sample_pump_fock_tw(n, &mut rng);
                second.push(g.norm_sqr());
                fourth.push(g.norm_sqr().powi(2));
                let (a, _) = sample_vacuum(rep, &mut rng);
                vac.push(a.norm_sqr());
                vac_sq.push((a * a).re);
            }
            let (ring, _) = tw_ring_fourth_moment(n);
            vec![
                MomentCheck::from_samples("|gamma|^2", &second, nf + 0.5),
                MomentCheck::from_samples("|gamma|^4", &fourth, ring),
                MomentCheck::from_samples("vacuum |alpha|^2", &vac, 0.5),
                MomentCheck::from_samples("vacuum re alpha^2", &vac_sq, 0.0),
            ]
        }
    }
}

pub fn run(args: SampleCheckArgs, config: Option<&ConfigFile>, out: &Path) -> Result<(), CliError> {
    let mut r = Resolver::new(config);
    let rep: RepresentationArg = r.take("representation", args.representation, || RepresentationArg::PositiveP)?;
    let n = required("n", r.take_opt("n", args.n)?)?;
    let samples = at_least("samples", r.take("samples", args.samples, || 1_000_000)?, 1000)?;
    let seed = r.take("seed", args.seed, || 1)?;
    let mut output = Output::create(out, "sample-check", r.finish()?)?;

    let checks = sample_moments(rep.into(), n, samples, seed);
    let mut csv = String::from("moment,estimate,se,expected,z\n");
    for c in &checks {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            c.name,
            fmt_f64(c.estimate),
            fmt_f64(c.se),
            fmt_f64(c.expected),
            fmt_f64(c.z())
        );
        println!(
            "{:<20} {:>16.8} ± {:<12.3e} expected {:<14} z = {:.2} {}",
            c.name,
            c.estimate,
            c.se,
            c.expected,
            c.z(),
            if c.passes() { "ok" } else { "FAIL" }
        );
    }
    if rep == RepresentationArg::TruncatedWigner {
        let (ring, fock) = tw_ring_fourth_moment(n);
        println!("ring |gamma|^4 = {ring}, Fock symmetric moment = {fock} (relative gap {:.3e})", (fock - ring) / fock);
    }
    fs::write(output.path("moments.csv"), csv).map_err(|e| CliError::Io(e.to_string()))?;
    output.record("moments.csv")?;
    output.finish()?;

    let failed: Vec<&str> = checks.iter().filter(|c| !c.passes()).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(format!("moments beyond {Z_LIMIT} SE: {}", failed.join(", "))))
    }
}

//! Seeded Monte Carlo runner.
//!
//! Trial `t` draws all of its randomness from stream `t` of the experiment
//! seed, so records do not depend on how trials are scheduled.

use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Algorithm, ExperimentConfig, ResolvedExperiment, Task};
use super::record::{write_csv, TrialRecord};
use super::stats::{wilson_interval, MeanEstimate, WilsonInterval, Z_95};
use crate::env::RngStream;
use crate::error::{Error, Result};
use crate::explore::{
    ceil_budget, find_best, median_elimination, pac_bar, r_bar_regret, r_bar_sample, regret_bound,
    regret_budgets, sample_budget,
};
use crate::osmd::run_osmd;

/// `gap < eps`, where gaps within `1e-12` of `eps` count as equal to it.
/// Without `eps` the gap must be zero.
pub fn is_eps_optimal(gap: f64, eps: Option<f64>) -> bool {
    match eps {
        Some(e) => gap < e - 1e-12 * e.max(1.0),
        None => gap.abs() <= 1e-12,
    }
}

/// Run one trial of a resolved experiment.
pub fn run_trial(exp: &ResolvedExperiment, trial_id: u64) -> Result<TrialRecord> {
    let inst = &exp.instance;
    let n = inst.n_arms();
    let all: Vec<usize> = (0..n).collect();
    let mut rng = RngStream::new(exp.seed, trial_id);
    let record = |m, eps_or_r: Option<f64>, delta, samples, regret, gap: f64| TrialRecord {
        trial_id,
        algorithm: exp.algorithm.name().to_string(),
        n,
        m,
        eps_or_r,
        delta,
        samples_used: samples,
        realized_regret: regret,
        realized_gap: gap,
        contains_eps_optimal: is_eps_optimal(gap, eps_or_r),
    };
    Ok(match &exp.task {
        Task::Osmd { osmd } => {
            let stats = run_osmd(&all, inst, osmd, &mut rng)?;
            let regret = stats.regret(inst);
            let avg_gap = if stats.rounds() > 0 {
                regret / stats.rounds() as f64
            } else {
                0.0
            };
            record(n, None, None, stats.rounds(), regret, avg_gap)
        }
        Task::MedianElimination { eps, delta } => {
            let out = median_elimination(&all, *eps, *delta, inst, &mut rng)?;
            let gap = inst.gap(out.arm);
            record(
                1,
                Some(*eps),
                Some(*delta),
                out.samples,
                out.stats.regret(inst),
                gap,
            )
        }
        Task::PacBar { params } => {
            let res = pac_bar(params, inst, &mut rng)?;
            let gap = res.gap(inst);
            record(
                params.m,
                Some(params.eps),
                Some(params.delta),
                res.samples_used,
                res.regret(inst),
                gap,
            )
        }
        Task::FindBest { osmd } => {
            let (arm, stats) = find_best(&all, osmd.rounds, inst, osmd, &mut rng)?;
            record(
                1,
                None,
                None,
                stats.rounds(),
                stats.regret(inst),
                inst.gap(arm),
            )
        }
        Task::RbarSample { m, r, osmd } => {
            let res = r_bar_sample(*m, *r, inst, osmd, &mut rng)?;
            record(
                *m,
                Some(*r),
                None,
                res.samples_used,
                res.regret(inst),
                res.gap(inst),
            )
        }
        Task::RbarRegret { m, r, osmd } => {
            let res = r_bar_regret(*m, *r, inst, osmd, &mut rng)?;
            record(
                *m,
                Some(*r),
                None,
                res.samples_used,
                res.regret(inst),
                res.gap(inst),
            )
        }
    })
}

/// Run every trial, in trial-id order, on a pool of `parallelism` threads.
pub fn run_trials(exp: &ResolvedExperiment) -> Result<Vec<TrialRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(exp.parallelism)
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| {
        (0..exp.trials)
            .into_par_iter()
            .map(|t| run_trial(exp, t))
            .collect()
    })
}

/// A closed-form guarantee checked against Monte Carlo estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    /// Estimate compared with the limit (`mean + 3 SE` or a Wilson upper bound).
    pub observed: f64,
    pub limit: f64,
    /// Whether equality passes.
    pub inclusive: bool,
    pub passed: bool,
}

impl Gate {
    pub fn new(name: impl Into<String>, observed: f64, limit: f64, inclusive: bool) -> Self {
        let passed = if inclusive {
            observed <= limit
        } else {
            observed < limit
        };
        Self {
            name: name.into(),
            observed,
            limit,
            inclusive,
            passed,
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {:.6} {} {:.6}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.observed,
            if self.inclusive { "<=" } else { "<" },
            self.limit
        )
    }
}

/// Aggregates over all trials of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub algorithm: Algorithm,
    pub trials: u64,
    pub samples: MeanEstimate,
    pub regret: MeanEstimate,
    pub gap: MeanEstimate,
    /// Trials whose retained set missed the target (see `contains_eps_optimal`).
    pub failures: WilsonInterval,
    pub gates: Vec<Gate>,
    /// Order-of-magnitude reference expressions, printed and never asserted.
    pub references: Vec<(String, f64)>,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "algorithm      {}", self.algorithm)?;
        writeln!(f, "trials         {}", self.trials)?;
        writeln!(
            f,
            "samples        {:.3} ± {:.3}",
            self.samples.mean, self.samples.std_error
        )?;
        writeln!(
            f,
            "regret         {:.4} ± {:.4}",
            self.regret.mean, self.regret.std_error
        )?;
        writeln!(
            f,
            "gap            {:.6} ± {:.6}",
            self.gap.mean, self.gap.std_error
        )?;
        writeln!(
            f,
            "failure rate   {:.5} (Wilson 95% [{:.5}, {:.5}])",
            self.failures.rate(),
            self.failures.lower,
            self.failures.upper
        )?;
        for (name, value) in &self.references {
            writeln!(f, "reference      {name} = {value:.3}")?;
        }
        for gate in &self.gates {
            writeln!(f, "{gate}")?;
        }
        Ok(())
    }
}

/// Fold records (in trial order) into a summary and evaluate the guarantee
/// that applies to the algorithm.
pub fn summarize(exp: &ResolvedExperiment, records: &[TrialRecord]) -> Summary {
    let col = |f: fn(&TrialRecord) -> f64| records.iter().map(f).collect::<Vec<_>>();
    let samples = MeanEstimate::from_samples(&col(|r| r.samples_used as f64));
    let regret = MeanEstimate::from_samples(&col(|r| r.realized_regret));
    let gap = MeanEstimate::from_samples(&col(|r| r.realized_gap));
    let misses = records.iter().filter(|r| !r.contains_eps_optimal).count() as u64;
    let failures = wilson_interval(misses, records.len() as u64, Z_95);

    let n = exp.instance.n_arms();
    let nf = n as f64;
    let mut gates = Vec::new();
    let mut references = Vec::new();
    match &exp.task {
        Task::Osmd { osmd } => {
            let t = osmd.rounds as f64;
            gates.push(Gate::new(
                "regret mean+3SE <= sqrt(2nT)",
                regret.upper3(),
                (2.0 * nf * t).sqrt(),
                true,
            ));
        }
        Task::FindBest { osmd } => {
            let t = osmd.rounds as f64;
            gates.push(Gate::new(
                "gap mean+3SE <= sqrt(2n/T)",
                gap.upper3(),
                (2.0 * nf / t).sqrt(),
                true,
            ));
        }
        Task::MedianElimination { eps, delta } => {
            gates.push(Gate::new(
                "failure Wilson upper <= delta",
                failures.upper,
                *delta,
                true,
            ));
            references.push((
                "n/eps^2 ln(1/delta)".into(),
                nf / (eps * eps) * (1.0 / delta).ln(),
            ));
        }
        Task::PacBar { params } => {
            gates.push(Gate::new(
                "failure Wilson upper <= delta",
                failures.upper,
                params.delta,
                true,
            ));
            let k = (n - params.m + 1) as f64;
            references.push((
                "(n-m+1)/eps^2 ln((n-m+1)/(n delta))".into(),
                k / (params.eps * params.eps) * (k / (nf * params.delta)).ln().max(0.0),
            ));
        }
        Task::RbarSample { m, r, .. } => {
            gates.push(Gate::new("gap mean+3SE < r", gap.upper3(), *r, false));
            references.push(("2(n-m+2)^3/(nr)^2".into(), sample_budget(n, *m, *r)));
            references.push((
                "(n-m)^3/(nr)^2".into(),
                ((n - m) as f64).powi(3) / (nf * r).powi(2),
            ));
        }
        Task::RbarRegret { m, r, .. } => {
            gates.push(Gate::new("gap mean+3SE < r", gap.upper3(), *r, false));
            let limit = if *m == 1 {
                2.0 * nf / r
            } else {
                let (l1, l2) = regret_budgets(n, *m, *r);
                regret_bound(n, *m, ceil_budget(l1) as f64, ceil_budget(l2) as f64)
            };
            gates.push(Gate::new(
                "regret mean+3SE <= closed-form bound",
                regret.upper3(),
                limit,
                true,
            ));
            references.push(("(n-m)^2/(nr)".into(), ((n - m) as f64).powi(2) / (nf * r)));
        }
    }
    Summary {
        algorithm: exp.algorithm,
        trials: records.len() as u64,
        samples,
        regret,
        gap,
        failures,
        gates,
        references,
    }
}

/// Result of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

/// Run all trials, write the CSV to `config.output_path` when set, and summarize.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let exp = config.resolve()?;
    let records = run_trials(&exp)?;
    if let Some(path) = &config.output_path {
        write_records(path, &records)?;
    }
    let summary = summarize(&exp, &records);
    Ok(ExperimentOutput { records, summary })
}

pub fn write_records(path: &Path, records: &[TrialRecord]) -> Result<()> {
    let file = File::create(path)?;
    write_csv(records, BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(alg: &str, instance: &str, params: &str, trials: u64) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{"algorithm":"{alg}","instance":{instance},"params":{params},"trials":{trials},"seed":5}}"#
        ))
        .unwrap()
    }

    #[test]
    fn single_arm_find_best() {
        let cfg = config("find-best", "[0.3]", r#"{"rounds":50}"#, 1);
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.records.len(), 1);
        let r = &out.records[0];
        assert_eq!(r.realized_gap, 0.0);
        assert_eq!(r.realized_regret, 0.0);
        assert_eq!(r.samples_used, 50);
        assert!(r.contains_eps_optimal);
    }

    #[test]
    fn parallelism_does_not_change_records() {
        let mut cfg = config(
            "rbar-regret",
            r#"{"family":"H","n":6,"eps":0.1}"#,
            r#"{"m":3,"r":0.3}"#,
            24,
        );
        let serial = run_experiment(&cfg).unwrap();
        cfg.parallelism = 4;
        let parallel = run_experiment(&cfg).unwrap();
        assert_eq!(serial.records, parallel.records);
        assert_eq!(serial.summary, parallel.summary);
    }

    #[test]
    fn csv_is_written_and_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let mut cfg = config(
            "pac-bar",
            "[0.6,0.5,0.5,0.4]",
            r#"{"eps":0.3,"delta":0.2,"m":2}"#,
            5,
        );
        cfg.output_path = Some(path.clone());
        run_experiment(&cfg).unwrap();
        let first = std::fs::read(&path).unwrap();
        run_experiment(&cfg).unwrap();
        assert_eq!(first, std::fs::read(&path).unwrap());
        let parsed = super::super::record::read_csv(first.as_slice()).unwrap();
        assert_eq!(parsed.len(), 5);
    }

    #[test]
    fn unwritable_output_is_io_error() {
        let mut cfg = config("osmd", "[0.5,0.4]", r#"{"rounds":10}"#, 1);
        cfg.output_path = Some("/nonexistent-dir/x/out.csv".into());
        assert!(matches!(run_experiment(&cfg), Err(Error::Io(_))));
    }

    #[test]
    fn osmd_records_average_gap() {
        let cfg = config("osmd", "[0.6,0.5]", r#"{"rounds":100}"#, 3);
        let out = run_experiment(&cfg).unwrap();
        for r in &out.records {
            assert!((r.realized_gap * 100.0 - r.realized_regret).abs() < 1e-9);
        }
        assert_eq!(out.summary.gates.len(), 1);
    }
}

//! One driver per experiment. Each returns records sorted by
//! `(experiment, dim, trial)`; side artifacts are returned as named text
//! blobs for the caller to write.

use std::f64::consts::SQRT_2;
use std::time::Instant;

use freebell::bell::{
    chsh_norm_via_commutators, complex_chsh_classical_value, complex_chsh_norm,
    fine_grained_uncertainty, folner_phased_expectation, folner_uniform_expectation,
    freeness_trial, steering_lhs_bound, truncated_chsh_norm, ChshSettings,
};
use freebell::freealg::free_sum_moment;
use freebell::moments::{
    catalan, chsh_q, root_limit, sum_moment_n2, MomentSequence, CHSH_ROOT_CAP,
};
use freebell::observables::{
    anticommuting_family, random_family, truncated_free_family, FamilyLabel,
};
use freebell::{ObservableFamily, RngStream};
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Experiment, RunConfig};
use crate::record::{sort_records, RunRecord};
use crate::CliError;

const TSIRELSON: f64 = 2.0 * SQRT_2;

/// Records plus any extra files an experiment produces.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub records: Vec<RunRecord>,
    /// `(file name, contents)`.
    pub artifacts: Vec<(String, String)>,
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let mut out = pool.install(|| match cfg.experiment {
        Experiment::ChshRandom => run_chsh_random(cfg).map(RunOutput::from),
        Experiment::ChshTruncated => run_chsh_truncated(cfg).map(RunOutput::from),
        Experiment::Steering => run_steering(cfg).map(RunOutput::from),
        Experiment::Uncertainty => run_uncertainty(cfg).map(RunOutput::from),
        Experiment::Moments => run_moments(cfg),
        Experiment::Freeness => run_freeness(cfg).map(RunOutput::from),
        Experiment::ComplexChsh => run_complex_chsh(cfg),
        Experiment::Folner => run_folner(cfg).map(RunOutput::from),
    })?;
    sort_records(&mut out.records);
    if let Some(summary) = summarize(&out.records) {
        out.artifacts.push(("summary.json".into(), summary));
    }
    Ok(out)
}

impl From<Vec<RunRecord>> for RunOutput {
    fn from(records: Vec<RunRecord>) -> Self {
        Self {
            records,
            artifacts: Vec::new(),
        }
    }
}

/// Seed for trial `(dim, trial)`; `RngStream::new(seed, 0)` replays it.
pub fn trial_seed(master_seed: u64, dim: usize, trial: usize) -> u64 {
    RngStream::derive_seed(master_seed, &[dim as u64, trial as u64])
}

fn grid(cfg: &RunConfig) -> Vec<(usize, usize)> {
    cfg.dims
        .iter()
        .flat_map(|&d| (0..cfg.trials).map(move |t| (d, t)))
        .collect()
}

/// Runs `f` over every `(dim, trial)` in parallel and stamps timing.
fn par_trials<F>(cfg: &RunConfig, f: F) -> Result<Vec<RunRecord>, CliError>
where
    F: Fn(usize, usize, u64) -> Result<RunRecord, CliError> + Sync,
{
    let mut records = grid(cfg)
        .into_par_iter()
        .map(|(dim, trial)| {
            timed(cfg, || {
                f(dim, trial, trial_seed(cfg.master_seed, dim, trial))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    sort_records(&mut records);
    Ok(records)
}

fn timed(
    cfg: &RunConfig,
    f: impl FnOnce() -> Result<RunRecord, CliError>,
) -> Result<RunRecord, CliError> {
    let start = Instant::now();
    let mut r = f()?;
    if cfg.timing {
        r.wall_ms = start.elapsed().as_millis() as u64;
    }
    Ok(r)
}

pub fn run_chsh_random(cfg: &RunConfig) -> Result<Vec<RunRecord>, CliError> {
    par_trials(cfg, |dim, trial, seed| {
        let mut rng = RngStream::new(seed, 0);
        let s = ChshSettings::random(dim, &mut rng)?;
        let value = chsh_norm_via_commutators(&s)?;
        Ok(RunRecord::new(
            "chsh-random",
            dim,
            trial,
            seed,
            value,
            TSIRELSON,
        ))
    })
}

pub fn run_chsh_truncated(cfg: &RunConfig) -> Result<Vec<RunRecord>, CliError> {
    cfg.dims
        .iter()
        .map(|&dim| {
            timed(cfg, || {
                Ok(RunRecord::new(
                    "chsh-truncated",
                    dim,
                    0,
                    0,
                    truncated_chsh_norm(dim)?,
                    TSIRELSON,
                ))
            })
        })
        .collect()
}

fn families(cfg: &RunConfig) -> Vec<FamilyLabel> {
    cfg.families.iter().filter_map(|f| f.parse().ok()).collect()
}

/// Runs `eval` on every requested family. Random families run at every even
/// configured dimension and trial; the anticommuting family runs once at its
/// natural dimension; the truncated pair (only when `n = 2`) runs at every
/// odd configured dimension.
fn over_families<F>(cfg: &RunConfig, prefix: &str, eval: F) -> Result<Vec<RunRecord>, CliError>
where
    F: Fn(&ObservableFamily) -> Result<(f64, f64), CliError> + Sync,
{
    let n = cfg.n_observables;
    let mut records = Vec::new();
    for label in families(cfg) {
        let name = format!("{prefix}:{label}");
        match label {
            FamilyLabel::Random => {
                let even = RunConfig {
                    dims: cfg.dims.iter().copied().filter(|d| d % 2 == 0).collect(),
                    ..cfg.clone()
                };
                records.extend(par_trials(&even, |dim, trial, seed| {
                    let fam = random_family(dim, n, &mut RngStream::new(seed, 0))?;
                    let (value, reference) = eval(&fam)?;
                    Ok(RunRecord::new(
                        name.clone(),
                        dim,
                        trial,
                        seed,
                        value,
                        reference,
                    ))
                })?);
            }
            FamilyLabel::Anticommuting => {
                records.push(timed(cfg, || {
                    let fam = anticommuting_family(n)?;
                    let (value, reference) = eval(&fam)?;
                    Ok(RunRecord::new(
                        name.clone(),
                        fam.dim(),
                        0,
                        0,
                        value,
                        reference,
                    ))
                })?);
            }
            FamilyLabel::TruncatedFree if n == 2 => {
                for &dim in cfg.dims.iter().filter(|&&d| d % 2 == 1 && d >= 3) {
                    records.push(timed(cfg, || {
                        let (value, reference) = eval(&truncated_free_family(dim)?)?;
                        Ok(RunRecord::new(name.clone(), dim, 0, 0, value, reference))
                    })?);
                }
            }
            _ => {}
        }
    }
    sort_records(&mut records);
    Ok(records)
}

pub fn run_steering(cfg: &RunConfig) -> Result<Vec<RunRecord>, CliError> {
    over_families(cfg, "steering", |fam| {
        let r = steering_lhs_bound(fam)?;
        Ok((r.bound_value, r.reference_2sqrt_n))
    })
}

pub fn run_uncertainty(cfg: &RunConfig) -> Result<Vec<RunRecord>, CliError> {
    over_families(cfg, "uncertainty", |fam| {
        let r = fine_grained_uncertainty(fam)?;
        Ok((r.xi, r.bound_half_plus_inv_sqrt_n))
    })
}

pub const MOMENTS_HEADER: &str = "k,chsh_q,chsh_root,sum_moment_n2,free_sum_moment,catalan_bound";

/// Writes `moments.csv` and one record per `k ≥ 1` holding
/// `(Q_{2k})^{1/2k}` against the limit 8.
pub fn run_moments(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    if cfg.k_max > CHSH_ROOT_CAP {
        return Err(freebell::Error::ArgumentCap {
            what: "moments k_max",
            value: cfg.k_max,
            cap: CHSH_ROOT_CAP,
        }
        .into());
    }
    let n = cfg.n_observables.max(1);
    let q = MomentSequence::chsh(2 * cfg.k_max + 1);
    let nb = BigUint::from(n);
    let rows: Vec<(String, Option<f64>)> = (0..=cfg.k_max)
        .into_par_iter()
        .map(|k| {
            let root = if k >= 1 {
                Some(root_limit(&q, k)?)
            } else {
                None
            };
            let walk = free_sum_moment(n, k);
            let bound_ok = walk <= catalan(k as u64) * nb.pow(k as u32);
            let line = format!(
                "{k},{},{},{},{},{}",
                chsh_q(k as u64),
                root.map(|r| r.to_string()).unwrap_or_default(),
                sum_moment_n2(k as u64),
                walk,
                bound_ok
            );
            Ok((line, root))
        })
        .collect::<Result<_, freebell::Error>>()?;

    let mut csv = String::from(MOMENTS_HEADER);
    csv.push('\n');
    let mut records = Vec::new();
    for (k, (line, root)) in rows.into_iter().enumerate() {
        csv.push_str(&line);
        csv.push('\n');
        if let Some(r) = root {
            records.push(RunRecord::new("moments", k, 0, 0, r, 8.0));
        }
    }
    Ok(RunOutput {
        records,
        artifacts: vec![("moments.csv".into(), csv)],
    })
}

pub fn run_freeness(cfg: &RunConfig) -> Result<Vec<RunRecord>, CliError> {
    par_trials(cfg, |dim, trial, seed| {
        let value = freeness_trial(dim, &cfg.word, seed, 0)?;
        Ok(RunRecord::new("freeness", dim, trial, seed, value, 0.0))
    })
}

#[derive(Serialize)]
struct ComplexChshSummary {
    classical_value: f64,
    classical_witness_omega_exponents: [u8; 4],
    quantum_norm: f64,
    upper_bound: f64,
    discrepancy: f64,
    flagged: bool,
    factorization_gap: f64,
    order_a1: usize,
    order_a2: usize,
}

/// Dim 1 holds the classical value (reference `√7`), dim 9 the quantum norm
/// (reference `2√3`).
pub fn run_complex_chsh(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let (classical, witness) = complex_chsh_classical_value();
    let report = complex_chsh_norm()?;
    let records = vec![
        timed(cfg, || {
            Ok(RunRecord::new(
                "complex-chsh",
                1,
                0,
                0,
                classical,
                7f64.sqrt(),
            ))
        })?,
        timed(cfg, || {
            Ok(RunRecord::new(
                "complex-chsh",
                9,
                0,
                0,
                report.norm,
                report.upper_bound,
            ))
        })?,
    ];
    let summary = ComplexChshSummary {
        classical_value: classical,
        classical_witness_omega_exponents: witness,
        quantum_norm: report.norm,
        upper_bound: report.upper_bound,
        discrepancy: report.discrepancy,
        flagged: report.flagged,
        factorization_gap: report.factorization_gap,
        order_a1: report.orders.0,
        order_a2: report.orders.1,
    };
    Ok(RunOutput {
        records,
        artifacts: vec![(
            "complex_chsh.json".into(),
            serde_json::to_string_pretty(&summary).expect("serializable") + "\n",
        )],
    })
}

/// Trial 0 is the uniform state (reference 2), trial 1 the phased state
/// (reference −2).
pub fn run_folner(cfg: &RunConfig) -> Result<Vec<RunRecord>, CliError> {
    let mut records = Vec::new();
    for &dim in &cfg.dims {
        records.push(timed(cfg, || {
            Ok(RunRecord::new(
                "folner",
                dim,
                0,
                0,
                folner_uniform_expectation(dim)?,
                2.0,
            ))
        })?);
        records.push(timed(cfg, || {
            Ok(RunRecord::new(
                "folner",
                dim,
                1,
                0,
                folner_phased_expectation(dim)?,
                -2.0,
            ))
        })?);
    }
    Ok(records)
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len().is_multiple_of(2) {
        0.5 * (values[m - 1] + values[m])
    } else {
        values[m]
    }
}

/// `(dim, median |deviation|)` per dimension for one experiment label.
pub fn median_abs_deviation_by_dim(records: &[RunRecord], experiment: &str) -> Vec<(usize, f64)> {
    let mut dims: Vec<usize> = records
        .iter()
        .filter(|r| r.experiment == experiment)
        .map(|r| r.dim)
        .collect();
    dims.dedup();
    dims.into_iter()
        .map(|d| {
            let mut devs: Vec<f64> = records
                .iter()
                .filter(|r| r.experiment == experiment && r.dim == d)
                .map(|r| r.deviation.abs())
                .collect();
            (d, median(&mut devs))
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x`; `None` without two
/// distinct positive points.
pub fn log_log_slope(points: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0 && *y > 0.0)
        .map(|&(x, y)| ((x as f64).ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

#[derive(Serialize)]
struct SeriesSummary {
    experiment: String,
    median_abs_deviation: Vec<(usize, f64)>,
    /// Rounded to two decimals.
    rate_exponent: Option<f64>,
}

fn summarize(records: &[RunRecord]) -> Option<String> {
    let mut labels: Vec<&str> = records.iter().map(|r| r.experiment.as_str()).collect();
    labels.dedup();
    let series: Vec<SeriesSummary> = labels
        .into_iter()
        .map(|label| {
            let medians = median_abs_deviation_by_dim(records, label);
            let rate_exponent = log_log_slope(&medians).map(|s| (s * 100.0).round() / 100.0);
            SeriesSummary {
                experiment: label.to_string(),
                median_abs_deviation: medians,
                rate_exponent,
            }
        })
        .collect();
    if series.is_empty() {
        return None;
    }
    Some(serde_json::to_string_pretty(&series).expect("serializable") + "\n")
}

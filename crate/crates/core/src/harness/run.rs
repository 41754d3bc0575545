use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::{ExperimentKind, ExperimentSpec, NRule};
use crate::analysis::{analytic_cdf, ks_distance, mean_and_se, measure_til_decay};
use crate::channel::{db_to_linear, derive_seed, generate_realization, Scheme, SystemConfig};
use crate::error::{Error, Result};
use crate::metrics::{scheduling_metric, til, MetricKind};
use crate::protocol::evaluate;
use crate::selection::{select, Assignment};

/// One sweep point of an experiment. Columns that do not apply to the
/// experiment kind are `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub k_pairs: usize,
    pub n_relays: usize,
    /// The scaling rule asked for more relays than `n_cap`.
    pub n_capped: bool,
    pub snr_db: Option<f64>,
    pub scheme: Option<String>,
    pub metric: Option<String>,
    pub l_slots: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub mean_sum_rate: Option<f64>,
    pub se_sum_rate: Option<f64>,
    pub mean_kth_min_til: Option<f64>,
    pub se_kth_min_til: Option<f64>,
    pub mean_inv_kth_min_til: Option<f64>,
    pub se_inv_kth_min_til: Option<f64>,
    pub ks_distance: Option<f64>,
}

impl ResultRow {
    fn base(spec: &ExperimentSpec, n_relays: usize) -> Self {
        ResultRow {
            experiment: spec.kind.name().to_string(),
            k_pairs: spec.k_pairs,
            n_relays,
            n_capped: false,
            snr_db: None,
            scheme: None,
            metric: None,
            l_slots: spec.l_slots,
            trials: spec.trials,
            master_seed: spec.master_seed,
            mean_sum_rate: None,
            se_sum_rate: None,
            mean_kth_min_til: None,
            se_kth_min_til: None,
            mean_inv_kth_min_til: None,
            se_inv_kth_min_til: None,
            ks_distance: None,
        }
    }
}

/// Runs every sweep point of `spec`.
///
/// Trial `t` of every sweep point uses `derive_seed(master_seed, t)` and
/// per-trial results are reduced in trial order, so the output does not
/// depend on the thread count.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    check_memory(spec)?;
    match spec.threads {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Resource(format!("cannot start {threads} worker threads: {e}")))?;
            pool.install(|| dispatch(spec))
        }
        None => dispatch(spec),
    }
}

fn dispatch(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    match spec.kind {
        ExperimentKind::RateVsSnr | ExperimentKind::SchemeComparison => run_rates(spec),
        ExperimentKind::TilVsN => run_til(spec),
        ExperimentKind::CdfValidation => run_cdf(spec),
    }
}

/// Relay count for a sweep point and whether it hit the cap.
fn relays_at(spec: &ExperimentSpec, snr_db: f64) -> (usize, bool) {
    let raw = spec
        .n_rule
        .relays_for(spec.k_pairs, db_to_linear(snr_db))
        .expect("scaled rule");
    let capped = raw > spec.n_cap as f64;
    let n = if capped { spec.n_cap } else { raw as usize };
    (n.max(spec.min_relays()), capped)
}

fn largest_n(spec: &ExperimentSpec) -> usize {
    match (spec.kind, spec.n_rule) {
        (ExperimentKind::CdfValidation, _) => 3 * spec.k_pairs,
        (ExperimentKind::TilVsN, _) | (_, NRule::Fixed) => spec.n_list.iter().copied().max().unwrap_or(0),
        _ => spec
            .snr_db
            .iter()
            .map(|&s| relays_at(spec, s).0)
            .max()
            .unwrap_or(0),
    }
}

/// Rough peak working set: gains, two metric tables and the candidate list
/// for every realization in flight.
pub fn estimated_memory_bytes(spec: &ExperimentSpec) -> u64 {
    let n = largest_n(spec) as u64;
    let k = spec.k_pairs as u64;
    let per_trial = n * k * (2 * 16 + 2 * 8) + n * 8;
    let workers = spec
        .threads
        .unwrap_or_else(rayon::current_num_threads)
        .max(1) as u64;
    per_trial * workers
}

fn check_memory(spec: &ExperimentSpec) -> Result<()> {
    let need = estimated_memory_bytes(spec);
    let cap = spec.memory_cap_mb.saturating_mul(1 << 20);
    if need > cap {
        return Err(Error::Resource(format!(
            "estimated {} MiB exceeds the {} MiB cap; lower n_cap, use fewer threads or raise memory_cap_mb",
            need >> 20,
            spec.memory_cap_mb
        )));
    }
    Ok(())
}

/// Rates of one trial: `[scheme][snr]`, plus the largest second-set TIL
/// when alternate relaying is among the schemes.
struct TrialRates {
    rates: Vec<Vec<f64>>,
    kth_min_til: Option<f64>,
}

fn rate_trial(
    spec: &ExperimentSpec,
    n_relays: usize,
    snrs: &[f64],
    seed: u64,
) -> Result<TrialRates> {
    let base = SystemConfig::new(spec.k_pairs, n_relays)
        .with_slots(spec.l_slots)
        .with_convention(spec.convention)
        .with_scheme(if n_relays >= 2 * spec.k_pairs {
            Scheme::OndAlternate
        } else {
            Scheme::OndNoAlternate
        });
    let real = generate_realization::<f64>(&base, seed)?;
    let mut kth_min_til = None;
    let rates = spec
        .schemes
        .iter()
        .map(|&scheme| {
            let cfg = base.clone().with_scheme(scheme);
            let assignment = select(&real, &cfg)?;
            if scheme == Scheme::OndAlternate {
                kth_min_til = Some(largest_second_set_til(&real, &assignment)?);
            }
            snrs.iter()
                .map(|&snr_db| {
                    let cfg = cfg.clone().with_snr(db_to_linear(snr_db));
                    Ok(evaluate(&real, &cfg, &assignment)?.sum_rate)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialRates { rates, kth_min_til })
}

fn largest_second_set_til(real: &crate::Realization, a: &Assignment) -> Result<f64> {
    let pi2 = a.pi2.as_ref().ok_or_else(|| Error::Scheme("missing second relay set".into()))?;
    pi2.iter()
        .enumerate()
        .map(|(pair, &relay)| til(real, relay, pair, &a.pi1))
        .try_fold(0.0f64, |acc, v| Ok(acc.max(v?)))
}

fn run_rates(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    // (relay count, capped, snr points sharing it)
    let groups: Vec<(usize, bool, Vec<f64>)> = match spec.n_rule {
        NRule::Fixed => spec
            .n_list
            .iter()
            .map(|&n| (n, false, spec.snr_db.clone()))
            .collect(),
        _ => spec
            .snr_db
            .iter()
            .map(|&s| {
                let (n, capped) = relays_at(spec, s);
                (n, capped, vec![s])
            })
            .collect(),
    };

    let mut rows = Vec::new();
    for (n_relays, capped, snrs) in groups {
        let trials = (0..spec.trials)
            .into_par_iter()
            .map(|t| rate_trial(spec, n_relays, &snrs, derive_seed(spec.master_seed, t as u64)))
            .collect::<Result<Vec<TrialRates>>>()?;
        let tils: Vec<f64> = trials.iter().filter_map(|t| t.kth_min_til).collect();
        for (si, &snr_db) in snrs.iter().enumerate() {
            for (ci, &scheme) in spec.schemes.iter().enumerate() {
                let values: Vec<f64> = trials.iter().map(|t| t.rates[ci][si]).collect();
                let (mean, se) = mean_and_se(&values);
                let mut row = ResultRow::base(spec, n_relays);
                row.n_capped = capped;
                row.snr_db = Some(snr_db);
                row.scheme = Some(scheme.name().to_string());
                row.mean_sum_rate = Some(mean);
                row.se_sum_rate = Some(se);
                if scheme == Scheme::OndAlternate && !tils.is_empty() {
                    fill_til_stats(&mut row, &tils);
                }
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

fn fill_til_stats(row: &mut ResultRow, tils: &[f64]) {
    let inv: Vec<f64> = tils.iter().map(|v| 1.0 / v).collect();
    let (m, se) = mean_and_se(tils);
    let (mi, sei) = mean_and_se(&inv);
    row.mean_kth_min_til = Some(m);
    row.se_kth_min_til = Some(se);
    row.mean_inv_kth_min_til = Some(mi);
    row.se_inv_kth_min_til = Some(sei);
}

fn run_til(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    let samples = measure_til_decay(spec.k_pairs, &spec.n_list, spec.trials, spec.master_seed, spec.convention)?;
    Ok(samples
        .into_iter()
        .map(|s| {
            let mut row = ResultRow::base(spec, s.n_relays);
            row.scheme = Some(Scheme::OndAlternate.name().to_string());
            row.mean_kth_min_til = Some(s.mean_kth_min_til);
            row.se_kth_min_til = Some(s.se_kth_min_til);
            row.mean_inv_kth_min_til = Some(s.mean_inv_kth_min_til);
            row.se_inv_kth_min_til = Some(s.se_inv_kth_min_til);
            row
        })
        .collect())
}

/// One i.i.d. draw of each metric from an independent realization.
///
/// The first relay set is fixed to relays `0..K` so the TIL of relay `K`
/// is not biased by selection.
pub fn sample_metrics(spec: &ExperimentSpec, seed: u64) -> Result<(f64, f64)> {
    let k = spec.k_pairs;
    let cfg = SystemConfig::new(k, 2 * k + 1)
        .with_convention(spec.convention)
        .with_slots(spec.l_slots);
    let real = generate_realization::<f64>(&cfg, seed)?;
    let pi1: Vec<usize> = (0..k).collect();
    Ok((scheduling_metric(&real, k, 0)?, til(&real, k, 0, &pi1)?))
}

fn run_cdf(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    let draws = (0..spec.trials)
        .into_par_iter()
        .map(|t| sample_metrics(spec, derive_seed(spec.master_seed, t as u64)))
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let n_relays = 2 * spec.k_pairs + 1;
    [MetricKind::SchedulingMetric, MetricKind::TotalInterferenceLevel]
        .into_iter()
        .map(|kind| {
            let xs: Vec<f64> = draws
                .iter()
                .map(|d| match kind {
                    MetricKind::SchedulingMetric => d.0,
                    MetricKind::TotalInterferenceLevel => d.1,
                })
                .collect();
            let mut row = ResultRow::base(spec, n_relays);
            row.metric = Some(kind.name().to_string());
            row.ks_distance = Some(ks_distance(&xs, analytic_cdf(kind, spec.k_pairs, spec.convention))?);
            Ok(row)
        })
        .collect()
}

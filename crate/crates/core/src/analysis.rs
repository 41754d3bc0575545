//! Scaling-law analytics and their empirical counterparts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{derive_seed, generate_realization, Convention, Scheme, SystemConfig};
use crate::error::{Error, Result};
use crate::metrics::{metric_cdf, metric_cdf_inverse, til_table, MetricKind};
use crate::selection::{select_pi1, sequential_min_trace};

/// Probability that exactly `K` of `N` i.i.d. relays have a metric below a
/// threshold whose CDF value is `cdf_value`.
pub fn p_k(n_relays: usize, k_pairs: usize, cdf_value: f64) -> Result<f64> {
    if n_relays < k_pairs {
        return Err(Error::arg("n_relays", format!("N={n_relays} < K={k_pairs}")));
    }
    if !(0.0..=1.0).contains(&cdf_value) {
        return Err(Error::arg("cdf_value", format!("must lie in [0, 1], got {cdf_value}")));
    }
    let (n, k) = (n_relays as f64, k_pairs as f64);
    if cdf_value == 0.0 {
        return Ok(if k_pairs == 0 { 1.0 } else { 0.0 });
    }
    if cdf_value == 1.0 {
        return Ok(if n_relays == k_pairs { 1.0 } else { 0.0 });
    }
    Ok((ln_binomial(n_relays, k_pairs) + k * cdf_value.ln() + (n - k) * (-cdf_value).ln_1p()).exp())
}

/// `ln C(n, k)` by summing logs of the `min(k, n - k)` ratio terms.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k)
        .map(|j| ((n - j) as f64).ln() - ((j + 1) as f64).ln())
        .sum()
}

/// Threshold at which the TIL CDF equals `K/N`, the maximizer of
/// [`p_k`] over the threshold.
pub fn epsilon_hat(n_relays: usize, k_pairs: usize, convention: Convention) -> Result<f64> {
    if k_pairs == 0 || n_relays <= k_pairs {
        return Err(Error::arg("n_relays", format!("need N > K, got N={n_relays} K={k_pairs}")));
    }
    let target = k_pairs as f64 / n_relays as f64;
    let eps = metric_cdf_inverse(MetricKind::TotalInterferenceLevel, k_pairs, convention, target)?;
    let at = p_k(n_relays, k_pairs, target)?;
    let delta = target / 10.0;
    let below = p_k(n_relays, k_pairs, target - delta)?;
    let above = p_k(n_relays, k_pairs, (target + delta).min(1.0))?;
    if !(at > below && at > above) {
        return Err(Error::arg(
            "n_relays",
            format!("P_K at F=K/N is not a local maximum ({below} / {at} / {above})"),
        ));
    }
    Ok(eps)
}

/// Statistics of the largest TIL among the second relay set at one `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub n_relays: usize,
    /// Estimate of `E[1 / L]`.
    pub mean_inv_kth_min_til: f64,
    pub se_inv_kth_min_til: f64,
    /// Estimate of `E[L]`.
    pub mean_kth_min_til: f64,
    pub se_kth_min_til: f64,
    pub trials: usize,
}

/// Largest TIL claimed while selecting the second relay set, i.e. the
/// `K`-th smallest TIL in selection order.
pub fn kth_min_til(config: &SystemConfig, seed: u64) -> Result<f64> {
    let real = generate_realization::<f64>(config, seed)?;
    let pi1 = select_pi1(&real, config)?;
    let table = til_table(&real, &pi1)?;
    Ok(sequential_min_trace(&table)
        .iter()
        .map(|c| c.metric)
        .fold(0.0, f64::max))
}

/// Monte Carlo estimate of the TIL decay over a grid of relay counts.
///
/// Trial `t` uses seed `derive_seed(seed, t)` at every grid point, so the
/// result does not depend on the number of worker threads.
pub fn measure_til_decay(
    k_pairs: usize,
    n_grid: &[usize],
    trials: usize,
    seed: u64,
    convention: Convention,
) -> Result<Vec<DecaySample>> {
    if trials == 0 {
        return Err(Error::config("trials", "must be at least 1"));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("n_grid", "must be strictly ascending"));
    }
    n_grid
        .iter()
        .map(|&n| {
            let config = SystemConfig::new(k_pairs, n)
                .with_convention(convention)
                .with_scheme(Scheme::OndAlternate);
            config.validate()?;
            let values = (0..trials)
                .into_par_iter()
                .map(|t| kth_min_til(&config, derive_seed(seed, t as u64)))
                .collect::<Result<Vec<f64>>>()?;
            let inv: Vec<f64> = values.iter().map(|v| 1.0 / v).collect();
            let (mean_inv, se_inv) = mean_and_se(&inv);
            let (mean, se) = mean_and_se(&values);
            Ok(DecaySample {
                n_relays: n,
                mean_inv_kth_min_til: mean_inv,
                se_inv_kth_min_til: se_inv,
                mean_kth_min_til: mean,
                se_kth_min_til: se,
                trials,
            })
        })
        .collect()
}

/// Sample mean and standard error of the mean, summed in index order.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Least-squares line fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares of `y` on `x`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() {
        return Err(Error::arg("points", "x and y lengths differ"));
    }
    if xs.len() < 3 {
        return Err(Error::arg("points", format!("need at least 3 points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::arg("points", "values must be finite"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::arg("points", "x values are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(SlopeFit {
        slope,
        intercept,
        r_squared,
        points: xs.len(),
    })
}

/// Slope of `ln y` against `ln x`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::arg("points", "log-log fit needs positive values"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    fit_line(&xs, &ys)
}

/// High-SNR slope of sum rate against `log2(snr)` over the top half of the
/// curve.
pub fn estimate_dof(rate_curve: &[(f64, f64)]) -> Result<SlopeFit> {
    estimate_dof_window(rate_curve, 0.5)
}

/// As [`estimate_dof`] with the top `fraction` of the SNR points (at least
/// three) used for the fit.
pub fn estimate_dof_window(rate_curve: &[(f64, f64)], fraction: f64) -> Result<SlopeFit> {
    if rate_curve.len() < 3 {
        return Err(Error::arg("rate_curve", "need at least 3 SNR points"));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::arg("fraction", "must lie in (0, 1]"));
    }
    if rate_curve.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::arg("rate_curve", "SNR points must be strictly ascending"));
    }
    if rate_curve.iter().any(|p| !(p.0 > 0.0)) {
        return Err(Error::arg("rate_curve", "SNR must be positive"));
    }
    let take = ((rate_curve.len() as f64 * fraction).ceil() as usize)
        .max(3)
        .min(rate_curve.len());
    let window = &rate_curve[rate_curve.len() - take..];
    let xs: Vec<f64> = window.iter().map(|p| p.0.log2()).collect();
    let ys: Vec<f64> = window.iter().map(|p| p.1).collect();
    fit_line(&xs, &ys)
}

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.len() < 100 {
        return Err(Error::arg("samples", format!("need at least 100 samples, got {}", samples.len())));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::arg("samples", "NaN sample"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs.iter().enumerate().fold(0.0f64, |acc, (i, &x)| {
        let f = cdf(x);
        let upper = (i + 1) as f64 / n - f;
        let lower = f - i as f64 / n;
        acc.max(upper).max(lower)
    });
    Ok(d.clamp(0.0, 1.0))
}

/// SNR beyond which `challenger` beats `incumbent` at every later grid
/// point, linearly interpolated between the bracketing grid points.
///
/// Returns `None` when the challenger is not ahead at the last point, and
/// the first grid SNR when it is ahead everywhere.
pub fn crossover_db(snr_db: &[f64], incumbent: &[f64], challenger: &[f64]) -> Option<f64> {
    let n = snr_db.len();
    if n == 0 || incumbent.len() != n || challenger.len() != n {
        return None;
    }
    let diff: Vec<f64> = challenger.iter().zip(incumbent).map(|(c, i)| c - i).collect();
    if diff[n - 1] <= 0.0 {
        return None;
    }
    match (0..n).rev().find(|&i| diff[i] <= 0.0) {
        None => Some(snr_db[0]),
        Some(i) => {
            let (d0, d1) = (diff[i], diff[i + 1]);
            Some(snr_db[i] + (snr_db[i + 1] - snr_db[i]) * (-d0) / (d1 - d0))
        }
    }
}

/// Analytic CDF of `kind` as a plain closure, for [`ks_distance`].
pub fn analytic_cdf(kind: MetricKind, k_pairs: usize, convention: Convention) -> impl Fn(f64) -> f64 {
    move |x| metric_cdf(kind, k_pairs, convention, x.max(0.0)).unwrap_or(f64::NAN)
}

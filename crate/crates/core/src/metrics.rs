//! Per-relay interference metrics and their distributions.
//!
//! The scheduling metric of relay `i` serving pair `k` sums the `2K - 2`
//! cross gains `|h1[i][m]|^2 + |h2[m][i]|^2` over `m != k`. The total
//! interference level (TIL) adds the `K` inter-relay gains towards the
//! already selected first relay set, for `3K - 2` terms in all. Under
//! Rayleigh fading both are Gamma distributed with integer shape, so their
//! CDFs are regularized lower incomplete gamma functions with a closed form.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRealization, Convention};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    SchedulingMetric,
    TotalInterferenceLevel,
}

impl MetricKind {
    /// Number of i.i.d. `|h|^2` terms in the metric.
    pub fn shape(self, k_pairs: usize) -> usize {
        match self {
            MetricKind::SchedulingMetric => 2 * k_pairs - 2,
            MetricKind::TotalInterferenceLevel => 3 * k_pairs - 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::SchedulingMetric => "scheduling-metric",
            MetricKind::TotalInterferenceLevel => "til",
        }
    }
}

/// Metric values for a set of candidate relays against every pair.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricTable<T> {
    kind: MetricKind,
    k: usize,
    /// Relay index of each row.
    relays: Vec<usize>,
    /// Row-major `relays.len() x K`.
    values: Vec<T>,
}

impl<T: Scalar> MetricTable<T> {
    /// Table over explicit rows. `values` is row-major with `K` columns.
    pub fn new(kind: MetricKind, k: usize, relays: Vec<usize>, values: Vec<T>) -> Result<Self> {
        if k == 0 || values.len() != relays.len() * k {
            return Err(Error::arg("values", "table must have relays.len() * K entries"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= T::zero())) {
            return Err(Error::arg("values", "metrics must be finite and non-negative"));
        }
        Ok(MetricTable {
            kind,
            k,
            relays,
            values,
        })
    }

    /// Convenience for tests: rows are relays `0..rows.len()`.
    pub fn from_rows(kind: MetricKind, rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::arg("rows", "ragged table"));
        }
        let values = rows.iter().flatten().map(|v| T::of(*v)).collect();
        Self::new(kind, k, (0..rows.len()).collect(), values)
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn k_pairs(&self) -> usize {
        self.k
    }

    pub fn relays(&self) -> &[usize] {
        &self.relays
    }

    pub fn row_count(&self) -> usize {
        self.relays.len()
    }

    /// Value at table row `row` (not relay index) and pair `pair`.
    #[inline]
    pub fn at(&self, row: usize, pair: usize) -> T {
        self.values[row * self.k + pair]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Value for `relay` if it is a row of this table.
    pub fn get(&self, relay: usize, pair: usize) -> Option<T> {
        self.relays
            .iter()
            .position(|&r| r == relay)
            .map(|row| self.at(row, pair))
    }
}

fn check_indices<T: Scalar>(real: &ChannelRealization<T>, relay: usize, pair: usize) -> Result<()> {
    if relay >= real.n_relays() {
        return Err(Error::arg(
            "relay",
            format!("{relay} out of range for N={}", real.n_relays()),
        ));
    }
    if pair >= real.k_pairs() {
        return Err(Error::arg(
            "pair",
            format!("{pair} out of range for K={}", real.k_pairs()),
        ));
    }
    Ok(())
}

#[inline]
fn scheduling_metric_unchecked<T: Scalar>(real: &ChannelRealization<T>, relay: usize, pair: usize) -> T {
    (0..real.k_pairs())
        .filter(|&m| m != pair)
        .map(|m| real.g1(relay, m) + real.g2(m, relay))
        .fold(T::zero(), |a, b| a + b)
}

#[inline]
fn inter_relay_sum<T: Scalar>(real: &ChannelRealization<T>, relay: usize, pi1: &[usize]) -> T {
    pi1.iter()
        .map(|&r| real.gr(relay, r))
        .fold(T::zero(), |a, b| a + b)
}

/// Interference received from the other sources plus leakage generated
/// towards the other destinations.
pub fn scheduling_metric<T: Scalar>(
    real: &ChannelRealization<T>,
    relay: usize,
    pair: usize,
) -> Result<T> {
    check_indices(real, relay, pair)?;
    Ok(scheduling_metric_unchecked(real, relay, pair))
}

/// Scheduling metric plus the inter-relay interference from the first
/// relay set `pi1`.
pub fn til<T: Scalar>(
    real: &ChannelRealization<T>,
    relay: usize,
    pair: usize,
    pi1: &[usize],
) -> Result<T> {
    check_indices(real, relay, pair)?;
    check_pi1(real, pi1)?;
    if pi1.contains(&relay) {
        return Err(Error::arg(
            "relay",
            format!("relay {relay} belongs to the first relay set"),
        ));
    }
    Ok(scheduling_metric_unchecked(real, relay, pair) + inter_relay_sum(real, relay, pi1))
}

fn check_pi1<T: Scalar>(real: &ChannelRealization<T>, pi1: &[usize]) -> Result<()> {
    if pi1.len() != real.k_pairs() {
        return Err(Error::arg("pi1", format!("expected {} relays", real.k_pairs())));
    }
    for (idx, &r) in pi1.iter().enumerate() {
        if r >= real.n_relays() {
            return Err(Error::arg("pi1", format!("relay {r} out of range")));
        }
        if pi1[..idx].contains(&r) {
            return Err(Error::arg("pi1", format!("relay {r} repeated")));
        }
    }
    Ok(())
}

/// Scheduling metrics of every relay against every pair.
pub fn scheduling_table<T: Scalar>(real: &ChannelRealization<T>) -> MetricTable<T> {
    let (n, k) = (real.n_relays(), real.k_pairs());
    let mut values = Vec::with_capacity(n * k);
    for i in 0..n {
        for pair in 0..k {
            values.push(scheduling_metric_unchecked(real, i, pair));
        }
    }
    MetricTable {
        kind: MetricKind::SchedulingMetric,
        k,
        relays: (0..n).collect(),
        values,
    }
}

/// TIL of every relay outside `pi1` against every pair.
pub fn til_table<T: Scalar>(real: &ChannelRealization<T>, pi1: &[usize]) -> Result<MetricTable<T>> {
    check_pi1(real, pi1)?;
    let (n, k) = (real.n_relays(), real.k_pairs());
    let mut selected = vec![false; n];
    for &r in pi1 {
        selected[r] = true;
    }
    let relays: Vec<usize> = (0..n).filter(|&i| !selected[i]).collect();
    let mut values = Vec::with_capacity(relays.len() * k);
    for &i in &relays {
        let inter = inter_relay_sum(real, i, pi1);
        for pair in 0..k {
            values.push(scheduling_metric_unchecked(real, i, pair) + inter);
        }
    }
    Ok(MetricTable {
        kind: MetricKind::TotalInterferenceLevel,
        k,
        relays,
        values,
    })
}

/// Regularized lower incomplete gamma `P(m, x)` for integer shape `m >= 1`.
///
/// Uses `P = 1 - e^-x sum_{j<m} x^j/j!` when `x` is large and the
/// equivalent tail `P = e^-x sum_{j>=m} x^j/j!` when `x` is small, which
/// keeps full relative accuracy deep in the lower tail.
pub fn regularized_gamma_p<T: Scalar>(m: usize, x: T) -> T {
    if x <= T::zero() {
        return if m == 0 { T::one() } else { T::zero() };
    }
    if m == 0 {
        return T::one();
    }
    if x.is_infinite() {
        return T::one();
    }
    let mf = T::of_usize(m);
    if x < mf {
        let mut term = T::one();
        for j in 1..=m {
            term *= x / T::of_usize(j);
        }
        let mut sum = term;
        let mut j = m + 1;
        loop {
            term *= x / T::of_usize(j);
            sum += term;
            if term <= sum * T::epsilon() || j > m + 2000 {
                break;
            }
            j += 1;
        }
        (sum * (-x).exp()).min(T::one())
    } else {
        let mut term = T::one();
        let mut sum = T::one();
        for j in 1..m {
            term *= x / T::of_usize(j);
            sum += term;
        }
        (T::one() - (-x).exp() * sum).max(T::zero())
    }
}

/// CDF of the metric of `kind` with `k_pairs` pairs under `convention`.
///
/// For `K = 1` the scheduling metric is identically zero and its CDF is the
/// unit step at the origin.
pub fn metric_cdf<T: Scalar>(
    kind: MetricKind,
    k_pairs: usize,
    convention: Convention,
    ell: T,
) -> Result<T> {
    if k_pairs == 0 {
        return Err(Error::arg("k_pairs", "must be at least 1"));
    }
    if !(ell >= T::zero()) {
        return Err(Error::arg("ell", format!("must be >= 0, got {ell}")));
    }
    let m = kind.shape(k_pairs);
    Ok(regularized_gamma_p(m, ell / T::of(convention.per_term_mean())))
}

/// Inverse of [`metric_cdf`] by bracketing and bisection.
pub fn metric_cdf_inverse<T: Scalar>(
    kind: MetricKind,
    k_pairs: usize,
    convention: Convention,
    p: T,
) -> Result<T> {
    if k_pairs == 0 {
        return Err(Error::arg("k_pairs", "must be at least 1"));
    }
    if !(p >= T::zero() && p < T::one()) {
        return Err(Error::arg("p", format!("must lie in [0, 1), got {p}")));
    }
    let m = kind.shape(k_pairs);
    if p == T::zero() || m == 0 {
        return Ok(T::zero());
    }
    let cdf = |x: T| regularized_gamma_p(m, x / T::of(convention.per_term_mean()));
    let mut lo = T::zero();
    let mut hi = T::of(convention.per_term_mean() * m as f64);
    while cdf(hi) < p {
        lo = hi;
        hi *= T::of(2.0);
    }
    for _ in 0..400 {
        let mid = (lo + hi) * T::of(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * T::of(0.5))
}

/// Constant `C` of the small-argument lower bound `F(l) >= C l^m`, valid
/// for `0 < l <= 2` when each term has mean 2.
pub fn small_argument_constant(kind: MetricKind, k_pairs: usize) -> f64 {
    let m = kind.shape(k_pairs);
    let factorial: f64 = (1..=m).map(|j| j as f64).product();
    (-1f64).exp() * 2f64.powi(-(m as i32)) / factorial
}

/// Lower bound `C l^m` on the metric CDF for `0 < l <= 2`.
pub fn small_argument_bound<T: Scalar>(kind: MetricKind, k_pairs: usize, ell: T) -> Result<T> {
    if k_pairs == 0 {
        return Err(Error::arg("k_pairs", "must be at least 1"));
    }
    if !(ell > T::zero() && ell <= T::of(2.0)) {
        return Err(Error::arg("ell", format!("must lie in (0, 2], got {ell}")));
    }
    let m = kind.shape(k_pairs) as i32;
    Ok(T::of(small_argument_constant(kind, k_pairs)) * ell.powi(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_realization, SystemConfig};
    use approx::assert_abs_diff_eq;

    fn unit_realization(k: usize, n: usize) -> ChannelRealization<f64> {
        let mut gr = vec![1.0; n * n];
        for i in 0..n {
            gr[i * n + i] = 0.0;
        }
        ChannelRealization::from_power_gains(k, n, &vec![1.0; n * k], &vec![1.0; n * k], &gr)
            .unwrap()
    }

    #[test]
    fn scheduling_metric_examples() {
        let r = unit_realization(1, 3);
        assert_eq!(scheduling_metric(&r, 2, 0).unwrap(), 0.0);
        let r = unit_realization(2, 3);
        assert_eq!(scheduling_metric(&r, 1, 0).unwrap(), 2.0);

        // K=3, relay 0 serving pair 0: h1 gains (0.5, 0.25), h2 gains (1.0, 0.25) for m = 1, 2.
        let g1 = vec![9.0, 0.5, 0.25];
        let g2 = vec![9.0, 1.0, 0.25];
        let r = ChannelRealization::<f64>::from_power_gains(3, 1, &g1, &g2, &[0.0]).unwrap();
        assert_abs_diff_eq!(scheduling_metric(&r, 0, 0).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn til_examples() {
        let r = unit_realization(2, 5);
        assert_eq!(til(&r, 4, 0, &[0, 1]).unwrap(), 4.0);

        let gr = vec![0.0, 0.3, 0.3, 0.0];
        let r = ChannelRealization::<f64>::from_power_gains(1, 2, &[1.0, 1.0], &[1.0, 1.0], &gr)
            .unwrap();
        assert_abs_diff_eq!(til(&r, 1, 0, &[0]).unwrap(), 0.3, epsilon = 1e-12);

        // K=2, relay 2 for pair 0: cross gains 0.7 + 0.5 = 1.2; inter-relay to {0, 1} = 0.1, 0.4.
        let n = 3;
        let mut g1 = vec![1.0; n * 2];
        let mut g2 = vec![1.0; n * 2];
        g1[2 * 2 + 1] = 0.7;
        g2[n + 2] = 0.5;
        let mut gr = vec![0.0; n * n];
        for (a, b, v) in [(2, 0, 0.1), (2, 1, 0.4), (0, 1, 1.0)] {
            gr[a * n + b] = v;
            gr[b * n + a] = v;
        }
        let r = ChannelRealization::<f64>::from_power_gains(2, n, &g1, &g2, &gr).unwrap();
        assert_abs_diff_eq!(scheduling_metric(&r, 2, 0).unwrap(), 1.2, epsilon = 1e-12);
        assert_abs_diff_eq!(til(&r, 2, 0, &[0, 1]).unwrap(), 1.7, epsilon = 1e-12);
    }

    #[test]
    fn argument_errors() {
        let r = unit_realization(2, 4);
        assert!(scheduling_metric(&r, 4, 0).is_err());
        assert!(scheduling_metric(&r, 0, 2).is_err());
        assert!(til(&r, 0, 0, &[0, 1]).is_err());
        assert!(til(&r, 2, 0, &[0, 0]).is_err());
        assert!(metric_cdf(MetricKind::SchedulingMetric, 2, Convention::default(), -0.1).is_err());
        assert!(metric_cdf_inverse(MetricKind::SchedulingMetric, 2, Convention::default(), 1.0).is_err());
        assert!(small_argument_bound(MetricKind::SchedulingMetric, 2, 0.0).is_err());
        assert!(small_argument_bound(MetricKind::SchedulingMetric, 2, 2.5).is_err());
    }

    #[test]
    fn tables_match_pointwise_metrics() {
        let cfg = SystemConfig::new(3, 12);
        let r = generate_realization::<f64>(&cfg, 8).unwrap();
        let st = scheduling_table(&r);
        for i in 0..12 {
            for k in 0..3 {
                assert_abs_diff_eq!(st.at(i, k), scheduling_metric(&r, i, k).unwrap(), epsilon = 1e-12);
            }
        }
        let pi1 = [4, 0, 7];
        let tt = til_table(&r, &pi1).unwrap();
        assert_eq!(tt.row_count(), 9);
        assert!(tt.relays().iter().all(|r| !pi1.contains(r)));
        for (row, &i) in tt.relays().iter().enumerate() {
            for k in 0..3 {
                let v = til(&r, i, k, &pi1).unwrap();
                assert_abs_diff_eq!(tt.at(row, k), v, epsilon = 1e-12);
                assert!(v >= st.at(i, k));
            }
        }
    }

    #[test]
    fn cdf_examples() {
        use MetricKind::*;
        for kind in [SchedulingMetric, TotalInterferenceLevel] {
            assert_eq!(metric_cdf(kind, 2, Convention::UnitComplexVariance, 0.0).unwrap(), 0.0);
        }
        let v = metric_cdf(SchedulingMetric, 2, Convention::UnitComplexVariance, 1.0).unwrap();
        assert_abs_diff_eq!(v, 1.0 - 2.0 * (-1f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.264241, epsilon = 1e-6);
        let v = metric_cdf(SchedulingMetric, 2, Convention::UnitPerComponent, 1.0).unwrap();
        assert_abs_diff_eq!(v, 1.0 - 1.5 * (-0.5f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.090204, epsilon = 1e-6);
    }

    #[test]
    fn degenerate_k1_scheduling_cdf_is_step() {
        let c = Convention::default();
        assert_eq!(metric_cdf(MetricKind::SchedulingMetric, 1, c, 0.0).unwrap(), 1.0);
        assert_eq!(metric_cdf(MetricKind::SchedulingMetric, 1, c, 3.0).unwrap(), 1.0);
        assert_eq!(metric_cdf_inverse(MetricKind::SchedulingMetric, 1, c, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn both_branches_agree_near_switch() {
        // The tail series and the complement sum must meet at x = m.
        for m in 1..12 {
            let x = m as f64;
            let below = regularized_gamma_p(m, x * (1.0 - 1e-12));
            let at = regularized_gamma_p(m, x);
            assert!((below - at).abs() < 1e-11, "m={m}");
        }
    }

    #[test]
    fn cdf_inverse_roundtrip() {
        for kind in [MetricKind::SchedulingMetric, MetricKind::TotalInterferenceLevel] {
            for conv in [Convention::UnitComplexVariance, Convention::UnitPerComponent] {
                for k in 2..=4 {
                    assert_eq!(metric_cdf_inverse(kind, k, conv, 0.0).unwrap(), 0.0);
                    for p in [0.01f64, 0.2, 0.9, 1e-6] {
                        let l = metric_cdf_inverse(kind, k, conv, p).unwrap();
                        let back = metric_cdf(kind, k, conv, l).unwrap();
                        assert!((back - p).abs() < 1e-9, "{kind:?} k={k} p={p}: {back}");
                    }
                }
            }
        }
    }

    #[test]
    fn til_inverse_matches_newton() {
        // Independent Newton iteration on the complement Poisson sum, using the Gamma(4, 1) density.
        let m = 4;
        let f = |x: f64| {
            let mut s = 0.0;
            let mut t = 1.0;
            for j in 0..m {
                if j > 0 {
                    t *= x / j as f64;
                }
                s += t;
            }
            1.0 - (-x).exp() * s
        };
        let pdf = |x: f64| x.powi(m - 1) * (-x).exp() / 6.0;
        let mut x = 2.0;
        for _ in 0..60 {
            x -= (f(x) - 0.2) / pdf(x);
        }
        let got = metric_cdf_inverse(MetricKind::TotalInterferenceLevel, 2, Convention::UnitComplexVariance, 0.2)
            .unwrap();
        assert_abs_diff_eq!(got, x, epsilon = 1e-9);
        let got2 = metric_cdf_inverse(MetricKind::TotalInterferenceLevel, 2, Convention::UnitPerComponent, 0.2)
            .unwrap();
        assert_abs_diff_eq!(got2, 2.0 * x, epsilon = 1e-9);
    }

    #[test]
    fn small_argument_constants() {
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(small_argument_constant(MetricKind::SchedulingMetric, 2), 1.0 / (8.0 * e), epsilon = 1e-15);
        assert_abs_diff_eq!(small_argument_constant(MetricKind::SchedulingMetric, 2), 0.0459849, epsilon = 1e-7);
        assert_abs_diff_eq!(small_argument_constant(MetricKind::TotalInterferenceLevel, 2), 1.0 / (384.0 * e), epsilon = 1e-15);
        assert_abs_diff_eq!(small_argument_constant(MetricKind::TotalInterferenceLevel, 2), 0.0009580, epsilon = 1e-7);
    }

    #[test]
    fn small_argument_bound_below_cdf() {
        for kind in [MetricKind::SchedulingMetric, MetricKind::TotalInterferenceLevel] {
            for k in 1..=4 {
                for l in [0.1, 0.5, 1.0, 2.0] {
                    let b = small_argument_bound(kind, k, l).unwrap();
                    let f = metric_cdf(kind, k, Convention::UnitPerComponent, l).unwrap();
                    assert!(b <= f, "{kind:?} k={k} l={l}: {b} > {f}");
                }
            }
        }
    }

    #[test]
    fn generic_cdf_in_f32() {
        let a = metric_cdf(MetricKind::TotalInterferenceLevel, 3, Convention::default(), 2.5f32).unwrap();
        let b = metric_cdf(MetricKind::TotalInterferenceLevel, 3, Convention::default(), 2.5f64).unwrap();
        assert!((a as f64 - b).abs() < 1e-6);
    }
}

//! Per-block SINRs and achievable rates with interference treated as noise.

use num_rational::Ratio;

use crate::channel::{ChannelRealization, Scheme, SystemConfig};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::selection::Assignment;

/// SINRs of every pair over one or two relay sets.
#[derive(Clone, Debug, PartialEq)]
pub struct SinrReport<T> {
    k: usize,
    sets: usize,
    /// `K x sets`: SINR at relay `pi_s(k)` for its source.
    first_hop: Vec<T>,
    /// `K x sets`: SINR at destination `k` from relay `pi_s(k)`.
    second_hop: Vec<T>,
}

impl<T: Scalar> SinrReport<T> {
    pub fn from_parts(k: usize, sets: usize, first_hop: Vec<T>, second_hop: Vec<T>) -> Result<Self> {
        if !(sets == 1 || sets == 2) || first_hop.len() != k * sets || second_hop.len() != k * sets {
            return Err(Error::arg("sinrs", "expected K x sets entries with 1 or 2 sets"));
        }
        if first_hop
            .iter()
            .chain(&second_hop)
            .any(|v| !(v.is_finite() && *v >= T::zero()))
        {
            return Err(Error::arg("sinrs", "SINRs must be finite and non-negative"));
        }
        Ok(SinrReport {
            k,
            sets,
            first_hop,
            second_hop,
        })
    }

    pub fn k_pairs(&self) -> usize {
        self.k
    }

    /// Number of relay sets (2 for alternate relaying).
    pub fn sets(&self) -> usize {
        self.sets
    }

    /// `set` is 0 for the first relay set and 1 for the second.
    pub fn first_hop(&self, pair: usize, set: usize) -> T {
        self.first_hop[pair * self.sets + set]
    }

    pub fn second_hop(&self, pair: usize, set: usize) -> T {
        self.second_hop[pair * self.sets + set]
    }

    /// Decode-and-forward bottleneck of `pair` through `set`.
    pub fn end_to_end(&self, pair: usize, set: usize) -> T {
        self.first_hop(pair, set).min(self.second_hop(pair, set))
    }
}

/// Rates of one block in bits per channel use.
#[derive(Clone, Debug, PartialEq)]
pub struct RateReport<T> {
    pub per_pair_rate: Vec<T>,
    pub sum_rate: T,
    pub scheme: Scheme,
    /// Time-sharing factor applied to the per-set half rates.
    pub prefactor: T,
}

fn hop_sinrs<T: Scalar>(
    real: &ChannelRealization<T>,
    snr: T,
    set: &[usize],
    other: Option<&[usize]>,
) -> (Vec<T>, Vec<T>) {
    let k = real.k_pairs();
    let mut first = Vec::with_capacity(k);
    let mut second = Vec::with_capacity(k);
    for pair in 0..k {
        let relay = set[pair];
        let mut interference = T::zero();
        for m in (0..k).filter(|&m| m != pair) {
            interference += real.g1(relay, m);
        }
        if let Some(other) = other {
            for &r in other {
                interference += real.gr(relay, r);
            }
        }
        first.push(snr * real.g1(relay, pair) / (T::one() + snr * interference));

        let leak = (0..k)
            .filter(|&n| n != pair)
            .map(|n| real.g2(pair, set[n]))
            .fold(T::zero(), |a, b| a + b);
        second.push(snr * real.g2(pair, relay) / (T::one() + snr * leak));
    }
    (first, second)
}

fn check_assignment<T: Scalar>(real: &ChannelRealization<T>, config: &SystemConfig, a: &Assignment) -> Result<()> {
    config.validate()?;
    if real.k_pairs() != config.k_pairs || real.n_relays() != config.n_relays {
        return Err(Error::config("n_relays", "realization does not match config"));
    }
    a.validate(config.k_pairs, config.n_relays)
}

/// Steady-state SINRs with both relay sets active: relays in one set hear
/// the sources and the other set's transmissions.
pub fn compute_sinrs_alternate<T: Scalar>(
    real: &ChannelRealization<T>,
    config: &SystemConfig,
    assignment: &Assignment,
) -> Result<SinrReport<T>> {
    let Some(pi2) = assignment.pi2.as_deref() else {
        return Err(Error::Scheme("alternate relaying needs a second relay set".into()));
    };
    check_assignment(real, config, assignment)?;
    let snr = T::of(config.snr);
    let (f1, s1) = hop_sinrs(real, snr, &assignment.pi1, Some(pi2));
    let (f2, s2) = hop_sinrs(real, snr, pi2, Some(&assignment.pi1));
    let k = config.k_pairs;
    let interleave = |a: Vec<T>, b: Vec<T>| (0..k).flat_map(|i| [a[i], b[i]]).collect::<Vec<_>>();
    Ok(SinrReport {
        k,
        sets: 2,
        first_hop: interleave(f1, f2),
        second_hop: interleave(s1, s2),
    })
}

/// SINRs when sources and relays never transmit together (one relay set).
pub fn compute_sinrs_two_phase<T: Scalar>(
    real: &ChannelRealization<T>,
    config: &SystemConfig,
    assignment: &Assignment,
) -> Result<SinrReport<T>> {
    if assignment.pi2.is_some() {
        return Err(Error::Scheme("two-phase relaying takes a single relay set".into()));
    }
    check_assignment(real, config, assignment)?;
    let (first_hop, second_hop) = hop_sinrs(real, T::of(config.snr), &assignment.pi1, None);
    Ok(SinrReport {
        k: config.k_pairs,
        sets: 1,
        first_hop,
        second_hop,
    })
}

/// Sum rate of one block under `config.scheme`.
pub fn block_rate<T: Scalar>(sinrs: &SinrReport<T>, config: &SystemConfig) -> Result<RateReport<T>> {
    let half = T::of(0.5);
    let (prefactor, sets) = match config.scheme {
        Scheme::OndAlternate => {
            let l = T::of_usize(config.l_slots);
            ((l - T::one()) / l, 2)
        }
        Scheme::OndNoAlternate | Scheme::MaxMinSnr => (T::one(), 1),
    };
    if sinrs.sets != sets {
        return Err(Error::Scheme(format!(
            "{} expects {sets} relay set(s), report has {}",
            config.scheme.name(),
            sinrs.sets
        )));
    }
    if sinrs.k != config.k_pairs {
        return Err(Error::Scheme("report size does not match K".into()));
    }
    let per_pair_rate: Vec<T> = (0..sinrs.k)
        .map(|pair| {
            let inner = (0..sets)
                .map(|s| half * (T::one() + sinrs.end_to_end(pair, s)).log2())
                .fold(T::zero(), |a, b| a + b);
            prefactor * inner
        })
        .collect();
    let sum_rate = per_pair_rate.iter().copied().fold(T::zero(), |a, b| a + b);
    Ok(RateReport {
        per_pair_rate,
        sum_rate,
        scheme: config.scheme,
        prefactor,
    })
}

/// SINRs and rate for an assignment under `config.scheme`.
pub fn evaluate<T: Scalar>(
    real: &ChannelRealization<T>,
    config: &SystemConfig,
    assignment: &Assignment,
) -> Result<RateReport<T>> {
    let sinrs = match config.scheme {
        Scheme::OndAlternate => compute_sinrs_alternate(real, config, assignment)?,
        Scheme::OndNoAlternate | Scheme::MaxMinSnr => compute_sinrs_two_phase(real, config, assignment)?,
    };
    block_rate(&sinrs, config)
}

/// RTS bits needed for both selection steps: `2K ceil(log2 K)`.
pub fn scheduling_overhead_bits(k_pairs: usize) -> Result<u64> {
    if k_pairs == 0 {
        return Err(Error::arg("k_pairs", "must be at least 1"));
    }
    let ceil_log2 = (usize::BITS - (k_pairs - 1).leading_zeros()) as u64;
    Ok(2 * k_pairs as u64 * ceil_log2)
}

/// Achievable total DoF with alternate relaying, `(L - 1) K / L`.
pub fn dof_lower_bound_alternate(k_pairs: usize, l_slots: usize) -> Result<Ratio<u64>> {
    if l_slots < 3 || l_slots.is_multiple_of(2) {
        return Err(Error::arg("l_slots", "must be odd and >= 3"));
    }
    Ok(Ratio::new((l_slots as u64 - 1) * k_pairs as u64, l_slots as u64))
}

/// Achievable total DoF without alternate relaying, `K / 2`.
pub fn dof_lower_bound_no_alternate(k_pairs: usize) -> Ratio<u64> {
    Ratio::new(k_pairs as u64, 2)
}

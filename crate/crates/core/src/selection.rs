//! Distributed relay selection.
//!
//! Each candidate relay starts a timer per pair with an initial value
//! proportional to its metric, so timers expire in ascending metric order.
//! Once a relay claims a pair, that relay and every other relay's timer for
//! the claimed pair drop out. Without collisions this is exactly repeated
//! global minimization over the shrinking metric table, which is what is
//! emulated here. Exact ties go to the lowest relay index, then the lowest
//! pair index.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRealization, Scheme, SystemConfig};
use crate::error::{Error, Result};
use crate::metrics::{scheduling_table, til_table, MetricTable};
use crate::scalar::Scalar;

/// Relay sets serving the `K` pairs; position `k` serves pair `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    /// Receives on odd slots.
    pub pi1: Vec<usize>,
    /// Receives on even slots; absent for single-set schemes.
    pub pi2: Option<Vec<usize>>,
}

impl Assignment {
    pub fn single(pi1: Vec<usize>) -> Self {
        Assignment { pi1, pi2: None }
    }

    pub fn alternate(pi1: Vec<usize>, pi2: Vec<usize>) -> Self {
        Assignment {
            pi1,
            pi2: Some(pi2),
        }
    }

    /// Checks cardinality, range and disjointness.
    pub fn validate(&self, k_pairs: usize, n_relays: usize) -> Result<()> {
        let check = |set: &[usize], name: &'static str| -> Result<()> {
            if set.len() != k_pairs {
                return Err(Error::arg(name, format!("expected {k_pairs} relays, got {}", set.len())));
            }
            for (idx, &r) in set.iter().enumerate() {
                if r >= n_relays {
                    return Err(Error::arg(name, format!("relay {r} out of range")));
                }
                if set[..idx].contains(&r) {
                    return Err(Error::arg(name, format!("relay {r} repeated")));
                }
            }
            Ok(())
        };
        check(&self.pi1, "pi1")?;
        if let Some(pi2) = &self.pi2 {
            check(pi2, "pi2")?;
            if let Some(r) = pi2.iter().find(|r| self.pi1.contains(r)) {
                return Err(Error::arg("pi2", format!("relay {r} is also in pi1")));
            }
        }
        Ok(())
    }
}

/// One claim made during sequential selection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Claim<T> {
    pub relay: usize,
    pub pair: usize,
    pub metric: T,
}

/// Replays timer expiry on `table`, returning the claims in expiry order.
pub fn sequential_min_trace<T: Scalar>(table: &MetricTable<T>) -> Vec<Claim<T>> {
    let k = table.k_pairs();
    let rows = table.row_count();
    let mut row_taken = vec![false; rows];
    let mut pair_taken = vec![false; k];
    let mut claims = Vec::with_capacity(k.min(rows));
    for _ in 0..k.min(rows) {
        let mut best: Option<(usize, usize, T)> = None;
        for (row, taken) in row_taken.iter().enumerate() {
            if *taken {
                continue;
            }
            for pair in 0..k {
                if pair_taken[pair] {
                    continue;
                }
                let v = table.at(row, pair);
                if best.is_none_or(|(_, _, b)| v < b) {
                    best = Some((row, pair, v));
                }
            }
        }
        let Some((row, pair, metric)) = best else { break };
        row_taken[row] = true;
        pair_taken[pair] = true;
        claims.push(Claim {
            relay: table.relays()[row],
            pair,
            metric,
        });
    }
    claims
}

/// Relay per pair chosen by sequential global minimization over `table`.
pub fn sequential_min_assign<T: Scalar>(table: &MetricTable<T>) -> Vec<usize> {
    let mut out = vec![usize::MAX; table.k_pairs()];
    for c in sequential_min_trace(table) {
        out[c.pair] = c.relay;
    }
    out
}

fn check_dims<T: Scalar>(real: &ChannelRealization<T>, config: &SystemConfig) -> Result<()> {
    if real.k_pairs() != config.k_pairs || real.n_relays() != config.n_relays {
        return Err(Error::config(
            "n_relays",
            format!(
                "realization is {}x{} but config is K={} N={}",
                real.k_pairs(),
                real.n_relays(),
                config.k_pairs,
                config.n_relays
            ),
        ));
    }
    if config.k_pairs == 0 {
        return Err(Error::config("k_pairs", "must be at least 1"));
    }
    Ok(())
}

/// First relay set, chosen on the scheduling metric.
///
/// With a single pair there is no interference to rank by and relay 0 is
/// used.
pub fn select_pi1<T: Scalar>(real: &ChannelRealization<T>, config: &SystemConfig) -> Result<Vec<usize>> {
    check_dims(real, config)?;
    if config.n_relays < config.k_pairs {
        return Err(Error::config("n_relays", "need at least K relays"));
    }
    if config.k_pairs == 1 {
        return Ok(vec![0]);
    }
    Ok(sequential_min_assign(&scheduling_table(real)))
}

/// Second relay set, chosen on the TIL among relays outside `pi1`.
pub fn select_pi2<T: Scalar>(
    real: &ChannelRealization<T>,
    config: &SystemConfig,
    pi1: &[usize],
) -> Result<Vec<usize>> {
    check_dims(real, config)?;
    if config.n_relays < 2 * config.k_pairs {
        return Err(Error::config("n_relays", "alternate relaying needs at least 2K relays"));
    }
    Ok(sequential_min_assign(&til_table(real, pi1)?))
}

/// Max-min desired-gain baseline: pairs in ascending order each take the
/// unselected relay maximizing `min(|h1|^2, |h2|^2)`.
pub fn select_maxmin_snr<T: Scalar>(real: &ChannelRealization<T>, config: &SystemConfig) -> Result<Assignment> {
    check_dims(real, config)?;
    if config.n_relays < config.k_pairs {
        return Err(Error::config("n_relays", "need at least K relays"));
    }
    let mut taken = vec![false; config.n_relays];
    let mut pi1 = Vec::with_capacity(config.k_pairs);
    for pair in 0..config.k_pairs {
        let mut best: Option<(usize, T)> = None;
        for (relay, t) in taken.iter().enumerate() {
            if *t {
                continue;
            }
            let v = real.g1(relay, pair).min(real.g2(pair, relay));
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((relay, v));
            }
        }
        let (relay, _) = best.expect("N >= K leaves a free relay");
        taken[relay] = true;
        pi1.push(relay);
    }
    Ok(Assignment::single(pi1))
}

/// Runs the selection pipeline of `config.scheme`.
pub fn select<T: Scalar>(real: &ChannelRealization<T>, config: &SystemConfig) -> Result<Assignment> {
    match config.scheme {
        Scheme::OndAlternate => {
            let pi1 = select_pi1(real, config)?;
            let pi2 = select_pi2(real, config, &pi1)?;
            Ok(Assignment::alternate(pi1, pi2))
        }
        Scheme::OndNoAlternate => Ok(Assignment::single(select_pi1(real, config)?)),
        Scheme::MaxMinSnr => select_maxmin_snr(real, config),
    }
}

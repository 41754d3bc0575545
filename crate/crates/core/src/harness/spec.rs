use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{Convention, Scheme};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Mean sum rate over an SNR grid for each scheme and relay count.
    #[default]
    RateVsSnr,
    /// Largest second-set TIL against the relay count.
    TilVsN,
    /// Same sweep as `RateVsSnr`, requiring at least two schemes.
    SchemeComparison,
    /// KS distance between sampled metrics and their analytic CDFs.
    CdfValidation,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::RateVsSnr => "rate-vs-snr",
            ExperimentKind::TilVsN => "til-vs-n",
            ExperimentKind::SchemeComparison => "scheme-comparison",
            ExperimentKind::CdfValidation => "cdf-validation",
        }
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            ExperimentKind::RateVsSnr,
            ExperimentKind::TilVsN,
            ExperimentKind::SchemeComparison,
            ExperimentKind::CdfValidation,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::config("kind", format!("unknown experiment kind `{s}`")))
    }
}

/// How the relay count of a sweep point is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NRule {
    /// Use `n_list` as given.
    #[default]
    Fixed,
    /// `N = round(snr^(3K-2))`, the alternate-relaying scaling law.
    Alternate,
    /// `N = round(snr^(2K-2))`, the single-set scaling law.
    NoAlternate,
}

impl NRule {
    pub fn name(self) -> &'static str {
        match self {
            NRule::Fixed => "fixed",
            NRule::Alternate => "alternate",
            NRule::NoAlternate => "no-alternate",
        }
    }

    /// Uncapped relay count at linear `snr`, or `None` for `Fixed`.
    pub fn relays_for(self, k_pairs: usize, snr: f64) -> Option<f64> {
        let exponent = match self {
            NRule::Fixed => return None,
            NRule::Alternate => 3 * k_pairs as i32 - 2,
            NRule::NoAlternate => 2 * k_pairs as i32 - 2,
        };
        Some(snr.powi(exponent).round())
    }
}

impl std::str::FromStr for NRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(NRule::Fixed),
            "alternate" => Ok(NRule::Alternate),
            "no-alternate" => Ok(NRule::NoAlternate),
            _ => Err(Error::config("n_rule", format!("unknown rule `{s}`"))),
        }
    }
}

pub const DEFAULT_N_CAP: usize = 1_000_000;
pub const DEFAULT_MEMORY_CAP_MB: u64 = 2048;

fn default_snr_grid() -> Vec<f64> {
    (0..=9).map(|i| 5.0 * i as f64).collect()
}

/// A complete, declarative description of one experiment.
///
/// Every field has a default so a config file only needs the keys it
/// changes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub k_pairs: usize,
    /// Relay counts for `Fixed` sweeps and for `TilVsN`.
    pub n_list: Vec<usize>,
    pub n_rule: NRule,
    pub snr_db: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub l_slots: usize,
    pub convention: Convention,
    pub trials: usize,
    pub master_seed: u64,
    /// Upper limit on scaled relay counts; capped rows are flagged.
    pub n_cap: usize,
    /// Refuse to run when the estimated working set exceeds this.
    pub memory_cap_mb: u64,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            kind: ExperimentKind::RateVsSnr,
            k_pairs: 2,
            n_list: vec![100],
            n_rule: NRule::Fixed,
            snr_db: default_snr_grid(),
            schemes: vec![Scheme::OndAlternate],
            l_slots: 11,
            convention: Convention::UnitComplexVariance,
            trials: 1000,
            master_seed: 1,
            n_cap: DEFAULT_N_CAP,
            memory_cap_mb: DEFAULT_MEMORY_CAP_MB,
            threads: None,
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_pairs == 0 {
            return Err(Error::config("k_pairs", "must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.l_slots < 3 || self.l_slots.is_multiple_of(2) {
            return Err(Error::config("l_slots", "must be odd and >= 3"));
        }
        if self.threads == Some(0) {
            return Err(Error::config("threads", "must be at least 1"));
        }
        if self.n_cap == 0 {
            return Err(Error::config("n_cap", "must be positive"));
        }
        match self.kind {
            ExperimentKind::RateVsSnr | ExperimentKind::SchemeComparison => {
                if self.snr_db.is_empty() {
                    return Err(Error::config("snr_db", "sweep list is empty"));
                }
                if self.snr_db.iter().any(|s| !s.is_finite()) {
                    return Err(Error::config("snr_db", "values must be finite"));
                }
                if self.schemes.is_empty() {
                    return Err(Error::config("schemes", "sweep list is empty"));
                }
                if self.kind == ExperimentKind::SchemeComparison && self.schemes.len() < 2 {
                    return Err(Error::config("schemes", "comparison needs at least two schemes"));
                }
                if self.n_rule == NRule::Fixed {
                    self.check_n_list()?;
                    let need = self.min_relays();
                    if let Some(n) = self.n_list.iter().find(|&&n| n < need) {
                        return Err(Error::config(
                            "n_list",
                            format!("N={n} is below the {need} relays the schemes need"),
                        ));
                    }
                }
            }
            ExperimentKind::TilVsN => {
                self.check_n_list()?;
                if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::config("n_list", "must be strictly ascending"));
                }
                if let Some(n) = self.n_list.iter().find(|&&n| n < 2 * self.k_pairs) {
                    return Err(Error::config("n_list", format!("N={n} is below 2K")));
                }
            }
            ExperimentKind::CdfValidation => {
                if self.trials < 100 {
                    return Err(Error::config("trials", "CDF validation needs at least 100 draws"));
                }
            }
        }
        Ok(())
    }

    fn check_n_list(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::config("n_list", "sweep list is empty"));
        }
        Ok(())
    }

    /// Fewest relays every requested scheme can run with.
    pub fn min_relays(&self) -> usize {
        self.schemes
            .iter()
            .map(|s| s.min_relays(self.k_pairs))
            .max()
            .unwrap_or(self.k_pairs)
    }
}

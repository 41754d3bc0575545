//! Rayleigh block-fading realizations for the two-hop interfering-relay channel.
//!
//! A realization holds the source-to-relay gains (`N x K`), the
//! relay-to-destination gains (`K x N`) and an inter-relay channel. The
//! inter-relay matrix is `N x N` but only a few of its columns are ever read,
//! so by default each entry is produced on demand from a keyed hash of
//! `(seed, min(i, n), max(i, n))`. That keeps it deterministic, reciprocal and
//! zero on the diagonal without storing `N^2` coefficients.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One complex channel amplitude.
pub type ComplexGain<T> = Complex<T>;

/// Fading power normalization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// `E|h|^2 = 1`: each of re/im has variance 1/2.
    #[default]
    UnitComplexVariance,
    /// `E|h|^2 = 2`: each of re/im has variance 1.
    UnitPerComponent,
}

impl Convention {
    /// Mean of a single `|h|^2` term.
    pub fn per_term_mean(self) -> f64 {
        match self {
            Convention::UnitComplexVariance => 1.0,
            Convention::UnitPerComponent => 2.0,
        }
    }

    fn component_std(self) -> f64 {
        match self {
            Convention::UnitComplexVariance => std::f64::consts::FRAC_1_SQRT_2,
            Convention::UnitPerComponent => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Two relay sets alternating receive/transmit (virtual full-duplex).
    #[default]
    OndAlternate,
    /// A single relay set; sources and relays take turns.
    OndNoAlternate,
    /// Greedy per-pair max-min desired-gain baseline.
    MaxMinSnr,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::OndAlternate, Scheme::OndNoAlternate, Scheme::MaxMinSnr];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::OndAlternate => "ond-alternate",
            Scheme::OndNoAlternate => "ond-no-alternate",
            Scheme::MaxMinSnr => "max-min-snr",
        }
    }

    /// Smallest relay count the scheme can operate with.
    pub fn min_relays(self, k_pairs: usize) -> usize {
        match self {
            Scheme::OndAlternate => 2 * k_pairs,
            Scheme::OndNoAlternate | Scheme::MaxMinSnr => k_pairs,
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sch| sch.name() == s)
            .ok_or_else(|| Error::config("scheme", format!("unknown scheme `{s}`")))
    }
}

impl std::str::FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit-complex-variance" => Ok(Convention::UnitComplexVariance),
            "unit-per-component" => Ok(Convention::UnitPerComponent),
            _ => Err(Error::config("convention", format!("unknown convention `{s}`"))),
        }
    }
}

/// Parameters of one simulated system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Number of source-destination pairs `K`.
    pub k_pairs: usize,
    /// Number of relays `N`.
    pub n_relays: usize,
    /// Data slots per block `L`, odd and at least 3.
    pub l_slots: usize,
    /// Linear `P / N0`.
    pub snr: f64,
    pub convention: Convention,
    pub scheme: Scheme,
}

impl SystemConfig {
    pub fn new(k_pairs: usize, n_relays: usize) -> Self {
        SystemConfig {
            k_pairs,
            n_relays,
            l_slots: 11,
            snr: 1.0,
            convention: Convention::default(),
            scheme: Scheme::default(),
        }
    }

    pub fn with_slots(mut self, l_slots: usize) -> Self {
        self.l_slots = l_slots;
        self
    }

    pub fn with_snr(mut self, snr: f64) -> Self {
        self.snr = snr;
        self
    }

    pub fn with_snr_db(self, snr_db: f64) -> Self {
        self.with_snr(db_to_linear(snr_db))
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_pairs == 0 {
            return Err(Error::config("k_pairs", "must be at least 1"));
        }
        if self.l_slots < 3 || self.l_slots.is_multiple_of(2) {
            return Err(Error::config(
                "l_slots",
                format!("must be odd and >= 3, got {}", self.l_slots),
            ));
        }
        if !(self.snr.is_finite() && self.snr > 0.0) {
            return Err(Error::config(
                "snr",
                format!("must be positive and finite, got {}", self.snr),
            ));
        }
        let need = self.scheme.min_relays(self.k_pairs);
        if self.n_relays < need {
            return Err(Error::config(
                "n_relays",
                format!(
                    "{} needs at least {need} relays for K={}, got {}",
                    self.scheme.name(),
                    self.k_pairs,
                    self.n_relays
                ),
            ));
        }
        Ok(())
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Inter-relay coefficients: either an explicit `N x N` matrix or entries
/// derived on demand from a key.
#[derive(Clone, Debug, PartialEq)]
enum InterRelay<T> {
    Keyed { key: u64, std: f64, scale: T },
    Explicit(Vec<Complex<T>>),
}

/// All fading coefficients of one block.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization<T> {
    k: usize,
    n: usize,
    /// Row-major `N x K`, entry `(i, k)` is source `k` to relay `i`.
    h1: Vec<Complex<T>>,
    /// Row-major `K x N`, entry `(k, i)` is relay `i` to destination `k`.
    h2: Vec<Complex<T>>,
    hr: InterRelay<T>,
}

impl<T: Scalar> ChannelRealization<T> {
    /// Builds a realization from explicit matrices.
    ///
    /// `h1` is `N x K`, `h2` is `K x N` and `hr` is `N x N`, all row-major.
    /// `hr` must be reciprocal in magnitude with a zero diagonal.
    pub fn from_parts(
        k: usize,
        n: usize,
        h1: Vec<Complex<T>>,
        h2: Vec<Complex<T>>,
        hr: Vec<Complex<T>>,
    ) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(Error::arg("dimensions", "K and N must be positive"));
        }
        if h1.len() != n * k || h2.len() != k * n || hr.len() != n * n {
            return Err(Error::arg("dimensions", "matrix sizes do not match N x K"));
        }
        let finite = |c: &Complex<T>| c.re.is_finite() && c.im.is_finite();
        if !(h1.iter().all(finite) && h2.iter().all(finite) && hr.iter().all(finite)) {
            return Err(Error::arg("gains", "all channel entries must be finite"));
        }
        for i in 0..n {
            if hr[i * n + i] != Complex::new(T::zero(), T::zero()) {
                return Err(Error::arg("hr", "diagonal must be zero"));
            }
            for j in (i + 1)..n {
                let a = hr[i * n + j].norm_sqr();
                let b = hr[j * n + i].norm_sqr();
                if (a - b).abs() > T::epsilon() * (T::one() + a.abs()) * T::of(8.0) {
                    return Err(Error::arg("hr", "inter-relay gains must be reciprocal"));
                }
            }
        }
        Ok(ChannelRealization {
            k,
            n,
            h1,
            h2,
            hr: InterRelay::Explicit(hr),
        })
    }

    /// Builds a realization with real, non-negative amplitudes given as
    /// power gains. Handy for hand-constructed cases.
    pub fn from_power_gains(
        k: usize,
        n: usize,
        g1: &[f64],
        g2: &[f64],
        gr: &[f64],
    ) -> Result<Self> {
        let amp = |g: &f64| {
            if *g < 0.0 {
                Err(Error::arg("gains", "power gains must be non-negative"))
            } else {
                Ok(Complex::new(T::of(g.sqrt()), T::zero()))
            }
        };
        let h1 = g1.iter().map(amp).collect::<Result<Vec<_>>>()?;
        let h2 = g2.iter().map(amp).collect::<Result<Vec<_>>>()?;
        let hr = gr.iter().map(amp).collect::<Result<Vec<_>>>()?;
        Self::from_parts(k, n, h1, h2, hr)
    }

    pub fn k_pairs(&self) -> usize {
        self.k
    }

    pub fn n_relays(&self) -> usize {
        self.n
    }

    /// Source `pair` to relay `relay`.
    #[inline]
    pub fn h1(&self, relay: usize, pair: usize) -> Complex<T> {
        self.h1[relay * self.k + pair]
    }

    /// Relay `relay` to destination `pair`.
    #[inline]
    pub fn h2(&self, pair: usize, relay: usize) -> Complex<T> {
        self.h2[pair * self.n + relay]
    }

    /// Inter-relay channel between `i` and `n`; zero when `i == n`.
    #[inline]
    pub fn hr(&self, i: usize, n: usize) -> Complex<T> {
        if i == n {
            return Complex::new(T::zero(), T::zero());
        }
        match &self.hr {
            InterRelay::Explicit(m) => m[i * self.n + n],
            InterRelay::Keyed { key, std, scale } => {
                let (lo, hi) = if i < n { (i, n) } else { (n, i) };
                let (re, im) = keyed_normal_pair(*key, lo as u64, hi as u64);
                Complex::new(T::of(re * std) * *scale, T::of(im * std) * *scale)
            }
        }
    }

    #[inline]
    pub fn g1(&self, relay: usize, pair: usize) -> T {
        self.h1(relay, pair).norm_sqr()
    }

    #[inline]
    pub fn g2(&self, pair: usize, relay: usize) -> T {
        self.h2(pair, relay).norm_sqr()
    }

    /// `|hr(i, n)|^2`. For keyed entries this skips the phase, since the
    /// Box-Muller radius alone fixes the magnitude.
    #[inline]
    pub fn gr(&self, i: usize, n: usize) -> T {
        if i == n {
            return T::zero();
        }
        match &self.hr {
            InterRelay::Explicit(m) => m[i * self.n + n].norm_sqr(),
            InterRelay::Keyed { key, std, scale } => {
                let (lo, hi) = if i < n { (i, n) } else { (n, i) };
                let (u1, _) = keyed_uniforms(*key, lo as u64, hi as u64);
                T::of(-2.0 * u1.ln() * std * std) * *scale * *scale
            }
        }
    }

    pub fn h1_entries(&self) -> &[Complex<T>] {
        &self.h1
    }

    pub fn h2_entries(&self) -> &[Complex<T>] {
        &self.h2
    }

    /// Materializes the full `N x N` inter-relay matrix (row-major).
    pub fn inter_relay_matrix(&self) -> Vec<Complex<T>> {
        let n = self.n;
        (0..n * n).map(|idx| self.hr(idx / n, idx % n)).collect()
    }

    /// Every coefficient multiplied by `c`.
    pub fn scaled(&self, c: T) -> Self {
        let mul = |v: &Vec<Complex<T>>| v.iter().map(|h| *h * c).collect::<Vec<_>>();
        let hr = match &self.hr {
            InterRelay::Explicit(m) => InterRelay::Explicit(mul(m)),
            InterRelay::Keyed { key, std, scale } => InterRelay::Keyed {
                key: *key,
                std: *std,
                scale: *scale * c,
            },
        };
        ChannelRealization {
            k: self.k,
            n: self.n,
            h1: mul(&self.h1),
            h2: mul(&self.h2),
            hr,
        }
    }
}

/// Draws one block of i.i.d. circularly-symmetric Gaussian coefficients.
///
/// The result is a pure function of `(config, seed)`.
pub fn generate_realization<T: Scalar>(
    config: &SystemConfig,
    seed: u64,
) -> Result<ChannelRealization<T>> {
    config.validate()?;
    let (k, n) = (config.k_pairs, config.n_relays);
    let std = config.convention.component_std();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |len: usize| -> Vec<Complex<T>> {
        (0..len)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex::new(T::of(re * std), T::of(im * std))
            })
            .collect()
    };
    let h1 = draw(n * k);
    let h2 = draw(k * n);
    Ok(ChannelRealization {
        k,
        n,
        h1,
        h2,
        hr: InterRelay::Keyed {
            key: splitmix64(seed ^ 0x6a09_e667_f3bc_c909),
            std,
            scale: T::one(),
        },
    })
}

/// Seed for stream `stream` (e.g. trial index) of a master seed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(master) ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniforms on `(0, 1]` and `[0, 1)` keyed by `(key, lo, hi)`.
#[inline]
fn keyed_uniforms(key: u64, lo: u64, hi: u64) -> (f64, f64) {
    let a = splitmix64(key ^ splitmix64(lo.wrapping_mul(0xd6e8_feb8_6659_fd93) ^ hi));
    let b = splitmix64(a);
    let scale = 1.0 / (1u64 << 53) as f64;
    (((a >> 11) + 1) as f64 * scale, (b >> 11) as f64 * scale)
}

/// Two independent standard normals from a keyed hash (Box-Muller).
#[inline]
fn keyed_normal_pair(key: u64, lo: u64, hi: u64) -> (f64, f64) {
    let (u1, u2) = keyed_uniforms(key, lo, hi);
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    (r * theta.cos(), r * theta.sin())
}

//! Invertible mangling of 32-bit keys and the complete digit hashes built on it.
//!
//! Keys are multiplied by an odd constant modulo 2^32. Because
//! 641 × 6 700 417 = 2^32 + 1, the two factors are multiplicative inverses
//! modulo 2^32, and so are all of their powers. Splitting the permuted key
//! into `q` base-`m` digits gives `q` uniform hashes whose joint output
//! identifies the key, so a vector of selected bins decodes back to a key.

use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Forward factor of 2^32 + 1.
pub const FORWARD_FACTOR: u32 = 641;
/// Backward factor of 2^32 + 1.
pub const BACKWARD_FACTOR: u32 = 6_700_417;

pub const DEFAULT_GAMMA: u32 = 3;
pub const DEFAULT_THINNING_GAMMA: u32 = 5;
pub const DEFAULT_ESTIMATOR_GAMMA: u32 = 7;

/// A 32-bit stream key, usually an IPv4 address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Key(pub u32);

impl Key {
    pub const fn new(value: u32) -> Self {
        Key(value)
    }

    pub const fn value(self) -> u32 {
        self.0
    }

    pub fn from_octets(a: u8, b: u8, c: u8, d: u8) -> Self {
        Key(u32::from_be_bytes([a, b, c, d]))
    }
}

impl From<u32> for Key {
    fn from(v: u32) -> Self {
        Key(v)
    }
}

impl From<Ipv4Addr> for Key {
    fn from(addr: Ipv4Addr) -> Self {
        Key(u32::from(addr))
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Ipv4Addr::from(self.0).fmt(f)
    }
}

/// Parses a dotted quad ("a.b.c.d", big-endian) or an unsigned decimal.
impl FromStr for Key {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s.contains('.') {
            s.parse::<Ipv4Addr>()
                .map(Key::from)
                .map_err(|_| format!("invalid dotted-quad address {s:?}"))
        } else {
            s.parse::<u32>()
                .map(Key)
                .map_err(|_| format!("invalid 32-bit key {s:?}"))
        }
    }
}

/// A multiplicative permutation pair `forward · backward ≡ 1 (mod 2^32)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutationParams {
    forward: u32,
    backward: u32,
    gamma: u32,
}

impl PermutationParams {
    /// `641^gamma` and `6700417^gamma`, both reduced modulo 2^32.
    pub fn new(gamma: u32) -> Result<Self> {
        if gamma == 0 {
            return Err(Error::InvalidConfig(
                "permutation power must be at least 1".into(),
            ));
        }
        Ok(Self {
            forward: FORWARD_FACTOR.wrapping_pow(gamma),
            backward: BACKWARD_FACTOR.wrapping_pow(gamma),
            gamma,
        })
    }

    /// An arbitrary inverse pair. `forward` must be odd and `backward` its inverse.
    pub fn from_pair(forward: u32, backward: u32) -> Result<Self> {
        if forward.wrapping_mul(backward) != 1 {
            return Err(Error::InvalidConfig(format!(
                "{forward} and {backward} are not inverse modulo 2^32"
            )));
        }
        Ok(Self {
            forward,
            backward,
            gamma: 1,
        })
    }

    pub fn forward(&self) -> u32 {
        self.forward
    }

    pub fn backward(&self) -> u32 {
        self.backward
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    #[inline]
    pub fn permute(&self, k: Key) -> Key {
        Key(k.0.wrapping_mul(self.forward))
    }

    #[inline]
    pub fn invert(&self, k: Key) -> Key {
        Key(k.0.wrapping_mul(self.backward))
    }
}

impl Default for PermutationParams {
    fn default() -> Self {
        PermutationParams::new(DEFAULT_GAMMA).expect("default gamma is valid")
    }
}

pub fn make_params(gamma: u32) -> Result<PermutationParams> {
    PermutationParams::new(gamma)
}

#[inline]
pub fn permute(k: Key, p: &PermutationParams) -> Key {
    p.permute(k)
}

#[inline]
pub fn invert(k: Key, p: &PermutationParams) -> Key {
    p.invert(k)
}

/// Maps `h` into `[0, n)` using the high bits of the 64-bit product.
#[inline]
pub fn reduce(h: u32, n: usize) -> usize {
    ((h as u64 * n as u64) >> 32) as usize
}

/// Digit layout and substream geometry shared by the array sketches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashConfig {
    /// Number of digit hashes (rows).
    pub q: usize,
    /// Bins per hash. Must be `2^bits` with `bits · q = 32` for the digit sketches.
    pub m: usize,
    /// Substream count used for thinning, or estimator bins for Boyer-Moore.
    pub m_prime: usize,
    pub thinning_gamma: u32,
    pub estimator_gamma: u32,
}

impl Default for HashConfig {
    fn default() -> Self {
        Self {
            q: 4,
            m: 256,
            m_prime: 256,
            thinning_gamma: DEFAULT_THINNING_GAMMA,
            estimator_gamma: DEFAULT_ESTIMATOR_GAMMA,
        }
    }
}

impl HashConfig {
    /// Defaults for max-count: `q = 4, m = 256, m' = 50`.
    pub fn max_count() -> Self {
        Self {
            m_prime: 50,
            ..Self::default()
        }
    }

    /// Defaults for Boyer-Moore: `m = m' = 256`.
    pub fn boyer_moore() -> Self {
        Self::default()
    }

    pub fn with_m_prime(mut self, m_prime: usize) -> Self {
        self.m_prime = m_prime;
        self
    }

    /// Bits per digit, if `m^q = 2^32`.
    pub fn digit_bits(&self) -> Result<u32> {
        if !self.m.is_power_of_two() || self.m < 2 || self.m > 1 << 16 {
            return Err(Error::InvalidConfig(format!(
                "m = {} must be a power of two in [2, 65536]",
                self.m
            )));
        }
        let bits = self.m.trailing_zeros();
        if bits as usize * self.q != 32 {
            return Err(Error::InvalidConfig(format!(
                "m^q must equal 2^32 (got m = {}, q = {})",
                self.m, self.q
            )));
        }
        Ok(bits)
    }

    /// Checks the geometry of the digit sketches against a permutation.
    pub fn validate(&self, params: &PermutationParams) -> Result<()> {
        self.digit_bits()?;
        self.validate_thinning(params)
    }

    pub fn validate_thinning(&self, params: &PermutationParams) -> Result<()> {
        if self.m_prime == 0 {
            return Err(Error::InvalidConfig("m' must be at least 1".into()));
        }
        if self.thinning_gamma == 0 || self.estimator_gamma == 0 {
            return Err(Error::InvalidConfig(
                "hash powers must be at least 1".into(),
            ));
        }
        if self.thinning_gamma == params.gamma() {
            return Err(Error::InvalidConfig(format!(
                "thinning power {} must differ from the permutation power",
                self.thinning_gamma
            )));
        }
        Ok(())
    }

    /// The `i`-th digit (1-based, least significant first) of `k`.
    pub fn digit(&self, k: Key, i: usize) -> Result<usize> {
        let bits = self.digit_bits()?;
        if i == 0 || i > self.q {
            return Err(Error::IndexOutOfRange {
                index: i,
                max: self.q,
            });
        }
        Ok(digit_at(k, i - 1, bits))
    }

    pub fn digits(&self, k: Key) -> Result<Vec<usize>> {
        let bits = self.digit_bits()?;
        Ok((0..self.q).map(|row| digit_at(k, row, bits)).collect())
    }

    /// Inverse of [`HashConfig::digits`].
    pub fn assemble(&self, digits: &[usize]) -> Result<Key> {
        let bits = self.digit_bits()?;
        if digits.len() != self.q {
            return Err(Error::DigitCount {
                expected: self.q,
                got: digits.len(),
            });
        }
        let mut value = 0u32;
        for (position, &d) in digits.iter().enumerate() {
            if d >= self.m {
                return Err(Error::DigitOutOfRange {
                    position: position + 1,
                    value: d,
                    m: self.m,
                });
            }
            value |= (d as u32) << (position as u32 * bits);
        }
        Ok(Key(value))
    }

    /// `invert(assemble(digits))`.
    pub fn decode(&self, digits: &[usize], p: &PermutationParams) -> Result<Key> {
        self.assemble(digits).map(|k| p.invert(k))
    }

    /// Substream index of an already-permuted key.
    pub fn thin(&self, permuted: Key) -> usize {
        thin_into(
            permuted,
            FORWARD_FACTOR.wrapping_pow(self.thinning_gamma),
            self.m_prime,
        )
    }
}

#[inline]
pub(crate) fn digit_at(k: Key, row: usize, bits: u32) -> usize {
    ((k.0 >> (row as u32 * bits)) & ((1u32 << bits) - 1)) as usize
}

/// Multiplies by `multiplier` and reduces into `[0, n)`.
#[inline]
pub fn thin_into(k: Key, multiplier: u32, n: usize) -> usize {
    reduce(k.0.wrapping_mul(multiplier), n)
}

/// The `i`-th octet (1-based, least significant first).
pub fn octet(k: Key, i: usize) -> Result<usize> {
    HashConfig::default().digit(k, i)
}

/// Little-endian octets to key, for the default `q = 4, m = 256` layout.
pub fn assemble(octets: &[usize]) -> Result<Key> {
    HashConfig::default().assemble(octets)
}

pub fn decode(octets: &[usize], p: &PermutationParams) -> Result<Key> {
    HashConfig::default().decode(octets, p)
}

pub fn thin(k: Key, cfg: &HashConfig) -> usize {
    cfg.thin(k)
}

/// Pearson chi-square statistic of a histogram against the uniform law.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if counts.is_empty() || n == 0 {
        return 0.0;
    }
    let expected = n as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum()
}

/// Per-row digit histograms of the permuted keys.
pub fn digit_histograms<I>(
    keys: I,
    cfg: &HashConfig,
    p: &PermutationParams,
) -> Result<Vec<Vec<u64>>>
where
    I: IntoIterator<Item = Key>,
{
    let bits = cfg.digit_bits()?;
    let mut hist = vec![vec![0u64; cfg.m]; cfg.q];
    for k in keys {
        let pk = p.permute(k);
        for (row, h) in hist.iter_mut().enumerate() {
            h[digit_at(pk, row, bits)] += 1;
        }
    }
    Ok(hist)
}

/// Per-row chi-square statistics for a contiguous block of `len` keys starting at `base`.
pub fn block_uniformity(
    base: Key,
    len: u32,
    cfg: &HashConfig,
    p: &PermutationParams,
) -> Result<Vec<f64>> {
    let keys = (0..len).map(|t| Key(base.0.wrapping_add(t)));
    Ok(digit_histograms(keys, cfg, p)?
        .iter()
        .map(|h| chi_square_uniform(h))
        .collect())
}

//! Fixed-length bit strings and the geometry of the k-bit hypercube.
//!
//! A [`BitString`] packs up to 64 bits into a single word. Position `i` is
//! stored at bit `i` of the word (little-endian position indexing); the
//! textual form prints position `k-1` first, so `"0000000001"` has only
//! position 0 set.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use crate::error::{Error, Result};

pub const MAX_LEN: u32 = 64;

/// Slack added before flooring `k * (1 - theta)` so that values such as
/// `10 * (1 - 0.9) = 0.9999999999999998` land on the intended radius.
pub const RADIUS_EPSILON: f64 = 1e-9;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    bits: u64,
    len: u8,
}

#[inline]
fn mask(len: u32) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

fn check_len(len: u32) -> Result<()> {
    if (1..=MAX_LEN).contains(&len) {
        Ok(())
    } else {
        Err(Error::InvalidLength(len))
    }
}

impl BitString {
    /// Builds a string of length `len` from the low `len` bits of `bits`.
    /// Higher bits are discarded.
    pub fn from_bits(bits: u64, len: u32) -> Result<Self> {
        check_len(len)?;
        Ok(BitString {
            bits: bits & mask(len),
            len: len as u8,
        })
    }

    pub fn zeros(len: u32) -> Result<Self> {
        Self::from_bits(0, len)
    }

    pub fn ones(len: u32) -> Result<Self> {
        Self::from_bits(u64::MAX, len)
    }

    #[inline]
    pub fn len(&self) -> u32 {
        u32::from(self.len)
    }

    /// Always false; a bit string has at least one position.
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn bit(&self, position: u32) -> bool {
        assert!(position < self.len(), "position {position} out of range");
        self.bits >> position & 1 == 1
    }

    pub fn with_bit_flipped(&self, position: u32) -> Self {
        assert!(position < self.len(), "position {position} out of range");
        BitString {
            bits: self.bits ^ (1u64 << position),
            len: self.len,
        }
    }

    pub fn complement(&self) -> Self {
        BitString {
            bits: !self.bits & mask(self.len()),
            len: self.len,
        }
    }

    /// Number of positions where the two strings agree.
    pub fn overlap(&self, other: &BitString) -> Result<u32> {
        self.check_same_len(other)?;
        Ok(self.len() - self.distance_unchecked(other))
    }

    /// Number of positions where the two strings differ.
    pub fn hamming(&self, other: &BitString) -> Result<u32> {
        self.check_same_len(other)?;
        Ok(self.distance_unchecked(other))
    }

    #[inline]
    pub(crate) fn distance_unchecked(&self, other: &BitString) -> u32 {
        debug_assert_eq!(self.len, other.len);
        (self.bits ^ other.bits).count_ones()
    }

    fn check_same_len(&self, other: &BitString) -> Result<()> {
        if self.len == other.len {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            })
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text: String = (0..self.len())
            .rev()
            .map(|i| if self.bit(i) { '1' } else { '0' })
            .collect();
        f.pad(&text)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let len = s.chars().count();
        if len == 0 || len > MAX_LEN as usize {
            return Err(Error::InvalidBitString(s.to_owned()));
        }
        let mut bits = 0u64;
        for c in s.chars() {
            bits <<= 1;
            match c {
                '0' => {}
                '1' => bits |= 1,
                _ => return Err(Error::InvalidBitString(s.to_owned())),
            }
        }
        BitString::from_bits(bits, len as u32)
    }
}

pub fn overlap(a: &BitString, b: &BitString) -> Result<u32> {
    a.overlap(b)
}

pub fn hamming(a: &BitString, b: &BitString) -> Result<u32> {
    a.hamming(b)
}

/// Draws a uniform string of length `len`.
///
/// Consumes exactly one `next_u64` from `rng` regardless of `len`; the low
/// `len` bits become the string. Panics if `len` is outside `[1, 64]`.
pub fn random_string<R: RngCore + ?Sized>(rng: &mut R, len: u32) -> BitString {
    let word = rng.next_u64();
    BitString::from_bits(word, len).expect("string length must be in [1, 64]")
}

/// Binomial coefficient `C(n, r)`, exact for `n <= 64`.
pub fn binomial(n: u32, r: u32) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc
}

/// Largest Hamming distance `R` whose relative overlap `(k - R) / k` is
/// still at least `theta`.
pub fn basin_radius(len: u32, theta: f64) -> u32 {
    assert!((1..=MAX_LEN).contains(&len), "k must be in [1, 64]");
    assert!((0.0..=1.0).contains(&theta), "theta must be in [0, 1]");
    let r = (f64::from(len) * (1.0 - theta) + RADIUS_EPSILON).floor();
    (r.max(0.0) as u32).min(len)
}

/// Number of strings within Hamming distance `radius` of a fixed center.
pub fn ball_size(len: u32, radius: u32) -> u128 {
    (0..=radius.min(len)).map(|d| binomial(len, d)).sum()
}

/// Size of the basin of satisfaction: strings whose relative overlap with a
/// fixed center is at least `theta`.
pub fn basin_size(len: u32, theta: f64) -> u128 {
    ball_size(len, basin_radius(len, theta))
}

/// All strings within Hamming distance `radius` of `center`, ordered by
/// distance and then by flip mask.
pub fn enumerate_ball(center: &BitString, radius: u32) -> Result<Vec<BitString>> {
    let len = center.len();
    if radius > len {
        return Err(Error::RadiusOutOfRange { radius, k: len });
    }
    let capacity = usize::try_from(ball_size(len, radius)).unwrap_or(usize::MAX);
    let mut out = Vec::with_capacity(capacity);
    out.push(*center);
    for d in 1..=radius {
        // Gosper's hack over d-subsets of the k positions.
        let limit: u128 = 1u128 << len;
        let mut flips: u128 = (1u128 << d) - 1;
        while flips < limit {
            out.push(BitString {
                bits: center.bits ^ flips as u64,
                len: center.len,
            });
            let low = flips & flips.wrapping_neg();
            let ripple = flips + low;
            flips = (((ripple ^ flips) >> 2) / low) | ripple;
        }
    }
    Ok(out)
}

//! GF(2) block codes: bit vectors, systematic CRC codes and CRC-aided polar
//! codes, with syndrome-based codebook membership tests.
//!
//! Both code families are linear, so membership of a word `w` reduces to a
//! parity syndrome `s(w)` being zero. The syndrome of a unit vector at each
//! position is precomputed at construction; decoders that test many words
//! differing in a handful of positions can then evaluate membership with a
//! few XORs instead of re-running the full check.

use crate::error::{Error, Result};
use rand::Rng;
use std::fmt;
use std::str::FromStr;

// ---------------------------------------------------------------------------
// Bit vectors
// ---------------------------------------------------------------------------

/// Fixed-length binary word. Every element is 0 or 1; the length is set at
/// construction and never changes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    bits: Vec<u8>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            bits: vec![0u8; len],
        }
    }

    /// Builds from a slice of 0/1 values.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::invalid("bit values must be 0 or 1"));
        }
        Ok(BitVector {
            bits: bits.to_vec(),
        })
    }

    /// Uniformly random word of the given length.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        BitVector {
            bits: (0..len).map(|_| rng.random::<bool>() as u8).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        self.bits[i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: u8) {
        assert!(value <= 1, "bit values must be 0 or 1");
        self.bits[i] = value;
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.bits[i] ^= 1;
    }

    pub fn as_bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// Elementwise XOR; both operands must have the same length.
    pub fn xor(&self, other: &BitVector) -> Result<BitVector> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(BitVector {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }

    pub fn hamming_distance(&self, other: &BitVector) -> Result<usize> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                _ => Err(Error::invalid(format!("invalid bit character '{c}'"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(|bits| BitVector { bits })
    }
}

// ---------------------------------------------------------------------------
// Polynomials over GF(2)
// ---------------------------------------------------------------------------

/// Parses a generator polynomial from a hex string (MSB-first, optional
/// `0x` prefix). `"11021"` is x^16 + x^12 + x^5 + 1.
pub fn poly_from_hex(s: &str) -> Result<Vec<u8>> {
    let digits = s.trim().trim_start_matches("0x").trim_start_matches("0X");
    if digits.is_empty() {
        return Err(Error::invalid("empty polynomial"));
    }
    let value = u128::from_str_radix(digits, 16)
        .map_err(|e| Error::invalid(format!("bad polynomial hex '{s}': {e}")))?;
    if value == 0 {
        return Err(Error::invalid("polynomial must be nonzero"));
    }
    let nbits = 128 - value.leading_zeros() as usize;
    Ok((0..nbits)
        .map(|i| ((value >> (nbits - 1 - i)) & 1) as u8)
        .collect())
}

/// Remainder of `dividend` modulo `poly`, both MSB-first bit sequences.
/// Returns `deg(poly)` bits.
fn crc_remainder(dividend: &[u8], poly: &[u8]) -> Vec<u8> {
    let deg = poly.len() - 1;
    assert!(dividend.len() >= deg, "dividend shorter than remainder");
    let mut work = dividend.to_vec();
    for i in 0..work.len() - deg {
        if work[i] == 1 {
            for (j, &p) in poly.iter().enumerate() {
                work[i + j] ^= p;
            }
        }
    }
    work.split_off(work.len() - deg)
}

fn validate_poly(poly: &[u8], expected_degree: usize) -> Result<()> {
    if poly.len() != expected_degree + 1 {
        return Err(Error::invalid(format!(
            "polynomial degree {} does not match required degree {expected_degree}",
            poly.len().saturating_sub(1)
        )));
    }
    if poly.first() != Some(&1) || poly.last() != Some(&1) {
        return Err(Error::invalid(
            "polynomial must have leading and trailing coefficient 1",
        ));
    }
    if poly.iter().any(|&b| b > 1) {
        return Err(Error::invalid("polynomial coefficients must be 0 or 1"));
    }
    Ok(())
}

fn pack_syndrome(bits: &[u8]) -> u64 {
    assert!(bits.len() <= 64, "syndrome wider than 64 bits");
    bits.iter()
        .enumerate()
        .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i))
}

// ---------------------------------------------------------------------------
// Code trait
// ---------------------------------------------------------------------------

/// Linear block code of length `n` with `k` information bits.
///
/// `syndrome` packs all parity checks of a word into a `u64`; a word is a
/// codebook member iff its syndrome is zero. `unit_syndrome(i)` is the
/// syndrome of the single-bit word e_i, so the syndrome of any word is the
/// XOR of the unit syndromes of its set bits.
pub trait BlockCode: Send + Sync {
    fn n(&self) -> usize;
    fn k(&self) -> usize;
    fn encode(&self, info: &BitVector) -> Result<BitVector>;
    fn syndrome(&self, word: &BitVector) -> Result<u64>;
    fn unit_syndrome(&self, pos: usize) -> u64;

    fn is_member(&self, word: &BitVector) -> Result<bool> {
        Ok(self.syndrome(word)? == 0)
    }
}

// ---------------------------------------------------------------------------
// Systematic CRC codes
// ---------------------------------------------------------------------------

/// Systematic `[n,k]` CRC code: the codeword is the information word followed
/// by the (n-k)-bit remainder of info * x^(n-k) modulo the generator
/// polynomial. A word is a member iff it is divisible by the polynomial.
#[derive(Clone)]
pub struct CrcCodeSpec {
    n: usize,
    k: usize,
    poly: Vec<u8>,
    unit_syndromes: Vec<u64>,
}

impl CrcCodeSpec {
    /// `poly` is the generator polynomial as an MSB-first bit sequence of
    /// degree n-k, with leading and trailing coefficient 1.
    pub fn new(n: usize, k: usize, poly: Vec<u8>) -> Result<Self> {
        if k == 0 || n <= k {
            return Err(Error::invalid(format!("bad code dimensions [{n},{k}]")));
        }
        validate_poly(&poly, n - k)?;
        if n - k > 64 {
            return Err(Error::invalid("syndromes wider than 64 bits unsupported"));
        }
        let mut spec = CrcCodeSpec {
            n,
            k,
            poly,
            unit_syndromes: Vec::new(),
        };
        spec.unit_syndromes = (0..n)
            .map(|i| {
                let mut e = vec![0u8; n];
                e[i] = 1;
                pack_syndrome(&crc_remainder(&e, &spec.poly))
            })
            .collect();
        Ok(spec)
    }

    pub fn poly(&self) -> &[u8] {
        &self.poly
    }
}

impl BlockCode for CrcCodeSpec {
    fn n(&self) -> usize {
        self.n
    }

    fn k(&self) -> usize {
        self.k
    }

    fn encode(&self, info: &BitVector) -> Result<BitVector> {
        if info.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                got: info.len(),
            });
        }
        let mut dividend = info.as_bits().to_vec();
        dividend.resize(self.n, 0);
        let rem = crc_remainder(&dividend, &self.poly);
        let mut bits = info.as_bits().to_vec();
        bits.extend_from_slice(&rem);
        BitVector::from_bits(&bits)
    }

    fn syndrome(&self, word: &BitVector) -> Result<u64> {
        if word.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: word.len(),
            });
        }
        Ok(pack_syndrome(&crc_remainder(word.as_bits(), &self.poly)))
    }

    fn unit_syndrome(&self, pos: usize) -> u64 {
        self.unit_syndromes[pos]
    }
}

// ---------------------------------------------------------------------------
// Polar transform and CRC-aided polar codes
// ---------------------------------------------------------------------------

/// Applies the polar kernel `F = [[1,0],[1,1]]` as u * F^(x log2 n) over GF(2).
/// For n = 2, (u0, u1) maps to (u0^u1, u1). The transform is its own inverse.
pub fn polar_transform(u: &BitVector) -> Result<BitVector> {
    let n = u.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::invalid(format!(
            "polar transform length {n} is not a power of two"
        )));
    }
    let mut x = u.as_bits().to_vec();
    let mut h = 1;
    while h < n {
        let mut block = 0;
        while block < n {
            for j in block..block + h {
                x[j] ^= x[j + h];
            }
            block += 2 * h;
        }
        h *= 2;
    }
    BitVector::from_bits(&x)
}

/// Reliability order from the polarization-weight beta expansion
/// (beta = 2^(1/4)): W(i) = sum of beta^j over the set bits of i. Returns
/// positions sorted most reliable first. For n <= 128 the weights are
/// distinct, so the order is unambiguous.
pub fn polarization_weight_order(n: usize) -> Result<Vec<usize>> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::invalid(format!(
            "reliability order length {n} is not a power of two"
        )));
    }
    let beta = 2f64.powf(0.25);
    let weight = |i: usize| -> f64 {
        let mut w = 0.0;
        let mut v = i;
        let mut j = 0;
        while v > 0 {
            if v & 1 == 1 {
                w += beta.powi(j);
            }
            v >>= 1;
            j += 1;
        }
        w
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        weight(b)
            .partial_cmp(&weight(a))
            .expect("finite weights")
            .then(a.cmp(&b))
    });
    Ok(order)
}

/// CRC-aided polar code: the information word plus its CRC occupy the most
/// reliable positions of the polar transform input; the remaining (frozen)
/// positions are zero. Membership inverts the transform, checks that all
/// frozen positions are zero and that the CRC over the payload checks.
#[derive(Clone)]
pub struct CaPolarSpec {
    n: usize,
    k_info: usize,
    crc_len: usize,
    crc_poly: Vec<u8>,
    reliability_order: Vec<usize>,
    /// First k_info + crc_len entries of the reliability order.
    payload_positions: Vec<usize>,
    /// Remaining (least reliable) positions, always zero in the transform
    /// domain.
    frozen_positions: Vec<usize>,
    unit_syndromes: Vec<u64>,
}

impl CaPolarSpec {
    /// `crc_poly` is MSB-first; its degree is the CRC length. When
    /// `reliability_order` is `None` the polarization-weight order is used.
    /// An explicit order lists positions 0..n, most reliable first.
    pub fn new(
        n: usize,
        k_info: usize,
        crc_poly: Vec<u8>,
        reliability_order: Option<Vec<usize>>,
    ) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::invalid(format!(
                "polar code length {n} is not a power of two"
            )));
        }
        let crc_len = crc_poly.len().saturating_sub(1);
        validate_poly(&crc_poly, crc_len)?;
        if k_info == 0 || k_info + crc_len >= n {
            return Err(Error::invalid(format!(
                "bad CA-polar dimensions: n={n}, k_info={k_info}, crc_len={crc_len}"
            )));
        }
        let order = match reliability_order {
            Some(order) => {
                let mut seen = vec![false; n];
                if order.len() != n || order.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
                    return Err(Error::invalid(
                        "reliability order must be a permutation of 0..n",
                    ));
                }
                order
            }
            None => polarization_weight_order(n)?,
        };
        let payload_len = k_info + crc_len;
        let frozen_count = n - payload_len;
        if frozen_count + crc_len > 64 {
            return Err(Error::invalid("syndromes wider than 64 bits unsupported"));
        }
        let payload_positions = order[..payload_len].to_vec();
        let frozen_positions = order[payload_len..].to_vec();
        let mut spec = CaPolarSpec {
            n,
            k_info,
            crc_len,
            crc_poly,
            reliability_order: order,
            payload_positions,
            frozen_positions,
            unit_syndromes: Vec::new(),
        };
        spec.unit_syndromes = (0..n)
            .map(|i| {
                let mut e = BitVector::zeros(n);
                e.set(i, 1);
                spec.raw_syndrome(&e)
            })
            .collect();
        Ok(spec)
    }

    pub fn crc_len(&self) -> usize {
        self.crc_len
    }

    pub fn reliability_order(&self) -> &[usize] {
        &self.reliability_order
    }

    pub fn frozen_positions(&self) -> &[usize] {
        &self.frozen_positions
    }

    /// Frozen-position bits followed by the payload CRC remainder, packed
    /// into a u64. The word is a codeword iff this is zero.
    fn raw_syndrome(&self, word: &BitVector) -> u64 {
        let g = polar_transform(word).expect("length checked at construction");
        let mut checks: Vec<u8> = self
            .frozen_positions
            .iter()
            .map(|&p| g.get(p))
            .collect();
        let payload: Vec<u8> = self.payload_positions.iter().map(|&p| g.get(p)).collect();
        checks.extend_from_slice(&crc_remainder(&payload, &self.crc_poly));
        pack_syndrome(&checks)
    }
}

impl BlockCode for CaPolarSpec {
    fn n(&self) -> usize {
        self.n
    }

    fn k(&self) -> usize {
        self.k_info
    }

    fn encode(&self, info: &BitVector) -> Result<BitVector> {
        if info.len() != self.k_info {
            return Err(Error::LengthMismatch {
                expected: self.k_info,
                got: info.len(),
            });
        }
        // payload = info ++ crc(info)
        let mut dividend = info.as_bits().to_vec();
        dividend.resize(self.k_info + self.crc_len, 0);
        let rem = crc_remainder(&dividend, &self.crc_poly);
        let mut payload = info.as_bits().to_vec();
        payload.extend_from_slice(&rem);

        let mut u = BitVector::zeros(self.n);
        for (bit, &pos) in payload.iter().zip(&self.payload_positions) {
            u.set(pos, *bit);
        }
        polar_transform(&u)
    }

    fn syndrome(&self, word: &BitVector) -> Result<u64> {
        if word.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: word.len(),
            });
        }
        Ok(self.raw_syndrome(word))
    }

    fn unit_syndrome(&self, pos: usize) -> u64 {
        self.unit_syndromes[pos]
    }
}

// ---------------------------------------------------------------------------
// Named presets
// ---------------------------------------------------------------------------

/// `[128,112]` CRC code with generator x^16 + x^12 + x^5 + 1.
pub fn crc128_112() -> CrcCodeSpec {
    CrcCodeSpec::new(128, 112, poly_from_hex("11021").unwrap()).unwrap()
}

/// `[16,8]` CRC code with generator x^8 + x^2 + x + 1.
pub fn crc16_8() -> CrcCodeSpec {
    CrcCodeSpec::new(16, 8, poly_from_hex("107").unwrap()).unwrap()
}

/// `[128,112]` CRC-aided polar code with an 11-bit CRC
/// (x^11 + x^10 + x^9 + x^5 + 1), leaving 5 frozen positions.
pub fn capolar128_112() -> CaPolarSpec {
    CaPolarSpec::new(128, 112, poly_from_hex("e21").unwrap(), None).unwrap()
}

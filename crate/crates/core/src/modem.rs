//! Bit-to-symbol mapping and the per-bit constellation partitions used by
//! the soft demappers.

use crate::error::{Error, Result};
use crate::gf2codes::BitVector;
use num_complex::Complex64;
use std::str::FromStr;

/// Gray-labeled constellation with unit average energy.
///
/// Labels are m-bit values stored MSB-first: bit index 1 (the first bit of a
/// symbol group) is the most significant label bit. For each bit index j and
/// value b, the constellation partitions into the subsets of points whose
/// jth label bit equals b.
#[derive(Clone)]
pub struct Constellation {
    name: &'static str,
    bits_per_symbol: usize,
    points: Vec<Complex64>,
    labels: Vec<u8>,
    label_to_index: Vec<usize>,
    /// subset_indices[j][b]: indices of points whose (j+1)th bit equals b.
    subsets: Vec<[Vec<usize>; 2]>,
}

impl Constellation {
    /// QPSK: bit 1 selects the real sign, bit 2 the imaginary sign, with 0
    /// mapping to +. The 00 label is (1+j)/sqrt(2).
    pub fn qpsk() -> Self {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let mut points = Vec::with_capacity(4);
        let mut labels = Vec::with_capacity(4);
        for label in 0u8..4 {
            let b1 = (label >> 1) & 1;
            let b2 = label & 1;
            let sign = |b: u8| if b == 0 { 1.0 } else { -1.0 };
            points.push(Complex64::new(a * sign(b1), a * sign(b2)));
            labels.push(label);
        }
        Self::build("qpsk", 2, points, labels)
    }

    /// 16-QAM with a per-axis Gray code: label bits 1-2 select the real
    /// level and bits 3-4 the imaginary level, with 00,01,11,10 mapping to
    /// -3,-1,+1,+3 scaled by 1/sqrt(10).
    pub fn qam16() -> Self {
        let scale = 1.0 / 10f64.sqrt();
        let level = |bits: u8| -> f64 {
            match bits {
                0b00 => -3.0,
                0b01 => -1.0,
                0b11 => 1.0,
                0b10 => 3.0,
                _ => unreachable!(),
            }
        };
        let mut points = Vec::with_capacity(16);
        let mut labels = Vec::with_capacity(16);
        for label in 0u8..16 {
            let re = level((label >> 2) & 0b11) * scale;
            let im = level(label & 0b11) * scale;
            points.push(Complex64::new(re, im));
            labels.push(label);
        }
        Self::build("qam16", 4, points, labels)
    }

    fn build(
        name: &'static str,
        bits_per_symbol: usize,
        points: Vec<Complex64>,
        labels: Vec<u8>,
    ) -> Self {
        let size = 1usize << bits_per_symbol;
        assert_eq!(points.len(), size);
        assert_eq!(labels.len(), size);
        let energy: f64 = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / size as f64;
        assert!(
            (energy - 1.0).abs() < 1e-12,
            "constellation energy {energy} is not 1"
        );

        let mut label_to_index = vec![usize::MAX; size];
        for (idx, &label) in labels.iter().enumerate() {
            assert_eq!(
                label_to_index[label as usize],
                usize::MAX,
                "labels must be a permutation"
            );
            label_to_index[label as usize] = idx;
        }

        let mut subsets = Vec::with_capacity(bits_per_symbol);
        for j in 0..bits_per_symbol {
            let shift = bits_per_symbol - 1 - j;
            let mut by_value: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
            for (idx, &label) in labels.iter().enumerate() {
                by_value[((label >> shift) & 1) as usize].push(idx);
            }
            subsets.push(by_value);
        }

        Constellation {
            name,
            bits_per_symbol,
            points,
            labels,
            label_to_index,
            subsets,
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Maps a word whose length is a multiple of the bits per symbol: each
    /// group of consecutive bits picks the point carrying that label.
    pub fn map_bits(&self, bits: &BitVector) -> Result<Vec<Complex64>> {
        let m = self.bits_per_symbol;
        if !bits.len().is_multiple_of(m) {
            return Err(Error::invalid(format!(
                "word length {} is not a multiple of {m} bits per symbol",
                bits.len()
            )));
        }
        Ok(bits
            .as_bits()
            .chunks(m)
            .map(|group| {
                let label = group.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
                self.points[self.label_to_index[label]]
            })
            .collect())
    }

    /// The 2^(m-1) points whose jth label bit (1-based) equals `b`.
    pub fn bit_subset(&self, j: usize, b: u8) -> Result<Vec<Complex64>> {
        if j == 0 || j > self.bits_per_symbol {
            return Err(Error::invalid(format!(
                "bit index {j} out of range 1..={}",
                self.bits_per_symbol
            )));
        }
        if b > 1 {
            return Err(Error::invalid("bit value must be 0 or 1"));
        }
        Ok(self.subsets[j - 1][b as usize]
            .iter()
            .map(|&idx| self.points[idx])
            .collect())
    }

    /// Point indices of the (j, b) subset, j zero-based.
    pub(crate) fn subset_indices(&self, j0: usize, b: usize) -> &[usize] {
        &self.subsets[j0][b]
    }

    /// Index of the point nearest to `y` in Euclidean distance.
    pub fn nearest_index(&self, y: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (idx, p) in self.points.iter().enumerate() {
            let d = (y - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = idx;
            }
        }
        best
    }
}

impl FromStr for Constellation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Constellation::qpsk()),
            "qam16" | "16qam" => Ok(Constellation::qam16()),
            other => Err(Error::invalid(format!("unknown constellation '{other}'"))),
        }
    }
}

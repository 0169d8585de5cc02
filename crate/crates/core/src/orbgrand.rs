//! Soft-input ORBGRAND decoding: reliability ranking, noise-pattern
//! generation in logistic-weight order via integer partitions into distinct
//! parts, syndrome-based membership querying, and posterior scoring.
//!
//! Bits are ranked from least to most reliable by |LLR|. Candidate noise
//! patterns are sets of ranks; the logistic weight of a pattern is the sum
//! of its ranks (1-indexed, least reliable first). Patterns are emitted in
//! nondecreasing weight; within a weight, patterns with fewer flips come
//! first, then in ascending lexicographic order of their ascending rank
//! lists. The first pattern is always empty, leaving the hard decision
//! unchanged.

use crate::error::{Error, Result};
use crate::gf2codes::{BitVector, BlockCode};
use crate::detect::LlrVector;

// ---------------------------------------------------------------------------
// Reliability ranking
// ---------------------------------------------------------------------------

/// Permutation sorting bit positions by ascending |LLR|, ties broken by the
/// lower original index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReliabilityOrder {
    /// perm[r] = bit position holding rank r+1 (rank 1 = least reliable).
    perm: Vec<u32>,
    /// inverse[pos] = zero-based rank of the bit at `pos`.
    inverse: Vec<u32>,
}

impl ReliabilityOrder {
    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Bit position holding the 1-based rank.
    pub fn position_of_rank(&self, rank: usize) -> usize {
        self.perm[rank - 1] as usize
    }

    /// 1-based rank of the bit at a position.
    pub fn rank_of_position(&self, pos: usize) -> usize {
        self.inverse[pos] as usize + 1
    }

    pub fn permutation(&self) -> &[u32] {
        &self.perm
    }
}

/// Ranks bits from least to most reliable: a stable ascending sort of |LLR|.
pub fn rank_bits(llrs: &LlrVector) -> ReliabilityOrder {
    let n = llrs.len();
    let mut perm: Vec<u32> = (0..n as u32).collect();
    perm.sort_by(|&a, &b| {
        llrs.get(a as usize)
            .abs()
            .partial_cmp(&llrs.get(b as usize).abs())
            .expect("LLRs are finite")
            .then(a.cmp(&b))
    });
    let mut inverse = vec![0u32; n];
    for (r, &pos) in perm.iter().enumerate() {
        inverse[pos as usize] = r as u32;
    }
    ReliabilityOrder { perm, inverse }
}

// ---------------------------------------------------------------------------
// Noise-pattern stream
// ---------------------------------------------------------------------------

/// A candidate noise pattern: the set of 1-based reliability ranks to flip,
/// stored in ascending order. Its logistic weight is the sum of the ranks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NoisePattern {
    pub flipped_ranks: Vec<u32>,
}

impl NoisePattern {
    pub fn logistic_weight(&self) -> u64 {
        self.flipped_ranks.iter().map(|&r| r as u64).sum()
    }
}

/// Ordered stream of noise patterns for words of length `n`, truncated after
/// `budget` emissions.
pub fn pattern_stream(n: usize, budget: usize) -> PatternStream {
    PatternStream {
        n: n as u64,
        weight: 0,
        queue: vec![Vec::new()], // weight 0: the empty pattern
        queue_pos: 0,
        remaining: budget,
    }
}

pub struct PatternStream {
    n: u64,
    weight: u64,
    queue: Vec<Vec<u32>>,
    queue_pos: usize,
    remaining: usize,
}

impl PatternStream {
    /// All partitions of `weight` into distinct parts <= n, grouped by part
    /// count ascending, each group in ascending lexicographic order of the
    /// ascending part lists.
    fn partitions_of(weight: u64, n: u64) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut scratch = Vec::new();
        let mut count = 1u64;
        // c distinct parts need at least c(c+1)/2 total weight.
        while count * (count + 1) / 2 <= weight {
            Self::extend(weight, count, 1, n, &mut scratch, &mut out);
            count += 1;
        }
        out
    }

    fn extend(
        remaining: u64,
        parts_left: u64,
        min_part: u64,
        n: u64,
        scratch: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if parts_left == 1 {
            if remaining >= min_part && remaining <= n {
                scratch.push(remaining as u32);
                out.push(scratch.clone());
                scratch.pop();
            }
            return;
        }
        // Remaining parts must be strictly increasing, so after choosing `a`
        // the rest need at least (parts_left-1) values above `a` and can
        // reach at most the top parts_left-1 values of 1..=n.
        let mut a = min_part;
        loop {
            let rest = parts_left - 1;
            let min_rest = rest * (a + 1) + rest * (rest - 1) / 2;
            if a > n || a + min_rest > remaining {
                break;
            }
            let max_rest: u64 = (0..rest).map(|i| n - i).sum();
            if remaining - a <= max_rest {
                scratch.push(a as u32);
                Self::extend(remaining - a, rest, a + 1, n, scratch, out);
                scratch.pop();
            }
            a += 1;
        }
    }
}

impl Iterator for PatternStream {
    type Item = NoisePattern;

    fn next(&mut self) -> Option<NoisePattern> {
        if self.remaining == 0 {
            return None;
        }
        while self.queue_pos == self.queue.len() {
            self.weight += 1;
            if self.weight > self.n * (self.n + 1) / 2 {
                return None; // every subset of ranks has been emitted
            }
            self.queue = Self::partitions_of(self.weight, self.n);
            self.queue_pos = 0;
        }
        let ranks = self.queue[self.queue_pos].clone();
        self.queue_pos += 1;
        self.remaining -= 1;
        Some(NoisePattern {
            flipped_ranks: ranks,
        })
    }
}

/// Flattened, shareable pattern schedule: the first `budget` patterns for
/// length-`n` words, laid out contiguously for fast iteration.
pub struct PatternTable {
    offsets: Vec<u32>,
    ranks: Vec<u32>,
}

impl PatternTable {
    pub fn build(n: usize, budget: usize) -> Self {
        let mut offsets = Vec::with_capacity(budget + 1);
        let mut ranks = Vec::new();
        offsets.push(0u32);
        for pattern in pattern_stream(n, budget) {
            ranks.extend_from_slice(&pattern.flipped_ranks);
            offsets.push(ranks.len() as u32);
        }
        PatternTable { offsets, ranks }
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn pattern(&self, i: usize) -> &[u32] {
        &self.ranks[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }
}

// ---------------------------------------------------------------------------
// Decoding
// ---------------------------------------------------------------------------

/// Outcome of one ORBGRAND decode.
///
/// `codeword` and `noise` are present iff `found`; the codeword XORed with
/// the noise pattern reproduces the hard-decision word. `queries_used`
/// counts every membership test including the successful one; on
/// abandonment it equals the budget.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub codeword: Option<BitVector>,
    pub noise: Option<BitVector>,
    pub found: bool,
    pub queries_used: u64,
    /// Posterior probability of the found noise pattern, in [0, 1].
    pub posterior: Option<f64>,
    /// Same quantity in the log domain; selection among candidates should
    /// compare this, since the exponentiated value can underflow.
    pub log_posterior: Option<f64>,
}

impl DecodeResult {
    fn abandoned(queries_used: u64) -> Self {
        DecodeResult {
            codeword: None,
            noise: None,
            found: false,
            queries_used,
            posterior: None,
            log_posterior: None,
        }
    }
}

/// Soft-input ORBGRAND decoder for words of a fixed length with a fixed
/// query budget. Construction precomputes the noise-pattern schedule, which
/// decodes share read-only.
pub struct OrbgrandDecoder {
    n: usize,
    budget: usize,
    table: PatternTable,
}

impl OrbgrandDecoder {
    pub fn new(n: usize, budget: usize) -> Self {
        assert!(n >= 1, "word length must be positive");
        assert!(budget >= 1, "query budget must be positive");
        OrbgrandDecoder {
            n,
            budget,
            table: PatternTable::build(n, budget),
        }
    }

    pub fn word_len(&self) -> usize {
        self.n
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Decodes by flipping noise patterns into the hard-decision word, in
    /// logistic-weight order, until a codebook member is found or the budget
    /// is spent. Membership is tested through the code's syndrome: the
    /// syndrome of the patterned word is the hard-decision syndrome XOR the
    /// unit syndromes of the flipped positions.
    pub fn decode<C: BlockCode + ?Sized>(&self, llrs: &LlrVector, code: &C) -> DecodeResult {
        assert_eq!(llrs.len(), self.n, "LLR length differs from decoder length");
        assert_eq!(code.n(), self.n, "code length differs from decoder length");
        let order = rank_bits(llrs);
        let hard = llrs.hard_decision();
        let base = code.syndrome(&hard).expect("length checked");

        // Unit syndromes in rank space: entry r is the syndrome of flipping
        // the bit whose reliability rank is r+1.
        let by_rank: Vec<u64> = order
            .permutation()
            .iter()
            .map(|&pos| code.unit_syndrome(pos as usize))
            .collect();

        for qi in 0..self.table.len() {
            let ranks = self.table.pattern(qi);
            let mut syndrome = base;
            for &r in ranks {
                syndrome ^= by_rank[(r - 1) as usize];
            }
            if syndrome == 0 {
                let mut noise = BitVector::zeros(self.n);
                for &r in ranks {
                    noise.set(order.position_of_rank(r as usize), 1);
                }
                let codeword = hard.xor(&noise).expect("same length");
                let log_post = log_posterior(&noise, llrs).expect("same length");
                return DecodeResult {
                    codeword: Some(codeword),
                    noise: Some(noise),
                    found: true,
                    queries_used: qi as u64 + 1,
                    posterior: Some(log_post.exp()),
                    log_posterior: Some(log_post),
                };
            }
        }
        DecodeResult::abandoned(self.table.len() as u64)
    }
}

// ---------------------------------------------------------------------------
// Posterior scoring
// ---------------------------------------------------------------------------

/// Log-probability of a noise pattern given the bit reliabilities:
/// sum of log B_l over flipped bits plus log (1 - B_l) over the rest, with
/// B_l = exp(-|llr_l|) / (1 + exp(-|llr_l|)).
pub fn log_posterior(z: &BitVector, llrs: &LlrVector) -> Result<f64> {
    if z.len() != llrs.len() {
        return Err(Error::LengthMismatch {
            expected: llrs.len(),
            got: z.len(),
        });
    }
    let mut log_p = 0.0;
    for (i, &b) in z.as_bits().iter().enumerate() {
        let mag = llrs.get(i).abs();
        // log(1 - B) = -log1p(e^{-|llr|}); log B = -|llr| - log1p(e^{-|llr|}).
        log_p -= (-mag).exp().ln_1p();
        if b == 1 {
            log_p -= mag;
        }
    }
    Ok(log_p)
}

/// Posterior probability of a noise pattern, computed in the log domain and
/// exponentiated at the end.
pub fn posterior(z: &BitVector, llrs: &LlrVector) -> Result<f64> {
    Ok(log_posterior(z, llrs)?.exp())
}

//! Joint error correction and fading channel-estimate refinement built on
//! ORBGRAND, with a Monte Carlo block-error-rate simulator.
//!
//! A flat-fading receiver only has an imperfect pilot-based channel
//! estimate. Instead of spending more pilots, this crate decodes against a
//! small grid of alternative estimates placed around the pilot estimate:
//! each candidate produces its own soft-demapper LLRs and its own ORBGRAND
//! decode, and the candidate whose recovered noise pattern is most probable
//! wins. A refined variant additionally marginalizes the residual
//! estimation error over each candidate's Voronoi cell when computing LLRs,
//! in closed form via the error function.
//!
//! Module map:
//!
//! - [`gf2codes`]: bit vectors, systematic CRC codes, CRC-aided polar codes,
//!   syndrome-based membership.
//! - [`modem`]: Gray-labeled QPSK / 16-QAM mapping and per-bit subsets.
//! - [`channel`]: Rician fading, AWGN, estimation-error sampling.
//! - [`detect`]: ML / ZF / MMSE soft demappers and the residual-error-aware
//!   ML demapper.
//! - [`orbgrand`]: reliability ranking, logistic-weight pattern generation,
//!   decoding, posterior scoring.
//! - [`jointdec`]: candidate sets, posterior-argmax selection, the
//!   cell-marginalized variant, and the genie benchmark.
//! - [`sim`]: Monte Carlo BLER driver, configuration, CSV/JSON export.
//!
//! One end-to-end trial:
//!
//! ```
//! use grandfade::gf2codes::{crc16_8, BlockCode};
//! use grandfade::jointdec::{self, CandidateSet, JointContext};
//! use grandfade::{channel, BitVector, Constellation, DetectorKind, OrbgrandDecoder};
//! use rand::SeedableRng;
//!
//! let code = crc16_8();
//! let constellation = Constellation::qpsk();
//! let decoder = OrbgrandDecoder::new(code.n(), 10_000);
//! let (sigma_e2, sigma_w2) = (0.01, 0.05);
//!
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//! let info = BitVector::random(code.k(), &mut rng);
//! let x = constellation.map_bits(&code.encode(&info)?)?;
//! let draw = channel::make_draw(10.0, sigma_e2, sigma_w2, &mut rng)?;
//! let y = channel::transmit(&x, &draw, &mut rng);
//!
//! let ctx = JointContext {
//!     constellation: &constellation,
//!     code: &code,
//!     decoder: &decoder,
//!     sigma_w2,
//!     sigma_e2,
//! };
//! let cands = CandidateSet::axis5(sigma_e2.sqrt())?;
//! let result = jointdec::method1(&y, draw.h_hat, &cands, DetectorKind::Ml, &ctx, false)?;
//! if let Some(selected) = result.selected {
//!     println!("candidate {} scored {:.3}", selected.index, selected.score);
//! }
//! # Ok::<(), grandfade::Error>(())
//! ```

// Parameter validation spells checks as negated comparisons
// (`!(x > 0.0)`) so that NaN fails them as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod detect;
pub mod error;
pub mod gf2codes;
pub mod jointdec;
pub mod modem;
pub mod orbgrand;
pub mod sim;

mod special;

pub use channel::ChannelDraw;
pub use detect::{DetectorKind, LlrVector, VoronoiRect};
pub use error::{Error, Result};
pub use gf2codes::{BitVector, BlockCode, CaPolarSpec, CrcCodeSpec};
pub use jointdec::{CandidateSet, JointContext, JointResult, SelectedCandidate};
pub use modem::Constellation;
pub use orbgrand::{DecodeResult, OrbgrandDecoder, ReliabilityOrder};
pub use sim::{MethodKind, PartialConfig, ResultRow, SimConfig, SnrPointResult};

//! Monte Carlo block-error-rate experiments: per-trial channel draws,
//! decoding with the configured method, aggregation with confidence
//! intervals, and results export.
//!
//! Every random draw is reproducible: trial t at SNR point s derives its own
//! stream from (seed, s, t), so trials can run in parallel and two runs with
//! the same configuration produce identical results.

pub mod config;
pub mod report;

pub use config::{
    CandidateKind, CodeConfig, MethodKind, OutputFormat, PartialConfig, SimConfig, SnrSweep,
};
pub use report::{wilson_interval, ResultRow, SnrPointResult};

use crate::channel;
use crate::error::{Error, Result};
use crate::gf2codes::BitVector;
use crate::jointdec::{self, CandidateSet, JointContext};
use crate::orbgrand::OrbgrandDecoder;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fs::File;
use std::io::Write;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent substream for (seed, SNR point, trial index).
fn trial_rng(seed: u64, snr_db: f64, trial: u64) -> ChaCha8Rng {
    let mut state = splitmix(seed ^ 0x6A09_E667_F3BC_C908);
    state = splitmix(state ^ snr_db.to_bits());
    state = splitmix(state ^ trial);
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        state = splitmix(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

#[derive(Debug, Clone, Copy)]
struct TrialOutcome {
    block_error: bool,
    selection_found: bool,
    queries: u64,
    /// |offset| of the chosen candidate, NaN when nothing was selected.
    chosen_offset_mag: f64,
}

fn outcome_from_selection(
    selected: Option<(usize, &BitVector)>,
    cands: &CandidateSet,
    queries: u64,
    transmitted: &BitVector,
) -> TrialOutcome {
    match selected {
        Some((index, codeword)) => TrialOutcome {
            block_error: codeword != transmitted,
            selection_found: true,
            queries,
            chosen_offset_mag: cands.deltas()[index].norm(),
        },
        None => TrialOutcome {
            block_error: true,
            selection_found: false,
            queries,
            chosen_offset_mag: f64::NAN,
        },
    }
}

/// Runs one SNR point for several methods at once over common channel
/// draws. Methods other than `method2` share one set of per-candidate
/// decodes per trial; `baseline` reads the zero-offset candidate of that
/// set. Results are indexed like `methods`.
pub fn run_point_methods(
    cfg: &SimConfig,
    snr_db: f64,
    methods: &[MethodKind],
) -> Result<Vec<SnrPointResult>> {
    cfg.validate()?;
    if methods.is_empty() {
        return Err(Error::Config("no methods requested".into()));
    }
    let code = cfg.code.build()?;
    let constellation = cfg.constellation()?;
    let decoder = OrbgrandDecoder::new(code.n(), cfg.max_queries);
    let sigma_w2 = channel::sigma_w2_from_snr_db(snr_db);

    let wants_shared = methods.iter().any(|m| *m != MethodKind::Method2);
    let wants_multi = methods
        .iter()
        .any(|m| !matches!(m, MethodKind::Method2 | MethodKind::Baseline));
    let wants_m2 = methods.contains(&MethodKind::Method2);

    // Baseline alone gets the single-candidate set; anything sharing with a
    // grid method reuses the grid and reads candidate 0 (the zero offset).
    let shared_set = if wants_multi {
        cfg.candidates.build(cfg.sigma_e2)?
    } else {
        CandidateSet::single()
    };
    assert_eq!(
        shared_set.deltas()[0],
        Complex64::new(0.0, 0.0),
        "candidate 0 must be the unadjusted estimate"
    );
    let m2_set = if wants_m2 {
        Some(CandidateSet::grid9(cfg.sigma_e2.sqrt())?)
    } else {
        None
    };

    let k = code.k();
    let trials = cfg.trials;
    let per_trial: Vec<Vec<TrialOutcome>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, snr_db, t);
            let info = BitVector::random(k, &mut rng);
            let codeword = code.encode(&info).expect("configured code encodes k bits");
            let x = constellation
                .map_bits(&codeword)
                .expect("code length validated against symbol size");
            let draw = channel::make_draw(cfg.k_factor, cfg.sigma_e2, sigma_w2, &mut rng)
                .expect("validated parameters");
            let y = channel::transmit(&x, &draw, &mut rng);

            let ctx = JointContext {
                constellation: &constellation,
                code: code.as_ref(),
                decoder: &decoder,
                sigma_w2,
                sigma_e2: cfg.sigma_e2,
            };

            let shared = if wants_shared {
                Some(
                    jointdec::decode_candidates(&y, draw.h_hat, &shared_set, cfg.detector, &ctx)
                        .expect("validated detector"),
                )
            } else {
                None
            };
            let shared_queries: u64 = shared
                .as_ref()
                .map(|decs| decs.iter().map(|d| d.queries_used).sum())
                .unwrap_or(0);

            let m2 = m2_set.as_ref().map(|set| {
                jointdec::method2(&y, draw.h_hat, set, &ctx, false)
                    .expect("grid9 carries cells")
            });

            methods
                .iter()
                .map(|method| match method {
                    MethodKind::Baseline => {
                        let dec = &shared.as_ref().expect("shared decodes present")[0];
                        let selected = dec
                            .codeword
                            .as_ref()
                            .map(|cw| (0usize, cw));
                        outcome_from_selection(selected, &shared_set, dec.queries_used, &codeword)
                    }
                    MethodKind::Method1 | MethodKind::Method1Weighted => {
                        let decs = shared.as_ref().expect("shared decodes present");
                        let weighted = *method == MethodKind::Method1Weighted;
                        let sel = jointdec::select_by_score(
                            decs,
                            &shared_set,
                            draw.h_hat,
                            cfg.sigma_e2,
                            weighted,
                        );
                        outcome_from_selection(
                            sel.as_ref().map(|s| (s.index, &s.codeword)),
                            &shared_set,
                            shared_queries,
                            &codeword,
                        )
                    }
                    MethodKind::Genie => {
                        let decs = shared.as_ref().expect("shared decodes present");
                        let joint =
                            jointdec::genie_select(decs, &shared_set, draw.h_hat, &codeword)
                                .expect("lengths match");
                        outcome_from_selection(
                            joint.selected.as_ref().map(|s| (s.index, &s.codeword)),
                            &shared_set,
                            shared_queries,
                            &codeword,
                        )
                    }
                    MethodKind::Method2 => {
                        let joint = m2.as_ref().expect("method2 result present");
                        let set = m2_set.as_ref().expect("method2 set present");
                        outcome_from_selection(
                            joint.selected.as_ref().map(|s| (s.index, &s.codeword)),
                            set,
                            joint.total_queries(),
                            &codeword,
                        )
                    }
                })
                .collect()
        })
        .collect();

    Ok(methods
        .iter()
        .enumerate()
        .map(|(mi, _)| {
            let outcomes = per_trial.iter().map(|row| &row[mi]);
            aggregate(snr_db, trials, outcomes)
        })
        .collect())
}

fn aggregate<'a>(
    snr_db: f64,
    trials: u64,
    outcomes: impl Iterator<Item = &'a TrialOutcome>,
) -> SnrPointResult {
    let mut block_errors = 0u64;
    let mut abandon_count = 0u64;
    let mut query_sum = 0u64;
    let mut offset_sum = 0.0f64;
    let mut offset_count = 0u64;
    for o in outcomes {
        block_errors += o.block_error as u64;
        abandon_count += !o.selection_found as u64;
        query_sum += o.queries;
        if o.selection_found {
            offset_sum += o.chosen_offset_mag;
            offset_count += 1;
        }
    }
    let (ci_lo, ci_hi) = wilson_interval(block_errors, trials);
    SnrPointResult {
        snr_db,
        trials,
        block_errors,
        bler: block_errors as f64 / trials as f64,
        ci_lo,
        ci_hi,
        mean_queries: query_sum as f64 / trials as f64,
        mean_chosen_offset_magnitude: if offset_count > 0 {
            offset_sum / offset_count as f64
        } else {
            0.0
        },
        abandon_count,
    }
}

/// Runs one SNR point with the configured method.
pub fn run_point(cfg: &SimConfig, snr_db: f64) -> Result<SnrPointResult> {
    Ok(run_point_methods(cfg, snr_db, &[cfg.method])?.remove(0))
}

/// Runs the configured sweep in ascending SNR order. When an output path is
/// configured, results written so far are flushed to it as each point
/// completes, so an interrupted run keeps its finished prefix.
pub fn run_sweep(cfg: &SimConfig) -> Result<Vec<SnrPointResult>> {
    run_sweep_with(cfg, |_| {})
}

/// Like [`run_sweep`], invoking the callback after each completed point.
pub fn run_sweep_with(
    cfg: &SimConfig,
    mut on_point: impl FnMut(&SnrPointResult),
) -> Result<Vec<SnrPointResult>> {
    cfg.validate()?;
    let mut results = Vec::new();
    let mut rows = Vec::new();
    for snr_db in cfg.snr.values() {
        let point = run_point(cfg, snr_db)?;
        rows.push(ResultRow::new(cfg, &point));
        if let Some(path) = &cfg.out {
            flush_rows(path, cfg.format, &rows)?;
        }
        on_point(&point);
        results.push(point);
    }
    Ok(results)
}

fn flush_rows(path: &std::path::Path, format: OutputFormat, rows: &[ResultRow]) -> Result<()> {
    let mut file = File::create(path)?;
    match format {
        OutputFormat::Csv => report::write_csv(&mut file, rows)?,
        OutputFormat::Json => report::write_json(&mut file, rows)?,
    }
    file.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_cfg(overrides: PartialConfig) -> SimConfig {
        let base = PartialConfig {
            code: Some("crc16-8".into()),
            modulation: Some("qpsk".into()),
            detector: Some("ml".into()),
            method: Some("baseline".into()),
            sigma_e2: Some(0.0),
            k_factor: Some(10.0),
            snr: Some("20".into()),
            trials: Some(100),
            seed: Some(3),
            max_queries: Some(2000),
            ..Default::default()
        };
        overrides.merged_over(base).build().unwrap()
    }

    #[test]
    fn noiseless_perfect_estimate_baseline_has_no_errors() {
        let cfg = quick_cfg(PartialConfig {
            snr: Some("300".into()),
            ..Default::default()
        });
        let point = run_point(&cfg, 300.0).unwrap();
        assert_eq!(point.block_errors, 0);
        assert_eq!(point.bler, 0.0);
        assert_eq!(point.abandon_count, 0);
        assert!((point.mean_queries - 1.0).abs() < 1e-12);
    }

    #[test]
    fn same_seed_reproduces_results_exactly() {
        let cfg = quick_cfg(PartialConfig {
            sigma_e2: Some(0.05),
            method: Some("method1".into()),
            candidates: Some("axis5".into()),
            snr: Some("8".into()),
            ..Default::default()
        });
        let a = run_point(&cfg, 8.0).unwrap();
        let b = run_point(&cfg, 8.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_shape_and_flush() {
        let dir = std::env::temp_dir().join("grandfade-sim-test");
        std::fs::create_dir_all(&dir).unwrap();
        let out = dir.join("sweep.csv");
        let cfg = quick_cfg(PartialConfig {
            snr: Some("15:1:20".into()),
            trials: Some(40),
            out: Some(out.clone()),
            ..Default::default()
        });
        let results = run_sweep(&cfg).unwrap();
        assert_eq!(results.len(), 6);
        assert!(results.windows(2).all(|w| w[0].snr_db < w[1].snr_db));
        let parsed = report::read_csv(File::open(&out).unwrap()).unwrap();
        assert_eq!(parsed.len(), 6);
        for (row, point) in parsed.iter().zip(&results) {
            assert_eq!(row.snr_db, point.snr_db);
            assert_eq!(row.block_errors, point.block_errors);
            assert_eq!(row.method, "baseline");
        }
        std::fs::remove_file(&out).ok();
    }

    #[test]
    fn bler_is_statistically_nonincreasing_in_snr() {
        let cfg = quick_cfg(PartialConfig {
            snr: Some("2:2:10".into()),
            trials: Some(400),
            sigma_e2: Some(0.0),
            ..Default::default()
        });
        let results = run_sweep(&cfg).unwrap();
        for pair in results.windows(2) {
            // Overlap of confidence bands allows Monte Carlo jitter but
            // rejects genuine increases.
            assert!(
                pair[1].ci_lo <= pair[0].ci_hi,
                "BLER increased from {} to {}",
                pair[0].bler,
                pair[1].bler
            );
        }
    }

    #[test]
    fn multi_method_run_matches_individual_runs() {
        let base = PartialConfig {
            sigma_e2: Some(0.05),
            method: Some("method1".into()),
            candidates: Some("axis5".into()),
            snr: Some("9".into()),
            trials: Some(60),
            ..Default::default()
        };
        let cfg_m1 = quick_cfg(base.clone());
        let combined = run_point_methods(
            &cfg_m1,
            9.0,
            &[
                MethodKind::Baseline,
                MethodKind::Method1,
                MethodKind::Method1Weighted,
                MethodKind::Genie,
            ],
        )
        .unwrap();

        let solo_m1 = run_point(&cfg_m1, 9.0).unwrap();
        assert_eq!(combined[1], solo_m1);

        let cfg_weighted = quick_cfg(PartialConfig {
            method: Some("method1-weighted".into()),
            ..base.clone()
        });
        assert_eq!(combined[2], run_point(&cfg_weighted, 9.0).unwrap());

        let cfg_genie = quick_cfg(PartialConfig {
            method: Some("genie".into()),
            ..base.clone()
        });
        assert_eq!(combined[3], run_point(&cfg_genie, 9.0).unwrap());

        // The baseline in the combined run shares channel draws with the
        // others, so it matches a standalone baseline run too.
        let cfg_base = quick_cfg(PartialConfig {
            method: Some("baseline".into()),
            ..base
        });
        assert_eq!(combined[0], run_point(&cfg_base, 9.0).unwrap());

        // Genie never exceeds the posterior selection's error count.
        assert!(combined[3].block_errors <= combined[1].block_errors);
    }

    #[test]
    fn method2_point_runs() {
        let cfg = quick_cfg(PartialConfig {
            method: Some("method2".into()),
            candidates: Some("grid9".into()),
            sigma_e2: Some(0.1),
            trials: Some(30),
            snr: Some("10".into()),
            ..Default::default()
        });
        let point = run_point(&cfg, 10.0).unwrap();
        assert_eq!(point.trials, 30);
        assert!(point.bler <= 1.0);
    }

    #[test]
    fn substreams_differ_across_trials_and_points() {
        let a = trial_rng(1, 10.0, 0);
        let b = trial_rng(1, 10.0, 1);
        let c = trial_rng(1, 11.0, 0);
        let d = trial_rng(2, 10.0, 0);
        let draw = |mut rng: ChaCha8Rng| {
            use rand::Rng;
            (0..4).map(|_| rng.random::<u64>()).collect::<Vec<_>>()
        };
        let (a, b, c, d) = (draw(a), draw(b), draw(c), draw(d));
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
        assert_ne!(b, c);
    }
}

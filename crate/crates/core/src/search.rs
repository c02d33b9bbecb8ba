//! Fast customized-precision search: design-space enumeration, last-layer
//! coefficient-of-determination scoring, a linear accuracy model, and
//! threshold selection with bit-level refinement, plus an exhaustive-search
//! oracle.
//!
//! Instead of measuring true accuracy for every candidate format, the fast
//! search compares the last-layer activations of each format against the
//! baseline over a handful of sample inputs. The squared Pearson correlation
//! of the two activation vectors (r^2) summarizes how much numerical error
//! survived to the output, and a linear model maps r^2 to predicted
//! normalized accuracy. The highest-speedup format whose prediction meets the
//! accuracy target is then refined: its true accuracy is measured, a
//! precision bit is added while it falls short, and one is removed while
//! budget remains and the target still holds.

use crate::costmodel::CostTables;
use crate::error::{Error, Result};
use crate::inference::{collect_pre_softmax, evaluate_accuracy, Dataset};
use crate::numeric::{FixedFormat, FloatFormat, NumericFormat};
use crate::stats;
use crate::tensor::Tensor;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// An inclusive bit-count range walked with a fixed step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeSpec {
    pub min: u32,
    pub max: u32,
    pub step: u32,
}

impl RangeSpec {
    pub fn new(min: u32, max: u32, step: u32) -> Self {
        Self { min, max, step }
    }

    fn values(&self) -> impl Iterator<Item = u32> + '_ {
        (self.min..=self.max).step_by(self.step.max(1) as usize)
    }
}

/// Float half of the design space: mantissa and exponent bit ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FloatSpace {
    pub mantissa: RangeSpec,
    pub exponent: RangeSpec,
}

/// Fixed half of the design space: integer and fraction bit ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedSpace {
    pub integer: RangeSpec,
    pub fraction: RangeSpec,
}

/// The design space to enumerate. The default spans float mantissa 1-16 by
/// exponent 1-8 and fixed integer 1-16 by fraction 1-16 in steps of 2
/// (192 formats); it is a documented stand-in, not a reproduction of any
/// particular hardware study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignSpaceConfig {
    pub float: Option<FloatSpace>,
    pub fixed: Option<FixedSpace>,
    /// Overrides the default exponent bias of every generated float format.
    pub bias_override: Option<i32>,
}

impl Default for DesignSpaceConfig {
    fn default() -> Self {
        Self {
            float: Some(FloatSpace {
                mantissa: RangeSpec::new(1, 16, 1),
                exponent: RangeSpec::new(1, 8, 1),
            }),
            fixed: Some(FixedSpace {
                integer: RangeSpec::new(1, 16, 2),
                fraction: RangeSpec::new(1, 16, 2),
            }),
            bias_override: None,
        }
    }
}

/// Expands a config into its format list: floats first (exponent outer
/// ascending, mantissa inner ascending), then fixed (integer outer, fraction
/// inner). The ordering is the deterministic tie-breaker of both searches.
pub fn enumerate_design_space(cfg: &DesignSpaceConfig) -> Result<Vec<NumericFormat>> {
    let mut formats = Vec::new();
    if let Some(float) = &cfg.float {
        for e in float.exponent.values() {
            for m in float.mantissa.values() {
                let fmt = match cfg.bias_override {
                    Some(bias) => FloatFormat::with_bias(m, e, bias)?,
                    None => FloatFormat::new(m, e)?,
                };
                formats.push(NumericFormat::Float(fmt));
            }
        }
    }
    if let Some(fixed) = &cfg.fixed {
        for i in fixed.integer.values() {
            for f in fixed.fraction.values() {
                formats.push(NumericFormat::Fixed(FixedFormat::new(i, f)?));
            }
        }
    }
    if formats.is_empty() {
        return Err(Error::EmptySpace);
    }
    Ok(formats)
}

/// How the r^2 sample inputs are drawn from a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleSelection {
    /// The first `n` inputs; the deterministic default.
    FirstN(usize),
    /// `count` inputs drawn without replacement from a seeded generator.
    Random { count: usize, seed: u64 },
}

/// Indices of the sample inputs a selection draws from a dataset of the
/// given size, in evaluation order.
pub fn sample_indices(dataset_len: usize, selection: SampleSelection) -> Vec<usize> {
    match selection {
        SampleSelection::FirstN(n) => (0..n.min(dataset_len)).collect(),
        SampleSelection::Random { count, seed } => {
            let count = count.min(dataset_len);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut picked = rand::seq::index::sample(&mut rng, dataset_len, count).into_vec();
            picked.sort_unstable();
            picked
        }
    }
}

/// Draws the sample inputs used for last-layer scoring.
pub fn select_samples(dataset: &Dataset, selection: SampleSelection) -> Vec<Tensor> {
    sample_indices(dataset.len(), selection)
        .into_iter()
        .map(|i| dataset.inputs[i].clone())
        .collect()
}

/// Squared Pearson correlation between the concatenated final-layer
/// (pre-softmax) activations under `fmt` and under the baseline, over the
/// sample inputs. A constant activation vector on either side carries no
/// ranking information and scores 0.
pub fn last_layer_r2(net: &crate::inference::NetworkDef, samples: &[Tensor], fmt: NumericFormat) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Metric("no sample inputs for r2 scoring".into()));
    }
    let baseline = concat_scores(net, NumericFormat::Baseline, samples)?;
    let custom = concat_scores(net, fmt, samples)?;
    Ok(r2_against(&baseline, &custom))
}

fn concat_scores(
    net: &crate::inference::NetworkDef,
    fmt: NumericFormat,
    samples: &[Tensor],
) -> Result<Vec<f64>> {
    let tensors = collect_pre_softmax(net, fmt, samples)?;
    Ok(tensors.iter().flat_map(|t| t.data().iter().copied()).collect())
}

/// r^2 of a custom activation vector against a precomputed baseline vector.
fn r2_against(baseline: &[f64], custom: &[f64]) -> f64 {
    match stats::pearson(baseline, custom) {
        Some(r) => (r * r).clamp(0.0, 1.0),
        None => 0.0,
    }
}

/// Affine map from last-layer r^2 to predicted normalized accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyModel {
    pub slope: f64,
    pub intercept: f64,
    /// Pearson correlation of the (r^2, accuracy) pairs the fit was built on.
    pub fit_correlation: f64,
}

impl AccuracyModel {
    /// Predicted normalized accuracy, clamped to `[0, 1.05]` (the model is a
    /// heuristic and may extrapolate slightly past perfect accuracy).
    pub fn predict(&self, r2: f64) -> f64 {
        (self.slope * r2 + self.intercept).clamp(0.0, 1.05)
    }
}

/// Ordinary least-squares fit of normalized accuracy against r^2.
pub fn fit_accuracy_model(pairs: &[(f64, f64)]) -> Result<AccuracyModel> {
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (slope, intercept) = stats::ols_fit(&xs, &ys).ok_or_else(|| {
        Error::DegenerateFit(format!(
            "need at least two pairs with non-constant r2, got {}",
            pairs.len()
        ))
    })?;
    // A constant accuracy column fits exactly with slope 0; report
    // correlation 0 for it rather than failing.
    let fit_correlation = stats::pearson(&xs, &ys).unwrap_or(0.0);
    Ok(AccuracyModel {
        slope,
        intercept,
        fit_correlation,
    })
}

/// One candidate format with its accuracy and hardware-efficiency scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub format: NumericFormat,
    /// Last-layer r^2, when the fast-search model scored this format.
    pub r2: Option<f64>,
    /// Model-predicted normalized accuracy, when scored.
    pub predicted_norm_accuracy: Option<f64>,
    /// True normalized accuracy; present exactly when `evaluated`.
    pub measured_norm_accuracy: Option<f64>,
    pub speedup: f64,
    pub energy_savings: f64,
    /// Whether the accuracy was measured on the validation set.
    pub evaluated: bool,
}

/// A search result plus the work it consumed. Baseline reference passes are
/// not counted; `validation_passes` counts custom-format evaluations of the
/// validation set and `sample_passes` counts custom-format evaluations of
/// the sample inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub point: DesignPoint,
    pub sample_passes: usize,
    pub validation_passes: usize,
    /// True when no format satisfied the search and Baseline was returned.
    pub fallback: bool,
}

/// A format scored by the accuracy model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredFormat {
    pub format: NumericFormat,
    pub r2: f64,
    pub predicted_norm_accuracy: f64,
    pub speedup: f64,
    pub energy_savings: f64,
}

/// Scores every format in `space` with the r^2 proxy and the accuracy model.
/// Costs one sample pass per format (plus one uncounted baseline pass).
pub fn score_design_space(
    net: &crate::inference::NetworkDef,
    samples: &[Tensor],
    model: &AccuracyModel,
    space: &[NumericFormat],
    tables: &CostTables,
) -> Result<Vec<ScoredFormat>> {
    if samples.is_empty() {
        return Err(Error::Metric("no sample inputs for r2 scoring".into()));
    }
    let baseline = concat_scores(net, NumericFormat::Baseline, samples)?;
    space
        .par_iter()
        .map(|&format| {
            let custom = concat_scores(net, format, samples)?;
            let r2 = r2_against(&baseline, &custom);
            Ok(ScoredFormat {
                format,
                r2,
                predicted_norm_accuracy: model.predict(r2),
                speedup: tables.speedup(&format),
                energy_savings: tables.energy_savings(&format),
            })
        })
        .collect()
}

/// A format with its measured normalized accuracy and its model score; one
/// row of a measured sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredFormat {
    pub format: NumericFormat,
    pub r2: f64,
    pub accuracy: f64,
    pub normalized_accuracy: f64,
    pub speedup: f64,
    pub energy_savings: f64,
}

/// Measures true accuracy for every format in `space` and pairs it with the
/// r^2 score; the data behind accuracy-versus-speedup sweeps and behind
/// [`fit_accuracy_model`].
pub fn measure_design_space(
    net: &crate::inference::NetworkDef,
    samples: &[Tensor],
    validation: &Dataset,
    space: &[NumericFormat],
    tables: &CostTables,
    top_k: usize,
) -> Result<Vec<MeasuredFormat>> {
    if samples.is_empty() {
        return Err(Error::Metric("no sample inputs for r2 scoring".into()));
    }
    let baseline_scores = concat_scores(net, NumericFormat::Baseline, samples)?;
    let baseline_accuracy = evaluate_accuracy(net, NumericFormat::Baseline, validation, top_k)?;
    space
        .iter()
        .map(|&format| {
            let custom = concat_scores(net, format, samples)?;
            let r2 = r2_against(&baseline_scores, &custom);
            let accuracy = evaluate_accuracy(net, format, validation, top_k)?;
            Ok(MeasuredFormat {
                format,
                r2,
                accuracy,
                normalized_accuracy: accuracy / baseline_accuracy,
                speedup: tables.speedup(&format),
                energy_savings: tables.energy_savings(&format),
            })
        })
        .collect()
}

/// Strict "is a better pick" ordering: higher speedup, then fewer total
/// bits; surviving ties keep the earlier format in enumeration order.
fn better_pick(speedup: f64, bits: u32, best_speedup: f64, best_bits: u32) -> bool {
    speedup > best_speedup || (speedup == best_speedup && bits < best_bits)
}

fn baseline_point(tables: &CostTables, measured: Option<f64>) -> DesignPoint {
    DesignPoint {
        format: NumericFormat::Baseline,
        r2: None,
        predicted_norm_accuracy: None,
        measured_norm_accuracy: measured,
        speedup: tables.speedup(&NumericFormat::Baseline),
        energy_savings: tables.energy_savings(&NumericFormat::Baseline),
        evaluated: measured.is_some(),
    }
}

/// Precision-bit bounds (mantissa for float, fraction for fixed) present in
/// a space, used to limit refinement steps.
fn precision_bounds(space: &[NumericFormat], reference: &NumericFormat) -> (u32, u32) {
    let precisions = space.iter().filter_map(|f| match (f, reference) {
        (NumericFormat::Float(a), NumericFormat::Float(_)) => Some(a.mantissa_bits()),
        (NumericFormat::Fixed(a), NumericFormat::Fixed(_)) => Some(a.fraction_bits()),
        _ => None,
    });
    precisions
        .fold(None, |acc: Option<(u32, u32)>, p| match acc {
            None => Some((p, p)),
            Some((lo, hi)) => Some((lo.min(p), hi.max(p))),
        })
        .unwrap_or((0, 0))
}

/// The same-kind format with `delta` more precision bits (mantissa for
/// float, fraction for fixed), or `None` when that leaves the space bounds
/// or the format stops being valid. Exponent and integer bits stay fixed.
fn step_precision(fmt: &NumericFormat, delta: i64, bounds: (u32, u32)) -> Option<NumericFormat> {
    match fmt {
        NumericFormat::Float(f) => {
            let m = f.mantissa_bits() as i64 + delta;
            if m < bounds.0 as i64 || m > bounds.1 as i64 {
                return None;
            }
            FloatFormat::with_bias(m as u32, f.exponent_bits(), f.bias())
                .ok()
                .map(NumericFormat::Float)
        }
        NumericFormat::Fixed(f) => {
            let fr = f.fraction_bits() as i64 + delta;
            if fr < bounds.0 as i64 || fr > bounds.1 as i64 {
                return None;
            }
            FixedFormat::new(f.integer_bits(), fr as u32)
                .ok()
                .map(NumericFormat::Fixed)
        }
        NumericFormat::Baseline => None,
    }
}

/// The fast search over an explicit format list.
///
/// Every format is scored with [`score_design_space`]; the candidate is the
/// highest-speedup format whose prediction meets `target` (ties: fewer total
/// bits, then enumeration order). With `refine_budget` of 0 the candidate is
/// returned unmeasured. Otherwise each refinement step measures the current
/// format on the validation set: while it misses the target a precision bit
/// is added, and once it passes a precision bit is removed while budget
/// remains, reverting to the last passing format on failure. Exhausting the
/// space while widening falls back to Baseline, flagged.
#[allow(clippy::too_many_arguments)]
pub fn fast_search_space(
    net: &crate::inference::NetworkDef,
    samples: &[Tensor],
    validation: &Dataset,
    model: &AccuracyModel,
    space: &[NumericFormat],
    tables: &CostTables,
    target: f64,
    refine_budget: usize,
    top_k: usize,
) -> Result<SearchOutcome> {
    if space.is_empty() {
        return Err(Error::EmptySpace);
    }
    let scored = score_design_space(net, samples, model, space, tables)?;
    let mut sample_passes = scored.len();

    let mut candidate: Option<&ScoredFormat> = None;
    for s in &scored {
        if s.predicted_norm_accuracy < target {
            continue;
        }
        match candidate {
            Some(best)
                if !better_pick(
                    s.speedup,
                    s.format.total_bits(),
                    best.speedup,
                    best.format.total_bits(),
                ) => {}
            _ => candidate = Some(s),
        }
    }
    let Some(candidate) = candidate else {
        // The model predicts no format can meet the target.
        return Ok(SearchOutcome {
            point: baseline_point(tables, None),
            sample_passes,
            validation_passes: 0,
            fallback: true,
        });
    };

    let scores: HashMap<NumericFormat, (f64, f64)> = scored
        .iter()
        .map(|s| (s.format, (s.r2, s.predicted_norm_accuracy)))
        .collect();
    let point_for = |fmt: &NumericFormat,
                     score: Option<(f64, f64)>,
                     measured: Option<f64>| DesignPoint {
        format: *fmt,
        r2: score.map(|s| s.0),
        predicted_norm_accuracy: score.map(|s| s.1),
        measured_norm_accuracy: measured,
        speedup: tables.speedup(fmt),
        energy_savings: tables.energy_savings(fmt),
        evaluated: measured.is_some(),
    };

    if refine_budget == 0 {
        return Ok(SearchOutcome {
            point: point_for(
                &candidate.format,
                Some((candidate.r2, candidate.predicted_norm_accuracy)),
                None,
            ),
            sample_passes,
            validation_passes: 0,
            fallback: false,
        });
    }

    let bounds = precision_bounds(space, &candidate.format);
    let baseline_scores = concat_scores(net, NumericFormat::Baseline, samples)?;
    let baseline_accuracy = evaluate_accuracy(net, NumericFormat::Baseline, validation, top_k)?;
    let mut budget = refine_budget;
    let mut validation_passes = 0;
    let mut current = candidate.format;
    let mut last_passing: Option<(NumericFormat, f64)> = None;

    // Looks up (or computes) the model score of a refinement step.
    let score_of = |fmt: &NumericFormat, passes: &mut usize| -> Result<(f64, f64)> {
        if let Some(&s) = scores.get(fmt) {
            return Ok(s);
        }
        *passes += 1;
        let custom = concat_scores(net, *fmt, samples)?;
        let r2 = r2_against(&baseline_scores, &custom);
        Ok((r2, model.predict(r2)))
    };

    while budget > 0 {
        let accuracy = evaluate_accuracy(net, current, validation, top_k)?;
        validation_passes += 1;
        budget -= 1;
        let normalized = accuracy / baseline_accuracy;
        if normalized >= target {
            last_passing = Some((current, normalized));
            if budget == 0 {
                break;
            }
            match step_precision(&current, -1, bounds) {
                Some(narrower) => current = narrower,
                None => break,
            }
        } else {
            if last_passing.is_some() {
                // The narrowing attempt failed; revert.
                break;
            }
            match step_precision(&current, 1, bounds) {
                Some(wider) => current = wider,
                None => {
                    // Space exhausted while widening.
                    return Ok(SearchOutcome {
                        point: baseline_point(tables, None),
                        sample_passes,
                        validation_passes,
                        fallback: true,
                    });
                }
            }
        }
    }

    match last_passing {
        Some((fmt, measured)) => {
            let score = score_of(&fmt, &mut sample_passes)?;
            Ok(SearchOutcome {
                point: point_for(&fmt, Some(score), Some(measured)),
                sample_passes,
                validation_passes,
                fallback: false,
            })
        }
        None => {
            // Budget ran out while still widening: report the next widened
            // candidate, unmeasured.
            let score = score_of(&current, &mut sample_passes)?;
            Ok(SearchOutcome {
                point: point_for(&current, Some(score), None),
                sample_passes,
                validation_passes,
                fallback: false,
            })
        }
    }
}

/// [`fast_search_space`] over the formats enumerated from `cfg`.
#[allow(clippy::too_many_arguments)]
pub fn fast_search(
    net: &crate::inference::NetworkDef,
    samples: &[Tensor],
    validation: &Dataset,
    model: &AccuracyModel,
    cfg: &DesignSpaceConfig,
    tables: &CostTables,
    target: f64,
    refine_budget: usize,
    top_k: usize,
) -> Result<SearchOutcome> {
    let space = enumerate_design_space(cfg)?;
    fast_search_space(
        net,
        samples,
        validation,
        model,
        &space,
        tables,
        target,
        refine_budget,
        top_k,
    )
}

/// Ground-truth selection: measures true normalized accuracy for every
/// format and returns the highest-speedup passing one (ties: fewer total
/// bits, then enumeration order). Falls back to Baseline, flagged, when
/// nothing passes.
pub fn exhaustive_search_space(
    net: &crate::inference::NetworkDef,
    validation: &Dataset,
    space: &[NumericFormat],
    tables: &CostTables,
    target: f64,
    top_k: usize,
) -> Result<SearchOutcome> {
    if space.is_empty() {
        return Err(Error::EmptySpace);
    }
    let baseline_accuracy = evaluate_accuracy(net, NumericFormat::Baseline, validation, top_k)?;
    let mut best: Option<(NumericFormat, f64, f64)> = None;
    for format in space {
        let measured = if matches!(format, NumericFormat::Baseline) {
            baseline_accuracy
        } else {
            evaluate_accuracy(net, *format, validation, top_k)?
        };
        let normalized = measured / baseline_accuracy;
        if normalized < target {
            continue;
        }
        let speedup = tables.speedup(format);
        let replace = match &best {
            Some((bf, bs, _)) => better_pick(speedup, format.total_bits(), *bs, bf.total_bits()),
            None => true,
        };
        if replace {
            best = Some((*format, speedup, normalized));
        }
    }
    let validation_passes = space.len();
    match best {
        Some((format, speedup, normalized)) => Ok(SearchOutcome {
            point: DesignPoint {
                format,
                r2: None,
                predicted_norm_accuracy: None,
                measured_norm_accuracy: Some(normalized),
                speedup,
                energy_savings: tables.energy_savings(&format),
                evaluated: true,
            },
            sample_passes: 0,
            validation_passes,
            fallback: false,
        }),
        None => Ok(SearchOutcome {
            point: baseline_point(tables, Some(1.0)),
            sample_passes: 0,
            validation_passes,
            fallback: true,
        }),
    }
}

/// [`exhaustive_search_space`] over the formats enumerated from `cfg`.
pub fn exhaustive_search(
    net: &crate::inference::NetworkDef,
    validation: &Dataset,
    cfg: &DesignSpaceConfig,
    tables: &CostTables,
    target: f64,
    top_k: usize,
) -> Result<SearchOutcome> {
    let space = enumerate_design_space(cfg)?;
    exhaustive_search_space(net, validation, space.as_slice(), tables, target, top_k)
}

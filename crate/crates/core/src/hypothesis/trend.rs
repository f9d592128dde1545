//! Deciding whether a finite ratio sequence tends to zero.
//!
//! Indices are grouped into dyadic blocks `[2^j, 2^{j+1})`. A block is used
//! only if at least half of its indices were computed. The decision looks at
//! the last `max(4, J/2)` usable blocks:
//!
//! * without a reference rate, the sequence tends to zero when every block's
//!   maximum is at most half the previous one, and is bounded away from zero
//!   when block minima never decrease;
//! * with a reference rate, the block maxima must decrease, the fitted
//!   log-log slope must be negative and within [`SLOPE_AGREEMENT`] of the
//!   rate's slope over the same blocks, and the rate itself must decay;
//!   bounded away needs nondecreasing minima and a rate that does not decay.

use serde::{Deserialize, Serialize};

pub const MIN_BLOCKS: usize = 4;
pub const SLOPE_AGREEMENT: f64 = 0.35;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    TendsToZero,
    BoundedAway,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockStat {
    pub j: u32,
    pub count: usize,
    /// Index attaining the largest upper value in the block.
    pub argmax: usize,
    pub max: f64,
    pub min: f64,
    pub mean_log_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendFit {
    pub trend: Trend,
    /// Smallest guaranteed (lower) value over all computed indices.
    pub inf_estimate: f64,
    pub blocks: Vec<BlockStat>,
    pub fitted_slope: Option<f64>,
    pub model_slope: Option<f64>,
    pub reason: String,
}

/// One sample of a sequence whose value is known to lie in `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub n: usize,
    pub lo: f64,
    pub hi: f64,
}

fn block_of(n: usize) -> u32 {
    usize::BITS - 1 - n.leading_zeros()
}

pub fn dyadic_blocks(samples: &[Sample]) -> Vec<BlockStat> {
    use std::collections::BTreeMap;
    let mut map: BTreeMap<u32, Vec<&Sample>> = BTreeMap::new();
    for s in samples.iter().filter(|s| s.n >= 1) {
        map.entry(block_of(s.n)).or_default().push(s);
    }
    map.into_iter()
        .filter(|(j, v)| 2 * v.len() >= (1usize << j).max(1))
        .map(|(j, v)| {
            let top = v
                .iter()
                .max_by(|a, b| a.hi.total_cmp(&b.hi))
                .expect("nonempty block");
            BlockStat {
                j,
                count: v.len(),
                argmax: top.n,
                max: top.hi,
                min: v.iter().map(|s| s.lo).fold(f64::INFINITY, f64::min),
                mean_log_n: v.iter().map(|s| (s.n as f64).ln()).sum::<f64>() / v.len() as f64,
            }
        })
        .collect()
}

fn tail(blocks: &[BlockStat]) -> &[BlockStat] {
    let k = MIN_BLOCKS.max(blocks.len() / 2).min(blocks.len());
    &blocks[blocks.len() - k..]
}

fn slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    if points.len() < 2 || points.iter().any(|(_, y)| !y.is_finite()) {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Classifies a sequence; `log_rate` gives `ln` of the reference rate at `n`.
pub fn detect_trend(samples: &[Sample], log_rate: Option<&dyn Fn(f64) -> f64>) -> TrendFit {
    let inf_estimate = samples.iter().map(|s| s.lo).fold(f64::INFINITY, f64::min);
    let blocks = dyadic_blocks(samples);
    let mut fit = TrendFit {
        trend: Trend::Undetermined,
        inf_estimate,
        blocks: blocks.clone(),
        fitted_slope: None,
        model_slope: None,
        reason: String::new(),
    };
    if blocks.len() < MIN_BLOCKS {
        fit.reason = format!(
            "only {} usable dyadic blocks (need {MIN_BLOCKS})",
            blocks.len()
        );
        return fit;
    }
    let tb = tail(&blocks);
    let maxima_decrease = tb.windows(2).all(|w| w[1].max < w[0].max);
    let maxima_halve = tb.windows(2).all(|w| w[1].max <= 0.5 * w[0].max);
    let minima_nondecreasing = tb.windows(2).all(|w| w[1].min >= w[0].min);
    let data_pts: Vec<(f64, f64)> = tb.iter().map(|b| (b.mean_log_n, b.max.ln())).collect();
    fit.fitted_slope = slope(&data_pts);
    let span = format!("blocks j={}..{}", tb[0].j, tb[tb.len() - 1].j);

    let Some(rate) = log_rate else {
        fit.trend = if maxima_halve {
            fit.reason = format!("block maxima halve across {span}");
            Trend::TendsToZero
        } else if minima_nondecreasing {
            fit.reason = format!("block minima nondecreasing across {span}");
            Trend::BoundedAway
        } else {
            fit.reason = format!("no monotone envelope across {span}");
            Trend::Undetermined
        };
        return fit;
    };

    // Evaluate the rate on exactly the indices present in each block.
    let mut model_max = Vec::with_capacity(tb.len());
    let mut model_min = Vec::with_capacity(tb.len());
    for b in tb {
        let vals: Vec<f64> = samples
            .iter()
            .filter(|s| s.n >= 1 && block_of(s.n) == b.j)
            .map(|s| rate(s.n as f64))
            .collect();
        model_max.push(vals.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        model_min.push(vals.iter().copied().fold(f64::INFINITY, f64::min));
    }
    let model_pts: Vec<(f64, f64)> = tb
        .iter()
        .zip(&model_max)
        .map(|(b, y)| (b.mean_log_n, *y))
        .collect();
    fit.model_slope = slope(&model_pts);
    let model_decays =
        model_max.windows(2).all(|w| w[1] < w[0]) && fit.model_slope.is_some_and(|s| s < 0.0);
    let model_nondecaying = model_min.windows(2).all(|w| w[1] >= w[0]);
    let agree = match (fit.fitted_slope, fit.model_slope) {
        (Some(a), Some(b)) => (a - b).abs() <= SLOPE_AGREEMENT,
        _ => false,
    };

    if maxima_decrease && fit.fitted_slope.is_some_and(|s| s < 0.0) && model_decays && agree {
        fit.trend = Trend::TendsToZero;
        fit.reason =
            format!("decreasing envelope matches the decaying reference rate across {span}");
    } else if minima_nondecreasing && model_nondecaying {
        fit.trend = Trend::BoundedAway;
        fit.reason =
            format!("block minima nondecreasing and reference rate does not decay across {span}");
    } else {
        let mut why = Vec::new();
        if !maxima_decrease {
            why.push("block maxima not decreasing");
        }
        if !model_decays {
            why.push("reference rate does not decay");
        }
        if !agree {
            why.push("fitted slope disagrees with the reference rate");
        }
        if !minima_nondecreasing {
            why.push("block minima decrease");
        }
        fit.reason = format!("{} across {span}", why.join("; "));
    }
    fit
}

//! Rolling-origin cross-validation split plans.
//!
//! Both splitters carve the tail of the period axis into `k` contiguous
//! validation blocks, as equal in size as possible with earlier blocks
//! absorbing the remainder. Expanding folds train on everything before
//! their block; sliding folds train on a fixed-length window immediately
//! before it.

use serde::{Deserialize, Serialize};

use crate::period::{Period, PeriodRange};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: PeriodRange,
    pub val: PeriodRange,
}

/// Ordered folds; every fold trains strictly before it validates and the
/// validation blocks are disjoint and ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub folds: Vec<Fold>,
}

fn validation_blocks(
    periods: PeriodRange,
    k: usize,
    reserved: usize,
) -> Result<Vec<PeriodRange>, EvalError> {
    let total = periods.len();
    if k == 0 || total < reserved + k {
        return Err(EvalError::TooFewPeriods {
            have: total,
            need: reserved + k.max(1),
        });
    }
    let val_total = total - reserved;
    let base = val_total / k;
    let remainder = val_total % k;
    let mut start = periods.start.add_months(reserved as i64);
    let mut blocks = Vec::with_capacity(k);
    for i in 0..k {
        let size = base + if i < remainder { 1 } else { 0 };
        let end = start.add_months(size as i64 - 1);
        blocks.push(PeriodRange::new(start, end).expect("sizes >= 1"));
        start = end.succ();
    }
    Ok(blocks)
}

/// Expanding-window folds: fold `i` trains on every period strictly before
/// its validation block, starting from `min_train` reserved periods.
pub fn expanding_splits(
    periods: PeriodRange,
    k: usize,
    min_train: usize,
) -> Result<SplitPlan, EvalError> {
    if min_train == 0 {
        return Err(EvalError::TooFewPeriods { have: 0, need: 1 });
    }
    let blocks = validation_blocks(periods, k, min_train)?;
    let folds = blocks
        .into_iter()
        .map(|val| Fold {
            train: PeriodRange::new(periods.start, val.start.pred()).expect("reserved >= 1"),
            val,
        })
        .collect();
    Ok(SplitPlan { folds })
}

/// Sliding-window folds: same validation blocks as the expanding plan with
/// `min_train = train_len`, but each fold trains on exactly the
/// `train_len` periods immediately preceding its block.
pub fn sliding_splits(
    periods: PeriodRange,
    k: usize,
    train_len: usize,
) -> Result<SplitPlan, EvalError> {
    if train_len == 0 {
        return Err(EvalError::TooFewPeriods { have: 0, need: 1 });
    }
    let blocks = validation_blocks(periods, k, train_len)?;
    let folds = blocks
        .into_iter()
        .map(|val| {
            let train_end = val.start.pred();
            let train_start = train_end.add_months(-(train_len as i64 - 1));
            Fold {
                train: PeriodRange::new(train_start, train_end).expect("train_len >= 1"),
                val,
            }
        })
        .collect();
    Ok(SplitPlan { folds })
}

impl SplitPlan {
    /// Periods covered by any validation block.
    pub fn validation_periods(&self) -> Vec<Period> {
        self.folds.iter().flat_map(|f| f.val.iter()).collect()
    }
}

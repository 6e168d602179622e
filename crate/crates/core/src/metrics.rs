//! Agreement and diagnostic metrics over confusion matrices, and word error rate.
//!
//! Every metric whose denominator vanishes is reported as `None` (serialized
//! as `null`), never as zero.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::align::{align_tokens, OpKind};
use crate::classify::ConfusionMatrix;
use crate::corpus::WordToken;
use crate::error::{Error, Result};

/// Which class a precision/recall/F triple describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Class {
    /// Correctly read words, accepted by the system.
    CA,
    /// Miscues, rejected by the system.
    CR,
}

fn nonempty(cm: &ConfusionMatrix) -> Result<()> {
    if cm.total() == 0 {
        Err(Error::EmptyMatrix)
    } else {
        Ok(())
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den != 0).then(|| num as f64 / den as f64)
}

/// Cohen's kappa, or `None` when expected agreement is 1.
///
/// Computed as `2(ca·cr − fa·fr) / ((ca+fa)(fa+cr) + (ca+fr)(fr+cr))`, which is
/// algebraically `(pₒ − pₑ)/(1 − pₑ)` with the counts kept exact.
pub fn cohens_kappa(cm: &ConfusionMatrix) -> Result<Option<f64>> {
    nonempty(cm)?;
    let (ca, cr, fa, fr) = (cm.ca as i128, cm.cr as i128, cm.fa as i128, cm.fr as i128);
    let num = 2 * (ca * cr - fa * fr);
    let den = (ca + fa) * (fa + cr) + (ca + fr) * (fr + cr);
    Ok((den != 0).then(|| num as f64 / den as f64))
}

/// Matthews correlation coefficient, or `None` when any marginal is zero.
pub fn mcc(cm: &ConfusionMatrix) -> Result<Option<f64>> {
    nonempty(cm)?;
    let (ca, cr, fa, fr) = (cm.ca as u128, cm.cr as u128, cm.fa as u128, cm.fr as u128);
    let margins = [ca + fa, ca + fr, cr + fa, cr + fr];
    if margins.contains(&0) {
        return Ok(None);
    }
    let (pos, neg) = (ca * cr, fa * fr);
    let sign = if pos >= neg { 1.0 } else { -1.0 };
    let num = pos.abs_diff(neg);
    // exact squared ratio where it fits, so perfect agreement gives exactly 1
    let exact = num.checked_mul(num).and_then(|n2| {
        let d = margins[0]
            .checked_mul(margins[1])?
            .checked_mul(margins[2])?
            .checked_mul(margins[3])?;
        Some((n2, d))
    });
    let value = match exact {
        Some((n2, d)) => (n2 as f64 / d as f64).sqrt(),
        None => num as f64 / margins.iter().map(|&m| (m as f64).sqrt()).product::<f64>(),
    };
    Ok(Some(sign * value))
}

/// Precision, recall and F-measure of one class.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

pub fn precision_recall_f(cm: &ConfusionMatrix, class: Class) -> Result<ClassScores> {
    nonempty(cm)?;
    let (precision, recall) = match class {
        Class::CA => (ratio(cm.ca, cm.ca + cm.fa), ratio(cm.ca, cm.ca + cm.fr)),
        Class::CR => (ratio(cm.cr, cm.cr + cm.fr), ratio(cm.cr, cm.cr + cm.fa)),
    };
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    Ok(ClassScores {
        precision,
        recall,
        f1,
    })
}

/// Cell proportions of a confusion matrix (CAR, CRR, FAR, FRR).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub car: f64,
    pub crr: f64,
    pub far: f64,
    pub frr: f64,
}

impl Rates {
    pub fn of(cm: &ConfusionMatrix) -> Result<Self> {
        nonempty(cm)?;
        let n = cm.total() as f64;
        Ok(Rates {
            car: cm.ca as f64 / n,
            crr: cm.cr as f64 / n,
            far: cm.fa as f64 / n,
            frr: cm.fr as f64 / n,
        })
    }

    pub fn sum(&self) -> f64 {
        self.car + self.crr + self.far + self.frr
    }

    /// Kappa of a matrix with these proportions.
    pub fn kappa(&self) -> Option<f64> {
        let Rates { car, crr, far, frr } = *self;
        let den = (car + far) * (far + crr) + (car + frr) * (frr + crr);
        (den != 0.0).then(|| 2.0 * (car * crr - far * frr) / den)
    }

    /// MCC of a matrix with these proportions.
    pub fn mcc(&self) -> Option<f64> {
        let Rates { car, crr, far, frr } = *self;
        let den = (car + far) * (car + frr) * (crr + far) * (crr + frr);
        (den > 0.0).then(|| (car * crr - far * frr) / den.sqrt())
    }
}

/// Everything reported per system: one row of the agreement and diagnostic tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub words: u64,
    pub matrix: ConfusionMatrix,
    pub kappa: Option<f64>,
    pub mcc: Option<f64>,
    pub rates: Rates,
    pub ca: ClassScores,
    pub cr: ClassScores,
}

impl MetricsReport {
    pub fn from_matrix(cm: &ConfusionMatrix) -> Result<Self> {
        Ok(MetricsReport {
            words: cm.total(),
            matrix: *cm,
            kappa: cohens_kappa(cm)?,
            mcc: mcc(cm)?,
            rates: Rates::of(cm)?,
            ca: precision_recall_f(cm, Class::CA)?,
            cr: precision_recall_f(cm, Class::CR)?,
        })
    }

    /// CSV column names, in table order.
    pub const CSV_HEADER: [&'static str; 15] = [
        "system", "kappa", "mcc", "ca_pct", "cr_pct", "fa_pct", "fr_pct", "precision_ca", "precision_cr",
        "recall_ca", "recall_cr", "f_ca", "f_cr", "words", "note",
    ];

    /// One CSV row: kappa/MCC at three decimals, percentages at one decimal.
    pub fn csv_row(&self, system: &str, note: &str) -> Vec<String> {
        let r = &self.rates;
        vec![
            system.to_string(),
            fmt_coef(self.kappa),
            fmt_coef(self.mcc),
            fmt_pct(Some(r.car)),
            fmt_pct(Some(r.crr)),
            fmt_pct(Some(r.far)),
            fmt_pct(Some(r.frr)),
            fmt_pct(self.ca.precision),
            fmt_pct(self.cr.precision),
            fmt_pct(self.ca.recall),
            fmt_pct(self.cr.recall),
            fmt_pct(self.ca.f1),
            fmt_pct(self.cr.f1),
            self.words.to_string(),
            note.to_string(),
        ]
    }
}

/// Three decimals, or `null`.
pub fn fmt_coef(v: Option<f64>) -> String {
    v.map_or_else(|| "null".into(), |x| format!("{x:.3}"))
}

/// Proportion as a percentage with one decimal, or `null`.
pub fn fmt_pct(v: Option<f64>) -> String {
    v.map_or_else(|| "null".into(), |x| format!("{:.1}", x * 100.0))
}

/// Edit counts behind a word error rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WerCounts {
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub reference_words: usize,
}

impl WerCounts {
    pub fn rate(&self) -> f64 {
        (self.substitutions + self.deletions + self.insertions) as f64 / self.reference_words as f64
    }
}

pub fn wer_counts(reference: &[WordToken], hypothesis: &[WordToken]) -> Result<WerCounts> {
    if reference.is_empty() {
        return Err(Error::InvalidArgument("word error rate needs a non-empty reference".into()));
    }
    let a = align_tokens(hypothesis, reference);
    Ok(WerCounts {
        substitutions: a.count(OpKind::Substitution),
        deletions: a.count(OpKind::Deletion),
        insertions: a.count(OpKind::Insertion),
        reference_words: reference.len(),
    })
}

/// Word error rate; may exceed 1 when the hypothesis is long.
pub fn wer(reference: &[WordToken], hypothesis: &[WordToken]) -> Result<f64> {
    wer_counts(reference, hypothesis).map(|c| c.rate())
}

/// Normal-approximation confidence interval for a rate measured over `n_words`.
///
/// The lower bound is clamped at zero. The binomial variance term is clamped
/// at zero for rates above 1.
pub fn wer_interval(rate: f64, n_words: u64, level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!("confidence level {level} is not in (0, 1)")));
    }
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::InvalidArgument(format!("rate {rate} must be a finite non-negative number")));
    }
    if n_words == 0 {
        return Err(Error::InvalidArgument("interval needs at least one word".into()));
    }
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf((1.0 + level) / 2.0);
    let half = z * ((rate * (1.0 - rate)).max(0.0) / n_words as f64).sqrt();
    Ok(((rate - half).max(0.0), rate + half))
}

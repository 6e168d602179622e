//! Reference and system labels per recording, and their confusion matrix.

use std::io::Write;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::align::{score_against, BinaryScoreVector};
use crate::corpus::{Prompt, Recording};
use crate::error::{Error, Result};

/// Counts of human-vs-system decisions.
///
/// The reference label is the human judgment (1 = read correctly), the
/// system label the ASR judgment (1 = accept).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    /// Reference 1, system 1.
    pub ca: u64,
    /// Reference 0, system 0.
    pub cr: u64,
    /// Reference 0, system 1.
    pub fa: u64,
    /// Reference 1, system 0.
    pub fr: u64,
}

impl ConfusionMatrix {
    pub const ZERO: ConfusionMatrix = ConfusionMatrix {
        ca: 0,
        cr: 0,
        fa: 0,
        fr: 0,
    };

    pub fn new(ca: u64, cr: u64, fa: u64, fr: u64) -> Self {
        ConfusionMatrix { ca, cr, fa, fr }
    }

    pub fn total(&self) -> u64 {
        self.ca + self.cr + self.fa + self.fr
    }

    /// Words the system accepted.
    pub fn accepted(&self) -> u64 {
        self.ca + self.fa
    }

    /// Words the human judged correct.
    pub fn reference_correct(&self) -> u64 {
        self.ca + self.fr
    }

    pub fn record(&mut self, reference: bool, predicted: bool) {
        match (reference, predicted) {
            (true, true) => self.ca += 1,
            (false, false) => self.cr += 1,
            (false, true) => self.fa += 1,
            (true, false) => self.fr += 1,
        }
    }

    /// Exchanges the roles of the two classes.
    pub fn swap_classes(&self) -> Self {
        ConfusionMatrix {
            ca: self.cr,
            cr: self.ca,
            fa: self.fr,
            fr: self.fa,
        }
    }

    pub fn scaled(&self, k: u64) -> Self {
        ConfusionMatrix {
            ca: self.ca * k,
            cr: self.cr * k,
            fa: self.fa * k,
            fr: self.fr * k,
        }
    }
}

impl Add for ConfusionMatrix {
    type Output = ConfusionMatrix;

    fn add(self, rhs: Self) -> Self {
        merge(&self, &rhs)
    }
}

impl AddAssign for ConfusionMatrix {
    fn add_assign(&mut self, rhs: Self) {
        *self = merge(self, &rhs);
    }
}

impl std::iter::Sum for ConfusionMatrix {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ConfusionMatrix::ZERO, |a, b| a + b)
    }
}

/// Human labels: the transcript aligned against the prompt.
///
/// Callers are expected to pass only recordings that take part in evaluation.
pub fn reference_labels(recording: &Recording, prompt: &Prompt) -> Result<BinaryScoreVector> {
    let transcript = recording
        .transcript
        .as_ref()
        .ok_or_else(|| Error::MissingTranscript(recording.id.clone()))?;
    score_against(transcript, prompt)
}

/// System labels from a named recognizer's word hypothesis.
pub fn hypothesis_labels(recording: &Recording, prompt: &Prompt, system: &str) -> Result<BinaryScoreVector> {
    let hyp = recording
        .hypotheses
        .get(system)
        .ok_or_else(|| Error::UnknownSystem {
            recording: recording.id.clone(),
            system: system.to_string(),
        })?;
    score_against(hyp, prompt)
}

/// Accept every word whose confidence is at least `threshold`.
pub fn threshold_labels(confidences: &[f64], threshold: f64) -> Result<BinaryScoreVector> {
    confidences
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            if (0.0..=100.0).contains(&value) {
                Ok(value >= threshold)
            } else {
                Err(Error::ConfidenceOutOfRange { index, value })
            }
        })
        .collect::<Result<Vec<_>>>()
        .map(BinaryScoreVector::new)
}

pub fn confusion(reference: &BinaryScoreVector, predicted: &BinaryScoreVector) -> Result<ConfusionMatrix> {
    if reference.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            what: "predicted labels",
            expected: reference.len(),
            found: predicted.len(),
        });
    }
    if reference.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let mut cm = ConfusionMatrix::ZERO;
    for (&r, &p) in reference.as_slice().iter().zip(predicted.as_slice()) {
        cm.record(r, p);
    }
    Ok(cm)
}

/// Cellwise sum.
pub fn merge(a: &ConfusionMatrix, b: &ConfusionMatrix) -> ConfusionMatrix {
    ConfusionMatrix {
        ca: a.ca + b.ca,
        cr: a.cr + b.cr,
        fa: a.fa + b.fa,
        fr: a.fr + b.fr,
    }
}

/// One (reference, predicted) pair, kept for audit export.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRow {
    pub recording_id: String,
    pub prompt_index: usize,
    #[serde(rename = "ref")]
    pub reference: u8,
    #[serde(rename = "pred")]
    pub predicted: u8,
}

/// Writes label rows as CSV with header `recording_id,prompt_index,ref,pred`.
pub fn write_label_csv<W: Write>(rows: &[LabelRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Serialize(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Serialize(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize, TaskType};
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn bits(b: &[u8]) -> BinaryScoreVector {
        BinaryScoreVector::from_bits(b)
    }

    fn recording(transcript: Option<&str>, hyps: &[(&str, &str)]) -> Recording {
        Recording {
            id: "r1".into(),
            prompt_id: "p".into(),
            speaker_id: "s".into(),
            status: crate::corpus::RecordingStatus::Ok,
            transcript: transcript.map(tokenize),
            hypotheses: hyps
                .iter()
                .map(|(k, v)| (k.to_string(), tokenize(v)))
                .collect::<BTreeMap<_, _>>(),
            confidences: None,
        }
    }

    fn prompt(text: &str) -> Prompt {
        Prompt::new("p", TaskType::Sentence, tokenize(text)).unwrap()
    }

    #[test]
    fn reference_label_examples() {
        let p = prompt("de kat zit stil");
        let r = recording(Some("de kat zit stil"), &[]);
        assert_eq!(reference_labels(&r, &p).unwrap().bits(), vec![1, 1, 1, 1]);
        let r = recording(Some(""), &[]);
        assert_eq!(reference_labels(&r, &p).unwrap().bits(), vec![0, 0, 0, 0]);
        let r = recording(Some("de kat zat stil"), &[]);
        assert_eq!(reference_labels(&r, &p).unwrap().bits(), vec![1, 1, 0, 1]);
        let r = recording(None, &[]);
        assert!(matches!(reference_labels(&r, &p), Err(Error::MissingTranscript(_))));
    }

    #[test]
    fn hypothesis_label_examples() {
        let p = prompt("de kat zit");
        let r = recording(
            Some("de kat zit"),
            &[("same", "de kat zit"), ("short", "de kat"), ("extra", "de dikke kat zit")],
        );
        assert_eq!(hypothesis_labels(&r, &p, "same").unwrap().bits(), vec![1, 1, 1]);
        assert_eq!(hypothesis_labels(&r, &p, "short").unwrap().bits(), vec![1, 1, 0]);
        assert_eq!(hypothesis_labels(&r, &p, "extra").unwrap().bits(), vec![1, 1, 1]);
        let err = hypothesis_labels(&r, &p, "nope").unwrap_err();
        assert!(err.to_string().contains("nope"));
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(threshold_labels(&[46.0, 45.0, 100.0], 46.0).unwrap().bits(), vec![1, 0, 1]);
        assert_eq!(threshold_labels(&[0.0, 13.0, 100.0], 0.0).unwrap().bits(), vec![1, 1, 1]);
        assert_eq!(threshold_labels(&[0.0, 13.0, 100.0], 101.0).unwrap().bits(), vec![0, 0, 0]);
        assert!(matches!(
            threshold_labels(&[50.0, 100.5], 10.0),
            Err(Error::ConfidenceOutOfRange { index: 1, .. })
        ));
        assert!(threshold_labels(&[-1.0], 10.0).is_err());
    }

    #[test]
    fn confusion_examples() {
        let cm = confusion(&bits(&[1, 1, 0, 1]), &bits(&[1, 0, 0, 1])).unwrap();
        assert_eq!(cm, ConfusionMatrix::new(2, 1, 0, 1));
        let cm = confusion(&bits(&[1; 5]), &bits(&[1; 5])).unwrap();
        assert_eq!(cm, ConfusionMatrix::new(5, 0, 0, 0));
        let cm = confusion(&bits(&[0, 0]), &bits(&[1, 1])).unwrap();
        assert_eq!(cm, ConfusionMatrix::new(0, 0, 2, 0));
        assert!(matches!(confusion(&bits(&[1]), &bits(&[1, 0])), Err(Error::LengthMismatch { .. })));
        assert!(matches!(confusion(&bits(&[]), &bits(&[])), Err(Error::EmptyMatrix)));
    }

    fn any_cm() -> impl Strategy<Value = ConfusionMatrix> {
        (0u64..1000, 0u64..1000, 0u64..1000, 0u64..1000).prop_map(|(a, b, c, d)| ConfusionMatrix::new(a, b, c, d))
    }

    proptest! {
        #[test]
        fn merge_is_a_commutative_monoid(a in any_cm(), b in any_cm(), c in any_cm()) {
            prop_assert_eq!(merge(&a, &ConfusionMatrix::ZERO), a);
            prop_assert_eq!(merge(&a, &b), merge(&b, &a));
            prop_assert_eq!(merge(&merge(&a, &b), &c), merge(&a, &merge(&b, &c)));
        }

        #[test]
        fn merge_equals_confusion_of_concatenation(
            parts in prop::collection::vec(prop::collection::vec((any::<bool>(), any::<bool>()), 1..20), 1..6)
        ) {
            let merged: ConfusionMatrix = parts
                .iter()
                .map(|p| {
                    let (r, q): (Vec<bool>, Vec<bool>) = p.iter().copied().unzip();
                    confusion(&r.into(), &q.into()).unwrap()
                })
                .sum();
            let (r, q): (Vec<bool>, Vec<bool>) = parts.concat().into_iter().unzip();
            prop_assert_eq!(merged, confusion(&r.into(), &q.into()).unwrap());
        }

        #[test]
        fn confusion_is_permutation_equivariant(
            pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..40),
            seed in any::<u64>()
        ) {
            let (r, q): (Vec<bool>, Vec<bool>) = pairs.iter().copied().unzip();
            let base = confusion(&r.into(), &q.into()).unwrap();
            let mut shuffled = pairs.clone();
            // deterministic rotation + reversal as the permutation
            let k = (seed as usize) % shuffled.len();
            shuffled.rotate_left(k);
            if seed % 2 == 0 { shuffled.reverse(); }
            let (r, q): (Vec<bool>, Vec<bool>) = shuffled.into_iter().unzip();
            prop_assert_eq!(base, confusion(&r.into(), &q.into()).unwrap());
            prop_assert_eq!(base.total() as usize, pairs.len());
        }

        #[test]
        fn threshold_is_antitone(scores in prop::collection::vec(0u8..=100, 1..30), t1 in 0u8..=101, t2 in 0u8..=101) {
            let (lo, hi) = (t1.min(t2) as f64, t1.max(t2) as f64);
            let scores: Vec<f64> = scores.into_iter().map(f64::from).collect();
            let at_lo = threshold_labels(&scores, lo).unwrap();
            let at_hi = threshold_labels(&scores, hi).unwrap();
            for (a, b) in at_lo.as_slice().iter().zip(at_hi.as_slice()) {
                prop_assert!(!*b || *a);
            }
        }
    }

    #[test]
    fn label_csv_has_header() {
        let rows = vec![LabelRow {
            recording_id: "r1".into(),
            prompt_index: 0,
            reference: 1,
            predicted: 0,
        }];
        let mut buf = Vec::new();
        write_label_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "recording_id,prompt_index,ref,pred\nr1,0,1,0\n");
    }
}

//! Word-level alignment of an observed token sequence against a prompt.
//!
//! Standard Levenshtein dynamic programming over words, with a fixed
//! backtrace preference (match, substitution, deletion, insertion) so the
//! same inputs always produce the same op path.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{Prompt, WordToken};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    Match,
    Substitution,
    /// A prompt word with no observed counterpart.
    Deletion,
    /// An observed word with no prompt counterpart.
    Insertion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlignmentOp {
    pub kind: OpKind,
    pub prompt_index: Option<usize>,
    pub observed_index: Option<usize>,
}

impl AlignmentOp {
    fn pair(kind: OpKind, p: usize, o: usize) -> Self {
        AlignmentOp {
            kind,
            prompt_index: Some(p),
            observed_index: Some(o),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentResult {
    pub ops: Vec<AlignmentOp>,
    pub cost: u32,
}

impl AlignmentResult {
    pub fn count(&self, kind: OpKind) -> usize {
        self.ops.iter().filter(|op| op.kind == kind).count()
    }

    /// Number of non-match operations.
    pub fn edits(&self) -> usize {
        self.ops.len() - self.count(OpKind::Match)
    }

    /// Renders the op path as three rows: prompt words, observed words and op codes.
    pub fn diagram(&self, prompt: &[WordToken], observed: &[WordToken]) -> String {
        let mut cols: Vec<(String, String, &str)> = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let p = op.prompt_index.map(|i| prompt[i].to_string()).unwrap_or_else(|| "*".into());
            let o = op
                .observed_index
                .map(|i| observed[i].to_string())
                .unwrap_or_else(|| "*".into());
            let code = match op.kind {
                OpKind::Match => "",
                OpKind::Substitution => "S",
                OpKind::Deletion => "D",
                OpKind::Insertion => "I",
            };
            cols.push((p, o, code));
        }
        let mut rows = [String::from("PROMPT: "), String::from("READ:   "), String::from("        ")];
        for (p, o, code) in &cols {
            let w = p.chars().count().max(o.chars().count()).max(1);
            let _ = write!(rows[0], "{p:<w$} ");
            let _ = write!(rows[1], "{o:<w$} ");
            let _ = write!(rows[2], "{code:<w$} ");
        }
        rows.iter()
            .map(|r| r.trim_end())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Per-operation costs. All default to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditCosts {
    pub substitution: u32,
    pub deletion: u32,
    pub insertion: u32,
}

impl Default for EditCosts {
    fn default() -> Self {
        EditCosts {
            substitution: 1,
            deletion: 1,
            insertion: 1,
        }
    }
}

/// Aligns `observed` against a prompt with unit costs.
pub fn align(observed: &[WordToken], prompt: &Prompt) -> Result<AlignmentResult> {
    if prompt.words.is_empty() {
        return Err(Error::EmptyPrompt(prompt.id.clone()));
    }
    Ok(align_tokens(observed, &prompt.words))
}

/// Aligns `observed` against a bare reference sequence with unit costs.
pub fn align_tokens(observed: &[WordToken], reference: &[WordToken]) -> AlignmentResult {
    align_tokens_with(observed, reference, EditCosts::default())
}

pub fn align_tokens_with(observed: &[WordToken], reference: &[WordToken], costs: EditCosts) -> AlignmentResult {
    let (n, m) = (reference.len(), observed.len());
    let width = m + 1;
    let mut d = vec![0u32; (n + 1) * width];
    for j in 1..=m {
        d[j] = d[j - 1] + costs.insertion;
    }
    for i in 1..=n {
        d[i * width] = d[(i - 1) * width] + costs.deletion;
        for j in 1..=m {
            let diag = d[(i - 1) * width + j - 1]
                + if reference[i - 1].matches(&observed[j - 1]) {
                    0
                } else {
                    costs.substitution
                };
            let del = d[(i - 1) * width + j] + costs.deletion;
            let ins = d[i * width + j - 1] + costs.insertion;
            d[i * width + j] = diag.min(del).min(ins);
        }
    }

    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * width + j];
        if i > 0 && j > 0 {
            let diag = d[(i - 1) * width + j - 1];
            if reference[i - 1].matches(&observed[j - 1]) {
                if diag == here {
                    ops.push(AlignmentOp::pair(OpKind::Match, i - 1, j - 1));
                    i -= 1;
                    j -= 1;
                    continue;
                }
            } else if diag + costs.substitution == here {
                ops.push(AlignmentOp::pair(OpKind::Substitution, i - 1, j - 1));
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && d[(i - 1) * width + j] + costs.deletion == here {
            ops.push(AlignmentOp {
                kind: OpKind::Deletion,
                prompt_index: Some(i - 1),
                observed_index: None,
            });
            i -= 1;
        } else {
            debug_assert!(j > 0 && d[i * width + j - 1] + costs.insertion == here);
            ops.push(AlignmentOp {
                kind: OpKind::Insertion,
                prompt_index: None,
                observed_index: Some(j - 1),
            });
            j -= 1;
        }
    }
    ops.reverse();
    AlignmentResult {
        ops,
        cost: d[n * width + m],
    }
}

/// Per-prompt-word correctness; `true` means read correctly.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BinaryScoreVector(Vec<bool>);

impl BinaryScoreVector {
    pub fn new(labels: Vec<bool>) -> Self {
        BinaryScoreVector(labels)
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        BinaryScoreVector(bits.iter().map(|&b| b != 0).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn bits(&self) -> Vec<u8> {
        self.0.iter().map(|&b| u8::from(b)).collect()
    }

    pub fn ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn into_inner(self) -> Vec<bool> {
        self.0
    }
}

impl From<Vec<bool>> for BinaryScoreVector {
    fn from(v: Vec<bool>) -> Self {
        BinaryScoreVector(v)
    }
}

/// Label 1 for every prompt position covered by a match op, 0 otherwise.
pub fn labels_from_alignment(alignment: &AlignmentResult, prompt: &Prompt) -> Result<BinaryScoreVector> {
    labels_for_length(alignment, prompt.words.len())
}

pub(crate) fn labels_for_length(alignment: &AlignmentResult, len: usize) -> Result<BinaryScoreVector> {
    let covered = alignment.ops.iter().filter(|op| op.prompt_index.is_some()).count();
    let out_of_range = alignment.ops.iter().filter_map(|op| op.prompt_index).any(|i| i >= len);
    if covered != len || out_of_range {
        return Err(Error::LengthMismatch {
            what: "alignment prompt positions",
            expected: len,
            found: covered,
        });
    }
    let mut labels = vec![false; len];
    for op in &alignment.ops {
        if let (OpKind::Match, Some(i)) = (op.kind, op.prompt_index) {
            labels[i] = true;
        }
    }
    Ok(BinaryScoreVector(labels))
}

/// Aligns and labels in one step.
pub fn score_against(observed: &[WordToken], prompt: &Prompt) -> Result<BinaryScoreVector> {
    let a = align(observed, prompt)?;
    labels_from_alignment(&a, prompt)
}

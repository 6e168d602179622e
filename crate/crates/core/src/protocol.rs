//! Exercise protocols of the reading tutor as small state machines.
//!
//! Accuracy items (isolated words, sentences) allow up to three attempts and
//! stop at the first accepted one; a sentence attempt is accepted only when
//! every word in it is accepted. Fluency items (word lists, stories) run in
//! three phases: the whole list, a single retry of each rejected word, and a
//! full reread of the list.
//!
//! The pupil is an abstract [`Reader`] and the recognizer an abstract
//! [`Judge`], so sessions can be simulated without audio.

use std::collections::{BTreeSet, VecDeque};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::align::{align_tokens, labels_for_length};
use crate::corpus::{normalize_token, ExerciseKind, Prompt, WordToken};
use crate::error::{Error, Result};
use crate::synth::ConfidenceModel;

pub const MAX_ATTEMPTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Accuracy,
    Round1,
    Retry,
    Round2,
}

/// Everything a judge may look at for one word.
#[derive(Debug, Clone, Copy)]
pub struct WordAttempt<'a> {
    pub phase: Phase,
    /// 1-based attempt number within the phase.
    pub attempt: usize,
    /// Position of the word in the original prompt.
    pub item: usize,
    pub target: &'a WordToken,
    /// Whether the pupil actually read the word correctly.
    pub read_correctly: bool,
    pub confidence: Option<f64>,
}

/// Accept/reject decision for one word.
pub trait Judge {
    fn judge(&mut self, word: &WordAttempt<'_>) -> bool;
}

impl<F> Judge for F
where
    F: FnMut(&WordAttempt<'_>) -> bool,
{
    fn judge(&mut self, word: &WordAttempt<'_>) -> bool {
        self(word)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AlwaysAccept;

impl Judge for AlwaysAccept {
    fn judge(&mut self, _: &WordAttempt<'_>) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AlwaysReject;

impl Judge for AlwaysReject {
    fn judge(&mut self, _: &WordAttempt<'_>) -> bool {
        false
    }
}

/// Accepts exactly the words the pupil read correctly.
#[derive(Debug, Clone, Copy, Default)]
pub struct PerfectJudge;

impl Judge for PerfectJudge {
    fn judge(&mut self, word: &WordAttempt<'_>) -> bool {
        word.read_correctly
    }
}

/// Accepts a word when its confidence reaches the threshold; words without a
/// score are rejected.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdJudge(pub f64);

impl Judge for ThresholdJudge {
    fn judge(&mut self, word: &WordAttempt<'_>) -> bool {
        word.confidence.is_some_and(|c| c >= self.0)
    }
}

/// A recognizer described by its conditional accept probabilities.
#[derive(Debug, Clone)]
pub struct RateJudge {
    pub p_accept_correct: f64,
    pub p_accept_miscue: f64,
    rng: ChaCha8Rng,
}

impl RateJudge {
    pub fn new(p_accept_correct: f64, p_accept_miscue: f64, seed: u64) -> Result<Self> {
        for p in [p_accept_correct, p_accept_miscue] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("accept probability {p} is not in [0, 1]")));
            }
        }
        Ok(RateJudge {
            p_accept_correct,
            p_accept_miscue,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }
}

impl Judge for RateJudge {
    fn judge(&mut self, word: &WordAttempt<'_>) -> bool {
        let p = if word.read_correctly {
            self.p_accept_correct
        } else {
            self.p_accept_miscue
        };
        self.rng.random_bool(p)
    }
}

/// What the pupil produced for one presentation of a target.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Attempt {
    pub tokens: Vec<WordToken>,
    /// One score per target word, when the recognizer provides them.
    pub confidences: Option<Vec<f64>>,
}

/// Produces reading attempts for a presented target.
pub trait Reader {
    fn read(&mut self, target: &[WordToken], phase: Phase, attempt: usize) -> Attempt;
}

/// Always reads the target exactly.
#[derive(Debug, Clone, Copy, Default)]
pub struct PerfectReader;

impl Reader for PerfectReader {
    fn read(&mut self, target: &[WordToken], _: Phase, _: usize) -> Attempt {
        Attempt {
            tokens: target.to_vec(),
            confidences: None,
        }
    }
}

/// Replays a fixed queue of attempts; an exhausted script reads nothing.
#[derive(Debug, Clone, Default)]
pub struct ScriptedReader {
    script: VecDeque<Attempt>,
}

impl ScriptedReader {
    pub fn new(attempts: impl IntoIterator<Item = Vec<WordToken>>) -> Self {
        ScriptedReader {
            script: attempts
                .into_iter()
                .map(|tokens| Attempt {
                    tokens,
                    confidences: None,
                })
                .collect(),
        }
    }
}

impl Reader for ScriptedReader {
    fn read(&mut self, _: &[WordToken], _: Phase, _: usize) -> Attempt {
        self.script.pop_front().unwrap_or_default()
    }
}

/// Misreads each word independently with a fixed probability. Misread words
/// come out as broken-off fragments, which never match the target.
#[derive(Debug, Clone)]
pub struct MiscueReader {
    pub miscue_prob: f64,
    pub confidence: Option<ConfidenceModel>,
    rng: ChaCha8Rng,
}

impl MiscueReader {
    pub fn new(miscue_prob: f64, confidence: Option<ConfidenceModel>, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&miscue_prob) {
            return Err(Error::InvalidArgument(format!("miscue probability {miscue_prob} is not in [0, 1]")));
        }
        Ok(MiscueReader {
            miscue_prob,
            confidence,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }
}

impl Reader for MiscueReader {
    fn read(&mut self, target: &[WordToken], _: Phase, _: usize) -> Attempt {
        let mut tokens = Vec::with_capacity(target.len());
        let mut scores = Vec::with_capacity(target.len());
        for word in target {
            let miscue = self.rng.random_bool(self.miscue_prob);
            tokens.push(if miscue {
                normalize_token(&format!("{}*", word.normalized)).expect("target words are non-empty")
            } else {
                word.clone()
            });
            if let Some(model) = &self.confidence {
                let dist = if miscue { &model.miscue } else { &model.correct };
                scores.push(dist.sample(&mut self.rng));
            }
        }
        Attempt {
            tokens,
            confidences: self.confidence.is_some().then_some(scores),
        }
    }
}

/// One judged word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordDecision {
    pub item: usize,
    pub read_correctly: bool,
    pub accepted: bool,
}

fn judge_attempt(
    target: &[WordToken],
    items: &[usize],
    attempt: &Attempt,
    phase: Phase,
    number: usize,
    judge: &mut dyn Judge,
) -> Vec<WordDecision> {
    let alignment = align_tokens(&attempt.tokens, target);
    let labels = labels_for_length(&alignment, target.len()).expect("alignment covers the target");
    target
        .iter()
        .zip(items)
        .zip(labels.as_slice())
        .enumerate()
        .map(|(k, ((word, &item), &read_correctly))| {
            let confidence = attempt.confidences.as_ref().and_then(|c| c.get(k).copied());
            let accepted = judge.judge(&WordAttempt {
                phase,
                attempt: number,
                item,
                target: word,
                read_correctly,
                confidence,
            });
            WordDecision {
                item,
                read_correctly,
                accepted,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub attempt: usize,
    pub words: Vec<WordDecision>,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyOutcome {
    pub item_id: String,
    pub attempts_used: usize,
    pub final_accepted: bool,
    pub attempts: Vec<AttemptRecord>,
}

/// Runs one accuracy item: attempt, judge, and retry until accepted or out of attempts.
pub fn run_accuracy_item(item: &Prompt, judge: &mut dyn Judge, reader: &mut dyn Reader) -> Result<AccuracyOutcome> {
    if item.exercise != ExerciseKind::Accuracy {
        return Err(Error::InvalidArgument(format!("prompt `{}` is not an accuracy item", item.id)));
    }
    if item.words.is_empty() {
        return Err(Error::EmptyPrompt(item.id.clone()));
    }
    let positions: Vec<usize> = (0..item.words.len()).collect();
    let mut attempts = Vec::with_capacity(MAX_ATTEMPTS);
    for number in 1..=MAX_ATTEMPTS {
        let attempt = reader.read(&item.words, Phase::Accuracy, number);
        let words = judge_attempt(&item.words, &positions, &attempt, Phase::Accuracy, number, judge);
        let accepted = words.iter().all(|w| w.accepted);
        attempts.push(AttemptRecord {
            attempt: number,
            words,
            accepted,
        });
        if accepted {
            break;
        }
    }
    Ok(AccuracyOutcome {
        item_id: item.id.clone(),
        attempts_used: attempts.len(),
        final_accepted: attempts.last().is_some_and(|a| a.accepted),
        attempts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluencySessionLog {
    pub item_id: String,
    pub round1: Vec<WordDecision>,
    /// Positions rejected in round 1, ascending.
    pub retry_set: Vec<usize>,
    pub retry: Vec<WordDecision>,
    pub round2: Vec<WordDecision>,
}

/// Runs one fluency exercise: read the list, retry each rejected word once,
/// then reread the whole list.
pub fn run_fluency_session(list: &Prompt, judge: &mut dyn Judge, reader: &mut dyn Reader) -> Result<FluencySessionLog> {
    if list.exercise != ExerciseKind::Fluency {
        return Err(Error::InvalidArgument(format!("prompt `{}` is not a fluency item", list.id)));
    }
    if list.words.is_empty() {
        return Err(Error::EmptyPrompt(list.id.clone()));
    }
    let positions: Vec<usize> = (0..list.words.len()).collect();

    let first = reader.read(&list.words, Phase::Round1, 1);
    let round1 = judge_attempt(&list.words, &positions, &first, Phase::Round1, 1, judge);
    let retry_set: Vec<usize> = round1.iter().filter(|d| !d.accepted).map(|d| d.item).collect();

    let mut retry = Vec::with_capacity(retry_set.len());
    for &i in &retry_set {
        let target = std::slice::from_ref(&list.words[i]);
        let attempt = reader.read(target, Phase::Retry, 1);
        retry.extend(judge_attempt(target, &[i], &attempt, Phase::Retry, 1, judge));
    }

    let second = reader.read(&list.words, Phase::Round2, 1);
    let round2 = judge_attempt(&list.words, &positions, &second, Phase::Round2, 1, judge);

    Ok(FluencySessionLog {
        item_id: list.id.clone(),
        round1,
        retry_set,
        retry,
        round2,
    })
}

/// One judged attempt, as written to a session log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub session: String,
    pub phase: Phase,
    pub item: String,
    pub attempt: usize,
    pub decision: bool,
}

impl AccuracyOutcome {
    /// One event per attempt at the whole item.
    pub fn events(&self, session: &str) -> Vec<SessionEvent> {
        self.attempts
            .iter()
            .map(|a| SessionEvent {
                session: session.to_string(),
                phase: Phase::Accuracy,
                item: self.item_id.clone(),
                attempt: a.attempt,
                decision: a.accepted,
            })
            .collect()
    }
}

impl FluencySessionLog {
    /// One event per judged word, items named `<prompt id>#<position>`.
    pub fn events(&self, session: &str) -> Vec<SessionEvent> {
        let phases = [
            (Phase::Round1, &self.round1),
            (Phase::Retry, &self.retry),
            (Phase::Round2, &self.round2),
        ];
        phases
            .into_iter()
            .flat_map(|(phase, decisions)| {
                decisions.iter().map(move |d| SessionEvent {
                    session: session.to_string(),
                    phase,
                    item: format!("{}#{}", self.item_id, d.item),
                    attempt: 1,
                    decision: d.accepted,
                })
            })
            .collect()
    }

    pub fn retry_items(&self) -> BTreeSet<usize> {
        self.retry_set.iter().copied().collect()
    }
}

/// Writes events as JSON lines.
pub fn write_events<W: Write>(events: &[SessionEvent], mut out: W) -> Result<()> {
    for e in events {
        let line = serde_json::to_string(e).map_err(|e| Error::Serialize(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::Serialize(e.to_string()))?;
    }
    Ok(())
}

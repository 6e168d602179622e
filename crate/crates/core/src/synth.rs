//! Seeded synthetic corpora with known ground truth.
//!
//! Each prompt word gets a drawn reading outcome (correct or miscue), a drawn
//! system decision and optionally a drawn confidence score. Miscues and
//! rejections are realized as substitutions by out-of-vocabulary tokens, so
//! aligning the generated transcript and hypothesis against the prompt
//! recovers exactly the drawn labels.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{normalize_token, Corpus, FunctionLexicon, Prompt, Recording, RecordingStatus, TaskType, WordToken};
use crate::error::{Error, Result};
use crate::metrics::Rates;

/// Dutch function words used for generated prompts.
pub const FUNCTION_WORDS: &[&str] = &[
    "de", "het", "een", "en", "van", "in", "is", "op", "te", "dat", "die", "er", "ik", "je", "hij", "zij", "we",
    "met", "voor", "naar", "maar", "om", "aan", "bij", "uit", "ook", "nog", "dan", "als", "wat", "niet", "zo", "al",
];

const ONSETS: &[&str] = &["b", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z", "sp", "st", "kr"];
const NUCLEI: &[&str] = &["a", "e", "i", "o", "u", "aa", "ee", "oo", "ui", "ij"];
const CODAS: &[&str] = &["", "k", "l", "m", "n", "p", "r", "s", "t"];

/// Marker appended to out-of-vocabulary substitutes; generated prompt words never contain it.
const OOV_MARK: char = 'q';

/// A distribution over `[0, 100]` that is uniform on integer points within each segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstant {
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: u32,
    pub hi: u32,
    pub weight: f64,
}

impl PiecewiseConstant {
    /// Uniform over the integers `lo..=hi`.
    pub fn uniform(lo: u32, hi: u32) -> Self {
        PiecewiseConstant {
            segments: vec![Segment { lo, hi, weight: 1.0 }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::InvalidConfig("confidence distribution has no segments".into()));
        }
        for s in &self.segments {
            if s.lo > s.hi || s.hi > 100 {
                return Err(Error::InvalidConfig(format!("segment [{}, {}] is not inside [0, 100]", s.lo, s.hi)));
            }
            if !(s.weight >= 0.0 && s.weight.is_finite()) {
                return Err(Error::InvalidConfig(format!("segment weight {} is negative", s.weight)));
            }
        }
        let total: f64 = self.segments.iter().map(|s| s.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("segment weights sum to {total}, not 1")));
        }
        Ok(())
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let mut u: f64 = rng.random();
        let mut chosen = self.segments.last().expect("validated non-empty");
        for s in &self.segments {
            if u < s.weight {
                chosen = s;
                break;
            }
            u -= s.weight;
        }
        f64::from(rng.random_range(chosen.lo..=chosen.hi))
    }

    /// Smallest and largest value with positive probability.
    pub fn support(&self) -> (u32, u32) {
        let live = self.segments.iter().filter(|s| s.weight > 0.0);
        let lo = live.clone().map(|s| s.lo).min().unwrap_or(0);
        let hi = live.map(|s| s.hi).max().unwrap_or(0);
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceModel {
    pub correct: PiecewiseConstant,
    pub miscue: PiecewiseConstant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiscueProb {
    pub function: f64,
    pub content: f64,
}

/// Optional corruption of the generated transcripts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Noise {
    /// Probability that a correctly read word is left out of the transcript.
    pub deletion_prob: f64,
    /// Probability that a filler token follows a word in the transcript.
    pub insertion_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub words_per_task: BTreeMap<TaskType, usize>,
    /// Share of prompt words drawn from the function-word list.
    pub function_fraction: f64,
    pub miscue_prob: MiscueProb,
    pub p_accept_given_correct: f64,
    pub p_accept_given_miscue: f64,
    pub confidence: Option<ConfidenceModel>,
    pub noise: Noise,
    /// Share of recordings marked empty or damaged.
    pub unusable_prob: f64,
    pub system_name: String,
    pub speakers: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 0,
            words_per_task: BTreeMap::from([
                (TaskType::IsolatedWord, 600),
                (TaskType::Sentence, 2200),
                (TaskType::WordList, 2400),
                (TaskType::Story, 3000),
            ]),
            function_fraction: 0.35,
            miscue_prob: MiscueProb {
                function: 0.10,
                content: 0.22,
            },
            p_accept_given_correct: 0.88,
            p_accept_given_miscue: 0.45,
            confidence: Some(ConfidenceModel {
                correct: PiecewiseConstant {
                    segments: vec![
                        Segment {
                            lo: 20,
                            hi: 59,
                            weight: 0.3,
                        },
                        Segment {
                            lo: 60,
                            hi: 100,
                            weight: 0.7,
                        },
                    ],
                },
                miscue: PiecewiseConstant {
                    segments: vec![
                        Segment {
                            lo: 0,
                            hi: 45,
                            weight: 0.6,
                        },
                        Segment {
                            lo: 46,
                            hi: 90,
                            weight: 0.4,
                        },
                    ],
                },
            }),
            noise: Noise::default(),
            unusable_prob: 0.0,
            system_name: "asr".into(),
            speakers: 20,
        }
    }
}

impl GeneratorConfig {
    /// A configuration whose expected confusion rates are `rates`, spread
    /// evenly over the four tasks. Miscue probability does not depend on
    /// word category.
    pub fn targeting(rates: Rates, total_words: usize, seed: u64) -> Result<Self> {
        let m = rates.crr + rates.far;
        if !(m > 0.0 && m < 1.0) || (rates.sum() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("cannot target rates {rates:?}")));
        }
        let per_task = total_words / 4;
        let mut words_per_task: BTreeMap<TaskType, usize> = TaskType::ALL.iter().map(|&t| (t, per_task)).collect();
        *words_per_task.get_mut(&TaskType::Story).expect("all tasks present") += total_words - 4 * per_task;
        Ok(GeneratorConfig {
            seed,
            words_per_task,
            miscue_prob: MiscueProb { function: m, content: m },
            p_accept_given_correct: rates.car / (1.0 - m),
            p_accept_given_miscue: rates.far / m,
            ..GeneratorConfig::default()
        })
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("function_fraction", self.function_fraction),
            ("miscue_prob.function", self.miscue_prob.function),
            ("miscue_prob.content", self.miscue_prob.content),
            ("p_accept_given_correct", self.p_accept_given_correct),
            ("p_accept_given_miscue", self.p_accept_given_miscue),
            ("noise.deletion_prob", self.noise.deletion_prob),
            ("noise.insertion_prob", self.noise.insertion_prob),
            ("unusable_prob", self.unusable_prob),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} = {p} is not a probability")));
            }
        }
        if let Some(model) = &self.confidence {
            model.correct.validate()?;
            model.miscue.validate()?;
        }
        if self.speakers == 0 {
            return Err(Error::InvalidConfig("speakers must be positive".into()));
        }
        if self.system_name.trim().is_empty() {
            return Err(Error::InvalidConfig("system_name is empty".into()));
        }
        Ok(())
    }

    /// Marginal probability that a prompt word is misread.
    pub fn marginal_miscue(&self) -> f64 {
        self.function_fraction * self.miscue_prob.function + (1.0 - self.function_fraction) * self.miscue_prob.content
    }
}

/// Analytic expected confusion rates of a generator configuration.
///
/// Transcript noise is not accounted for.
pub fn expected_confusion(cfg: &GeneratorConfig) -> Result<Rates> {
    cfg.validate()?;
    let m = cfg.marginal_miscue();
    let (pc, pm) = (cfg.p_accept_given_correct, cfg.p_accept_given_miscue);
    Ok(Rates {
        car: (1.0 - m) * pc,
        frr: (1.0 - m) * (1.0 - pc),
        far: m * pm,
        crr: m * (1.0 - pm),
    })
}

/// Ground truth for one generated prompt word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub recording_id: String,
    pub word_index: usize,
    /// 1 when the pupil read the word correctly.
    pub true_label: u8,
    /// 1 when the generated system accepted the word.
    pub system_decision: u8,
    pub confidence: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    pub truth: Vec<TruthRow>,
    pub lexicon: FunctionLexicon,
}

impl SyntheticCorpus {
    pub fn write_truth_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.truth {
            w.serialize(row).map_err(|e| Error::Serialize(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Serialize(e.to_string()))
    }
}

fn content_vocabulary(rng: &mut ChaCha8Rng, size: usize) -> Vec<String> {
    let mut vocab = std::collections::BTreeSet::new();
    while vocab.len() < size {
        let syllables = rng.random_range(1..=3);
        let word: String = (0..syllables)
            .map(|_| {
                format!(
                    "{}{}{}",
                    ONSETS[rng.random_range(0..ONSETS.len())],
                    NUCLEI[rng.random_range(0..NUCLEI.len())],
                    CODAS[rng.random_range(0..CODAS.len())]
                )
            })
            .collect();
        if !FUNCTION_WORDS.contains(&word.as_str()) {
            vocab.insert(word);
        }
    }
    vocab.into_iter().collect()
}

fn prompt_length(task: TaskType, rng: &mut ChaCha8Rng) -> usize {
    match task {
        TaskType::IsolatedWord => 1,
        TaskType::Sentence => rng.random_range(3..=8),
        TaskType::WordList => rng.random_range(6..=12),
        TaskType::Story => rng.random_range(15..=40),
    }
}

fn token(raw: String) -> WordToken {
    normalize_token(&raw).expect("generated tokens are alphanumeric")
}

fn substitute(word: &WordToken) -> WordToken {
    token(format!("{}{OOV_MARK}", word.normalized))
}

pub fn generate_corpus(cfg: &GeneratorConfig) -> Result<SyntheticCorpus> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let vocab = content_vocabulary(&mut rng, 400);
    let lexicon = FunctionLexicon::new(FUNCTION_WORDS);

    let mut prompts = Vec::new();
    let mut recordings = Vec::new();
    let mut truth = Vec::new();

    for task in TaskType::ALL {
        let mut remaining = cfg.words_per_task.get(&task).copied().unwrap_or(0);
        while remaining > 0 {
            let len = prompt_length(task, &mut rng).min(remaining);
            remaining -= len;
            let n = prompts.len();
            let words: Vec<WordToken> = (0..len)
                .map(|_| {
                    let w = if rng.random_bool(cfg.function_fraction) {
                        FUNCTION_WORDS[rng.random_range(0..FUNCTION_WORDS.len())]
                    } else {
                        vocab[rng.random_range(0..vocab.len())].as_str()
                    };
                    token(w.to_string())
                })
                .collect();
            let prompt = Prompt::new(format!("p{n:05}"), task, words)?;
            let rec_id = format!("r{n:05}");

            let status = if cfg.unusable_prob > 0.0 && rng.random_bool(cfg.unusable_prob) {
                if rng.random_bool(0.5) {
                    RecordingStatus::Empty
                } else {
                    RecordingStatus::Damaged
                }
            } else {
                RecordingStatus::Ok
            };

            let mut transcript = Vec::with_capacity(len);
            let mut hypothesis = Vec::with_capacity(len);
            let mut confidences = Vec::with_capacity(len);
            for (i, word) in prompt.words.iter().enumerate() {
                let miscue_p = if lexicon.contains(&word.normalized) {
                    cfg.miscue_prob.function
                } else {
                    cfg.miscue_prob.content
                };
                let correct = !rng.random_bool(miscue_p);
                let accept = rng.random_bool(if correct {
                    cfg.p_accept_given_correct
                } else {
                    cfg.p_accept_given_miscue
                });
                let confidence = cfg.confidence.as_ref().map(|m| {
                    if correct {
                        m.correct.sample(&mut rng)
                    } else {
                        m.miscue.sample(&mut rng)
                    }
                });
                if correct {
                    if !(cfg.noise.deletion_prob > 0.0 && rng.random_bool(cfg.noise.deletion_prob)) {
                        transcript.push(word.clone());
                    }
                } else {
                    transcript.push(substitute(word));
                }
                if cfg.noise.insertion_prob > 0.0 && rng.random_bool(cfg.noise.insertion_prob) {
                    transcript.push(token(format!("eh{OOV_MARK}")));
                }
                hypothesis.push(if accept { word.clone() } else { substitute(word) });
                if let Some(c) = confidence {
                    confidences.push(c);
                }
                if status == RecordingStatus::Ok {
                    truth.push(TruthRow {
                        recording_id: rec_id.clone(),
                        word_index: i,
                        true_label: u8::from(correct),
                        system_decision: u8::from(accept),
                        confidence,
                    });
                }
            }

            let usable = status == RecordingStatus::Ok;
            recordings.push(Recording {
                id: rec_id,
                prompt_id: prompt.id.clone(),
                speaker_id: format!("s{:03}", n % cfg.speakers),
                status,
                transcript: usable.then_some(transcript),
                hypotheses: if usable {
                    BTreeMap::from([(cfg.system_name.clone(), hypothesis)])
                } else {
                    BTreeMap::new()
                },
                confidences: (usable && cfg.confidence.is_some()).then_some(confidences),
            });
            prompts.push(prompt);
        }
    }

    Ok(SyntheticCorpus {
        corpus: Corpus::new(prompts, recordings)?,
        truth,
        lexicon,
    })
}

//! Corpus-level evaluation: pooled metrics, threshold sweeps and stratified
//! breakdowns by reading task or word category.
//!
//! All corpus-level numbers pool word-level decisions over recordings into
//! one confusion matrix before any metric is computed.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::align::BinaryScoreVector;
use crate::classify::{confusion, hypothesis_labels, reference_labels, threshold_labels, ConfusionMatrix, LabelRow};
use crate::corpus::{classify_word_category, Corpus, FunctionLexicon, RecordingStatus, TaskType, WordCategory};
use crate::error::{Error, Result};
use crate::metrics::{cohens_kappa, mcc, MetricsReport};

/// Where the system decisions come from.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemSpec {
    /// A named recognizer whose word hypothesis is aligned to the prompt.
    Hypothesis(String),
    /// Per-word confidences compared against a threshold.
    Threshold(f64),
}

impl fmt::Display for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemSpec::Hypothesis(name) => f.write_str(name),
            SystemSpec::Threshold(t) => write!(f, "threshold:{t}"),
        }
    }
}

impl FromStr for SystemSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(t) = s.strip_prefix("threshold:") {
            let t: f64 = t
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad threshold in system selector `{s}`")))?;
            if !t.is_finite() {
                return Err(Error::InvalidArgument(format!("threshold must be finite in `{s}`")));
            }
            Ok(SystemSpec::Threshold(t))
        } else if s.is_empty() {
            Err(Error::InvalidArgument("empty system selector".into()))
        } else {
            Ok(SystemSpec::Hypothesis(s.to_string()))
        }
    }
}

/// Which recordings take part in evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalOptions {
    pub statuses: BTreeSet<RecordingStatus>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            statuses: [RecordingStatus::Ok].into(),
        }
    }
}

/// Reference and system labels of one recording.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredRecording {
    pub recording_id: String,
    pub prompt_id: String,
    pub task: TaskType,
    pub reference: BinaryScoreVector,
    pub predicted: BinaryScoreVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCorpus {
    pub system: String,
    pub recordings: Vec<ScoredRecording>,
    /// Participating recordings without output for the requested system.
    pub skipped: usize,
}

impl ScoredCorpus {
    pub fn matrix(&self) -> Result<ConfusionMatrix> {
        self.recordings
            .iter()
            .map(|r| confusion(&r.reference, &r.predicted))
            .sum()
    }

    pub fn label_rows(&self) -> Vec<LabelRow> {
        self.recordings
            .iter()
            .flat_map(|r| {
                r.reference
                    .as_slice()
                    .iter()
                    .zip(r.predicted.as_slice())
                    .enumerate()
                    .map(|(i, (&a, &b))| LabelRow {
                        recording_id: r.recording_id.clone(),
                        prompt_index: i,
                        reference: u8::from(a),
                        predicted: u8::from(b),
                    })
            })
            .collect()
    }
}

/// Labels every participating recording. Recordings lacking the system's
/// output are skipped and counted; a missing transcript is an error.
pub fn score_corpus(corpus: &Corpus, system: &SystemSpec, opts: &EvalOptions) -> Result<ScoredCorpus> {
    let mut recordings = Vec::new();
    let mut skipped = 0;
    for rec in corpus.recordings() {
        if !opts.statuses.contains(&rec.status) {
            continue;
        }
        let prompt = corpus.prompt_of(rec);
        let predicted = match system {
            SystemSpec::Hypothesis(name) if rec.hypotheses.contains_key(name) => hypothesis_labels(rec, prompt, name)?,
            SystemSpec::Threshold(t) => match &rec.confidences {
                Some(conf) => threshold_labels(conf, *t)?,
                None => {
                    skipped += 1;
                    continue;
                }
            },
            SystemSpec::Hypothesis(_) => {
                skipped += 1;
                continue;
            }
        };
        let reference = reference_labels(rec, prompt)?;
        recordings.push(ScoredRecording {
            recording_id: rec.id.clone(),
            prompt_id: prompt.id.clone(),
            task: prompt.task,
            reference,
            predicted,
        });
    }
    if recordings.is_empty() {
        return Err(Error::NoUsableRecordings {
            system: system.to_string(),
            skipped,
        });
    }
    Ok(ScoredCorpus {
        system: system.to_string(),
        recordings,
        skipped,
    })
}

/// Pooled metrics for one system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub system: String,
    pub recordings_used: usize,
    pub recordings_skipped: usize,
    pub metrics: MetricsReport,
}

pub fn evaluate(corpus: &Corpus, system: &SystemSpec) -> Result<Evaluation> {
    evaluate_with(corpus, system, &EvalOptions::default())
}

pub fn evaluate_with(corpus: &Corpus, system: &SystemSpec, opts: &EvalOptions) -> Result<Evaluation> {
    let scored = score_corpus(corpus, system, opts)?;
    evaluation_of(&scored)
}

pub fn evaluation_of(scored: &ScoredCorpus) -> Result<Evaluation> {
    Ok(Evaluation {
        system: scored.system.clone(),
        recordings_used: scored.recordings.len(),
        recordings_skipped: scored.skipped,
        metrics: MetricsReport::from_matrix(&scored.matrix()?)?,
    })
}

/// Drops recordings whose prompt has the given task.
pub fn remove_stratum(corpus: &Corpus, task: TaskType) -> Corpus {
    corpus.retain_recordings(|_, p| p.task != task)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[default]
    Kappa,
    Mcc,
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kappa" => Ok(Objective::Kappa),
            "mcc" => Ok(Objective::Mcc),
            _ => Err(Error::InvalidArgument(format!("unknown sweep objective `{s}`"))),
        }
    }
}

/// Parses `LO:HI:STEP` into an inclusive, ascending grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("malformed grid `{spec}`, expected LO:HI:STEP"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [lo, hi, step] = parts[..] else {
        return Err(bad());
    };
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || step <= 0.0 || hi < lo {
        return Err(bad());
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|k| ((lo + k as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

/// The default grid: integer thresholds 0 through 100.
pub fn default_grid() -> Vec<f64> {
    (0..=100).map(f64::from).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub threshold: f64,
    pub kappa: Option<f64>,
    pub mcc: Option<f64>,
    pub matrix: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSweepResult {
    pub objective: Objective,
    pub points: Vec<SweepPoint>,
    /// Smallest grid threshold attaining the best objective value.
    pub best_threshold: f64,
    pub best_kappa: Option<f64>,
    pub best_mcc: Option<f64>,
    pub recordings_used: usize,
    pub recordings_skipped: usize,
}

impl ThresholdSweepResult {
    pub fn grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.threshold).collect()
    }

    pub fn best_value(&self) -> Option<f64> {
        match self.objective {
            Objective::Kappa => self.best_kappa,
            Objective::Mcc => self.best_mcc,
        }
    }
}

pub fn sweep_threshold(corpus: &Corpus, grid: &[f64], objective: Objective) -> Result<ThresholdSweepResult> {
    sweep_threshold_with(corpus, grid, objective, &EvalOptions::default())
}

/// Evaluates every grid threshold and picks the best one; undefined values
/// never win and ties go to the smallest threshold.
pub fn sweep_threshold_with(
    corpus: &Corpus,
    grid: &[f64],
    objective: Objective,
    opts: &EvalOptions,
) -> Result<ThresholdSweepResult> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("threshold grid is empty".into()));
    }
    let mut pairs: Vec<(bool, f64)> = Vec::new();
    let (mut used, mut skipped) = (0, 0);
    for rec in corpus.recordings() {
        if !opts.statuses.contains(&rec.status) {
            continue;
        }
        let Some(conf) = &rec.confidences else {
            skipped += 1;
            continue;
        };
        // validates the score range once, up front
        threshold_labels(conf, 0.0)?;
        let reference = reference_labels(rec, corpus.prompt_of(rec))?;
        pairs.extend(reference.as_slice().iter().copied().zip(conf.iter().copied()));
        used += 1;
    }
    if used == 0 {
        return Err(Error::NoConfidences);
    }

    let mut points = Vec::with_capacity(grid.len());
    for &threshold in grid {
        let mut matrix = ConfusionMatrix::ZERO;
        for &(reference, score) in &pairs {
            matrix.record(reference, score >= threshold);
        }
        points.push(SweepPoint {
            threshold,
            kappa: cohens_kappa(&matrix)?,
            mcc: mcc(&matrix)?,
            matrix,
        });
    }

    let value = |p: &SweepPoint| match objective {
        Objective::Kappa => p.kappa,
        Objective::Mcc => p.mcc,
    };
    let mut best: Option<&SweepPoint> = None;
    for p in &points {
        let Some(v) = value(p) else { continue };
        let better = match best {
            None => true,
            Some(b) => v > value(b).expect("best is defined") || (v == value(b).unwrap() && p.threshold < b.threshold),
        };
        if better {
            best = Some(p);
        }
    }
    let best = best.ok_or(Error::AllUndefined {
        metric: match objective {
            Objective::Kappa => "kappa",
            Objective::Mcc => "mcc",
        },
    })?;
    Ok(ThresholdSweepResult {
        objective,
        best_threshold: best.threshold,
        best_kappa: best.kappa,
        best_mcc: best.mcc,
        points,
        recordings_used: used,
        recordings_skipped: skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Task,
    WordCategory,
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "task" => Ok(Dimension::Task),
            "category" | "word_category" => Ok(Dimension::WordCategory),
            _ => Err(Error::InvalidArgument(format!("unknown stratification dimension `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "dimension", content = "value", rename_all = "snake_case")]
pub enum StratumKey {
    Task(TaskType),
    WordCategory(WordCategory),
}

impl StratumKey {
    pub fn dimension(&self) -> Dimension {
        match self {
            StratumKey::Task(_) => Dimension::Task,
            StratumKey::WordCategory(_) => Dimension::WordCategory,
        }
    }

    pub fn value(&self) -> &'static str {
        match self {
            StratumKey::Task(t) => t.as_str(),
            StratumKey::WordCategory(c) => c.as_str(),
        }
    }

    pub fn all(dimension: Dimension) -> Vec<StratumKey> {
        match dimension {
            Dimension::Task => TaskType::ALL.into_iter().map(StratumKey::Task).collect(),
            Dimension::WordCategory => WordCategory::ALL.into_iter().map(StratumKey::WordCategory).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumRow {
    #[serde(flatten)]
    pub key: StratumKey,
    pub words: u64,
    /// `None` for a stratum without any words.
    pub metrics: Option<MetricsReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratifiedReport {
    pub system: String,
    pub dimension: Dimension,
    pub overall: MetricsReport,
    pub strata: Vec<StratumRow>,
}

impl StratifiedReport {
    pub fn stratum(&self, key: StratumKey) -> Option<&StratumRow> {
        self.strata.iter().find(|r| r.key == key)
    }
}

pub fn evaluate_strata(
    corpus: &Corpus,
    system: &SystemSpec,
    dimension: Dimension,
    lexicon: Option<&FunctionLexicon>,
) -> Result<StratifiedReport> {
    evaluate_strata_with(corpus, system, dimension, lexicon, &EvalOptions::default())
}

/// Assigns every scored word to exactly one stratum and reports each
/// stratum from its own pooled matrix. Word categories use the prompt word.
pub fn evaluate_strata_with(
    corpus: &Corpus,
    system: &SystemSpec,
    dimension: Dimension,
    lexicon: Option<&FunctionLexicon>,
    opts: &EvalOptions,
) -> Result<StratifiedReport> {
    if dimension == Dimension::WordCategory && lexicon.is_none() {
        return Err(Error::InvalidArgument(
            "a function-word lexicon is required to stratify by word category".into(),
        ));
    }
    let scored = score_corpus(corpus, system, opts)?;
    let keys = StratumKey::all(dimension);
    let mut matrices = vec![ConfusionMatrix::ZERO; keys.len()];
    for rec in &scored.recordings {
        let prompt = corpus.prompt(&rec.prompt_id).expect("scored prompts exist");
        let pairs = rec.reference.as_slice().iter().zip(rec.predicted.as_slice());
        for (word, (&r, &p)) in prompt.words.iter().zip(pairs) {
            let key = match dimension {
                Dimension::Task => StratumKey::Task(rec.task),
                Dimension::WordCategory => {
                    StratumKey::WordCategory(classify_word_category(word, lexicon.expect("checked above")))
                }
            };
            let slot = keys.iter().position(|k| *k == key).expect("key enumerated");
            matrices[slot].record(r, p);
        }
    }
    let strata = keys
        .into_iter()
        .zip(&matrices)
        .map(|(key, m)| {
            Ok(StratumRow {
                key,
                words: m.total(),
                metrics: if m.total() == 0 {
                    None
                } else {
                    Some(MetricsReport::from_matrix(m)?)
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StratifiedReport {
        system: scored.system.clone(),
        dimension,
        overall: MetricsReport::from_matrix(&scored.matrix()?)?,
        strata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize, Prompt, Recording};
    use std::collections::BTreeMap;

    fn rec(id: &str, prompt: &str, transcript: &str, hyp: Option<&str>, conf: Option<Vec<f64>>) -> Recording {
        Recording {
            id: id.into(),
            prompt_id: prompt.into(),
            speaker_id: "s".into(),
            status: RecordingStatus::Ok,
            transcript: Some(tokenize(transcript)),
            hypotheses: hyp
                .map(|h| BTreeMap::from([("asr".to_string(), tokenize(h))]))
                .unwrap_or_default(),
            confidences: conf,
        }
    }

    fn small_corpus() -> Corpus {
        let prompts = vec![
            Prompt::new("p1", TaskType::Sentence, tokenize("de kat")).unwrap(),
            Prompt::new("p2", TaskType::IsolatedWord, tokenize("boom")).unwrap(),
            Prompt::new("p3", TaskType::Story, tokenize("het is een mooie dag")).unwrap(),
        ];
        let recordings = vec![
            // ref [1,1], pred [1,0]
            rec("r1", "p1", "de kat", Some("de"), Some(vec![90.0, 20.0])),
            // ref [0], pred [0]
            rec("r2", "p2", "bloem", Some("bloem"), Some(vec![10.0])),
            // ref [1,1,0,1,1], pred [1,1,1,1,0]
            rec("r3", "p3", "het is de mooie dag", Some("het is een mooie"), Some(vec![70.0, 80.0, 60.0, 90.0, 30.0])),
        ];
        Corpus::new(prompts, recordings).unwrap()
    }

    #[test]
    fn system_spec_parsing() {
        assert_eq!("asr".parse::<SystemSpec>().unwrap(), SystemSpec::Hypothesis("asr".into()));
        assert_eq!("threshold:46".parse::<SystemSpec>().unwrap(), SystemSpec::Threshold(46.0));
        assert_eq!(SystemSpec::Threshold(46.0).to_string(), "threshold:46");
        assert!("threshold:abc".parse::<SystemSpec>().is_err());
        assert!("".parse::<SystemSpec>().is_err());
    }

    #[test]
    fn pooled_two_recording_kappa() {
        let prompts = vec![
            Prompt::new("a", TaskType::Sentence, tokenize("de kat")).unwrap(),
            Prompt::new("b", TaskType::Sentence, tokenize("de hond")).unwrap(),
        ];
        // pooled (ca, cr, fa, fr) = (2, 1, 0, 1)
        let recs = vec![
            rec("r1", "a", "de kat", Some("de kat"), None),
            rec("r2", "b", "de vis", Some("pet"), None),
        ];
        let c = Corpus::new(prompts, recs).unwrap();
        let e = evaluate(&c, &SystemSpec::Hypothesis("asr".into())).unwrap();
        assert_eq!(e.metrics.matrix, ConfusionMatrix::new(2, 1, 0, 1));
        assert!((e.metrics.kappa.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn perfect_corpus_has_undefined_kappa() {
        let prompts = vec![Prompt::new("a", TaskType::Sentence, tokenize("de kat")).unwrap()];
        let recs = vec![rec("r1", "a", "de kat", Some("de kat"), None)];
        let c = Corpus::new(prompts, recs).unwrap();
        let e = evaluate(&c, &SystemSpec::Hypothesis("asr".into())).unwrap();
        assert_eq!(e.metrics.kappa, None);
        assert_eq!(e.metrics.rates.car, 1.0);
    }

    #[test]
    fn missing_hypotheses_are_skipped_and_counted() {
        let c = small_corpus();
        let prompts = c.prompts().to_vec();
        let mut recs = c.recordings().to_vec();
        recs[1].hypotheses.clear();
        let c = Corpus::new(prompts, recs).unwrap();
        let e = evaluate(&c, &SystemSpec::Hypothesis("asr".into())).unwrap();
        assert_eq!((e.recordings_used, e.recordings_skipped), (2, 1));
        let err = evaluate(&c, &SystemSpec::Hypothesis("other".into())).unwrap_err();
        assert!(matches!(err, Error::NoUsableRecordings { skipped: 3, .. }));
    }

    #[test]
    fn non_ok_recordings_do_not_participate() {
        let c = small_corpus();
        let prompts = c.prompts().to_vec();
        let mut recs = c.recordings().to_vec();
        recs[0].status = RecordingStatus::Damaged;
        recs[0].transcript = None;
        let c = Corpus::new(prompts, recs).unwrap();
        let e = evaluate(&c, &SystemSpec::Hypothesis("asr".into())).unwrap();
        assert_eq!(e.metrics.words, 6);
    }

    #[test]
    fn threshold_system_matches_manual_labels() {
        let c = small_corpus();
        let e = evaluate(&c, &SystemSpec::Threshold(50.0)).unwrap();
        // refs: [1,1] [0] [1,1,0,1,1]; preds at 50: [1,0] [0] [1,1,1,1,0]
        assert_eq!(e.metrics.matrix, ConfusionMatrix::new(4, 1, 1, 2));
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:100:1").unwrap().len(), 101);
        assert_eq!(parse_grid("40:50:5").unwrap(), vec![40.0, 45.0, 50.0]);
        assert_eq!(parse_grid("0:1:0.1").unwrap().len(), 11);
        assert_eq!(parse_grid("0:1:0.1").unwrap()[3], 0.3);
        for bad in ["0:100", "a:b:c", "0:100:0", "10:0:1", "0:100:-1", "0:1:2:3"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn sweep_single_point_and_consistency() {
        let c = small_corpus();
        let r = sweep_threshold(&c, &[55.0], Objective::Kappa).unwrap();
        assert_eq!(r.best_threshold, 55.0);
        let full = sweep_threshold(&c, &default_grid(), Objective::Kappa).unwrap();
        let max = full.points.iter().filter_map(|p| p.kappa).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(full.best_kappa, Some(max));
        let first = full.points.iter().find(|p| p.kappa == Some(max)).unwrap();
        assert_eq!(first.threshold, full.best_threshold);
    }

    #[test]
    fn sweep_errors() {
        let c = small_corpus();
        assert!(matches!(
            sweep_threshold(&c, &[], Objective::Kappa),
            Err(Error::InvalidArgument(_))
        ));
        let prompts = c.prompts().to_vec();
        let mut recs = c.recordings().to_vec();
        for r in &mut recs {
            r.confidences = None;
        }
        let bare = Corpus::new(prompts.clone(), recs.clone()).unwrap();
        assert!(matches!(
            sweep_threshold(&bare, &default_grid(), Objective::Kappa),
            Err(Error::NoConfidences)
        ));
        // Both raters constant at every threshold: every word read correctly
        // and every confidence identical.
        for r in &mut recs {
            let p = c.prompt(&r.prompt_id).unwrap();
            r.transcript = Some(p.words.clone());
            r.confidences = Some(vec![40.0; p.len()]);
        }
        let flat = Corpus::new(prompts, recs).unwrap();
        let grid = parse_grid("0:40:1").unwrap();
        let err = sweep_threshold(&flat, &grid, Objective::Kappa).unwrap_err();
        assert!(err.to_string().contains("undefined at every threshold"));
    }

    #[test]
    fn strata_partition_the_words() {
        let c = small_corpus();
        let sys = SystemSpec::Hypothesis("asr".into());
        let by_task = evaluate_strata(&c, &sys, Dimension::Task, None).unwrap();
        assert_eq!(by_task.strata.len(), 4);
        let total: u64 = by_task.strata.iter().map(|s| s.words).sum();
        assert_eq!(total, by_task.overall.words);
        assert!(by_task.stratum(StratumKey::Task(TaskType::WordList)).unwrap().metrics.is_none());
        let merged: ConfusionMatrix = by_task
            .strata
            .iter()
            .filter_map(|s| s.metrics.as_ref().map(|m| m.matrix))
            .sum();
        assert_eq!(merged, by_task.overall.matrix);

        let lex = FunctionLexicon::new(["de", "het", "is", "een"]);
        let by_cat = evaluate_strata(&c, &sys, Dimension::WordCategory, Some(&lex)).unwrap();
        let func = by_cat.stratum(StratumKey::WordCategory(WordCategory::Function)).unwrap();
        assert_eq!(func.words, 4);
        assert_eq!(by_cat.strata.iter().map(|s| s.words).sum::<u64>(), 8);
        assert!(evaluate_strata(&c, &sys, Dimension::WordCategory, None).is_err());
    }

    #[test]
    fn stratum_key_serialization() {
        let row = serde_json::to_value(StratumKey::Task(TaskType::Story)).unwrap();
        assert_eq!(row, serde_json::json!({"dimension": "task", "value": "story"}));
    }

    #[test]
    fn remove_stratum_examples() {
        let c = small_corpus();
        let without = remove_stratum(&c, TaskType::IsolatedWord);
        assert!(without.recordings().iter().all(|r| without.prompt_of(r).task != TaskType::IsolatedWord));
        assert_eq!(without.recordings().len(), 2);
        assert_eq!(remove_stratum(&c, TaskType::WordList), c);
    }
}

//! Corpus domain types: prompts, recordings, token normalization, manifest
//! ingestion and function/content word categorization.
//!
//! Two on-disk manifest formats are accepted. The JSON manifest is the
//! canonical one:
//!
//! ```json
//! {
//!   "prompts": [{"id": "p1", "task": "sentence", "exercise": "accuracy", "words": ["De", "kat"]}],
//!   "recordings": [{"id": "r1", "prompt_id": "p1", "speaker_id": "s1", "status": "ok",
//!                   "transcript": ["de", "kat"], "hypotheses": {"asr": ["de", "kat"]},
//!                   "confidences": [80, 41]}]
//! }
//! ```
//!
//! The flat TSV format carries the same content one record per line, one
//! token per column, with `#` comment lines ignored:
//!
//! ```text
//! prompt      <id> <task> <exercise> <word>...
//! recording   <id> <prompt_id> <speaker_id> <status>
//! transcript  <recording_id> <token>...
//! hypothesis  <recording_id> <system> <token>...
//! confidences <recording_id> <score>...
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One word of a prompt, transcript or hypothesis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WordToken {
    pub raw: String,
    pub normalized: String,
    /// The annotator marked the word as broken off or partial.
    pub fragment: bool,
}

impl WordToken {
    /// Two tokens match when their normalized forms agree and neither is a fragment.
    pub fn matches(&self, other: &WordToken) -> bool {
        !self.fragment && !other.fragment && self.normalized == other.normalized
    }
}

impl fmt::Display for WordToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.normalized)?;
        if self.fragment {
            f.write_str("*")?;
        }
        Ok(())
    }
}

fn is_fragment_marker(c: char) -> bool {
    c == '*' || c == '-'
}

/// Normalizes a raw token.
///
/// Lowercases, strips leading and trailing punctuation and keeps internal
/// hyphens and apostrophes. A `*` or `-` in the trailing punctuation run marks
/// the token as a fragment. Returns `None` when nothing but punctuation is
/// left; callers drop such tokens.
pub fn normalize_token(raw: &str) -> Option<WordToken> {
    let trimmed = raw.trim();
    let start = trimmed.find(|c: char| c.is_alphanumeric())?;
    let end = trimmed
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_alphanumeric())
        .map(|(i, c)| i + c.len_utf8())?;
    let fragment = trimmed[end..].chars().any(is_fragment_marker);
    Some(WordToken {
        raw: raw.to_string(),
        normalized: trimmed[start..end].to_lowercase(),
        fragment,
    })
}

/// Normalizes a raw token sequence, dropping pure-punctuation tokens.
pub fn normalize_tokens<S: AsRef<str>>(raw: &[S]) -> Vec<WordToken> {
    raw.iter().filter_map(|t| normalize_token(t.as_ref())).collect()
}

/// Splits on whitespace and normalizes.
pub fn tokenize(text: &str) -> Vec<WordToken> {
    text.split_whitespace().filter_map(normalize_token).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskType {
    IsolatedWord,
    Sentence,
    WordList,
    Story,
}

impl TaskType {
    pub const ALL: [TaskType; 4] = [
        TaskType::IsolatedWord,
        TaskType::Sentence,
        TaskType::WordList,
        TaskType::Story,
    ];

    pub fn exercise(self) -> ExerciseKind {
        match self {
            TaskType::IsolatedWord | TaskType::Sentence => ExerciseKind::Accuracy,
            TaskType::WordList | TaskType::Story => ExerciseKind::Fluency,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TaskType::IsolatedWord => "isolated_word",
            TaskType::Sentence => "sentence",
            TaskType::WordList => "word_list",
            TaskType::Story => "story",
        }
    }
}

impl fmt::Display for TaskType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TaskType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown task type `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExerciseKind {
    Accuracy,
    Fluency,
}

impl ExerciseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExerciseKind::Accuracy => "accuracy",
            ExerciseKind::Fluency => "fluency",
        }
    }
}

impl FromStr for ExerciseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "accuracy" => Ok(ExerciseKind::Accuracy),
            "fluency" => Ok(ExerciseKind::Fluency),
            _ => Err(Error::InvalidArgument(format!("unknown exercise kind `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompt {
    pub id: String,
    pub words: Vec<WordToken>,
    pub task: TaskType,
    pub exercise: ExerciseKind,
}

impl Prompt {
    /// Builds a prompt, checking the word count and task/exercise pairing.
    pub fn new(id: impl Into<String>, task: TaskType, words: Vec<WordToken>) -> Result<Self> {
        let id = id.into();
        if words.is_empty() {
            return Err(Error::ingest(id, "words", "prompt has no words"));
        }
        if task == TaskType::IsolatedWord && words.len() != 1 {
            return Err(Error::ingest(
                id,
                "words",
                format!("isolated_word prompt has {} words", words.len()),
            ));
        }
        Ok(Prompt {
            id,
            words,
            task,
            exercise: task.exercise(),
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordingStatus {
    Ok,
    Empty,
    Damaged,
    Noisy,
}

impl RecordingStatus {
    pub const ALL: [RecordingStatus; 4] = [
        RecordingStatus::Ok,
        RecordingStatus::Empty,
        RecordingStatus::Damaged,
        RecordingStatus::Noisy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RecordingStatus::Ok => "ok",
            RecordingStatus::Empty => "empty",
            RecordingStatus::Damaged => "damaged",
            RecordingStatus::Noisy => "noisy",
        }
    }
}

impl FromStr for RecordingStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RecordingStatus::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown recording status `{s}`")))
    }
}

/// One pupil attempt at a prompt.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub id: String,
    pub prompt_id: String,
    pub speaker_id: String,
    pub status: RecordingStatus,
    /// Human word-level transcript; absent for recordings that were never annotated.
    pub transcript: Option<Vec<WordToken>>,
    /// Recognized words per system name.
    pub hypotheses: BTreeMap<String, Vec<WordToken>>,
    /// Per-prompt-word confidence scores in `[0, 100]`.
    pub confidences: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    prompts: Vec<Prompt>,
    recordings: Vec<Recording>,
    index: HashMap<String, usize>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.prompts == other.prompts && self.recordings == other.recordings
    }
}

impl Corpus {
    /// Assembles a corpus and validates cross-record invariants.
    pub fn new(prompts: Vec<Prompt>, recordings: Vec<Recording>) -> Result<Self> {
        let mut index = HashMap::with_capacity(prompts.len());
        for (i, p) in prompts.iter().enumerate() {
            if p.words.is_empty() {
                return Err(Error::ingest(&p.id, "words", "prompt has no words"));
            }
            if p.exercise != p.task.exercise() {
                return Err(Error::ingest(
                    &p.id,
                    "exercise",
                    format!("{} prompts are {} exercises", p.task, p.task.exercise().as_str()),
                ));
            }
            if index.insert(p.id.clone(), i).is_some() {
                return Err(Error::ingest(&p.id, "id", "duplicate prompt id"));
            }
        }
        let mut seen = HashSet::with_capacity(recordings.len());
        for r in &recordings {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::ingest(&r.id, "id", "duplicate recording id"));
            }
            let Some(&pi) = index.get(&r.prompt_id) else {
                return Err(Error::ingest(
                    &r.id,
                    "prompt_id",
                    format!("unknown prompt `{}`", r.prompt_id),
                ));
            };
            if let Some(conf) = &r.confidences {
                let expected = prompts[pi].words.len();
                if conf.len() != expected {
                    return Err(Error::ingest(
                        &r.id,
                        "confidences",
                        format!("length mismatch: {} scores for a {expected}-word prompt", conf.len()),
                    ));
                }
                if let Some((i, v)) = conf
                    .iter()
                    .enumerate()
                    .find(|(_, v)| !(0.0..=100.0).contains(*v))
                {
                    return Err(Error::ingest(
                        &r.id,
                        "confidences",
                        format!("score {v} at position {i} is outside [0, 100]"),
                    ));
                }
            }
        }
        Ok(Corpus {
            prompts,
            recordings,
            index,
        })
    }

    pub fn prompts(&self) -> &[Prompt] {
        &self.prompts
    }

    pub fn recordings(&self) -> &[Recording] {
        &self.recordings
    }

    pub fn prompt(&self, id: &str) -> Option<&Prompt> {
        self.index.get(id).map(|&i| &self.prompts[i])
    }

    /// The prompt a recording refers to. Resolution is guaranteed by construction.
    pub fn prompt_of(&self, recording: &Recording) -> &Prompt {
        self.prompt(&recording.prompt_id)
            .expect("recording prompt ids are validated at construction")
    }

    /// Total number of prompt words over all recordings.
    pub fn word_count(&self) -> usize {
        self.recordings.iter().map(|r| self.prompt_of(r).len()).sum()
    }

    /// Keeps recordings matching `pred`; prompts are untouched.
    pub fn retain_recordings(&self, mut pred: impl FnMut(&Recording, &Prompt) -> bool) -> Corpus {
        let recordings = self
            .recordings
            .iter()
            .filter(|r| pred(r, self.prompt_of(r)))
            .cloned()
            .collect();
        Corpus {
            prompts: self.prompts.clone(),
            recordings,
            index: self.index.clone(),
        }
    }

    pub fn to_manifest(&self) -> Manifest {
        Manifest {
            prompts: self
                .prompts
                .iter()
                .map(|p| PromptRecord {
                    id: p.id.clone(),
                    task: p.task,
                    exercise: p.exercise,
                    words: raw_of(&p.words),
                })
                .collect(),
            recordings: self
                .recordings
                .iter()
                .map(|r| RecordingRecord {
                    id: r.id.clone(),
                    prompt_id: r.prompt_id.clone(),
                    speaker_id: r.speaker_id.clone(),
                    status: r.status,
                    transcript: r.transcript.as_deref().map(raw_of),
                    hypotheses: r
                        .hypotheses
                        .iter()
                        .map(|(k, v)| (k.clone(), raw_of(v)))
                        .collect(),
                    confidences: r.confidences.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.to_manifest()).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// Writes the corpus as a JSON manifest.
    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }
}

fn raw_of(tokens: &[WordToken]) -> Vec<String> {
    tokens.iter().map(|t| t.raw.clone()).collect()
}

/// Keeps exactly the recordings whose status is in `keep`.
pub fn filter_recordings(corpus: &Corpus, keep: &BTreeSet<RecordingStatus>) -> Corpus {
    corpus.retain_recordings(|r, _| keep.contains(&r.status))
}

/// Serialized form of a corpus manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub prompts: Vec<PromptRecord>,
    pub recordings: Vec<RecordingRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptRecord {
    pub id: String,
    pub task: TaskType,
    pub exercise: ExerciseKind,
    pub words: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordingRecord {
    pub id: String,
    pub prompt_id: String,
    pub speaker_id: String,
    pub status: RecordingStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<Vec<String>>,
    #[serde(default)]
    pub hypotheses: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidences: Option<Vec<f64>>,
}

impl Manifest {
    /// Normalizes all tokens and validates the corpus invariants.
    pub fn into_corpus(self) -> Result<Corpus> {
        let prompts = self
            .prompts
            .into_iter()
            .map(|p| {
                if p.exercise != p.task.exercise() {
                    return Err(Error::ingest(
                        &p.id,
                        "exercise",
                        format!("{} prompts are {} exercises", p.task, p.task.exercise().as_str()),
                    ));
                }
                Prompt::new(p.id, p.task, normalize_tokens(&p.words))
            })
            .collect::<Result<Vec<_>>>()?;
        let recordings = self
            .recordings
            .into_iter()
            .map(|r| Recording {
                id: r.id,
                prompt_id: r.prompt_id,
                speaker_id: r.speaker_id,
                status: r.status,
                transcript: r.transcript.as_deref().map(normalize_tokens),
                hypotheses: r
                    .hypotheses
                    .into_iter()
                    .map(|(k, v)| (k, normalize_tokens(&v)))
                    .collect(),
                confidences: r.confidences,
            })
            .collect();
        Corpus::new(prompts, recordings)
    }
}

/// Parses a JSON manifest; errors report the offending record where possible.
pub fn parse_json_manifest(text: &str, path: &Path) -> Result<Corpus> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    for (section, field) in [("prompts", "prompt"), ("recordings", "recording")] {
        if let Some(items) = value.get(section).and_then(|v| v.as_array()) {
            for (i, item) in items.iter().enumerate() {
                let ok = if section == "prompts" {
                    PromptRecord::deserialize(item).map(drop)
                } else {
                    RecordingRecord::deserialize(item).map(drop)
                };
                if let Err(e) = ok {
                    let id = item
                        .get("id")
                        .and_then(|v| v.as_str())
                        .map(str::to_string)
                        .unwrap_or_else(|| format!("{field}[{i}]"));
                    return Err(Error::ingest(id, field, e.to_string()));
                }
            }
        }
    }
    let manifest: Manifest = serde_json::from_value(value).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    manifest.into_corpus()
}

/// Parses the flat TSV manifest format described in the module docs.
pub fn parse_tsv_manifest(text: &str, path: &Path) -> Result<Corpus> {
    let mut prompts: Vec<PromptRecord> = Vec::new();
    let mut recordings: Vec<RecordingRecord> = Vec::new();
    let mut rec_index: HashMap<String, usize> = HashMap::new();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        message: format!("line {line}: {message}"),
    };

    for (lineno, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l)) {
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let need = |n: usize| {
            if cols.len() < n {
                Err(parse_err(lineno, format!("`{}` needs at least {n} columns", cols[0])))
            } else {
                Ok(())
            }
        };
        let tokens = |from: usize| cols[from..].iter().map(|s| s.to_string()).collect::<Vec<_>>();
        match cols[0] {
            "prompt" => {
                need(5)?;
                prompts.push(PromptRecord {
                    id: cols[1].to_string(),
                    task: cols[2].parse().map_err(|e: Error| Error::ingest(cols[1], "task", e.to_string()))?,
                    exercise: cols[3]
                        .parse()
                        .map_err(|e: Error| Error::ingest(cols[1], "exercise", e.to_string()))?,
                    words: tokens(4),
                });
            }
            "recording" => {
                need(5)?;
                let status = cols[4]
                    .parse()
                    .map_err(|e: Error| Error::ingest(cols[1], "status", e.to_string()))?;
                rec_index.insert(cols[1].to_string(), recordings.len());
                recordings.push(RecordingRecord {
                    id: cols[1].to_string(),
                    prompt_id: cols[2].to_string(),
                    speaker_id: cols[3].to_string(),
                    status,
                    transcript: None,
                    hypotheses: BTreeMap::new(),
                    confidences: None,
                });
            }
            kind @ ("transcript" | "hypothesis" | "confidences") => {
                need(2)?;
                let Some(&ri) = rec_index.get(cols[1]) else {
                    return Err(Error::ingest(cols[1], "id", format!("`{kind}` line for an undeclared recording")));
                };
                let rec = &mut recordings[ri];
                match kind {
                    "transcript" => rec.transcript = Some(tokens(2)),
                    "hypothesis" => {
                        need(3)?;
                        rec.hypotheses.insert(cols[2].to_string(), tokens(3));
                    }
                    _ => {
                        let scores = cols[2..]
                            .iter()
                            .map(|s| s.trim().parse::<f64>())
                            .collect::<std::result::Result<Vec<_>, _>>()
                            .map_err(|e| Error::ingest(cols[1], "confidences", e.to_string()))?;
                        rec.confidences = Some(scores);
                    }
                }
            }
            other => return Err(parse_err(lineno, format!("unknown record kind `{other}`"))),
        }
    }
    Manifest {
        prompts,
        recordings,
    }
    .into_corpus()
}

/// Loads a corpus manifest. Files ending in `.tsv` use the flat format; anything else is JSON.
pub fn load_corpus(path: &Path) -> Result<Corpus> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("tsv")) {
        parse_tsv_manifest(&text, path)
    } else {
        parse_json_manifest(&text, path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WordCategory {
    Function,
    Content,
}

impl WordCategory {
    pub const ALL: [WordCategory; 2] = [WordCategory::Function, WordCategory::Content];

    pub fn as_str(self) -> &'static str {
        match self {
            WordCategory::Function => "function",
            WordCategory::Content => "content",
        }
    }
}

/// Normalized word forms treated as function words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FunctionLexicon {
    words: BTreeSet<String>,
}

impl FunctionLexicon {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        FunctionLexicon {
            words: words
                .into_iter()
                .filter_map(|w| normalize_token(w.as_ref()))
                .map(|t| t.normalized)
                .collect(),
        }
    }

    /// Reads one word per line. Blank lines and `#` comments are skipped.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        ))
    }

    pub fn contains(&self, normalized: &str) -> bool {
        self.words.contains(normalized)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

pub fn classify_word_category(token: &WordToken, lexicon: &FunctionLexicon) -> WordCategory {
    if lexicon.contains(&token.normalized) {
        WordCategory::Function
    } else {
        WordCategory::Content
    }
}

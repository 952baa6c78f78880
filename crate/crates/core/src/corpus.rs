//! Transcript parsing, trial splitting, normalization and document-term matrices.
//!
//! Transcripts are line oriented: `<ROLE>\t<text>` per utterance, `#` lines
//! carry `key: value` metadata, and a boundary line (by default
//! `=== TRIAL BOUNDARY ===`) separates the two trials of a session.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const DEFAULT_BOUNDARY_MARKER: &str = "=== TRIAL BOUNDARY ===";

/// English stopwords (the common `tm`/SMART-derived short list).
pub const DEFAULT_STOPWORDS: &[&str] = &[
    "i",
    "me",
    "my",
    "myself",
    "we",
    "our",
    "ours",
    "ourselves",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
    "he",
    "him",
    "his",
    "himself",
    "she",
    "her",
    "hers",
    "herself",
    "it",
    "its",
    "itself",
    "they",
    "them",
    "their",
    "theirs",
    "themselves",
    "what",
    "which",
    "who",
    "whom",
    "this",
    "that",
    "these",
    "those",
    "am",
    "is",
    "are",
    "was",
    "were",
    "be",
    "been",
    "being",
    "have",
    "has",
    "had",
    "having",
    "do",
    "does",
    "did",
    "doing",
    "would",
    "should",
    "could",
    "ought",
    "i'm",
    "you're",
    "he's",
    "she's",
    "it's",
    "we're",
    "they're",
    "i've",
    "you've",
    "we've",
    "they've",
    "i'd",
    "you'd",
    "he'd",
    "she'd",
    "we'd",
    "they'd",
    "i'll",
    "you'll",
    "he'll",
    "she'll",
    "we'll",
    "they'll",
    "isn't",
    "aren't",
    "wasn't",
    "weren't",
    "hasn't",
    "haven't",
    "hadn't",
    "doesn't",
    "don't",
    "didn't",
    "won't",
    "wouldn't",
    "shan't",
    "shouldn't",
    "can't",
    "cannot",
    "couldn't",
    "mustn't",
    "let's",
    "that's",
    "who's",
    "what's",
    "here's",
    "there's",
    "when's",
    "where's",
    "why's",
    "how's",
    "a",
    "an",
    "the",
    "and",
    "but",
    "if",
    "or",
    "because",
    "as",
    "until",
    "while",
    "of",
    "at",
    "by",
    "for",
    "with",
    "about",
    "against",
    "between",
    "into",
    "through",
    "during",
    "before",
    "after",
    "above",
    "below",
    "to",
    "from",
    "up",
    "down",
    "in",
    "out",
    "on",
    "off",
    "over",
    "under",
    "again",
    "further",
    "then",
    "once",
    "here",
    "there",
    "when",
    "where",
    "why",
    "how",
    "all",
    "any",
    "both",
    "each",
    "few",
    "more",
    "most",
    "other",
    "some",
    "such",
    "no",
    "nor",
    "not",
    "only",
    "own",
    "same",
    "so",
    "than",
    "too",
    "very",
];

/// Lines containing any of these (case-insensitive) are dropped as administrative text.
pub const DEFAULT_ADMIN_MARKERS: &[&str] = &["[admin]", "[system]", "experimenter\t"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Medic,
    Engineer,
    Transporter,
    Unknown,
}

impl Role {
    pub fn parse(tag: &str) -> Role {
        match tag.trim().to_ascii_lowercase().as_str() {
            "medic" => Role::Medic,
            "engineer" => Role::Engineer,
            "transporter" => Role::Transporter,
            _ => Role::Unknown,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Medic => "medic",
            Role::Engineer => "engineer",
            Role::Transporter => "transporter",
            Role::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub speaker_role: Role,
    pub text: String,
    /// Position within the trial, contiguous from 0.
    pub ordinal: usize,
    /// Number of normalized tokens; zero until the trial is normalized.
    pub token_count: usize,
    #[serde(default)]
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialIndex {
    One,
    Two,
}

impl fmt::Display for TrialIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrialIndex::One => "one",
            TrialIndex::Two => "two",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialTranscript {
    pub trial_id: String,
    pub team_id: String,
    pub trial_index: TrialIndex,
    pub utterances: Vec<Utterance>,
    #[serde(default)]
    pub score: Option<f64>,
}

impl TrialTranscript {
    /// Normalized tokens of the whole trial, in utterance order.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.utterances
            .iter()
            .flat_map(|u| u.tokens.iter().map(String::as_str))
    }

    pub fn total_tokens(&self) -> usize {
        self.utterances.iter().map(|u| u.token_count).sum()
    }

    /// Fills `tokens` and `token_count` of every utterance.
    pub fn normalize(&mut self, normalizer: &Normalizer) {
        for u in &mut self.utterances {
            u.tokens = normalizer.tokens(&u.text);
            u.token_count = u.tokens.len();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub stopword_list: Vec<String>,
    pub strip_punctuation: bool,
    pub strip_numbers: bool,
    pub lowercase: bool,
    pub min_term_corpus_count: usize,
    pub admin_markers: Vec<String>,
    pub boundary_markers: Vec<String>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            stopword_list: DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect(),
            strip_punctuation: true,
            strip_numbers: true,
            lowercase: true,
            min_term_corpus_count: 1,
            admin_markers: DEFAULT_ADMIN_MARKERS
                .iter()
                .map(|s| s.to_string())
                .collect(),
            boundary_markers: vec![DEFAULT_BOUNDARY_MARKER.to_string()],
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_term_corpus_count < 1 {
            return Err(invalid("min_term_corpus_count must be >= 1"));
        }
        if self.lowercase {
            if let Some(w) = self.stopword_list.iter().find(|w| w.to_lowercase() != **w) {
                return Err(invalid(format!("stopword {w:?} is not lowercase")));
            }
        }
        if self.boundary_markers.is_empty() {
            return Err(invalid("at least one trial boundary marker is required"));
        }
        Ok(())
    }

    pub fn normalizer(&self) -> Normalizer {
        Normalizer::new(self)
    }
}

/// Tokenizer compiled from a [`PreprocessConfig`].
///
/// Apostrophes are deleted ("don't" -> "dont"); every other punctuation or
/// symbol character becomes a token separator. Tokens containing a digit are
/// dropped whole. Stopwords are passed through the same character filter so
/// contractions in the list still match.
#[derive(Debug, Clone)]
pub struct Normalizer {
    lowercase: bool,
    strip_punctuation: bool,
    strip_numbers: bool,
    stopwords: HashSet<String>,
}

impl Normalizer {
    pub fn new(cfg: &PreprocessConfig) -> Self {
        let mut n = Self {
            lowercase: cfg.lowercase,
            strip_punctuation: cfg.strip_punctuation,
            strip_numbers: cfg.strip_numbers,
            stopwords: HashSet::new(),
        };
        let mut stopwords = HashSet::new();
        for w in &cfg.stopword_list {
            stopwords.extend(n.split_filtered(w));
        }
        n.stopwords = stopwords;
        n
    }

    fn split_filtered(&self, text: &str) -> Vec<String> {
        let text = if self.lowercase {
            text.to_lowercase()
        } else {
            text.to_string()
        };
        let filtered: String = if self.strip_punctuation {
            text.chars()
                .filter(|&c| c != '\'' && c != '\u{2019}')
                .map(|c| {
                    if c.is_alphanumeric() || c.is_whitespace() {
                        c
                    } else {
                        ' '
                    }
                })
                .collect()
        } else {
            text
        };
        filtered
            .split_whitespace()
            .filter(|t| !(self.strip_numbers && t.chars().any(char::is_numeric)))
            .map(str::to_string)
            .collect()
    }

    pub fn tokens(&self, text: &str) -> Vec<String> {
        self.split_filtered(text)
            .into_iter()
            .filter(|t| !self.stopwords.contains(t))
            .collect()
    }
}

pub fn normalize_tokens(text: &str, cfg: &PreprocessConfig) -> Vec<String> {
    Normalizer::new(cfg).tokens(text)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SessionEntry {
    Utterance {
        role: Role,
        text: String,
        line: usize,
    },
    Boundary {
        marker: String,
        line: usize,
    },
    Meta {
        key: String,
        value: String,
        line: usize,
    },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SessionTranscript {
    pub session_id: Option<String>,
    pub entries: Vec<SessionEntry>,
}

impl SessionTranscript {
    pub fn utterance_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| matches!(e, SessionEntry::Utterance { .. }))
            .count()
    }

    fn meta(&self, key: &str) -> Option<&str> {
        self.entries.iter().find_map(|e| match e {
            SessionEntry::Meta { key: k, value, .. } if k == key => Some(value.as_str()),
            _ => None,
        })
    }
}

pub fn parse_session_transcript(raw: &str, cfg: &PreprocessConfig) -> Result<SessionTranscript> {
    let admin: Vec<String> = cfg.admin_markers.iter().map(|m| m.to_lowercase()).collect();
    let mut session = SessionTranscript::default();
    for (i, line) in raw.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let lower = line.to_lowercase();
        if admin
            .iter()
            .any(|m| !m.is_empty() && lower.contains(m.as_str()))
        {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.split_once(':') {
                session.entries.push(SessionEntry::Meta {
                    key: k.trim().to_string(),
                    value: v.trim().to_string(),
                    line: line_no,
                });
            }
            continue;
        }
        if let Some(marker) = cfg
            .boundary_markers
            .iter()
            .find(|m| line.trim() == m.as_str())
        {
            session.entries.push(SessionEntry::Boundary {
                marker: marker.clone(),
                line: line_no,
            });
            continue;
        }
        let Some((role, text)) = line.split_once('\t') else {
            return Err(Error::Parse {
                line: line_no,
                message: "missing speaker separator (tab)".into(),
            });
        };
        session.entries.push(SessionEntry::Utterance {
            role: Role::parse(role),
            text: text.trim().to_string(),
            line: line_no,
        });
    }
    session.session_id = session.meta("session_id").map(str::to_string);
    Ok(session)
}

/// Partitions a session at its boundary markers into at most two trials.
///
/// A boundary followed by no further utterances closes the last trial and is
/// ignored. Trial ids are `<session>_T1` and `<session>_T2`; a `score` metadata
/// line applies to the trial it appears in.
pub fn split_into_trials(
    session: &SessionTranscript,
    boundary_markers: &[String],
) -> Result<Vec<TrialTranscript>> {
    if boundary_markers.is_empty() {
        return Err(invalid("boundary_markers must be non-empty"));
    }
    let session_id = session
        .session_id
        .clone()
        .unwrap_or_else(|| "session".into());
    let team_id = session
        .meta("team_id")
        .map(str::to_string)
        .unwrap_or_else(|| session_id.clone());

    let mut segments: Vec<(Vec<(Role, String)>, Option<f64>)> = vec![(Vec::new(), None)];
    let mut n_boundaries = 0;
    for entry in &session.entries {
        match entry {
            SessionEntry::Utterance { role, text, .. } => {
                segments.last_mut().unwrap().0.push((*role, text.clone()))
            }
            SessionEntry::Boundary { marker, .. } => {
                if boundary_markers.contains(marker) {
                    n_boundaries += 1;
                    segments.push((Vec::new(), None));
                }
            }
            SessionEntry::Meta { key, value, line } if key == "score" => {
                let score = value.parse::<f64>().map_err(|_| Error::Parse {
                    line: *line,
                    message: format!("score {value:?} is not a number"),
                })?;
                segments.last_mut().unwrap().1 = Some(score);
            }
            SessionEntry::Meta { .. } => {}
        }
    }
    if n_boundaries > 2 {
        return Err(invalid(format!(
            "session {session_id}: {n_boundaries} trial boundaries (at most 2 allowed)"
        )));
    }
    if segments.len() > 1 && segments.last().unwrap().0.is_empty() {
        segments.pop();
    }
    if segments.len() > 2 {
        return Err(invalid(format!(
            "session {session_id}: more than two trials"
        )));
    }
    segments
        .into_iter()
        .enumerate()
        .map(|(i, (utts, score))| {
            let trial_id = format!("{session_id}_T{}", i + 1);
            if utts.is_empty() {
                return Err(Error::EmptyTrial(trial_id));
            }
            Ok(TrialTranscript {
                trial_id,
                team_id: team_id.clone(),
                trial_index: if i == 0 {
                    TrialIndex::One
                } else {
                    TrialIndex::Two
                },
                utterances: utts
                    .into_iter()
                    .enumerate()
                    .map(|(ordinal, (speaker_role, text))| Utterance {
                        speaker_role,
                        text,
                        ordinal,
                        token_count: 0,
                        tokens: Vec::new(),
                    })
                    .collect(),
                score,
            })
        })
        .collect()
}

/// Collapses trials with identical normalized token sequences, keeping the
/// first occurrence.
pub fn deduplicate_trials(trials: Vec<TrialTranscript>) -> Vec<TrialTranscript> {
    let mut seen: HashSet<Vec<String>> = HashSet::new();
    trials
        .into_iter()
        .filter(|t| seen.insert(t.tokens().map(str::to_string).collect()))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new(terms: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(invalid(format!("duplicate vocabulary term {t:?}")));
            }
        }
        Ok(Self { terms, index })
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn id(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, id: usize) -> &str {
        &self.terms[id]
    }

    /// Sparse counts of in-vocabulary tokens, sorted by term id.
    pub fn count_tokens<'a>(&self, tokens: impl IntoIterator<Item = &'a str>) -> Vec<(usize, u32)> {
        let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
        for tok in tokens {
            if let Some(id) = self.id(tok) {
                *counts.entry(id).or_default() += 1;
            }
        }
        counts.into_iter().collect()
    }

    /// SHA-256 over the newline-joined term list, hex encoded.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for t in &self.terms {
            h.update(t.as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn build_vocabulary(trials: &[TrialTranscript], cfg: &PreprocessConfig) -> Result<Vocabulary> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in trials {
        for tok in t.tokens() {
            *counts.entry(tok).or_default() += 1;
        }
    }
    let terms: Vec<String> = counts
        .into_iter()
        .filter(|&(_, c)| c >= cfg.min_term_corpus_count)
        .map(|(t, _)| t.to_string())
        .collect();
    if terms.is_empty() {
        return Err(Error::DegenerateCorpus(
            "no term reaches the minimum corpus count".into(),
        ));
    }
    Vocabulary::new(terms)
}

/// Sparse document-term count matrix. Rows are sorted by term id.
#[derive(Debug, Clone, PartialEq)]
pub struct DocTermMatrix {
    pub doc_ids: Vec<String>,
    pub vocab: Vocabulary,
    pub rows: Vec<Vec<(usize, u32)>>,
}

impl DocTermMatrix {
    pub fn new(
        doc_ids: Vec<String>,
        vocab: Vocabulary,
        rows: Vec<Vec<(usize, u32)>>,
    ) -> Result<Self> {
        if doc_ids.len() != rows.len() {
            return Err(invalid("doc_ids and rows differ in length"));
        }
        for row in &rows {
            if row.iter().any(|&(t, _)| t >= vocab.len()) {
                return Err(invalid("term index out of range"));
            }
        }
        Ok(Self {
            doc_ids,
            vocab,
            rows,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_terms(&self) -> usize {
        self.vocab.len()
    }

    pub fn row_total(&self, d: usize) -> u64 {
        self.rows[d].iter().map(|&(_, c)| u64::from(c)).sum()
    }

    pub fn total_tokens(&self) -> u64 {
        (0..self.n_docs()).map(|d| self.row_total(d)).sum()
    }

    pub fn column_totals(&self) -> Vec<u64> {
        let mut totals = vec![0u64; self.n_terms()];
        for row in &self.rows {
            for &(t, c) in row {
                totals[t] += u64::from(c);
            }
        }
        totals
    }

    pub fn get(&self, d: usize, t: usize) -> u32 {
        self.rows[d]
            .binary_search_by_key(&t, |&(term, _)| term)
            .map(|i| self.rows[d][i].1)
            .unwrap_or(0)
    }

    pub fn to_json(&self) -> Result<String> {
        let triplets: Vec<[u64; 3]> = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(d, row)| {
                row.iter()
                    .map(move |&(t, c)| [d as u64, t as u64, u64::from(c)])
            })
            .collect();
        let doc = DtmJson {
            doc_ids: self.doc_ids.clone(),
            terms: self.vocab.terms().to_vec(),
            triplets,
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: DtmJson = serde_json::from_str(s)?;
        let vocab = Vocabulary::new(doc.terms)?;
        let mut rows: Vec<BTreeMap<usize, u32>> = vec![BTreeMap::new(); doc.doc_ids.len()];
        for [d, t, c] in doc.triplets {
            let d = d as usize;
            let row = rows
                .get_mut(d)
                .ok_or_else(|| invalid(format!("triplet row {d} out of range")))?;
            *row.entry(t as usize).or_default() += c as u32;
        }
        Self::new(
            doc.doc_ids,
            vocab,
            rows.into_iter().map(|r| r.into_iter().collect()).collect(),
        )
    }
}

#[derive(Serialize, Deserialize)]
struct DtmJson {
    doc_ids: Vec<String>,
    terms: Vec<String>,
    triplets: Vec<[u64; 3]>,
}

pub fn build_dtm(trials: &[TrialTranscript], vocab: &Vocabulary) -> Result<DocTermMatrix> {
    let rows: Vec<Vec<(usize, u32)>> = trials
        .iter()
        .map(|t| vocab.count_tokens(t.tokens()))
        .collect();
    let empty: Vec<&str> = trials
        .iter()
        .zip(&rows)
        .filter(|(_, r)| r.is_empty())
        .map(|(t, _)| t.trial_id.as_str())
        .collect();
    if !empty.is_empty() {
        return Err(Error::NoInVocabularyTokens(empty.join(", ")));
    }
    DocTermMatrix::new(
        trials.iter().map(|t| t.trial_id.clone()).collect(),
        vocab.clone(),
        rows,
    )
}

/// Output of [`preprocess_sessions`]: deduplicated trials and their matrix.
#[derive(Debug, Clone)]
pub struct PreparedCorpus {
    pub trials: Vec<TrialTranscript>,
    pub dtm: DocTermMatrix,
}

/// Split, normalize, deduplicate and vectorize a set of parsed sessions.
pub fn preprocess_sessions(
    sessions: &[SessionTranscript],
    cfg: &PreprocessConfig,
) -> Result<PreparedCorpus> {
    cfg.validate()?;
    let normalizer = cfg.normalizer();
    let mut trials = Vec::new();
    for s in sessions {
        for mut t in split_into_trials(s, &cfg.boundary_markers)? {
            t.normalize(&normalizer);
            trials.push(t);
        }
    }
    let trials = deduplicate_trials(trials);
    let mut ids = HashSet::new();
    if let Some(dup) = trials.iter().find(|t| !ids.insert(t.trial_id.as_str())) {
        return Err(invalid(format!("duplicate trial id {}", dup.trial_id)));
    }
    let vocab = build_vocabulary(&trials, cfg)?;
    let dtm = build_dtm(&trials, &vocab)?;
    Ok(PreparedCorpus { trials, dtm })
}

/// Reads every `*.txt` file of `dir` (sorted by name) as one session; the file
/// stem is the session id unless a `# session_id:` line overrides it.
pub fn load_sessions(dir: &Path, cfg: &PreprocessConfig) -> Result<Vec<SessionTranscript>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "txt"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let raw = std::fs::read_to_string(p)?;
            let mut s = parse_session_transcript(&raw, cfg).map_err(|e| match e {
                Error::Parse { line, message } => Error::Parse {
                    line,
                    message: format!("{}: {message}", p.display()),
                },
                other => other,
            })?;
            if s.session_id.is_none() {
                s.session_id = p.file_stem().map(|f| f.to_string_lossy().into_owned());
            }
            Ok(s)
        })
        .collect()
}

/// Renders trials back into the transcript format: one session file per team
/// with the two trials separated by the default boundary marker.
pub fn render_session(session_id: &str, team_id: &str, trials: &[&TrialTranscript]) -> String {
    let mut out = format!("# session_id: {session_id}\n# team_id: {team_id}\n");
    for (i, t) in trials.iter().enumerate() {
        if i > 0 {
            out.push_str(DEFAULT_BOUNDARY_MARKER);
            out.push('\n');
        }
        if let Some(score) = t.score {
            out.push_str(&format!("# score: {score}\n"));
        }
        for u in &t.utterances {
            out.push_str(u.speaker_role.as_str());
            out.push('\t');
            out.push_str(&u.text);
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg_with(stop: &[&str]) -> PreprocessConfig {
        PreprocessConfig {
            stopword_list: stop.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }

    fn trial(id: &str, texts: &[&str]) -> TrialTranscript {
        let cfg = cfg_with(&[]);
        let mut t = TrialTranscript {
            trial_id: id.into(),
            team_id: "team".into(),
            trial_index: TrialIndex::One,
            utterances: texts
                .iter()
                .enumerate()
                .map(|(i, s)| Utterance {
                    speaker_role: Role::Medic,
                    text: s.to_string(),
                    ordinal: i,
                    token_count: 0,
                    tokens: vec![],
                })
                .collect(),
            score: None,
        };
        t.normalize(&cfg.normalizer());
        t
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(
            normalize_tokens("Go to Room 2!", &cfg_with(&["to"])),
            vec!["go", "room"]
        );
        assert!(normalize_tokens("", &cfg_with(&[])).is_empty());
        assert_eq!(
            normalize_tokens("Okay, okay... CRITICAL victim!!", &cfg_with(&[])),
            vec!["okay", "okay", "critical", "victim"]
        );
        assert!(normalize_tokens("room2 r2d2", &cfg_with(&[])).is_empty());
        assert_eq!(
            normalize_tokens("Don't go", &PreprocessConfig::default()),
            vec!["go"]
        );
    }

    #[test]
    fn parse_empty_and_admin() {
        let cfg = PreprocessConfig::default();
        assert_eq!(
            parse_session_transcript("", &cfg)
                .unwrap()
                .utterance_count(),
            0
        );
        let raw = "medic\thello there\n[ADMIN]\tplease start the survey\n";
        assert_eq!(
            parse_session_transcript(raw, &cfg)
                .unwrap()
                .utterance_count(),
            1
        );
    }

    #[test]
    fn parse_reports_malformed_line() {
        let raw = "# session_id: s1\nmedic\tgo left\nengineer\tok\nno separator here\ntransporter\tfine\nmedic\tdone\n";
        let err = parse_session_transcript(raw, &PreprocessConfig::default()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn split_cases() {
        let cfg = PreprocessConfig::default();
        let markers = &cfg.boundary_markers;
        let two = parse_session_transcript(
            "medic\ta\n=== TRIAL BOUNDARY ===\n# score: 12.5\nengineer\tb\n",
            &cfg,
        )
        .unwrap();
        let trials = split_into_trials(&two, markers).unwrap();
        assert_eq!(trials.len(), 2);
        assert_eq!(trials[0].trial_index, TrialIndex::One);
        assert_eq!(trials[1].trial_index, TrialIndex::Two);
        assert_eq!(trials[1].score, Some(12.5));
        assert_eq!(trials[1].utterances[0].ordinal, 0);

        let one = parse_session_transcript("medic\ta\nmedic\tb\n", &cfg).unwrap();
        let trials = split_into_trials(&one, markers).unwrap();
        assert_eq!(trials.len(), 1);
        assert_eq!(trials[0].trial_index, TrialIndex::One);

        let first = parse_session_transcript("=== TRIAL BOUNDARY ===\nmedic\ta\n", &cfg).unwrap();
        assert!(matches!(
            split_into_trials(&first, markers),
            Err(Error::EmptyTrial(_))
        ));

        let three = parse_session_transcript(
            "medic\ta\n=== TRIAL BOUNDARY ===\nmedic\tb\n=== TRIAL BOUNDARY ===\nmedic\tc\n",
            &cfg,
        )
        .unwrap();
        assert!(split_into_trials(&three, markers).is_err());

        let trailing = parse_session_transcript(
            "medic\ta\n=== TRIAL BOUNDARY ===\nmedic\tb\n=== TRIAL BOUNDARY ===\n",
            &cfg,
        )
        .unwrap();
        assert_eq!(split_into_trials(&trailing, markers).unwrap().len(), 2);
    }

    #[test]
    fn dedup_keeps_first() {
        let a = trial("a", &["go left"]);
        let a2 = trial("a2", &["Go, left!"]);
        let b = trial("b", &["go right"]);
        let out = deduplicate_trials(vec![a, a2, b]);
        let ids: Vec<_> = out.iter().map(|t| t.trial_id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
        assert!(deduplicate_trials(vec![]).is_empty());
    }

    #[test]
    fn vocabulary_min_count() {
        let trials = [trial("1", &["a b"]), trial("2", &["b c"])];
        let v = build_vocabulary(&trials, &cfg_with(&[])).unwrap();
        assert_eq!(v.terms(), ["a", "b", "c"]);
        let cfg2 = PreprocessConfig {
            min_term_corpus_count: 2,
            ..cfg_with(&[])
        };
        assert_eq!(build_vocabulary(&trials, &cfg2).unwrap().terms(), ["b"]);

        let stop_cfg = cfg_with(&["a", "b", "c"]);
        let mut t = trial("x", &["a b c"]);
        t.normalize(&stop_cfg.normalizer());
        assert!(matches!(
            build_vocabulary(&[t], &stop_cfg),
            Err(Error::DegenerateCorpus(_))
        ));
    }

    #[test]
    fn dtm_counts_and_errors() {
        let vocab = Vocabulary::new(vec!["b".into(), "c".into()]).unwrap();
        let dtm = build_dtm(&[trial("1", &["b b c"])], &vocab).unwrap();
        assert_eq!(dtm.rows[0], vec![(0, 2), (1, 1)]);
        let err = build_dtm(&[trial("oov", &["x y"])], &vocab).unwrap_err();
        assert!(err.to_string().contains("oov"));
    }

    #[test]
    fn dtm_three_doc_hand_tally() {
        let trials = [
            trial("d1", &["victim room victim", "critical"]),
            trial("d2", &["room room hallway"]),
            trial("d3", &["critical victim", "hallway victim"]),
        ];
        let vocab = build_vocabulary(&trials, &cfg_with(&[])).unwrap();
        assert_eq!(vocab.terms(), ["critical", "hallway", "room", "victim"]);
        let dtm = build_dtm(&trials, &vocab).unwrap();
        let dense: Vec<Vec<u32>> = (0..3)
            .map(|d| (0..4).map(|t| dtm.get(d, t)).collect())
            .collect();
        assert_eq!(
            dense,
            vec![vec![1, 0, 1, 2], vec![0, 1, 2, 0], vec![1, 1, 0, 2]]
        );
        for (d, t) in trials.iter().enumerate() {
            assert_eq!(dtm.row_total(d), t.total_tokens() as u64);
        }
    }

    #[test]
    fn dtm_json_is_sorted_and_roundtrips() {
        let trials = [trial("d1", &["b a"]), trial("d2", &["a a"])];
        let vocab = build_vocabulary(&trials, &cfg_with(&[])).unwrap();
        let dtm = build_dtm(&trials, &vocab).unwrap();
        let json = dtm.to_json().unwrap();
        assert_eq!(
            json,
            r#"{"doc_ids":["d1","d2"],"terms":["a","b"],"triplets":[[0,0,1],[0,1,1],[1,0,2]]}"#
        );
        assert_eq!(DocTermMatrix::from_json(&json).unwrap(), dtm);
    }

    #[test]
    fn stopwords_must_be_lowercase() {
        let cfg = cfg_with(&["The"]);
        assert!(cfg.validate().is_err());
    }
}

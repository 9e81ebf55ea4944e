//! Corpus data model and on-disk formats.
//!
//! Three formats, all UTF-8 with LF line endings and strict decoding
//! (invalid bytes are rejected with their offset, never substituted):
//!
//! * plain text — one segment per line; empty lines are empty segments;
//! * noised-corpus JSONL — one object per line:
//!   `{index, text, base, noise:{type,p,seed,layout,…}, perturbations:[…]}`;
//! * score files — TSV `index<TAB>score`, `#` comment lines permitted.
//!
//! Segment indices are the alignment key everywhere; there is no fuzzy text
//! matching anywhere in the toolkit.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datagen::MixSpec;
use crate::error::{Error, Result};
use crate::fsutil;
use crate::noise::{NoiseSpec, NoiseType, PerturbationAction, PerturbationRecord};

/// One line of a corpus. `text` never contains a newline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub index: usize,
    pub text: String,
}

impl Segment {
    pub fn new(index: usize, text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if text.contains('\n') {
            return Err(Error::InvalidParam(format!("segment {index} contains a newline")));
        }
        Ok(Segment { index, text })
    }
}

/// Aligned source/target segments for one language pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelCorpus {
    pub source: Vec<Segment>,
    pub target: Option<Vec<Segment>>,
    /// `(source, target)` BCP-47 tags.
    pub language_pair: (String, String),
}

impl ParallelCorpus {
    pub fn new(
        source: Vec<Segment>,
        target: Option<Vec<Segment>>,
        language_pair: (String, String),
    ) -> Result<Self> {
        if let Some(target) = &target {
            if target.len() != source.len() {
                return Err(Error::IndexMismatch(format!(
                    "source has {} segments, target has {}",
                    source.len(),
                    target.len()
                )));
            }
        }
        for (i, seg) in source.iter().enumerate() {
            if seg.index != i {
                return Err(Error::IndexMismatch(format!(
                    "source segment at position {i} has index {}",
                    seg.index
                )));
            }
        }
        Ok(ParallelCorpus { source, target, language_pair })
    }

    pub fn load(
        source_path: &Path,
        target_path: Option<&Path>,
        language_pair: (String, String),
    ) -> Result<Self> {
        let source = load_plain_corpus(source_path)?;
        let target = target_path.map(load_plain_corpus).transpose()?;
        Self::new(source, target, language_pair)
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }
}

/// Splits text into segments, one per line. A trailing newline does not
/// produce a final empty segment; interior empty lines do.
pub fn segments_from_text(text: &str) -> Vec<Segment> {
    if text.is_empty() {
        return Vec::new();
    }
    let mut lines: Vec<&str> = text.split('\n').collect();
    if lines.last() == Some(&"") {
        lines.pop();
    }
    lines
        .into_iter()
        .enumerate()
        .map(|(index, text)| Segment { index, text: text.to_string() })
        .collect()
}

/// Renders segments back to plain text, terminating every line with LF.
pub fn segments_to_text(segments: &[Segment]) -> String {
    let mut out = String::new();
    for seg in segments {
        out.push_str(&seg.text);
        out.push('\n');
    }
    out
}

/// Loads a plain-text corpus: one segment per line, in order.
pub fn load_plain_corpus(path: &Path) -> Result<Vec<Segment>> {
    Ok(segments_from_text(&fsutil::read_utf8(path)?))
}

/// Writes a plain-text corpus atomically.
pub fn write_plain_corpus(path: &Path, segments: &[Segment]) -> Result<()> {
    fsutil::write_atomic(path, segments_to_text(segments).as_bytes())
}

// ---------------------------------------------------------------------------
// Lexical-normalization corpora (one `raw<TAB>normalized` token per line,
// blank line between sentences).

/// Parses lexical-normalization data into `(raw, normalized)` sentence
/// pairs. Raw tokens are space-joined; normalized tokens with empty
/// normalization (deletions) are omitted, and 1-to-many normalizations keep
/// their internal spaces.
pub fn parse_lexnorm(src: &str, origin: &str) -> Result<Vec<(String, String)>> {
    let malformed = |line: usize, message: String| Error::Malformed {
        format: "lexnorm",
        path: origin.into(),
        line,
        message,
    };

    let mut sentences = Vec::new();
    let mut raw_tokens: Vec<&str> = Vec::new();
    let mut norm_tokens: Vec<&str> = Vec::new();

    for (lineno, line) in src.lines().enumerate() {
        let lineno = lineno + 1;
        if line.is_empty() {
            if !raw_tokens.is_empty() {
                sentences.push((raw_tokens.join(" "), norm_tokens.join(" ")));
                raw_tokens.clear();
                norm_tokens.clear();
            }
            continue;
        }
        let Some((raw, norm)) = line.split_once('\t') else {
            return Err(malformed(lineno, format!("no tab separator in `{line}`")));
        };
        if norm.contains('\t') {
            return Err(malformed(lineno, "more than one tab on a token line".into()));
        }
        if raw.is_empty() {
            return Err(malformed(lineno, "empty raw token".into()));
        }
        raw_tokens.push(raw);
        if !norm.is_empty() {
            norm_tokens.push(norm);
        }
    }
    if !raw_tokens.is_empty() {
        sentences.push((raw_tokens.join(" "), norm_tokens.join(" ")));
    }
    Ok(sentences)
}

/// Loads a lexical-normalization corpus as aligned `(raw, normalized)`
/// segment pairs.
pub fn load_lexnorm_corpus(path: &Path) -> Result<Vec<(Segment, Segment)>> {
    let src = fsutil::read_utf8(path)?;
    let pairs = parse_lexnorm(&src, &path.display().to_string())?;
    Ok(pairs
        .into_iter()
        .enumerate()
        .map(|(index, (raw, norm))| {
            (Segment { index, text: raw }, Segment { index, text: norm })
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Noised corpora with provenance.

/// How a noised corpus was produced: one noise type at level `p`, or a
/// per-token categorical mix of types.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseProvenance {
    Single(NoiseSpec),
    Mix(MixSpec),
}

impl NoiseProvenance {
    pub fn seed(&self) -> u64 {
        match self {
            NoiseProvenance::Single(s) => s.seed,
            NoiseProvenance::Mix(m) => m.seed,
        }
    }

    pub fn layout(&self) -> Option<&str> {
        match self {
            NoiseProvenance::Single(s) => s.layout.as_deref(),
            NoiseProvenance::Mix(m) => m.layout.as_deref(),
        }
    }
}

/// One noised segment: the base segment's index, the perturbed text, and
/// the per-token provenance records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoisedSegment {
    pub index: usize,
    pub text: String,
    pub perturbations: Vec<PerturbationRecord>,
}

/// A noised corpus, reconstructible by replaying each segment's records
/// against the base corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisedCorpus {
    /// Identifier of the base corpus.
    pub base: String,
    pub provenance: NoiseProvenance,
    /// SHA-256 of the keyboard layout file used for key noise, when any.
    pub layout_checksum: Option<String>,
    pub segments: Vec<NoisedSegment>,
}

impl NoisedCorpus {
    /// Tokens sampled for perturbation (applied or no-op).
    pub fn attempted(&self) -> usize {
        self.segments.iter().map(|s| s.perturbations.len()).sum()
    }

    /// Tokens actually changed.
    pub fn applied(&self) -> usize {
        self.segments
            .iter()
            .flat_map(|s| &s.perturbations)
            .filter(|r| r.is_applied())
            .count()
    }

    /// Total whitespace-delimited tokens in the corpus.
    pub fn tokens(&self) -> usize {
        self.segments
            .iter()
            .map(|s| crate::tokenize::word_count(&s.text))
            .sum()
    }

    /// The noised texts as plain segments.
    pub fn to_segments(&self) -> Vec<Segment> {
        self.segments
            .iter()
            .map(|s| Segment { index: s.index, text: s.text.clone() })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct NoisedLineWire {
    index: usize,
    text: String,
    base: String,
    noise: NoiseWire,
    perturbations: Vec<PerturbationWire>,
}

#[derive(Serialize, Deserialize, Clone, PartialEq)]
struct NoiseWire {
    #[serde(rename = "type")]
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rates: Option<BTreeMap<String, f64>>,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    layout: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    layout_checksum: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct PerturbationWire {
    token: usize,
    #[serde(rename = "type")]
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pos: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
    applied: bool,
}

impl NoiseWire {
    fn from_provenance(provenance: &NoiseProvenance, layout_checksum: &Option<String>) -> Self {
        match provenance {
            NoiseProvenance::Single(s) => NoiseWire {
                kind: s.noise_type.id().to_string(),
                p: Some(s.p),
                rates: None,
                seed: s.seed,
                layout: s.layout.clone(),
                layout_checksum: layout_checksum.clone(),
            },
            NoiseProvenance::Mix(m) => NoiseWire {
                kind: "mix".to_string(),
                p: None,
                rates: Some(m.rates.iter().map(|(t, r)| (t.id().to_string(), *r)).collect()),
                seed: m.seed,
                layout: m.layout.clone(),
                layout_checksum: layout_checksum.clone(),
            },
        }
    }

    fn into_provenance(self, schema_err: &impl Fn(String) -> Error) -> Result<(NoiseProvenance, Option<String>)> {
        let checksum = self.layout_checksum;
        if self.kind == "mix" {
            let rates = self
                .rates
                .ok_or_else(|| schema_err("mix noise without `rates`".into()))?
                .into_iter()
                .map(|(k, v)| Ok((k.parse::<NoiseType>().map_err(|e| schema_err(e.to_string()))?, v)))
                .collect::<Result<BTreeMap<NoiseType, f64>>>()?;
            let spec = MixSpec { rates, seed: self.seed, layout: self.layout };
            spec.validate().map_err(|e| schema_err(e.to_string()))?;
            Ok((NoiseProvenance::Mix(spec), checksum))
        } else {
            let noise_type = self.kind.parse::<NoiseType>().map_err(|e| schema_err(e.to_string()))?;
            let p = self.p.ok_or_else(|| schema_err("single noise without `p`".into()))?;
            let spec = NoiseSpec { noise_type, p, seed: self.seed, layout: self.layout };
            spec.validate().map_err(|e| schema_err(e.to_string()))?;
            Ok((NoiseProvenance::Single(spec), checksum))
        }
    }
}

impl PerturbationWire {
    fn from_record(r: &PerturbationRecord) -> Self {
        match &r.action {
            PerturbationAction::Applied { char_position, detail } => PerturbationWire {
                token: r.token_index,
                kind: r.noise_type.id().to_string(),
                pos: Some(*char_position),
                detail: Some(detail.clone()),
                applied: true,
            },
            PerturbationAction::Noop => PerturbationWire {
                token: r.token_index,
                kind: r.noise_type.id().to_string(),
                pos: None,
                detail: None,
                applied: false,
            },
        }
    }

    fn into_record(self, schema_err: &impl Fn(String) -> Error) -> Result<PerturbationRecord> {
        let noise_type = self.kind.parse::<NoiseType>().map_err(|e| schema_err(e.to_string()))?;
        let action = if self.applied {
            let char_position = self
                .pos
                .ok_or_else(|| schema_err("applied perturbation without `pos`".into()))?;
            let detail = self
                .detail
                .ok_or_else(|| schema_err("applied perturbation without `detail`".into()))?;
            PerturbationAction::Applied { char_position, detail }
        } else {
            PerturbationAction::Noop
        };
        Ok(PerturbationRecord { token_index: self.token, noise_type, action })
    }
}

/// Wire form of one perturbation record, shared with the dataset-gen
/// provenance sidecar.
pub(crate) fn perturbation_to_wire(record: &PerturbationRecord) -> impl Serialize {
    PerturbationWire::from_record(record)
}

pub(crate) fn perturbation_from_value(
    value: serde_json::Value,
    schema_err: &impl Fn(String) -> Error,
) -> Result<PerturbationRecord> {
    let wire: PerturbationWire =
        serde_json::from_value(value).map_err(|e| schema_err(e.to_string()))?;
    wire.into_record(schema_err)
}

/// Serializes a noised corpus as JSONL, one segment object per line.
pub fn noised_to_jsonl(corpus: &NoisedCorpus) -> String {
    let noise = NoiseWire::from_provenance(&corpus.provenance, &corpus.layout_checksum);
    let mut out = String::new();
    for seg in &corpus.segments {
        let line = NoisedLineWire {
            index: seg.index,
            text: seg.text.clone(),
            base: corpus.base.clone(),
            noise: noise.clone(),
            perturbations: seg.perturbations.iter().map(PerturbationWire::from_record).collect(),
        };
        out.push_str(&serde_json::to_string(&line).expect("JSONL serialization cannot fail"));
        out.push('\n');
    }
    out
}

/// Parses a noised corpus from JSONL text.
pub fn noised_from_jsonl(src: &str, origin: &str) -> Result<NoisedCorpus> {
    let mut segments = Vec::new();
    let mut header: Option<(String, NoiseWire)> = None;

    for (lineno, line) in src.lines().enumerate() {
        let lineno = lineno + 1;
        let schema_err = |message: String| Error::Schema {
            path: origin.into(),
            line: lineno,
            message,
        };
        let wire: NoisedLineWire =
            serde_json::from_str(line).map_err(|e| schema_err(e.to_string()))?;
        match &header {
            None => header = Some((wire.base.clone(), wire.noise.clone())),
            Some((base, noise)) => {
                if *base != wire.base || *noise != wire.noise {
                    return Err(schema_err("base/noise metadata differs between lines".into()));
                }
            }
        }
        let perturbations = wire
            .perturbations
            .into_iter()
            .map(|p| p.into_record(&schema_err))
            .collect::<Result<Vec<_>>>()?;
        segments.push(NoisedSegment { index: wire.index, text: wire.text, perturbations });
    }

    match header {
        Some((base, noise)) => {
            let schema_err = |message: String| Error::Schema {
                path: origin.into(),
                line: 1,
                message,
            };
            let (provenance, layout_checksum) = noise.into_provenance(&schema_err)?;
            Ok(NoisedCorpus { base, provenance, layout_checksum, segments })
        }
        None => Ok(NoisedCorpus {
            base: String::new(),
            provenance: NoiseProvenance::Single(NoiseSpec {
                noise_type: NoiseType::Swap,
                p: 0.0,
                seed: 0,
                layout: None,
            }),
            layout_checksum: None,
            segments,
        }),
    }
}

pub fn write_noised_jsonl(corpus: &NoisedCorpus, path: &Path) -> Result<()> {
    fsutil::write_atomic(path, noised_to_jsonl(corpus).as_bytes())
}

pub fn read_noised_jsonl(path: &Path) -> Result<NoisedCorpus> {
    let src = fsutil::read_utf8(path)?;
    noised_from_jsonl(&src, &path.display().to_string())
}

// ---------------------------------------------------------------------------
// Per-segment score files.

/// Per-segment scores for one (system, metric) run. Rows are kept sorted by
/// segment index; indices are unique and scores finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreFile {
    pub system: String,
    pub metric: String,
    rows: Vec<(usize, f64)>,
}

impl ScoreFile {
    pub fn new(
        system: impl Into<String>,
        metric: impl Into<String>,
        mut rows: Vec<(usize, f64)>,
    ) -> Result<Self> {
        rows.sort_by_key(|(i, _)| *i);
        for pair in rows.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::IndexMismatch(format!(
                    "duplicate score for segment {}",
                    pair[0].0
                )));
            }
        }
        for (index, score) in &rows {
            if !score.is_finite() {
                return Err(Error::InvalidParam(format!(
                    "non-finite score {score} for segment {index}"
                )));
            }
        }
        Ok(ScoreFile { system: system.into(), metric: metric.into(), rows })
    }

    pub fn rows(&self) -> &[(usize, f64)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn scores(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|(_, s)| *s)
    }

    /// Fixed-order corpus mean.
    pub fn mean(&self) -> Result<f64> {
        if self.rows.is_empty() {
            return Err(Error::EmptyCorpus(format!(
                "score file {}/{} has no rows",
                self.system, self.metric
            )));
        }
        Ok(self.scores().sum::<f64>() / self.rows.len() as f64)
    }

    /// Whether `other` covers exactly the same segment indices.
    pub fn same_indices(&self, other: &ScoreFile) -> bool {
        self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| a.0 == b.0)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# system: {}\n", self.system));
        out.push_str(&format!("# metric: {}\n", self.metric));
        for (index, score) in &self.rows {
            out.push_str(&format!("{index}\t{score}\n"));
        }
        out
    }

    pub fn from_tsv(src: &str, origin: &str) -> Result<Self> {
        let mut system = String::new();
        let mut metric = String::new();
        let mut rows = Vec::new();
        for (lineno, line) in src.lines().enumerate() {
            let lineno = lineno + 1;
            let malformed = |message: String| Error::Malformed {
                format: "score tsv",
                path: origin.into(),
                line: lineno,
                message,
            };
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                if let Some(v) = comment.strip_prefix("system:") {
                    system = v.trim().to_string();
                } else if let Some(v) = comment.strip_prefix("metric:") {
                    metric = v.trim().to_string();
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let Some((index, score)) = line.split_once('\t') else {
                return Err(malformed(format!("no tab separator in `{line}`")));
            };
            let index: usize = index
                .parse()
                .map_err(|_| malformed(format!("bad segment index `{index}`")))?;
            let score: f64 = score
                .parse()
                .map_err(|_| malformed(format!("bad score `{score}`")))?;
            rows.push((index, score));
        }
        ScoreFile::new(system, metric, rows)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fsutil::write_atomic(path, self.to_tsv().as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let src = fsutil::read_utf8(path)?;
        Self::from_tsv(&src, &path.display().to_string())
    }
}

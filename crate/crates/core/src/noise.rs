//! Deterministic character-level perturbation of whitespace tokens.
//!
//! Four noise types, applied per token at noise level `p`:
//!
//! * `swap` — transpose one adjacent pair of code points,
//! * `dupe` — duplicate one code point,
//! * `drop` — delete one code point,
//! * `key`  — replace one code point with a neighboring key on a keyboard
//!   layout; with a jamo-mode layout (Dubeolsik) the token is decomposed to
//!   compatibility jamo first and recomposed afterwards.
//!
//! Each token is perturbed with probability `p` (one Bernoulli draw from
//! its own derived stream) and at most once. Sampled tokens that are not
//! eligible (too short, no mapped key) are recorded as no-ops: the text is
//! unchanged but the attempt still counts toward rate statistics.
//! Whitespace runs are preserved byte-exactly, and perturbation operates on
//! Unicode scalar values (combining marks are individual units).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{NoiseProvenance, NoisedCorpus, NoisedSegment, Segment};
use crate::error::{Error, Result};
use crate::hangul;
use crate::layout::{KeyboardLayout, PerturbSpace};
use crate::rng::{derive_rng, derive_seed};
use crate::tokenize::{split_pieces, Piece};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseType {
    Swap,
    Dupe,
    Drop,
    Key,
}

impl NoiseType {
    pub const ALL: [NoiseType; 4] = [
        NoiseType::Swap,
        NoiseType::Dupe,
        NoiseType::Drop,
        NoiseType::Key,
    ];

    pub fn id(self) -> &'static str {
        match self {
            NoiseType::Swap => "swap",
            NoiseType::Dupe => "dupe",
            NoiseType::Drop => "drop",
            NoiseType::Key => "key",
        }
    }
}

impl fmt::Display for NoiseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for NoiseType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "swap" => Ok(NoiseType::Swap),
            "dupe" => Ok(NoiseType::Dupe),
            "drop" => Ok(NoiseType::Drop),
            "key" => Ok(NoiseType::Key),
            other => Err(Error::InvalidParam(format!("unknown noise type `{other}`"))),
        }
    }
}

/// A single-type noising configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub noise_type: NoiseType,
    /// Per-token perturbation probability, in `[0, 1]`.
    pub p: f64,
    pub seed: u64,
    /// Keyboard layout (builtin id or file path); required iff `noise_type`
    /// is `key`.
    pub layout: Option<String>,
}

impl NoiseSpec {
    pub fn new(noise_type: NoiseType, p: f64, seed: u64, layout: Option<String>) -> Result<Self> {
        let spec = NoiseSpec { noise_type, p, seed, layout };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.p.is_finite() || !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidParam(format!("noise level p={} outside [0, 1]", self.p)));
        }
        match (self.noise_type, &self.layout) {
            (NoiseType::Key, None) => {
                Err(Error::InvalidParam("key noise requires a keyboard layout".into()))
            }
            (t, Some(_)) if t != NoiseType::Key => Err(Error::InvalidParam(format!(
                "layout given but noise type is `{t}`; layouts apply to key noise only"
            ))),
            _ => Ok(()),
        }
    }
}

/// What happened to one sampled token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PerturbationAction {
    /// The token was changed at `char_position` (code-point offset; jamo
    /// offset for jamo-mode key noise). `detail` holds the affected code
    /// point(s): the original pair for swap, the duplicated / dropped code
    /// point, or the replacement for key noise.
    Applied { char_position: usize, detail: String },
    /// The token was sampled but ineligible; text unchanged.
    Noop,
}

/// Provenance of one token's perturbation attempt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationRecord {
    pub token_index: usize,
    pub noise_type: NoiseType,
    pub action: PerturbationAction,
}

impl PerturbationRecord {
    pub fn is_applied(&self) -> bool {
        matches!(self.action, PerturbationAction::Applied { .. })
    }
}

// ---------------------------------------------------------------------------
// Deterministic single-position edits (also used for provenance replay).

/// Transposes the code points at `(i, i+1)`.
pub fn swap_at(token: &str, i: usize) -> Option<String> {
    let mut chars: Vec<char> = token.chars().collect();
    if i + 1 >= chars.len() {
        return None;
    }
    chars.swap(i, i + 1);
    Some(chars.into_iter().collect())
}

/// Duplicates the code point at `i` in place.
pub fn dupe_at(token: &str, i: usize) -> Option<String> {
    let chars: Vec<char> = token.chars().collect();
    if i >= chars.len() {
        return None;
    }
    let mut out: Vec<char> = Vec::with_capacity(chars.len() + 1);
    out.extend_from_slice(&chars[..=i]);
    out.push(chars[i]);
    out.extend_from_slice(&chars[i + 1..]);
    Some(out.into_iter().collect())
}

/// Deletes the code point at `i`.
pub fn drop_at(token: &str, i: usize) -> Option<String> {
    let mut chars: Vec<char> = token.chars().collect();
    if i >= chars.len() {
        return None;
    }
    chars.remove(i);
    Some(chars.into_iter().collect())
}

/// Replaces the code point at `i` with `replacement`.
pub fn key_at(token: &str, i: usize, replacement: char) -> Option<String> {
    let mut chars: Vec<char> = token.chars().collect();
    if i >= chars.len() {
        return None;
    }
    chars[i] = replacement;
    Some(chars.into_iter().collect())
}

// ---------------------------------------------------------------------------
// Random perturbation primitives. Each returns `(new_token, position,
// detail)` or `None` when the token is ineligible (the no-op signal).

/// Swaps one uniformly chosen adjacent pair. Needs ≥ 2 code points.
pub fn perturb_swap(token: &str, rng: &mut impl Rng) -> Option<(String, usize, String)> {
    let n = token.chars().count();
    if n < 2 {
        return None;
    }
    let i = rng.random_range(0..n - 1);
    let pair: String = token.chars().skip(i).take(2).collect();
    Some((swap_at(token, i).unwrap(), i, pair))
}

/// Duplicates one uniformly chosen code point. Needs ≥ 1 code point.
pub fn perturb_dupe(token: &str, rng: &mut impl Rng) -> Option<(String, usize, String)> {
    let n = token.chars().count();
    if n < 1 {
        return None;
    }
    let i = rng.random_range(0..n);
    let c = token.chars().nth(i).unwrap();
    Some((dupe_at(token, i).unwrap(), i, c.to_string()))
}

/// Deletes one uniformly chosen code point. Needs ≥ 2 code points so that
/// tokens never vanish entirely.
pub fn perturb_drop(token: &str, rng: &mut impl Rng) -> Option<(String, usize, String)> {
    let n = token.chars().count();
    if n < 2 {
        return None;
    }
    let i = rng.random_range(0..n);
    let c = token.chars().nth(i).unwrap();
    Some((drop_at(token, i).unwrap(), i, c.to_string()))
}

/// Replaces one uniformly chosen mapped code point with a uniformly chosen
/// neighboring key. Adjacency lookup folds case; the replacement is
/// re-capitalized when the original was uppercase.
pub fn perturb_key(
    token: &str,
    rng: &mut impl Rng,
    layout: &KeyboardLayout,
) -> Option<(String, usize, String)> {
    let eligible: Vec<(usize, char)> = token
        .chars()
        .enumerate()
        .filter(|(_, c)| layout.has_neighbors(*c))
        .collect();
    if eligible.is_empty() {
        return None;
    }
    let (i, original) = eligible[rng.random_range(0..eligible.len())];
    let neighbors = layout.neighbors(original).unwrap();
    let neighbor = neighbors[rng.random_range(0..neighbors.len())];
    let replacement = recase(neighbor, original);
    Some((key_at(token, i, replacement).unwrap(), i, replacement.to_string()))
}

fn recase(replacement: char, original: char) -> char {
    if !original.is_uppercase() {
        return replacement;
    }
    let mut upper = replacement.to_uppercase();
    match (upper.next(), upper.next()) {
        (Some(u), None) => u,
        _ => replacement,
    }
}

// ---------------------------------------------------------------------------

/// A validated, layout-resolved noising configuration ready to run.
pub struct NoiseEngine {
    spec: NoiseSpec,
    layout: Option<Arc<KeyboardLayout>>,
}

impl NoiseEngine {
    pub fn new(spec: NoiseSpec) -> Result<Self> {
        spec.validate()?;
        let layout = match &spec.layout {
            Some(id) => Some(KeyboardLayout::resolve(id)?),
            None => None,
        };
        Ok(NoiseEngine { spec, layout })
    }

    /// Uses an already-loaded layout instead of resolving `spec.layout`.
    pub fn with_layout(spec: NoiseSpec, layout: Arc<KeyboardLayout>) -> Result<Self> {
        spec.validate()?;
        Ok(NoiseEngine { spec, layout: Some(layout) })
    }

    pub fn spec(&self) -> &NoiseSpec {
        &self.spec
    }

    pub fn layout(&self) -> Option<&Arc<KeyboardLayout>> {
        self.layout.as_ref()
    }

    /// Perturbs one segment. Pure in `(spec, segment_index, text)`.
    pub fn noise_segment(&self, segment_index: usize, text: &str) -> (String, Vec<PerturbationRecord>) {
        let mut out = String::with_capacity(text.len() + 8);
        let mut records = Vec::new();
        for piece in split_pieces(text) {
            match piece {
                Piece::Whitespace(w) => out.push_str(w),
                Piece::Token(t) => {
                    let mut rng = derive_rng(self.spec.seed, segment_index as u64, t.token_index as u64);
                    if rng.random::<f64>() < self.spec.p {
                        let outcome = apply_noise(
                            self.spec.noise_type,
                            t.text,
                            &mut rng,
                            self.layout.as_deref(),
                        );
                        match outcome {
                            Some((new_token, char_position, detail)) => {
                                out.push_str(&new_token);
                                records.push(PerturbationRecord {
                                    token_index: t.token_index,
                                    noise_type: self.spec.noise_type,
                                    action: PerturbationAction::Applied { char_position, detail },
                                });
                            }
                            None => {
                                out.push_str(t.text);
                                records.push(PerturbationRecord {
                                    token_index: t.token_index,
                                    noise_type: self.spec.noise_type,
                                    action: PerturbationAction::Noop,
                                });
                            }
                        }
                    } else {
                        out.push_str(t.text);
                    }
                }
            }
        }
        (out, records)
    }

    /// Perturbs a whole corpus. Segments are processed in parallel; the
    /// output is identical regardless of thread count.
    pub fn noise_corpus(&self, base_id: &str, segments: &[Segment]) -> NoisedCorpus {
        let noised: Vec<NoisedSegment> = segments
            .par_iter()
            .map(|seg| {
                let (text, perturbations) = self.noise_segment(seg.index, &seg.text);
                NoisedSegment { index: seg.index, text, perturbations }
            })
            .collect();
        NoisedCorpus {
            base: base_id.to_string(),
            provenance: NoiseProvenance::Single(self.spec.clone()),
            layout_checksum: self.layout.as_ref().map(|l| l.checksum.clone()),
            segments: noised,
        }
    }
}

/// Applies one noise type to one token with the given stream. `layout` must
/// be present for key noise (engines validate this at construction).
pub(crate) fn apply_noise(
    noise_type: NoiseType,
    token: &str,
    rng: &mut impl Rng,
    layout: Option<&KeyboardLayout>,
) -> Option<(String, usize, String)> {
    match noise_type {
        NoiseType::Swap => perturb_swap(token, rng),
        NoiseType::Dupe => perturb_dupe(token, rng),
        NoiseType::Drop => perturb_drop(token, rng),
        NoiseType::Key => {
            let layout = layout.expect("key noise without a layout; spec validation missed it");
            match layout.space {
                PerturbSpace::Chars => perturb_key(token, rng, layout),
                PerturbSpace::Jamo => {
                    let jamo = hangul::decompose(token);
                    perturb_key(&jamo, rng, layout)
                        .map(|(perturbed, pos, detail)| (hangul::compose(&perturbed), pos, detail))
                }
            }
        }
    }
}

/// The ten-level noise ladder: `p = 0.1, 0.2, …, 1.0`, each level noised
/// with a seed derived from `(seed, level index)`.
pub fn make_noise_ladder(
    base_id: &str,
    segments: &[Segment],
    noise_type: NoiseType,
    layout: Option<String>,
    seed: u64,
) -> Result<Vec<NoisedCorpus>> {
    let resolved = match &layout {
        Some(id) => Some(KeyboardLayout::resolve(id)?),
        None => None,
    };
    (0..10u64)
        .map(|level| {
            let p = (level + 1) as f64 / 10.0;
            let spec = NoiseSpec {
                noise_type,
                p,
                seed: derive_seed(seed, level),
                layout: layout.clone(),
            };
            let engine = match &resolved {
                Some(l) => NoiseEngine::with_layout(spec, Arc::clone(l))?,
                None => NoiseEngine::new(spec)?,
            };
            Ok(engine.noise_corpus(base_id, segments))
        })
        .collect()
}

/// Replays perturbation records against a base segment, reproducing the
/// noised text. `layout` is required when key records were produced by a
/// jamo-mode layout.
pub fn replay_segment(
    base_text: &str,
    records: &[PerturbationRecord],
    layout: Option<&KeyboardLayout>,
) -> Result<String> {
    let mut by_token: std::collections::HashMap<usize, &PerturbationRecord> = std::collections::HashMap::new();
    for r in records {
        if by_token.insert(r.token_index, r).is_some() {
            return Err(Error::InvalidParam(format!(
                "two perturbation records for token {}",
                r.token_index
            )));
        }
    }

    let mut out = String::with_capacity(base_text.len() + 8);
    let mut max_token = 0;
    for piece in split_pieces(base_text) {
        match piece {
            Piece::Whitespace(w) => out.push_str(w),
            Piece::Token(t) => {
                max_token = t.token_index + 1;
                match by_token.get(&t.token_index) {
                    None | Some(PerturbationRecord { action: PerturbationAction::Noop, .. }) => {
                        out.push_str(t.text)
                    }
                    Some(r) => out.push_str(&replay_token(t.text, r, layout)?),
                }
            }
        }
    }
    if let Some(bad) = by_token.keys().find(|&&i| i >= max_token) {
        return Err(Error::InvalidParam(format!(
            "perturbation record for token {bad} but segment has {max_token} tokens"
        )));
    }
    Ok(out)
}

fn replay_token(
    token: &str,
    record: &PerturbationRecord,
    layout: Option<&KeyboardLayout>,
) -> Result<String> {
    let PerturbationAction::Applied { char_position, detail } = &record.action else {
        return Ok(token.to_string());
    };
    let pos = *char_position;
    let bad = |msg: String| Error::InvalidParam(format!("token {}: {msg}", record.token_index));
    let check_detail = |actual: &str| -> Result<()> {
        if actual != detail {
            Err(bad(format!("record detail `{detail}` does not match base text `{actual}`")))
        } else {
            Ok(())
        }
    };

    match record.noise_type {
        NoiseType::Swap => {
            let pair: String = token.chars().skip(pos).take(2).collect();
            check_detail(&pair)?;
            swap_at(token, pos).ok_or_else(|| bad(format!("swap position {pos} out of bounds")))
        }
        NoiseType::Dupe => {
            let c: String = token.chars().skip(pos).take(1).collect();
            check_detail(&c)?;
            dupe_at(token, pos).ok_or_else(|| bad(format!("dupe position {pos} out of bounds")))
        }
        NoiseType::Drop => {
            let c: String = token.chars().skip(pos).take(1).collect();
            check_detail(&c)?;
            drop_at(token, pos).ok_or_else(|| bad(format!("drop position {pos} out of bounds")))
        }
        NoiseType::Key => {
            let mut detail_chars = detail.chars();
            let replacement = detail_chars
                .next()
                .filter(|_| detail_chars.next().is_none())
                .ok_or_else(|| bad(format!("key detail `{detail}` is not one code point")))?;
            let jamo_mode = layout.is_some_and(|l| l.space == PerturbSpace::Jamo);
            if jamo_mode {
                let jamo = hangul::decompose(token);
                let replaced = key_at(&jamo, pos, replacement)
                    .ok_or_else(|| bad(format!("key position {pos} out of jamo bounds")))?;
                Ok(hangul::compose(&replaced))
            } else {
                key_at(token, pos, replacement)
                    .ok_or_else(|| bad(format!("key position {pos} out of bounds")))
            }
        }
    }
}

//! Noisy training and validation corpus generation.
//!
//! Mixed noise assigns each token at most one noise type via a single
//! categorical draw over the per-type rates (with the remaining mass left
//! clean), so rates of 0.15 for each of the four types corrupt an expected
//! 60% of tokens with no token carrying two perturbations.
//!
//! Subsampling shuffles the corpus once per seed and emits a prefix, so
//! sample sets of increasing size from one seed are nested: the smaller
//! output files are byte prefixes of the larger ones.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    segments_to_text, NoiseProvenance, NoisedCorpus, NoisedSegment, ParallelCorpus, Segment,
};
use crate::error::{Error, Result};
use crate::fsutil;
use crate::layout::KeyboardLayout;
use crate::noise::{apply_noise, NoiseType, PerturbationAction, PerturbationRecord};
use crate::rng::{derive_rng, DOMAIN_SUBSAMPLE};
use crate::tokenize::{split_pieces, Piece};

/// Per-type noising rates applied as one categorical draw per token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixSpec {
    /// Rate per noise type, each in `[0, 1]`; the sum must not exceed 1.
    pub rates: BTreeMap<NoiseType, f64>,
    pub seed: u64,
    /// Keyboard layout; required iff the key rate is positive.
    pub layout: Option<String>,
}

impl MixSpec {
    /// The same rate for every noise type (key noise included iff a layout
    /// is given).
    pub fn uniform(rate: f64, seed: u64, layout: Option<String>) -> Result<Self> {
        let types: &[NoiseType] = if layout.is_some() {
            &NoiseType::ALL
        } else {
            &[NoiseType::Swap, NoiseType::Dupe, NoiseType::Drop]
        };
        let spec = MixSpec {
            rates: types.iter().map(|&t| (t, rate)).collect(),
            seed,
            layout,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let mut sum = 0.0;
        for (&t, &r) in &self.rates {
            if !r.is_finite() || !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidParam(format!("rate {r} for {t} outside [0, 1]")));
            }
            sum += r;
        }
        if sum > 1.0 + 1e-12 {
            return Err(Error::InvalidParam(format!("noise rates sum to {sum} > 1")));
        }
        let key_rate = self.rates.get(&NoiseType::Key).copied().unwrap_or(0.0);
        if key_rate > 0.0 && self.layout.is_none() {
            return Err(Error::InvalidParam("key rate > 0 requires a keyboard layout".into()));
        }
        if key_rate == 0.0 && self.layout.is_some() {
            return Err(Error::InvalidParam(
                "layout given but key rate is zero; layouts apply to key noise only".into(),
            ));
        }
        Ok(())
    }

    /// Total probability that a token is assigned any noise type.
    pub fn total_rate(&self) -> f64 {
        self.rates.values().sum()
    }
}

/// A validated, layout-resolved mixed-noise configuration.
pub struct MixEngine {
    spec: MixSpec,
    layout: Option<Arc<KeyboardLayout>>,
}

impl MixEngine {
    pub fn new(spec: MixSpec) -> Result<Self> {
        spec.validate()?;
        let layout = match &spec.layout {
            Some(id) => Some(KeyboardLayout::resolve(id)?),
            None => None,
        };
        Ok(MixEngine { spec, layout })
    }

    pub fn spec(&self) -> &MixSpec {
        &self.spec
    }

    pub fn layout(&self) -> Option<&Arc<KeyboardLayout>> {
        self.layout.as_ref()
    }

    /// Assigns each token at most one noise type by a single categorical
    /// draw in fixed type order, then applies it.
    pub fn noise_segment(&self, segment_index: usize, text: &str) -> (String, Vec<PerturbationRecord>) {
        let mut out = String::with_capacity(text.len() + 8);
        let mut records = Vec::new();
        for piece in split_pieces(text) {
            match piece {
                Piece::Whitespace(w) => out.push_str(w),
                Piece::Token(t) => {
                    let mut rng = derive_rng(self.spec.seed, segment_index as u64, t.token_index as u64);
                    let draw = rng.random::<f64>();
                    match self.assign(draw) {
                        None => out.push_str(t.text),
                        Some(noise_type) => {
                            let outcome =
                                apply_noise(noise_type, t.text, &mut rng, self.layout.as_deref());
                            match outcome {
                                Some((new_token, char_position, detail)) => {
                                    out.push_str(&new_token);
                                    records.push(PerturbationRecord {
                                        token_index: t.token_index,
                                        noise_type,
                                        action: PerturbationAction::Applied { char_position, detail },
                                    });
                                }
                                None => {
                                    out.push_str(t.text);
                                    records.push(PerturbationRecord {
                                        token_index: t.token_index,
                                        noise_type,
                                        action: PerturbationAction::Noop,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        (out, records)
    }

    fn assign(&self, draw: f64) -> Option<NoiseType> {
        let mut cumulative = 0.0;
        for noise_type in NoiseType::ALL {
            let rate = self.rates_for(noise_type);
            if rate <= 0.0 {
                continue;
            }
            cumulative += rate;
            if draw < cumulative {
                return Some(noise_type);
            }
        }
        None
    }

    fn rates_for(&self, t: NoiseType) -> f64 {
        self.spec.rates.get(&t).copied().unwrap_or(0.0)
    }

    pub fn noise_corpus(&self, base_id: &str, segments: &[Segment]) -> NoisedCorpus {
        use rayon::prelude::*;
        let noised: Vec<NoisedSegment> = segments
            .par_iter()
            .map(|seg| {
                let (text, perturbations) = self.noise_segment(seg.index, &seg.text);
                NoisedSegment { index: seg.index, text, perturbations }
            })
            .collect();
        NoisedCorpus {
            base: base_id.to_string(),
            provenance: NoiseProvenance::Mix(self.spec.clone()),
            layout_checksum: self.layout.as_ref().map(|l| l.checksum.clone()),
            segments: noised,
        }
    }
}

/// Mixed-noise version of a corpus: one categorical draw per token.
pub fn mix_noise(base_id: &str, segments: &[Segment], mix: &MixSpec) -> Result<NoisedCorpus> {
    Ok(MixEngine::new(mix.clone())?.noise_corpus(base_id, segments))
}

// ---------------------------------------------------------------------------
// Training pairs.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    /// Noised source paired with the clean target-language segment.
    Translation,
    /// Noised text paired with its own clean original.
    Correction,
}

/// One training example plus the provenance needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPair {
    pub input: Segment,
    pub output: Segment,
    pub task: TaskKind,
    /// Index of the originating segment in the full base corpus.
    pub source_index: usize,
    pub perturbations: Vec<PerturbationRecord>,
}

/// A seeded uniform subsample without replacement: a shuffled prefix of
/// `0..n`. Prefixes are nested across `k` for a fixed seed.
pub fn subsample_indices(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k > n {
        return Err(Error::InvalidParam(format!("sample size {k} exceeds corpus size {n}")));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = derive_rng(seed, DOMAIN_SUBSAMPLE, 0);
    indices.shuffle(&mut rng);
    indices.truncate(k);
    Ok(indices)
}

/// Translation finetuning pairs: subsampled sources noised by `mix`,
/// targets untouched.
pub fn make_mt_training_set(
    corpus: &ParallelCorpus,
    mix: &MixSpec,
    sample_size: usize,
) -> Result<Vec<TrainingPair>> {
    let target = corpus
        .target
        .as_ref()
        .ok_or_else(|| Error::InvalidParam("translation training needs a target side".into()))?;
    let engine = MixEngine::new(mix.clone())?;
    let indices = subsample_indices(corpus.len(), sample_size, mix.seed)?;
    Ok(indices
        .into_iter()
        .enumerate()
        .map(|(position, source_index)| {
            let (noised, perturbations) =
                engine.noise_segment(source_index, &corpus.source[source_index].text);
            TrainingPair {
                input: Segment { index: position, text: noised },
                output: Segment { index: position, text: target[source_index].text.clone() },
                task: TaskKind::Translation,
                source_index,
                perturbations,
            }
        })
        .collect())
}

/// Correction finetuning pairs: noised text as input, the original clean
/// text as output.
pub fn make_correction_training_set(
    source: &[Segment],
    mix: &MixSpec,
    sample_size: usize,
) -> Result<Vec<TrainingPair>> {
    let engine = MixEngine::new(mix.clone())?;
    let indices = subsample_indices(source.len(), sample_size, mix.seed)?;
    Ok(indices
        .into_iter()
        .enumerate()
        .map(|(position, source_index)| {
            let (noised, perturbations) = engine.noise_segment(source_index, &source[source_index].text);
            TrainingPair {
                input: Segment { index: position, text: noised },
                output: Segment { index: position, text: source[source_index].text.clone() },
                task: TaskKind::Correction,
                source_index,
                perturbations,
            }
        })
        .collect())
}

/// A development set for noisy finetuning: the clean corpus concatenated
/// with a mix-noised copy of itself.
#[derive(Debug, Clone)]
pub struct ValidationSet {
    /// `2n` segments: the clean half followed by the noised half. Targets,
    /// when present, are duplicated unchanged.
    pub corpus: ParallelCorpus,
    /// Provenance of the noised half, indexed by base segment.
    pub provenance: NoisedCorpus,
}

/// Concatenates `dev` with a copy noised at `per_type_rate` for each noise
/// type (key noise included iff a layout is given).
pub fn make_validation_set(
    dev: &ParallelCorpus,
    per_type_rate: f64,
    seed: u64,
    layout: Option<String>,
) -> Result<ValidationSet> {
    let mix = MixSpec::uniform(per_type_rate, seed, layout)?;
    let engine = MixEngine::new(mix)?;
    let noised = engine.noise_corpus("dev", &dev.source);

    let n = dev.len();
    let mut source = dev.source.clone();
    source.extend(noised.segments.iter().map(|s| Segment {
        index: s.index + n,
        text: s.text.clone(),
    }));
    let target = dev.target.as_ref().map(|t| {
        let mut doubled = t.clone();
        doubled.extend(t.iter().map(|seg| Segment { index: seg.index + n, text: seg.text.clone() }));
        doubled
    });

    Ok(ValidationSet {
        corpus: ParallelCorpus::new(source, target, dev.language_pair.clone())?,
        provenance: noised,
    })
}

// ---------------------------------------------------------------------------
// On-disk format: `<name>.input.txt`, `<name>.output.txt`,
// `<name>.provenance.jsonl`, `<name>.manifest.json`.

#[derive(Serialize, Deserialize)]
struct PairProvenanceWire {
    index: usize,
    source_index: usize,
    perturbations: Vec<serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
struct TrainingManifest {
    name: String,
    task: TaskKind,
    size: usize,
    seed: u64,
    rates: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    layout: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    layout_checksum: Option<String>,
    sources: Vec<SourceChecksum>,
}

#[derive(Serialize, Deserialize)]
struct SourceChecksum {
    path: String,
    sha256: String,
}

/// Paths produced by [`write_training_set`].
#[derive(Debug, Clone)]
pub struct TrainingSetFiles {
    pub input: PathBuf,
    pub output: PathBuf,
    pub provenance: PathBuf,
    pub manifest: PathBuf,
}

/// Writes a training set as two aligned plain-text files, a JSONL
/// provenance sidecar, and a manifest recording seed, rates, and source
/// checksums.
pub fn write_training_set(
    dir: &Path,
    name: &str,
    pairs: &[TrainingPair],
    mix: &MixSpec,
    source_files: &[PathBuf],
) -> Result<TrainingSetFiles> {
    let files = TrainingSetFiles {
        input: dir.join(format!("{name}.input.txt")),
        output: dir.join(format!("{name}.output.txt")),
        provenance: dir.join(format!("{name}.provenance.jsonl")),
        manifest: dir.join(format!("{name}.manifest.json")),
    };

    let inputs: Vec<Segment> = pairs.iter().map(|p| p.input.clone()).collect();
    let outputs: Vec<Segment> = pairs.iter().map(|p| p.output.clone()).collect();
    fsutil::write_atomic(&files.input, segments_to_text(&inputs).as_bytes())?;
    fsutil::write_atomic(&files.output, segments_to_text(&outputs).as_bytes())?;

    let mut provenance = String::new();
    for pair in pairs {
        let wire = PairProvenanceWire {
            index: pair.input.index,
            source_index: pair.source_index,
            perturbations: pair
                .perturbations
                .iter()
                .map(|r| serde_json::to_value(crate::corpus::perturbation_to_wire(r)).unwrap())
                .collect(),
        };
        provenance.push_str(&serde_json::to_string(&wire).unwrap());
        provenance.push('\n');
    }
    fsutil::write_atomic(&files.provenance, provenance.as_bytes())?;

    let layout_checksum = match &mix.layout {
        Some(id) => Some(KeyboardLayout::resolve(id)?.checksum.clone()),
        None => None,
    };
    let manifest = TrainingManifest {
        name: name.to_string(),
        task: pairs.first().map(|p| p.task).unwrap_or(TaskKind::Correction),
        size: pairs.len(),
        seed: mix.seed,
        rates: mix.rates.iter().map(|(t, r)| (t.id().to_string(), *r)).collect(),
        layout: mix.layout.clone(),
        layout_checksum,
        sources: source_files
            .iter()
            .map(|p| {
                Ok(SourceChecksum {
                    path: p.display().to_string(),
                    sha256: fsutil::sha256_file(p)?,
                })
            })
            .collect::<Result<Vec<_>>>()?,
    };
    fsutil::write_atomic(
        &files.manifest,
        (serde_json::to_string_pretty(&manifest).unwrap() + "\n").as_bytes(),
    )?;
    Ok(files)
}

/// Reads back the `(index, source_index, perturbations)` sidecar written by
/// [`write_training_set`].
pub fn read_provenance_sidecar(path: &Path) -> Result<Vec<(usize, usize, Vec<PerturbationRecord>)>> {
    let src = fsutil::read_utf8(path)?;
    let mut out = Vec::new();
    for (lineno, line) in src.lines().enumerate() {
        let schema_err = |message: String| Error::Schema {
            path: path.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let wire: PairProvenanceWire =
            serde_json::from_str(line).map_err(|e| schema_err(e.to_string()))?;
        let records = wire
            .perturbations
            .into_iter()
            .map(|v| crate::corpus::perturbation_from_value(v, &schema_err))
            .collect::<Result<Vec<_>>>()?;
        out.push((wire.index, wire.source_index, records));
    }
    Ok(out)
}

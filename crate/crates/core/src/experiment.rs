//! Manifest-driven experiments: noise ladders, external translation runs,
//! scoring, slope fits, and report emission, with checksum-based resume.
//!
//! The manifest is TOML:
//!
//! ```toml
//! name = "demo"
//! seed = 42
//! lang_pair = ["en", "en"]
//!
//! [corpus]
//! id = "sample"
//! source = "data/clean.txt"
//! reference = "source"          # "source", or a path to reference lines
//!
//! [[systems]]
//! id = "copy-mt"
//! kind = "translator"
//! command = ["noisekit", "worker", "translator", "copy"]
//!
//! [[ladders]]
//! noise_type = "swap"
//! # layout = "qwerty"           # required for key noise
//!
//! [[metrics]]
//! kind = "chrf"                 # chrf | bleu | external
//! # scorer = "some-scorer-id"   # for kind = "external"
//!
//! [policy]
//! source = "clean_source"
//! ```
//!
//! Output tree under the chosen root:
//! `<name>/corpora/*.{txt,jsonl}`, `<name>/<system>/<corpus-id>/{output.txt,
//! run.json, scores/*.tsv}`, `<name>/report/{robustness.csv, *.svg}`.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use crate::analysis::{build_trajectory, fit_slope, ReportEntry};
use crate::corpus::{self, ScoreFile, Segment};
use crate::error::{Error, Result};
use crate::fsutil;
use crate::metrics::{bleu_sentence, chrf_sentence, BleuParams, ChrfParams};
use crate::noise::{make_noise_ladder, NoiseType};
use crate::pipeline::{
    score_run, ExternalSystemSpec, ScorableRun, SourcePolicy, SystemKind,
};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    pub name: String,
    pub seed: u64,
    /// `(source, target)` language tags passed to translators.
    pub lang_pair: (String, String),
    pub corpus: CorpusDecl,
    pub systems: Vec<ExternalSystemSpec>,
    pub ladders: Vec<LadderDecl>,
    pub metrics: Vec<MetricDecl>,
    #[serde(default)]
    pub policy: PolicyDecl,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusDecl {
    pub id: String,
    pub source: PathBuf,
    /// `"source"` scores hypotheses against the clean source text (the
    /// copy-translator demo setup); otherwise a path to reference lines.
    /// Omit for reference-free (QE) scoring.
    pub reference: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderDecl {
    pub noise_type: NoiseType,
    pub layout: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MetricDecl {
    Chrf,
    Bleu,
    External { scorer: String },
}

impl MetricDecl {
    fn id(&self) -> String {
        match self {
            MetricDecl::Chrf => "chrf".into(),
            MetricDecl::Bleu => "bleu".into(),
            MetricDecl::External { scorer } => scorer.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PolicyDecl {
    #[serde(default)]
    pub source: SourcePolicy,
}

impl ExperimentManifest {
    pub fn from_toml(src: &str, origin: &str) -> Result<Self> {
        let manifest: ExperimentManifest = toml::from_str(src)
            .map_err(|e| Error::InvalidParam(format!("{origin}: {e}")))?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fsutil::read_utf8(path)?, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::InvalidParam(format!("bad experiment name `{}`", self.name)));
        }
        if self.ladders.is_empty() {
            return Err(Error::InvalidParam("experiment declares no ladders".into()));
        }
        if self.metrics.is_empty() {
            return Err(Error::InvalidParam("experiment declares no metrics".into()));
        }
        for system in &self.systems {
            system.validate()?;
        }
        if !self.systems.iter().any(|s| s.kind == SystemKind::Translator) {
            return Err(Error::InvalidParam("experiment declares no translator".into()));
        }
        for metric in &self.metrics {
            if let MetricDecl::External { scorer } = metric {
                let found = self
                    .systems
                    .iter()
                    .any(|s| s.kind == SystemKind::Scorer && &s.id == scorer);
                if !found {
                    return Err(Error::InvalidParam(format!(
                        "metric references unknown scorer `{scorer}`"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Everything an experiment produced, plus the report entries.
#[derive(Debug)]
pub struct ExperimentReport {
    pub entries: Vec<ReportEntry>,
    pub files: Vec<PathBuf>,
    pub external_calls: usize,
}

fn native_scores(
    metric: &MetricDecl,
    corpus_id: &str,
    outputs: &[Segment],
    references: &[Segment],
) -> Result<ScoreFile> {
    let rows: Vec<(usize, f64)> = outputs
        .par_iter()
        .zip(references.par_iter())
        .map(|(hyp, reference)| {
            let score = match metric {
                MetricDecl::Chrf => chrf_sentence(&hyp.text, &reference.text, &ChrfParams::default()),
                MetricDecl::Bleu => {
                    bleu_sentence(&hyp.text, &reference.text, &BleuParams::default())?
                }
                MetricDecl::External { .. } => unreachable!("native scoring of external metric"),
            };
            Ok((hyp.index, score))
        })
        .collect::<Result<Vec<_>>>()?;
    ScoreFile::new(corpus_id, metric.id(), rows)
}

/// Runs the whole experiment under `root`. Completed runs are skipped via
/// checksums, so re-running a finished experiment performs zero external
/// invocations and leaves every byte unchanged.
pub fn run_experiment(manifest: &ExperimentManifest, root: &Path) -> Result<ExperimentReport> {
    let dir = root.join(&manifest.name);
    let source = corpus::load_plain_corpus(&manifest.corpus.source)?;
    if source.is_empty() {
        return Err(Error::EmptyCorpus(format!(
            "experiment corpus {} is empty",
            manifest.corpus.source.display()
        )));
    }
    let references: Option<Vec<Segment>> = match &manifest.corpus.reference {
        None => None,
        Some(r) if r == "source" => Some(source.clone()),
        Some(path) => {
            let refs = corpus::load_plain_corpus(Path::new(path))?;
            if refs.len() != source.len() {
                return Err(Error::IndexMismatch(format!(
                    "{} references for {} source segments",
                    refs.len(),
                    source.len()
                )));
            }
            Some(refs)
        }
    };

    // Materialize corpora: the clean text plus each ladder as JSONL.
    let corpora_dir = dir.join("corpora");
    corpus::write_plain_corpus(&corpora_dir.join("clean.txt"), &source)?;
    let mut ladder_runs: Vec<(String, f64, String, Vec<Segment>)> = Vec::new(); // (corpus-id, p, noise label, segments)
    for ladder in &manifest.ladders {
        let rungs = make_noise_ladder(
            &manifest.corpus.id,
            &source,
            ladder.noise_type,
            ladder.layout.clone(),
            manifest.seed,
        )?;
        for (i, rung) in rungs.iter().enumerate() {
            let p = (i + 1) as f64 / 10.0;
            let corpus_id = format!("{}-p{:.1}", ladder.noise_type, p);
            corpus::write_noised_jsonl(rung, &corpora_dir.join(format!("{corpus_id}.jsonl")))?;
            ladder_runs.push((corpus_id, p, ladder.noise_type.id().to_string(), rung.to_segments()));
        }
    }

    let translators: Vec<&ExternalSystemSpec> = manifest
        .systems
        .iter()
        .filter(|s| s.kind == SystemKind::Translator)
        .collect();
    let scorers: Vec<&ExternalSystemSpec> = manifest
        .systems
        .iter()
        .filter(|s| s.kind == SystemKind::Scorer)
        .collect();

    let (src_lang, tgt_lang) = (&manifest.lang_pair.0, &manifest.lang_pair.1);
    let mut entries = Vec::new();
    let mut external_calls = 0usize;

    for translator in &translators {
        let system_root = dir.join(&translator.id);
        let clean_dir = system_root.join("clean");
        let rungs: Vec<(&str, &[Segment])> = ladder_runs
            .iter()
            .map(|(corpus_id, _, _, inputs)| (corpus_id.as_str(), inputs.as_slice()))
            .collect();
        let mut outcomes = crate::pipeline::translate_ladder(
            translator,
            &source,
            &rungs,
            src_lang,
            tgt_lang,
            &system_root,
        )?;
        external_calls += outcomes.iter().filter(|o| !o.resumed).count();
        let clean_run = outcomes.remove(0);

        let rung_outcomes: Vec<_> = ladder_runs
            .iter()
            .zip(outcomes)
            .map(|((corpus_id, p, noise_label, inputs), outcome)| {
                (corpus_id.clone(), *p, noise_label.clone(), system_root.join(corpus_id), inputs, outcome)
            })
            .collect();

        for metric in &manifest.metrics {
            let score_one = |corpus_id: &str,
                             run_dir: &Path,
                             actual_source: &[Segment],
                             outputs: &[Segment]|
             -> Result<ScoreFile> {
                match metric {
                    MetricDecl::External { scorer } => {
                        let spec = scorers
                            .iter()
                            .find(|s| &s.id == scorer)
                            .expect("validated scorer id");
                        let run = ScorableRun {
                            corpus_id,
                            dir: run_dir,
                            outputs,
                            actual_source,
                            clean_source: &source,
                        };
                        score_run(spec, &run, manifest.policy.source, references.as_deref())
                    }
                    _ => {
                        let refs = references.as_ref().ok_or_else(|| {
                            Error::InvalidParam(format!(
                                "native metric `{}` needs corpus references",
                                metric.id()
                            ))
                        })?;
                        let file = native_scores(metric, corpus_id, outputs, refs)?;
                        file.write(&run_dir.join("scores").join(format!("{}.tsv", metric.id())))?;
                        Ok(file)
                    }
                }
            };

            let clean_scores = score_one("clean", &clean_dir, &source, &clean_run.outputs)?;

            // group rungs by noise label into trajectories
            let mut by_label: std::collections::BTreeMap<String, Vec<(f64, ScoreFile)>> =
                std::collections::BTreeMap::new();
            for (corpus_id, p, noise_label, run_dir, inputs, outcome) in &rung_outcomes {
                let scores = score_one(corpus_id, run_dir, inputs, &outcome.outputs)?;
                by_label.entry(noise_label.clone()).or_default().push((*p, scores));
            }
            for (noise_label, runs) in by_label {
                let trajectory = build_trajectory(
                    &translator.id,
                    metric.id(),
                    &noise_label,
                    &clean_scores,
                    &runs,
                )?;
                let fit = fit_slope(&trajectory)?;
                entries.push(ReportEntry { trajectory, fit });
            }
        }
    }

    let files = crate::analysis::emit_report(&dir.join("report"), &entries, &[])?;
    Ok(ExperimentReport { entries, files, external_calls })
}

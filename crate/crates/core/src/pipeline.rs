//! External translators, correctors, and scorers over a line-oriented
//! subprocess protocol, plus run persistence and oracle selection.
//!
//! Protocol: the child process reads one JSON object per line on stdin
//! (translator `{src, src_lang, tgt_lang}`, corrector `{src, lang}`, scorer
//! `{src, mt, ref?}`) and writes exactly one response line per request, in
//! order: the output text for translators/correctors, a decimal score for
//! scorers. In-flight requests are bounded by `batch_size`; a response that
//! does not arrive within `timeout` fails the run. Failed runs persist
//! partial output for debugging and are rerun wholesale (no mid-run
//! retries).
//!
//! Run directory layout: `runs/<experiment>/<system>/<corpus-id>/` holding
//! `output.txt`, `run.json`, and `scores/<metric>.tsv`. `run.json` records
//! input/output checksums so completed runs are skipped on re-invocation;
//! it deliberately contains no timing, so reruns are byte-identical (wall
//! time is reported on the in-memory record only).

use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::str::FromStr;
use std::sync::mpsc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::corpus::{self, ScoreFile, Segment};
use crate::error::{Error, Result};
use crate::fsutil;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Translator,
    Corrector,
    Scorer,
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "translator" => Ok(SystemKind::Translator),
            "corrector" => Ok(SystemKind::Corrector),
            "scorer" => Ok(SystemKind::Scorer),
            other => Err(Error::InvalidParam(format!("unknown system kind `{other}`"))),
        }
    }
}

/// Declaration of an external system reachable via the line protocol.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExternalSystemSpec {
    pub id: String,
    pub kind: SystemKind,
    /// Argv of the child process.
    pub command: Vec<String>,
    /// Per-response timeout in seconds.
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    /// Maximum unanswered requests in flight.
    #[serde(default = "default_batch")]
    pub batch_size: usize,
}

fn default_timeout() -> f64 {
    300.0
}

fn default_batch() -> usize {
    32
}

impl ExternalSystemSpec {
    pub fn validate(&self) -> Result<()> {
        if self.command.is_empty() {
            return Err(Error::InvalidParam(format!("system `{}` has an empty command", self.id)));
        }
        if !self.timeout_secs.is_finite() || self.timeout_secs <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "system `{}` timeout must be > 0",
                self.id
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParam(format!(
                "system `{}` batch size must be ≥ 1",
                self.id
            )));
        }
        Ok(())
    }

    fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs)
    }
}

/// One protocol request line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Request {
    Translate { src: String, src_lang: String, tgt_lang: String },
    Correct { src: String, lang: String },
    Score {
        src: String,
        mt: String,
        #[serde(rename = "ref", skip_serializing_if = "Option::is_none")]
        reference: Option<String>,
    },
}

impl Request {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("request serialization cannot fail")
    }
}

/// A failed run, with whatever responses arrived before the failure.
#[derive(Debug)]
pub struct ProtocolFailure {
    pub error: Error,
    pub partial: Vec<String>,
}

impl From<ProtocolFailure> for Error {
    fn from(f: ProtocolFailure) -> Error {
        f.error
    }
}

fn external_err(system: &str, message: impl Into<String>) -> Error {
    Error::External { system: system.to_string(), message: message.into() }
}

/// Drives one child process over the whole request list, order-preserving.
/// Any fault (nonzero exit, timeout, line-count mismatch) fails the run and
/// returns the partial output.
pub fn run_external(
    spec: &ExternalSystemSpec,
    requests: &[Request],
) -> std::result::Result<Vec<String>, ProtocolFailure> {
    let fail = |error: Error, partial: Vec<String>| ProtocolFailure { error, partial };
    if let Err(e) = spec.validate() {
        return Err(fail(e, Vec::new()));
    }

    let mut child = match Command::new(&spec.command[0])
        .args(&spec.command[1..])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
    {
        Ok(child) => child,
        Err(e) => {
            return Err(fail(
                external_err(&spec.id, format!("failed to spawn `{}`: {e}", spec.command[0])),
                Vec::new(),
            ))
        }
    };

    let mut stdin = child.stdin.take().expect("stdin piped");
    let stdout = child.stdout.take().expect("stdout piped");
    let stderr = child.stderr.take().expect("stderr piped");

    // Bounded in-flight window: the writer takes a permit per request, the
    // reader releases one per response.
    let (permit_tx, permit_rx) = mpsc::sync_channel::<()>(spec.batch_size);
    let lines: Vec<String> = requests.iter().map(Request::to_line).collect();
    let writer = std::thread::spawn(move || -> std::io::Result<()> {
        for line in &lines {
            if permit_tx.send(()).is_err() {
                break; // reader gave up; stop feeding
            }
            stdin.write_all(line.as_bytes())?;
            stdin.write_all(b"\n")?;
            stdin.flush()?;
        }
        Ok(()) // dropping stdin closes the pipe
    });

    let (line_tx, line_rx) = mpsc::channel::<std::io::Result<String>>();
    let reader = std::thread::spawn(move || {
        for line in BufReader::new(stdout).lines() {
            if line_tx.send(line).is_err() {
                break;
            }
        }
    });
    let stderr_reader = std::thread::spawn(move || {
        let mut tail: VecDeque<String> = VecDeque::new();
        for line in BufReader::new(stderr).lines().map_while(|l| l.ok()) {
            if tail.len() == 8 {
                tail.pop_front();
            }
            tail.push_back(line);
        }
        tail.into_iter().collect::<Vec<_>>().join("\n")
    });

    let mut outputs: Vec<String> = Vec::with_capacity(requests.len());
    let mut failure: Option<Error> = None;
    let timeout = spec.timeout();
    for i in 0..requests.len() {
        match line_rx.recv_timeout(timeout) {
            Ok(Ok(line)) => {
                outputs.push(line);
                let _ = permit_rx.try_recv();
            }
            Ok(Err(e)) => {
                failure = Some(external_err(&spec.id, format!("read error at response {i}: {e}")));
                break;
            }
            Err(mpsc::RecvTimeoutError::Timeout) => {
                let _ = child.kill();
                failure = Some(external_err(
                    &spec.id,
                    format!("timeout after {:?} waiting for response {i} of {}", timeout, requests.len()),
                ));
                break;
            }
            Err(mpsc::RecvTimeoutError::Disconnected) => {
                failure = Some(external_err(
                    &spec.id,
                    format!("line count mismatch: got {i} responses for {} requests", requests.len()),
                ));
                break;
            }
        }
    }

    // Drain permits so the writer can finish or bail out.
    drop(permit_rx);
    let writer_result = writer.join().expect("writer thread panicked");
    let status = wait_with_deadline(&mut child, timeout);
    let _ = reader.join();
    let stderr_tail = stderr_reader.join().unwrap_or_default();

    if let Some(error) = failure {
        let error = if stderr_tail.is_empty() {
            error
        } else {
            external_err(&spec.id, format!("{error}\nchild stderr:\n{stderr_tail}"))
        };
        return Err(fail(error, outputs));
    }

    // Writer failures surface as broken pipes when the child died early.
    if let Err(e) = writer_result {
        return Err(fail(
            external_err(&spec.id, format!("failed writing requests: {e}\nchild stderr:\n{stderr_tail}")),
            outputs,
        ));
    }

    match status {
        Some(status) if !status.success() => {
            return Err(fail(
                external_err(
                    &spec.id,
                    format!("exited with {status}\nchild stderr:\n{stderr_tail}"),
                ),
                outputs,
            ));
        }
        Some(_) => {}
        None => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(fail(
                external_err(&spec.id, "did not exit after responses were consumed"),
                outputs,
            ));
        }
    }

    // Anything after the expected responses is a protocol violation.
    if let Ok(Ok(extra)) = line_rx.try_recv() {
        return Err(fail(
            external_err(
                &spec.id,
                format!("line count mismatch: extra response after {}: `{extra}`", requests.len()),
            ),
            outputs,
        ));
    }

    Ok(outputs)
}

fn wait_with_deadline(child: &mut Child, timeout: Duration) -> Option<std::process::ExitStatus> {
    let deadline = Instant::now() + timeout;
    loop {
        match child.try_wait() {
            Ok(Some(status)) => return Some(status),
            Ok(None) => {
                if Instant::now() >= deadline {
                    return None;
                }
                std::thread::sleep(Duration::from_millis(5));
            }
            Err(_) => return None,
        }
    }
}

// ---------------------------------------------------------------------------
// Run persistence.

/// Provenance of one completed run, persisted as `run.json`. Wall time is
/// kept off disk so repeated runs produce byte-identical directories.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct RunMeta {
    pub system: String,
    pub corpus_id: String,
    pub n_segments: usize,
    pub input_sha256: String,
    pub output_sha256: String,
    pub exit_status: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upstream: Option<Box<RunMeta>>,
}

/// A completed (or resumed) run with its in-memory extras.
#[derive(Debug)]
pub struct RunOutcome {
    pub meta: RunMeta,
    pub outputs: Vec<Segment>,
    pub wall: Duration,
    /// True when the run was skipped because identical artifacts exist.
    pub resumed: bool,
}

pub fn run_json_path(dir: &Path) -> PathBuf {
    dir.join("run.json")
}

pub fn output_path(dir: &Path) -> PathBuf {
    dir.join("output.txt")
}

fn request_checksum(system: &ExternalSystemSpec, requests: &[Request]) -> String {
    let mut joined = String::new();
    joined.push_str(&system.command.join("\u{0}"));
    joined.push('\n');
    for r in requests {
        joined.push_str(&r.to_line());
        joined.push('\n');
    }
    fsutil::sha256_hex(joined.as_bytes())
}

fn try_resume(dir: &Path, input_sha256: &str) -> Option<(RunMeta, Vec<Segment>)> {
    let meta: RunMeta = serde_json::from_str(&std::fs::read_to_string(run_json_path(dir)).ok()?).ok()?;
    if meta.input_sha256 != input_sha256 {
        return None;
    }
    let out_path = output_path(dir);
    if fsutil::sha256_file(&out_path).ok()? != meta.output_sha256 {
        return None;
    }
    let outputs = corpus::load_plain_corpus(&out_path).ok()?;
    if outputs.len() != meta.n_segments {
        return None;
    }
    Some((meta, outputs))
}

/// Runs a system over the request list, persisting `output.txt` and
/// `run.json` into `dir`. Skips the external call entirely when the
/// directory already holds a completed run for identical input (matching
/// checksums); partial output of failed runs lands in
/// `output.partial.txt`.
fn run_and_persist(
    spec: &ExternalSystemSpec,
    corpus_id: &str,
    requests: &[Request],
    dir: &Path,
) -> Result<RunOutcome> {
    let input_sha256 = request_checksum(spec, requests);
    if let Some((meta, outputs)) = try_resume(dir, &input_sha256) {
        return Ok(RunOutcome { meta, outputs, wall: Duration::ZERO, resumed: true });
    }

    let started = Instant::now();
    let responses = match run_external(spec, requests) {
        Ok(responses) => responses,
        Err(failure) => {
            let partial: Vec<Segment> = failure
                .partial
                .iter()
                .enumerate()
                .map(|(i, t)| Segment { index: i, text: t.clone() })
                .collect();
            let _ = corpus::write_plain_corpus(&dir.join("output.partial.txt"), &partial);
            return Err(failure.error);
        }
    };
    let wall = started.elapsed();

    let outputs: Vec<Segment> = responses
        .into_iter()
        .enumerate()
        .map(|(index, text)| Segment { index, text })
        .collect();
    corpus::write_plain_corpus(&output_path(dir), &outputs)?;
    let meta = RunMeta {
        system: spec.id.clone(),
        corpus_id: corpus_id.to_string(),
        n_segments: outputs.len(),
        input_sha256,
        output_sha256: fsutil::sha256_file(&output_path(dir))?,
        exit_status: 0,
        upstream: None,
    };
    fsutil::write_atomic(
        &run_json_path(dir),
        (serde_json::to_string_pretty(&meta).unwrap() + "\n").as_bytes(),
    )?;
    Ok(RunOutcome { meta, outputs, wall, resumed: false })
}

/// Translates one corpus.
pub fn run_translator(
    spec: &ExternalSystemSpec,
    corpus_id: &str,
    inputs: &[Segment],
    src_lang: &str,
    tgt_lang: &str,
    dir: &Path,
) -> Result<RunOutcome> {
    let requests: Vec<Request> = inputs
        .iter()
        .map(|seg| Request::Translate {
            src: seg.text.clone(),
            src_lang: src_lang.to_string(),
            tgt_lang: tgt_lang.to_string(),
        })
        .collect();
    run_and_persist(spec, corpus_id, &requests, dir)
}

/// Corrects one corpus.
pub fn run_corrector(
    spec: &ExternalSystemSpec,
    corpus_id: &str,
    inputs: &[Segment],
    lang: &str,
    dir: &Path,
) -> Result<RunOutcome> {
    let requests: Vec<Request> = inputs
        .iter()
        .map(|seg| Request::Correct { src: seg.text.clone(), lang: lang.to_string() })
        .collect();
    run_and_persist(spec, corpus_id, &requests, dir)
}

/// Which source text scorer requests carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SourcePolicy {
    /// Score against the clean base source even for noisy-input runs.
    #[default]
    CleanSource,
    /// Score against whatever source the system actually consumed.
    ActualSource,
}

impl FromStr for SourcePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clean_source" => Ok(SourcePolicy::CleanSource),
            "actual_source" => Ok(SourcePolicy::ActualSource),
            other => Err(Error::InvalidParam(format!("unknown source policy `{other}`"))),
        }
    }
}

/// One translated corpus ready for scoring.
pub struct ScorableRun<'a> {
    pub corpus_id: &'a str,
    pub dir: &'a Path,
    pub outputs: &'a [Segment],
    /// The source the system actually saw (noised for ladder runs).
    pub actual_source: &'a [Segment],
    /// The clean base source resolved from provenance.
    pub clean_source: &'a [Segment],
}

/// Scores one run with an external scorer and persists
/// `scores/<scorer-id>.tsv`. Under [`SourcePolicy::CleanSource`] every
/// request carries the clean base text; references are included when given
/// (reference-based metric) and omitted otherwise (QE mode).
pub fn score_run(
    scorer: &ExternalSystemSpec,
    run: &ScorableRun<'_>,
    policy: SourcePolicy,
    references: Option<&[Segment]>,
) -> Result<ScoreFile> {
    let sources = match policy {
        SourcePolicy::CleanSource => run.clean_source,
        SourcePolicy::ActualSource => run.actual_source,
    };
    if sources.len() != run.outputs.len() {
        return Err(Error::IndexMismatch(format!(
            "{} sources vs {} outputs for `{}`",
            sources.len(),
            run.outputs.len(),
            run.corpus_id
        )));
    }
    if let Some(refs) = references {
        if refs.len() != run.outputs.len() {
            return Err(Error::IndexMismatch(format!(
                "{} references vs {} outputs for `{}`",
                refs.len(),
                run.outputs.len(),
                run.corpus_id
            )));
        }
    }

    let requests: Vec<Request> = run
        .outputs
        .iter()
        .zip(sources)
        .map(|(output, source)| Request::Score {
            src: source.text.clone(),
            mt: output.text.clone(),
            reference: references.map(|refs| refs[output.index].text.clone()),
        })
        .collect();

    let scores_dir = run.dir.join("scores");
    let tsv_path = scores_dir.join(format!("{}.tsv", scorer.id));
    let meta_path = scores_dir.join(format!("{}.meta.json", scorer.id));
    let input_sha256 = request_checksum(scorer, &requests);

    if let (Ok(meta), Ok(existing)) = (std::fs::read_to_string(&meta_path), ScoreFile::read(&tsv_path)) {
        if let Ok(value) = serde_json::from_str::<serde_json::Value>(&meta) {
            if value["input_sha256"] == serde_json::Value::String(input_sha256.clone()) {
                return Ok(existing);
            }
        }
    }

    let responses = match run_external(scorer, &requests) {
        Ok(r) => r,
        Err(failure) => {
            let partial: Vec<Segment> = failure
                .partial
                .iter()
                .enumerate()
                .map(|(i, t)| Segment { index: i, text: t.clone() })
                .collect();
            let _ = corpus::write_plain_corpus(&scores_dir.join(format!("{}.partial.txt", scorer.id)), &partial);
            return Err(failure.error);
        }
    };

    let rows = responses
        .iter()
        .enumerate()
        .map(|(i, line)| {
            let score: f64 = line.trim().parse().map_err(|_| {
                external_err(&scorer.id, format!("unparseable score at response {i}: `{line}`"))
            })?;
            Ok((run.outputs[i].index, score))
        })
        .collect::<Result<Vec<_>>>()?;
    let file = ScoreFile::new(run.corpus_id, &scorer.id, rows)?;
    file.write(&tsv_path)?;
    fsutil::write_atomic(
        &meta_path,
        (serde_json::json!({ "input_sha256": input_sha256 }).to_string() + "\n").as_bytes(),
    )?;
    Ok(file)
}

/// Translates the clean corpus plus every rung of a noise ladder, one run
/// directory per corpus id under `root`. Completed runs are skipped by
/// checksum, so re-invoking a finished ladder performs zero external calls.
pub fn translate_ladder(
    spec: &ExternalSystemSpec,
    clean: &[Segment],
    rungs: &[(&str, &[Segment])],
    src_lang: &str,
    tgt_lang: &str,
    root: &Path,
) -> Result<Vec<RunOutcome>> {
    let mut outcomes = Vec::with_capacity(rungs.len() + 1);
    outcomes.push(run_translator(spec, "clean", clean, src_lang, tgt_lang, &root.join("clean"))?);
    for (corpus_id, inputs) in rungs {
        outcomes.push(run_translator(
            spec,
            corpus_id,
            inputs,
            src_lang,
            tgt_lang,
            &root.join(corpus_id),
        )?);
    }
    Ok(outcomes)
}

/// Scores several runs with one scorer under a source policy. References
/// are included when given (reference-based) and omitted otherwise (QE).
pub fn score_runs(
    scorer: &ExternalSystemSpec,
    runs: &[ScorableRun<'_>],
    policy: SourcePolicy,
    references: Option<&[Segment]>,
) -> Result<Vec<ScoreFile>> {
    runs.iter().map(|run| score_run(scorer, run, policy, references)).collect()
}

/// Source correction followed by translation. The intermediate corrected
/// text is persisted as `corrected.txt` so intrinsic correction quality can
/// be measured directly.
pub fn correction_pipeline(
    corrector: &ExternalSystemSpec,
    translator: &ExternalSystemSpec,
    corpus_id: &str,
    inputs: &[Segment],
    src_lang: &str,
    tgt_lang: &str,
    dir: &Path,
) -> Result<PipelineOutcome> {
    let correction = run_corrector(corrector, corpus_id, inputs, src_lang, &dir.join("correction"))?;
    corpus::write_plain_corpus(&dir.join("corrected.txt"), &correction.outputs)?;
    let translation = run_translator(
        translator,
        corpus_id,
        &correction.outputs,
        src_lang,
        tgt_lang,
        dir,
    )?;

    let mut meta = translation.meta.clone();
    meta.upstream = Some(Box::new(correction.meta.clone()));
    fsutil::write_atomic(
        &run_json_path(dir),
        (serde_json::to_string_pretty(&meta).unwrap() + "\n").as_bytes(),
    )?;
    Ok(PipelineOutcome {
        corrected: correction.outputs,
        outputs: translation.outputs,
        meta,
        wall: correction.wall + translation.wall,
        resumed: correction.resumed && translation.resumed,
    })
}

/// Result of a correction→translation pipeline.
#[derive(Debug)]
pub struct PipelineOutcome {
    pub corrected: Vec<Segment>,
    pub outputs: Vec<Segment>,
    pub meta: RunMeta,
    pub wall: Duration,
    pub resumed: bool,
}

// ---------------------------------------------------------------------------
// Oracle selection.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pick {
    Baseline,
    Challenger,
}

/// Per-segment choice between two systems' outputs.
#[derive(Debug, Clone)]
pub struct OracleSelection {
    pub outputs: Vec<Segment>,
    pub picks: Vec<Pick>,
    /// The selected score per segment (elementwise max of the inputs).
    pub scores: Vec<f64>,
}

/// Selects, per segment, the output with the strictly higher score; ties go
/// to the baseline. A diagnostic upper bound, not a deployable router.
pub fn oracle_select(
    scores_a: &ScoreFile,
    scores_b: &ScoreFile,
    outputs_a: &[Segment],
    outputs_b: &[Segment],
) -> Result<OracleSelection> {
    if !scores_a.same_indices(scores_b) {
        return Err(Error::IndexMismatch("oracle inputs cover different segments".into()));
    }
    if outputs_a.len() != scores_a.len() || outputs_b.len() != scores_b.len() {
        return Err(Error::IndexMismatch(format!(
            "oracle outputs ({}, {}) do not match score rows ({})",
            outputs_a.len(),
            outputs_b.len(),
            scores_a.len()
        )));
    }
    let mut outputs = Vec::with_capacity(outputs_a.len());
    let mut picks = Vec::with_capacity(outputs_a.len());
    let mut scores = Vec::with_capacity(outputs_a.len());
    for (i, ((_, a), (_, b))) in scores_a.rows().iter().zip(scores_b.rows()).enumerate() {
        if b > a {
            outputs.push(outputs_b[i].clone());
            picks.push(Pick::Challenger);
            scores.push(*b);
        } else {
            outputs.push(outputs_a[i].clone());
            picks.push(Pick::Baseline);
            scores.push(*a);
        }
    }
    Ok(OracleSelection { outputs, picks, scores })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn segs(texts: &[&str]) -> Vec<Segment> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| Segment { index: i, text: t.to_string() })
            .collect()
    }

    #[test]
    fn request_wire_format() {
        let t = Request::Translate {
            src: "hi".into(),
            src_lang: "en".into(),
            tgt_lang: "fr".into(),
        };
        assert_eq!(t.to_line(), r#"{"src":"hi","src_lang":"en","tgt_lang":"fr"}"#);
        let c = Request::Correct { src: "hi".into(), lang: "en".into() };
        assert_eq!(c.to_line(), r#"{"src":"hi","lang":"en"}"#);
        let s = Request::Score { src: "x".into(), mt: "y".into(), reference: None };
        assert_eq!(s.to_line(), r#"{"src":"x","mt":"y"}"#);
        let s = Request::Score { src: "x".into(), mt: "y".into(), reference: Some("r".into()) };
        assert_eq!(s.to_line(), r#"{"src":"x","mt":"y","ref":"r"}"#);
    }

    #[test]
    fn spec_validation() {
        let mut spec = ExternalSystemSpec {
            id: "x".into(),
            kind: SystemKind::Translator,
            command: vec![],
            timeout_secs: 1.0,
            batch_size: 4,
        };
        assert!(spec.validate().is_err());
        spec.command = vec!["true".into()];
        assert!(spec.validate().is_ok());
        spec.timeout_secs = 0.0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn oracle_picks_elementwise_max_with_baseline_ties() {
        let a = ScoreFile::new("a", "m", vec![(0, 1.0), (1, 5.0), (2, 3.0)]).unwrap();
        let b = ScoreFile::new("b", "m", vec![(0, 2.0), (1, 5.0), (2, 1.0)]).unwrap();
        let out_a = segs(&["a0", "a1", "a2"]);
        let out_b = segs(&["b0", "b1", "b2"]);
        let sel = oracle_select(&a, &b, &out_a, &out_b).unwrap();
        assert_eq!(sel.picks, vec![Pick::Challenger, Pick::Baseline, Pick::Baseline]);
        assert_eq!(sel.outputs[0].text, "b0");
        assert_eq!(sel.outputs[1].text, "a1"); // tie → baseline
        assert_eq!(sel.scores, vec![2.0, 5.0, 3.0]);
        // oracle mean never falls below either input's mean
        let mean = |sf: &ScoreFile| sf.mean().unwrap();
        let oracle_mean = sel.scores.iter().sum::<f64>() / sel.scores.len() as f64;
        assert!(oracle_mean >= mean(&a) && oracle_mean >= mean(&b));
    }

    #[test]
    fn oracle_rejects_misaligned_inputs() {
        let a = ScoreFile::new("a", "m", vec![(0, 1.0)]).unwrap();
        let b = ScoreFile::new("b", "m", vec![(1, 1.0)]).unwrap();
        assert!(oracle_select(&a, &b, &segs(&["x"]), &segs(&["y"])).is_err());
        let b = ScoreFile::new("b", "m", vec![(0, 1.0)]).unwrap();
        assert!(oracle_select(&a, &b, &segs(&["x", "extra"]), &segs(&["y"])).is_err());
    }
}

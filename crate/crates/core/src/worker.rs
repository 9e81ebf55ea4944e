//! Reference implementation of the line protocol, usable as a stand-in
//! translator/corrector/scorer for tests and demo experiments.
//!
//! Usage (both via the `noisekit-worker` binary and `noisekit worker`):
//!
//! ```text
//! worker translator copy
//! worker corrector identity
//! worker corrector lookup <file>      # respond with the i-th line of <file>
//! worker scorer constant <value>
//! worker scorer chrf                  # sentence chrF(mt, ref), 0–100
//! worker scorer neg-edit <file>       # −levenshtein(mt, <file> line i)
//! worker scorer src-len               # code points in the request src
//! ```
//!
//! Fault-injection flags for protocol tests: `--drop-line N` (emit no
//! response for request N), `--stall N` (hang on request N),
//! `--fail-after N` (exit 3 after N responses).

use std::io::{BufRead, Write};
use std::path::PathBuf;

use crate::corpus;
use crate::error::{Error, Result};
use crate::metrics::{chrf_sentence, ChrfParams};

#[derive(Debug, Clone, PartialEq)]
pub enum WorkerMode {
    TranslatorCopy,
    CorrectorIdentity,
    CorrectorLookup(PathBuf),
    ScorerConstant(f64),
    ScorerChrf,
    ScorerNegEdit(PathBuf),
    /// Scores the length of the request's `src` field; lets tests observe
    /// which source text a scoring policy actually sent.
    ScorerSrcLen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkerConfig {
    pub mode: WorkerMode,
    pub drop_line: Option<usize>,
    pub stall: Option<usize>,
    pub fail_after: Option<usize>,
}

pub fn parse_worker_args(args: &[String]) -> Result<WorkerConfig> {
    let usage = || {
        Error::InvalidParam(
            "usage: worker <translator copy | corrector identity | corrector lookup FILE | \
             scorer constant V | scorer chrf | scorer neg-edit FILE | scorer src-len> \
             [--drop-line N] [--stall N] [--fail-after N]"
                .into(),
        )
    };
    let mut positional = Vec::new();
    let mut drop_line = None;
    let mut stall = None;
    let mut fail_after = None;
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        match arg.as_str() {
            "--drop-line" | "--stall" | "--fail-after" => {
                let value: usize = iter
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(usage)?;
                match arg.as_str() {
                    "--drop-line" => drop_line = Some(value),
                    "--stall" => stall = Some(value),
                    _ => fail_after = Some(value),
                }
            }
            _ => positional.push(arg.clone()),
        }
    }

    let mode = match positional.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["translator", "copy"] => WorkerMode::TranslatorCopy,
        ["corrector", "identity"] => WorkerMode::CorrectorIdentity,
        ["corrector", "lookup", path] => WorkerMode::CorrectorLookup(PathBuf::from(path)),
        ["scorer", "constant", value] => {
            WorkerMode::ScorerConstant(value.parse().map_err(|_| usage())?)
        }
        ["scorer", "chrf"] => WorkerMode::ScorerChrf,
        ["scorer", "neg-edit", path] => WorkerMode::ScorerNegEdit(PathBuf::from(path)),
        ["scorer", "src-len"] => WorkerMode::ScorerSrcLen,
        _ => return Err(usage()),
    };
    Ok(WorkerConfig { mode, drop_line, stall, fail_after })
}

fn field<'a>(value: &'a serde_json::Value, name: &str) -> Result<&'a str> {
    value
        .get(name)
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::InvalidParam(format!("request missing string field `{name}`")))
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut previous: Vec<usize> = (0..=b.len()).collect();
    let mut current = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        current[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let substitution = previous[j] + usize::from(ca != cb);
            current[j + 1] = substitution.min(previous[j + 1] + 1).min(current[j] + 1);
        }
        std::mem::swap(&mut previous, &mut current);
    }
    previous[b.len()]
}

/// Runs the worker loop over stdin/stdout. Returns the process exit code.
pub fn run_worker(config: &WorkerConfig) -> Result<i32> {
    let lookup: Option<Vec<String>> = match &config.mode {
        WorkerMode::CorrectorLookup(path) | WorkerMode::ScorerNegEdit(path) => Some(
            corpus::load_plain_corpus(path)?
                .into_iter()
                .map(|s| s.text)
                .collect(),
        ),
        _ => None,
    };
    let chrf_params = ChrfParams::default();

    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut responded = 0usize;

    for (i, line) in stdin.lock().lines().enumerate() {
        let line = line.map_err(|e| Error::InvalidParam(format!("stdin read failed: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        if config.stall == Some(i) {
            std::thread::sleep(std::time::Duration::from_secs(3600));
        }
        let request: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| Error::InvalidParam(format!("bad request on line {}: {e}", i + 1)))?;

        let response = match &config.mode {
            WorkerMode::TranslatorCopy | WorkerMode::CorrectorIdentity => {
                field(&request, "src")?.to_string()
            }
            WorkerMode::CorrectorLookup(_) => {
                let lines = lookup.as_ref().unwrap();
                lines
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::InvalidParam(format!("lookup file has no line {i}")))?
            }
            WorkerMode::ScorerConstant(value) => value.to_string(),
            WorkerMode::ScorerChrf => {
                let mt = field(&request, "mt")?;
                let reference = field(&request, "ref")?;
                chrf_sentence(mt, reference, &chrf_params).to_string()
            }
            WorkerMode::ScorerNegEdit(_) => {
                let mt = field(&request, "mt")?;
                let lines = lookup.as_ref().unwrap();
                let clean = lines
                    .get(i)
                    .ok_or_else(|| Error::InvalidParam(format!("neg-edit file has no line {i}")))?;
                format!("{}", -(levenshtein(mt, clean) as f64))
            }
            WorkerMode::ScorerSrcLen => field(&request, "src")?.chars().count().to_string(),
        };

        if config.drop_line != Some(i) {
            out.write_all(response.as_bytes())
                .and_then(|_| out.write_all(b"\n"))
                .and_then(|_| out.flush())
                .map_err(|e| Error::InvalidParam(format!("stdout write failed: {e}")))?;
            responded += 1;
        }
        if config.fail_after == Some(responded) && config.fail_after.is_some() {
            return Ok(3);
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_modes_and_flags() {
        let config = parse_worker_args(&[
            "translator".into(),
            "copy".into(),
            "--drop-line".into(),
            "2".into(),
        ])
        .unwrap();
        assert_eq!(config.mode, WorkerMode::TranslatorCopy);
        assert_eq!(config.drop_line, Some(2));

        let config = parse_worker_args(&["scorer".into(), "constant".into(), "0.5".into()]).unwrap();
        assert_eq!(config.mode, WorkerMode::ScorerConstant(0.5));

        assert!(parse_worker_args(&["scorer".into()]).is_err());
        assert!(parse_worker_args(&["translator".into(), "yodel".into()]).is_err());
    }

    #[test]
    fn levenshtein_basics() {
        assert_eq!(levenshtein("", ""), 0);
        assert_eq!(levenshtein("abc", "abc"), 0);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("ab", ""), 2);
        assert_eq!(levenshtein("한글", "한글!"), 1);
    }
}

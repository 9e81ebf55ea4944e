//! BPE merge application for fertility analysis.
//!
//! Merges file: one merge per line, `left right`, highest priority first.
//! Lines starting with `#` are skipped (tolerates the usual version
//! header). Merging is iterative within each whitespace word: the
//! best-ranked adjacent pair present is merged at all of its occurrences
//! (left to right, non-overlapping), until no listed pair remains.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fsutil;
use crate::metrics::PieceTokenizer;

#[derive(Debug, Clone)]
pub struct BpeMerges {
    ranks: HashMap<(String, String), usize>,
}

impl BpeMerges {
    pub fn parse(src: &str, origin: &str) -> Result<Self> {
        let mut ranks = HashMap::new();
        let mut rank = 0;
        for (lineno, line) in src.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(' ');
            let (Some(left), Some(right), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Malformed {
                    format: "bpe merges",
                    path: origin.into(),
                    line: lineno + 1,
                    message: format!("expected `left right`, got `{line}`"),
                });
            };
            ranks.entry((left.to_string(), right.to_string())).or_insert(rank);
            rank += 1;
        }
        Ok(BpeMerges { ranks })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = fsutil::read_utf8(path)?;
        Self::parse(&src, &path.display().to_string())
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }
}

impl PieceTokenizer for BpeMerges {
    fn pieces(&self, word: &str) -> Vec<String> {
        let mut parts: Vec<String> = word.chars().map(String::from).collect();
        loop {
            let best = parts
                .windows(2)
                .filter_map(|w| self.ranks.get(&(w[0].clone(), w[1].clone())))
                .min()
                .copied();
            let Some(best_rank) = best else { break };
            let mut merged = Vec::with_capacity(parts.len());
            let mut i = 0;
            while i < parts.len() {
                if i + 1 < parts.len()
                    && self.ranks.get(&(parts[i].clone(), parts[i + 1].clone())) == Some(&best_rank)
                {
                    merged.push(format!("{}{}", parts[i], parts[i + 1]));
                    i += 2;
                } else {
                    merged.push(parts[i].clone());
                    i += 1;
                }
            }
            parts = merged;
        }
        parts
    }

    fn id(&self) -> &str {
        "bpe"
    }
}

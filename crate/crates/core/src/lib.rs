//! Toolkit for measuring how machine-translation systems degrade under
//! character-level source noise.
//!
//! The crate covers the full measurement loop:
//!
//! * [`noise`] — deterministic token perturbation (swap / dupe / drop / key)
//!   with keyboard-layout-aware key noise and Korean jamo handling.
//! * [`corpus`] — corpus loading, noised-corpus provenance (JSONL), and
//!   per-segment score files (TSV).
//! * [`metrics`] — native chrF / BLEU / token F1 / tokenizer fertility plus
//!   reference-free composites (faux metrics, ΔQE).
//! * [`analysis`] — through-origin slope fits over quality trajectories,
//!   win/loss breakdowns, and CSV/SVG reports.
//! * [`datagen`] — noisy training / validation corpus generation.
//! * [`pipeline`] — orchestration of external translators, correctors, and
//!   scorers over a line-oriented subprocess protocol, including
//!   correction pipelines and oracle selection.
//!
//! All randomness flows from a single `u64` seed through counter-based
//! stream derivation ([`rng::derive_rng`]), so every artifact is
//! reproducible bit-for-bit regardless of parallelism.

pub mod analysis;
pub mod corpus;
pub mod datagen;
pub mod error;
pub mod experiment;
pub mod fsutil;
pub mod metrics;
pub mod hangul;
pub mod layout;
pub mod noise;
pub mod pipeline;
pub mod rng;
pub mod svg;
pub mod tokenize;
pub mod worker;

pub use error::{Error, Result};

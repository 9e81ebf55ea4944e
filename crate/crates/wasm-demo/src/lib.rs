//! Browser demo bindings: noise playground, robustness curves with a mock
//! copy-translator scored by chrF, and Hangul jamo decomposition.
//!
//! Every export takes plain strings/numbers and returns a JSON envelope,
//! `{"ok": …}` or `{"error": "…"}`, so the page needs no custom binding
//! glue and the logic is fully testable on the native target. Build for
//! the browser with `wasm-pack build --target web` (see www/index.html).

use wasm_bindgen::prelude::wasm_bindgen;

use noisekit::analysis::{build_trajectory, fit_slope};
use noisekit::corpus::{segments_from_text, ScoreFile};
use noisekit::hangul;
use noisekit::metrics::{chrf_sentence, ChrfParams};
use noisekit::noise::{
    make_noise_ladder, NoiseEngine, NoiseSpec, NoiseType, PerturbationAction,
};
use noisekit::svg::{LineChart, Series};

fn envelope(result: Result<serde_json::Value, String>) -> String {
    match result {
        Ok(value) => serde_json::json!({ "ok": value }).to_string(),
        Err(message) => serde_json::json!({ "error": message }).to_string(),
    }
}

fn parse_type(noise_type: &str) -> Result<NoiseType, String> {
    noise_type.parse::<NoiseType>().map_err(|e| e.to_string())
}

fn layout_arg(noise_type: NoiseType, layout: &str) -> Option<String> {
    if noise_type == NoiseType::Key {
        Some(layout.to_string())
    } else {
        None
    }
}

/// Noises one text and reports the per-token perturbation records.
#[wasm_bindgen]
pub fn noise_text(text: &str, noise_type: &str, p: f64, seed: u32, layout: &str) -> String {
    envelope(noise_text_impl(text, noise_type, p, seed, layout))
}

fn noise_text_impl(
    text: &str,
    noise_type: &str,
    p: f64,
    seed: u32,
    layout: &str,
) -> Result<serde_json::Value, String> {
    let noise_type = parse_type(noise_type)?;
    let spec = NoiseSpec::new(noise_type, p, seed as u64, layout_arg(noise_type, layout))
        .map_err(|e| e.to_string())?;
    let engine = NoiseEngine::new(spec).map_err(|e| e.to_string())?;
    let (noised, records) = engine.noise_segment(0, text);

    let perturbations: Vec<serde_json::Value> = records
        .iter()
        .map(|r| match &r.action {
            PerturbationAction::Applied { char_position, detail } => serde_json::json!({
                "token": r.token_index,
                "type": r.noise_type.id(),
                "pos": char_position,
                "detail": detail,
                "applied": true,
            }),
            PerturbationAction::Noop => serde_json::json!({
                "token": r.token_index,
                "type": r.noise_type.id(),
                "applied": false,
            }),
        })
        .collect();
    let applied = records.iter().filter(|r| r.is_applied()).count();
    Ok(serde_json::json!({
        "noised": noised,
        "perturbations": perturbations,
        "attempted": records.len(),
        "applied": applied,
        "tokens": text.split_whitespace().count(),
    }))
}

struct Curve {
    clean: f64,
    points: Vec<(f64, f64)>,
    slope: f64,
    rss: f64,
}

/// The demo measurement: a mock "translator" copies the noised source and
/// is scored with sentence chrF against the clean text, at every rung of
/// the p = 0.1 … 1.0 ladder.
fn curve_impl(corpus: &str, noise_type: &str, seed: u32, layout: &str) -> Result<Curve, String> {
    let noise_type = parse_type(noise_type)?;
    let segments = segments_from_text(corpus);
    if segments.iter().all(|s| s.text.split_whitespace().count() == 0) {
        return Err("corpus is empty".to_string());
    }
    let ladder = make_noise_ladder(
        "demo",
        &segments,
        noise_type,
        layout_arg(noise_type, layout),
        seed as u64,
    )
    .map_err(|e| e.to_string())?;

    let params = ChrfParams::default();
    let clean_rows: Vec<(usize, f64)> = segments.iter().map(|s| (s.index, 100.0)).collect();
    let clean = ScoreFile::new("copy-mt", "chrf", clean_rows).map_err(|e| e.to_string())?;
    let runs: Vec<(f64, ScoreFile)> = ladder
        .iter()
        .enumerate()
        .map(|(i, rung)| {
            let p = (i + 1) as f64 / 10.0;
            let rows: Vec<(usize, f64)> = rung
                .segments
                .iter()
                .zip(&segments)
                .map(|(noised, base)| (base.index, chrf_sentence(&noised.text, &base.text, &params)))
                .collect();
            Ok((p, ScoreFile::new("copy-mt", "chrf", rows).map_err(|e| e.to_string())?))
        })
        .collect::<Result<_, String>>()?;

    let trajectory =
        build_trajectory("copy-mt", "chrf", noise_type.id(), &clean, &runs).map_err(|e| e.to_string())?;
    let fit = fit_slope(&trajectory).map_err(|e| e.to_string())?;
    Ok(Curve {
        clean: trajectory.clean_score,
        points: trajectory.points().iter().map(|pt| (pt.p, pt.score)).collect(),
        slope: fit.slope,
        rss: fit.rss,
    })
}

/// Robustness curve as JSON: clean score, ladder points, fitted slope.
#[wasm_bindgen]
pub fn robustness_curve(corpus: &str, noise_type: &str, seed: u32, layout: &str) -> String {
    envelope(curve_impl(corpus, noise_type, seed, layout).map(|curve| {
        serde_json::json!({
            "clean": curve.clean,
            "points": curve.points.iter()
                .map(|&(p, score)| serde_json::json!({ "p": p, "score": score }))
                .collect::<Vec<_>>(),
            "slope": curve.slope,
            "rss": curve.rss,
        })
    }))
}

/// The same curve rendered as a standalone SVG chart.
#[wasm_bindgen]
pub fn robustness_curve_svg(corpus: &str, noise_type: &str, seed: u32, layout: &str) -> String {
    match curve_impl(corpus, noise_type, seed, layout) {
        Err(message) => format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"760\" height=\"60\">\
             <text x=\"10\" y=\"30\" fill=\"#b00\">{message}</text></svg>"
        ),
        Ok(curve) => {
            let mut points = vec![(0.0, curve.clean)];
            points.extend(&curve.points);
            LineChart {
                title: format!("chrF under {noise_type} noise (slope {:.2})", curve.slope),
                x_label: "proportion of noised tokens".into(),
                y_label: "chrF".into(),
                series: vec![Series { label: "copy-mt".into(), points }],
            }
            .render()
        }
    }
}

/// Hangul syllables ⇄ compatibility jamo.
#[wasm_bindgen]
pub fn hangul_jamo(text: &str) -> String {
    let jamo = hangul::decompose(text);
    let recomposed = hangul::compose(&jamo);
    envelope(Ok(serde_json::json!({
        "jamo": jamo,
        "recomposed": recomposed.clone(),
        "round_trip": recomposed == text,
    })))
}

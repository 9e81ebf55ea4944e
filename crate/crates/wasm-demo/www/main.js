// Wires the page to the wasm exports. Build the module first:
//   wasm-pack build crates/wasm-demo --target web
// then serve the crate directory (e.g. `python3 -m http.server`) and open
// crates/wasm-demo/www/.

import init, {
  noise_text,
  robustness_curve,
  robustness_curve_svg,
  hangul_jamo,
} from "../pkg/noisekit_wasm.js";

const $ = (id) => document.getElementById(id);

function parsed(payload) {
  const value = JSON.parse(payload);
  if (value.error !== undefined) throw new Error(value.error);
  return value.ok;
}

function showError(el, err) {
  el.textContent = String(err.message ?? err);
  el.classList.add("error");
}

function refreshNoise() {
  const out = $("noise-output");
  const records = $("noise-records");
  out.classList.remove("error");
  $("noise-p-value").textContent = Number($("noise-p").value).toFixed(2);
  try {
    const result = parsed(
      noise_text(
        $("noise-input").value,
        $("noise-type").value,
        Number($("noise-p").value),
        Number($("noise-seed").value) >>> 0,
        $("noise-layout").value,
      ),
    );
    out.textContent = result.noised;
    const applied = result.perturbations.filter((r) => r.applied);
    records.textContent =
      `${result.tokens} tokens · ${result.attempted} sampled · ` +
      `${result.applied} perturbed` +
      (applied.length
        ? ` — ` +
          applied
            .map((r) => `#${r.token} ${r.type}@${r.pos}${r.detail ? ` (${r.detail})` : ""}`)
            .join(", ")
        : "");
  } catch (err) {
    showError(out, err);
    records.textContent = "";
  }
}

function refreshCurve() {
  const stats = $("curve-stats");
  stats.classList.remove("error");
  const args = [
    $("curve-input").value,
    $("curve-type").value,
    Number($("curve-seed").value) >>> 0,
    $("curve-layout").value,
  ];
  try {
    const curve = parsed(robustness_curve(...args));
    $("curve-box").innerHTML = robustness_curve_svg(...args);
    const points = curve.points
      .map((pt) => `p=${pt.p.toFixed(1)}: ${pt.score.toFixed(1)}`)
      .join("  ");
    stats.textContent =
      `clean = ${curve.clean.toFixed(2)}   slope = ${curve.slope.toFixed(2)} ` +
      `(chrF points lost at 100% corruption)   rss = ${curve.rss.toFixed(2)}\n${points}`;
  } catch (err) {
    $("curve-box").innerHTML = "";
    showError(stats, err);
  }
}

function refreshHangul() {
  const out = $("hangul-output");
  out.classList.remove("error");
  try {
    const result = parsed(hangul_jamo($("hangul-input").value));
    out.textContent =
      `jamo:       ${result.jamo}\n` +
      `recomposed: ${result.recomposed}` +
      (result.round_trip ? "" : "   (differs: input contained loose jamo)");
  } catch (err) {
    showError(out, err);
  }
}

await init();

for (const id of ["noise-input", "noise-type", "noise-layout", "noise-p", "noise-seed"]) {
  $(id).addEventListener("input", refreshNoise);
}
for (const id of ["curve-input", "curve-type", "curve-layout", "curve-seed"]) {
  $(id).addEventListener("input", refreshCurve);
}
$("hangul-input").addEventListener("input", refreshHangul);

refreshNoise();
refreshCurve();
refreshHangul();

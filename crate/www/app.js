import init, {
  cell_explorer,
  regime_report,
  limit_spectrum_json,
  robin_continuation,
} from "./pkg/plate_spectra_wasm.js";

const $ = (id) => document.getElementById(id);

function parseList(text) {
  return text
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0)
    .map(Number);
}

function clear(ctx) {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
}

function axes(ctx, pad) {
  const { width: w, height: h } = ctx.canvas;
  ctx.strokeStyle = "#ccc";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
}

function polyline(ctx, pts, color) {
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.6;
  ctx.beginPath();
  pts.forEach(([x, y], i) => (i ? ctx.lineTo(x, y) : ctx.moveTo(x, y)));
  ctx.stroke();
}

// diverging blue-white-red map for the cell heatmap
function colormap(t) {
  const r = Math.round(255 * Math.min(1, Math.max(0, 1.5 * t)));
  const b = Math.round(255 * Math.min(1, Math.max(0, 1.5 * (1 - t))));
  const g = Math.round(255 * (1 - Math.abs(2 * t - 1) * 0.85));
  return [r, g, b];
}

function drawProfile(data) {
  const ctx = $("profile-plot").getContext("2d");
  clear(ctx);
  const pad = 8;
  const w = ctx.canvas.width - 2 * pad;
  const h = ctx.canvas.height - 2 * pad;
  axes(ctx, pad);
  // fixed range [0, 1/2) so amplitude changes are visible
  const pts = data.profile.map(([y, b]) => [pad + y * w, pad + h - (b / 0.5) * h]);
  polyline(ctx, pts, "#0b62a4");
}

function drawHeatmap(data) {
  const canvas = $("cell-plot");
  const ctx = canvas.getContext("2d");
  const { n_y_bar: nx, n_y_n: ny, values, min, max } = data.heatmap;
  const img = ctx.createImageData(nx, ny);
  const span = Math.max(max - min, 1e-12);
  for (let j = 0; j < ny; j++) {
    for (let i = 0; i < nx; i++) {
      // row j=0 is the deepest sample; flip so the boundary sits on top
      const v = values[j * nx + i];
      const [r, g, b] = colormap((v - min) / span);
      const p = 4 * ((ny - 1 - j) * nx + i);
      img.data[p] = r;
      img.data[p + 1] = g;
      img.data[p + 2] = b;
      img.data[p + 3] = 255;
    }
  }
  const off = new OffscreenCanvas(nx, ny);
  off.getContext("2d").putImageData(img, 0, 0);
  clear(ctx);
  ctx.imageSmoothingEnabled = true;
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
}

function refreshCell() {
  const cos = parseList($("cos").value);
  const sin = parseList($("sin").value);
  let data;
  try {
    data = JSON.parse(cell_explorer(new Float64Array(cos), new Float64Array(sin)));
  } catch (e) {
    data = { error: String(e) };
  }
  const out = $("gamma-out");
  if (data.error) {
    out.innerHTML = `<span class="err">${data.error}</span>`;
    return;
  }
  out.innerHTML =
    `<span class="stat">γ (energy) = ${data.gamma.toPrecision(10)}</span>` +
    `<span class="stat">γ (flux) = ${data.gamma_flux.toPrecision(10)}</span>` +
    data.modes
      .map(
        (m) =>
          `<span class="stat">k=${m.k}: ${(100 * m.gamma_share).toFixed(1)}%</span>`
      )
      .join("");
  drawProfile(data);
  drawHeatmap(data);
  // panel 3 defaults to this gamma
  $("gamma-slider").value = Math.min(60, data.gamma).toFixed(2);
  $("gamma-val").textContent = Number($("gamma-slider").value).toFixed(2);
  refreshSpectrum();
}

function refreshRegime() {
  const alpha = Number($("alpha").value);
  $("alpha-val").textContent = alpha.toFixed(2);
  const data = JSON.parse(regime_report(alpha));
  const out = $("regime-out");
  if (data.error) {
    out.innerHTML = `<span class="err">${data.error}</span>`;
    return;
  }
  const win = data.window
    ? `θ ∈ (${data.window[0].toFixed(3)}, ${data.window[1].toFixed(3)})`
    : "empty window";
  out.innerHTML =
    `<span class="stat">${data.regime}</span>` +
    `<span class="stat">${win}</span>` +
    `<div class="hint">limit problem: ${data.limit}</div>`;

  const ctx = $("window-plot").getContext("2d");
  clear(ctx);
  const pad = 26;
  const w = ctx.canvas.width - 2 * pad;
  const y = ctx.canvas.height / 2;
  // θ axis from 0 to 2
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.moveTo(pad, y);
  ctx.lineTo(pad + w, y);
  ctx.stroke();
  ctx.fillStyle = "#333";
  ctx.font = "11px system-ui";
  for (let t = 0; t <= 2.001; t += 0.5) {
    const x = pad + (t / 2) * w;
    ctx.fillRect(x, y - 4, 1, 8);
    ctx.fillText(t.toFixed(1), x - 8, y + 20);
  }
  if (data.window) {
    const [lo, hi] = data.window;
    ctx.fillStyle = "rgba(11, 98, 164, 0.45)";
    ctx.fillRect(pad + (lo / 2) * w, y - 10, ((hi - lo) / 2) * w, 20);
  }
}

function refreshSpectrum() {
  const kind = $("bc").value;
  const gamma = Number($("gamma-slider").value);
  $("gamma-val").textContent = gamma.toFixed(2);
  const sign = Number($("sign").value);
  const data = JSON.parse(limit_spectrum_json(kind, gamma, sign, 1.0, 6));
  const out = $("spectrum-out");
  if (data.error) {
    out.innerHTML = `<span class="err">${data.error}</span>`;
    return;
  }
  out.innerHTML = data.lines
    .map(
      (l) =>
        `<span class="stat">λ<sub>(${l.k},${l.n})</sub> = ${l.lambda.toFixed(3)}` +
        (l.multiplicity > 1 ? " ×2" : "") +
        `</span>`
    )
    .join("");

  const ctx = $("shape-plot").getContext("2d");
  clear(ctx);
  const pad = 10;
  const w = ctx.canvas.width - 2 * pad;
  const h = ctx.canvas.height - 2 * pad;
  axes(ctx, pad);
  const colors = ["#0b62a4", "#c2571a", "#2a8f4e", "#8350b5"];
  data.shapes.forEach((s, i) => {
    const pts = s.points.map(([t, v]) => [
      pad + (t + 1) * w,
      pad + h / 2 - (v * h) / 2.2,
    ]);
    polyline(ctx, pts, colors[i % colors.length]);
  });
}

function drawContinuation() {
  const data = JSON.parse(robin_continuation(1.0, 400.0, 60, 3));
  if (data.error) return;
  const ctx = $("continuation-plot").getContext("2d");
  clear(ctx);
  const pad = 10;
  const w = ctx.canvas.width - 2 * pad;
  const h = ctx.canvas.height - 2 * pad;
  axes(ctx, pad);
  const gmax = Math.log10(1 + data.gammas[data.gammas.length - 1]);
  const vmax = Math.max(...data.branches.flat());
  const colors = ["#0b62a4", "#c2571a", "#2a8f4e"];
  data.branches.forEach((branch, i) => {
    const pts = branch.map((v, j) => [
      pad + (Math.log10(1 + data.gammas[j]) / gmax) * w,
      pad + h - (v / vmax) * h,
    ]);
    polyline(ctx, pts, colors[i]);
  });
}

async function main() {
  await init();
  refreshCell();
  refreshRegime();
  refreshSpectrum();
  drawContinuation();
  $("cos").addEventListener("change", refreshCell);
  $("sin").addEventListener("change", refreshCell);
  $("alpha").addEventListener("input", refreshRegime);
  $("bc").addEventListener("change", refreshSpectrum);
  $("gamma-slider").addEventListener("input", refreshSpectrum);
  $("sign").addEventListener("change", refreshSpectrum);
}

main();

// Expects the wasm-bindgen output in ./pkg (see the README).
import init, { gain_curve, fuse_readings, predict_warning, bundled_file } from "./pkg/fracfuse_wasm.js";

const $ = (id) => document.getElementById(id);
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

const GATES = {
  engine_noise: { lo: 64, hi: 78, h: 0.01, limit: 74 },
  body_vibration: { lo: 1.24, hi: 1.51, h: 0.001, limit: 1.5 },
};

function axes(canvas, xs, ys) {
  const ctx = canvas.getContext("2d");
  const pad = 40;
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y0 === y1) { y0 -= 1; y1 += 1; }
  const sx = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (canvas.width - 2 * pad);
  const sy = (y) => canvas.height - pad - ((y - y0) / (y1 - y0)) * (canvas.height - 2 * pad);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, canvas.width - 2 * pad, canvas.height - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(y1.toPrecision(4), 2, pad + 4);
  ctx.fillText(y0.toPrecision(4), 2, canvas.height - pad);
  ctx.fillText(x0.toPrecision(3), pad, canvas.height - pad + 14);
  ctx.fillText(x1.toPrecision(3), canvas.width - pad - 20, canvas.height - pad + 14);
  return { ctx, sx, sy };
}

function line(ctx, pts, color) {
  ctx.strokeStyle = color;
  ctx.beginPath();
  pts.forEach(([x, y], i) => (i ? ctx.lineTo(x, y) : ctx.moveTo(x, y)));
  ctx.stroke();
}

function dots(ctx, pts, color) {
  ctx.fillStyle = color;
  for (const [x, y] of pts) ctx.fillRect(x - 3, y - 3, 6, 6);
}

function drawCurve() {
  try {
    const rows = JSON.parse(gain_curve($("curve-nu").value, +$("curve-lo").value, +$("curve-hi").value, 200));
    const canvas = $("curve-plot");
    const { ctx, sx, sy } = axes(canvas, rows.map((r) => r.omega), rows.map((r) => r.gain));
    const orders = [...new Set(rows.map((r) => r.nu))];
    orders.forEach((nu, i) => {
      const pts = rows.filter((r) => r.nu === nu).map((r) => [sx(r.omega), sy(r.gain)]);
      line(ctx, pts, COLORS[i % COLORS.length]);
      ctx.fillStyle = COLORS[i % COLORS.length];
      ctx.fillText(`ν=${nu}`, canvas.width - 90, 50 + 14 * i);
    });
    $("curve-error").textContent = "";
  } catch (e) {
    $("curve-error").textContent = String(e);
  }
}

function drawFusion() {
  try {
    const out = JSON.parse(fuse_readings($("fusion-csv").value, +$("fusion-lo").value, +$("fusion-hi").value, +$("fusion-nu").value, +$("fusion-h").value));
    const f = out.fusion;
    const n = f.sensor_ids.length;
    const idx = [...Array(n).keys()];
    const means = out.summaries.map((s) => s.mean);
    const { ctx, sx, sy } = axes($("fusion-plot"), idx, [...means, ...f.rescaled]);
    line(ctx, idx.map((i) => [sx(i), sy(means[i])]), COLORS[0]);
    dots(ctx, idx.map((i) => [sx(i), sy(means[i])]), COLORS[0]);
    line(ctx, idx.map((i) => [sx(i), sy(f.rescaled[i])]), COLORS[1]);
    dots(ctx, idx.map((i) => [sx(i), sy(f.rescaled[i])]), COLORS[1]);
    const ratio = out.improvement_ratio === null ? "unbounded" : out.improvement_ratio.toFixed(3);
    $("fusion-out").textContent =
      `blue: sensor means, red: rescaled fused values\n` +
      `fit order ${f.fit.poly.coeffs.length - 1}, ${f.n_steps} steps, ${f.rounds} round(s)${out.converged ? "" : " (not converged)"}\n` +
      `reference ${f.reference.toFixed(4)}, fused mean ${out.fused_mean.toFixed(4)}, K=${f.amplification.toPrecision(4)}\n` +
      `std ${f.pre_std.toPrecision(4)} -> ${f.post_std.toPrecision(4)}, improvement ${ratio}`;
  } catch (e) {
    $("fusion-out").textContent = String(e);
  }
}

function drawPrognosis() {
  try {
    const horizon = +$("prog-horizon").value;
    const out = JSON.parse(predict_warning($("prog-csv").value, +$("prog-limit").value, +$("prog-k").value, horizon));
    const rows = $("prog-csv").value.trim().split("\n").slice(1).map((l) => l.split(",").map(Number));
    const c = out.trend.poly.coeffs;
    const p = (t) => c.reduceRight((acc, k) => acc * t + k, 0);
    const tEnd = Math.max(out.trend.t_last, (out.t_y ?? out.trend.t_last) * 1.2);
    const ts = [...Array(101).keys()].map((i) => (tEnd * i) / 100);
    const { ctx, sx, sy } = axes($("prog-plot"), ts, [...ts.map(p), out.threshold, ...rows.map((r) => r[1])]);
    line(ctx, ts.map((t) => [sx(t), sy(p(t))]), COLORS[0]);
    dots(ctx, rows.map(([t, v]) => [sx(t), sy(v)]), COLORS[2]);
    line(ctx, [[sx(0), sy(out.threshold)], [sx(tEnd), sy(out.threshold)]], COLORS[1]);
    const when = out.t_y === null ? "none within the horizon" : `${out.t_y.toFixed(3)} months`;
    $("prog-out").textContent =
      `threshold ${out.threshold}, status ${out.status}\n` +
      `trend coefficients (low to high) ${c.map((x) => x.toPrecision(5)).join(", ")}\n` +
      `warning time: ${when}`;
  } catch (e) {
    $("prog-out").textContent = String(e);
  }
}

function loadPreset() {
  const name = $("fusion-preset").value;
  const g = GATES[name];
  $("fusion-csv").value = bundled_file(name, "readings.csv");
  $("fusion-lo").value = g.lo;
  $("fusion-hi").value = g.hi;
  $("fusion-h").value = g.h;
  $("prog-csv").value = bundled_file(name, "trend.csv");
  $("prog-limit").value = g.limit;
  drawFusion();
  drawPrognosis();
}

await init();
for (const id of ["curve-nu", "curve-lo", "curve-hi"]) $(id).addEventListener("input", drawCurve);
for (const id of ["fusion-lo", "fusion-hi", "fusion-nu", "fusion-h", "fusion-csv"]) $(id).addEventListener("input", drawFusion);
for (const id of ["prog-limit", "prog-k", "prog-horizon", "prog-csv"]) $(id).addEventListener("input", drawPrognosis);
$("fusion-preset").addEventListener("change", loadPreset);
drawCurve();
loadPreset();

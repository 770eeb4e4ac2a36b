import init, { burgers_field, Demo } from "./pkg/romclosure_web.js";

const N_POINTS = 512;
const N_SNAPSHOTS = 201;

const $ = (id) => document.getElementById(id);

function linspace(n) {
  return Array.from({ length: n }, (_, i) => i / (n - 1));
}

// series: [{ x, y, color, bar? }]
function plot(canvas, series, opts = {}) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 36;
  ctx.clearRect(0, 0, w, h);
  let ymin = Infinity, ymax = -Infinity;
  for (const s of series) for (const v of s.y) if (isFinite(v)) { ymin = Math.min(ymin, v); ymax = Math.max(ymax, v); }
  if (opts.ymin !== undefined) ymin = opts.ymin;
  if (opts.ymax !== undefined) ymax = opts.ymax;
  if (!(ymax > ymin)) { ymax = ymin + 1; }
  const xs = series[0].x;
  const xmin = xs[0], xmax = xs[xs.length - 1];
  const X = (v) => pad + (v - xmin) / (xmax - xmin || 1) * (w - 2 * pad);
  const Y = (v) => h - pad + (pad * 2 - h) * (v - ymin) / (ymax - ymin);

  ctx.strokeStyle = "#999"; ctx.lineWidth = 1;
  ctx.strokeRect(pad, pad / 2, w - 2 * pad, h - 1.5 * pad);
  ctx.fillStyle = "#555"; ctx.font = "11px sans-serif";
  ctx.fillText(ymax.toPrecision(3), 2, Y(ymax) + 4);
  ctx.fillText(ymin.toPrecision(3), 2, Y(ymin));
  ctx.fillText(String(xmin), pad, h - pad / 3);
  ctx.fillText(String(xmax), w - pad - 10, h - pad / 3);
  if (opts.title) ctx.fillText(opts.title, pad + 4, pad / 2 + 12);

  for (const s of series) {
    ctx.strokeStyle = s.color; ctx.fillStyle = s.color; ctx.lineWidth = 1.6;
    if (s.bar) {
      const bw = (w - 2 * pad) / s.x.length * 0.7;
      s.x.forEach((x, i) => ctx.fillRect(X(x) - bw / 2, Y(s.y[i]), bw, Y(ymin) - Y(s.y[i])));
      continue;
    }
    ctx.beginPath();
    s.y.forEach((v, i) => (i ? ctx.lineTo(X(s.x[i]), Y(v)) : ctx.moveTo(X(s.x[i]), Y(v))));
    ctx.stroke();
  }
}

function drawExact() {
  const t = +$("exact-t").value, re = +$("exact-re").value;
  $("exact-t-v").textContent = t.toFixed(2);
  $("exact-re-v").textContent = re;
  const u = burgers_field(N_POINTS, t, re);
  plot($("exact-plot"), [{ x: linspace(N_POINTS), y: Array.from(u), color: "#000" }], { ymin: 0, ymax: 0.55, title: "u(x, t)" });
}

function drawPod(demo) {
  const k = +$("pod-k").value;
  $("pod-k-v").textContent = k;
  const ric = Array.from(demo.ric()).slice(0, demo.r_total());
  $("pod-ric").textContent = `RIC(${demo.r()}) = ${ric[demo.r() - 1].toFixed(3)}%   RIC(${demo.r_total()}) = ${ric[demo.r_total() - 1].toFixed(3)}%`;
  const idx = ric.map((_, i) => i + 1);
  plot($("pod-ric-plot"), [{ x: idx, y: ric, color: "#26c", bar: true }], { ymin: Math.min(...ric) - 1, ymax: 100, title: "RIC (%)" });
  plot($("pod-mode-plot"), [{ x: linspace(N_POINTS), y: Array.from(demo.mode(k)), color: "#000" }], { title: `ψ_${k}(x)` });
}

let comparison = null;

function recompute(demo) {
  const re = +$("rom-re").value, eta = +$("rom-eta").value;
  $("rom-re-v").textContent = re;
  $("rom-eta-v").textContent = eta.toFixed(2);
  if (comparison) comparison.free();
  comparison = demo.compare(re, eta);
  const c = comparison.rmse_closure();
  $("rom-rmse").textContent =
    `RMSE vs true projection: GP ${(comparison.rmse_gp() * 1e3).toFixed(3)}e-3, ` +
    (isFinite(c) ? `closure ${(c * 1e3).toFixed(3)}e-3` : "closure diverged");
  const ts = linspace(N_SNAPSHOTS);
  const coefs = [["ror", "#000"], ["gp", "#d33"], ["closure", "#26c"]]
    .filter(([m]) => m !== "closure" || isFinite(c))
    .map(([m, color]) => ({ x: ts, y: Array.from(comparison.coefficient(m, 1)), color }));
  plot($("rom-coef-plot"), coefs, { title: "α_1(t)" });
  drawRomField(c);
}

function drawRomField(c) {
  const t = +$("rom-t").value;
  $("rom-t-v").textContent = t.toFixed(3);
  const j = Math.round(t * (N_SNAPSHOTS - 1));
  const xs = linspace(N_POINTS);
  const models = [["ror", "#000"], ["gp", "#d33"], ["closure", "#26c"]].filter(([m]) => m !== "closure" || isFinite(c));
  plot($("rom-field-plot"), models.map(([m, color]) => ({ x: xs, y: Array.from(comparison.field(m, j)), color })), { title: "reconstructed u(x, t)" });
}

async function main() {
  await init();
  drawExact();
  $("exact-t").oninput = drawExact;
  $("exact-re").oninput = drawExact;

  $("status").textContent = "computing POD basis…";
  await new Promise((r) => setTimeout(r, 0));
  const demo = new Demo(N_POINTS, N_SNAPSHOTS, 1000, 8, 16);
  $("status").textContent = "";
  drawPod(demo);
  $("pod-k").oninput = () => drawPod(demo);

  recompute(demo);
  $("rom-re").onchange = () => recompute(demo);
  $("rom-eta").oninput = () => recompute(demo);
  $("rom-t").oninput = () => drawRomField(comparison.rmse_closure());
}

main().catch((e) => { $("status").textContent = String(e); });

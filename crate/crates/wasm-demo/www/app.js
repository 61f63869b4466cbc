// Wires the controls to the three wasm operations and draws the curves.
// Build the module first:  wasm-pack build --target web --out-dir www/pkg

import init, { density_curve, ecf_curve, hazard_curve } from "./pkg/censored_density_wasm.js";

const $ = (id) => document.getElementById(id);
const status = $("status");

const CONTROLS = ["design", "censoring", "n", "seed", "c", "threshold_c", "auto_h", "h", "reflect", "truncate"];

function params() {
  return {
    design: $("design").value,
    censoring: $("censoring").checked,
    n: Number($("n").value),
    seed: Number($("seed").value),
    c: Number($("c").value),
    threshold_c: Number($("threshold_c").value),
    bandwidth: $("auto_h").checked ? null : Number($("h").value),
    reflect: $("reflect").checked,
    truncate: $("truncate").checked,
    points: 201,
  };
}

function niceTicks(lo, hi, count = 5) {
  const span = hi - lo;
  if (!(span > 0)) return [lo];
  const raw = span / count;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const step = [1, 2, 2.5, 5, 10].map((m) => m * mag).find((s) => span / s <= count + 1) || mag * 10;
  const ticks = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12; t += step) ticks.push(t);
  return ticks;
}

// series: [{xs, ys, color, width, dash, label}], marks: [{x, label}]
function plot(canvas, series, marks = []) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height;
  const m = { l: 46, r: 12, t: 10, b: 24 };
  ctx.clearRect(0, 0, W, H);

  let xlo = Infinity, xhi = -Infinity, ylo = Infinity, yhi = -Infinity;
  for (const s of series) {
    for (let i = 0; i < s.xs.length; i++) {
      const x = s.xs[i], y = s.ys[i];
      if (!Number.isFinite(x) || !Number.isFinite(y)) continue;
      xlo = Math.min(xlo, x); xhi = Math.max(xhi, x);
      ylo = Math.min(ylo, y); yhi = Math.max(yhi, y);
    }
  }
  if (!(xhi > xlo)) return;
  ylo = Math.min(ylo, 0);
  const pad = 0.06 * (yhi - ylo || 1);
  yhi += pad;
  const sx = (x) => m.l + ((x - xlo) / (xhi - xlo)) * (W - m.l - m.r);
  const sy = (y) => H - m.b - ((y - ylo) / (yhi - ylo)) * (H - m.t - m.b);

  ctx.font = "11px system-ui, sans-serif";
  ctx.strokeStyle = "#e3e8f0";
  ctx.fillStyle = "#68738a";
  ctx.lineWidth = 1;
  for (const t of niceTicks(xlo, xhi)) {
    ctx.beginPath(); ctx.moveTo(sx(t), m.t); ctx.lineTo(sx(t), H - m.b); ctx.stroke();
    ctx.textAlign = "center";
    ctx.fillText(t.toPrecision(3).replace(/\.?0+$/, ""), sx(t), H - m.b + 14);
  }
  for (const t of niceTicks(ylo, yhi, 4)) {
    ctx.beginPath(); ctx.moveTo(m.l, sy(t)); ctx.lineTo(W - m.r, sy(t)); ctx.stroke();
    ctx.textAlign = "right";
    ctx.fillText(t.toPrecision(3).replace(/\.?0+$/, ""), m.l - 5, sy(t) + 4);
  }

  for (const mark of marks) {
    ctx.strokeStyle = "#c58f00";
    ctx.setLineDash([2, 3]);
    ctx.beginPath(); ctx.moveTo(sx(mark.x), m.t); ctx.lineTo(sx(mark.x), H - m.b); ctx.stroke();
    ctx.setLineDash([]);
    ctx.fillStyle = "#9a7100";
    ctx.textAlign = "left";
    ctx.fillText(mark.label, sx(mark.x) + 4, m.t + 10);
  }

  let legendX = m.l + 8;
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = s.width || 1.6;
    ctx.setLineDash(s.dash || []);
    ctx.beginPath();
    let pen = false;
    for (let i = 0; i < s.xs.length; i++) {
      const y = s.ys[i];
      if (!Number.isFinite(y)) { pen = false; continue; }
      const px = sx(s.xs[i]), py = sy(y);
      if (pen) ctx.lineTo(px, py); else ctx.moveTo(px, py);
      pen = true;
    }
    ctx.stroke();
    ctx.setLineDash([]);
    if (s.label) {
      ctx.fillStyle = s.color;
      ctx.textAlign = "left";
      ctx.fillText("— " + s.label, legendX, m.t + 10);
      legendX += ctx.measureText("— " + s.label).width + 18;
    }
  }
}

function fmt(v, digits = 3) { return Number(v).toPrecision(digits); }

function redraw() {
  const p = params();
  $("n_out").value = p.n;
  $("c_out").value = $("c").value;
  $("tc_out").value = $("threshold_c").value;
  $("h_out").value = $("h").value;
  $("h").disabled = $("auto_h").checked;
  try {
    const d = JSON.parse(density_curve(JSON.stringify(p)));
    plot($("density_plot"), [
      { xs: d.x, ys: d.truth, color: "#9aa4b5", width: 1.2, dash: [5, 4], label: "true density" },
      { xs: d.x, ys: d.estimate, color: "#2458c5", label: "estimate" },
    ]);
    $("density_note").textContent =
      `h = ${fmt(d.bandwidth)} (${d.auto_bandwidth ? "automatic" : "fixed"}), ` +
      `${Math.round(d.censored_fraction * 100)}% censored, n = ${d.n}`;

    const hz = JSON.parse(hazard_curve(JSON.stringify(p)));
    plot($("hazard_plot"), [
      { xs: hz.x, ys: hz.truth, color: "#9aa4b5", width: 1.2, dash: [5, 4], label: "true hazard" },
      { xs: hz.x, ys: hz.estimate, color: "#b0312f", label: "estimate" },
    ]);
    $("hazard_note").textContent =
      "density over smoothed Kaplan–Meier survival (denominator floored at 0.05)";

    const e = JSON.parse(ecf_curve(JSON.stringify(p)));
    plot($("ecf_plot"), [
      { xs: e.t, ys: e.magnitude, color: "#1d7a4f", label: "|ecf(t)|" },
      { xs: [e.t[0], e.t[e.t.length - 1]], ys: [e.threshold, e.threshold],
        color: "#9aa4b5", width: 1.2, dash: [5, 4], label: `threshold ${fmt(e.threshold)}` },
    ], [{ x: e.t_star, label: `t* = ${fmt(e.t_star)}  →  h = ${fmt(e.bandwidth)}` }]);
    $("ecf_note").textContent = e.ceiling_hit
      ? "no qualifying crossing below the search ceiling; bandwidth fell back to 1/t_max"
      : "h = 1/t*, the first frequency whose whole look-ahead window stays under the threshold";

    status.textContent = "";
    status.classList.remove("error");
  } catch (err) {
    status.textContent = String(err);
    status.classList.add("error");
  }
}

init().then(() => {
  for (const id of CONTROLS) $(id).addEventListener("input", redraw);
  redraw();
}).catch((err) => {
  status.classList.add("error");
  status.textContent =
    "failed to load the wasm module — build it with " +
    "`wasm-pack build --target web --out-dir www/pkg` first (" + err + ")";
});

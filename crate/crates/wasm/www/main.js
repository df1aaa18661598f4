import init, { noise_curve, train_demo, sensitivity_probe } from "./pkg/fairfm_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function show(id, text, isError = false) {
  const el = $(id);
  el.textContent = text;
  el.className = isError ? "out err" : "out";
}

function guarded(outId, fn) {
  return () => {
    try {
      fn();
    } catch (e) {
      show(outId, String(e.message ?? e), true);
    }
  };
}

function plotNoise() {
  const pts = JSON.parse(noise_curve(num("nc-d"), num("nc-delta")));
  const c = $("nc-canvas");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const series = [
    ["laplace_std", "#1f77b4", []],
    ["gaussian_std", "#ff7f0e", []],
    ["fair_laplace_std", "#1f77b4", [5, 4]],
    ["fair_gaussian_std", "#ff7f0e", [5, 4]],
  ];
  const all = pts.flatMap((p) => series.map(([k]) => Math.log10(p[k])));
  const lo = Math.floor(Math.min(...all));
  const hi = Math.ceil(Math.max(...all));
  const pad = 40;
  const x = (e) => pad + ((Math.log10(e) + 2) / 3) * (c.width - 2 * pad);
  const y = (v) => c.height - pad - ((Math.log10(v) - lo) / (hi - lo)) * (c.height - 2 * pad);
  g.strokeStyle = "#999";
  g.fillStyle = "#555";
  g.font = "11px sans-serif";
  g.strokeRect(pad, pad, c.width - 2 * pad, c.height - 2 * pad);
  for (let e = -2; e <= 1; e++) g.fillText(`1e${e}`, x(10 ** e) - 10, c.height - pad + 14);
  for (let v = lo; v <= hi; v++) g.fillText(`1e${v}`, 4, y(10 ** v) + 4);
  g.fillText("ε", c.width / 2, c.height - 8);
  for (const [key, color, dash] of series) {
    g.strokeStyle = color;
    g.setLineDash(dash);
    g.beginPath();
    pts.forEach((p, i) => (i ? g.lineTo : g.moveTo).call(g, x(p.epsilon), y(p[key])));
    g.stroke();
  }
  g.setLineDash([]);
  const at1 = pts.find((p) => Math.abs(p.epsilon - 1) < 1e-9);
  show(
    "nc-out",
    "solid: clean objective, dashed: with fairness term; blue Laplace, orange Gaussian\n" +
      `at ε = 1: Laplace ${at1.laplace_std.toFixed(1)}, Gaussian ${at1.gaussian_std.toFixed(1)}`
  );
}

function train() {
  const r = JSON.parse(
    train_demo($("tr-method").value, num("tr-eps"), num("tr-delta"), num("tr-alpha"), BigInt(num("tr-seed")))
  );
  const c = $("tr-canvas");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const s = c.width;
  const px = (a) => a * s;
  const py = (b) => s - b * s;
  // The model has no intercept, so its boundary passes through the origin.
  const [w0, w1] = r.w;
  g.fillStyle = "rgba(255,127,14,0.08)";
  g.beginPath();
  const corners = [[0, 0], [1, 0], [1, 1], [0, 1]];
  const score = ([a, b]) => w0 * a + w1 * b;
  const positive = corners.filter((p) => score(p) > 0);
  if (positive.length) {
    g.moveTo(px(0), py(0));
    const edge = [];
    for (let i = 0; i < 4; i++) {
      const p = corners[i];
      const q = corners[(i + 1) % 4];
      if (score(p) > 0) edge.push(p);
      const sp = score(p);
      const sq = score(q);
      if ((sp > 0) !== (sq > 0) && sp !== sq) {
        const t = sp / (sp - sq);
        edge.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
      }
    }
    edge.forEach(([a, b], i) => (i ? g.lineTo(px(a), py(b)) : g.moveTo(px(a), py(b))));
    g.closePath();
    g.fill();
  }
  for (const p of r.test) {
    g.fillStyle = p.y ? "#ff7f0e" : "#1f77b4";
    g.beginPath();
    if (p.z) g.arc(px(p.a), py(p.b), 4, 0, 2 * Math.PI);
    else g.rect(px(p.a) - 3.5, py(p.b) - 3.5, 7, 7);
    g.fill();
  }
  const fmt = (v) => (v == null ? "n/a" : v.toFixed(3));
  show(
    "tr-out",
    `${r.method}  w = [${r.w.map((v) => v.toFixed(3)).join(", ")}]\n` +
      `accuracy ${fmt(r.accuracy)}  risk difference ${fmt(r.risk_difference)}` +
      (r.epsilon == null ? "" : `  ε = ${r.epsilon}`) +
      (r.delta == null ? "" : `  δ = ${r.delta.toExponential(2)}`) +
      "\norange = positive label / predicted-positive region; circles = group 1, squares = group 0"
  );
}

function probe() {
  const r = JSON.parse(sensitivity_probe(num("sp-d"), num("sp-trials"), BigInt(num("sp-seed"))));
  const c = $("sp-canvas");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const max = Math.max(...r.histogram, 1);
  const bw = c.width / r.histogram.length;
  g.fillStyle = "#2ca02c";
  r.histogram.forEach((h, i) => {
    const bh = (h / max) * (c.height - 20);
    g.fillRect(i * bw + 1, c.height - 14 - bh, bw - 2, bh);
  });
  g.fillStyle = "#555";
  g.font = "11px sans-serif";
  g.fillText("0", 2, c.height - 2);
  g.fillText("fair L1 change / bound", c.width / 2 - 60, c.height - 2);
  g.fillText("1", c.width - 8, c.height - 2);
  const row = (name, [m, b]) => `${name.padEnd(8)} max ${m.toFixed(4).padStart(10)}  bound ${b.toFixed(4).padStart(10)}`;
  show(
    "sp-out",
    [row("L1", r.l1), row("L2", r.l2), row("fair L1", r.fair_l1), row("fair L2", r.fair_l2)].join("\n")
  );
}

await init();
$("nc-go").onclick = guarded("nc-out", plotNoise);
$("tr-go").onclick = guarded("tr-out", train);
$("sp-go").onclick = guarded("sp-out", probe);
guarded("nc-out", plotNoise)();
guarded("tr-out", train)();

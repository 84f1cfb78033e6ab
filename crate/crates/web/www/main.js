import init, { spectral_function, emission, coupling_curve } from "./pkg/sbchain_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

// Line plot of one or more series on a canvas, with bare axis labels.
function plot(canvas, series, opts = {}) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 40;
  ctx.clearRect(0, 0, w, h);
  const xs = series.flatMap((s) => s.x);
  const ys = series.flatMap((s) => s.y).concat(opts.yExtra ?? []);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(0, ...ys), Math.max(...ys)];
  const sx = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const sy = (y) => h - pad + ((y - y0) / (y1 - y0 || 1)) * (2 * pad - h);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.fillText(x0.toPrecision(3), pad, h - pad + 14);
  ctx.fillText(x1.toPrecision(3), w - pad - 20, h - pad + 14);
  ctx.fillText(y1.toPrecision(3), 2, pad + 4);
  ctx.fillText(y0.toPrecision(3), 2, h - pad);
  if (opts.xlabel) ctx.fillText(opts.xlabel, w / 2, h - 8);
  for (const s of series) {
    ctx.strokeStyle = s.color ?? "#1565c0";
    ctx.beginPath();
    s.x.forEach((x, i) => (i ? ctx.lineTo(sx(x), sy(s.y[i])) : ctx.moveTo(sx(x), sy(s.y[i]))));
    ctx.stroke();
  }
  for (const v of opts.vlines ?? []) {
    ctx.strokeStyle = v.color;
    ctx.setLineDash([4, 4]);
    ctx.beginPath();
    ctx.moveTo(sx(v.x), pad);
    ctx.lineTo(sx(v.x), h - pad);
    ctx.stroke();
    ctx.setLineDash([]);
  }
}

function guarded(out, f) {
  return () => {
    $(out).textContent = "running...";
    // let the label paint before the blocking call
    setTimeout(() => {
      try {
        f();
      } catch (e) {
        $(out).textContent = "error: " + e;
      }
    }, 10);
  };
}

function runSpectral() {
  const r = JSON.parse(spectral_function(num("sf-sites"), num("sf-wat"), num("sf-alpha"), $("sf-charge").checked));
  const x = r.samples.map((s) => s[0]);
  const y = r.samples.map((s) => s[1]);
  plot($("sf-plot"), [{ x, y }], { xlabel: "omega", vlines: [{ x: num("sf-wat"), color: "#c62828" }, { x: r.omega_eff, color: "#2e7d32" }] });
  $("sf-out").textContent =
    `g = ${r.g.toFixed(5)}  alpha = ${r.alpha.toFixed(4)}  exponent = ${r.exponent.toFixed(4)}\n` +
    `omega_eff = ${r.omega_eff.toFixed(5)}  golden-rule rate = ${r.markovian_gamma.toFixed(5)}`;
}

function runEmission() {
  const r = JSON.parse(emission(num("em-sites"), 1 / 3, num("em-alpha"), num("em-chi"), num("em-dt"), num("em-t")));
  plot($("em-plot"), [{ x: r.t, y: r.pz }, { x: [r.t[0], r.t[r.t.length - 1]], y: [r.ground_pz, r.ground_pz], color: "#999" }], { xlabel: "t" });
  plot($("em-spec"), [{ x: r.omega, y: r.spectrum, color: "#6a1b9a" }], { xlabel: "omega", vlines: [{ x: r.omega_peak, color: "#c62828" }] });
  $("em-out").textContent =
    `final P_z = ${r.pz[r.pz.length - 1].toFixed(4)}  ground P_z = ${r.ground_pz.toFixed(4)}\n` +
    `emission peak at omega = ${r.omega_peak.toFixed(4)}  max bond = ${r.max_bond}`;
}

function runCurve() {
  const r = JSON.parse(coupling_curve(num("cc-lo"), num("cc-hi"), num("cc-n")));
  const v = r.crossing === null ? [] : [{ x: r.crossing, color: "#c62828" }];
  plot($("cc-plot"), [{ x: r.alpha_j, y: r.ratio }, { x: [r.alpha_j[0], r.alpha_j[r.alpha_j.length - 1]], y: [0.25, 0.25], color: "#999" }], { xlabel: "alpha_J", vlines: v });
  $("cc-out").textContent =
    `m01 from ${r.m01[0].toFixed(4)} to ${r.m01[r.m01.length - 1].toFixed(4)}\n` +
    (r.crossing === null ? "g/omega stays below 0.25" : `g/omega reaches 0.25 at alpha_J = ${r.crossing.toFixed(4)}`);
}

await init();
$("sf-run").onclick = guarded("sf-out", runSpectral);
$("em-run").onclick = guarded("em-out", runEmission);
$("cc-run").onclick = guarded("cc-out", runCurve);
runSpectral();
runCurve();

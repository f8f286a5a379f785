import init, { models, realisation, summary, envelope } from "./pkg/setpersist_demo.js";

const $ = (id) => document.getElementById(id);

function status(text, error = false) {
  $("status").textContent = text;
  $("status").className = error ? "error" : "";
}

function params() {
  return {
    model: $("model").value,
    seed: Number($("seed").value) >>> 0,
    resolution: Number($("resolution").value),
    kind: $("kind").value,
  };
}

function drawRaster(r) {
  const canvas = $("raster");
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(r.nx, r.ny);
  const span = Math.max(-r.field_min, r.field_max, 1e-9);
  for (let j = 0; j < r.ny; j++) {
    for (let i = 0; i < r.nx; i++) {
      const src = j * r.nx + i;
      const dst = ((r.ny - 1 - j) * r.nx + i) * 4;
      let v;
      if (r.cells[src]) {
        v = 0;
      } else {
        v = 150 + Math.round(105 * Math.min(1, r.field[src] / span));
      }
      img.data[dst] = v;
      img.data[dst + 1] = v;
      img.data[dst + 2] = r.cells[src] ? 0 : 255;
      img.data[dst + 3] = 255;
    }
  }
  const off = new OffscreenCanvas(r.nx, r.ny);
  off.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const scale = Math.min(canvas.width / r.nx, canvas.height / r.ny);
  ctx.drawImage(off, 0, 0, r.nx * scale, r.ny * scale);
}

function frame(canvas, xs, ys) {
  const pad = 36;
  let [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (x1 <= x0) { x0 -= 0.5; x1 += 0.5; }
  if (y1 <= y0) { y0 -= 0.5; y1 += 0.5; }
  const w = canvas.width - 2 * pad, h = canvas.height - 2 * pad;
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#000";
  ctx.strokeRect(pad, pad, w, h);
  ctx.fillStyle = "#000";
  ctx.font = "11px sans-serif";
  ctx.fillText(x0.toFixed(2), pad, canvas.height - pad + 14);
  ctx.fillText(x1.toFixed(2), pad + w - 30, canvas.height - pad + 14);
  ctx.fillText(y1.toFixed(2), 2, pad + 4);
  ctx.fillText(y0.toFixed(2), 2, pad + h);
  return {
    ctx,
    px: (x) => pad + ((x - x0) / (x1 - x0)) * w,
    py: (y) => pad + h - ((y - y0) / (y1 - y0)) * h,
  };
}

function line(f, xs, ys, color, width = 1.5) {
  f.ctx.strokeStyle = color;
  f.ctx.lineWidth = width;
  f.ctx.beginPath();
  xs.forEach((x, k) => (k ? f.ctx.lineTo(f.px(x), f.py(ys[k])) : f.ctx.moveTo(f.px(x), f.py(ys[k]))));
  f.ctx.stroke();
  f.ctx.lineWidth = 1;
}

function drawDiagram(r) {
  const pts = r.diagram;
  const all = pts.flatMap((p) => [p[1], p[2]]).concat([r.field_min, r.field_max]);
  const f = frame($("diagram"), all, all);
  line(f, [r.field_min, r.field_max], [r.field_min, r.field_max], "#999", 1);
  for (const [dim, b, d] of pts) {
    f.ctx.fillStyle = dim === 0 ? "#1f77b4" : "#d62728";
    f.ctx.beginPath();
    f.ctx.arc(f.px(b), f.py(d), 2.5, 0, 2 * Math.PI);
    f.ctx.fill();
  }
}

function drawCurve(c) {
  const f = frame($("curve"), c.args, c.values);
  line(f, c.args, c.values, "#1f77b4");
  $("curve-caption").textContent = `${c.kind} summary`;
}

function drawEnvelope(e) {
  const canvas = $("envelope");
  const f = frame(canvas, e.args, e.lower.concat(e.upper, e.observed));
  f.ctx.fillStyle = "#ccc";
  f.ctx.beginPath();
  e.args.forEach((x, k) => (k ? f.ctx.lineTo(f.px(x), f.py(e.upper[k])) : f.ctx.moveTo(f.px(x), f.py(e.upper[k]))));
  for (let k = e.args.length - 1; k >= 0; k--) f.ctx.lineTo(f.px(e.args[k]), f.py(e.lower[k]));
  f.ctx.closePath();
  f.ctx.fill();
  line(f, e.args, e.observed, "#000");
  f.ctx.fillStyle = "#d00";
  e.outside.forEach((out, k) => {
    if (!out) return;
    f.ctx.beginPath();
    f.ctx.arc(f.px(e.args[k]), f.py(e.observed[k]), 2.5, 0, 2 * Math.PI);
    f.ctx.fill();
  });
  const verdict = e.reject ? "rejected" : "not rejected";
  $("envelope-caption").textContent =
    `${e.kind}: p = ${e.p.toFixed(3)} with ${e.sims} simulations, null ${verdict} at alpha = ${e.alpha}`;
}

function guarded(label, fn) {
  return () => {
    status(`${label}...`);
    setTimeout(() => {
      const t0 = performance.now();
      try {
        const note = fn();
        const secs = ((performance.now() - t0) / 1000).toFixed(1);
        status(note ? `${note} (${secs} s)` : `${label} done in ${secs} s`);
      } catch (err) {
        status(String(err.message ?? err), true);
      }
    }, 10);
  };
}

const draw = guarded("Simulating", () => {
  const p = params();
  const r = JSON.parse(realisation(p.model, p.seed, p.resolution));
  drawRaster(r);
  drawDiagram(r);
  drawCurve(JSON.parse(summary(p.model, p.seed, p.resolution, p.kind)));
  return `area fraction ${r.area_fraction.toFixed(3)}, ${r.components} components, ${r.holes} holes`;
});

const test = guarded("Testing", () => {
  const p = params();
  const e = JSON.parse(
    envelope(p.model, $("observed").value, Number($("sims").value), p.seed, p.resolution, p.kind, Number($("alpha").value)),
  );
  drawEnvelope(e);
});

await init();
for (const name of JSON.parse(models())) {
  $("model").add(new Option(name, name));
  $("observed").add(new Option(name, name));
}
$("observed").value = "cluster";
$("draw").onclick = draw;
$("test").onclick = test;
draw();

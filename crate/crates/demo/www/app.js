import init, { Session } from "./pkg/tsuq_demo.js";

const $ = (id) => document.getElementById(id);
let session = null;

function status(msg, err = false) {
  $("status").textContent = msg;
  $("status").className = err ? "err" : "";
}

function frame(ctx, xs, ys, pad = 30) {
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  const w = ctx.canvas.width - 2 * pad, h = ctx.canvas.height - 2 * pad;
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w, h);
  ctx.fillStyle = "#666";
  ctx.font = "10px sans-serif";
  ctx.fillText(y1.toFixed(2), 2, pad + 4);
  ctx.fillText(y0.toFixed(2), 2, pad + h);
  return {
    x: (v) => pad + (x1 > x0 ? (v - x0) / (x1 - x0) : 0) * w,
    y: (v) => pad + h - (y1 > y0 ? (v - y0) / (y1 - y0) : 0.5) * h,
  };
}

function line(ctx, s, xs, ys, color, dot = false) {
  ctx.strokeStyle = color;
  ctx.fillStyle = color;
  ctx.beginPath();
  xs.forEach((x, i) => (i ? ctx.lineTo(s.x(x), s.y(ys[i])) : ctx.moveTo(s.x(x), s.y(ys[i]))));
  ctx.stroke();
  if (dot) xs.forEach((x, i) => ctx.fillRect(s.x(x) - 2, s.y(ys[i]) - 2, 4, 4));
}

function drawBand(f) {
  const n = Math.min(f.y.length, 200);
  const t = [...Array(n).keys()];
  const lo = t.map((i) => f.mean[i] - 2 * f.std[i]);
  const hi = t.map((i) => f.mean[i] + 2 * f.std[i]);
  const ctx = $("band").getContext("2d");
  const s = frame(ctx, t, [...lo, ...hi, ...f.y.slice(0, n)]);
  ctx.fillStyle = "rgba(70,130,220,.25)";
  ctx.beginPath();
  t.forEach((i) => ctx.lineTo(s.x(i), s.y(hi[i])));
  t.slice().reverse().forEach((i) => ctx.lineTo(s.x(i), s.y(lo[i])));
  ctx.fill();
  line(ctx, s, t, f.mean.slice(0, n), "#2a5db0");
  line(ctx, s, t, f.y.slice(0, n), "#333");
  const m = f.metrics;
  $("metrics").innerHTML =
    "<tr><th>MAPE</th><th>MSE</th><th>R²</th><th>ECE</th><th>NLL</th></tr>" +
    `<tr><td>${m.mape.toFixed(2)}</td><td>${m.mse.toFixed(4)}</td><td>${m.r2.toFixed(4)}</td>` +
    `<td>${m.ece.toFixed(4)}</td><td>${m.nll.toFixed(3)}</td></tr>`;
}

function drawReliability() {
  const scale = parseFloat($("scale").value);
  $("scaleval").textContent = scale.toFixed(2);
  if (!session) return;
  try {
    const r = JSON.parse(session.reliability(scale));
    const ctx = $("rel").getContext("2d");
    const s = frame(ctx, [0, 1], [0, 1]);
    line(ctx, s, [0, 1], [0, 1], "#bbb");
    line(ctx, s, r.levels, r.coverage, "#c0392b", true);
    $("ece").textContent = `ECE ${r.ece.toFixed(4)}`;
  } catch (e) {
    status(String(e), true);
  }
}

function drawConf() {
  try {
    const c = JSON.parse(session.confError());
    const ctx = $("conf").getContext("2d");
    const s = frame(ctx, [0, 1], c.mae);
    line(ctx, s, c.x, c.mae, "#27ae60", true);
    $("conflabel").textContent = `MAE of predictions with σ above each threshold: ${c.label}`;
  } catch (e) {
    status(String(e), true);
  }
}

function train() {
  status("training…");
  // let the status repaint before the blocking call
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const f = JSON.parse(
        session.forecast($("arch").value, $("method").value, +$("epochs").value, +$("seed").value),
      );
      drawBand(f);
      drawReliability();
      drawConf();
      status(`${f.architecture} ${f.method}: ${((performance.now() - t0) / 1000).toFixed(1)} s`);
    } catch (e) {
      status(String(e), true);
    }
  }, 20);
}

await init();
session = new Session();
$("train").onclick = train;
$("scale").oninput = drawReliability;
status("ready");

import init, { flat_curves, cluster_profiles, simulate_flat } from "./pkg/gossip_freshness_web.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"];
const $ = (id) => document.getElementById(id);

// Sliders are log10 of the rate; 10^-2 of gossip is treated as zero.
function rate(id, zeroAtMin = false) {
  const el = $(id);
  const v = zeroAtMin && el.value === el.min ? 0 : Math.pow(10, Number(el.value));
  el.nextElementSibling.textContent = v.toPrecision(3);
  return v;
}

function plot(canvas, series, xlog) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, pad = 40;
  ctx.clearRect(0, 0, W, H);
  const xs = series.flatMap((s) => s.x);
  const ys = series.flatMap((s) => s.y);
  const fx = xlog ? Math.log10 : (v) => v;
  const x0 = fx(Math.min(...xs)), x1 = fx(Math.max(...xs));
  const y1 = Math.max(...ys) * 1.05 || 1;
  const px = (x) => pad + ((fx(x) - x0) / (x1 - x0 || 1)) * (W - 2 * pad);
  const py = (y) => H - pad - (y / y1) * (H - 2 * pad);

  ctx.strokeStyle = "#888";
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.beginPath();
  ctx.moveTo(pad, pad / 2);
  ctx.lineTo(pad, H - pad);
  ctx.lineTo(W - pad / 2, H - pad);
  ctx.stroke();
  for (let i = 0; i <= 4; i++) {
    const y = (y1 * i) / 4;
    ctx.fillText(y.toFixed(3), 2, py(y) + 4);
  }
  ctx.fillText(String(Math.min(...xs)), pad, H - pad + 14);
  ctx.fillText(String(Math.max(...xs)), W - pad - 10, H - pad + 14);

  series.forEach((s, i) => {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    s.x.forEach((x, j) => (j ? ctx.lineTo(px(x), py(s.y[j])) : ctx.moveTo(px(x), py(s.y[j]))));
    ctx.stroke();
    if (s.mark) {
      ctx.fillStyle = ctx.strokeStyle;
      ctx.beginPath();
      ctx.arc(px(s.mark[0]), py(s.mark[1]), 3.5, 0, 2 * Math.PI);
      ctx.fill();
    }
  });
}

function legend(el, series) {
  el.innerHTML = series
    .map((s, i) => `<span style="color:${COLORS[i % COLORS.length]}">■ ${s.label}</span>`)
    .join("");
}

function guard(fn) {
  try {
    fn();
    $("status").textContent = "";
  } catch (e) {
    $("status").textContent = String(e.message ?? e);
    $("status").className = "error";
  }
}

function drawFlat() {
  guard(() => {
    const maxN = Number($("f-n").value);
    $("f-n").nextElementSibling.textContent = maxN;
    const curves = JSON.parse(flat_curves(rate("f-e"), rate("f-s"), rate("f-g", true), maxN));
    const series = curves.map((c) => ({ label: c.policy, x: c.n, y: c.p }));
    plot($("flat"), series, false);
    legend($("flat-legend"), series);
  });
}

function drawClustered() {
  guard(() => {
    const profiles = JSON.parse(
      cluster_profiles(Number($("c-n").value), rate("c-e"), rate("c-s"), rate("c-c"), rate("c-g", true)),
    );
    const series = profiles.map((p) => ({
      label: `(${p.source},${p.cluster}) k*=${p.k_star} p*=${p.p_star.toFixed(4)}`,
      x: p.k,
      y: p.p,
      mark: [p.k_star, p.p_star],
    }));
    plot($("clustered"), series, true);
    legend($("clustered-legend"), series);
  });
}

function runSim() {
  guard(() => {
    const r = JSON.parse(
      simulate_flat(
        $("s-policy").value,
        Number($("s-n").value),
        rate("f-e"),
        rate("f-s"),
        rate("f-g", true),
        Number($("s-cycles").value),
        Number($("s-seed").value),
      ),
    );
    $("sim-out").textContent =
      `exact     ${r.analytic.toFixed(6)}\n` +
      `estimate  ${r.estimate.toFixed(6)}  95% CI [${r.ci95[0].toFixed(6)}, ${r.ci95[1].toFixed(6)}]\n` +
      `cycles    ${r.cycles}`;
  });
}

await init();
for (const id of ["f-e", "f-s", "f-g", "f-n"]) $(id).addEventListener("input", drawFlat);
for (const id of ["c-n", "c-e", "c-s", "c-c", "c-g"]) $(id).addEventListener("input", drawClustered);
$("s-run").addEventListener("click", runSim);
drawFlat();
drawClustered();

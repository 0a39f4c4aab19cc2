import init, { hausdorff, coverage, parse_table } from "./pkg/demo_wasm.js";

const COLORS = { a: "#1f5fbf", b: "#c0392b", pick: "#1e8449", pool: "#888" };

function dot(ctx, [x, y], color, r = 5) {
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(x, y, r, 0, 2 * Math.PI);
  ctx.fill();
}

function nearest(p, set) {
  let best = null, bestD = Infinity;
  for (const q of set) {
    const d = Math.hypot(p[0] - q[0], p[1] - q[1]);
    if (d < bestD) { bestD = d; best = q; }
  }
  return best;
}

function setDistanceDemo() {
  const canvas = document.getElementById("hd");
  const ctx = canvas.getContext("2d");
  const out = document.getElementById("hd-out");
  let a = [], b = [];

  function draw() {
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    ctx.lineWidth = 1;
    for (const [from, to, color] of [[a, b, COLORS.a], [b, a, COLORS.b]]) {
      if (!to.length) continue;
      ctx.strokeStyle = color;
      ctx.setLineDash([4, 3]);
      for (const p of from) {
        const q = nearest(p, to);
        ctx.beginPath(); ctx.moveTo(...p); ctx.lineTo(...q); ctx.stroke();
      }
    }
    ctx.setLineDash([]);
    a.forEach(p => dot(ctx, p, COLORS.a));
    b.forEach(p => dot(ctx, p, COLORS.b));
    const d = hausdorff(new Float64Array(a.flat()), new Float64Array(b.flat()));
    out.textContent = Number.isNaN(d) ? "n/a (both sets need a point)" : `${d.toFixed(2)} px`;
  }

  canvas.addEventListener("click", e => {
    const rect = canvas.getBoundingClientRect();
    const p = [e.clientX - rect.left, e.clientY - rect.top];
    (e.shiftKey ? b : a).push(p);
    draw();
  });
  document.getElementById("hd-clear").addEventListener("click", () => { a = []; b = []; draw(); });
  draw();
}

function coverageDemo() {
  const canvas = document.getElementById("cov");
  const ctx = canvas.getContext("2d");
  const slider = document.getElementById("budget");
  const label = document.getElementById("budget-val");
  const out = document.getElementById("cov-out");
  let pool = [], test = [];

  function scatter() {
    const rand = (lo, hi) => lo + Math.random() * (hi - lo);
    const centers = Array.from({ length: 4 }, () => [rand(60, 500), rand(50, 270)]);
    test = Array.from({ length: 16 }, (_, i) => {
      const c = centers[i % centers.length];
      return [c[0] + rand(-40, 40), c[1] + rand(-35, 35)];
    });
    pool = Array.from({ length: 14 }, () => [rand(20, 540), rand(20, 300)]);
  }

  function draw() {
    const budget = Number(slider.value);
    label.textContent = budget;
    const result = JSON.parse(coverage(new Float64Array(pool.flat()), new Float64Array(test.flat()), budget));
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    if (result.error) { out.textContent = result.error; return; }
    ctx.strokeStyle = COLORS.pick;
    result.steps.forEach(step => {
      for (const j of step.covers) {
        ctx.beginPath(); ctx.moveTo(...pool[step.pool]); ctx.lineTo(...test[j]); ctx.stroke();
      }
    });
    pool.forEach((p, i) => {
      const round = result.chosen.indexOf(i);
      ctx.fillStyle = round >= 0 ? COLORS.pick : COLORS.pool;
      ctx.fillRect(p[0] - 6, p[1] - 6, 12, 12);
      if (round >= 0) {
        ctx.fillStyle = "#fff";
        ctx.font = "10px sans-serif";
        ctx.fillText(String(round + 1), p[0] - 3, p[1] + 4);
      }
    });
    test.forEach(p => dot(ctx, p, COLORS.b, 4));
    out.textContent = result.steps
      .map((s, r) => `round ${r + 1}: x${s.pool + 1} covers ${s.covers.map(j => "t" + (j + 1)).join(", ")} (cost ${s.cost.toFixed(1)})`)
      .join("\n");
  }

  slider.addEventListener("input", draw);
  document.getElementById("cov-new").addEventListener("click", () => { scatter(); draw(); });
  scatter();
  draw();
}

function parseDemo() {
  const sentence = document.getElementById("sentence");
  const table = document.getElementById("table");
  const out = document.getElementById("parse-out");
  function update() {
    const parsed = JSON.parse(parse_table(table.value, sentence.value));
    if (parsed.error) { out.textContent = parsed.error; return; }
    const span = s => (s ? `[${s[0]}, ${s[1]})` : "unaligned");
    const rows = parsed.triples.map(t =>
      `(${t.subject_type}: ${t.subject} ${span(t.subject_span)}, ${t.predicate}, ${t.object_type}: ${t.object} ${span(t.object_span)})`);
    const skipped = parsed.diagnostics.map(d => `skipped "${d.row}": ${d.reason}`);
    out.textContent = [...rows, ...skipped].join("\n") || "no triples";
  }
  sentence.addEventListener("input", update);
  table.addEventListener("input", update);
  update();
}

await init();
setDistanceDemo();
coverageDemo();
parseDemo();

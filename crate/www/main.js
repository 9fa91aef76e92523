// Wires the page to the wasm module. Build the module first:
//   wasm-pack build crates/charvar-wasm --target web --out-dir ../../www/pkg
// then serve this directory with any static file server.

import init, {
  example_graph,
  polytope_info,
  descend_to_momentum_zero,
  tropical_coordinates,
} from "./pkg/charvar_wasm.js";

const $ = (id) => document.getElementById(id);

function showError(target, message) {
  target.innerHTML = "";
  const p = document.createElement("p");
  p.className = "err";
  p.textContent = message;
  target.appendChild(p);
}

function renderTable(target, header, rows) {
  target.innerHTML = "";
  const table = document.createElement("table");
  const thead = table.createTHead().insertRow();
  for (const h of header) {
    const th = document.createElement("th");
    th.textContent = h;
    thead.appendChild(th);
  }
  const body = table.createTBody();
  for (const row of rows) {
    const tr = body.insertRow();
    for (const cell of row) tr.insertCell().textContent = cell;
  }
  target.appendChild(table);
}

function note(target, text) {
  const p = document.createElement("p");
  p.textContent = text;
  target.prepend(p);
}

function currentGraph() {
  return $("graph").value;
}

function loadPreset() {
  $("graph").value = example_graph($("preset").value);
}

function runPolytope() {
  const out = $("polytope-out");
  const level = Number($("level").value);
  const data = JSON.parse(polytope_info(currentGraph(), level));
  if (data.error) return showError(out, data.error);
  renderTable(out, data.edges, data.points);
  note(
    out,
    `${data.count} lattice point(s) at level ${data.level}` +
      (data.truncated ? " (table truncated)" : ""),
  );
}

function plotObjective(values) {
  const canvas = $("kn-plot");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!values.length) return;
  const floor = 1e-18;
  const logs = values.map((v) => Math.log10(Math.max(v, floor)));
  const lo = Math.min(...logs);
  const hi = Math.max(...logs, lo + 1e-9);
  const px = (i) => 8 + (i / Math.max(values.length - 1, 1)) * (canvas.width - 16);
  const py = (l) => 8 + ((hi - l) / (hi - lo)) * (canvas.height - 16);
  ctx.beginPath();
  logs.forEach((l, i) => (i ? ctx.lineTo(px(i), py(l)) : ctx.moveTo(px(i), py(l))));
  ctx.strokeStyle = "#2980b9";
  ctx.lineWidth = 1.5;
  ctx.stroke();
  ctx.fillStyle = "#888";
  ctx.font = "11px monospace";
  ctx.fillText(`log10 objective: ${hi.toFixed(2)} down to ${lo.toFixed(2)}`, 12, 16);
}

function runDescent() {
  const out = $("kn-out");
  const data = JSON.parse(
    descend_to_momentum_zero(
      currentGraph(),
      Number($("kn-seed").value),
      Number($("kn-tol").value),
      Number($("kn-iters").value),
    ),
  );
  if (data.error) return showError(out, data.error);
  plotObjective(data.objective);
  renderTable(out, ["edge", "length"], data.lengths.map(([e, x]) => [e, x.toPrecision(8)]));
  note(
    out,
    `seed ${data.seed}: residual ${data.residual.toExponential(2)} after ` +
      `${data.iterations} step(s); image ${data.in_cone ? "lies in" : "LEFT"} the moment cone`,
  );
}

function runTropical() {
  const out = $("trop-out");
  const data = JSON.parse(tropical_coordinates(currentGraph()));
  if (data.error) return showError(out, data.error);
  renderTable(out, ["word", "length"], data.rows.map(([w, v]) => [w, v.toPrecision(6)]));
  note(out, `genus ${data.genus}: ${data.rows.length} coordinates`);
}

await init();
loadPreset();
$("load-preset").addEventListener("click", loadPreset);
$("run-polytope").addEventListener("click", runPolytope);
$("run-kn").addEventListener("click", runDescent);
$("run-trop").addEventListener("click", runTropical);

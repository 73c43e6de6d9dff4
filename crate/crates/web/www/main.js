import init, { channel_on_bloch, measure_histogram, decompose_blocks } from "./pkg/qalg_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function show(id, f) {
  try {
    const v = JSON.parse(f());
    $(id).textContent = JSON.stringify(v, null, 2);
    return v;
  } catch (e) {
    $(id).textContent = "error: " + e;
    return null;
  }
}

function runChannel() {
  show("ch-out", () => channel_on_bloch($("ch-kind").value, num("ch-p"), num("ch-x"), num("ch-y"), num("ch-z")));
}

function runMeasure() {
  const v = show("m-out", () =>
    measure_histogram(num("m-x"), num("m-y"), num("m-z"), num("m-ax"), num("m-ay"), num("m-az"), num("m-n"), num("m-seed")));
  const hist = $("m-hist");
  hist.innerHTML = "";
  if (!v) return;
  v.outcomes.forEach((label, i) => {
    const row = document.createElement("div");
    const bar = document.createElement("span");
    bar.className = "bar";
    bar.style.width = (v.probabilities[i] * 20) + "rem";
    row.append(`${label.padStart(3)} `, bar, ` ${v.probabilities[i].toFixed(4)} (${v.counts[i]})`);
    hist.append(row);
  });
}

function runDecompose() {
  show("d-out", () => decompose_blocks($("d-blocks").value, num("d-d0"), num("d-seed")));
}

await init();
for (const id of ["ch-kind", "ch-p", "ch-x", "ch-y", "ch-z"]) $(id).addEventListener("input", runChannel);
for (const id of ["m-x", "m-y", "m-z", "m-ax", "m-ay", "m-az", "m-n", "m-seed"]) $(id).addEventListener("input", runMeasure);
$("d-run").addEventListener("click", runDecompose);
runChannel();
runMeasure();
runDecompose();

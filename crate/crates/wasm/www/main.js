import init, { represent, d_separation, copula_grid } from "./pkg/vinedag_wasm.js";

const $ = (id) => document.getElementById(id);

function show(target, f) {
  try {
    f();
  } catch (e) {
    $(target).innerHTML = "";
    const p = document.createElement("p");
    p.className = "err";
    p.textContent = e.message ?? String(e);
    $(target).appendChild(p);
  }
}

function pre(text) {
  const el = document.createElement("pre");
  el.textContent = text;
  return el;
}

function runRepresent() {
  show("represent-out", () => {
    const mu0 = $("mu0").value.trim();
    const r = JSON.parse(represent($("dags").value, $("g").value, mu0 === "" ? undefined : Number(mu0)));
    const out = $("represent-out");
    out.innerHTML = "";
    out.appendChild(pre(`truncation level ${r.truncation_level} (lower bound ${r.lower_bound})`));
    const lines = r.trees.map((t, i) =>
      `T${i + 1}: ` + t.map((e) => {
        const cond = e.conditioning.length ? "|" + e.conditioning.join(",") : "";
        return `${e.conditioned[0]},${e.conditioned[1]}${cond}${e.independent ? " (indep)" : ""}`;
      }).join("; "));
    out.appendChild(pre(lines.join("\n")));
    out.appendChild(pre("matrix\n" + r.matrix + "\nindependence\n" + r.independence));
    for (const w of r.warnings) out.appendChild(pre("warning: " + w));
  });
}

function runDsep() {
  show("dsep-out", () => {
    const r = JSON.parse(d_separation($("dag").value, $("a").value, $("b").value, $("s").value));
    const out = $("dsep-out");
    out.innerHTML = "";
    out.appendChild(pre(r.separated ? "d-separated" : "d-connected"));
    out.appendChild(pre("v-structures: " + (r.v_structures.map((v) => `${v[0]} -> ${v[1]} <- ${v[2]}`).join(", ") || "none")));
    out.appendChild(pre(r.dot));
  });
}

function runGrid() {
  show("grid-out", () => {
    const n = 100;
    const r = JSON.parse(copula_grid($("family").value, $("params").value, Number($("rotation").value), n));
    const ctx = $("canvas").getContext("2d");
    const img = ctx.createImageData(n, n);
    const top = Math.log1p(Math.min(r.max, 50));
    for (let i = 0; i < n; i++) {
      for (let j = 0; j < n; j++) {
        const c = r.density[i * n + j];
        const t = Number.isFinite(c) ? Math.min(Math.log1p(c) / top, 1) : 1;
        const k = 4 * ((n - 1 - i) * n + j);
        img.data[k] = 255 * t;
        img.data[k + 1] = 80 * t;
        img.data[k + 2] = 255 * (1 - t);
        img.data[k + 3] = 255;
      }
    }
    ctx.putImageData(img, 0, 0);
    $("grid-out").innerHTML = "";
    $("grid-out").appendChild(pre(`Kendall's tau ${r.tau.toFixed(4)}, max density ${r.max.toFixed(3)}`));
  });
}

await init();
$("represent").onclick = runRepresent;
$("dsep").onclick = runDsep;
$("grid").onclick = runGrid;
runRepresent();
runDsep();
runGrid();

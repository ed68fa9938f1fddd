import init, { categorical_demo, segmentation_demo, rover_demo } from "./pkg/crowdinfer_web_demo.js";

const $ = (id) => document.getElementById(id);

function show(target, fn) {
  try {
    fn();
  } catch (e) {
    $(target).innerHTML = `<p class="error">${escape(String(e))}</p>`;
  }
}

function escape(s) {
  return s.replace(/[&<>"]/g, (c) => ({ "&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;" })[c]);
}

function fmt(x) {
  return x == null ? "" : x.toFixed(3);
}

function runCategorical() {
  const r = JSON.parse(categorical_demo($("cat-input").value, $("cat-method").value));
  const rows = r.labels
    .map((l) => `<tr><td>${escape(l.task)}</td><td>${escape(l.label)}</td><td>${fmt(l.confidence)}</td></tr>`)
    .join("");
  const skills = r.skills.map(([w, s]) => `<tr><td>${escape(w)}</td><td>${fmt(s)}</td></tr>`).join("");
  $("cat-out").innerHTML = `
    <p>${r.method}, ${r.iterations} iterations. Krippendorff's alpha ${fmt(r.alpha)}, agreement with MV ${fmt(r.agreement)}.</p>
    <div style="display:flex;gap:2em">
      <table><tr><th>task</th><th>label</th><th>posterior</th></tr>${rows}</table>
      <table><tr><th>worker</th><th>skill</th></tr>${skills || "<tr><td colspan=2>none</td></tr>"}</table>
    </div>`;
}

function drawMask(bits, h, w, caption) {
  const fig = document.createElement("figure");
  const canvas = document.createElement("canvas");
  canvas.width = w;
  canvas.height = h;
  canvas.style.width = `${w * 2}px`;
  canvas.style.height = `${h * 2}px`;
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(w, h);
  bits.forEach((b, i) => {
    const v = b ? 30 : 240;
    img.data.set([v, v, v, 255], i * 4);
  });
  ctx.putImageData(img, 0, 0);
  const cap = document.createElement("figcaption");
  cap.textContent = caption;
  fig.append(canvas, cap);
  return fig;
}

function runSegmentation() {
  const r = JSON.parse(
    segmentation_demo(Number($("seg-seed").value), Number($("seg-workers").value), Number($("seg-flip").value)),
  );
  const out = $("seg-out");
  out.innerHTML = "";
  const fused = document.createElement("div");
  fused.className = "masks";
  fused.append(
    drawMask(r.truth, r.height, r.width, "truth"),
    drawMask(r.mv, r.height, r.width, `MV, IoU ${fmt(r.mv_iou)}`),
    drawMask(r.em, r.height, r.width, `EM, IoU ${fmt(r.em_iou)}`),
  );
  const workers = document.createElement("div");
  workers.className = "masks";
  r.workers.forEach((m, i) => workers.append(drawMask(m, r.height, r.width, `worker ${i + 1}, ${fmt(r.worker_iou[i])}`)));
  out.append(fused, document.createElement("hr"), workers);
}

function runRover() {
  const r = JSON.parse(rover_demo($("rover-input").value));
  const slots = r.slots
    .map((s) => `<span class="slot">${s.map((t) => (t == null ? "&empty;" : escape(t))).join("<br>")}</span>`)
    .join("");
  $("rover-out").innerHTML = `<p><strong>${escape(r.output.join(" "))}</strong></p><div>${slots}</div>`;
}

await init();
$("cat-run").onclick = () => show("cat-out", runCategorical);
$("seg-run").onclick = () => show("seg-out", runSegmentation);
$("rover-run").onclick = () => show("rover-out", runRover);
show("cat-out", runCategorical);
show("seg-out", runSegmentation);
show("rover-out", runRover);

import init, { Demo } from "./pkg/blue_surfels_demo.js";

const $ = (id) => document.getElementById(id);
let demo = null;
let yaw = 0.6, pitch = 0.35;

function blit(canvas, rgba) {
  const ctx = canvas.getContext("2d");
  const img = new ImageData(new Uint8ClampedArray(rgba), canvas.width, canvas.height);
  ctx.putImageData(img, 0, 0);
}

function drawOrbit() {
  if (!demo) return;
  const c = $("orbit");
  blit(c, demo.render(yaw, pitch, +$("dist").value, c.width, c.height, +$("overdraw").value, $("lod").checked));
  const [points, tris, sel, ras] = demo.last_stats().split(" ");
  $("stats").textContent = `points ${points}\ntriangles ${tris}\nselect ${sel} ms, raster ${ras} ms`;
}

// the slider is logarithmic so short prefixes get most of its travel
function prefixLength() {
  const n = demo.surfel_count();
  return Math.round(Math.pow(n, +$("k").value / 1000));
}

function drawPrefix() {
  if (!demo) return;
  const c = $("prefix");
  const k = prefixLength();
  $("kv").textContent = k;
  blit(c, demo.render_prefix(yaw, pitch, 3.0, c.width, c.height, k));
}

function drawCurve() {
  const c = $("curve");
  const ctx = c.getContext("2d");
  ctx.fillStyle = "#111";
  ctx.fillRect(0, 0, c.width, c.height);
  const d = demo.dmin_curve(32);
  if (d.length < 2) return;
  const max = Math.max(...d);
  ctx.strokeStyle = "#6cf";
  ctx.beginPath();
  d.forEach((v, i) => {
    const x = 8 + (i / (d.length - 1)) * (c.width - 16);
    const y = c.height - 8 - (v / max) * (c.height - 16);
    i ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
  });
  ctx.stroke();
}

async function build() {
  $("status").textContent = "building...";
  await new Promise((r) => setTimeout(r, 20));
  const t = performance.now();
  try {
    demo?.free();
    demo = new Demo($("model").value, +$("res").value, +$("count").value, 200, 1n);
  } catch (e) {
    demo = null;
    $("status").textContent = String(e);
    return;
  }
  $("status").textContent =
    `${demo.surfel_count()} surfels from ${demo.triangle_count()} triangles, ` +
    `coverage ${demo.coverage().toFixed(3)}, ${((performance.now() - t) / 1000).toFixed(1)} s`;
  drawOrbit();
  drawPrefix();
  drawCurve();
}

function dragOrbit(canvas) {
  let last = null;
  canvas.addEventListener("pointerdown", (e) => { last = [e.clientX, e.clientY]; canvas.setPointerCapture(e.pointerId); });
  canvas.addEventListener("pointerup", () => { last = null; });
  canvas.addEventListener("pointermove", (e) => {
    if (!last) return;
    yaw -= (e.clientX - last[0]) * 0.01;
    pitch = Math.max(-1.5, Math.min(1.5, pitch + (e.clientY - last[1]) * 0.01));
    last = [e.clientX, e.clientY];
    drawOrbit();
    drawPrefix();
  });
}

await init();
dragOrbit($("orbit"));
$("build").onclick = build;
$("dist").oninput = drawOrbit;
$("lod").onchange = drawOrbit;
$("overdraw").oninput = () => { $("odv").textContent = $("overdraw").value; drawOrbit(); };
$("k").oninput = drawPrefix;
$("compare").onclick = () => {
  if (!demo) return;
  const c = $("orbit");
  $("stats").textContent = demo.compare(yaw, pitch, +$("dist").value, c.width, c.height, +$("overdraw").value);
};
build();

import init, { Demo, kernel_profile, logistic_trajectory } from "./pkg/forage_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

let demo = null;
let running = true;

function reset() {
  try {
    demo = new Demo(num("seed"), num("agents"), num("resources"), num("size"), $("boundary").value);
  } catch (e) {
    $("stats").textContent = String(e);
    demo = null;
  }
}

function drawWorld() {
  const c = $("world");
  const g = c.getContext("2d");
  g.fillStyle = "#fff";
  g.fillRect(0, 0, c.width, c.height);
  if (!demo) return;
  const [w, h] = demo.world_size();
  const sx = c.width / w;
  const sy = c.height / h;
  const px = (x) => x * sx;
  const py = (y) => (h - y) * sy;
  const cap = demo.carrying_capacity();

  const res = demo.resources();
  g.fillStyle = "rgb(215,40,40)";
  for (let i = 0; i < res.length; i += 3) {
    const r = Math.max(1, 5 * Math.sqrt(res[i + 2] / cap));
    g.beginPath();
    g.arc(px(res[i]), py(res[i + 1]), r, 0, 2 * Math.PI);
    g.fill();
  }

  const ag = demo.agents();
  for (let i = 0; i < ag.length; i += 5) {
    const x = px(ag[i]);
    const y = py(ag[i + 1]);
    g.fillStyle = "rgb(40,80,220)";
    g.beginPath();
    g.arc(x, y, 2.5, 0, 2 * Math.PI);
    g.fill();
    const speed = Math.hypot(ag[i + 2], ag[i + 3]);
    if (speed > 1e-9) {
      g.strokeStyle = "rgb(10,20,110)";
      g.beginPath();
      g.moveTo(x, y);
      g.lineTo(x + (6 * ag[i + 2]) / speed, y - (6 * ag[i + 3]) / speed);
      g.stroke();
    }
  }

  const [agents, total, births, deaths, harvested] = demo.stats();
  $("stats").textContent =
    `step ${demo.step_index()}  agents ${agents}  births ${births}  deaths ${deaths}\n` +
    `total resource ${total.toFixed(1)}  harvested ${harvested.toFixed(1)}`;
}

function plot(canvasId, ys, xLabel) {
  const c = $(canvasId);
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const max = Math.max(...ys, 1e-12);
  g.strokeStyle = "#888";
  g.strokeRect(0.5, 0.5, c.width - 1, c.height - 1);
  g.strokeStyle = "rgb(215,40,40)";
  g.beginPath();
  ys.forEach((v, i) => {
    const x = (i / (ys.length - 1)) * (c.width - 10) + 5;
    const y = c.height - 5 - (v / max) * (c.height - 20);
    i === 0 ? g.moveTo(x, y) : g.lineTo(x, y);
  });
  g.stroke();
  g.fillStyle = "#444";
  g.fillText(`max ${max.toPrecision(3)}`, 8, 12);
  g.fillText(xLabel, c.width - 8 - g.measureText(xLabel).width, 12);
}

function drawKernel() {
  const cutoff = num("kcutoff");
  const ys = kernel_profile(num("kgain"), num("kscale"), cutoff, Math.max(1, 1.5 * cutoff), 200);
  plot("kernel", Array.from(ys), `distance 0..${Math.max(1, 1.5 * cutoff).toFixed(1)}`);
}

function drawGrowth() {
  const ys = logistic_trajectory(num("eps"), num("alpha"), num("s0"), 0.1, 5000);
  plot("growth", Array.from(ys), "t 0..500");
}

function frame() {
  if (running && demo) {
    try {
      demo.advance(num("speed"));
    } catch (e) {
      running = false;
      $("stats").textContent = String(e);
    }
  }
  drawWorld();
  requestAnimationFrame(frame);
}

await init();
$("reset").onclick = reset;
$("toggle").onclick = () => {
  running = !running;
  $("toggle").textContent = running ? "Pause" : "Run";
};
for (const id of ["kgain", "kscale", "kcutoff"]) $(id).oninput = drawKernel;
for (const id of ["eps", "alpha", "s0"]) $(id).oninput = drawGrowth;
reset();
drawKernel();
drawGrowth();
requestAnimationFrame(frame);

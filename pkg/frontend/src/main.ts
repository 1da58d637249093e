// DOM wiring: file input, zoomable canvas with a before/after divider,
// pick chips, and the download button. All color decisions come from the
// service; this layer only draws the returned PNG bytes.

import { WbrfApi } from "./api.js";
import { PickerController, PickerSnapshot } from "./controller.js";
import { Viewport, identityView, panBy, toImagePixel, zoomAt } from "./coords.js";

const api = new WbrfApi("");
let view: Viewport = identityView();
let sliderFraction = 0.5;
let originalBitmap: ImageBitmap | null = null;
let correctedBitmap: ImageBitmap | null = null;
let lastSnapshot: PickerSnapshot | null = null;

const el = <T extends HTMLElement>(id: string): T => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
};

const canvas = el<HTMLCanvasElement>("viewer");
const ctx = canvas.getContext("2d")!;

function draw(): void {
  ctx.imageSmoothingEnabled = false;
  ctx.setTransform(1, 0, 0, 1, 0, 0);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!originalBitmap) return;

  ctx.save();
  ctx.setTransform(view.zoom, 0, 0, view.zoom, view.panX, view.panY);
  ctx.drawImage(originalBitmap, 0, 0);
  ctx.restore();

  if (correctedBitmap) {
    const split = Math.round(sliderFraction * canvas.width);
    ctx.save();
    ctx.beginPath();
    ctx.rect(split, 0, canvas.width - split, canvas.height);
    ctx.clip();
    ctx.setTransform(view.zoom, 0, 0, view.zoom, view.panX, view.panY);
    ctx.drawImage(correctedBitmap, 0, 0);
    ctx.restore();

    ctx.strokeStyle = "#ffffffcc";
    ctx.beginPath();
    ctx.moveTo(split + 0.5, 0);
    ctx.lineTo(split + 0.5, canvas.height);
    ctx.stroke();
  }
}

async function toBitmap(png: Uint8Array | null): Promise<ImageBitmap | null> {
  if (!png) return null;
  return createImageBitmap(new Blob([png.slice().buffer], { type: "image/png" }));
}

const swatchCss = (rgb: number[]): string => {
  const [r, g, b] = rgb.map((v) => Math.round(255 * Math.min(1, Math.max(0, v))));
  return `rgb(${r}, ${g}, ${b})`;
};

function renderChips(snap: PickerSnapshot): void {
  const bar = el<HTMLDivElement>("chips");
  bar.textContent = "";
  for (const pick of snap.picks) {
    const chip = document.createElement("button");
    chip.className = pick.active ? "chip active" : "chip";
    chip.title = `cluster ${pick.cluster}`;

    const swatch = document.createElement("span");
    swatch.className = "swatch";
    swatch.style.background = swatchCss(pick.swatch);
    chip.appendChild(swatch);

    const label = document.createElement("span");
    label.textContent =
      pick.kind === "auto" ? `Auto · c${pick.cluster}` : `(${pick.x}, ${pick.y}) · c${pick.cluster}`;
    chip.appendChild(label);

    chip.addEventListener("click", () => void controller.activateChip(pick.key));

    const close = document.createElement("span");
    close.className = "close";
    close.textContent = "×";
    close.addEventListener("click", (e) => {
      e.stopPropagation();
      void controller.removeChip(pick.key);
    });
    chip.appendChild(close);

    bar.appendChild(chip);
  }
}

async function onSnapshot(snap: PickerSnapshot): Promise<void> {
  lastSnapshot = snap;
  el<HTMLDivElement>("status").textContent = snap.error
    ? `error: ${snap.error}`
    : snap.session
      ? `${snap.session.width} × ${snap.session.height}` + (snap.busy ? " — working…" : "")
      : "no image loaded";

  renderChips(snap);
  el<HTMLButtonElement>("awb").disabled = snap.session === null;
  el<HTMLButtonElement>("download").disabled =
    snap.picks.find((p) => p.active) === undefined;

  originalBitmap = await toBitmap(snap.originalPng);
  correctedBitmap = await toBitmap(snap.correctedPng);
  if (originalBitmap && canvas.width !== originalBitmap.width * 4) {
    // size the canvas once per image; default to a 4x comfortable view
    canvas.width = originalBitmap.width * 4;
    canvas.height = originalBitmap.height * 4;
    view = { zoom: 4, panX: 0, panY: 0 };
  }
  draw();
}

const controller = new PickerController(api, (snap) => void onSnapshot(snap));

function wire(): void {
  el<HTMLInputElement>("file").addEventListener("change", (e) => {
    const input = e.target as HTMLInputElement;
    const file = input.files?.[0];
    if (file) void controller.loadImage(file);
  });

  el<HTMLButtonElement>("awb").addEventListener("click", () => void controller.runAwb());

  el<HTMLButtonElement>("download").addEventListener("click", () => {
    void controller.downloadCorrected().then((bytes) => {
      if (!bytes) return;
      const url = URL.createObjectURL(new Blob([bytes.slice().buffer], { type: "image/png" }));
      const a = document.createElement("a");
      a.href = url;
      a.download = "corrected.png";
      a.click();
      URL.revokeObjectURL(url);
    });
  });

  el<HTMLInputElement>("slider").addEventListener("input", (e) => {
    sliderFraction = Number((e.target as HTMLInputElement).value) / 100;
    draw();
  });

  let dragging = false;
  let moved = false;
  let lastX = 0;
  let lastY = 0;

  canvas.addEventListener("mousedown", (e) => {
    dragging = true;
    moved = false;
    lastX = e.offsetX;
    lastY = e.offsetY;
  });
  canvas.addEventListener("mousemove", (e) => {
    if (!dragging) return;
    const dx = e.offsetX - lastX;
    const dy = e.offsetY - lastY;
    if (Math.abs(dx) + Math.abs(dy) > 2) moved = true;
    if (moved) {
      view = panBy(view, dx, dy);
      lastX = e.offsetX;
      lastY = e.offsetY;
      draw();
    }
  });
  window.addEventListener("mouseup", () => {
    dragging = false;
  });

  canvas.addEventListener("click", (e) => {
    if (moved) return; // end of a pan, not a pick
    void controller.clickAt(e.offsetX, e.offsetY, view);
  });

  canvas.addEventListener("wheel", (e) => {
    e.preventDefault();
    view = zoomAt(view, e.deltaY < 0 ? 2 : 0.5, e.offsetX, e.offsetY);
    el<HTMLSpanElement>("zoom").textContent = `${view.zoom}×`;
    draw();
  });

  canvas.addEventListener("mousemove", (e) => {
    if (!lastSnapshot?.session) return;
    const { x, y } = toImagePixel(e.offsetX, e.offsetY, view);
    el<HTMLSpanElement>("cursor").textContent =
      x >= 0 && y >= 0 && x < lastSnapshot.session.width && y < lastSnapshot.session.height
        ? `(${x}, ${y})`
        : "";
  });
}

wire();

/**
 * Browser entry point: wires the editor state to the DOM.
 *
 * Rendering model: the thumbnail and the mask overlay are drawn at native
 * resolution into stacked canvases; zoom is a CSS transform only, so brush
 * edits always address true mask pixels.
 */

import { ApiClient, ItemSummary } from "./api.js";
import { EditorState } from "./editor.js";
import { MaskGrid, Point, maskFromGrayPixels } from "./mask.js";

const api = new ApiClient("");
const editor = new EditorState(api);

const itemList = document.getElementById("item-list") as HTMLUListElement;
const banner = document.getElementById("banner") as HTMLDivElement;
const stage = document.getElementById("stage") as HTMLDivElement;
const imageCanvas = document.getElementById("image-canvas") as HTMLCanvasElement;
const maskCanvas = document.getElementById("mask-canvas") as HTMLCanvasElement;
const saveButton = document.getElementById("save") as HTMLButtonElement;
const undoButton = document.getElementById("undo") as HTMLButtonElement;
const redoButton = document.getElementById("redo") as HTMLButtonElement;
const toolSelect = document.getElementById("tool") as HTMLSelectElement;
const radiusInput = document.getElementById("radius") as HTMLInputElement;
const opacityInput = document.getElementById("opacity") as HTMLInputElement;
const zoomInput = document.getElementById("zoom") as HTMLInputElement;
const methodSelect = document.getElementById("method") as HTMLSelectElement;
const paramsInput = document.getElementById("params") as HTMLTextAreaElement;
const segmentButton = document.getElementById("segment") as HTMLButtonElement;
const acceptButton = document.getElementById("accept") as HTMLButtonElement;
const rejectButton = document.getElementById("reject") as HTMLButtonElement;
const metricsPanel = document.getElementById("metrics") as HTMLDivElement;

let currentImage: HTMLImageElement | null = null;
let strokePath: Point[] = [];
let pointerDown = false;
let inFlightSegment = false;

function showBanner(message: string, kind: "error" | "info" = "error"): void {
  banner.textContent = message;
  banner.className = `banner ${kind}`;
  banner.hidden = message === "";
}

function drawOverlay(): void {
  const context = maskCanvas.getContext("2d")!;
  const shown: MaskGrid = editor.candidate ? editor.candidate.mask : editor.mask;
  const frame = context.createImageData(shown.width, shown.height);
  const candidate = editor.candidate !== null;
  for (let i = 0; i < shown.data.length; i++) {
    const offset = i * 4;
    if (shown.data[i]) {
      frame.data[offset] = candidate ? 255 : 0; // candidate amber, saved green
      frame.data[offset + 1] = candidate ? 190 : 200;
      frame.data[offset + 2] = 0;
      frame.data[offset + 3] = Math.round(editor.overlayOpacity * 255);
    }
  }
  context.putImageData(frame, 0, 0);
}

function refreshControls(): void {
  saveButton.disabled = !editor.canSave;
  undoButton.disabled = !editor.canUndo;
  redoButton.disabled = !editor.canRedo;
  acceptButton.disabled = editor.candidate === null;
  rejectButton.disabled = editor.candidate === null;
  radiusInput.value = String(editor.brushRadius);
  toolSelect.value = editor.tool;
  const metrics = editor.candidate?.metrics ?? null;
  if (metrics) {
    const fmt = (v: number | null) => (v === null ? "n/a" : v.toFixed(3));
    metricsPanel.textContent =
      `candidate vs saved — jaccard ${fmt(metrics.jaccard)}, ` +
      `dice ${fmt(metrics.dice)}, sensitivity ${fmt(metrics.sensitivity)}, ` +
      `specificity ${fmt(metrics.specificity)}`;
  } else if (editor.candidate) {
    metricsPanel.textContent =
      `candidate ready (${editor.candidate.elapsedSeconds.toFixed(3)} s)`;
  } else {
    metricsPanel.textContent = "";
  }
}

function repaint(): void {
  drawOverlay();
  refreshControls();
}

async function refreshItemList(): Promise<void> {
  let items: ItemSummary[];
  try {
    items = await api.listItems();
  } catch (error) {
    showBanner(`cannot reach review service: ${String(error)}`);
    return;
  }
  itemList.innerHTML = "";
  for (const item of items) {
    const entry = document.createElement("li");
    const badge = item.refined ? " ✓" : item.hasMask ? " ·" : "";
    entry.textContent = item.itemId + badge;
    entry.dataset.itemId = item.itemId;
    if (item.itemId === editor.itemId) entry.classList.add("active");
    entry.addEventListener("click", () => void openItem(item.itemId));
    itemList.appendChild(entry);
  }
}

async function openItem(itemId: string): Promise<void> {
  if (editor.dirty && !window.confirm("Discard unsaved changes?")) return;
  showBanner("", "info");
  const image = new Image();
  image.src = api.imageUrl(itemId);
  try {
    await image.decode();
  } catch {
    showBanner(`failed to load image for ${itemId}`);
    return;
  }
  try {
    await editor.loadItem(itemId, image.naturalWidth, image.naturalHeight);
  } catch (error) {
    showBanner(`failed to load mask for ${itemId}: ${String(error)}`);
    return;
  }
  currentImage = image;
  imageCanvas.width = maskCanvas.width = image.naturalWidth;
  imageCanvas.height = maskCanvas.height = image.naturalHeight;
  imageCanvas.getContext("2d")!.drawImage(image, 0, 0);
  applyZoom();
  repaint();
  void refreshItemList();
}

function applyZoom(): void {
  const zoom = Number(zoomInput.value);
  stage.style.transform = `scale(${zoom})`;
  stage.style.transformOrigin = "top left";
}

function canvasPoint(event: PointerEvent): Point {
  const rect = maskCanvas.getBoundingClientRect();
  return {
    x: ((event.clientX - rect.left) / rect.width) * maskCanvas.width,
    y: ((event.clientY - rect.top) / rect.height) * maskCanvas.height,
  };
}

maskCanvas.addEventListener("pointerdown", (event) => {
  if (!currentImage || editor.candidate) return;
  pointerDown = true;
  strokePath = [canvasPoint(event)];
  maskCanvas.setPointerCapture(event.pointerId);
});

maskCanvas.addEventListener("pointermove", (event) => {
  if (!pointerDown) return;
  strokePath.push(canvasPoint(event));
});

maskCanvas.addEventListener("pointerup", () => {
  if (!pointerDown) return;
  pointerDown = false;
  editor.stroke(strokePath);
  strokePath = [];
  repaint();
});

saveButton.addEventListener("click", () => void doSave());

async function doSave(): Promise<void> {
  if (!editor.canSave) return;
  let result;
  try {
    result = await editor.save();
  } catch (error) {
    showBanner(`save failed, local edits kept: ${String(error)}`);
    return;
  }
  if (result.status === "ok") {
    showBanner("saved", "info");
    void refreshItemList();
  } else if (result.status === "conflict") {
    const reload = window.confirm(
      `Someone else saved version ${result.currentVersion} while you were ` +
        "editing. Reload their mask? (Cancel keeps your local edits.)",
    );
    if (reload && editor.itemId) void openItem(editor.itemId);
  } else {
    showBanner(`server rejected mask: ${result.detail}`);
  }
  repaint();
}

segmentButton.addEventListener("click", () => void doSegment());

async function doSegment(): Promise<void> {
  if (!currentImage || inFlightSegment) return;
  let params: Record<string, unknown> = {};
  if (paramsInput.value.trim() !== "") {
    try {
      params = JSON.parse(paramsInput.value) as Record<string, unknown>;
    } catch {
      showBanner("parameters must be a JSON object");
      return;
    }
  }
  inFlightSegment = true;
  segmentButton.disabled = true;
  try {
    await editor.requestSegment(methodSelect.value, params);
    showBanner("", "info");
  } catch (error) {
    showBanner(String(error));
  } finally {
    inFlightSegment = false;
    segmentButton.disabled = false;
  }
  repaint();
}

acceptButton.addEventListener("click", () => {
  editor.acceptCandidate();
  repaint();
});

rejectButton.addEventListener("click", () => {
  editor.rejectCandidate();
  repaint();
});

undoButton.addEventListener("click", () => {
  editor.undo();
  repaint();
});

redoButton.addEventListener("click", () => {
  editor.redo();
  repaint();
});

toolSelect.addEventListener("change", () => {
  editor.tool = toolSelect.value as "paint" | "erase";
});

radiusInput.addEventListener("change", () => {
  editor.setBrushRadius(Number(radiusInput.value));
  refreshControls();
});

opacityInput.addEventListener("input", () => {
  editor.setOverlayOpacity(Number(opacityInput.value));
  drawOverlay();
});

zoomInput.addEventListener("input", applyZoom);

window.addEventListener("keydown", (event) => {
  if (event.target instanceof HTMLInputElement ||
      event.target instanceof HTMLTextAreaElement) {
    return;
  }
  if ((event.ctrlKey || event.metaKey) && event.key.toLowerCase() === "z") {
    event.preventDefault();
    if (event.shiftKey) editor.redo();
    else editor.undo();
    repaint();
    return;
  }
  switch (event.key) {
    case "b":
      editor.tool = "paint";
      break;
    case "e":
      editor.tool = "erase";
      break;
    case "[":
      editor.setBrushRadius(editor.brushRadius - 1);
      break;
    case "]":
      editor.setBrushRadius(editor.brushRadius + 1);
      break;
    case "s":
      event.preventDefault();
      void doSave();
      return;
    default:
      return;
  }
  refreshControls();
});

window.addEventListener("beforeunload", (event) => {
  if (editor.dirty) {
    event.preventDefault();
    event.returnValue = "";
  }
});

// Exposed so the console (or smoke scripts) can decode a canvas-rendered
// server PNG into a mask grid without re-implementing the browser pipeline.
export function gridFromCanvas(canvas: HTMLCanvasElement): MaskGrid {
  const context = canvas.getContext("2d")!;
  const frame = context.getImageData(0, 0, canvas.width, canvas.height);
  const gray = new Uint8Array(canvas.width * canvas.height);
  for (let i = 0; i < gray.length; i++) {
    gray[i] = frame.data[i * 4];
  }
  return maskFromGrayPixels(canvas.width, canvas.height, gray);
}

void refreshItemList();

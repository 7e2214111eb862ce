/**
 * In-memory binary mask and brush editing primitives.
 *
 * Masks are stored as 0/1 bytes at native thumbnail resolution; zoom in the
 * UI is a pure view transform, so edits always land on the pixels that the
 * evaluation pipeline will score.
 */

import { decodeGrayPng, encodeGrayPng } from "./png.js";

export interface MaskGrid {
  width: number;
  height: number;
  /** Row-major, values 0 or 1. */
  data: Uint8Array;
}

export type Tool = "paint" | "erase";

export interface Point {
  x: number;
  y: number;
}

/** One undo entry: every pixel a stroke changed, with its previous value. */
export interface StrokeDiff {
  indices: Int32Array;
  previous: Uint8Array;
  next: Uint8Array;
}

export function emptyMask(width: number, height: number): MaskGrid {
  return { width, height, data: new Uint8Array(width * height) };
}

export function cloneMask(mask: MaskGrid): MaskGrid {
  return { width: mask.width, height: mask.height, data: mask.data.slice() };
}

export function masksEqual(a: MaskGrid, b: MaskGrid): boolean {
  if (a.width !== b.width || a.height !== b.height) return false;
  for (let i = 0; i < a.data.length; i++) {
    if (a.data[i] !== b.data[i]) return false;
  }
  return true;
}

/**
 * Stamp disks of the given radius along a stroke path, recording changed
 * pixels.  Radius 1 stamps a single 3x3 neighborhood per point (<= 9 px).
 */
export function applyStroke(
  mask: MaskGrid,
  path: Point[],
  tool: Tool,
  radius: number,
): StrokeDiff {
  if (radius < 1 || !Number.isInteger(radius)) {
    throw new Error(`brush radius must be a positive integer, got ${radius}`);
  }
  const value = tool === "paint" ? 1 : 0;
  const changed = new Map<number, number>(); // index -> previous value
  const r2 = radius * radius;
  for (const point of path) {
    const cx = Math.round(point.x);
    const cy = Math.round(point.y);
    for (let dy = -radius; dy <= radius; dy++) {
      const y = cy + dy;
      if (y < 0 || y >= mask.height) continue;
      for (let dx = -radius; dx <= radius; dx++) {
        const x = cx + dx;
        if (x < 0 || x >= mask.width) continue;
        if (dx * dx + dy * dy > r2) continue;
        const index = y * mask.width + x;
        if (mask.data[index] !== value) {
          if (!changed.has(index)) {
            changed.set(index, mask.data[index]);
          }
          mask.data[index] = value;
        }
      }
    }
  }
  const indices = new Int32Array(changed.size);
  const previous = new Uint8Array(changed.size);
  const next = new Uint8Array(changed.size);
  let i = 0;
  for (const [index, before] of changed) {
    indices[i] = index;
    previous[i] = before;
    next[i] = value;
    i++;
  }
  return { indices, previous, next };
}

/** Replace the whole mask (e.g. accepting a segmentation candidate). */
export function replaceMask(mask: MaskGrid, replacement: MaskGrid): StrokeDiff {
  if (
    replacement.width !== mask.width ||
    replacement.height !== mask.height
  ) {
    throw new Error("replacement mask dimensions do not match");
  }
  const changedAt: number[] = [];
  for (let i = 0; i < mask.data.length; i++) {
    if (mask.data[i] !== replacement.data[i]) changedAt.push(i);
  }
  const indices = new Int32Array(changedAt.length);
  const previous = new Uint8Array(changedAt.length);
  const next = new Uint8Array(changedAt.length);
  changedAt.forEach((index, i) => {
    indices[i] = index;
    previous[i] = mask.data[index];
    next[i] = replacement.data[index];
    mask.data[index] = replacement.data[index];
  });
  return { indices, previous, next };
}

export function revertDiff(mask: MaskGrid, diff: StrokeDiff): void {
  for (let i = 0; i < diff.indices.length; i++) {
    mask.data[diff.indices[i]] = diff.previous[i];
  }
}

export function reapplyDiff(mask: MaskGrid, diff: StrokeDiff): void {
  for (let i = 0; i < diff.indices.length; i++) {
    mask.data[diff.indices[i]] = diff.next[i];
  }
}

/** Encode as a strictly binary (0/255) grayscale PNG payload. */
export function maskToPngBytes(mask: MaskGrid): Uint8Array {
  const pixels = new Uint8Array(mask.data.length);
  for (let i = 0; i < mask.data.length; i++) {
    pixels[i] = mask.data[i] ? 255 : 0;
  }
  return encodeGrayPng({ width: mask.width, height: mask.height, pixels });
}

/** Decode a grayscale PNG (values >= 128 become foreground). */
export function maskFromPngBytes(bytes: Uint8Array): MaskGrid {
  const image = decodeGrayPng(bytes);
  const data = new Uint8Array(image.pixels.length);
  for (let i = 0; i < image.pixels.length; i++) {
    data[i] = image.pixels[i] >= 128 ? 1 : 0;
  }
  return { width: image.width, height: image.height, data };
}

/** Foreground grid from raw 8-bit grayscale pixels (browser canvas path). */
export function maskFromGrayPixels(
  width: number,
  height: number,
  pixels: Uint8Array | Uint8ClampedArray,
): MaskGrid {
  const data = new Uint8Array(width * height);
  for (let i = 0; i < data.length; i++) {
    data[i] = pixels[i] >= 128 ? 1 : 0;
  }
  return { width, height, data };
}

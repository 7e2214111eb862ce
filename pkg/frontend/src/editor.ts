/**
 * Editor session state: the working mask, undo/redo stacks, tool settings,
 * candidate handling, and the save workflow against the review service.
 *
 * Invariants maintained here:
 *  - undo followed by redo restores the exact mask;
 *  - the dirty flag is true iff there are unsaved pixel changes;
 *  - one save is in flight at a time.
 */

import { ApiClient, MetricValues, SaveResult } from "./api.js";
import {
  MaskGrid,
  Point,
  StrokeDiff,
  Tool,
  applyStroke,
  cloneMask,
  emptyMask,
  maskFromPngBytes,
  maskToPngBytes,
  masksEqual,
  replaceMask,
} from "./mask.js";
import { base64ToBytes } from "./png.js";

export interface Candidate {
  mask: MaskGrid;
  elapsedSeconds: number;
  metrics: MetricValues | null;
}

export class EditorState {
  itemId: string | null = null;
  /** Server version backing the working mask; sent as baseVersion on save. */
  baseVersion = 0;
  overlayOpacity = 0.5;
  brushRadius = 4;
  tool: Tool = "paint";
  mask: MaskGrid = emptyMask(0, 0);
  candidate: Candidate | null = null;

  private savedMask: MaskGrid = emptyMask(0, 0);
  private undoStack: StrokeDiff[] = [];
  private redoStack: StrokeDiff[] = [];
  private saving = false;

  constructor(private readonly api: ApiClient) {}

  get dirty(): boolean {
    return !masksEqual(this.mask, this.savedMask);
  }

  get canUndo(): boolean {
    return this.undoStack.length > 0;
  }

  get canRedo(): boolean {
    return this.redoStack.length > 0;
  }

  get canSave(): boolean {
    return this.itemId !== null && this.dirty && !this.saving;
  }

  /** Fetch mask state for an item; items without a mask start blank. */
  async loadItem(
    itemId: string,
    imageWidth: number,
    imageHeight: number,
  ): Promise<void> {
    const fetched = await this.api.fetchMask(itemId);
    this.itemId = itemId;
    if (fetched === null) {
      this.mask = emptyMask(imageWidth, imageHeight);
      this.baseVersion = 0;
    } else {
      this.mask = maskFromPngBytes(fetched.bytes);
      this.baseVersion = fetched.version;
    }
    this.savedMask = cloneMask(this.mask);
    this.undoStack = [];
    this.redoStack = [];
    this.candidate = null;
  }

  setOverlayOpacity(opacity: number): void {
    this.overlayOpacity = Math.min(1, Math.max(0, opacity));
  }

  setBrushRadius(radius: number): void {
    this.brushRadius = Math.min(64, Math.max(1, Math.round(radius)));
  }

  /** Apply one brush stroke; records exactly one undo entry. */
  stroke(path: Point[], tool: Tool = this.tool): void {
    const diff = applyStroke(this.mask, path, tool, this.brushRadius);
    if (diff.indices.length === 0) return;
    this.undoStack.push(diff);
    this.redoStack = [];
  }

  undo(): void {
    const diff = this.undoStack.pop();
    if (!diff) return;
    for (let i = 0; i < diff.indices.length; i++) {
      this.mask.data[diff.indices[i]] = diff.previous[i];
    }
    this.redoStack.push(diff);
  }

  redo(): void {
    const diff = this.redoStack.pop();
    if (!diff) return;
    for (let i = 0; i < diff.indices.length; i++) {
      this.mask.data[diff.indices[i]] = diff.next[i];
    }
    this.undoStack.push(diff);
  }

  /** Run a segmentation method server-side; result becomes a candidate. */
  async requestSegment(
    method: string,
    params: Record<string, unknown>,
  ): Promise<Candidate> {
    if (this.itemId === null) {
      throw new Error("no item loaded");
    }
    const result = await this.api.segment(this.itemId, method, params);
    this.candidate = {
      mask: maskFromPngBytes(base64ToBytes(result.maskPngBase64)),
      elapsedSeconds: result.elapsedSeconds,
      metrics: result.metrics,
    };
    return this.candidate;
  }

  /** Accept the pending candidate as the working mask (one undo entry). */
  acceptCandidate(): void {
    if (!this.candidate) return;
    const diff = replaceMask(this.mask, this.candidate.mask);
    if (diff.indices.length > 0) {
      this.undoStack.push(diff);
      this.redoStack = [];
    }
    this.candidate = null;
  }

  rejectCandidate(): void {
    this.candidate = null;
  }

  exportPayload(): Uint8Array {
    return maskToPngBytes(this.mask);
  }

  /**
   * PUT the working mask with the base version it was edited from.  On
   * success the dirty flag clears; on conflict local state is untouched so
   * the user can reload or retry without losing work.
   */
  async save(): Promise<SaveResult> {
    if (this.itemId === null) {
      throw new Error("no item loaded");
    }
    if (this.saving) {
      throw new Error("a save is already in flight");
    }
    this.saving = true;
    try {
      const result = await this.api.saveMask(
        this.itemId,
        this.exportPayload(),
        this.baseVersion,
      );
      if (result.status === "ok") {
        this.baseVersion = result.version;
        this.savedMask = cloneMask(this.mask);
      }
      return result;
    } finally {
      this.saving = false;
    }
  }
}

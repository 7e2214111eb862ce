/**
 * Typed client for the review service HTTP API.
 *
 * All calls go through an injectable fetch so tests can stub the network.
 * Saves are optimistic-concurrency aware: the caller supplies the version it
 * edited from, and a stale save surfaces as a "conflict" result rather than
 * an exception.
 */

import { bytesToBase64 } from "./png.js";

export interface ItemSummary {
  itemId: string;
  hasMask: boolean;
  refined: boolean;
  version: number;
}

export interface MaskFetch {
  bytes: Uint8Array;
  version: number;
}

export interface MetricValues {
  jaccard: number | null;
  dice: number | null;
  sensitivity: number | null;
  specificity: number | null;
}

export interface SegmentResult {
  maskPngBase64: string;
  elapsedSeconds: number;
  metrics: MetricValues | null;
}

export type SaveResult =
  | { status: "ok"; version: number; refined: boolean }
  | { status: "conflict"; currentVersion: number }
  | { status: "invalid"; detail: string };

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) =>
      fetch(input, init),
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async listItems(): Promise<ItemSummary[]> {
    const response = await this.fetchImpl(this.url("/api/items"));
    if (!response.ok) {
      throw new ApiError("failed to list items", response.status);
    }
    return (await response.json()) as ItemSummary[];
  }

  imageUrl(itemId: string): string {
    return this.url(`/api/items/${encodeURIComponent(itemId)}/image.png`);
  }

  /** Returns null when the item has no stored mask yet. */
  async fetchMask(itemId: string): Promise<MaskFetch | null> {
    const response = await this.fetchImpl(
      this.url(`/api/items/${encodeURIComponent(itemId)}/mask.png`),
    );
    if (response.status === 404) return null;
    if (!response.ok) {
      throw new ApiError(`failed to fetch mask for ${itemId}`, response.status);
    }
    const etag = response.headers.get("etag") ?? "";
    const version = Number(etag.replace(/"/g, ""));
    if (!Number.isInteger(version)) {
      throw new ApiError(`bad mask version tag: ${etag}`, response.status);
    }
    return { bytes: new Uint8Array(await response.arrayBuffer()), version };
  }

  async segment(
    itemId: string,
    method: string,
    params: Record<string, unknown>,
  ): Promise<SegmentResult> {
    const response = await this.fetchImpl(
      this.url(`/api/items/${encodeURIComponent(itemId)}/segment`),
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ method, params }),
      },
    );
    const body = await response.json();
    if (response.status === 400) {
      throw new ApiError(String(body.detail ?? "invalid parameters"), 400);
    }
    if (!response.ok) {
      throw new ApiError(`segmentation failed for ${itemId}`, response.status);
    }
    return {
      maskPngBase64: body.maskPng as string,
      elapsedSeconds: body.elapsedSeconds as number,
      metrics: (body.metrics ?? null) as MetricValues | null,
    };
  }

  async saveMask(
    itemId: string,
    pngBytes: Uint8Array,
    baseVersion: number,
  ): Promise<SaveResult> {
    const response = await this.fetchImpl(
      this.url(`/api/items/${encodeURIComponent(itemId)}/mask`),
      {
        method: "PUT",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({
          maskPng: bytesToBase64(pngBytes),
          baseVersion,
        }),
      },
    );
    if (response.status === 409) {
      const body = await response.json();
      return { status: "conflict", currentVersion: body.currentVersion };
    }
    if (response.status === 400) {
      const body = await response.json();
      return { status: "invalid", detail: String(body.detail ?? "bad mask") };
    }
    if (!response.ok) {
      throw new ApiError(`save failed for ${itemId}`, response.status);
    }
    const body = await response.json();
    return {
      status: "ok",
      version: body.version as number,
      refined: Boolean(body.refined),
    };
  }
}

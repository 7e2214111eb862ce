/**
 * In-memory stand-in for the review service, matching its HTTP contract:
 * ETag-versioned mask GETs, candidate-only POST /segment, and optimistic
 * PUT /mask that returns 409 with the current version when stale.
 */

import { FetchLike } from "../src/api.js";
import {
  MaskGrid,
  cloneMask,
  maskFromPngBytes,
  maskToPngBytes,
} from "../src/mask.js";
import { base64ToBytes, bytesToBase64 } from "../src/png.js";

interface StoredItem {
  mask: MaskGrid | null;
  version: number;
  refined: boolean;
}

export class FakeServer {
  items = new Map<string, StoredItem>();
  /** What POST /segment should answer with, keyed by item id. */
  candidates = new Map<string, MaskGrid>();
  log: string[] = [];

  addItem(id: string, mask: MaskGrid | null): void {
    this.items.set(id, {
      mask: mask ? cloneMask(mask) : null,
      version: mask ? 1 : 0,
      refined: false,
    });
  }

  fetch: FetchLike = (input, init) => {
    const method = init?.method ?? "GET";
    this.log.push(`${method} ${input}`);
    return Promise.resolve(this.route(input, method, init));
  };

  private route(url: string, method: string, init?: RequestInit): Response {
    if (url === "/api/items" && method === "GET") {
      const listing = [...this.items.entries()]
        .sort(([a], [b]) => (a < b ? -1 : 1))
        .map(([itemId, s]) => ({
          itemId,
          hasMask: s.mask !== null,
          refined: s.refined,
          version: s.version,
        }));
      return json(200, listing);
    }

    const maskGet = url.match(/^\/api\/items\/([^/]+)\/mask\.png$/);
    if (maskGet && method === "GET") {
      const state = this.items.get(maskGet[1]);
      if (!state) return json(404, { detail: "no such item" });
      if (!state.mask) return json(404, { detail: "no mask" });
      return new Response(toArrayBuffer(maskToPngBytes(state.mask)), {
        status: 200,
        headers: { etag: `"${state.version}"`, "content-type": "image/png" },
      });
    }

    const segment = url.match(/^\/api\/items\/([^/]+)\/segment$/);
    if (segment && method === "POST") {
      const body = JSON.parse(String(init?.body));
      if (body.params && "bogus" in body.params) {
        return json(400, { detail: "unknown parameter 'bogus'" });
      }
      const candidate = this.candidates.get(segment[1]);
      if (!candidate) return json(404, { detail: "no such item" });
      return json(200, {
        maskPng: bytesToBase64(maskToPngBytes(candidate)),
        elapsedSeconds: 0.01,
        metrics: null,
      });
    }

    const maskPut = url.match(/^\/api\/items\/([^/]+)\/mask$/);
    if (maskPut && method === "PUT") {
      const state = this.items.get(maskPut[1]);
      if (!state) return json(404, { detail: "no such item" });
      const body = JSON.parse(String(init?.body));
      if (body.baseVersion !== state.version) {
        return json(409, {
          detail: "version conflict",
          currentVersion: state.version,
        });
      }
      state.mask = maskFromPngBytes(base64ToBytes(body.maskPng));
      state.version += 1;
      state.refined = true;
      return json(200, { version: state.version, refined: true });
    }

    return json(404, { detail: `no route: ${method} ${url}` });
  }
}

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

function toArrayBuffer(bytes: Uint8Array): ArrayBuffer {
  return bytes.buffer.slice(
    bytes.byteOffset, bytes.byteOffset + bytes.byteLength) as ArrayBuffer;
}

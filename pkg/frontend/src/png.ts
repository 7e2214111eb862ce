/**
 * Minimal PNG codec for binary masks.
 *
 * The editor uploads masks as 8-bit grayscale PNGs whose pixels are strictly
 * 0 or 255.  Encoding uses stored (uncompressed) deflate blocks so it works
 * identically in the browser and in Node without a compression library; any
 * standards-compliant PNG reader (including the review service) can decode
 * the result.  The decoder here only understands the stored-block grayscale
 * subset this module produces — the app decodes arbitrary server PNGs
 * through the browser's native image pipeline instead.
 */

const PNG_SIGNATURE = [137, 80, 78, 71, 13, 10, 26, 10];

const CRC_TABLE: Uint32Array = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(bytes: Uint8Array): number {
  let c = 0xffffffff;
  for (let i = 0; i < bytes.length; i++) {
    c = CRC_TABLE[(c ^ bytes[i]) & 0xff] ^ (c >>> 8);
  }
  return (c ^ 0xffffffff) >>> 0;
}

function adler32(bytes: Uint8Array): number {
  let a = 1;
  let b = 0;
  for (let i = 0; i < bytes.length; i++) {
    a = (a + bytes[i]) % 65521;
    b = (b + a) % 65521;
  }
  return ((b << 16) | a) >>> 0;
}

function writeUint32(target: Uint8Array, offset: number, value: number): void {
  target[offset] = (value >>> 24) & 0xff;
  target[offset + 1] = (value >>> 16) & 0xff;
  target[offset + 2] = (value >>> 8) & 0xff;
  target[offset + 3] = value & 0xff;
}

function readUint32(bytes: Uint8Array, offset: number): number {
  return (
    ((bytes[offset] << 24) |
      (bytes[offset + 1] << 16) |
      (bytes[offset + 2] << 8) |
      bytes[offset + 3]) >>>
    0
  );
}

function chunk(type: string, payload: Uint8Array): Uint8Array {
  const out = new Uint8Array(12 + payload.length);
  writeUint32(out, 0, payload.length);
  for (let i = 0; i < 4; i++) {
    out[4 + i] = type.charCodeAt(i);
  }
  out.set(payload, 8);
  writeUint32(out, 8 + payload.length, crc32(out.subarray(4, 8 + payload.length)));
  return out;
}

/** Wrap raw bytes in a zlib stream made of stored deflate blocks. */
function zlibStored(raw: Uint8Array): Uint8Array {
  const blocks: Uint8Array[] = [];
  const MAX = 65535;
  for (let pos = 0; pos < raw.length || blocks.length === 0; pos += MAX) {
    const end = Math.min(pos + MAX, raw.length);
    const len = end - pos;
    const final = end >= raw.length ? 1 : 0;
    const header = new Uint8Array(5);
    header[0] = final; // BTYPE=00 (stored)
    header[1] = len & 0xff;
    header[2] = (len >>> 8) & 0xff;
    header[3] = ~len & 0xff;
    header[4] = (~len >>> 8) & 0xff;
    blocks.push(header, raw.subarray(pos, end));
    if (end >= raw.length) break;
  }
  const body = blocks.reduce((n, b) => n + b.length, 0);
  const out = new Uint8Array(2 + body + 4);
  out[0] = 0x78; // CMF: deflate, 32K window
  out[1] = 0x01; // FLG: no preset dict, check bits valid
  let offset = 2;
  for (const b of blocks) {
    out.set(b, offset);
    offset += b.length;
  }
  writeUint32(out, offset, adler32(raw));
  return out;
}

function zlibStoredInflate(stream: Uint8Array): Uint8Array {
  if ((stream[0] & 0x0f) !== 8) {
    throw new Error("unsupported zlib compression method");
  }
  const pieces: Uint8Array[] = [];
  let pos = 2;
  for (;;) {
    const header = stream[pos];
    if ((header & 0x06) !== 0) {
      throw new Error("only stored deflate blocks are supported");
    }
    const len = stream[pos + 1] | (stream[pos + 2] << 8);
    pieces.push(stream.subarray(pos + 5, pos + 5 + len));
    pos += 5 + len;
    if (header & 1) break;
  }
  const total = pieces.reduce((n, p) => n + p.length, 0);
  const raw = new Uint8Array(total);
  let offset = 0;
  for (const p of pieces) {
    raw.set(p, offset);
    offset += p.length;
  }
  if (adler32(raw) !== readUint32(stream, pos)) {
    throw new Error("zlib checksum mismatch");
  }
  return raw;
}

export interface GrayImage {
  width: number;
  height: number;
  /** Row-major pixel values, one byte per pixel. */
  pixels: Uint8Array;
}

/** Encode an 8-bit grayscale image as a PNG. */
export function encodeGrayPng(image: GrayImage): Uint8Array {
  const { width, height, pixels } = image;
  if (pixels.length !== width * height) {
    throw new Error("pixel buffer does not match dimensions");
  }
  const ihdr = new Uint8Array(13);
  writeUint32(ihdr, 0, width);
  writeUint32(ihdr, 4, height);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 0; // grayscale
  // compression, filter, interlace already 0

  // One filter byte (0 = None) before each scanline.
  const raw = new Uint8Array(height * (width + 1));
  for (let y = 0; y < height; y++) {
    raw.set(pixels.subarray(y * width, (y + 1) * width), y * (width + 1) + 1);
  }

  const parts = [
    new Uint8Array(PNG_SIGNATURE),
    chunk("IHDR", ihdr),
    chunk("IDAT", zlibStored(raw)),
    chunk("IEND", new Uint8Array(0)),
  ];
  const out = new Uint8Array(parts.reduce((n, p) => n + p.length, 0));
  let offset = 0;
  for (const p of parts) {
    out.set(p, offset);
    offset += p.length;
  }
  return out;
}

/** Decode a grayscale stored-block PNG as produced by encodeGrayPng. */
export function decodeGrayPng(bytes: Uint8Array): GrayImage {
  for (let i = 0; i < 8; i++) {
    if (bytes[i] !== PNG_SIGNATURE[i]) {
      throw new Error("not a PNG file");
    }
  }
  let width = 0;
  let height = 0;
  const idat: Uint8Array[] = [];
  let pos = 8;
  while (pos < bytes.length) {
    const length = readUint32(bytes, pos);
    const type = String.fromCharCode(
      bytes[pos + 4], bytes[pos + 5], bytes[pos + 6], bytes[pos + 7]);
    const payload = bytes.subarray(pos + 8, pos + 8 + length);
    if (type === "IHDR") {
      width = readUint32(payload, 0);
      height = readUint32(payload, 4);
      if (payload[8] !== 8 || payload[9] !== 0) {
        throw new Error("only 8-bit grayscale PNGs are supported");
      }
      if (payload[12] !== 0) {
        throw new Error("interlaced PNGs are not supported");
      }
    } else if (type === "IDAT") {
      idat.push(payload);
    } else if (type === "IEND") {
      break;
    }
    pos += 12 + length;
  }
  const streamLen = idat.reduce((n, p) => n + p.length, 0);
  const stream = new Uint8Array(streamLen);
  let offset = 0;
  for (const p of idat) {
    stream.set(p, offset);
    offset += p.length;
  }
  const raw = zlibStoredInflate(stream);
  const pixels = new Uint8Array(width * height);
  for (let y = 0; y < height; y++) {
    const filter = raw[y * (width + 1)];
    if (filter !== 0) {
      throw new Error("only filter type None is supported");
    }
    pixels.set(
      raw.subarray(y * (width + 1) + 1, (y + 1) * (width + 1)), y * width);
  }
  return { width, height, pixels };
}

const B64_ALPHABET =
  "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

/** Environment-independent base64 (browser btoa chokes on binary strings). */
export function bytesToBase64(bytes: Uint8Array): string {
  let out = "";
  for (let i = 0; i < bytes.length; i += 3) {
    const a = bytes[i];
    const b = i + 1 < bytes.length ? bytes[i + 1] : 0;
    const c = i + 2 < bytes.length ? bytes[i + 2] : 0;
    out += B64_ALPHABET[a >> 2];
    out += B64_ALPHABET[((a & 3) << 4) | (b >> 4)];
    out += i + 1 < bytes.length ? B64_ALPHABET[((b & 15) << 2) | (c >> 6)] : "=";
    out += i + 2 < bytes.length ? B64_ALPHABET[c & 63] : "=";
  }
  return out;
}

export function base64ToBytes(text: string): Uint8Array {
  const clean = text.replace(/=+$/, "");
  const out = new Uint8Array(Math.floor((clean.length * 3) / 4));
  let buffer = 0;
  let bits = 0;
  let offset = 0;
  for (const ch of clean) {
    const value = B64_ALPHABET.indexOf(ch);
    if (value < 0) {
      throw new Error(`invalid base64 character: ${ch}`);
    }
    buffer = (buffer << 6) | value;
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out[offset++] = (buffer >> bits) & 0xff;
    }
  }
  return out;
}

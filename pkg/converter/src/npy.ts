// Readers for .npy arrays and .npz archives (zip of .npy members, stored or
// deflated). Only numeric dtypes are decoded; object-dtype members are
// reported but not parsed.

import * as zlib from "zlib";
import { Dtype, UnpickleError, decodeElements, shapeSize } from "./unpickle";
import { DenseArray } from "./ndarray";

const NPY_MAGIC = Buffer.from("\x93NUMPY", "latin1");

export class NpyError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "NpyError";
  }
}

interface NpyHeader {
  descr: string;
  fortran: boolean;
  shape: number[];
}

// The header is a Python dict literal with three fixed keys.
function parseHeader(text: string): NpyHeader {
  const descr = /['"]descr['"]\s*:\s*['"]([^'"]+)['"]/.exec(text);
  const fortran = /['"]fortran_order['"]\s*:\s*(True|False)/.exec(text);
  const shape = /['"]shape['"]\s*:\s*\(([^)]*)\)/.exec(text);
  if (!descr || !fortran || !shape) throw new NpyError(`malformed npy header: ${text.trim()}`);
  const dims = shape[1]
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0)
    .map((s) => {
      const v = parseInt(s, 10);
      if (Number.isNaN(v) || v < 0) throw new NpyError(`bad dimension '${s}'`);
      return v;
    });
  return { descr: descr[1], fortran: fortran[1] === "True", shape: dims };
}

function dtypeFromDescr(descr: string): Dtype {
  const m = /^([<>|=])?([iufb]\d*)$/.exec(descr);
  if (!m) throw new NpyError(`unsupported dtype descr '${descr}'`);
  const order = (m[1] ?? "=") as "<" | ">" | "|" | "=";
  return new Dtype(m[2], order);
}

/** Parse one .npy buffer into a dense row-major array. */
export function readNpy(buf: Buffer): DenseArray {
  if (buf.length < 10 || !buf.subarray(0, 6).equals(NPY_MAGIC)) {
    throw new NpyError("not an npy file (bad magic)");
  }
  const major = buf[6];
  const headerLen = major >= 2 ? buf.readUInt32LE(8) : buf.readUInt16LE(8);
  const headerEnd = (major >= 2 ? 12 : 10) + headerLen;
  if (headerEnd > buf.length) throw new NpyError("truncated npy header");
  const header = parseHeader(buf.subarray(major >= 2 ? 12 : 10, headerEnd).toString("latin1"));
  if (header.descr.includes("O")) throw new NpyError("object-dtype npy member");
  const dtype = dtypeFromDescr(header.descr);
  const count = shapeSize(header.shape);
  const payload = new Uint8Array(buf.buffer, buf.byteOffset + headerEnd, buf.length - headerEnd);
  let values: number[];
  try {
    values = decodeElements(payload, dtype, count);
  } catch (err) {
    if (err instanceof UnpickleError) throw new NpyError(err.message);
    throw err;
  }
  if (header.fortran && header.shape.length === 2) {
    const [rows, cols] = header.shape;
    const flipped = new Array<number>(count);
    for (let rr = 0; rr < rows; rr++) {
      for (let cc = 0; cc < cols; cc++) flipped[rr * cols + cc] = values[cc * rows + rr];
    }
    values = flipped;
  } else if (header.fortran && header.shape.length > 2) {
    throw new NpyError("fortran-order npy with more than 2 dims");
  }
  return { shape: header.shape, values };
}

interface ZipEntry {
  name: string;
  method: number;
  compressedSize: number;
  uncompressedSize: number;
  localOffset: number;
}

// Minimal zip reader: locate the end-of-central-directory record, walk the
// central directory, then cut each member out of its local header.
function zipEntries(buf: Buffer): ZipEntry[] {
  const EOCD = 0x06054b50;
  let eocd = -1;
  const scanFrom = Math.max(0, buf.length - 22 - 0xffff);
  for (let i = buf.length - 22; i >= scanFrom; i--) {
    if (buf.readUInt32LE(i) === EOCD) {
      eocd = i;
      break;
    }
  }
  if (eocd < 0) throw new NpyError("not a zip archive (no end-of-central-directory)");
  const count = buf.readUInt16LE(eocd + 10);
  let at = buf.readUInt32LE(eocd + 16);
  const entries: ZipEntry[] = [];
  for (let i = 0; i < count; i++) {
    if (buf.readUInt32LE(at) !== 0x02014b50) throw new NpyError("bad central directory entry");
    const method = buf.readUInt16LE(at + 10);
    const compressedSize = buf.readUInt32LE(at + 20);
    const uncompressedSize = buf.readUInt32LE(at + 24);
    const nameLen = buf.readUInt16LE(at + 28);
    const extraLen = buf.readUInt16LE(at + 30);
    const commentLen = buf.readUInt16LE(at + 32);
    const localOffset = buf.readUInt32LE(at + 42);
    const name = buf.subarray(at + 46, at + 46 + nameLen).toString("latin1");
    entries.push({ name, method, compressedSize, uncompressedSize, localOffset });
    at += 46 + nameLen + extraLen + commentLen;
  }
  return entries;
}

function zipMember(buf: Buffer, entry: ZipEntry): Buffer {
  const at = entry.localOffset;
  if (buf.readUInt32LE(at) !== 0x04034b50) throw new NpyError(`bad local header for ${entry.name}`);
  const nameLen = buf.readUInt16LE(at + 26);
  const extraLen = buf.readUInt16LE(at + 28);
  const start = at + 30 + nameLen + extraLen;
  const raw = buf.subarray(start, start + entry.compressedSize);
  if (entry.method === 0) return Buffer.from(raw);
  if (entry.method === 8) return zlib.inflateRawSync(raw);
  throw new NpyError(`unsupported compression method ${entry.method} for ${entry.name}`);
}

/** Read every numeric member of an .npz archive, keyed by member name. */
export function readNpz(buf: Buffer): Map<string, DenseArray> {
  const out = new Map<string, DenseArray>();
  for (const entry of zipEntries(buf)) {
    const key = entry.name.endsWith(".npy") ? entry.name.slice(0, -4) : entry.name;
    const member = zipMember(buf, entry);
    try {
      out.set(key, readNpy(member));
    } catch (err) {
      if (err instanceof NpyError && err.message.includes("object-dtype")) continue;
      throw new NpyError(`member ${entry.name}: ${(err as Error).message}`);
    }
  }
  return out;
}

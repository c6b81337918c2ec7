// Minimal unpickler for the legacy serialized objects that ship in upstream
// citation-network archives: numpy arrays, scipy CSR matrices, dicts and
// defaultdicts of adjacency lists, ints, floats, strings.
//
// Covers pickle protocols 0, 1 and 2 (what the historical Python 2 archives
// and their Python 3 re-dumps use) plus the handful of protocol 3/4 opcodes
// needed for byte strings. Anything outside that set fails loudly with the
// opcode and stream offset rather than guessing.
//
// Legacy 8-bit strings are mapped to JS strings one char per byte (latin-1),
// which is exactly how the reference loaders read these files; binary array
// payloads are re-encoded to bytes when an array is reconstructed.

export class UnpickleError extends Error {
  constructor(message: string, offset?: number) {
    super(offset === undefined ? message : `${message} (at byte ${offset})`);
    this.name = "UnpickleError";
  }
}

/** A resolved GLOBAL reference (a class or function by module and name). */
export class PyRef {
  constructor(
    public readonly module: string,
    public readonly name: string,
  ) {}

  get id(): string {
    return `${this.module}.${this.name}`;
  }
}

/** Generic reconstructed instance: class reference plus attribute dict. */
export class PyObject {
  attrs = new Map<string, PyValue>();
  constructor(public readonly cls: PyRef) {}
}

/** numpy dtype: a type code like "i8"/"f4"/"b1"/"O" plus byte order. */
export class Dtype {
  constructor(
    public code: string,
    public byteorder: "<" | ">" | "|" | "=" = "=",
  ) {}
}

/** numpy ndarray as reconstructed from its pickle state. */
export class NdArray {
  shape: number[] = [];
  dtype: Dtype = new Dtype("f8");
  fortran = false;
  bytes: Uint8Array | null = null;
  objects: PyValue[] | null = null; // dtype "O" arrays only
}

export type PyValue =
  | null
  | boolean
  | number
  | string
  | Uint8Array
  | PyValue[]
  | Map<PyValue, PyValue>
  | Set<PyValue>
  | PyRef
  | PyObject
  | Dtype
  | NdArray;

const MARK = Symbol("mark");
type StackItem = PyValue | typeof MARK;

function latin1ToString(bytes: Uint8Array): string {
  let out = "";
  const CHUNK = 0x8000;
  for (let i = 0; i < bytes.length; i += CHUNK) {
    out += String.fromCharCode(...bytes.subarray(i, i + CHUNK));
  }
  return out;
}

export function stringToLatin1(s: string): Uint8Array {
  const out = new Uint8Array(s.length);
  for (let i = 0; i < s.length; i++) {
    const c = s.charCodeAt(i);
    if (c > 0xff) throw new UnpickleError(`non latin-1 char ${c} in binary string`);
    out[i] = c;
  }
  return out;
}

// Decode a Python 2 repr-quoted string literal (the STRING opcode payload).
function decodeStringLiteral(raw: string, offset: number): string {
  if (raw.length < 2) throw new UnpickleError("string literal too short", offset);
  const quote = raw[0];
  if ((quote !== "'" && quote !== '"') || raw[raw.length - 1] !== quote) {
    throw new UnpickleError("unquoted string literal", offset);
  }
  const body = raw.slice(1, -1);
  let out = "";
  let i = 0;
  while (i < body.length) {
    const ch = body[i];
    if (ch !== "\\") {
      out += ch;
      i++;
      continue;
    }
    const esc = body[i + 1];
    i += 2;
    switch (esc) {
      case "\\": out += "\\"; break;
      case "'": out += "'"; break;
      case '"': out += '"'; break;
      case "a": out += "\x07"; break;
      case "b": out += "\b"; break;
      case "f": out += "\f"; break;
      case "n": out += "\n"; break;
      case "r": out += "\r"; break;
      case "t": out += "\t"; break;
      case "v": out += "\v"; break;
      case "\n": break; // line continuation
      case "x": {
        const hex = body.slice(i, i + 2);
        if (!/^[0-9a-fA-F]{2}$/.test(hex)) {
          throw new UnpickleError(`bad \\x escape '${hex}'`, offset);
        }
        out += String.fromCharCode(parseInt(hex, 16));
        i += 2;
        break;
      }
      default: {
        if (esc >= "0" && esc <= "7") {
          let oct = esc;
          while (oct.length < 3 && body[i] >= "0" && body[i] <= "7") {
            oct += body[i];
            i++;
          }
          out += String.fromCharCode(parseInt(oct, 8));
        } else {
          out += "\\" + (esc ?? ""); // unknown escape kept literally
        }
      }
    }
  }
  return out;
}

// Decode the UNICODE opcode payload (raw-unicode-escape with \uXXXX forms).
function decodeRawUnicodeEscape(raw: string): string {
  return raw.replace(/\\u([0-9a-fA-F]{4})|\\U([0-9a-fA-F]{8})/g, (_, u4, u8) =>
    String.fromCodePoint(parseInt(u4 ?? u8, 16)),
  );
}

function bigToNumber(v: bigint, offset: number): number {
  if (v > BigInt(Number.MAX_SAFE_INTEGER) || v < -BigInt(Number.MAX_SAFE_INTEGER)) {
    throw new UnpickleError(`integer ${v} exceeds safe range`, offset);
  }
  return Number(v);
}

class Reader {
  pos = 0;
  private view: DataView;

  constructor(public readonly data: Uint8Array) {
    this.view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  }

  byte(): number {
    if (this.pos >= this.data.length) throw new UnpickleError("truncated stream", this.pos);
    return this.data[this.pos++];
  }

  take(n: number): Uint8Array {
    if (this.pos + n > this.data.length) throw new UnpickleError("truncated stream", this.pos);
    const out = this.data.subarray(this.pos, this.pos + n);
    this.pos += n;
    return out;
  }

  line(): string {
    const start = this.pos;
    while (this.pos < this.data.length && this.data[this.pos] !== 0x0a) this.pos++;
    if (this.pos >= this.data.length) throw new UnpickleError("unterminated line", start);
    const text = latin1ToString(this.data.subarray(start, this.pos));
    this.pos++; // consume the newline
    return text;
  }

  u8(): number { return this.byte(); }
  u16(): number { const v = this.view.getUint16(this.pos, true); this.pos += 2; return v; }
  i32(): number { const v = this.view.getInt32(this.pos, true); this.pos += 4; return v; }
  u32(): number { const v = this.view.getUint32(this.pos, true); this.pos += 4; return v; }
  u64(): number {
    const v = this.view.getBigUint64(this.pos, true);
    this.pos += 8;
    return bigToNumber(v, this.pos - 8);
  }
  f64be(): number { const v = this.view.getFloat64(this.pos, false); this.pos += 8; return v; }
}

function decodeLong(bytes: Uint8Array, offset: number): number {
  // little-endian two's complement, arbitrary width
  if (bytes.length === 0) return 0;
  let v = 0n;
  for (let i = bytes.length - 1; i >= 0; i--) v = (v << 8n) | BigInt(bytes[i]);
  if (bytes[bytes.length - 1] & 0x80) v -= 1n << BigInt(8 * bytes.length);
  return bigToNumber(v, offset);
}

function parseProtocol0Float(text: string, offset: number): number {
  if (text === "inf") return Infinity;
  if (text === "-inf") return -Infinity;
  if (text === "nan") return NaN;
  const v = parseFloat(text);
  if (Number.isNaN(v)) throw new UnpickleError(`bad float literal '${text}'`, offset);
  return v;
}

function parseProtocol0Int(text: string, offset: number): number | boolean {
  if (text === "01") return true;
  if (text === "00") return false;
  const v = parseInt(text, 10);
  if (Number.isNaN(v)) throw new UnpickleError(`bad int literal '${text}'`, offset);
  return v;
}

/** Scalar element count of a shape (empty shape = 1, a 0-d scalar). */
export function shapeSize(shape: number[]): number {
  return shape.reduce((a, b) => a * b, 1);
}

function expectRef(v: PyValue, offset: number): PyRef {
  if (v instanceof PyRef) return v;
  throw new UnpickleError("expected a class reference", offset);
}

function asTuple(v: PyValue, offset: number): PyValue[] {
  if (Array.isArray(v)) return v;
  throw new UnpickleError("expected a tuple", offset);
}

// REDUCE / INST / OBJ dispatch: reconstruct the handful of callables these
// archives actually contain.
function construct(fn: PyRef, args: PyValue[], offset: number): PyValue {
  switch (fn.id) {
    case "copy_reg._reconstructor":
    case "copyreg._reconstructor":
      return new PyObject(expectRef(args[0], offset));
    case "numpy.core.multiarray._reconstruct":
    case "numpy._core.multiarray._reconstruct":
      return new NdArray();
    case "numpy.dtype":
    case "numpy.core.multiarray.dtype":
    case "numpy._core.multiarray.dtype": {
      const code = args[0];
      if (typeof code !== "string") throw new UnpickleError("dtype code not a string", offset);
      return new Dtype(code);
    }
    case "numpy.core.multiarray.scalar":
    case "numpy._core.multiarray.scalar": {
      const dt = args[0];
      const payload = args[1];
      if (!(dt instanceof Dtype)) throw new UnpickleError("scalar without dtype", offset);
      const bytes = typeof payload === "string" ? stringToLatin1(payload) : (payload as Uint8Array);
      return decodeElements(bytes, dt, 1, offset)[0];
    }
    case "collections.defaultdict":
      return new Map<PyValue, PyValue>();
    case "collections.OrderedDict": {
      const map = new Map<PyValue, PyValue>();
      if (args.length && Array.isArray(args[0])) {
        for (const pair of args[0] as PyValue[]) {
          const [k, v] = asTuple(pair, offset);
          map.set(k, v);
        }
      }
      return map;
    }
    case "_codecs.encode": {
      const text = args[0];
      const enc = args[1];
      if (typeof text !== "string") throw new UnpickleError("encode() arg not a string", offset);
      if (enc !== "latin1" && enc !== "latin-1" && enc !== "latin_1") {
        throw new UnpickleError(`unsupported encode() codec '${String(enc)}'`, offset);
      }
      return stringToLatin1(text);
    }
    case "__builtin__.list":
    case "builtins.list":
      return args.length && Array.isArray(args[0]) ? [...(args[0] as PyValue[])] : [];
    case "__builtin__.set":
    case "builtins.set":
      return new Set(args.length ? (args[0] as PyValue[]) : []);
    default:
      // Classes without custom reduce logic (scipy matrices arrive this way
      // through protocol 0/1 INST and OBJ): bare construction only.
      if (args.length === 0) return new PyObject(fn);
      throw new UnpickleError(`cannot reconstruct ${fn.id} with arguments`, offset);
  }
}

/** Decode `count` scalar elements of a given dtype from raw bytes. */
export function decodeElements(
  bytes: Uint8Array,
  dtype: Dtype,
  count: number,
  offset = 0,
): number[] {
  const code = dtype.code;
  const little = dtype.byteorder !== ">";
  const width = parseInt(code.slice(1), 10);
  if (code === "b1" || code === "|b1") {
    if (bytes.length < count) throw new UnpickleError("array payload too short", offset);
    return Array.from(bytes.subarray(0, count), (b) => (b ? 1 : 0));
  }
  if (!/^[iuf][1248]$/.test(code)) {
    throw new UnpickleError(`unsupported dtype '${code}'`, offset);
  }
  if (bytes.length < count * width) throw new UnpickleError("array payload too short", offset);
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const out = new Array<number>(count);
  for (let i = 0; i < count; i++) {
    const at = i * width;
    switch (code) {
      case "i1": out[i] = view.getInt8(at); break;
      case "u1": out[i] = view.getUint8(at); break;
      case "i2": out[i] = view.getInt16(at, little); break;
      case "u2": out[i] = view.getUint16(at, little); break;
      case "i4": out[i] = view.getInt32(at, little); break;
      case "u4": out[i] = view.getUint32(at, little); break;
      case "i8": out[i] = bigToNumber(view.getBigInt64(at, little), offset); break;
      case "u8": out[i] = bigToNumber(view.getBigUint64(at, little), offset); break;
      case "f4": out[i] = view.getFloat32(at, little); break;
      case "f8": out[i] = view.getFloat64(at, little); break;
    }
  }
  return out;
}

function applyBuild(obj: PyValue, state: PyValue, offset: number): void {
  if (obj instanceof NdArray) {
    const parts = asTuple(state, offset);
    // (version, shape, dtype, fortran_order, data)
    const shape = asTuple(parts[1], offset).map((v) => {
      if (typeof v !== "number") throw new UnpickleError("non-integer in shape", offset);
      return v;
    });
    const dt = parts[2];
    if (!(dt instanceof Dtype)) throw new UnpickleError("array state without dtype", offset);
    obj.shape = shape;
    obj.dtype = dt;
    obj.fortran = parts[3] === true;
    const payload = parts[4];
    if (typeof payload === "string") obj.bytes = stringToLatin1(payload);
    else if (payload instanceof Uint8Array) obj.bytes = payload;
    else if (Array.isArray(payload)) obj.objects = payload;
    else throw new UnpickleError("unsupported array payload", offset);
    return;
  }
  if (obj instanceof Dtype) {
    const parts = asTuple(state, offset);
    const order = parts[1];
    if (order === "<" || order === ">" || order === "|" || order === "=") {
      obj.byteorder = order;
    }
    return;
  }
  if (obj instanceof PyObject) {
    let dictState: PyValue = state;
    let slotsState: PyValue = null;
    if (Array.isArray(state) && state.length === 2) {
      [dictState, slotsState] = state;
    }
    for (const part of [dictState, slotsState]) {
      if (part === null) continue;
      if (!(part instanceof Map)) throw new UnpickleError("object state is not a dict", offset);
      for (const [k, v] of part) {
        if (typeof k !== "string") throw new UnpickleError("non-string attribute name", offset);
        obj.attrs.set(k, v);
      }
    }
    return;
  }
  throw new UnpickleError("BUILD on unsupported object", offset);
}

/** Unpickle one object from `data`. */
export function unpickle(data: Uint8Array): PyValue {
  const r = new Reader(data);
  const stack: StackItem[] = [];
  const memo: PyValue[] = [];

  const pop = (): PyValue => {
    const v = stack.pop();
    if (v === undefined || v === MARK) throw new UnpickleError("stack underflow", r.pos);
    return v;
  };
  const top = (): PyValue => {
    const v = stack[stack.length - 1];
    if (v === undefined || v === MARK) throw new UnpickleError("empty stack", r.pos);
    return v;
  };
  const popToMark = (): PyValue[] => {
    const at = stack.lastIndexOf(MARK);
    if (at < 0) throw new UnpickleError("no MARK on stack", r.pos);
    const items = stack.splice(at + 1) as PyValue[];
    stack.pop(); // the mark itself
    return items;
  };
  const memoPut = (key: number) => {
    memo[key] = top();
  };

  for (;;) {
    const at = r.pos;
    const op = r.byte();
    switch (op) {
      case 0x80: { // PROTO
        const ver = r.byte();
        if (ver > 5) throw new UnpickleError(`unknown protocol ${ver}`, at);
        break;
      }
      case 0x95: r.take(8); break; // FRAME length, informational
      case 0x2e: // STOP
        return pop();

      case 0x28: stack.push(MARK); break; // MARK
      case 0x30: pop(); break; // POP
      case 0x31: popToMark(); break; // POP_MARK
      case 0x32: stack.push(top()); break; // DUP

      case 0x4e: stack.push(null); break; // NONE
      case 0x88: stack.push(true); break; // NEWTRUE
      case 0x89: stack.push(false); break; // NEWFALSE

      case 0x49: stack.push(parseProtocol0Int(r.line(), at)); break; // INT
      case 0x4c: { // LONG
        const text = r.line().replace(/L$/, "");
        const v = BigInt(text);
        stack.push(bigToNumber(v, at));
        break;
      }
      case 0x4a: stack.push(r.i32()); break; // BININT
      case 0x4b: stack.push(r.u8()); break; // BININT1
      case 0x4d: stack.push(r.u16()); break; // BININT2
      case 0x8a: stack.push(decodeLong(r.take(r.u8()), at)); break; // LONG1
      case 0x8b: stack.push(decodeLong(r.take(r.u32()), at)); break; // LONG4

      case 0x46: stack.push(parseProtocol0Float(r.line(), at)); break; // FLOAT
      case 0x47: stack.push(r.f64be()); break; // BINFLOAT

      case 0x53: stack.push(decodeStringLiteral(r.line(), at)); break; // STRING
      case 0x54: stack.push(latin1ToString(r.take(r.u32()))); break; // BINSTRING
      case 0x55: stack.push(latin1ToString(r.take(r.u8()))); break; // SHORT_BINSTRING
      case 0x56: stack.push(decodeRawUnicodeEscape(r.line())); break; // UNICODE
      case 0x58: stack.push(Buffer.from(r.take(r.u32())).toString("utf8")); break; // BINUNICODE
      case 0x8c: stack.push(Buffer.from(r.take(r.u8())).toString("utf8")); break; // SHORT_BINUNICODE
      case 0x8d: stack.push(Buffer.from(r.take(r.u64())).toString("utf8")); break; // BINUNICODE8

      case 0x42: stack.push(r.take(r.u32()).slice()); break; // BINBYTES
      case 0x43: stack.push(r.take(r.u8()).slice()); break; // SHORT_BINBYTES
      case 0x8e: stack.push(r.take(r.u64()).slice()); break; // BINBYTES8

      case 0x29: stack.push([]); break; // EMPTY_TUPLE
      case 0x74: stack.push(popToMark()); break; // TUPLE
      case 0x85: { const a = pop(); stack.push([a]); break; } // TUPLE1
      case 0x86: { const b = pop(); const a = pop(); stack.push([a, b]); break; } // TUPLE2
      case 0x87: { const c = pop(); const b = pop(); const a = pop(); stack.push([a, b, c]); break; } // TUPLE3

      case 0x5d: stack.push([]); break; // EMPTY_LIST
      case 0x6c: stack.push(popToMark()); break; // LIST
      case 0x61: { // APPEND
        const v = pop();
        const list = top();
        if (!Array.isArray(list)) throw new UnpickleError("APPEND to non-list", at);
        list.push(v);
        break;
      }
      case 0x65: { // APPENDS
        const items = popToMark();
        const list = top();
        if (!Array.isArray(list)) throw new UnpickleError("APPENDS to non-list", at);
        list.push(...items);
        break;
      }

      case 0x7d: stack.push(new Map<PyValue, PyValue>()); break; // EMPTY_DICT
      case 0x64: { // DICT
        const items = popToMark();
        const map = new Map<PyValue, PyValue>();
        for (let i = 0; i + 1 < items.length; i += 2) map.set(items[i], items[i + 1]);
        stack.push(map);
        break;
      }
      case 0x73: { // SETITEM
        const v = pop();
        const k = pop();
        const map = top();
        if (!(map instanceof Map)) throw new UnpickleError("SETITEM on non-dict", at);
        map.set(k, v);
        break;
      }
      case 0x75: { // SETITEMS
        const items = popToMark();
        const map = top();
        if (!(map instanceof Map)) throw new UnpickleError("SETITEMS on non-dict", at);
        for (let i = 0; i + 1 < items.length; i += 2) map.set(items[i], items[i + 1]);
        break;
      }

      case 0x70: memoPut(parseInt(r.line(), 10)); break; // PUT
      case 0x71: memoPut(r.u8()); break; // BINPUT
      case 0x72: memoPut(r.u32()); break; // LONG_BINPUT
      case 0x94: memoPut(memo.length); break; // MEMOIZE
      case 0x67: { // GET
        const key = parseInt(r.line(), 10);
        if (!(key in memo)) throw new UnpickleError(`memo key ${key} unset`, at);
        stack.push(memo[key]);
        break;
      }
      case 0x68: { // BINGET
        const key = r.u8();
        if (!(key in memo)) throw new UnpickleError(`memo key ${key} unset`, at);
        stack.push(memo[key]);
        break;
      }
      case 0x6a: { // LONG_BINGET
        const key = r.u32();
        if (!(key in memo)) throw new UnpickleError(`memo key ${key} unset`, at);
        stack.push(memo[key]);
        break;
      }

      case 0x63: { // GLOBAL
        const module = r.line();
        const name = r.line();
        stack.push(new PyRef(module, name));
        break;
      }
      case 0x93: { // STACK_GLOBAL
        const name = pop();
        const module = pop();
        if (typeof module !== "string" || typeof name !== "string") {
          throw new UnpickleError("STACK_GLOBAL args not strings", at);
        }
        stack.push(new PyRef(module, name));
        break;
      }

      case 0x52: { // REDUCE
        const args = asTuple(pop(), at);
        const fn = expectRef(pop(), at);
        stack.push(construct(fn, args, at));
        break;
      }
      case 0x81: { // NEWOBJ
        const args = asTuple(pop(), at);
        const cls = expectRef(pop(), at);
        stack.push(construct(cls, args, at));
        break;
      }
      case 0x92: { // NEWOBJ_EX
        const kwargs = pop();
        const args = asTuple(pop(), at);
        const cls = expectRef(pop(), at);
        if (kwargs instanceof Map && kwargs.size > 0) {
          throw new UnpickleError("NEWOBJ_EX with keyword arguments", at);
        }
        stack.push(construct(cls, args, at));
        break;
      }
      case 0x69: { // INST
        const module = r.line();
        const name = r.line();
        const args = popToMark();
        stack.push(construct(new PyRef(module, name), args, at));
        break;
      }
      case 0x6f: { // OBJ
        const items = popToMark();
        const cls = expectRef(items[0], at);
        stack.push(construct(cls, items.slice(1), at));
        break;
      }
      case 0x62: { // BUILD
        const state = pop();
        applyBuild(top(), state, at);
        break;
      }

      default:
        throw new UnpickleError(
          `unsupported opcode 0x${op.toString(16).padStart(2, "0")}`,
          at,
        );
    }
  }
}

/** Read a whole pickle file's single object. */
export function unpickleBuffer(buf: Buffer): PyValue {
  return unpickle(new Uint8Array(buf.buffer, buf.byteOffset, buf.byteLength));
}

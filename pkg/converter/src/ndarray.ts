// Views over unpickled numpy/scipy objects: dense arrays in row-major
// number[] form and CSR sparse matrices as plain index/value arrays.

import {
  Dtype,
  NdArray,
  PyObject,
  PyValue,
  UnpickleError,
  decodeElements,
  shapeSize,
} from "./unpickle";

export interface DenseArray {
  shape: number[];
  values: number[]; // row-major
}

export interface SparseCsr {
  rows: number;
  cols: number;
  data: number[];
  indices: number[];
  indptr: number[];
}

export function toDense(v: PyValue): DenseArray {
  if (!(v instanceof NdArray)) throw new UnpickleError("expected an ndarray");
  const count = shapeSize(v.shape);
  if (v.objects) throw new UnpickleError("object-dtype array where numbers expected");
  if (!v.bytes) throw new UnpickleError("array without data payload");
  let values = decodeElements(v.bytes, v.dtype, count);
  if (v.fortran && v.shape.length === 2) {
    const [rows, cols] = v.shape;
    const flipped = new Array<number>(count);
    for (let rr = 0; rr < rows; rr++) {
      for (let cc = 0; cc < cols; cc++) flipped[rr * cols + cc] = values[cc * rows + rr];
    }
    values = flipped;
  } else if (v.fortran && v.shape.length > 2) {
    throw new UnpickleError("fortran-order array with more than 2 dims");
  }
  return { shape: v.shape.slice(), values };
}

function attr(obj: PyObject, ...names: string[]): PyValue {
  for (const name of names) {
    const v = obj.attrs.get(name);
    if (v !== undefined) return v;
  }
  throw new UnpickleError(`matrix state missing attribute ${names[0]}`);
}

/** View a reconstructed scipy CSR matrix. */
export function toCsr(v: PyValue): SparseCsr {
  if (!(v instanceof PyObject) || v.cls.name !== "csr_matrix") {
    const got = v instanceof PyObject ? v.cls.id : typeof v;
    throw new UnpickleError(`expected a csr_matrix, got ${got}`);
  }
  const shape = attr(v, "_shape", "shape");
  if (!Array.isArray(shape) || shape.length !== 2) {
    throw new UnpickleError("csr_matrix without a 2-d shape");
  }
  const [rows, cols] = shape.map((s) => {
    if (typeof s !== "number") throw new UnpickleError("non-integer matrix shape");
    return s;
  });
  const data = toDense(attr(v, "data")).values;
  const indices = toDense(attr(v, "indices")).values;
  const indptr = toDense(attr(v, "indptr")).values;
  if (indptr.length !== rows + 1) {
    throw new UnpickleError(
      `csr indptr length ${indptr.length} does not match ${rows} rows`,
    );
  }
  if (indptr[rows] !== data.length || data.length !== indices.length) {
    throw new UnpickleError("csr index arrays are inconsistent");
  }
  return { rows, cols, data, indices, indptr };
}

/** Build a CSR view from raw component arrays (the npz layout). */
export function csrFromParts(
  data: number[],
  indices: number[],
  indptr: number[],
  rows: number,
  cols: number,
): SparseCsr {
  if (indptr.length !== rows + 1 || indptr[rows] !== data.length || data.length !== indices.length) {
    throw new UnpickleError("csr component arrays are inconsistent");
  }
  for (const j of indices) {
    if (j < 0 || j >= cols) throw new UnpickleError(`csr column index ${j} out of range`);
  }
  return { rows, cols, data, indices, indptr };
}

/** Stack two CSR matrices vertically (same column count). */
export function vstackCsr(a: SparseCsr, b: SparseCsr): SparseCsr {
  if (a.cols !== b.cols) {
    throw new UnpickleError(`cannot stack ${a.cols}-col and ${b.cols}-col matrices`);
  }
  const offset = a.data.length;
  const indptr = a.indptr.slice(0, a.rows + 1);
  for (let i = 1; i < b.indptr.length; i++) indptr.push(b.indptr[i] + offset);
  return {
    rows: a.rows + b.rows,
    cols: a.cols,
    data: a.data.concat(b.data),
    indices: a.indices.concat(b.indices),
    indptr,
  };
}

/** One row of a CSR matrix as (column, value) pairs sorted by column. */
export function csrRow(m: SparseCsr, row: number): Array<[number, number]> {
  const lo = m.indptr[row];
  const hi = m.indptr[row + 1];
  const out: Array<[number, number]> = [];
  for (let k = lo; k < hi; k++) out.push([m.indices[k], m.data[k]]);
  out.sort((p, q) => p[0] - q[0]);
  // collapse duplicate column entries the way sum_duplicates would
  const merged: Array<[number, number]> = [];
  for (const [j, val] of out) {
    if (merged.length && merged[merged.length - 1][0] === j) {
      merged[merged.length - 1][1] += val;
    } else {
      merged.push([j, val]);
    }
  }
  return merged;
}

export { Dtype };

#!/usr/bin/env python3
"""Regenerate every committed fixture under converter/fixtures/.

Run from anywhere: python3 converter/fixtures/make_fixtures.py

Outputs are deterministic. Hand-crafted pickles imitate the opcode stream
Python 2's cPickle produced for the historical archive files (protocol 0,
S-strings, copy_reg/__builtin__/scipy.sparse.csr/numpy.core module paths);
each one is validated by round-tripping through pickle.loads before it is
written. Expected bundles are produced by the fewlabel library itself, so
the byte-format oracle is the real consumer.
"""

import io
import json
import math
import pickle
import random
import struct
import sys
import zipfile
from collections import defaultdict
from pathlib import Path

import numpy as np
import scipy.sparse as sp

import builtins
import copyreg

import fewlabel as fl

ROOT = Path(__file__).resolve().parent

# pickle.loads needs the Python 2 era module names the crafted streams use
sys.modules.setdefault("copy_reg", copyreg)
sys.modules.setdefault("__builtin__", builtins)
sys.modules.setdefault("scipy.sparse.csr", sp._csr)


# ---------------------------------------------------------------------------
# protocol-0 emitter in the style of Python 2 cPickle


class P0:
    def __init__(self):
        self.buf = bytearray()
        self.count = 0

    def raw(self, b):
        self.buf += b

    def put(self):
        self.raw(b"p%d\n" % self.count)
        self.count += 1

    def global_(self, module, name):
        self.raw(b"c%s\n%s\n" % (module.encode("ascii"), name.encode("ascii")))
        self.put()

    def none(self):
        self.raw(b"N")

    def bool_(self, v):
        self.raw(b"I01\n" if v else b"I00\n")

    def int_(self, v):
        self.raw(b"I%d\n" % v)

    def long_(self, v):
        self.raw(b"L%dL\n" % v)

    def float_(self, v):
        self.raw(b"F%s\n" % repr(float(v)).encode("ascii"))

    def string(self, data):
        # py2 repr-style escaping inside single quotes
        out = bytearray(b"S'")
        for byte in data:
            if byte == 0x5C:
                out += b"\\\\"
            elif byte == 0x27:
                out += b"\\'"
            elif byte == 0x0A:
                out += b"\\n"
            elif byte == 0x0D:
                out += b"\\r"
            elif byte == 0x09:
                out += b"\\t"
            elif 0x20 <= byte <= 0x7E:
                out.append(byte)
            else:
                out += b"\\x%02x" % byte
        out += b"'\n"
        self.raw(bytes(out))
        self.put()

    def mark(self):
        self.raw(b"(")

    def tuple_(self):
        self.raw(b"t")
        self.put()

    def reduce(self):
        self.raw(b"R")
        self.put()

    def build(self):
        self.raw(b"b")

    def dict_(self):
        self.raw(b"(d")
        self.put()

    def list_(self):
        self.raw(b"(l")
        self.put()

    def setitem(self):
        self.raw(b"s")

    def append(self):
        self.raw(b"a")

    def stop(self):
        self.raw(b".")

    def bytes_value(self):
        return bytes(self.buf)


def emit_dtype(p, dt):
    code = dt.str.lstrip("<>|=")
    byteorder = dt.str[0] if dt.str[0] in "<>" else "|"
    p.global_("numpy", "dtype")
    p.mark()
    p.string(code.encode("ascii"))
    p.int_(0)
    p.int_(1)
    p.tuple_()
    p.reduce()
    p.mark()
    p.int_(3)
    p.string(byteorder.encode("ascii"))
    p.none()
    p.none()
    p.none()
    p.int_(-1)
    p.int_(-1)
    p.int_(0)
    p.tuple_()
    p.build()


def emit_ndarray(p, arr):
    p.global_("numpy.core.multiarray", "_reconstruct")
    p.mark()
    p.global_("numpy", "ndarray")
    p.mark()
    p.int_(0)
    p.tuple_()
    p.string(b"b")
    p.tuple_()
    p.reduce()
    p.mark()
    p.int_(1)
    p.mark()
    for s in arr.shape:
        p.int_(s)
    p.tuple_()
    emit_dtype(p, arr.dtype)
    p.bool_(bool(np.isfortran(arr)))
    p.string(arr.tobytes(order="A"))
    p.tuple_()
    p.build()


def emit_csr(p, m):
    p.global_("copy_reg", "_reconstructor")
    p.mark()
    p.global_("scipy.sparse.csr", "csr_matrix")
    p.global_("__builtin__", "object")
    p.none()
    p.tuple_()
    p.reduce()
    p.dict_()
    p.string(b"_shape")
    p.mark()
    p.int_(m.shape[0])
    p.int_(m.shape[1])
    p.tuple_()
    p.setitem()
    p.string(b"data")
    emit_ndarray(p, m.data)
    p.setitem()
    p.string(b"indices")
    emit_ndarray(p, m.indices)
    p.setitem()
    p.string(b"indptr")
    emit_ndarray(p, m.indptr)
    p.setitem()
    p.string(b"maxprint")
    p.int_(50)
    p.setitem()
    p.build()


def emit_graph(p, graph):
    p.global_("collections", "defaultdict")
    p.mark()
    p.global_("__builtin__", "list")
    p.tuple_()
    p.reduce()
    for k in graph:
        p.int_(int(k))
        p.list_()
        for v in graph[k]:
            p.int_(int(v))
            p.append()
        p.setitem()


def craft_csr(m):
    p = P0()
    emit_csr(p, m)
    p.stop()
    data = p.bytes_value()
    loaded = pickle.loads(data, encoding="latin1")
    assert loaded.shape == m.shape, "crafted csr shape drifted"
    assert np.array_equal(loaded.toarray(), m.toarray()), "crafted csr drifted"
    return data


def craft_ndarray(a):
    p = P0()
    emit_ndarray(p, a)
    p.stop()
    data = p.bytes_value()
    loaded = pickle.loads(data, encoding="latin1")
    assert loaded.dtype == a.dtype and np.array_equal(loaded, a), "crafted array drifted"
    return data


def craft_graph(g):
    p = P0()
    emit_graph(p, g)
    p.stop()
    data = p.bytes_value()
    loaded = pickle.loads(data, encoding="latin1")
    assert dict(loaded) == dict(g), "crafted graph drifted"
    return data


# ---------------------------------------------------------------------------
# canonical JSON encoding shared with test/helpers.ts


def canon(v):
    if v is None or isinstance(v, (bool, str)):
        return v
    if isinstance(v, float):
        if math.isnan(v):
            return {"f": "nan"}
        if math.isinf(v):
            return {"f": "inf" if v > 0 else "-inf"}
        if v == 0.0 and math.copysign(1.0, v) < 0:
            return {"f": "-0.0"}
        return v
    if isinstance(v, int):
        return v
    if isinstance(v, bytes):
        return {"b": list(v)}
    if isinstance(v, (list, tuple)):
        return {"l": [canon(x) for x in v]}
    if isinstance(v, dict):
        return {"d": [[canon(k), canon(x)] for k, x in v.items()]}
    if isinstance(v, np.ndarray):
        return {"a": {"shape": list(v.shape), "values": flat(v)}}
    if sp.issparse(v):
        return {"csr": csr_rows(v)}
    raise TypeError(f"no canonical form for {type(v)!r}")


def flat(a):
    vals = []
    for x in np.asarray(a).ravel(order="C").tolist():
        if isinstance(x, bool):
            x = int(x)
        if isinstance(x, float):
            # arrays in fixtures stay plain JSON numbers
            assert math.isfinite(x) and not (x == 0 and math.copysign(1, x) < 0)
        vals.append(x)
    return vals


def csr_rows(m):
    # duplicate columns summed, columns sorted: the normalized view
    c = m.copy().tocsr()
    c.sum_duplicates()
    c.sort_indices()
    rows = []
    for i in range(c.shape[0]):
        lo, hi = c.indptr[i], c.indptr[i + 1]
        rows.append([[int(j), float(x)] for j, x in zip(c.indices[lo:hi], c.data[lo:hi])])
    return {"shape": list(m.shape), "rows": rows}


def dump_json(path, obj):
    path.write_text(json.dumps(obj, indent=1) + "\n", encoding="ascii")


# ---------------------------------------------------------------------------
# unit fixtures: pickles


def make_pickle_fixtures():
    d = ROOT / "pickle"
    d.mkdir(parents=True, exist_ok=True)

    shared = [1, 2.5, "three"]
    obj = {
        "ints": [0, 1, -1, 255, 256, -256, 65535, 2**20, 2**40, -(2**40)],
        "floats": [0.0, -0.0, 0.1, 1e-8, 1.5e300, -2.75],
        "specials": [None, True, False, float("inf"), float("-inf"), float("nan")],
        "text": "café ✓ graph",
        "raw": b"\x00\x01\xfe\xff raw",
        "nest": (1, (2, 3), {"k": [4, 5]}),
        "shared": [shared, shared],
    }
    for proto in (0, 1, 2):
        (d / f"roundtrip_p{proto}.pkl").write_bytes(pickle.dumps(obj, proto))
    dump_json(d / "roundtrip.expected.json", canon(obj))

    arrays = {
        "f8": np.array([[0.5, -1.25, 3e8], [1e-8, 2.0, 0.125]]),
        "f4": np.array([0.1, 1.0, -2.5], dtype="<f4"),
        "i4": np.array([[1, -2], [3, 4]], dtype="<i4"),
        "i8": np.array([2**40, -17], dtype="<i8"),
        "u2": np.array([0, 65535], dtype="<u2"),
        "b1": np.array([True, False, True]),
        "be_i4": np.array([100, -7], dtype=">i4"),
        "fortran": np.asfortranarray([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]),
        "scalar": np.float64(0.25),
    }
    (d / "ndarray_p2.pkl").write_bytes(pickle.dumps(arrays, 2))
    dump_json(d / "ndarray.expected.json", canon(arrays))

    # row 1 carries an unsorted duplicate column pair (2, 2)
    m = sp.csr_matrix(
        (
            np.array([1.0, 2.0, 3.0, 4.0, 5.0]),
            np.array([1, 2, 2, 0, 1], dtype="<i4"),
            np.array([0, 1, 3, 5], dtype="<i4"),
        ),
        shape=(3, 4),
    )
    (d / "csr_p0.pkl").write_bytes(craft_csr(m))
    (d / "csr_p2.pkl").write_bytes(pickle.dumps(m, 2))
    dump_json(d / "csr.expected.json", canon(m))

    g = defaultdict(list)
    g[0] = [1, 2]
    g[1] = [0]
    g[2] = [0, 2]
    g[5] = [3]
    (d / "graph_p0.pkl").write_bytes(craft_graph(g))
    (d / "graph_p2.pkl").write_bytes(pickle.dumps(g, 2))
    dump_json(d / "graph.expected.json", canon(dict(g)))

    # py2 S-string escape coverage: control bytes, quotes, backslash, latin1
    raw = bytes([0, 1, 9, 10, 13, 39, 34, 92, 65, 200, 255])
    p = P0()
    p.mark()
    p.raw(b"l")
    p.put()
    p.string(raw)
    p.append()
    p.string(b"plain text")
    p.append()
    p.stop()
    data = p.bytes_value()
    loaded = pickle.loads(data, encoding="latin1")
    assert loaded == [raw.decode("latin1"), "plain text"]
    (d / "py2str_p0.pkl").write_bytes(data)
    dump_json(d / "py2str.expected.json", canon(loaded))


# ---------------------------------------------------------------------------
# unit fixtures: npy / npz


def write_npz(path, members, compress=False, allow_object=False):
    method = zipfile.ZIP_DEFLATED if compress else zipfile.ZIP_STORED
    with zipfile.ZipFile(path, "w", method) as z:
        for name, arr in members.items():
            bio = io.BytesIO()
            np.lib.format.write_array(bio, arr, allow_pickle=allow_object)
            zi = zipfile.ZipInfo(name + ".npy", date_time=(1980, 1, 1, 0, 0, 0))
            zi.compress_type = method
            z.writestr(zi, bio.getvalue())


def make_npy_fixtures():
    d = ROOT / "npy"
    d.mkdir(parents=True, exist_ok=True)

    singles = {
        "f8_2d": np.array([[0.5, 1.5], [-2.25, 3e-4]]),
        "f4_fortran": np.asfortranarray(np.array([[1, 2, 3], [4, 5, 6]], dtype="<f4")),
        "i8": np.array([1, -(2**40), 7], dtype="<i8"),
        "be_i4": np.array([[5, -6]], dtype=">i4"),
        "b1": np.array([True, False, False, True]),
        "u2": np.array([0, 9, 65535], dtype="<u2"),
    }
    expected = {}
    for name, arr in singles.items():
        with open(d / f"{name}.npy", "wb") as f:
            np.lib.format.write_array(f, arr)
        expected[name] = {"shape": list(arr.shape), "values": flat(arr)}

    v2 = np.array([0.25, -4.0, 1e10])
    with open(d / "v2_header.npy", "wb") as f:
        np.lib.format.write_array(f, v2, version=(2, 0))
    expected["v2_header"] = {"shape": list(v2.shape), "values": flat(v2)}

    members = {
        "adj_data": np.array([1.0, 1.0, 2.0]),
        "labels": np.array([0, 1, 1], dtype="<i8"),
    }
    write_npz(d / "stored.npz", members, compress=False)
    write_npz(d / "deflated.npz", members, compress=True)
    expected["npz_members"] = {
        k: {"shape": list(a.shape), "values": flat(a)} for k, a in members.items()
    }

    write_npz(
        d / "object_member.npz",
        {
            "good": np.arange(3, dtype="<i8"),
            "weird": np.array([{"a": 1}], dtype=object),
        },
        allow_object=True,
    )
    expected["object_member_kept"] = ["good"]

    dump_json(d / "expected.json", expected)


# ---------------------------------------------------------------------------
# float repr table


def make_float_table():
    picked = [
        0.0, -0.0, 1.0, -1.0, 1.5, 0.1, 0.2, 0.3, 0.7,
        1.0 / 3.0, 2.0 / 3.0, 0.30000000000000004,
        1e-4, 9.999999999999999e-05, 1e-05, 7e-05,
        1e15, 1e16, 12345678901234567.0, 9999999999999998.0,
        9007199254740992.0, 9007199254740994.0,
        1e21, 1e22, 1e100, 1.7e-100,
        5e-324, 1.5e-323, 1e-310, 2.2250738585072014e-308,
        1.7976931348623157e308, 3.141592653589793, 2.718281828459045,
        6.02214076e23, 1.602176634e-19, 255.0, 256.0, 1024.5, -1024.5,
        123456789.12345679, 123456.78901234567,
        float("inf"), float("-inf"), float("nan"),
    ]
    rng = random.Random(0x20260816)
    vals = list(picked)
    while len(vals) < len(picked) + 150:
        bits = rng.getrandbits(64)
        x = struct.unpack(">Q", struct.pack(">Q", bits))[0]
        x = struct.unpack(">d", struct.pack(">Q", bits))[0]
        if math.isfinite(x):
            vals.append(x)
    for _ in range(150):
        x = 10.0 ** rng.uniform(-307.0, 308.0)
        if rng.random() < 0.5:
            x = -x
        vals.append(x * rng.uniform(1.0, 9.999999))
    for _ in range(100):
        vals.append(rng.random())
    for _ in range(50):
        vals.append(float(rng.getrandbits(rng.randrange(1, 60))))
    table = [[struct.pack(">d", x).hex(), repr(x)] for x in vals]
    dump_json(ROOT / "floats.json", table)


# ---------------------------------------------------------------------------
# reference archive assembly (the upstream recipe, gap handling generalized)


def assemble_reference(x, y, tx, ty, allx, ally, graph, test_idx):
    sorted_idx = sorted(test_idx)
    base = sorted_idx[0]
    ext = sorted_idx[-1] - base + 1
    n = allx.shape[0] + ext

    tx_ext = sp.lil_matrix((ext, allx.shape[1]), dtype=np.float64)
    tx_ext[[i - base for i in sorted_idx], :] = tx.astype(np.float64)
    ty_ext = np.zeros((ext, ally.shape[1]), dtype=np.int64)
    ty_ext[[i - base for i in sorted_idx], :] = ty

    feats = sp.vstack([sp.csr_matrix(allx, dtype=np.float64).tolil(), tx_ext]).tolil()
    feats[list(test_idx), :] = feats[sorted_idx, :]
    onehot = np.vstack([np.asarray(ally, dtype=np.int64), ty_ext])
    onehot[list(test_idx), :] = onehot[sorted_idx, :]
    labels = onehot.argmax(axis=1)

    listed = 0
    self_listed = 0
    pairs = set()
    for k, nbrs in graph.items():
        for v in nbrs:
            listed += 1
            if k == v:
                self_listed += 1
            else:
                pairs.add((min(k, v), max(k, v)))
    links = (listed - self_listed) // 2 + self_listed
    edges = np.array(sorted(pairs), dtype=np.int64)

    feats = feats.tocsr()
    feats.eliminate_zeros()
    return {
        "n": n,
        "d": allx.shape[1],
        "c": ally.shape[1],
        "features": feats,
        "labels": labels,
        "edges": edges,
        "counts": {"listed": listed, "links": links, "unique": len(pairs)},
    }


def rows_from_csr(m):
    out = []
    for i in range(m.shape[0]):
        lo, hi = m.indptr[i], m.indptr[i + 1]
        row = [[int(j), float(v)] for j, v in zip(m.indices[lo:hi], m.data[lo:hi]) if v != 0]
        row.sort()
        out.append(row)
    return out


def write_reference_bundle(asm, out_dir, name):
    out_dir.mkdir(parents=True, exist_ok=True)
    g = fl.Graph.from_parts(asm["n"], asm["edges"], asm["features"], asm["labels"], asm["c"])
    fl.save_bundle(g, str(out_dir), name)
    fl.load_bundle(str(out_dir))  # the oracle must accept its own output


def expected_blob(asm):
    return {
        "nodes": asm["n"],
        "features": asm["d"],
        "classes": asm["c"],
        "edge_counts": asm["counts"],
        "edges": [[int(u), int(v)] for u, v in asm["edges"]],
        "labels": [int(v) for v in asm["labels"]],
        "feature_rows": rows_from_csr(asm["features"]),
    }


def sparse_from_rows(rows, width, dtype="<f4"):
    m = sp.lil_matrix((len(rows), width), dtype=dtype)
    for i, row in enumerate(rows):
        for j, v in row.items():
            m[i, j] = v
    return m.tocsr()


def make_tiny():
    d = ROOT / "tiny"
    raw = d / "raw"
    raw.mkdir(parents=True, exist_ok=True)

    width = 5
    # row 2 is empty; row 4 carries an explicitly stored zero at column 3,
    # which the converter must drop from its output
    allx = sp.csr_matrix(
        (
            np.array(
                [1.0, 0.5, 2.0, 0.1, 1e-8, 3.0, 4.0, 5.0, 0.0, 0.25, 6.5, 0.75, 1.5],
                dtype="<f4",
            ),
            np.array([1, 3, 0, 2, 4, 0, 1, 2, 3, 4, 1, 0, 4], dtype="<i4"),
            np.array([0, 2, 3, 3, 5, 9, 10, 11, 13], dtype="<i4"),
        ),
        shape=(8, width),
    )
    assert allx.nnz == 13 and allx[4, 3] == 0.0
    tx_rows = [
        {0: 10.0, 2: 0.5},
        {1: 11.0},
        {3: 12.25},
        {2: 13.5, 4: np.float32(0.2)},
    ]
    tx = sparse_from_rows(tx_rows, width)
    x = allx[:3].copy()

    ally_classes = [0, 1, 2, 0, 1, 2, 0, 1]
    ty_classes = [2, 0, 1, 2]
    ally = np.zeros((8, 3), dtype="<i4")
    ally[np.arange(8), ally_classes] = 1
    ty = np.zeros((4, 3), dtype="<i4")
    ty[np.arange(4), ty_classes] = 1
    y = ally[:3].copy()

    graph = defaultdict(list)
    for k, nbrs in {
        0: [1, 2, 1],
        1: [0, 2],
        2: [0, 1, 3],
        3: [2, 4, 3],
        4: [3, 5],
        5: [4, 6],
        6: [5, 7],
        7: [6],
        8: [10],
        10: [8],
        9: [11],
        11: [9],
    }.items():
        graph[k] = nbrs
    test_idx = [10, 8, 11, 9]

    (raw / "ind.cora.x").write_bytes(craft_csr(x))
    (raw / "ind.cora.y").write_bytes(pickle.dumps(y, 0))
    (raw / "ind.cora.tx").write_bytes(pickle.dumps(tx, 1))
    (raw / "ind.cora.ty").write_bytes(pickle.dumps(ty, 2))
    (raw / "ind.cora.allx").write_bytes(pickle.dumps(allx, 2))
    (raw / "ind.cora.ally").write_bytes(craft_ndarray(ally))
    (raw / "ind.cora.graph").write_bytes(craft_graph(graph))
    (raw / "ind.cora.test.index").write_bytes(
        "".join(f"{i}\n" for i in test_idx).encode("ascii")
    )

    asm = assemble_reference(x, y, tx, ty, allx, ally, graph, test_idx)
    assert asm["n"] == 12 and asm["counts"] == {"listed": 22, "links": 11, "unique": 10}
    assert [int(v) for v in asm["labels"]] == [0, 1, 2, 0, 1, 2, 0, 1, 0, 2, 2, 1]
    write_reference_bundle(asm, d / "bundle", "cora")
    dump_json(d / "expected.json", expected_blob(asm))
    dump_json(
        d / "expected-stats.json",
        {"nodes": 12, "edges": 11, "features": 5, "classes": 3},
    )
    return raw


def make_tinygap():
    d = ROOT / "tinygap"
    raw = d / "raw"
    raw.mkdir(parents=True, exist_ok=True)

    width = 4
    f4 = np.float32
    allx_rows = [
        {0: 1.0},
        {1: 1.5},
        {2: 2.0},
        {3: 2.5},
        {0: 3.0},
        {},
        {2: 4.0},
        {3: 4.5},
    ]
    tx_rows = [
        {0: 21.0},
        {1: 22.5},
        {2: f4(0.3)},
        {3: 24.0},
    ]
    allx = sparse_from_rows(allx_rows, width)
    tx = sparse_from_rows(tx_rows, width)
    x = allx[:4].copy()

    ally_classes = [1, 0, 2, 1, 0, 2, 1, 0]
    ty_classes = [0, 2, 1, 1]
    ally = np.zeros((8, 3), dtype="<i4")
    ally[np.arange(8), ally_classes] = 1
    ty = np.zeros((4, 3), dtype="<i4")
    ty[np.arange(4), ty_classes] = 1
    y = ally[:4].copy()

    graph = defaultdict(list)
    for k, nbrs in {
        0: [1, 11],
        1: [0, 2],
        2: [1, 3],
        3: [2, 4],
        4: [3, 10],
        10: [4],
        5: [6],
        6: [5, 7],
        7: [6, 8],
        8: [7, 9],
        9: [8, 12],
        12: [9, 11],
        11: [12, 0],
    }.items():
        graph[k] = nbrs
    test_idx = [9, 12, 8, 11]  # node 10 is the gap: zero features, class 0

    for part, data in {
        "x": pickle.dumps(x, 1),
        "y": pickle.dumps(y, 1),
        "tx": pickle.dumps(tx, 1),
        "ty": pickle.dumps(ty, 1),
        "allx": pickle.dumps(allx, 1),
        "ally": pickle.dumps(ally, 1),
        "graph": pickle.dumps(graph, 1),
    }.items():
        (raw / f"ind.citeseer.{part}").write_bytes(data)
    (raw / "ind.citeseer.test.index").write_bytes(
        "".join(f"{i}\n" for i in test_idx).encode("ascii")
    )

    asm = assemble_reference(x, y, tx, ty, allx, ally, graph, test_idx)
    assert asm["n"] == 13 and asm["counts"] == {"listed": 24, "links": 12, "unique": 12}
    assert [int(v) for v in asm["labels"]] == [1, 0, 2, 1, 0, 2, 1, 0, 1, 0, 0, 1, 2]
    assert asm["features"][10].nnz == 0
    write_reference_bundle(asm, d / "bundle", "citeseer")
    dump_json(d / "expected.json", expected_blob(asm))


def make_tinybad(tiny_raw):
    d = ROOT / "tinybad" / "raw"
    d.mkdir(parents=True, exist_ok=True)
    for part in ("x", "y", "ty", "allx", "ally", "graph", "test.index"):
        (d / f"ind.cora.{part}").write_bytes((tiny_raw / f"ind.cora.{part}").read_bytes())
    bad_tx = sparse_from_rows([{0: 1.0}, {1: 2.0}, {2: 3.0}, {3: 4.0}], 4)
    (d / "ind.cora.tx").write_bytes(pickle.dumps(bad_tx, 2))


def make_tinyfull():
    d = ROOT / "tinyfull"
    d.mkdir(parents=True, exist_ok=True)

    n, width = 10, 4
    labels = np.array([0, 1, 0, 2, 1, 0, 3, 2, 1, 0], dtype="<i8")
    # stored single-direction with quirks: a reversed duplicate, a self loop,
    # an explicitly stored zero entry, one weighted link
    adj_entries = [
        (0, 1, 1.0),
        (1, 0, 1.0),
        (2, 3, 1.0),
        (3, 3, 1.0),
        (4, 5, 2.0),
        (5, 6, 1.0),
        (0, 9, 0.0),
        (7, 8, 1.0),
        (2, 8, 1.0),
        (9, 0, 1.0),
    ]
    rows = np.array([e[0] for e in adj_entries])
    cols = np.array([e[1] for e in adj_entries])
    vals = np.array([e[2] for e in adj_entries])
    adj = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    assert adj.nnz == 10  # the zero entry stays stored

    # row 2 empty; row 4 has an explicitly stored zero at column 3
    attr = sp.csr_matrix(
        (
            np.array(
                [0.5, 1.25, 0.7, 2.0, 3.0, 0.0, 0.125, 5.0, 6.5, 1e-4, 8.0],
                dtype="<f4",
            ),
            np.array([0, 1, 3, 0, 2, 3, 1, 2, 3, 0, 1], dtype="<i4"),
            np.array([0, 1, 2, 2, 3, 6, 7, 8, 9, 10, 11], dtype="<i4"),
        ),
        shape=(n, width),
    )
    assert attr[4, 3] == 0.0 and attr.nnz == 11

    members = {
        "adj_data": adj.data,
        "adj_indices": adj.indices.astype("<i4"),
        "adj_indptr": adj.indptr.astype("<i4"),
        "adj_shape": np.array(adj.shape, dtype="<i8"),
        "attr_data": attr.data.astype("<f4"),
        "attr_indices": attr.indices.astype("<i4"),
        "attr_indptr": attr.indptr.astype("<i4"),
        "attr_shape": np.array(attr.shape, dtype="<i8"),
        "labels": labels,
    }
    (d / "raw").mkdir(exist_ok=True)
    (d / "raw-compressed").mkdir(exist_ok=True)
    write_npz(d / "raw" / "cora_full.npz", members, compress=False)
    write_npz(d / "raw-compressed" / "cora_full.npz", members, compress=True)

    neg = dict(members)
    neg["attr_data"] = members["attr_data"].copy()
    neg["attr_data"][0] = -0.5
    (d / "raw-negative").mkdir(exist_ok=True)
    write_npz(d / "raw-negative" / "cora_full.npz", neg, compress=False)

    def assemble_npz(keep_min):
        keep_classes = None
        lab = labels
        if keep_min:
            counts = np.bincount(labels)
            keep_classes = sorted(int(c) for c in np.nonzero(counts >= keep_min)[0])
            remap = {c: i for i, c in enumerate(keep_classes)}
            keep_nodes = [i for i in range(n) if int(labels[i]) in remap]
            lab = np.array([remap[int(labels[i])] for i in keep_nodes], dtype="<i8")
        else:
            keep_nodes = list(range(n))
        old_to_new = {o: i for i, o in enumerate(keep_nodes)}

        listed = 0
        pairs = set()
        a = adj.tocoo()
        for u, v, w in zip(a.row, a.col, a.data):
            if w == 0:
                continue
            if int(u) not in old_to_new or int(v) not in old_to_new:
                continue
            listed += 1
            uu, vv = old_to_new[int(u)], old_to_new[int(v)]
            if uu != vv:
                pairs.add((min(uu, vv), max(uu, vv)))
        edges = np.array(sorted(pairs), dtype=np.int64)

        feats = attr[keep_nodes].astype(np.float64).tocsr()
        feats.eliminate_zeros()
        c = int(lab.max()) + 1
        return {
            "n": len(keep_nodes),
            "d": width,
            "c": c,
            "features": feats,
            "labels": lab,
            "edges": edges,
            "counts": {"listed": listed, "links": listed, "unique": len(pairs)},
        }

    nofilter = assemble_npz(None)
    assert nofilter["counts"] == {"listed": 9, "links": 9, "unique": 7}
    assert nofilter["c"] == 4
    write_reference_bundle(nofilter, d / "bundle", "cora-full")

    min2 = assemble_npz(2)
    assert min2["n"] == 9 and min2["c"] == 3
    assert min2["counts"] == {"listed": 8, "links": 8, "unique": 6}
    assert [int(v) for v in min2["labels"]] == [0, 1, 0, 2, 1, 0, 2, 1, 0]
    write_reference_bundle(min2, d / "bundle-min2", "cora-full")

    dump_json(
        d / "expected.json",
        {"nofilter": expected_blob(nofilter), "min2": expected_blob(min2)},
    )


def main():
    make_pickle_fixtures()
    make_npy_fixtures()
    make_float_table()
    tiny_raw = make_tiny()
    make_tinygap()
    make_tinybad(tiny_raw)
    make_tinyfull()
    print("fixtures written under", ROOT)


if __name__ == "__main__":
    main()

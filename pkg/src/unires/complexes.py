"""The universal-ring resolution complex: modules, differential, ideal,
strands, and the finite subcomplex with the same homology.

Summands come in two species.  A *mixed* summand ``(a, c, d)`` is the
tensor product of a divided power on E, a divided power on the dual of G,
an exterior power of the E (x) G* pair space, and an exterior power of the
dual of F in degree ``b = a - c + e``; it sits in homological position
``a + c + d + 1``.  A *koszul* summand ``d`` is the plain exterior power of
the pair space in position ``d``.

The differential has six components on a mixed summand (two divided-power
contractions against the matrices, the pair-space Koszul action of the
composite map, a both-sides comultiplication into the pair space, and two
boundary components into the koszul summands carrying minors and the extra
scalar) plus the Koszul action on the koszul summands.  Each component is
emitted as *structural terms* -- (row, col, sign, coefficient table, table
index) -- so one construction pass serves both the symbolic matrices over
the generic polynomial ring and fast seeded specializations over a prime
field.
"""

from __future__ import annotations

import itertools
from array import array
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from unires import multilinear as ml
from unires.genring import (
    GenericData,
    Parameters,
    Poly,
    SpecializedData,
    bidegree,
)
from unires.linalg import (
    GF,
    NonUnitInvariantFactor,
    SparseMatrix,
    ZZ,
    image_summand_split,
    smith_normal_form,
)


# ---------------------------------------------------------------------------
# summands


@dataclass(frozen=True)
class MixedSummand:
    a: int
    c: int
    d: int

    @property
    def kind(self):
        return "mixed"

    def position(self):
        return self.a + self.c + self.d + 1

    def label(self):
        return "A(%d,%d,%d)" % (self.a, self.c, self.d)


@dataclass(frozen=True)
class KoszulSummand:
    d: int

    @property
    def kind(self):
        return "koszul"

    def position(self):
        return self.d

    def label(self):
        return "B(%d)" % self.d


def summand_valid(params, s):
    e, g, f = params.e, params.g, params.f
    if isinstance(s, KoszulSummand):
        return 0 <= s.d <= e * g
    b = s.a - s.c + e
    return s.a >= 0 and s.c >= 0 and 0 <= s.d <= e * g and 0 <= b <= f


def summand_rank(params, s):
    e, g, f = params.e, params.g, params.f
    if isinstance(s, KoszulSummand):
        return comb(e * g, s.d)
    b = s.a - s.c + e
    return (
        ml.divided_rank(e, s.a)
        * ml.divided_rank(g, s.c)
        * comb(e * g, s.d)
        * comb(f, b)
    )


def summand_twist(params, s):
    if isinstance(s, KoszulSummand):
        return (-s.d, -s.d)
    return (-(s.a + s.d), -params.g - (s.c + s.d))


def generator_degree(params, s):
    """Bidegree of the generators: the negated twist."""
    t = summand_twist(params, s)
    return (-t[0], -t[1])


def strand_of(params, s):
    """Strand coordinates (P, Q) of a summand."""
    if isinstance(s, KoszulSummand):
        return (s.d, s.d - params.g)
    return (s.a + s.d, s.c + s.d)


# ---------------------------------------------------------------------------
# enumerated bases


@dataclass
class Block:
    summand: object
    start: int
    count: int
    twist: tuple


class FreeModuleBasis:
    """Ordered basis of one graded free module, grouped by summand."""

    def __init__(self, params, blocks):
        self.params = params
        self.blocks = blocks
        self.total = sum(b.count for b in blocks)

    def summands(self):
        return [b.summand for b in self.blocks]

    def block_for(self, summand):
        for b in self.blocks:
            if b.summand == summand:
                return b
        raise KeyError(summand)

    def locate(self, idx):
        """Map a flat index to (summand, generator tuple)."""
        for b in self.blocks:
            if b.start <= idx < b.start + b.count:
                return (b.summand, _generator_at(self.params, b.summand, idx - b.start))
        raise IndexError(idx)

    def describe(self, idx):
        s, gen = self.locate(idx)
        return "%s %s" % (s.label(), (gen,))


@lru_cache(maxsize=None)
def _mixed_tables(params, a, c, d):
    e, g, f = params.e, params.g, params.f
    b = a - c + e
    U = ml.divided_basis(e, a)
    W = ml.divided_basis(g, c)
    Z = ml.exterior_basis(e * g, d)
    T = ml.exterior_basis(f, b)
    return (
        U,
        W,
        Z,
        T,
        {u: i for i, u in enumerate(U)},
        {w: i for i, w in enumerate(W)},
        {z: i for i, z in enumerate(Z)},
        {t: i for i, t in enumerate(T)},
    )


@lru_cache(maxsize=None)
def _koszul_table(params, d):
    Z = ml.exterior_basis(params.e * params.g, d)
    return (Z, {z: i for i, z in enumerate(Z)})


def _generator_at(params, s, local):
    if isinstance(s, KoszulSummand):
        Z, _ = _koszul_table(params, s.d)
        return (Z[local],)
    U, W, Z, T, *_ = _mixed_tables(params, s.a, s.c, s.d)
    nW, nZ, nT = len(W), len(Z), len(T)
    t = local % nT
    z = (local // nT) % nZ
    w = (local // (nT * nZ)) % nW
    u = local // (nT * nZ * nW)
    return (U[u], W[w], Z[z], T[t])


def _mixed_local_index(params, s, u, w, z, t):
    U, W, Z, T, uI, wI, zI, tI = _mixed_tables(params, s.a, s.c, s.d)
    return ((uI[u] * len(W) + wI[w]) * len(Z) + zI[z]) * len(T) + tI[t]


@lru_cache(maxsize=None)
def resolution_module(params, i):
    """The position-``i`` module of the resolution complex, as a basis."""
    blocks = []
    offset = 0
    mixed = []
    for a in range(i):
        for c in range(i - a):
            d = i - 1 - a - c
            s = MixedSummand(a, c, d)
            if summand_valid(params, s) and summand_rank(params, s) > 0:
                mixed.append(s)
    mixed.sort(key=lambda s: (s.a, s.c, s.d))
    for s in mixed:
        n = summand_rank(params, s)
        blocks.append(Block(s, offset, n, summand_twist(params, s)))
        offset += n
    bs = KoszulSummand(i)
    if summand_valid(params, bs) and summand_rank(params, bs) > 0:
        blocks.append(Block(bs, offset, summand_rank(params, bs), summand_twist(params, bs)))
        offset += summand_rank(params, bs)
    return FreeModuleBasis(params, blocks)


# ---------------------------------------------------------------------------
# structural differential terms
#
# coefficient tables:
#   0: the constant 1
#   1: entry (j, k) of the tall matrix          aux = j * e + k
#   2: entry (i, j) of the wide matrix          aux = i * f + j
#   3: entry (i, k) of the composite map        aux = i * e + k
#   4: minor of the wide matrix                 aux = registry id
#   5: scalar variable times minor of the tall  aux = registry id

T_ONE, T_V, T_X, T_XV, T_XMINOR, T_BVMINOR = range(6)


class StructuralMatrix:
    """Triplet structure of one differential, independent of the data."""

    __slots__ = ("rows", "cols", "row_idx", "col_idx", "sign", "table", "aux", "registry")

    def __init__(self, rows, cols):
        self.rows = rows
        self.cols = cols
        self.row_idx = array("l")
        self.col_idx = array("l")
        self.sign = array("b")
        self.table = array("b")
        self.aux = array("l")
        self.registry = []

    def emit(self, r, c, sign, table, aux):
        self.row_idx.append(r)
        self.col_idx.append(c)
        self.sign.append(sign)
        self.table.append(table)
        self.aux.append(aux)

    def register(self, key):
        self.registry.append(key)
        return len(self.registry) - 1

    def __len__(self):
        return len(self.row_idx)


def _expand_mixed_column(params, struct, s, col, gen, target_basis, minor_ids, strand_only=False):
    """Emit all differential terms for one generator of a mixed summand."""
    e, g, f = params.e, params.g, params.f
    a, c, d = s.a, s.c, s.d
    b = a - c + e
    U, W, Z, T = gen
    sgn_ac = (-1) ** (a + c)
    blocks = {blk.summand: blk for blk in target_basis.blocks}

    if not strand_only:
        # divided contraction on the E side against the tall matrix
        tgt = MixedSummand(a - 1, c, d)
        blk = blocks.get(tgt)
        if blk is not None:
            for lowered, k, _ in ml.divided_comult(U) if a >= 1 else []:
                for j in T:
                    hit = ml.contract_module((j,), T)
                    if hit is None:
                        continue
                    sgn, rest = hit
                    r = blk.start + _mixed_local_index(params, tgt, lowered, W, Z, rest)
                    struct.emit(r, col, sgn, T_V, j * e + k)

        # divided contraction on the G* side, wedged into the F* factor
        tgt = MixedSummand(a, c - 1, d)
        blk = blocks.get(tgt)
        if blk is not None:
            for lowered, i, _ in ml.divided_comult(W) if c >= 1 else []:
                for j in range(f):
                    hit = ml.wedge((j,), T)
                    if hit is None:
                        continue
                    sgn, merged = hit
                    r = blk.start + _mixed_local_index(params, tgt, U, lowered, Z, merged)
                    struct.emit(r, col, -sgn, T_X, i * f + j)

        # Koszul action of the composite map on the pair space
        tgt = MixedSummand(a, c, d - 1)
        blk = blocks.get(tgt)
        if blk is not None:
            for pos, idx in enumerate(Z):
                k0, i0 = ml.pair_unindex(idx, g)
                rest = Z[:pos] + Z[pos + 1 :]
                r = blk.start + _mixed_local_index(params, tgt, U, W, rest, T)
                struct.emit(r, col, sgn_ac * (-1) ** pos, T_XV, i0 * e + k0)

    # both-sided comultiplication into the pair space (stays in the strand)
    tgt = MixedSummand(a - 1, c - 1, d + 1)
    blk = blocks.get(tgt)
    if blk is not None:
        u_moves = ml.divided_comult(U) if a >= 1 else []
        w_moves = ml.divided_comult(W) if c >= 1 else []
        for u_low, k, _ in u_moves:
            for w_low, i, _ in w_moves:
                pidx = ml.pair_index(k, i, g)
                hit = ml.wedge((pidx,), Z)
                if hit is None:
                    continue
                sgn, merged = hit
                r = blk.start + _mixed_local_index(params, tgt, u_low, w_low, merged, T)
                struct.emit(r, col, sgn_ac * sgn, T_ONE, 0)

    # boundary component into the koszul summand, active when c = 0
    if c == 0 and (not strand_only or a == g):
        tgt = KoszulSummand(a + d)
        blk = blocks.get(tgt)
        if blk is not None:
            _, zI = _koszul_table(params, a + d)
            sign5 = (-1) ** (a + d)
            hit = ml.contract_dual(T, tuple(range(f)))
            if hit is not None:
                s_d, f_rest = hit
                for gset in itertools.combinations(range(g), f - b):
                    hit2 = ml.contract_module(gset, tuple(range(g)))
                    if hit2 is None:
                        continue
                    s_i, g_rest = hit2
                    key = ("x", gset, f_rest)
                    mid = minor_ids.get(key)
                    if mid is None:
                        mid = minor_ids[key] = struct.register(key)
                    for s_b, pairs in ml.bowtie_divided_exterior(U, g_rest, g):
                        w_hit = ml.wedge(pairs, Z)
                        if w_hit is None:
                            continue
                        s_w, merged = w_hit
                        r = blk.start + zI[merged]
                        struct.emit(r, col, sign5 * s_d * s_i * s_b * s_w, T_XMINOR, mid)

    # boundary component into the koszul summand, active when a = 0
    if a == 0 and not strand_only:
        tgt = KoszulSummand(c + d)
        blk = blocks.get(tgt)
        if blk is not None:
            _, zI = _koszul_table(params, c + d)
            sign6 = (-1) ** d
            for kset in itertools.combinations(range(e), b):
                hit = ml.contract_dual(kset, tuple(range(e)))
                if hit is None:
                    continue
                s_k, e_rest = hit
                key = ("bv", T, kset)
                mid = minor_ids.get(key)
                if mid is None:
                    mid = minor_ids[key] = struct.register(key)
                for s_b, pairs in ml.bowtie_exterior_divided(e_rest, W, g):
                    w_hit = ml.wedge(pairs, Z)
                    if w_hit is None:
                        continue
                    s_w, merged = w_hit
                    r = blk.start + zI[merged]
                    struct.emit(r, col, sign6 * s_k * s_b * s_w, T_BVMINOR, mid)


def _expand_koszul_column(params, struct, s, col, gen, target_basis):
    e, g = params.e, params.g
    (Z,) = gen
    tgt = KoszulSummand(s.d - 1)
    blocks = {blk.summand: blk for blk in target_basis.blocks}
    blk = blocks.get(tgt)
    if blk is None:
        return
    _, zI = _koszul_table(params, s.d - 1)
    for pos, idx in enumerate(Z):
        k0, i0 = ml.pair_unindex(idx, g)
        rest = Z[:pos] + Z[pos + 1 :]
        struct.emit(blk.start + zI[rest], col, (-1) ** pos, T_XV, i0 * e + k0)


_STRUCT_CACHE = {}


def differential_structure(params, i):
    """Structural terms of the differential from position ``i`` to ``i-1``."""
    key = (params, i)
    cached = _STRUCT_CACHE.get(key)
    if cached is not None:
        return cached
    source = resolution_module(params, i)
    target = resolution_module(params, i - 1)
    struct = StructuralMatrix(target.total, source.total)
    minor_ids = {}
    for blk in source.blocks:
        s = blk.summand
        for local in range(blk.count):
            gen = _generator_at(params, s, local)
            col = blk.start + local
            if isinstance(s, MixedSummand):
                _expand_mixed_column(params, struct, s, col, gen, target, minor_ids)
            else:
                _expand_koszul_column(params, struct, s, col, gen, target)
    _STRUCT_CACHE[key] = struct
    return struct


def clear_caches():
    _STRUCT_CACHE.clear()
    _mixed_tables.cache_clear()
    _koszul_table.cache_clear()
    resolution_module.cache_clear()


# ---------------------------------------------------------------------------
# evaluation of structural terms


class PolyMatrix:
    """Sparse matrix with generic-polynomial entries."""

    def __init__(self, rows, cols, entries):
        self.rows = rows
        self.cols = cols
        self.entries = {rc: v for rc, v in entries.items() if not v.is_zero()}

    @property
    def nnz(self):
        return len(self.entries)

    def is_zero(self):
        return not self.entries

    def matmul(self, other):
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        by_row = {}
        for (r, c), v in other.entries.items():
            by_row.setdefault(r, []).append((c, v))
        acc = {}
        for (r, k), v in self.entries.items():
            for c, w in by_row.get(k, ()):
                prod = v * w
                if (r, c) in acc:
                    acc[(r, c)] = acc[(r, c)] + prod
                else:
                    acc[(r, c)] = prod
        return PolyMatrix(self.rows, other.cols, acc)

    def specialize(self, data: SpecializedData):
        out = {}
        for rc, v in self.entries.items():
            w = v.evaluate(data.values, data.p)
            if w:
                out[rc] = w
        return SparseMatrix(self.rows, self.cols, out, GF(data.p))


def _symbolic_tables(params, data: GenericData, struct):
    minors = []
    for key in struct.registry:
        if key[0] == "x":
            val = ml.minor_det(data.X, key[1], key[2])
            if isinstance(val, int):
                val = Poly.const(val)
            minors.append(val)
        else:
            minors.append(data.b * ml.minor_det(data.V, key[1], key[2]))
    return minors


def evaluate_symbolic(params, data: GenericData, struct) -> PolyMatrix:
    e, f = params.e, params.f
    minors = _symbolic_tables(params, data, struct)
    acc = {}
    one = Poly.const(1)
    for n in range(len(struct)):
        t = struct.table[n]
        aux = struct.aux[n]
        if t == T_ONE:
            val = one
        elif t == T_V:
            val = data.V[aux // e][aux % e]
        elif t == T_X:
            val = data.X[aux // f][aux % f]
        elif t == T_XV:
            val = data.xv[aux // e][aux % e]
        elif t == T_XMINOR:
            val = minors[aux]
        else:
            val = minors[aux]
        if struct.sign[n] < 0:
            val = -val
        rc = (struct.row_idx[n], struct.col_idx[n])
        acc[rc] = acc[rc] + val if rc in acc else val
    return PolyMatrix(struct.rows, struct.cols, acc)


def _numeric_tables(params, data: SpecializedData, struct):
    p = data.p
    vals = []
    for key in struct.registry:
        if key[0] == "x":
            vals.append(ml.minor_det(data.X, key[1], key[2]) % p)
        else:
            vals.append(data.b * ml.minor_det(data.V, key[1], key[2]) % p)
    tables = [
        np.array([1], dtype=np.int64),
        np.array([v for row in data.V for v in row], dtype=np.int64),
        np.array([v for row in data.X for v in row], dtype=np.int64),
        np.array([v for row in data.xv for v in row], dtype=np.int64),
        np.array(vals or [0], dtype=np.int64),
        np.array(vals or [0], dtype=np.int64),
    ]
    return tables


def evaluate_specialized_triplets(params, data: SpecializedData, struct):
    """Numeric triplets (rows, cols, values mod p) of one differential.

    Duplicate (row, col) pairs may appear; they are to be summed (scipy's
    COO conversion and the elimination kernels both do).
    """
    tables = _numeric_tables(params, data, struct)
    n = len(struct)
    if n == 0:
        return (
            np.zeros(0, dtype=np.int64),
            np.zeros(0, dtype=np.int64),
            np.zeros(0, dtype=np.int64),
        )
    tab = np.frombuffer(struct.table, dtype=np.int8)
    aux = np.frombuffer(struct.aux, dtype=np.int64 if struct.aux.itemsize == 8 else np.int32)
    sign = np.frombuffer(struct.sign, dtype=np.int8)
    vals = np.zeros(n, dtype=np.int64)
    for t in range(6):
        mask = tab == t
        if mask.any():
            vals[mask] = tables[t][aux[mask]]
    vals = vals * sign % data.p
    rows = np.frombuffer(struct.row_idx, dtype=np.int64 if struct.row_idx.itemsize == 8 else np.int32)
    cols = np.frombuffer(struct.col_idx, dtype=np.int64 if struct.col_idx.itemsize == 8 else np.int32)
    keep = vals != 0
    return rows[keep].astype(np.int64), cols[keep].astype(np.int64), vals[keep]


def evaluate_specialized(params, data: SpecializedData, struct) -> SparseMatrix:
    rows, cols, vals = evaluate_specialized_triplets(params, data, struct)
    p = data.p
    acc = {}
    for r, c, v in zip(rows.tolist(), cols.tolist(), vals.tolist()):
        acc[(r, c)] = (acc.get((r, c), 0) + v) % p
    return SparseMatrix(struct.rows, struct.cols, acc, GF(p))


def resolution_differential(params, data, i):
    """The differential from position ``i`` to ``i-1`` over the given data."""
    struct = differential_structure(params, i)
    if data.is_symbolic:
        return evaluate_symbolic(params, data, struct)
    return evaluate_specialized(params, data, struct)

"""Sparse exact linear algebra over Z, Q and prime fields.

Matrices are immutable triplet-backed sparse matrices tagged with a
coefficient domain.  Ranks over a prime field go through the elimination
kernels (compiled when available); ranks over Q use fraction-free integer
elimination with content stripping, so every intermediate value stays an
exact integer.  Smith normal form is classical row/column reduction with
pivot-size control, adequate for the moderate blocks it is invoked on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np

from unires import kernels


class CompositionNotZero(ValueError):
    """Two consecutive differentials do not compose to zero."""


class NonUnitInvariantFactor(ArithmeticError):
    """An asserted unimodular splitting produced a non-unit factor."""


class IntegerDomainRejected(TypeError):
    """Operation requires a field; use smith_normal_form over Z."""


# ---------------------------------------------------------------------------
# domains


def is_prime(n):
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class Domain:
    """Coefficient domain: ``integers``, ``rationals`` or ``prime-field``."""

    kind: str
    p: int | None = None

    def __post_init__(self):
        if self.kind not in ("integers", "rationals", "prime"):
            raise ValueError("unknown domain kind %r" % self.kind)
        if self.kind == "prime":
            if self.p is None or not (2 <= self.p < 2**31) or not is_prime(self.p):
                raise ValueError("prime-field modulus must be a prime < 2^31")
        elif self.p is not None:
            raise ValueError("only prime fields carry a modulus")

    @property
    def is_field(self):
        return self.kind != "integers"

    def normalize(self, value):
        if self.kind == "prime":
            return int(value) % self.p
        if self.kind == "rationals":
            return value if isinstance(value, Fraction) else Fraction(value)
        if isinstance(value, Fraction):
            if value.denominator != 1:
                raise TypeError("non-integer value in integer domain")
            return int(value)
        return int(value)

    def __str__(self):
        if self.kind == "prime":
            return "fp:%d" % self.p
        return "zz" if self.kind == "integers" else "q"


ZZ = Domain("integers")
QQ = Domain("rationals")


def GF(p):
    return Domain("prime", p)


def parse_field(spec):
    """Parse a field spec string: ``q`` or ``fp:<prime>``."""
    if spec == "q":
        return QQ
    if spec.startswith("fp:"):
        return GF(int(spec[3:]))
    raise ValueError("field spec must be 'q' or 'fp:<prime>', got %r" % spec)


# ---------------------------------------------------------------------------
# sparse matrices


class SparseMatrix:
    """Immutable sparse rectangular matrix over a coefficient domain."""

    __slots__ = ("rows", "cols", "entries", "domain")

    def __init__(self, rows, cols, entries, domain):
        if rows < 0 or cols < 0:
            raise ValueError("negative shape")
        store = {}
        for (r, c), v in (
            entries.items() if isinstance(entries, dict) else ((e[:2], e[2]) for e in entries)
        ):
            if not (0 <= r < rows and 0 <= c < cols):
                raise ValueError("entry (%d, %d) out of range" % (r, c))
            if (r, c) in store:
                raise ValueError("duplicate entry at (%d, %d)" % (r, c))
            v = domain.normalize(v)
            if v:
                store[(r, c)] = v
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", store)
        object.__setattr__(self, "domain", domain)

    def __setattr__(self, *a):
        raise AttributeError("SparseMatrix is immutable")

    @property
    def nnz(self):
        return len(self.entries)

    def __eq__(self, other):
        return (
            isinstance(other, SparseMatrix)
            and (self.rows, self.cols, self.domain) == (other.rows, other.cols, other.domain)
            and self.entries == other.entries
        )

    def is_zero(self):
        return not self.entries

    def transpose(self):
        return SparseMatrix(
            self.cols,
            self.rows,
            {(c, r): v for (r, c), v in self.entries.items()},
            self.domain,
        )

    def to_domain(self, domain):
        out = {}
        for rc, v in self.entries.items():
            w = domain.normalize(v)
            if w:
                out[rc] = w
        return SparseMatrix(self.rows, self.cols, out, domain)

    def matmul(self, other):
        """Sparse product self * other (compose self after other)."""
        if self.cols != other.rows:
            raise ValueError("shape mismatch in matmul")
        by_row = {}
        for (r, c), v in other.entries.items():
            by_row.setdefault(r, []).append((c, v))
        acc = {}
        for (r, k), v in self.entries.items():
            for c, w in by_row.get(k, ()):
                acc[(r, c)] = acc.get((r, c), 0) + v * w
        p = self.domain.p if self.domain.kind == "prime" else None
        out = {}
        for rc, v in acc.items():
            if p is not None:
                v %= p
            if v:
                out[rc] = v
        return SparseMatrix(self.rows, other.cols, out, self.domain)

    def select_columns(self, col_ids):
        remap = {c: j for j, c in enumerate(col_ids)}
        out = {}
        for (r, c), v in self.entries.items():
            if c in remap:
                out[(r, remap[c])] = v
        return SparseMatrix(self.rows, len(col_ids), out, self.domain)

    def to_numpy(self):
        a = np.zeros((self.rows, self.cols), dtype=np.int64)
        for (r, c), v in self.entries.items():
            a[r, c] = int(v)
        return a

    def __repr__(self):
        return "SparseMatrix(%dx%d, nnz=%d, %s)" % (
            self.rows,
            self.cols,
            self.nnz,
            self.domain,
        )


def zero_matrix(rows, cols, domain):
    return SparseMatrix(rows, cols, {}, domain)


def identity_matrix(n, domain):
    return SparseMatrix(n, n, {(i, i): 1 for i in range(n)}, domain)


# ---------------------------------------------------------------------------
# rank


DENSE_LIMIT = 1_000_000  # rows*cols above this goes through sparse elimination


def rank(m: SparseMatrix) -> int:
    """Exact rank over a field (rationals or a prime field)."""
    if m.domain.kind == "integers":
        raise IntegerDomainRejected("rank needs a field; use smith_normal_form")
    if not m.entries:
        return 0
    if m.domain.kind == "prime":
        p = m.domain.p
        if m.rows * m.cols <= DENSE_LIMIT:
            return kernels.rank_mod_p_dense(m.to_numpy(), p)
        rows = [rc[0] for rc in m.entries]
        cols = [rc[1] for rc in m.entries]
        vals = [int(v) for v in m.entries.values()]
        return kernels.rank_mod_p_sparse(m.rows, m.cols, rows, cols, vals, p)
    return _rank_fraction_free(m)


def _rank_fraction_free(m: SparseMatrix) -> int:
    """Rank over Q by integer elimination with content stripping.

    Rows are first scaled to integers; each update is the fraction-free
    cross-multiplication ``row2 <- piv * row2 - val * pivrow`` followed by
    division of the row by its content, so all arithmetic stays integral
    while coefficient growth stays bounded in practice.
    """
    rowdata = {}
    for (r, c), v in m.entries.items():
        rowdata.setdefault(r, {})[c] = v
    introws = {}
    for r, row in rowdata.items():
        denlcm = 1
        for v in row.values():
            f = Fraction(v)
            denlcm = denlcm * f.denominator // gcd(denlcm, f.denominator)
        introw = {c: int(v * denlcm) for c, v in row.items()}
        content = 0
        for v in introw.values():
            content = gcd(content, abs(v))
        if content > 1:
            introw = {c: v // content for c, v in introw.items()}
        introws[r] = introw
    colrows = {}
    for r, row in introws.items():
        for c in row:
            colrows.setdefault(c, set()).add(r)

    rank_ = 0
    while introws:
        by_len = sorted(introws, key=lambda r: len(introws[r]))[:8]
        best = None
        for r in by_len:
            rl = len(introws[r]) - 1
            for c, v in introws[r].items():
                score = (rl * (len(colrows[c]) - 1), abs(v))
                if best is None or score < best[0]:
                    best = (score, r, c)
        _, pr, pc = best
        prow = introws.pop(pr)
        pval = prow[pc]
        for c in prow:
            colrows[c].discard(pr)
        for r2 in list(colrows[pc]):
            row2 = introws[r2]
            v2 = row2[pc]
            new = {}
            content = 0
            for c in set(row2) | set(prow):
                w = pval * row2.get(c, 0) - v2 * prow.get(c, 0)
                if w:
                    new[c] = w
                    content = gcd(content, abs(w))
            for c in row2:
                if c not in new:
                    colrows[c].discard(r2)
            if content > 1:
                new = {c: v // content for c, v in new.items()}
            if new:
                for c in new:
                    if c not in row2:
                        colrows[c].add(r2)
                introws[r2] = new
            else:
                del introws[r2]
        del colrows[pc]
        rank_ += 1
    return rank_


def rank_of_int_matrix_over(field, rows, cols, entries):
    """Rank of an integer entry dict over the given field domain."""
    return rank(SparseMatrix(rows, cols, entries, field))


# ---------------------------------------------------------------------------
# Smith normal form


@dataclass
class SmithForm:
    """Diagonalization ``input = left @ diag @ right`` over Z.

    ``factors`` are the positive invariant factors, chained by divisibility;
    ``left`` and ``right`` are unimodular (when transforms were requested).
    """

    rows: int
    cols: int
    factors: list
    left: SparseMatrix | None = None
    right: SparseMatrix | None = None

    @property
    def rank(self):
        return len(self.factors)

    def diagonal_matrix(self):
        return SparseMatrix(
            self.rows,
            self.cols,
            {(i, i): d for i, d in enumerate(self.factors)},
            ZZ,
        )

    def reassemble(self):
        if self.left is None or self.right is None:
            raise ValueError("transforms were not tracked")
        return self.left.matmul(self.diagonal_matrix()).matmul(self.right)


def smith_normal_form(m: SparseMatrix, transforms=True) -> SmithForm:
    """Smith normal form over Z by row/column reduction.

    Pivots are chosen with minimal absolute value (fill-in as tiebreak);
    when a pivot fails to divide an entry in its row or column a gcd step
    replaces it, so the loop terminates with a full divisibility chain.
    """
    if m.domain.kind != "integers":
        raise TypeError("smith_normal_form needs the integer domain")
    a = {}
    for (r, c), v in m.entries.items():
        a.setdefault(r, {})[c] = v

    # left and right inverse transforms, accumulated so that
    # original = L * current * R at every step
    L = {i: {i: 1} for i in range(m.rows)} if transforms else None  # column dicts
    R = {i: {i: 1} for i in range(m.cols)} if transforms else None  # row dicts

    def row_op(dst, src, k):
        # current: row[dst] += k * row[src]  =>  L: col[src] -= k * col[dst]
        row_s = a.get(src, {})
        row_d = a.setdefault(dst, {})
        for c, v in row_s.items():
            w = row_d.get(c, 0) + k * v
            if w:
                row_d[c] = w
            else:
                row_d.pop(c, None)
        if not row_d:
            a.pop(dst, None)
        if transforms:
            cs, cd = L[src], L[dst]
            for r, v in cd.items():
                w = cs.get(r, 0) - k * v
                if w:
                    cs[r] = w
                else:
                    cs.pop(r, None)

    def col_op(dst, src, k):
        # current: col[dst] += k * col[src]  =>  R: row[src] -= k * row[dst]
        for r, row in a.items():
            if src in row:
                w = row.get(dst, 0) + k * row[src]
                if w:
                    row[dst] = w
                else:
                    row.pop(dst, None)
        if transforms:
            rs, rd = R[src], R[dst]
            for c, v in rd.items():
                w = rs.get(c, 0) - k * v
                if w:
                    rs[c] = w
                else:
                    rs.pop(c, None)

    def row_swap(i, j):
        ai, aj = a.pop(i, None), a.pop(j, None)
        if aj is not None:
            a[i] = aj
        if ai is not None:
            a[j] = ai
        if transforms:
            L[i], L[j] = L[j], L[i]

    def col_swap(i, j):
        for row in a.values():
            vi, vj = row.pop(i, None), row.pop(j, None)
            if vj is not None:
                row[i] = vj
            if vi is not None:
                row[j] = vi
        if transforms:
            R[i], R[j] = R[j], R[i]

    def row_negate(i):
        if i in a:
            a[i] = {c: -v for c, v in a[i].items()}
        if transforms:
            L[i] = {r: -v for r, v in L[i].items()}

    factors = []
    pivot_at = 0
    while True:
        live = {(r, c) for r, row in a.items() for c in row if r >= pivot_at and c >= pivot_at}
        if not live:
            break
        pr, pc = min(live, key=lambda rc: (abs(a[rc[0]][rc[1]]), len(a[rc[0]])))
        if pr != pivot_at:
            row_swap(pivot_at, pr)
        if pc != pivot_at:
            col_swap(pivot_at, pc)
        while True:
            piv = a[pivot_at][pivot_at]
            # clear the pivot column
            dirty = False
            for r in [r for r in a if r != pivot_at and pivot_at in a[r]]:
                v = a[r][pivot_at]
                q = v // piv
                if q:
                    row_op(r, pivot_at, -q)
                if a.get(r, {}).get(pivot_at):
                    # remainder smaller than pivot: swap it up and restart
                    row_swap(pivot_at, r)
                    dirty = True
                    break
            if dirty:
                continue
            # clear the pivot row
            prow = a[pivot_at]
            for c in [c for c in prow if c != pivot_at]:
                v = prow[c]
                q = v // piv
                if q:
                    col_op(c, pivot_at, -q)
                if a[pivot_at].get(c):
                    col_swap(pivot_at, c)
                    dirty = True
                    break
            if dirty:
                continue
            break
        if a[pivot_at][pivot_at] < 0:
            row_negate(pivot_at)
        factors.append(a[pivot_at][pivot_at])
        pivot_at += 1

    # enforce the divisibility chain d1 | d2 | ... by gcd/lcm smoothing;
    # the fixups are realized by explicit row/column operations so the
    # tracked transforms stay exact
    changed = True
    while changed:
        changed = False
        for i in range(len(factors) - 1):
            di, dj = factors[i], factors[i + 1]
            if dj % di != 0:
                # fold d_{i+1} into position i: col_i += col_{i+1}, then
                # redo the 2x2 block by explicit reduction
                col_op(i, i + 1, 1)
                _reduce_two_by_two(a, i, i + 1, row_op, col_op, row_swap, col_swap, row_negate)
                factors[i] = a[i][i]
                factors[i + 1] = a[i + 1][i + 1]
                changed = True
    sf = SmithForm(m.rows, m.cols, factors)
    if transforms:
        lm = {}
        for cidx, coldict in L.items():
            for r, v in coldict.items():
                lm[(r, cidx)] = v
        rm = {}
        for ridx, rowdict in R.items():
            for c, v in rowdict.items():
                rm[(ridx, c)] = v
        sf.left = SparseMatrix(m.rows, m.rows, lm, ZZ)
        sf.right = SparseMatrix(m.cols, m.cols, rm, ZZ)
    return sf


def _reduce_two_by_two(a, i, j, row_op, col_op, row_swap, col_swap, row_negate):
    """Re-diagonalize the 2x2 block at positions (i, j) after a fold-in."""
    while True:
        piv = a[i][i]
        entries = [(r, c) for r in (i, j) for c in (i, j) if a.get(r, {}).get(c)]
        pr, pc = min(entries, key=lambda rc: abs(a[rc[0]][rc[1]]))
        if (pr, pc) != (i, i):
            if pr != i:
                row_swap(i, pr)
            if pc != i:
                col_swap(i, pc)
            continue
        piv = a[i][i]
        done = True
        if a.get(j, {}).get(i):
            q = a[j][i] // piv
            row_op(j, i, -q)
            if a.get(j, {}).get(i):
                done = False
        if a[i].get(j):
            q = a[i][j] // piv
            col_op(j, i, -q)
            if a[i].get(j):
                done = False
        if done:
            break
    for k in (i, j):
        if a.get(k, {}).get(k, 0) < 0:
            row_negate(k)


# ---------------------------------------------------------------------------
# unimodular column echelon: image complements inside Z^rows


def unit_pivot_complement(m: SparseMatrix):
    """Try to split ``Z^rows`` as (column span of m) + (coordinate vectors)
    using only unimodular column operations and unit pivots.

    Returns ``(pivot_rows, complement_rows)`` on success: the standard
    basis vectors indexed by ``complement_rows`` then span a genuine
    complement of the column span (the assembled matrix of retired columns
    and complement coordinates is triangular with unit diagonal), which
    also certifies that every invariant factor of ``m`` is 1.  Returns
    ``None`` when no unit pivot can be produced by row-local gcd steps;
    that outcome is inconclusive and the caller should fall back to the
    full Smith normal form.
    """
    if m.domain.kind != "integers":
        raise TypeError("column echelon works over the integer domain")
    coldata = {}
    for (r, c), v in m.entries.items():
        coldata.setdefault(c, {})[r] = v
    rowcols = {}
    for c, col in coldata.items():
        for r in col:
            rowcols.setdefault(r, set()).add(c)

    def addmul(dst, src, k):
        cd, cs = coldata[dst], coldata[src]
        for r, v in cs.items():
            w = cd.get(r, 0) + k * v
            if w:
                if r not in cd:
                    rowcols[r].add(dst)
                cd[r] = w
            else:
                del cd[r]
                rowcols[r].discard(dst)
        if not cd:
            del coldata[dst]

    pivot_rows = []
    while coldata:
        # choose the row to pivot on: smallest achievable gcd, then fill-in
        best = None
        for c, col in coldata.items():
            cl = len(col) - 1
            for r, v in col.items():
                row_gcd = 0
                for c2 in rowcols[r]:
                    row_gcd = gcd(row_gcd, coldata[c2][r])
                score = (row_gcd != 1, cl * (len(rowcols[r]) - 1), abs(v))
                if best is None or score < best[0]:
                    best = (score, r, c)
            if best is not None and best[0][:2] == (False, 0):
                break
        (stuck, _, _), pr, pc = best
        if stuck:
            return None
        # gcd steps inside row pr until a single unit entry remains
        while len(rowcols[pr]) > 1 or abs(coldata[pc].get(pr, 0)) != 1:
            cols_here = sorted(rowcols[pr], key=lambda c: abs(coldata[c][pr]))
            c0 = cols_here[0]
            if len(cols_here) == 1:
                break
            c1 = cols_here[1]
            q = coldata[c1][pr] // coldata[c0][pr]
            addmul(c1, c0, -q)
            pc = c0
        pc = next(iter(rowcols[pr]))
        if abs(coldata[pc][pr]) != 1:
            return None
        pivot_rows.append(pr)
        col = coldata.pop(pc)
        for r in col:
            rowcols[r].discard(pc)
    complement = sorted(set(range(m.rows)) - set(pivot_rows))
    return sorted(pivot_rows), complement


def image_summand_split(m: SparseMatrix):
    """Complement of the column span of an integer matrix inside Z^rows.

    Returns ``(factors, complement)`` where ``factors`` are the invariant
    factors of ``m`` and ``complement`` is either ``("rows", row indices)``
    for a coordinate-vector complement or ``("vectors", columns)`` with
    explicit integer column vectors.  Raises
    :class:`NonUnitInvariantFactor` when the image is not a direct summand,
    i.e. some invariant factor is not a unit.
    """
    fast = unit_pivot_complement(m)
    if fast is not None:
        pivot_rows, complement = fast
        return [1] * len(pivot_rows), ("rows", complement)
    sf = smith_normal_form(m, transforms=True)
    if any(d != 1 for d in sf.factors):
        raise NonUnitInvariantFactor(
            "image is not a direct summand; invariant factors %s" % sf.factors
        )
    # input = L D R with D unit-diagonal: the image is spanned by the first
    # rank columns of L, and the remaining columns of L complement it
    cols = []
    for j in range(sf.rank, m.rows):
        vec = {r: v for (r, c), v in sf.left.entries.items() if c == j}
        cols.append(vec)
    return sf.factors, ("vectors", cols)


# ---------------------------------------------------------------------------
# chain complexes and homology


class ChainComplex:
    """Positions, dimensions and differentials ``d_i: C_i -> C_{i-1}``."""

    def __init__(self, dims, diffs, domain, bases=None, meta=None):
        self.dims = dict(dims)
        self.diffs = dict(diffs)
        self.domain = domain
        self.bases = bases or {}
        self.meta = meta or {}
        for i, d in self.diffs.items():
            if d.cols != self.dims.get(i, 0) or d.rows != self.dims.get(i - 1, 0):
                raise ValueError("differential at %d has mismatched shape" % i)

    def positions(self):
        return sorted(self.dims)

    def differential(self, i):
        d = self.diffs.get(i)
        if d is not None:
            return d
        return zero_matrix(self.dims.get(i - 1, 0), self.dims.get(i, 0), self.domain)


def check_compositions(c: ChainComplex):
    for i in sorted(c.diffs):
        if (i + 1) in c.diffs:
            prod = c.diffs[i].matmul(c.diffs[i + 1])
            if not prod.is_zero():
                rc = next(iter(prod.entries))
                raise CompositionNotZero(
                    "d_%d . d_%d nonzero at %s" % (i, i + 1, (rc,))
                )


def homology_dims(c: ChainComplex, check=True):
    """Homology dimensions of a field-coefficient chain complex.

    Returns ``[(position, dim)]`` over all positions.  Requires consecutive
    differentials to compose to zero (verified unless ``check=False``).
    """
    if not c.domain.is_field:
        raise IntegerDomainRejected("homology dims need field coefficients")
    if check:
        check_compositions(c)
    ranks = {i: rank(d) for i, d in c.diffs.items()}
    out = []
    for i in c.positions():
        dim_i = c.dims[i]
        r_in = ranks.get(i + 1, 0)
        r_out = ranks.get(i, 0)
        out.append((i, dim_i - r_out - r_in))
    return out


def euler_characteristic(dims_by_pos):
    return sum((-1) ** i * d for i, d in dims_by_pos)


# ---------------------------------------------------------------------------
# triplet text format


def write_triplet(m: SparseMatrix) -> str:
    """Serialize: header ``rows cols nnz`` then sorted ``row col value``."""
    lines = ["%d %d %d" % (m.rows, m.cols, m.nnz)]
    for (r, c), v in sorted(m.entries.items()):
        if isinstance(v, Fraction) and v.denominator != 1:
            sval = "%d/%d" % (v.numerator, v.denominator)
        else:
            sval = str(int(v))
        lines.append("%d %d %s" % (r, c, sval))
    return "\n".join(lines) + "\n"


def read_triplet(text: str, domain: Domain) -> SparseMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    rows, cols, nnz = (int(t) for t in lines[0].split())
    if len(lines) - 1 != nnz:
        raise ValueError("triplet header promises %d entries, found %d" % (nnz, len(lines) - 1))
    entries = {}
    for ln in lines[1:]:
        rs, cs, vs = ln.split()
        v = Fraction(*map(int, vs.split("/"))) if "/" in vs else int(vs)
        entries[(int(rs), int(cs))] = v
    return SparseMatrix(rows, cols, entries, domain)

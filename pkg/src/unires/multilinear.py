"""Enumerated bases and structure maps for exterior and divided powers.

Everything here is coordinate combinatorics: basis elements of an exterior
power are strictly increasing index tuples, basis elements of a divided (or
symmetric) power are exponent tuples.  The functions return lists of
``(coefficient, basis element)`` pairs or ``(sign, element)`` pairs; all
coefficients are plain ints so the same tables serve computations over Z,
Q and prime fields.

Sign conventions.  The two contraction actions (dual elements acting on an
exterior power, and exterior elements acting on the dual side) are fixed
once and for all by three requirements: the full contractions
``top(top_dual) = 1`` in both directions, the adjoint identities checked by
:func:`push_pull_identity_holds` / :func:`wedge_action_identity_holds`, and
squaring to zero of every Koszul-type differential built downstream.  The
closed forms below were selected by that test battery; do not tweak one
without re-running it.
"""

from __future__ import annotations

import itertools
from math import comb


# ---------------------------------------------------------------------------
# basis enumeration


def exterior_basis(n, d):
    """Strictly increasing ``d``-subsets of ``range(n)``, lexicographic.

    Empty for ``d < 0`` or ``d > n`` (the power vanishes there).
    """
    if d < 0 or d > n:
        return []
    return list(itertools.combinations(range(n), d))


def divided_basis(n, a):
    """Exponent tuples of length ``n`` summing to ``a``, lexicographic."""
    if a < 0 or n < 0 or (n == 0 and a > 0):
        return []
    if n == 0:
        return [()]
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for v in range(remaining + 1):
            rec(prefix + (v,), remaining - v, slots - 1)

    rec((), a, n)
    return out


def exterior_rank(n, d):
    return comb(n, d) if 0 <= d <= n else 0


def divided_rank(n, a):
    if a < 0:
        return 0
    if a == 0:
        return 1
    return comb(n - 1 + a, a) if n >= 1 else 0


# ---------------------------------------------------------------------------
# divided-power comultiplication


class DegreeZeroError(ValueError):
    """Comultiplication into degree (a-1, 1) needs degree a >= 1."""


def divided_comult(mu):
    """Split one unit off a divided-power exponent tuple.

    Returns the list of ``(mu - e_k, k, 1)`` for every position ``k`` with
    ``mu[k] >= 1``.  All coefficients are 1; that is the divided-power (not
    symmetric-power) convention and it is what keeps every matrix built from
    this map integral.
    """
    if sum(mu) == 0:
        raise DegreeZeroError("cannot comultiply a degree-0 element")
    out = []
    for k, m in enumerate(mu):
        if m >= 1:
            lowered = mu[:k] + (m - 1,) + mu[k + 1 :]
            out.append((lowered, k, 1))
    return out


def divided_sequences(mu):
    """All distinct orderings of the multiset with exponent tuple ``mu``.

    Fully iterating the comultiplication of ``mu`` into single factors
    produces each of these sequences exactly once.
    """
    items = []
    for k, m in enumerate(mu):
        items.extend([k] * m)
    return sorted(set(itertools.permutations(items)))


# ---------------------------------------------------------------------------
# wedge and the two contraction actions


def wedge(left, right):
    """Wedge two increasing index tuples; ``None`` if they intersect.

    The sign is the parity of the shuffle that sorts ``left + right``.
    """
    if set(left) & set(right):
        return None
    inversions = 0
    for a in left:
        for b in right:
            if b < a:
                inversions += 1
    merged = tuple(sorted(left + right))
    return ((-1) ** inversions, merged)


def contract_dual(acting, target):
    """Act by a dual basis element on an exterior basis element.

    ``acting`` indexes a wedge of dual basis vectors, ``target`` a wedge of
    module basis vectors.  Returns ``(sign, remaining)`` or ``None`` when
    ``acting`` is not a subset of ``target``.  Degree-1 factors act as left
    interior products (derivations of degree -1) and compose by
    ``(a ^ b)(x) = a(b(x))``; on basis elements the sign is the parity of
    the sum of removal positions.
    """
    ts = set(target)
    if not set(acting) <= ts:
        return None
    sign = (-1) ** sum(target.index(t) for t in acting)
    remaining = tuple(t for t in target if t not in ts & set(acting))
    return (sign, remaining)


def contract_module(acting, target):
    """Act by an exterior basis element on a dual basis element.

    The mirror of :func:`contract_dual`, with the identical sign rule, so
    both actions are derivation-compatible; that joint choice is what makes
    every Koszul-type differential downstream square to zero.
    """
    ts = set(target)
    if not set(acting) <= ts:
        return None
    sign = (-1) ** sum(target.index(t) for t in acting)
    remaining = tuple(t for t in target if t not in ts & set(acting))
    return (sign, remaining)


def top_form(n):
    """The increasing wedge of all ``n`` basis vectors."""
    return tuple(range(n))


def dual_top_sign(n):
    """Normalization of the oriented dual top class.

    The oriented dual top is ``dual_top_sign(n)`` times the increasing
    dual wedge; with it, the full contraction of the top class against the
    oriented dual top class is ``+1`` in both directions.
    """
    return (-1) ** (n * (n - 1) // 2)


def full_contraction(n, direction="module"):
    """Evaluate the top class against the oriented dual top class."""
    top = top_form(n)
    act = contract_module if direction == "module" else contract_dual
    sign, rest = act(top, top)
    return dual_top_sign(n) * sign if not rest else 0


def contract_dual_element(terms, target):
    """Contract ``target`` against a linear combination of dual vectors.

    ``terms`` is an iterable of ``(index, coefficient)``; the result is a
    list of ``(coefficient, remaining)`` pairs, one per surviving index.
    """
    out = []
    for idx, coeff in terms:
        hit = contract_dual((idx,), target)
        if hit is not None:
            sign, rest = hit
            out.append((sign * coeff, rest))
    return out


# ---------------------------------------------------------------------------
# pair indexing for E (x) G* and the bowtie maps


def pair_index(k, i, g):
    """Index of the generator (E_k (x) dual G_i): E-major lexicographic."""
    return k * g + i


def pair_unindex(idx, g):
    return divmod(idx, g)


def bowtie_divided_exterior(mu, dual_set, g):
    """Map a divided power (exponents ``mu`` over E) against a wedge of
    dual G-generators into the exterior algebra on the E (x) G* pairs.

    Returns ``[(sign, pair index tuple), ...]``; one term per distinct
    ordering of the multiset ``mu``, each with unit coefficient before the
    wedge-sorting sign.
    """
    m = sum(mu)
    if m != len(dual_set):
        raise DegreeMismatch(
            "divided degree %d vs exterior degree %d" % (m, len(dual_set))
        )
    out = []
    for seq in divided_sequences(mu):
        pairs = tuple(pair_index(k, i, g) for k, i in zip(seq, dual_set))
        if len(set(pairs)) != m:
            continue
        sign = _sort_sign(pairs)
        if sign is not None:
            out.append((sign, tuple(sorted(pairs))))
    return out


def bowtie_exterior_divided(index_set, nu, g):
    """Mirror bowtie: wedge of E-generators against a divided power on G*."""
    m = sum(nu)
    if m != len(index_set):
        raise DegreeMismatch(
            "exterior degree %d vs divided degree %d" % (len(index_set), m)
        )
    out = []
    for seq in divided_sequences(nu):
        pairs = tuple(pair_index(k, i, g) for k, i in zip(index_set, seq))
        if len(set(pairs)) != m:
            continue
        sign = _sort_sign(pairs)
        if sign is not None:
            out.append((sign, tuple(sorted(pairs))))
    return out


def _sort_sign(seq):
    """Permutation sign that sorts ``seq``; ``None`` on repeats."""
    n = len(seq)
    inversions = 0
    for i in range(n):
        for j in range(i + 1, n):
            if seq[i] == seq[j]:
                return None
            if seq[i] > seq[j]:
                inversions += 1
    return (-1) ** inversions


# ---------------------------------------------------------------------------
# wedge powers of a matrix (minor expansion)


def minor_det(mat, rows, cols):
    """Exact determinant of the (sorted rows) x (sorted cols) submatrix.

    Leibniz expansion; the entries may live in any commutative ring that
    supports + and * (ints, field scalars, polynomials).
    """
    k = len(rows)
    if k != len(cols):
        raise ValueError("minor must be square")
    if k == 0:
        return 1
    total = None
    for perm in itertools.permutations(range(k)):
        sign = _perm_sign(perm)
        term = mat[rows[0]][cols[perm[0]]]
        for r in range(1, k):
            term = term * mat[rows[r]][cols[perm[r]]]
        if sign < 0:
            term = -term
        total = term if total is None else total + term
    return total


def _perm_sign(perm):
    inversions = 0
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                inversions += 1
    return (-1) ** inversions


def wedge_power_apply(mat, n_rows, subset, degree):
    """Apply the ``degree``-th wedge power of a matrix to a basis element.

    ``mat[r][c]`` maps source generator ``c`` to target generator ``r``;
    ``subset`` is an increasing tuple of source indices with
    ``len(subset) == degree``.  Returns ``[(minor, target subset), ...]``
    over all increasing target subsets of size ``degree``.
    """
    if degree != len(subset):
        raise DegreeMismatch("wedge power degree mismatch")
    out = []
    for target in itertools.combinations(range(n_rows), degree):
        out.append((minor_det(mat, target, subset), target))
    return out


# ---------------------------------------------------------------------------
# Koszul differential on the exterior algebra of E (x) G*


class AmbientMismatch(ValueError):
    pass


class DegreeMismatch(ValueError):
    pass


def koszul_expand(values, z, g):
    """Contract a pair-index wedge ``z`` against the functional with matrix
    ``values`` (``values[i][k]`` is the pairing with E_k (x) dual G_i).

    Returns ``[(coefficient, z minus one index), ...]``.  Iterating this is
    the Koszul differential attached to a map E -> G; it squares to zero for
    any coefficient matrix.
    """
    out = []
    for pos, idx in enumerate(z):
        k, i = pair_unindex(idx, g)
        coeff = values[i][k]
        rest = z[:pos] + z[pos + 1 :]
        sign = (-1) ** pos
        out.append((sign * coeff, rest))
    return out


def koszul_matrix_entries(values, e, g, d):
    """Entry list of the Koszul differential from degree ``d`` to ``d-1``.

    Returns ``(n_rows, n_cols, [(row, col, coeff), ...])`` over the
    lexicographic pair-index bases.
    """
    source = exterior_basis(e * g, d)
    target = exterior_basis(e * g, d - 1)
    tindex = {z: r for r, z in enumerate(target)}
    entries = []
    for col, z in enumerate(source):
        for coeff, rest in koszul_expand(values, z, g):
            entries.append((tindex[rest], col, coeff))
    return (len(target), len(source), entries)


# ---------------------------------------------------------------------------
# identity checks used to pin the sign conventions


def full_contraction_is_one(n):
    return full_contraction(n, "module") == 1 and full_contraction(n, "dual") == 1


def wedge_action_identity_holds(f):
    """Exhaustively check ``[b(alpha)](top) == b ^ alpha(top)``.

    ``b`` runs over exterior basis elements, ``alpha`` over dual basis
    elements, and the right factor is the full wedge of the module basis.
    """
    top = tuple(range(f))
    for r in range(f + 1):
        for q in range(f + 1):
            for b in exterior_basis(f, r):
                for alpha in exterior_basis(f, q):
                    lhs = {}
                    hit = contract_module(b, alpha)
                    if hit is not None:
                        s1, rest = hit
                        hit2 = contract_dual(rest, top)
                        if hit2 is not None:
                            s2, out = hit2
                            lhs[out] = lhs.get(out, 0) + s1 * s2
                    rhs = {}
                    hit = contract_dual(alpha, top)
                    if hit is not None:
                        s1, rest = hit
                        w = wedge(b, rest)
                        if w is not None:
                            s2, out = w
                            rhs[out] = rhs.get(out, 0) + s1 * s2
                    lhs = {k: v for k, v in lhs.items() if v}
                    rhs = {k: v for k, v in rhs.items() if v}
                    if lhs != rhs:
                        return False
    return True


def push_pull_identity_holds(x_mat, f, g, r, s):
    """Check one instance of the push-pull identity for a map X: F -> G.

    For every pair of basis elements ``b`` (degree ``r`` on F) and ``gamma``
    (degree ``s + r`` on the dual of G), compare pushing ``b`` forward and
    contracting against pulling ``gamma`` back and contracting.
    """
    for b in exterior_basis(f, r):
        for gamma in exterior_basis(g, s + r):
            lhs = {}
            for det1, gim in wedge_power_apply(x_mat, g, b, r):
                if det1 == 0:
                    continue
                hit = contract_module(gim, gamma)
                if hit is None:
                    continue
                s1, rest = hit
                xt = [[x_mat[i][j] for i in range(g)] for j in range(f)]
                for det2, fout in wedge_power_apply(xt, f, rest, s):
                    if det2 == 0:
                        continue
                    lhs[fout] = lhs.get(fout, 0) + det1 * s1 * det2
            rhs = {}
            xt = [[x_mat[i][j] for i in range(g)] for j in range(f)]
            for det, fall in wedge_power_apply(xt, f, gamma, s + r):
                if det == 0:
                    continue
                hit = contract_module(b, fall)
                if hit is None:
                    continue
                s1, rest = hit
                rhs[rest] = rhs.get(rest, 0) + det * s1
            lhs = {k: v for k, v in lhs.items() if v}
            rhs = {k: v for k, v in rhs.items() if v}
            if lhs != rhs:
                return (False, (b, gamma, lhs, rhs))
    return (True, None)


def adjoint_identities_report(max_rank=4, trials=100, prime=5, seed=0):
    """Run the identity battery on exhaustive small bases and random maps.

    Returns a dict with a boolean ``passed`` and, on failure, a ``witness``
    describing the first offending instance.
    """
    import random

    rng = random.Random(seed)
    for n in range(1, max_rank + 1):
        if not full_contraction_is_one(n):
            return {"passed": False, "witness": ("full contraction", n)}
        if not wedge_action_identity_holds(n):
            return {"passed": False, "witness": ("wedge action", n)}
    for _ in range(trials):
        f = rng.randrange(1, max_rank + 1)
        g = rng.randrange(1, max_rank + 1)
        x = [[rng.randrange(prime) for _ in range(f)] for _ in range(g)]
        r = rng.randrange(0, f + 1)
        s = rng.randrange(0, g + 1 - min(r, g) + 1)
        ok, witness = push_pull_identity_holds(x, f, g, r, s)
        if not ok:
            return {"passed": False, "witness": ("push-pull", x, witness)}
    return {"passed": True, "witness": None}

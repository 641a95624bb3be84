"""Multivariate polynomials over Z in the generic variables, with bigrading.

The generic data for parameters ``(e, g)`` consists of one scalar variable,
an ``f x e`` matrix of variables (``f = e + g``) and a ``g x f`` matrix of
variables.  Variables are globally indexed: index 0 is the scalar, then the
first matrix row-major, then the second matrix row-major.  A monomial is a
sorted tuple of variable indices with repetition; a polynomial is a dict
from monomials to nonzero integer coefficients.

The bigrading lives in the submonoid of Z^2 generated by (1,0), (0,1) and
(-e,g): matrix-one variables have degree (1,0), matrix-two variables (0,1),
and the scalar (-e,g).
"""

from __future__ import annotations

import random
from dataclasses import dataclass


class InhomogeneousError(ValueError):
    """Monomials of the polynomial do not share a common bidegree."""


class ZeroPolynomialError(ValueError):
    """The zero polynomial carries no bidegree."""


@dataclass(frozen=True)
class Parameters:
    """Ranks of the three free modules: e, g >= 1 and f = e + g."""

    e: int
    g: int

    def __post_init__(self):
        if self.e < 1 or self.g < 1:
            raise ValueError("both ranks must be >= 1")

    @property
    def f(self):
        return self.e + self.g

    @property
    def num_vars(self):
        return 1 + self.f * self.e + self.g * self.f


# ---------------------------------------------------------------------------
# polynomials


class Poly:
    """Immutable multivariate polynomial over Z.

    ``terms`` maps a monomial (sorted tuple of variable indices, with
    repetition) to a nonzero int coefficient.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        cleaned = {}
        if terms:
            for mono, coeff in terms.items():
                if coeff:
                    cleaned[tuple(mono)] = coeff
        object.__setattr__(self, "terms", cleaned)

    def __setattr__(self, *a):
        raise AttributeError("Poly is immutable")

    @staticmethod
    def zero():
        return Poly()

    @staticmethod
    def const(c):
        return Poly({(): c}) if c else Poly()

    @staticmethod
    def variable(idx):
        return Poly({(idx,): 1})

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, int):
            return self.terms == Poly.const(other).terms
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        if isinstance(other, int):
            other = Poly.const(other)
        out = dict(self.terms)
        for mono, coeff in other.terms.items():
            s = out.get(mono, 0) + coeff
            if s:
                out[mono] = s
            else:
                out.pop(mono, None)
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, int):
            other = Poly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return Poly.const(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, int):
            if other == 0:
                return Poly()
            return Poly({m: c * other for m, c in self.terms.items()})
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = tuple(sorted(m1 + m2))
                s = out.get(mono, 0) + c1 * c2
                if s:
                    out[mono] = s
                else:
                    del out[mono]
        return Poly(out)

    __rmul__ = __mul__

    def evaluate(self, values, p=None):
        """Evaluate at ``values[idx]``; reduce mod ``p`` when given."""
        total = 0
        for mono, coeff in self.terms.items():
            term = coeff
            for idx in mono:
                term *= values[idx]
            total += term
        return total % p if p is not None else total

    def text(self, params):
        """Deterministic textual form: monomials sorted lexicographically
        (by exponent vector on the global variable order), leading first."""
        if not self.terms:
            return "0"
        names = variable_names(params)
        keyed = sorted(
            self.terms.items(),
            key=lambda item: _exponent_vector(item[0], params.num_vars),
            reverse=True,
        )
        chunks = []
        for mono, coeff in keyed:
            factors = []
            i = 0
            while i < len(mono):
                j = i
                while j < len(mono) and mono[j] == mono[i]:
                    j += 1
                power = j - i
                factors.append(
                    names[mono[i]] if power == 1 else "%s^%d" % (names[mono[i]], power)
                )
                i = j
            body = "*".join(factors) if factors else "1"
            if coeff == 1 and factors:
                term = body
            elif coeff == -1 and factors:
                term = "-" + body
            else:
                term = "%d*%s" % (coeff, body) if factors else str(coeff)
            chunks.append(term)
        out = chunks[0]
        for term in chunks[1:]:
            out += " - " + term[1:] if term.startswith("-") else " + " + term
        return out

    def __repr__(self):
        return "Poly(%d terms)" % len(self.terms)


def _exponent_vector(mono, num_vars):
    vec = [0] * num_vars
    for idx in mono:
        vec[idx] += 1
    return tuple(vec)


# ---------------------------------------------------------------------------
# variable layout


def scalar_var():
    return 0


def v_var(params, j, k):
    """Variable index for entry (j, k) of the f x e matrix."""
    if not (0 <= j < params.f and 0 <= k < params.e):
        raise IndexError("v index out of range")
    return 1 + j * params.e + k


def x_var(params, i, j):
    """Variable index for entry (i, j) of the g x f matrix."""
    if not (0 <= i < params.g and 0 <= j < params.f):
        raise IndexError("x index out of range")
    return 1 + params.f * params.e + i * params.f + j


def variable_names(params):
    names = ["b"]
    for j in range(params.f):
        for k in range(params.e):
            names.append("v%d%d" % (j + 1, k + 1))
    for i in range(params.g):
        for j in range(params.f):
            names.append("x%d%d" % (i + 1, j + 1))
    return names


def variable_bidegrees(params):
    """Bidegree of each variable, indexed like the global variable order."""
    degs = [(-params.e, params.g)]
    degs += [(1, 0)] * (params.f * params.e)
    degs += [(0, 1)] * (params.g * params.f)
    return degs


# ---------------------------------------------------------------------------
# bigrading


def monomial_bidegree(mono, params):
    degs = variable_bidegrees(params)
    s = t = 0
    for idx in mono:
        ds, dt = degs[idx]
        s += ds
        t += dt
    return (s, t)


def bidegree(poly, params):
    """Common bidegree of all monomials of a nonzero polynomial."""
    if poly.is_zero():
        raise ZeroPolynomialError("zero polynomial has no bidegree")
    degrees = {monomial_bidegree(m, params) for m in poly.terms}
    if len(degrees) != 1:
        raise InhomogeneousError("mixed bidegrees: %s" % sorted(degrees))
    return degrees.pop()


def in_degree_monoid(pair, params):
    """Decide membership in the submonoid generated by (1,0), (0,1), (-e,g).

    A pair (s, t) lies in the monoid iff it can be written
    n*(-e, g) + a*(1,0) + b*(0,1) with n, a, b >= 0, i.e. iff for some
    n >= 0 both s + n*e >= 0 and t - n*g >= 0.
    """
    s, t = pair
    e, g = params.e, params.g
    if t < 0:
        return False
    for n in range(t // g + 1):
        if s + n * e >= 0 and t - n * g >= 0:
            return True
    return False


# ---------------------------------------------------------------------------
# generic and specialized data


class GenericData:
    """The generic input: one scalar variable and two matrices of variables.

    ``V[j][k]`` and ``X[i][j]`` are :class:`Poly` single variables; ``b`` is
    the scalar variable.  ``xv`` caches the g x e product matrix.
    """

    def __init__(self, params: Parameters):
        self.params = params
        self.b = Poly.variable(scalar_var())
        self.V = [
            [Poly.variable(v_var(params, j, k)) for k in range(params.e)]
            for j in range(params.f)
        ]
        self.X = [
            [Poly.variable(x_var(params, i, j)) for j in range(params.f)]
            for i in range(params.g)
        ]
        self.xv = [
            [
                sum(
                    (self.X[i][j] * self.V[j][k] for j in range(params.f)),
                    Poly.zero(),
                )
                for k in range(params.e)
            ]
            for i in range(params.g)
        ]

    @property
    def is_symbolic(self):
        return True


class SpecializedData:
    """Scalar data over a prime field: the image of the generic data under
    a deterministic pseudo-random evaluation.
    """

    def __init__(self, params: Parameters, p, values):
        self.params = params
        self.p = p
        self.values = list(values)
        if len(self.values) != params.num_vars:
            raise ValueError("expected %d variable values" % params.num_vars)
        self.b = self.values[scalar_var()] % p
        self.V = [
            [self.values[v_var(params, j, k)] % p for k in range(params.e)]
            for j in range(params.f)
        ]
        self.X = [
            [self.values[x_var(params, i, j)] % p for j in range(params.f)]
            for i in range(params.g)
        ]
        self.xv = [
            [
                sum(self.X[i][j] * self.V[j][k] for j in range(params.f)) % p
                for k in range(params.e)
            ]
            for i in range(params.g)
        ]

    @property
    def is_symbolic(self):
        return False


def make_generic(params: Parameters) -> GenericData:
    return GenericData(params)


def specialize(params: Parameters, p, seed) -> SpecializedData:
    """Deterministic pseudo-random point of the variable space over F_p."""
    rng = random.Random(seed)
    values = [rng.randrange(p) for _ in range(params.num_vars)]
    return SpecializedData(params, p, values)


def specialize_zero(params: Parameters, p) -> SpecializedData:
    return SpecializedData(params, p, [0] * params.num_vars)


def specialize_poly(poly, data: SpecializedData):
    return poly.evaluate(data.values, data.p)

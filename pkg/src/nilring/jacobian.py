"""Exact differential analysis of D over the rationals.

Polynomials are sparse maps from exponent tuples to integer coefficients.
The coordinate polynomials of D are produced by running the group law on
polynomial-valued coordinates, so they agree with the numeric product by
construction and are cross-checked against the closed form in the tests.
Ranks come from fraction-free (Bareiss) elimination; no floating point is
involved anywhere in this module.
"""

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import lcm

from . import group as G
from ._parallel import ordered_map
from .errors import check_budget

__all__ = [
    "Poly", "PolynomialMap", "RationalMatrix", "polynomial_map", "jacobian_at",
    "x_partials_formula", "rank", "search_order", "find_full_rank_point",
    "SearchResult", "nonsingular_zero", "degenerate_count", "taylor_difference",
]


class Poly:
    """Sparse multivariate polynomial with integer coefficients."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars, terms=None):
        self.nvars = nvars
        self.terms = {e: c for e, c in (terms or {}).items() if c != 0}

    @classmethod
    def const(cls, nvars, c):
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars, i, power=1):
        e = [0] * nvars
        e[i] = power
        return cls(nvars, {tuple(e): 1})

    def _coerce(self, other):
        if isinstance(other, Poly):
            return other
        return Poly.const(self.nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return Poly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k):
        out = Poly.const(self.nvars, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        other = self._coerce(other)
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        return f"Poly({self.nvars}, {self.terms})"

    def is_zero(self):
        return not self.terms

    def degree(self):
        return max((sum(e) for e in self.terms), default=-1)

    def diff(self, i, times=1):
        out = self
        for _ in range(times):
            nxt = {}
            for e, c in out.terms.items():
                if e[i]:
                    f = list(e)
                    f[i] -= 1
                    nxt[tuple(f)] = nxt.get(tuple(f), 0) + c * e[i]
            out = Poly(self.nvars, nxt)
        return out

    def __call__(self, point):
        total = 0
        for e, c in self.terms.items():
            t = c
            for v, k in zip(point, e):
                if k:
                    t *= v**k
            total += t
        return total


@dataclass(frozen=True)
class PolynomialMap:
    """The d+d' coordinate polynomials of D_r in variables (n_1..n_r, m_1..m_r)."""

    d: int
    r: int
    variant: str
    polys: tuple

    @property
    def nvars(self):
        return 2 * self.r

    def __call__(self, n, m):
        pt = tuple(n) + tuple(m)
        return G.GroupElement(self.d, tuple(p(pt) for p in self.polys))

    def partials(self, i):
        return tuple(p.diff(i) for p in self.polys)


@lru_cache(maxsize=32)
def polynomial_map(d, r, variant="D"):
    G._check_variant(variant)
    nv = 2 * r
    ixs = G.index_set(d)

    def curve(i):
        x = Poly.var(nv, i)
        return [x**l1 if l2 == 0 else Poly(nv) for l1, l2 in ixs.indices]

    acc = [Poly(nv) for _ in ixs.indices]
    for j in range(r):
        a, b = curve(j), curve(r + j)
        if variant == "D":
            a = G._inv_coords(d, a)
        else:
            b = G._inv_coords(d, b)
        acc = G._mul_coords(d, G._mul_coords(d, acc, a), b)
    return PolynomialMap(d, r, variant, tuple(acc))


@dataclass(frozen=True)
class RationalMatrix:
    rows: tuple

    @classmethod
    def of(cls, rows):
        return cls(tuple(tuple(Fraction(v) for v in row) for row in rows))

    @property
    def shape(self):
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    def tolist(self):
        return [[int(v) if v.denominator == 1 else str(v) for v in row] for row in self.rows]


@lru_cache(maxsize=32)
def _jacobian_polys(d, r, variant):
    pm = polynomial_map(d, r, variant)
    return tuple(tuple(p.diff(i) for i in range(2 * r)) for p in pm.polys)


def jacobian_at(n, m, variant="D", d=2):
    """Exact gradient of D with respect to (x_1..x_r, y_1..y_r) at (n, m).

    Rows follow the coordinate order of G0(d), columns the variables.
    """
    n, m = G._check_pair(n, m)
    r = len(n)
    pt = n + m
    return RationalMatrix.of([[dp(pt) for dp in row] for row in _jacobian_polys(d, r, variant)])


def x_partials_formula(n, m, d):
    """x-partials of D from the explicit termwise formula (used as a cross-check).

    Lower rows are -l1 n_j^{l1-1}; a central row (l1, l2) has
    l1 n_j^{l1-1} sum_{k>j}(n_k^{l2} - m_k^{l2}) + l2 n_j^{l2-1} sum_{k<j}(n_k^{l1} - m_k^{l1})
    - l1 n_j^{l1-1} m_j^{l2} + (l1+l2) n_j^{l1+l2-1}.
    Entries are polynomials when ``n, m`` are Poly variables and numbers otherwise.
    """
    r = len(n)
    rows = []
    for l1, l2 in G.index_set(d).indices:
        row = []
        for j in range(r):
            if l2 == 0:
                row.append(-l1 * n[j] ** (l1 - 1))
                continue
            right = sum((n[k] ** l2 - m[k] ** l2 for k in range(j + 1, r)), 0)
            left = sum((n[k] ** l1 - m[k] ** l1 for k in range(j)), 0)
            row.append(l1 * n[j] ** (l1 - 1) * right + l2 * n[j] ** (l2 - 1) * left
                       - l1 * n[j] ** (l1 - 1) * m[j] ** l2 + (l1 + l2) * n[j] ** (l1 + l2 - 1))
        rows.append(row)
    return rows


def taylor_difference(n, m, j, variant="D", d=2):
    """D(n + e_j, m) - D(n, m) as the exact finite Taylor sum over x_j-derivatives."""
    n, m = G._check_pair(n, m)
    r = len(n)
    pt = n + m
    pm = polynomial_map(d, r, variant)
    out = []
    for p in pm.polys:
        total = Fraction(0)
        fact = 1
        for k in range(1, p.degree() + 1):
            fact *= k
            total += Fraction(p.diff(j, k)(pt), fact)
        out.append(total)
    return out


# -- exact rank ---------------------------------------------------------------

def rank(M):
    """Rank over Q by fraction-free Gaussian elimination with full pivoting."""
    rows = M.rows if isinstance(M, RationalMatrix) else tuple(tuple(Fraction(v) for v in r) for r in M)
    if not rows or not rows[0]:
        return 0
    # clear denominators row by row; row scaling keeps the rank
    A = []
    for row in rows:
        den = lcm(*[Fraction(v).denominator for v in row])
        A.append([int(Fraction(v) * den) for v in row])
    nr, nc = len(A), len(A[0])
    prev = 1
    k = 0
    while k < min(nr, nc):
        piv = None
        for i in range(k, nr):
            for j in range(k, nc):
                if A[i][j] != 0:
                    piv = (i, j)
                    break
            if piv:
                break
        if piv is None:
            break
        i, j = piv
        A[k], A[i] = A[i], A[k]
        for row in A:
            row[k], row[j] = row[j], row[k]
        for i in range(k + 1, nr):
            for j in range(k + 1, nc):
                A[i][j] = (A[k][k] * A[i][j] - A[i][k] * A[k][j]) // prev
            A[i][k] = 0
        prev = A[k][k]
        k += 1
    return k


# -- full-rank search ---------------------------------------------------------

def _value_order(B):
    out = [0]
    for v in range(1, B + 1):
        out += [v, -v]
    return out


def search_order(r, B):
    """Points of [-B, B]^{2r}, by max-norm shell, then lexicographic in the
    value order 0, 1, -1, 2, -2, ...
    """
    vals = _value_order(B)
    for shell in range(B + 1):
        for pt in itertools.product(vals, repeat=2 * r):
            if max((abs(v) for v in pt), default=0) == shell:
                yield pt[:r], pt[r:]


@dataclass
class SearchResult:
    d: int
    r: int
    box: int
    found: bool
    n: tuple = None
    m: tuple = None
    rank: int = None
    examined: int = 0
    reason: str = ""

    def to_dict(self):
        return {"d": self.d, "r": self.r, "box": self.box, "found": self.found,
                "n": list(self.n) if self.n else None, "m": list(self.m) if self.m else None,
                "rank": self.rank, "examined": self.examined, "reason": self.reason}


def find_full_rank_point(d, r, search_box=2, variant="D", budget=None):
    """First (n, m) in the search order with rank grad D(n, m) = d + d'."""
    target = G.index_set(d).size
    if 2 * r < target:
        return SearchResult(d, r, search_box, False, reason=f"2r = {2 * r} < d+d' = {target}: rank is at most 2r")
    check_budget("full-rank search", (2 * search_box + 1) ** (2 * r), budget)
    examined = 0
    for n, m in search_order(r, search_box):
        examined += 1
        rk = rank(jacobian_at(n, m, variant, d))
        if rk == target:
            return SearchResult(d, r, search_box, True, n, m, rk, examined)
    return SearchResult(d, r, search_box, False, examined=examined, reason="box exhausted")


def nonsingular_zero(d, r, search_box=2, witness=None, variant="D"):
    """A zero (z0, w0) of D_{2r} with full-rank gradient.

    From a full-rank point (n, m) of D_r, z0 = (n, m') and w0 = (m, n') with
    primes denoting reversed tuples. ``witness`` overrides the search.
    """
    if witness is None:
        res = find_full_rank_point(d, r, search_box, variant)
        if not res.found:
            raise ValueError(f"no full-rank point: {res.reason}")
        n, m = res.n, res.m
    else:
        n, m = (tuple(int(v) for v in w) for w in witness)
        if rank(jacobian_at(n, m, variant, d)) != G.index_set(d).size:
            raise ValueError("witness does not have full rank")
    z0 = tuple(n) + tuple(reversed(m))
    w0 = tuple(m) + tuple(reversed(n))
    if not G.closed_form_product(z0, w0, d, variant).is_identity():
        raise AssertionError("D_{2r}(z0, w0) is not the identity")
    if rank(jacobian_at(z0, w0, variant, d)) != G.index_set(d).size:
        raise AssertionError("gradient at (z0, w0) is not of full rank")
    return z0, w0


def degenerate_count(d, r, N, m, variant="D", budget=None, threads=None):
    """Number of n in [-N, N]^r with rank grad_x D(n, m) < d + d'."""
    m = tuple(int(v) for v in m)
    if len(m) != r:
        raise ValueError(f"m must have length r = {r}")
    check_budget("degenerate count", (2 * N + 1) ** r, budget)
    target = G.index_set(d).size
    polys = [row[:r] for row in _jacobian_polys(d, r, variant)]

    def outer(n1):
        c = 0
        for rest in itertools.product(range(-N, N + 1), repeat=r - 1):
            pt = (n1,) + rest + m
            if rank([[p(pt) for p in row] for row in polys]) < target:
                c += 1
        return c

    return sum(ordered_map(outer, range(-N, N + 1), threads))

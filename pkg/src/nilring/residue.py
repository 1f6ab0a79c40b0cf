"""Arithmetic of G0(d) modulo q.

The group law is a polynomial with integer coefficients, so reduction mod q is
a homomorphism onto a finite group of order ``q**(d+d')``. Everything the
singular series needs is derived from the solution table

    M(q, h) = #{(n, m) in Z_q^{2r} : D(n, m) = h  (mod q)}

which is built exactly (``int64`` counts). Nilpotent Gauss sums are its
discrete Fourier transform, and the local coefficients A(q, h) follow from
Möbius-type differences of normalised counts.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np

from . import group as G
from ._parallel import chunk_ranges, ordered_map
from .errors import DEFAULT_WORK_BUDGET, check_budget

__all__ = [
    "FractionVector", "ResidueElement", "LocalFactorReport",
    "factorize", "mobius", "divisors", "ramanujan_sum",
    "fractions_with_denominator", "fractions_up_to",
    "solution_table", "count_solutions_mod", "gauss_sum", "gauss_sum_table",
    "coefficient_A", "local_factor", "default_level",
    "residue_decompose", "classical_gauss_sum",
]


@dataclass(frozen=True)
class FractionVector:
    """A rational point a/q of the torus, stored reduced.

    ``numer`` has entries in ``[0, q)`` and ``gcd(numer..., q) == 1``, so equal
    points have identical representations.
    """

    numer: tuple
    q: int

    @classmethod
    def reduced(cls, numer, q):
        q = int(q)
        if q < 1:
            raise ValueError(f"denominator must be positive, got {q}")
        a = [int(v) % q for v in numer]
        g = math.gcd(q, *a)
        return cls(tuple(v // g for v in a), q // g)

    def __post_init__(self):
        if self.q < 1 or any(not 0 <= v < self.q for v in self.numer):
            raise ValueError(f"not a canonical fraction vector: {self.numer}/{self.q}")
        if math.gcd(self.q, *self.numer) != 1:
            raise ValueError(f"{self.numer}/{self.q} is not reduced; use FractionVector.reduced")

    def __len__(self):
        return len(self.numer)

    def as_floats(self):
        return np.array(self.numer, dtype=float) / self.q

    @classmethod
    def parse(cls, text):
        """Parse ``1,1,1/3``: numerators, then the common denominator."""
        head, _, q = text.rpartition("/")
        if not head:
            raise ValueError(f"expected 'a1,...,ak/q', got {text!r}")
        return cls.reduced([int(t) for t in head.split(",")], int(q))

    def to_text(self):
        return ",".join(map(str, self.numer)) + f"/{self.q}"


def fractions_with_denominator(q, k):
    """All reduced a/q in [0,1)^k whose denominator is exactly q."""
    for a in product(range(q), repeat=k):
        if math.gcd(q, *a) == 1:
            yield FractionVector(a, q)


def fractions_up_to(M, k):
    for q in range(1, int(math.floor(M)) + 1):
        yield from fractions_with_denominator(q, k)


@dataclass(frozen=True)
class ResidueElement:
    """A group element with coordinates reduced mod q."""

    q: int
    d: int
    coords: tuple

    def __post_init__(self):
        coords = tuple(int(c) % self.q for c in self.coords)
        if len(coords) != G.index_set(self.d).size:
            raise ValueError("wrong number of coordinates")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def of(cls, g, q):
        return cls(q, g.d, g.coords)

    def __mul__(self, other):
        if self.q != other.q or self.d != other.d:
            raise ValueError("residue elements live in different groups")
        return ResidueElement(self.q, self.d, G._mul_coords(self.d, self.coords, other.coords))

    def inverse(self):
        return ResidueElement(self.q, self.d, G._inv_coords(self.d, self.coords))

    def flat_index(self):
        return _encode(np.array([self.coords]), self.q)[0]


# -- elementary number theory -------------------------------------------------

def factorize(n):
    """Prime factorisation by trial division, as ``{p: exponent}``."""
    n = int(n)
    if n < 1:
        raise ValueError(f"cannot factorise {n}")
    out = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def divisors(n):
    divs = [1]
    for p, e in factorize(n).items():
        divs = [x * p**k for x in divs for k in range(e + 1)]
    return sorted(divs)


def mobius(n):
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def ramanujan_sum(q, y):
    """Exact value of sum over a in Z_q^k with gcd(a, q) = 1 of e(y.a/q)."""
    k = len(y)
    total = 0
    for e in divisors(q):
        if all(v % e == 0 for v in y):
            total += mobius(q // e) * e**k
    return total


# -- solution tables ----------------------------------------------------------

def _encode(coords, q):
    coords = np.asarray(coords, dtype=np.int64) % q
    k = coords.shape[-1]
    radix = q ** np.arange(k, dtype=np.int64)
    return coords @ radix


def _all_residues(q, k):
    """Every element of Z_q^k, row i being the digits of i in base q."""
    idx = np.arange(q**k, dtype=np.int64)
    return np.stack([(idx // q**j) % q for j in range(k)], axis=1)


def _single_factor_hist(q, d, variant):
    nm = _all_residues(q, 2)
    vals = G.closed_form_array(nm[:, :1], nm[:, 1:], d, variant)
    return np.bincount(_encode(vals, q), minlength=q ** G.index_set(d).size)


def _table_by_convolution(q, d, r, variant):
    dim = G.index_set(d).size
    h1 = _single_factor_hist(q, d, variant)
    elems = _all_residues(q, dim)
    acc = h1.copy()
    support = np.nonzero(h1)[0]
    for _ in range(r - 1):
        nxt = np.zeros_like(acc)
        for y in support:
            perm = _encode(G.multiply_array(elems, elems[y], d), q)
            nxt[perm] += acc * h1[y]
        acc = nxt
    return acc


def _table_direct(q, d, r, variant, threads=None):
    dim = G.index_set(d).size
    tuples = _all_residues(q, r)
    size = q**dim

    def block(bounds):
        lo, hi = bounds
        x = np.repeat(tuples[lo:hi], len(tuples), axis=0)
        y = np.tile(tuples, (hi - lo, 1))
        return np.bincount(_encode(G.closed_form_array(x, y, d, variant), q), minlength=size)

    step = max(1, 2**20 // len(tuples))
    parts = ordered_map(block, chunk_ranges(len(tuples), step), threads)
    return np.sum(parts, axis=0)


def _conv_cost(q, d, r):
    return r * q**2 * q ** G.index_set(d).size


@lru_cache(maxsize=64)
def _cached_table(q, d, r, variant, method):
    if method == "convolution":
        table = _table_by_convolution(q, d, r, variant)
    else:
        table = _table_direct(q, d, r, variant)
    table.setflags(write=False)
    return table


def solution_table(q, d, r, variant="D", method="convolution", budget=None):
    """Counts M(q, h) for every h, as a flat ``int64`` array indexed base q.

    ``method="convolution"`` multiplies out the distribution of a single factor
    A0(n)^-1 A0(m) r times in the residue group; ``"direct"`` enumerates all
    q^{2r} pairs and serves as an independent check.
    """
    q, d, r = int(q), int(d), int(r)
    if q < 1 or r < 1:
        raise ValueError("need q >= 1 and r >= 1")
    G._check_variant(variant)
    if method == "convolution":
        check_budget(f"M({q},.) table, convolution", _conv_cost(q, d, r), budget)
    elif method == "direct":
        check_budget(f"M({q},.) table, direct", q ** (2 * r), budget)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _cached_table(q, d, r, variant, method)


def _residue_of(h, q, d=None):
    if isinstance(h, ResidueElement):
        if h.q != q:
            return ResidueElement(q, h.d, h.coords)
        return h
    if isinstance(h, G.GroupElement):
        return ResidueElement.of(h, q)
    if d is None:
        d = G.degree_from_dim(len(h))
    return ResidueElement(q, d, tuple(h))


def count_solutions_mod(q, h, r, variant="D", method="convolution", budget=None):
    """M(q, h) as an exact integer."""
    if int(q) == 1:
        return 1
    res = _residue_of(h, q)
    table = solution_table(q, res.d, r, variant, method, budget)
    return int(table[res.flat_index()])


def gauss_sum(frac, r, variant="D", method="table", budget=None):
    """G(a/q) = q^{-2r} sum over v, w in Z_q^r of e(-D(v, w).a/q).

    The counts per phase class are accumulated exactly; only the final sum
    over the q roots of unity is done in floating point, with ``math.fsum``.
    """
    q = frac.q
    d = G.degree_from_dim(len(frac))
    if q == 1:
        return complex(1.0)
    a = np.array(frac.numer, dtype=np.int64)
    if method == "table":
        table = solution_table(q, d, r, variant, budget=budget)
        elems = _all_residues(q, len(a))
        phase = (elems @ a) % q
        binned = np.zeros(q, dtype=np.int64)
        np.add.at(binned, phase, table)
    elif method == "direct":
        check_budget("Gauss sum, direct", q ** (2 * r), budget)
        tuples = _all_residues(q, r)
        binned = np.zeros(q, dtype=np.int64)
        for lo, hi in chunk_ranges(len(tuples), max(1, 2**20 // len(tuples))):
            x = np.repeat(tuples[lo:hi], len(tuples), axis=0)
            y = np.tile(tuples, (hi - lo, 1))
            vals = G.closed_form_array(x, y, d, variant) % q
            binned += np.bincount((vals @ a) % q, minlength=q)
    else:
        raise ValueError(f"unknown method {method!r}")
    ang = -2 * np.pi * np.arange(q) / q
    re = math.fsum(binned * np.cos(ang))
    im = math.fsum(binned * np.sin(ang))
    return complex(re, im) / q ** (2 * r)


def gauss_sum_table(q, d, r, variant="D", budget=None):
    """G(a/q) for every a in Z_q^{d+d'} at once (an FFT of the M table).

    Entries with gcd(a, q) > 1 hold the Gauss sum of the reduced fraction.
    """
    dim = G.index_set(d).size
    table = solution_table(q, d, r, variant, budget=budget).astype(np.float64)
    # flat index is little-endian in the coordinates; numpy reshape is
    # big-endian, so reverse axes to get [a1, ..., ak] ordering.
    cube = table.reshape((q,) * dim).transpose(tuple(reversed(range(dim))))
    return np.fft.fftn(cube) / float(q) ** (2 * r)


# -- local coefficients -------------------------------------------------------

def _exponent(d, r):
    return 2 * r - G.index_set(d).size


def _normalised_count(q, h, r, variant, budget):
    e = _exponent(h.d, r)
    return Fraction(count_solutions_mod(q, h, r, variant, budget=budget)) / Fraction(q) ** e


def coefficient_A(q, h, r, variant="D", method="count", budget=None):
    """A(q, h) = sum over reduced a/q of conj(G(a/q)) e(-h.a/q).

    ``count`` (default, exact): for prime powers
    A(p^v) = M(p^v)/p^{v e} - M(p^{v-1})/p^{(v-1) e} with e = 2r - d - d',
    extended multiplicatively over coprime factors.
    ``ramanujan`` (exact): q^{-2r} sum_x M(q, x) c_q(x - h) straight from the
    mod-q table, with c_q the several-variable Ramanujan sum; needs no
    factorisation of the modulus into coprime parts.
    ``complex``: the defining sum over Gauss sums, in floating point.
    """
    q = int(q)
    if q < 1:
        raise ValueError(f"modulus must be positive, got {q}")
    if isinstance(h, G.GroupElement):
        d = h.d
    else:
        d = h.d
    if q == 1:
        return Fraction(1) if method != "complex" else complex(1.0)
    if method == "count":
        out = Fraction(1)
        for p, v in factorize(q).items():
            hi = _normalised_count(p**v, h, r, variant, budget)
            lo = _normalised_count(p ** (v - 1), h, r, variant, budget)
            out *= hi - lo
        return out
    res = _residue_of(h, q)
    dim = G.index_set(d).size
    if method == "ramanujan":
        table = solution_table(q, d, r, variant, budget=budget)
        elems = _all_residues(q, dim)
        diff = (elems - np.array(res.coords, dtype=np.int64)) % q
        total = 0
        for e in divisors(q):
            mu = mobius(q // e)
            if mu == 0:
                continue
            mask = np.all(diff % e == 0, axis=1)
            total += mu * e**dim * int(table[mask].sum())
        return Fraction(total, q ** (2 * r))
    if method == "complex":
        gs = gauss_sum_table(q, d, r, variant, budget)
        elems = _all_residues(q, dim)
        prim = np.gcd.reduce(np.concatenate([elems, np.full((len(elems), 1), q)], axis=1), axis=1) == 1
        a = elems[prim]
        vals = gs[tuple(a.T)]
        phase = np.exp(-2j * np.pi * ((a @ np.array(res.coords, dtype=np.int64)) % q) / q)
        terms = np.conj(vals) * phase
        return complex(math.fsum(terms.real), math.fsum(terms.imag))
    raise ValueError(f"unknown method {method!r}")


@dataclass
class LocalFactorReport:
    """Truncated local factor B_n(p, h) = 1 + sum_{v<=n} A(p^v, h)."""

    p: int
    n: int
    h: tuple
    r: int
    A: dict = field(default_factory=dict)
    B: Fraction = Fraction(1)
    M: int = 1

    def to_dict(self):
        return {
            "p": self.p, "n": self.n, "h": list(self.h), "r": self.r,
            "A": {str(v): {"num": a.numerator, "den": a.denominator} for v, a in self.A.items()},
            "B": {"num": self.B.numerator, "den": self.B.denominator},
            "B_float": float(self.B),
            "M": str(self.M),
        }


def default_level(p, r, d=2, budget=None):
    """Largest n with p^{2nr} within the work budget (at least 1 when possible).

    The mod p^n table is built by convolution, so its cost r p^{2n} p^{n(d+d')}
    must fit the budget as well.
    """
    budget = DEFAULT_WORK_BUDGET if budget is None else budget
    n = 0
    while p ** (2 * (n + 1) * r) <= budget and _conv_cost(p ** (n + 1), d, r) <= budget:
        n += 1
    if n == 0:
        check_budget(f"local factor at p={p}", p ** (2 * r), budget)
    return n


def local_factor(p, h, r, n=None, variant="D", budget=None):
    if len(factorize(p)) != 1 or factorize(p).get(p) != 1:
        raise ValueError(f"{p} is not prime")
    if n is None:
        n = default_level(p, r, h.d, budget)
    if n < 1:
        raise ValueError("truncation level must be at least 1")
    coeffs = {v: coefficient_A(p**v, h, r, variant, "count", budget) for v in range(1, n + 1)}
    B = 1 + sum(coeffs.values(), Fraction(0))
    M = count_solutions_mod(p**n, h, r, variant, budget=budget)
    if B != Fraction(M) / Fraction(p) ** (n * _exponent(h.d, r)):
        raise AssertionError("local factor disagrees with the count identity")
    coords = h.coords if isinstance(h, G.GroupElement) else h.coords
    return LocalFactorReport(p=p, n=n, h=tuple(coords), r=r, A=coeffs, B=B, M=M)


# -- coset decomposition ------------------------------------------------------

def residue_decompose(g, Q):
    """Write g = b.h with b in [0, Q)^{d+d'} and h in Q.Z^{d+d'}."""
    Q = int(Q)
    if Q < 1:
        raise ValueError(f"Q must be positive, got {Q}")
    d = g.d
    b1 = [c % Q for c in g.lower]
    h1 = [c - b for c, b in zip(g.lower, b1)]
    lower = b1 + [0] * (len(g) - d)
    # R0(b1, h1) is a multiple of Q, so the central part of b is just g mod Q
    b = G.GroupElement(d, lower[:d] + [c % Q for c in g.central])
    h = G.multiply(G.inverse(b), g)
    assert all(c % Q == 0 for c in h.coords) and h.lower == tuple(h1)
    return b, h


def classical_gauss_sum(frac):
    """S(a/Q) = Q^{-1} sum over n in Z_Q of e(-(a1 n + ... + ad n^d)/Q)."""
    Q = frac.q
    a = frac.numer
    n = np.arange(Q, dtype=object)
    k = np.zeros(Q, dtype=object)
    for l, al in enumerate(a, start=1):
        k = k + al * n**l
    counts = np.bincount(np.array([int(v) % Q for v in k]), minlength=Q)
    ang = -2 * np.pi * np.arange(Q) / Q
    return complex(math.fsum(counts * np.cos(ang)), math.fsum(counts * np.sin(ang))) / Q


def classical_gauss_envelope(q, d):
    """max |S(a/q)| over a in Z_q^d with gcd(a, q) = 1.

    For each choice of (a_2, ..., a_d) the sum over a_1 is a DFT of
    n -> e(-(a_2 n^2 + ... + a_d n^d)/q), so the whole table costs
    q^{d-1} FFTs of length q.
    """
    n = np.arange(q, dtype=np.int64)
    pw = [n**l % q for l in range(2, d + 1)]
    best = 0.0
    for rest in product(range(q), repeat=d - 1):
        k = np.zeros(q, dtype=np.int64)
        for a, p in zip(rest, pw):
            k = (k + a * p) % q
        seq = np.exp(-2j * np.pi * k / q)
        # sum_n seq[n] e(-a1 n/q) for every a1 at once
        vals = np.abs(np.fft.fft(seq)) / q
        a1 = np.arange(q)
        g = np.gcd.reduce(np.stack([a1] + [np.full(q, a) for a in rest] + [np.full(q, q)]), axis=0)
        vals = vals[g == 1]
        if len(vals):
            best = max(best, float(vals.max()))
    return best

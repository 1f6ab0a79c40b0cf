"""Exact arithmetic in the free step-two nilpotent group G0(d).

Elements are integer vectors indexed by the pairs ``(l1, l2)`` with
``0 <= l2 < l1 <= d``. The flat layout puts the non-central block
``(1,0), (2,0), ..., (d,0)`` first, followed by the central block
``(l1, l2)``, ``l2 >= 1``, in lexicographic order. For ``d = 2`` this is
``(1,0), (2,0), (2,1)``.

The group law is

    [g.h]_{l1,0}  = g_{l1,0} + h_{l1,0}
    [g.h]_{l1,l2} = g_{l1,l2} + h_{l1,l2} + g_{l1,0} * h_{l2,0}      (l2 >= 1)

so the central block commutes with everything. All scalar operations use
Python integers; the ``*_array`` helpers are numpy versions for enumeration
loops and pick ``int64`` only when an a-priori bound proves it cannot overflow.
"""

from dataclasses import dataclass
from functools import cached_property, lru_cache
from numbers import Integral, Real

import numpy as np

__all__ = [
    "IndexSet", "index_set", "degree_from_dim",
    "GroupElement", "RealGroupElement",
    "identity", "multiply", "inverse", "dilate", "moment_curve",
    "iterated_product", "closed_form_product",
    "closed_form_array", "multiply_array", "inverse_array", "array_dtype_for",
    "parse_element",
]

VARIANTS = ("D", "Dt")
_INT64_SAFE = 2**62
_MANTISSA = 2**53


@dataclass(frozen=True)
class IndexSet:
    d: int

    def __post_init__(self):
        if not isinstance(self.d, Integral) or self.d < 1:
            raise ValueError(f"degree d must be a positive integer, got {self.d!r}")

    @cached_property
    def indices(self):
        lower = [(l1, 0) for l1 in range(1, self.d + 1)]
        upper = [(l1, l2) for l1 in range(1, self.d + 1) for l2 in range(1, l1)]
        return tuple(lower + upper)

    @cached_property
    def position(self):
        return {ix: k for k, ix in enumerate(self.indices)}

    @property
    def size(self):
        return self.d + self.d_central

    @property
    def d_central(self):
        return self.d * (self.d - 1) // 2

    @cached_property
    def weights(self):
        return tuple(l1 + l2 for l1, l2 in self.indices)

    @cached_property
    def homogeneous_dimension(self):
        return sum(self.weights)

    @cached_property
    def central_pairs(self):
        """Positions ``(k, k1, k2)``: central slot ``k`` receives ``g[k1] * h[k2]``."""
        pos = self.position
        return tuple((pos[(l1, l2)], pos[(l1, 0)], pos[(l2, 0)])
                     for l1, l2 in self.indices[self.d:])

    def is_central(self, ix):
        return ix[1] >= 1


@lru_cache(maxsize=None)
def index_set(d):
    return IndexSet(d)


def degree_from_dim(n):
    """Recover ``d`` from the group dimension ``d + d(d-1)/2``."""
    for d in range(1, n + 1):
        size = d + d * (d - 1) // 2
        if size == n:
            return d
        if size > n:
            break
    raise ValueError(f"{n} is not the dimension of any G0(d)")


def _as_int(v):
    if isinstance(v, bool) or not isinstance(v, Integral):
        raise TypeError(f"exact coordinates must be integers, got {v!r}")
    return int(v)


@dataclass(frozen=True)
class GroupElement:
    """An element of G0(d) with exact integer coordinates."""

    d: int
    coords: tuple

    def __post_init__(self):
        ixs = index_set(self.d)
        coords = tuple(_as_int(c) for c in self.coords)
        if len(coords) != ixs.size:
            raise ValueError(f"G0({self.d}) elements have {ixs.size} coordinates, got {len(coords)}")
        object.__setattr__(self, "coords", coords)

    @property
    def index_set(self):
        return index_set(self.d)

    def __getitem__(self, ix):
        if isinstance(ix, tuple):
            return self.coords[self.index_set.position[ix]]
        return self.coords[ix]

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    @property
    def lower(self):
        """The non-central block g^(1)."""
        return self.coords[:self.d]

    @property
    def central(self):
        """The central block g^(2)."""
        return self.coords[self.d:]

    def __mul__(self, other):
        return multiply(self, other)

    def inverse(self):
        return inverse(self)

    def is_identity(self):
        return not any(self.coords)

    def to_text(self):
        return f"d={self.d};[{','.join(str(c) for c in self.coords)}]"

    def __str__(self):
        return self.to_text()


@dataclass(frozen=True)
class RealGroupElement:
    """An element of the real group G0#(d) with floating coordinates.

    Kept apart from :class:`GroupElement` so exact and inexact values never mix
    silently.
    """

    d: int
    coords: tuple

    def __post_init__(self):
        ixs = index_set(self.d)
        coords = tuple(float(c) for c in self.coords)
        if len(coords) != ixs.size:
            raise ValueError(f"G0({self.d}) elements have {ixs.size} coordinates, got {len(coords)}")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def from_exact(cls, g):
        for c in g.coords:
            if abs(c) > _MANTISSA:
                raise OverflowError(f"coordinate {c} cannot be represented exactly as a float")
        return cls(g.d, tuple(float(c) for c in g.coords))

    def __getitem__(self, ix):
        if isinstance(ix, tuple):
            return self.coords[index_set(self.d).position[ix]]
        return self.coords[ix]

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __mul__(self, other):
        if not isinstance(other, RealGroupElement):
            return NotImplemented
        _check_same(self, other)
        return RealGroupElement(self.d, _mul_coords(self.d, self.coords, other.coords))

    def inverse(self):
        return RealGroupElement(self.d, _inv_coords(self.d, self.coords))


def _check_same(g, h):
    if g.d != h.d:
        raise ValueError(f"cannot combine elements of G0({g.d}) and G0({h.d})")


def _mul_coords(d, g, h):
    out = [a + b for a, b in zip(g, h)]
    for k, k1, k2 in index_set(d).central_pairs:
        out[k] += g[k1] * h[k2]
    return out


def _inv_coords(d, g):
    out = [-a for a in g]
    for k, k1, k2 in index_set(d).central_pairs:
        out[k] += g[k1] * g[k2]
    return out


def identity(d):
    return GroupElement(d, (0,) * index_set(d).size)


def multiply(g, h):
    if not (isinstance(g, GroupElement) and isinstance(h, GroupElement)):
        raise TypeError("multiply expects two exact GroupElements")
    _check_same(g, h)
    return GroupElement(g.d, _mul_coords(g.d, g.coords, h.coords))


def inverse(g):
    """g^{-1} = (-g^(1), -g^(2) + R0(g^(1), g^(1)))."""
    return GroupElement(g.d, _inv_coords(g.d, g.coords))


def dilate(lam, g):
    """Anisotropic dilation: coordinate ``(l1, l2)`` is scaled by ``lam**(l1+l2)``.

    A positive integer ``lam`` applied to an exact element stays exact; any
    other positive real (or a real element) yields a :class:`RealGroupElement`.
    """
    if isinstance(lam, bool) or not isinstance(lam, Real):
        raise TypeError(f"dilation factor must be real, got {lam!r}")
    if lam <= 0:
        raise ValueError(f"dilation factor must be positive, got {lam}")
    w = index_set(g.d).weights
    if isinstance(g, GroupElement) and isinstance(lam, Integral):
        lam = int(lam)
        return GroupElement(g.d, tuple(c * lam**k for c, k in zip(g.coords, w)))
    if isinstance(g, GroupElement):
        g = RealGroupElement.from_exact(g)
    lam = float(lam)
    return RealGroupElement(g.d, tuple(c * lam**k for c, k in zip(g.coords, w)))


def moment_curve(n, d):
    """A0(n) = (n, n^2, ..., n^d; 0)."""
    n = _as_int(n)
    ixs = index_set(d)
    return GroupElement(d, tuple(n**l1 if l2 == 0 else 0 for l1, l2 in ixs.indices))


def _check_variant(variant):
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")


def _check_pair(n, m):
    n, m = tuple(n), tuple(m)
    if len(n) != len(m):
        raise ValueError(f"tuples must have equal length, got {len(n)} and {len(m)}")
    if not n:
        raise ValueError("need at least one pair")
    return n, m


def iterated_product(n, m, d, variant="D"):
    """Multiply out the alternating product of moment-curve points literally.

    ``D``:  A0(n1)^-1 A0(m1) ... A0(nr)^-1 A0(mr)
    ``Dt``: A0(n1) A0(m1)^-1 ... A0(nr) A0(mr)^-1
    """
    _check_variant(variant)
    n, m = _check_pair(n, m)
    acc = identity(d)
    for a, b in zip(n, m):
        if variant == "D":
            acc = acc * inverse(moment_curve(a, d)) * moment_curve(b, d)
        else:
            acc = acc * moment_curve(a, d) * inverse(moment_curve(b, d))
    return acc


def closed_form_product(n, m, d, variant="D"):
    """Evaluate the explicit polynomial formula for D(n, m) (or its tilde twin)."""
    _check_variant(variant)
    n, m = _check_pair(n, m)
    n = [_as_int(v) for v in n]
    m = [_as_int(v) for v in m]
    if variant == "D":
        x, y = n, m
    else:
        x, y = m, n
    out = []
    for l1, l2 in index_set(d).indices:
        if l2 == 0:
            out.append(sum(b**l1 - a**l1 for a, b in zip(x, y)))
            continue
        # D: x=n, y=m, tail term x^{l1+l2} - x^{l1} y^{l2}.
        # Dt is D with the roles of the two tuples swapped in the increments
        # and tail y^{l1+l2} - x^{l1} y^{l2}, handled with n, m directly.
        u = [b**l1 - a**l1 for a, b in zip(x, y)]
        v = [b**l2 - a**l2 for a, b in zip(x, y)]
        acc, run = 0, 0
        for j in range(len(x)):
            acc += run * v[j]
            run += u[j]
        if variant == "D":
            acc += sum(a**(l1 + l2) - a**l1 * b**l2 for a, b in zip(n, m))
        else:
            acc += sum(b**(l1 + l2) - a**l1 * b**l2 for a, b in zip(n, m))
        out.append(acc)
    return GroupElement(d, out)


def parse_element(text, d=None):
    """Parse ``d=2;[1,3,0]`` (or a bare ``1,3,0`` when ``d`` is given)."""
    text = text.strip()
    if text.startswith("d="):
        head, _, body = text.partition(";")
        d_text = int(head[2:])
        if d is not None and d != d_text:
            raise ValueError(f"element has d={d_text}, expected d={d}")
        d = d_text
        text = body.strip()
    text = text.strip("[]() ")
    coords = [int(tok) for tok in text.split(",") if tok.strip()]
    if d is None:
        d = degree_from_dim(len(coords))
    return GroupElement(d, coords)


# -- numpy versions -----------------------------------------------------------

def array_dtype_for(bound):
    """``int64`` when every intermediate is provably below 2**62, else ``object``."""
    return np.int64 if bound < _INT64_SAFE else object


def closed_form_bound(radius, r, d):
    b = max(int(radius), 1)
    return 2 * r * r * b ** (2 * d - 1) + 2 * b ** (2 * d)


def closed_form_array(x, y, d, variant="D"):
    """Row-wise D(x, y) for arrays ``x, y`` of shape ``(M, r)``.

    Integer inputs are evaluated in ``int64`` when a bound rules out overflow
    and in Python integers (``object`` arrays) otherwise; float inputs stay
    float. Returns shape ``(M, d + d')``.
    """
    _check_variant(variant)
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape or x.ndim != 2:
        raise ValueError(f"x and y must have equal 2-d shapes, got {x.shape} and {y.shape}")
    r = x.shape[1]
    if np.issubdtype(x.dtype, np.floating) or np.issubdtype(y.dtype, np.floating):
        dtype = np.float64
    else:
        radius = 0
        if x.size:
            radius = max(int(np.abs(x).max()), int(np.abs(y).max()))
        dtype = array_dtype_for(closed_form_bound(radius, r, d))
    x = x.astype(dtype)
    y = y.astype(dtype)
    if variant == "Dt":
        xp_base, yp_base = y, x
    else:
        xp_base, yp_base = x, y
    top = 2 * d
    px = [np.ones_like(x)]
    py = [np.ones_like(y)]
    for _ in range(1, top):
        px.append(px[-1] * xp_base)
        py.append(py[-1] * yp_base)
    ixs = index_set(d)
    out = np.empty((x.shape[0], ixs.size), dtype=dtype)
    incr = {l: py[l] - px[l] for l in range(1, d + 1)}
    for k, (l1, l2) in enumerate(ixs.indices):
        if l2 == 0:
            out[:, k] = incr[l1].sum(axis=1)
            continue
        u = incr[l1]
        v = incr[l2]
        prefix = np.cumsum(u, axis=1) - u
        cross = (prefix * v).sum(axis=1)
        # tail uses the original (n, m) roles: D -> n^{l1+l2} - n^{l1} m^{l2},
        # Dt -> m^{l1+l2} - n^{l1} m^{l2}
        if variant == "D":
            tail = px[l1 + l2] - px[l1] * py[l2]
        else:
            tail = px[l1 + l2] - py[l1] * px[l2]
        out[:, k] = cross + tail.sum(axis=1)
    return out


def multiply_array(g, h, d):
    """Row-wise product of coordinate arrays (broadcasting allowed)."""
    g = np.asarray(g)
    h = np.asarray(h)
    out = g + h
    for k, k1, k2 in index_set(d).central_pairs:
        out[..., k] = out[..., k] + g[..., k1] * h[..., k2]
    return out


def inverse_array(g, d):
    g = np.asarray(g)
    out = -g
    for k, k1, k2 in index_set(d).central_pairs:
        out[..., k] = out[..., k] + g[..., k1] * g[..., k2]
    return out

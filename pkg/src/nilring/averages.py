"""Convolution operators on G0 restricted to finite boxes.

A ``BoxFunction`` is a finitely supported function on G0(d) stored as a pair
of arrays (coordinates, values) together with a scale B: its support lies in
the weighted box |x_{l1 l2}| <= B^{l1+l2}. Convolving with a kernel of scale
B' gives a function of scale B + B', since the group law never leaves that
box. No periodisation is involved.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import group as G
from .errors import PreconditionError, check_budget
from .waring import eta0

__all__ = [
    "BoxFunction", "delta", "convolve", "convolve_at", "moment_kernel",
    "smoothed_average", "maximal_function", "MaximalResult", "variation_seminorm",
    "variation_seminorm_batch", "rademacher_menshov_check", "rademacher_menshov_batch",
    "CZKernel", "default_cz_kernel", "check_calderon_zygmund", "singular_operator",
    "young_bound_holds",
]


class BoxFunction:
    """Finitely supported complex function on G0(d)."""

    def __init__(self, d, coords, values, scale=None):
        self.d = d
        dim = G.index_set(d).size
        coords = np.asarray(coords, dtype=np.int64).reshape(-1, dim)
        values = np.asarray(values, dtype=complex).ravel()
        if len(coords) != len(values):
            raise ValueError("coordinates and values differ in length")
        if len(coords):
            uniq, inv = np.unique(coords, axis=0, return_inverse=True)
            inv = inv.ravel()
            vals = np.bincount(inv, weights=values.real, minlength=len(uniq)) \
                + 1j * np.bincount(inv, weights=values.imag, minlength=len(uniq))
            keep = vals != 0
            coords, values = uniq[keep], vals[keep]
        self.coords = coords
        self.values = values
        need = self.minimal_scale()
        if scale is None:
            scale = need
        elif need > scale:
            raise ValueError(f"support leaves the box of scale {scale}")
        self.scale = int(scale)

    @classmethod
    def from_dict(cls, d, mapping, scale=None):
        items = list(mapping.items())
        dim = G.index_set(d).size
        coords = [tuple(k.coords if isinstance(k, G.GroupElement) else k) for k, _ in items]
        return cls(d, np.array(coords, dtype=np.int64).reshape(-1, dim), [v for _, v in items], scale)

    def minimal_scale(self):
        """Smallest integer B with every |x_{l1 l2}| <= B^{l1+l2} on the support."""
        if not len(self.coords):
            return 0
        w = np.array(G.index_set(self.d).weights, dtype=float)
        mags = np.abs(self.coords).astype(float).max(axis=0)
        B = int(math.ceil(float(np.max(mags ** (1.0 / w))) - 1e-9))
        while any(int(m) > B**int(k) for m, k in zip(mags, w)):
            B += 1
        return B

    def __len__(self):
        return len(self.values)

    def to_dict(self):
        return {tuple(int(c) for c in row): complex(v) for row, v in zip(self.coords, self.values)}

    def __call__(self, x):
        x = tuple(x.coords if isinstance(x, G.GroupElement) else x)
        return self.to_dict().get(tuple(int(c) for c in x), 0j)

    def norm(self, p=2):
        a = np.abs(self.values)
        if p == math.inf:
            return float(a.max()) if len(a) else 0.0
        return math.fsum(a**p) ** (1.0 / p)

    def total(self):
        return complex(math.fsum(self.values.real), math.fsum(self.values.imag))

    def allclose(self, other, tol=1e-12):
        a, b = self.to_dict(), other.to_dict()
        keys = set(a) | set(b)
        return all(abs(a.get(k, 0) - b.get(k, 0)) <= tol for k in keys)

    def to_jsonl(self):
        lines = []
        for row, v in zip(self.coords, self.values):
            lines.append(json.dumps([int(c) for c in row] + [v.real, v.imag]))
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_jsonl(cls, d, text, scale=None):
        dim = G.index_set(d).size
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        coords = np.array([r[:dim] for r in rows], dtype=np.int64).reshape(-1, dim)
        vals = [complex(r[dim], r[dim + 1]) for r in rows]
        return cls(d, coords, vals, scale)


def delta(d, at=None):
    at = G.identity(d) if at is None else at
    coords = at.coords if isinstance(at, G.GroupElement) else tuple(at)
    return BoxFunction(d, [coords], [1.0])


def convolve(f, K, budget=None):
    """(f * K)(x) = sum_y f(y^{-1} x) K(y), i.e. (f * K)(y z) += f(z) K(y)."""
    if f.d != K.d:
        raise ValueError("functions live on different groups")
    d = f.d
    check_budget("convolution", len(f) * len(K), budget)
    if not len(f) or not len(K):
        return BoxFunction(d, np.zeros((0, G.index_set(d).size)), [], f.scale + K.scale)
    y = K.coords[:, None, :]
    z = f.coords[None, :, :]
    pts = G.multiply_array(np.broadcast_to(y, (len(K), len(f), y.shape[2])).copy(), z, d)
    vals = K.values[:, None] * f.values[None, :]
    return BoxFunction(d, pts.reshape(-1, pts.shape[-1]), vals.ravel(), f.scale + K.scale)


def convolve_at(f, K, x):
    """(f * K)(x) from the second form: sum_z f(z) K(x z^{-1})."""
    x = G.GroupElement(f.d, tuple(x.coords if isinstance(x, G.GroupElement) else x))
    Kd = K.to_dict()
    total = 0j
    for z, v in f.to_dict().items():
        total += v * Kd.get((x * G.GroupElement(f.d, z).inverse()).coords, 0j)
    return total


def _chi(name):
    if callable(name):
        return name
    if name in (None, "eta0", "bump"):
        return eta0
    raise ValueError(f"unknown cutoff {name!r}")


def moment_kernel(d, weights):
    """sum over n of weights[n] times the point mass at A0(n)."""
    ns = sorted(weights)
    coords = [G.moment_curve(n, d).coords for n in ns]
    scale = max((abs(n) for n in ns), default=0)
    coords = np.array(coords, dtype=np.int64).reshape(len(ns), G.index_set(d).size)
    return BoxFunction(d, coords, [weights[n] for n in ns], scale)


def _average_kernel(d, N, chi):
    chi = _chi(chi)
    top = int(math.floor(2 * N))
    ns = np.arange(-top, top + 1)
    w = np.asarray(chi(ns / N), dtype=float) / N
    return moment_kernel(d, {int(n): float(v) for n, v in zip(ns, w) if v != 0})


def smoothed_average(f, N, chi=None, budget=None):
    """M_N f(x) = sum_n N^-1 chi(n/N) f(A0(n)^{-1} x), i.e. f * G_N."""
    return convolve(f, _average_kernel(f.d, N, chi), budget)


@dataclass
class MaximalResult:
    function: BoxFunction
    ratio: float
    scales: list = field(default_factory=list)

    def to_dict(self):
        return {"scales": list(self.scales), "ratio": self.ratio, "support": len(self.function),
                "l2": self.function.norm(2)}


def maximal_function(f, scales, chi=None, budget=None):
    """Pointwise sup over k in ``scales`` of |f * K_k|, K_k the average at scale 2^k."""
    scales = list(scales)
    if not scales:
        raise ValueError("need at least one scale")
    best = {}
    scale = f.scale
    for k in scales:
        g = smoothed_average(f, 2**k, chi, budget)
        scale = max(scale, g.scale)
        for key, v in g.to_dict().items():
            a = abs(v)
            if a > best.get(key, 0.0):
                best[key] = a
    out = BoxFunction.from_dict(f.d, best, scale)
    nf = f.norm(2)
    return MaximalResult(out, out.norm(2) / nf if nf else 0.0, scales)


# -- variation ----------------------------------------------------------------

def variation_seminorm_batch(a, rho):
    """V^rho along the last axis of ``a`` for a batch of sequences.

    best[j] is the largest sum of |increments|^rho over increasing index
    chains ending at j; chains can be extended one step at a time, so the
    recursion best[j] = max_{i<j} best[i] + |a_j - a_i|^rho is exact for
    every rho >= 1.
    """
    if rho < 1:
        raise ValueError("rho must be at least 1")
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        a = a[None, :]
    n = a.shape[-1]
    best = np.zeros(a.shape, dtype=float)
    for j in range(1, n):
        inc = np.abs(a[..., j:j + 1] - a[..., :j]) ** rho
        best[..., j] = np.max(best[..., :j] + inc, axis=-1)
    return best.max(axis=-1) ** (1.0 / rho)


def variation_seminorm(a, rho):
    a = np.asarray(a, dtype=complex).ravel()
    if len(a) < 2:
        return 0.0
    return float(variation_seminorm_batch(a, rho)[0])


def _rm_indices(j0, m):
    out = []
    for i in range(m + 1):
        lo = -(-j0 // 2**i)
        out.append([(j * 2**i, (j + 1) * 2**i) for j in range(lo, 2 ** (m - i))])
    return out


def rademacher_menshov_check(a, j0, m, rho=2.0):
    """Both sides of the Rademacher-Menshov inequality for a_{j0}, ..., a_{2^m}."""
    if rho < 2:
        raise ValueError("the inequality is stated for rho >= 2")
    if not 0 <= j0 < 2**m:
        raise ValueError("need 0 <= j0 < 2^m")
    a = np.asarray(a, dtype=complex).ravel()
    if len(a) <= 2**m:
        raise IndexError(f"sequence needs indices up to 2^m = {2**m}")
    lhs = variation_seminorm(a[j0:2**m + 1], rho)
    rhs = math.sqrt(2) * sum(
        math.sqrt(math.fsum(abs(a[hi] - a[lo]) ** 2 for lo, hi in lvl)) for lvl in _rm_indices(j0, m))
    return lhs, rhs, lhs <= rhs * (1 + 1e-12)


def rademacher_menshov_batch(a, j0, m, rho=2.0):
    """Vectorised check over rows of ``a``; ``j0`` may be an array."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    j0 = np.broadcast_to(np.asarray(j0), (n,))
    lhs = np.empty(n)
    rhs = np.zeros(n)
    for start in np.unique(j0):
        sel = j0 == start
        sub = a[sel]
        lhs[sel] = variation_seminorm_batch(sub[:, start:2**m + 1], rho)
        acc = np.zeros(int(sel.sum()))
        for lvl in _rm_indices(int(start), m):
            if lvl:
                lo = np.array([p[0] for p in lvl])
                hi = np.array([p[1] for p in lvl])
                acc += np.sqrt((np.abs(sub[:, hi] - sub[:, lo]) ** 2).sum(axis=1))
        rhs[sel] = math.sqrt(2) * acc
    return lhs, rhs, lhs <= rhs * (1 + 1e-12)


# -- singular operator ---------------------------------------------------------

@dataclass
class CZKernel:
    fn: object
    deriv: object = None
    name: str = "custom"

    def __call__(self, t):
        return self.fn(np.asarray(t, dtype=float))


def default_cz_kernel(c=0.4):
    """The odd kernel c t / (1 + t^2); c = 0.4 keeps both kernel bounds below 1."""
    return CZKernel(lambda t: c * t / (1 + t * t), lambda t: c * (1 - t * t) / (1 + t * t) ** 2,
                    f"{c}*t/(1+t^2)")


def check_calderon_zygmund(K, R, step=1.0 / 64):
    """Sample-grid check of the kernel bounds on [-R, R].

    Returns (sup of (1+|t|)|K| + (1+|t|)^2 |K'|, sup over N <= R of |int_{-N}^N K|).
    """
    from scipy.integrate import cumulative_trapezoid

    t = np.arange(-R, R + step / 2, step)
    k = K(t)
    dk = K.deriv(t) if K.deriv is not None else np.gradient(k, t)
    pointwise = float(np.max((1 + np.abs(t)) * np.abs(k) + (1 + np.abs(t)) ** 2 * np.abs(dk)))
    F = cumulative_trapezoid(k, t, initial=0.0)
    mid = len(t) // 2
    integral = float(np.max(np.abs(F[mid:] - F[mid::-1][: len(F) - mid])))
    return pointwise, integral


def singular_operator(f, K=None, R=16, check=True, budget=None):
    """H f(g) = sum_{|n| <= R} K(n) f(A0(n)^{-1} g), with the l^2 ratio.

    Raises PreconditionError when the kernel fails the numeric bounds.
    """
    K = default_cz_kernel() if K is None else K
    if check:
        pw, integ = check_calderon_zygmund(K, R)
        if pw > 1 + 1e-9 or integ > 1 + 1e-9:
            raise PreconditionError(
                f"kernel fails the Calderon-Zygmund bounds on [-{R}, {R}]: "
                f"pointwise sup {pw:.6g}, truncated integral {integ:.6g}")
    ns = np.arange(-R, R + 1)
    w = K(ns)
    kern = moment_kernel(f.d, {int(n): float(v) for n, v in zip(ns, w) if v != 0})
    out = convolve(f, kern, budget)
    nf = f.norm(2)
    return out, (out.norm(2) / nf if nf else 0.0)


def young_bound_holds(f, K, tol=1e-12):
    """||f * K||_2 <= ||f||_2 ||K||_1."""
    lhs = convolve(f, K).norm(2)
    return lhs <= f.norm(2) * K.norm(1) * (1 + tol) + tol

"""Exponential sums and oscillatory integrals with the phase D(n, m).

``weyl_sum`` splits the 2r variables into two halves and uses that the phase
of a product U.V is additive except for the bilinear term R0(U, V), which only
sees a few coordinates of each half. Aggregating each half over those
coordinates turns the (2P+1)^{2r} sum into a small matrix contraction.

The continuum integrals over [-1, 1]^{2r} are estimated by Monte Carlo in
fixed-size batches, each drawn from its own Philox stream keyed by
``(seed, batch index)``. Batch sums are combined in a fixed binary tree, so a
result depends on ``(seed, samples)`` only.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import group as G
from ._parallel import chunk_ranges, ordered_map, tree_reduce
from .errors import check_budget

__all__ = [
    "WeightFunction", "SumResult", "MCResult", "DensityEstimate",
    "compensated_sum", "weyl_sum", "classical_weyl_sum",
    "oscillatory_integral", "singular_integral_phi", "solution_volume_density",
    "tensor_grid_integral", "cube_range_bound",
]

MC_BATCH = 1 << 16


def compensated_sum(values):
    """Correctly rounded sum of a complex array (``math.fsum`` per component)."""
    values = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(values.real), math.fsum(values.imag))


def _bump(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
    return out


@dataclass(frozen=True)
class WeightFunction:
    """Cut-off applied to each summation variable.

    ``indicator`` is 1 on [-P, P]. ``smooth_bump`` is a quarter of the standard
    C-infinity bump rescaled to [-P, P], so that two such weights together
    respect |phi| + |psi| <= 1 and total variation <= 1.
    """

    kind: str
    P: int

    def __post_init__(self):
        if self.kind not in ("indicator", "smooth_bump"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.P < 1:
            raise ValueError("support radius must be at least 1")

    def __call__(self, n):
        n = np.asarray(n, dtype=float)
        if self.kind == "indicator":
            return (np.abs(n) <= self.P).astype(float)
        return 0.25 * _bump(n / self.P)


@dataclass
class SumResult:
    value: complex
    P: int
    r: int
    theta: tuple
    variant: str = "D"

    @property
    def normalized(self):
        return abs(self.value) / float(self.P) ** (2 * self.r)

    def to_dict(self):
        return {
            "value": [self.value.real, self.value.imag],
            "P": self.P, "r": self.r,
            "theta": [str(t) if isinstance(t, Fraction) else t for t in self.theta],
            "variant": self.variant,
            "normalized": self.normalized,
        }


def _theta_array(theta):
    return np.array([float(t) for t in theta], dtype=float)


def _phase_dot(coords, theta):
    """(coords . theta) mod 1, reducing each product separately."""
    out = np.zeros(coords.shape[0])
    for k, t in enumerate(theta):
        if t != 0.0:
            out += np.mod(coords[:, k].astype(float) * t, 1.0)
    return out


def _half_sums(P, k, d, theta, weight, variant, lkeys, threads=None):
    """Per-key sums of w(n,m) e(-D_k(n,m).theta) over one half of the variables.

    Returns ``(keys, sums)`` with ``keys`` the distinct rows of the lower-block
    coordinates listed in ``lkeys``.
    """
    vals = np.arange(-P, P + 1, dtype=np.int64)
    wv = weight(vals)
    keep = wv != 0
    vals, wv = vals[keep], wv[keep]
    n_tuples = len(vals) ** (2 * k)
    total_rows = n_tuples
    # enumerate tuples of 2k variables in base len(vals)
    base = len(vals)

    def block(bounds):
        lo, hi = bounds
        idx = np.arange(lo, hi, dtype=np.int64)
        digits = np.stack([(idx // base**j) % base for j in range(2 * k)], axis=1)
        z = vals[digits]
        w = np.prod(wv[digits], axis=1)
        coords = G.closed_form_array(z[:, :k], z[:, k:], d, variant)
        ph = _phase_dot(coords, theta)
        terms = w * np.exp(-2j * np.pi * ph)
        if not lkeys:
            return np.zeros((1, 0), dtype=np.int64), np.array([compensated_sum(terms)])
        keys = coords[:, lkeys].astype(np.int64)
        if dense is not None:
            lo_k, span = dense
            flat = np.ravel_multi_index(tuple((keys - lo_k).T), span)
            s = np.bincount(flat, weights=terms.real, minlength=int(np.prod(span))) \
                + 1j * np.bincount(flat, weights=terms.imag, minlength=int(np.prod(span)))
            return None, s
        uniq, inv = np.unique(keys, axis=0, return_inverse=True)
        inv = inv.ravel()
        s = np.bincount(inv, weights=terms.real, minlength=len(uniq)) \
            + 1j * np.bincount(inv, weights=terms.imag, minlength=len(uniq))
        return uniq, s

    # small key spaces are aggregated into a dense array instead of sorting
    dense = None
    if lkeys:
        bound = np.array([2 * k * P ** G.index_set(d).indices[j][0] for j in lkeys], dtype=np.int64)
        span = tuple(int(2 * b + 1) for b in bound)
        if math.prod(span) <= 1 << 22:
            dense = (-bound, span)
    parts = ordered_map(block, chunk_ranges(total_rows, 1 << 18), threads)
    if dense is not None:
        lo_k, span = dense
        total = parts[0][1]
        for p in parts[1:]:
            total = total + p[1]
        nz = np.flatnonzero(total)
        keys = np.stack(np.unravel_index(nz, span), axis=1).astype(np.int64) + lo_k
        return keys, total[nz]
    keys = np.concatenate([p[0] for p in parts], axis=0)
    sums = np.concatenate([p[1] for p in parts])
    if not lkeys:
        return keys[:1], np.array([compensated_sum(sums)])
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.ravel()
    out = np.bincount(inv, weights=sums.real, minlength=len(uniq)) \
        + 1j * np.bincount(inv, weights=sums.imag, minlength=len(uniq))
    return uniq, out


def weyl_sum(P, r, theta, weights=None, variant="D", method="mim", budget=None, threads=None):
    """S_{P,r}(theta) = sum over n, m in Z^r of e(-D(n,m).theta) prod phi(n_j) psi(m_j).

    ``weights`` defaults to the indicator of [-P, P] for every variable.
    ``method="direct"`` enumerates all (2P+1)^{2r} terms.
    """
    theta_in = tuple(theta)
    d = G.degree_from_dim(len(theta_in))
    theta = _theta_array(theta_in)
    weight = weights if weights is not None else WeightFunction("indicator", P)
    ixs = G.index_set(d)
    if method == "direct" or r == 1:
        check_budget("Weyl sum, direct", (2 * P + 1) ** (2 * r), budget)
        keys, sums = _half_sums(P, r, d, theta, weight, variant, [], threads)
        return SumResult(complex(sums[0]), P, r, theta_in, variant)
    if method != "mim":
        raise ValueError(f"unknown method {method!r}")
    r1 = r // 2
    r2 = r - r1
    check_budget("Weyl sum, meet in the middle", (2 * P + 1) ** (2 * r2), budget)
    cross = [(k, k1, k2) for k, k1, k2 in ixs.central_pairs if theta[k] != 0.0]
    lkeys = sorted({k1 for _, k1, _ in cross})
    rkeys = sorted({k2 for _, _, k2 in cross})
    ukeys, usum = _half_sums(P, r1, d, theta, weight, variant, lkeys, threads)
    vkeys, vsum = _half_sums(P, r2, d, theta, weight, variant, rkeys, threads)
    if not cross:
        return SumResult(complex(usum.sum() * vsum.sum()), P, r, theta_in, variant)
    lpos = {k: i for i, k in enumerate(lkeys)}
    rpos = {k: i for i, k in enumerate(rkeys)}
    partial = []
    for lo, hi in chunk_ranges(len(ukeys), max(1, (1 << 22) // max(1, len(vkeys)))):
        ph = np.zeros((hi - lo, len(vkeys)))
        for k, k1, k2 in cross:
            prod = np.outer(ukeys[lo:hi, lpos[k1]].astype(float), vkeys[:, rpos[k2]].astype(float))
            ph += np.mod(prod * theta[k], 1.0)
        block = (usum[lo:hi, None] * np.exp(-2j * np.pi * ph)) @ vsum
        partial.append(compensated_sum(block))
    return SumResult(compensated_sum(partial), P, r, theta_in, variant)


def classical_weyl_sum(P, theta, weight=None):
    """sum over n of phi_P(n) e(-(theta_1 n + ... + theta_d n^d)).

    Rational ``theta`` given as ``Fraction`` entries is reduced mod 1 exactly.
    """
    weight = weight if weight is not None else WeightFunction("indicator", P)
    n = np.arange(-P, P + 1)
    w = weight(n)
    if all(isinstance(t, (Fraction, int)) for t in theta):
        q = math.lcm(*[Fraction(t).denominator for t in theta])
        a = [int(Fraction(t) * q) for t in theta]
        k = [sum(al * int(v) ** l for l, al in enumerate(a, start=1)) % q for v in n]
        ph = np.array(k, dtype=float) / q
    else:
        ph = np.zeros(len(n))
        for l, t in enumerate(theta, start=1):
            ph += np.mod(n.astype(float) ** l * float(t), 1.0)
    return compensated_sum(w * np.exp(-2j * np.pi * ph))


# -- Monte Carlo --------------------------------------------------------------

@dataclass
class MCResult:
    value: complex
    stderr: float
    samples: int
    seed: int

    def to_dict(self):
        return {"value": [self.value.real, self.value.imag], "stderr": self.stderr,
                "samples": self.samples, "seed": self.seed}


@dataclass
class DensityEstimate:
    value: float
    stderr: float
    hits: int
    samples: int
    seed: int
    eps: float
    resolved: bool
    certified_empty: bool = False

    def to_dict(self):
        return dict(self.__dict__)


def _stream(seed, i):
    ss = np.random.SeedSequence(seed, spawn_key=(i,))
    return np.random.Generator(np.random.Philox(ss))


def _sample_D(rng, size, r, d, variant):
    z = rng.uniform(-1.0, 1.0, size=(size, 2 * r))
    return G.closed_form_array(z[:, :r], z[:, r:], d, variant)


def _mc(stat, samples, seed, threads):
    sizes = [hi - lo for lo, hi in chunk_ranges(samples, MC_BATCH)]
    parts = ordered_map(lambda it: stat(_stream(seed, it[0]), it[1]), list(enumerate(sizes)), threads)
    return tree_reduce(lambda a, b: tuple(x + y for x, y in zip(a, b)), parts)


def _phase_integral(vec, r, sign, variant, samples, seed, threads):
    if samples < 1000:
        raise ValueError("Monte Carlo needs at least 1000 samples")
    vec = _theta_array(vec)
    d = G.degree_from_dim(len(vec))

    def stat(rng, size):
        D = _sample_D(rng, size, r, d, variant)
        ph = sign * 2 * np.pi * (D @ vec)
        c, s = np.cos(ph), np.sin(ph)
        return (math.fsum(c), math.fsum(s), math.fsum(c * c), math.fsum(s * s))

    sc, ss, scc, sss = _mc(stat, samples, seed, threads)
    n = samples
    vol = 2.0 ** (2 * r)
    mean = complex(sc, ss) / n
    var = max(scc / n - mean.real**2, 0.0) + max(sss / n - mean.imag**2, 0.0)
    return MCResult(vol * mean, vol * math.sqrt(var / (n - 1)), samples, seed)


def oscillatory_integral(beta, r, variant="D", samples=100_000, seed=0, threads=None):
    """Integral of e(-D(x,y).beta) over [-1,1]^{2r}, by Monte Carlo."""
    return _phase_integral(beta, r, -1.0, variant, samples, seed, threads)


def singular_integral_phi(xi, r, variant="D", samples=100_000, seed=0, threads=None):
    """Phi(xi): integral of e(+D(z,w).xi) over [-1,1]^{2r}, by Monte Carlo."""
    return _phase_integral(xi, r, 1.0, variant, samples, seed, threads)


def cube_range_bound(r, d):
    """Coordinate-wise bound on |D(z, w)| for (z, w) in [-1, 1]^{2r}."""
    return np.array([2.0 * r if l2 == 0 else 2.0 * r * (r - 1) + 2.0 * r
                     for _, l2 in G.index_set(d).indices])


def solution_volume_density(t, r, eps, samples=1_000_000, seed=0, variant="D", threads=None):
    """(2 eps)^{-(d+d')} vol{(z,w) in [-1,1]^{2r} : |D(z,w)_i - t_i| <= eps for all i}.

    As eps -> 0 this tends to the Fourier integral of Phi against e(-t.zeta),
    wherever that limit exists. Zero hits inside the attainable range is
    reported as unresolved rather than as a zero density.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    t = _theta_array(t)
    d = G.degree_from_dim(len(t))
    dim = len(t)
    if np.any(np.abs(t) > cube_range_bound(r, d) + eps):
        return DensityEstimate(0.0, 0.0, 0, samples, seed, eps, True, True)

    def stat(rng, size):
        D = _sample_D(rng, size, r, d, variant)
        return (int(np.all(np.abs(D - t) <= eps, axis=1).sum()),)

    (hits,) = _mc(stat, samples, seed, threads)
    p = hits / samples
    scale = 2.0 ** (2 * r) / (2.0 * eps) ** dim
    stderr = scale * math.sqrt(p * (1 - p) / samples)
    return DensityEstimate(scale * p, stderr, hits, samples, seed, eps, hits > 0)


def tensor_grid_integral(beta, r, nodes=400, variant="D", sign=-1.0):
    """Gauss-Legendre tensor quadrature of e(sign * D.beta) over [-1,1]^{2r}.

    Only practical for r = 1; used as an independent check on Monte Carlo.
    """
    beta = _theta_array(beta)
    d = G.degree_from_dim(len(beta))
    x, w = np.polynomial.legendre.leggauss(nodes)
    grids = np.meshgrid(*([x] * (2 * r)), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    wts = np.ones(len(pts))
    for g in np.meshgrid(*([w] * (2 * r)), indexing="ij"):
        wts = wts * g.ravel()
    D = G.closed_form_array(pts[:, :r], pts[:, r:], d, variant)
    return compensated_sum(wts * np.exp(sign * 2j * np.pi * (D @ beta)))

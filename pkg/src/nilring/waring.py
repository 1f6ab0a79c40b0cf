"""Exact representation counts S_{r,N}(g) and their circle-method assembly.

``count_representations`` counts (n, m) in [-N, N]^{2r} with D(n, m) = g.
``arc_split`` cuts the torus integral representing that count into a
neighbourhood of rationals with small denominator and its complement.
``singular_series`` and ``predict_count`` build the main-term prediction
from the local factors and the solution-volume density.
"""

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import gamma, jv

from . import group as G
from . import residue as R
from . import weyl as W
from ._parallel import chunk_ranges, ordered_map
from .errors import PreconditionError, check_budget

__all__ = [
    "eta0", "count_representations", "representation_histogram", "ArcSplit",
    "arc_split", "SingularSeriesEstimate", "singular_series", "CountReport",
    "predict_count", "residue_class_scan", "scan_to_csv", "default_delta",
]

DISJOINT_TOL = 1e-3


def _as_element(g, d=None):
    if isinstance(g, G.GroupElement):
        return g
    if isinstance(g, str):
        return G.parse_element(g, d)
    coords = tuple(int(c) for c in g)
    return G.GroupElement(G.degree_from_dim(len(coords)), coords)


# -- exact counts -------------------------------------------------------------

def _tuples(N, k):
    """All of [-N, N]^k as an int64 array, lexicographic."""
    vals = np.arange(-N, N + 1, dtype=np.int64)
    grids = np.meshgrid(*([vals] * k), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1) if k else np.zeros((1, 0), np.int64)


def _row_keys(arr):
    if arr.dtype == object:
        return [tuple(int(c) for c in row) for row in arr]
    arr = np.ascontiguousarray(arr, dtype=np.int64)
    return [row.tobytes() for row in arr]


def _half_products(N, k, d, variant):
    z = _tuples(N, 2 * k)
    return G.closed_form_array(z[:, :k], z[:, k:], d, variant)


def _count_direct(g, r, N, variant, threads):
    d = g.d
    target = np.array(g.coords, dtype=object)
    base = 2 * N + 1
    total = base ** (2 * r)
    vals = np.arange(-N, N + 1, dtype=np.int64)

    def block(bounds):
        lo, hi = bounds
        idx = np.arange(lo, hi, dtype=np.int64)
        z = vals[np.stack([(idx // base**j) % base for j in range(2 * r)], axis=1)]
        D = G.closed_form_array(z[:, :r], z[:, r:], d, variant)
        tgt = target.astype(D.dtype) if D.dtype != object else target
        return int(np.all(D == tgt, axis=1).sum())

    return sum(ordered_map(block, chunk_ranges(total, 1 << 18), threads))


def _count_mim(g, r, N, variant):
    d = g.d
    r1 = r // 2
    r2 = r - r1
    U = _half_products(N, r1, d, variant)
    V = _half_products(N, r2, d, variant)
    # u.v = g  <=>  v = u^{-1}.g
    if U.dtype == object or V.dtype == object:
        U = U.astype(object)
        V = V.astype(object)
        tg = np.array(g.coords, dtype=object)
    else:
        bound = max(int(np.abs(U).max()), int(np.abs(V).max()), max(abs(c) for c in g.coords), 1)
        if 4 * bound * bound >= 2**62:
            U, V = U.astype(object), V.astype(object)
            tg = np.array(g.coords, dtype=object)
        else:
            tg = np.array(g.coords, dtype=np.int64)
    targets = G.multiply_array(G.inverse_array(U, d), tg[None, :], d)
    if V.dtype == object:
        vc = {}
        for k in _row_keys(V):
            vc[k] = vc.get(k, 0) + 1
        tc = {}
        for k in _row_keys(targets):
            tc[k] = tc.get(k, 0) + 1
    else:
        vu, vn = np.unique(V, axis=0, return_counts=True)
        tu, tn = np.unique(targets, axis=0, return_counts=True)
        vc = dict(zip(_row_keys(vu), vn.tolist()))
        tc = dict(zip(_row_keys(tu), tn.tolist()))
    return sum(n * vc.get(k, 0) for k, n in tc.items())


def count_representations(g, r, N, strategy="meet_in_middle", variant="D", budget=None, threads=None):
    """Number of (n, m) in [-N, N]^{2r} with D(n, m) = g. Exact."""
    g = _as_element(g)
    if r < 1 or N < 1:
        raise ValueError("r and N must be positive")
    base = 2 * N + 1
    if strategy == "direct":
        check_budget("direct count", base ** (2 * r), budget)
        return _count_direct(g, r, N, variant, threads)
    if strategy in ("meet_in_middle", "mim"):
        if r == 1:
            check_budget("direct count", base**2, budget)
            return _count_direct(g, r, N, variant, threads)
        check_budget("meet-in-the-middle count", 2 * base ** (2 * (r - r // 2)), budget)
        return _count_mim(g, r, N, variant)
    raise ValueError(f"unknown strategy {strategy!r}")


def representation_histogram(r, N, d=2, variant="D", budget=None, threads=None):
    """Every value of D on [-N, N]^{2r} with its multiplicity.

    Returns ``(values, counts)``: int64 arrays of shape (k, d+d') and (k,).
    """
    base = 2 * N + 1
    check_budget("representation histogram", base ** (2 * r), budget)
    if G.closed_form_bound(N, r, d) >= 2**62:
        raise PreconditionError("histogram values would overflow int64")
    total = base ** (2 * r)
    vals = np.arange(-N, N + 1, dtype=np.int64)

    def block(bounds):
        lo, hi = bounds
        idx = np.arange(lo, hi, dtype=np.int64)
        z = vals[np.stack([(idx // base**j) % base for j in range(2 * r)], axis=1)]
        D = G.closed_form_array(z[:, :r], z[:, r:], d, variant)
        return np.unique(D, axis=0, return_counts=True)

    parts = ordered_map(block, chunk_ranges(total, 1 << 18), threads)
    keys = np.concatenate([p[0] for p in parts])
    cnts = np.concatenate([p[1] for p in parts])
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    counts = np.bincount(inv.ravel(), weights=cnts, minlength=len(uniq)).astype(np.int64)
    return uniq, counts


# -- major / minor arcs -------------------------------------------------------

def _psi(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def eta0(s):
    """Smooth even cutoff: 1 on [-1, 1], 0 outside [-2, 2], C-infinity.

    The transition is psi(2-|s|) / (psi(2-|s|) + psi(|s|-1)) with
    psi(t) = exp(-1/t) for t > 0.
    """
    s = np.abs(np.asarray(s, dtype=float))
    a = _psi(2.0 - s)
    b = _psi(s - 1.0)
    den = np.where(a + b > 0, a + b, 1.0)
    return np.where(s <= 1.0, 1.0, np.where(s >= 2.0, 0.0, a / den))


def _radial_ft(rho, n, nodes=400):
    """Fourier transform of x -> eta0(|x|) on R^n at radius ``rho`` (vectorised).

    Uses the Hankel form 2 pi rho^{1-n/2} int_0^2 eta0(s) J_{n/2-1}(2 pi rho s) s^{n/2} ds
    with Gauss-Legendre nodes on [0, 1] and [1, 2] separately.
    """
    x, w = np.polynomial.legendre.leggauss(nodes)
    s = np.concatenate([(x + 1) / 2, 1 + (x + 1) / 2])
    ws = np.concatenate([w / 2, w / 2]) * eta0(s)
    rho = np.asarray(rho, dtype=float)
    uniq, inv = np.unique(rho.ravel(), return_inverse=True)
    res = np.empty(len(uniq))
    nu = n / 2 - 1
    zero = uniq == 0
    if zero.any():
        res[zero] = 2 * math.pi ** (n / 2) / gamma(n / 2) * float((ws * s ** (n - 1)).sum())
    pos = np.flatnonzero(~zero)
    for lo, hi in chunk_ranges(len(pos), 4096):
        rr = uniq[pos[lo:hi], None]
        res[pos[lo:hi]] = (
            2 * np.pi * rr[:, 0] ** (-nu) * (ws * jv(nu, 2 * np.pi * rr * s) * s ** (n / 2)).sum(axis=1))
    return res[inv.ravel()].reshape(rho.shape)


def default_delta(d):
    return (10.0 * d) ** -4


def _major_fractions(N, delta, dim):
    qmax = int(math.floor(N**delta + 1e-12))
    return list(R.fractions_up_to(qmax, dim))


def _check_disjoint(fracs, N, delta, d):
    """Every pair of arcs (including lattice translates) at scaled distance >= 4."""
    w = np.array(G.index_set(d).weights, dtype=float)
    scale = N**w / N**delta
    pts = np.array([f.as_floats() for f in fracs], dtype=float)
    worst = math.inf
    for i in range(len(pts)):
        diff = pts - pts[i]
        diff = diff - np.round(diff)
        # the same arc against its own translates: nearest is one unit step
        own = float(scale.min())
        dist = np.sqrt(((diff * scale) ** 2).sum(axis=1))
        dist[i] = own
        worst = min(worst, float(dist.min()))
    if worst < 4.0 - DISJOINT_TOL:
        raise PreconditionError(
            f"major arcs overlap at N={N}, delta={delta}: scaled separation {worst:.6f} < 4")
    return worst


@dataclass
class ArcSplit:
    N: int
    r: int
    g: tuple
    delta: float
    count: int
    s_maj: float
    s_min: float
    s_min_method: str
    partition_residual: float
    s_maj_refinement: float
    s_maj_grid: float = None
    grid_shape: tuple = None
    n_fractions: int = 1
    separation: float = None
    notes: list = field(default_factory=list)

    @property
    def normalization(self):
        d = G.degree_from_dim(len(self.g))
        return float(self.N) ** (2 * self.r - G.index_set(d).homogeneous_dimension)

    def to_dict(self):
        out = dict(self.__dict__)
        out["g"] = list(self.g)
        out["grid_shape"] = list(self.grid_shape) if self.grid_shape else None
        out["normalization"] = self.normalization
        return out


def _s_maj(values, counts, g, N, delta, fracs, d, nodes):
    w = np.array(G.index_set(d).weights, dtype=float)
    dim = len(w)
    k = (values - np.array(g.coords, dtype=np.int64)).astype(float)
    omega = k * (N**delta / N**w)
    jac = float(np.prod(N**delta / N**w))
    ft = _radial_ft(np.sqrt((omega**2).sum(axis=1)), dim, nodes)
    cnt = counts.astype(float)
    total = []
    for f in fracs:
        a = np.array(f.numer, dtype=np.int64)
        ph = ((values - np.array(g.coords, dtype=np.int64)) @ a) % f.q
        terms = cnt * ft * np.exp(2j * np.pi * ph / f.q)
        total.append(W.compensated_sum(terms))
    return jac * W.compensated_sum(total)


def _required_grid(values, g, N, delta, d):
    w = np.array(G.index_set(d).weights, dtype=float)
    span = np.abs(values - np.array(g.coords, dtype=np.int64)).max(axis=0)
    guard = np.ceil(20 * N**w / N**delta).astype(np.int64)
    need = np.maximum(2 * span + 1, span + guard + 1)
    return tuple(int(v) for v in need)


def _grid_split(values, counts, g, N, delta, fracs, d, shape):
    """Riemann sums of F.Xi and F.(1-Xi) over a uniform torus grid.

    F(xi) = sum_h c(h) e((h-g).xi) is evaluated exactly at grid points by
    FFT, one slice of the first axis at a time.
    """
    w = np.array(G.index_set(d).weights, dtype=float)
    scale = N**w / N**delta
    k = values - np.array(g.coords, dtype=np.int64)
    dim = len(w)
    coef = np.zeros(shape[1:] + (shape[0],), dtype=complex)
    idx = tuple((k[:, j] % shape[j]) for j in range(1, dim)) + (k[:, 0] % shape[0],)
    np.add.at(coef, idx, counts.astype(float))
    # move the first axis to the end so slices along it are contiguous
    axes = [np.arange(m) / m for m in shape]
    tails = np.meshgrid(*axes[1:], indexing="ij")
    maj, mnr = [], []
    freq0 = np.fft.fftfreq(shape[0], 1.0 / shape[0])
    for i0, x0 in enumerate(axes[0]):
        slab = (coef * np.exp(2j * np.pi * freq0 * x0)).sum(axis=-1)
        F = np.fft.ifftn(slab) * slab.size
        xi = np.zeros(tails[0].shape)
        for f in fracs:
            a = np.array(f.as_floats())
            acc = ((x0 - a[0] + 0.5) % 1.0 - 0.5) ** 2 * scale[0] ** 2
            for j in range(1, dim):
                acc = acc + (((tails[j - 1] - a[j] + 0.5) % 1.0 - 0.5) * scale[j]) ** 2
            xi = xi + eta0(np.sqrt(acc))
        maj.append(W.compensated_sum(F * xi))
        mnr.append(W.compensated_sum(F * (1.0 - xi)))
    vol = float(np.prod(shape))
    return W.compensated_sum(maj) / vol, W.compensated_sum(mnr) / vol


def arc_split(g, r, N, delta=None, grid="auto", variant="D", nodes=400, budget=None, threads=None):
    """Major/minor arc decomposition of S_{r,N}(g).

    S_maj is computed from the exact histogram of D-values: each frequency
    contributes c(h) e((h-g).a/q) times the Fourier transform of the radial
    cutoff, a one-dimensional Hankel integral. S_min is a Riemann sum on a
    uniform torus grid large enough to resolve every frequency plus a guard
    band for the cutoff; when that grid exceeds the budget S_min is taken as
    count - S_maj and ``s_min_method`` says so.
    """
    g = _as_element(g)
    d = g.d
    delta = default_delta(d) if delta is None else float(delta)
    if not 0 < delta <= default_delta(d) * (1 + 1e-12):
        raise PreconditionError(f"delta must lie in (0, (10d)^-4], got {delta}")
    if N < 2:
        raise PreconditionError("arc split needs N >= 2")
    dim = G.index_set(d).size
    fracs = _major_fractions(N, delta, dim)
    sep = _check_disjoint(fracs, N, delta, d)
    values, counts = representation_histogram(r, N, d, variant, budget, threads)
    gi = np.array(g.coords, dtype=np.int64)
    hit = np.all(values == gi, axis=1)
    count = int(counts[hit].sum())
    s_maj = _s_maj(values, counts, g, N, delta, fracs, d, nodes)
    s_maj_fine = _s_maj(values, counts, g, N, delta, fracs, d, 2 * nodes)
    notes = []
    need = _required_grid(values, g, N, delta, d)
    if grid == "auto":
        shape = need
    elif grid is None:
        shape = None
    else:
        shape = tuple(int(m) for m in grid)
        if len(shape) != dim:
            raise ValueError(f"grid needs {dim} axis sizes")
        short = [j for j in range(dim) if shape[j] < need[j]]
        if short:
            msg = (f"grid {shape} is coarser than the required {need}; aliasing error is "
                   f"bounded by the total mass {(2 * N + 1) ** (2 * r)} times the cutoff "
                   f"transform beyond the resolved band")
            warnings.warn(msg)
            notes.append(msg)
    s_maj_grid = None
    budget_val = 10**8 if budget is None else budget
    if shape is not None and math.prod(shape) <= budget_val:
        s_maj_grid, s_min_c = _grid_split(values, counts, g, N, delta, fracs, d, shape)
        s_min = s_min_c.real
        method = "grid"
        s_maj_grid = s_maj_grid.real
    else:
        s_min = count - s_maj.real
        method = "derived"
        notes.append("torus grid over budget; S_min = count - S_maj")
    return ArcSplit(
        N=N, r=r, g=tuple(g.coords), delta=delta, count=count, s_maj=s_maj.real, s_min=s_min,
        s_min_method=method, partition_residual=s_maj.real + s_min - count,
        s_maj_refinement=abs(s_maj_fine - s_maj), s_maj_grid=s_maj_grid,
        grid_shape=shape if method == "grid" else None, n_fractions=len(fracs),
        separation=sep, notes=notes,
    )


# -- singular series ----------------------------------------------------------

def _primes_upto(n):
    return [p for p in range(2, n + 1) if all(p % k for k in range(2, int(p**0.5) + 1))]


@dataclass
class SingularSeriesEstimate:
    g: tuple
    r: int
    qmax: int
    levels: dict
    euler: Fraction
    fraction_sum: complex
    terms: dict
    envelope_exponent: float
    envelope_constant: float
    tail_bound: float

    @property
    def euler_value(self):
        return float(self.euler)

    @property
    def discrepancy(self):
        return abs(self.euler_value - self.fraction_sum.real)

    @property
    def relative_discrepancy(self):
        e = self.euler_value
        return self.discrepancy / abs(e) if e else (0.0 if self.discrepancy == 0 else math.inf)

    @property
    def agrees(self):
        return self.discrepancy <= max(1e-6, self.tail_bound)

    def to_dict(self):
        return {
            "g": list(self.g), "r": self.r, "qmax": self.qmax,
            "levels": {str(p): n for p, n in self.levels.items()},
            "euler": {"num": str(self.euler.numerator), "den": str(self.euler.denominator)},
            "euler_value": self.euler_value,
            "fraction_sum": [self.fraction_sum.real, self.fraction_sum.imag],
            "terms": {str(q): [a.real, a.imag] for q, a in self.terms.items()},
            "envelope_exponent": self.envelope_exponent,
            "envelope_constant": self.envelope_constant,
            "tail_bound": self.tail_bound,
            "discrepancy": self.discrepancy,
            "relative_discrepancy": self.relative_discrepancy,
        }


def _gauss_envelope(qmax, d, r, variant, budget):
    """Largest |G(a/q)| over reduced a/q, for each 2 <= q <= qmax."""
    dim = G.index_set(d).size
    env = {}
    for q in range(2, qmax + 1):
        gs = R.gauss_sum_table(q, d, r, variant, budget)
        elems = R._all_residues(q, dim)
        prim = np.gcd.reduce(np.concatenate([elems, np.full((len(elems), 1), q)], axis=1), axis=1) == 1
        env[q] = float(np.abs(gs[tuple(elems[prim].T)]).max())
    return env


def _tail_bound(env, dim, qmax):
    """Fit |G| <= C q^{-alpha} to the measured envelope and bound the q-tail.

    |A(q)| <= q^{d+d'} max|G(./q)|, so the tail is at most
    C sum_{q > qmax} q^{dim - alpha}; infinite unless alpha > dim + 1.
    """
    qs = np.array(sorted(env), dtype=float)
    vals = np.array([env[int(q)] for q in qs])
    if len(qs) < 2 or np.any(vals <= 0):
        return 0.0, math.inf, math.inf
    alpha = -np.polyfit(np.log(qs), np.log(vals), 1)[0]
    C = float(np.max(vals * qs**alpha))
    s = dim - alpha
    if s >= -1:
        return float(alpha), C, math.inf
    # integral comparison: sum_{q > Q} q^s <= Q^{s+1} / (-(s+1)) + Q^s
    tail = C * (qmax ** (s + 1) / (-(s + 1)) + qmax**s)
    return float(alpha), C, float(tail)


def singular_series(g, r, qmax=6, variant="D", budget=None):
    """Truncated singular series by two routes.

    Euler path: prod over primes p <= qmax of B_n(p, g) with n the largest
    level having p^n <= qmax (exact rational). Fraction path: the sum of the
    complex coefficients A(q, g) over q <= qmax. The paths differ by terms
    with q > qmax, which ``tail_bound`` estimates from the measured Gauss-sum
    envelope.
    """
    g = _as_element(g)
    d = g.d
    dim = G.index_set(d).size
    levels = {}
    euler = Fraction(1)
    for p in _primes_upto(qmax):
        n = int(math.floor(math.log(qmax) / math.log(p) + 1e-12))
        while p ** (n + 1) <= qmax:
            n += 1
        while p**n > qmax:
            n -= 1
        levels[p] = n
        euler *= R.local_factor(p, g, r, n, variant, budget).B
    terms = {q: complex(R.coefficient_A(q, g, r, variant, "complex", budget)) for q in range(1, qmax + 1)}
    fsum = W.compensated_sum(list(terms.values()))
    env = _gauss_envelope(qmax, d, r, variant, budget)
    alpha, C, tail = _tail_bound(env, dim, qmax)
    return SingularSeriesEstimate(tuple(g.coords), r, qmax, levels, euler, fsum, terms, alpha, C, tail)


# -- prediction ---------------------------------------------------------------

@dataclass
class CountReport:
    d: int
    r: int
    N: int
    g: tuple
    count: int
    normalization: float
    singular_series: float
    singular_series_detail: dict
    density: float
    density_stderr: float
    density_half_eps: float
    density_half_eps_stderr: float
    density_stable: bool
    eps: float
    samples: int
    seed: int
    prediction: float
    prediction_stderr: float

    @property
    def normalized_count(self):
        if self.count is None:
            return None
        return self.count / self.normalization

    @property
    def relative_residual(self):
        if self.count is None:
            return None
        if self.prediction == 0:
            return 0.0 if self.count == 0 else math.inf
        return abs(self.normalized_count - self.prediction) / abs(self.prediction)

    def to_dict(self):
        out = dict(self.__dict__)
        out["g"] = list(self.g)
        out["normalized_count"] = self.normalized_count
        out["relative_residual"] = self.relative_residual
        return out


def predict_count(g, r, N, eps=0.05, samples=1_000_000, seed=0, qmax=6, exact=True,
                  variant="D", budget=None, threads=None):
    """Compare S_{r,N}(g) / N^{2r-Q} with (singular series) x (density at N^-1 o g).

    The density is the box-kernel solution volume at t = N^-1 o g; it is also
    evaluated at eps/2 and ``density_stable`` records whether the two agree
    within four combined standard errors.
    """
    g = _as_element(g)
    d = g.d
    ixs = G.index_set(d)
    norm = float(N) ** (2 * r - ixs.homogeneous_dimension)
    ss = singular_series(g, r, qmax, variant, budget)
    sval = ss.euler_value
    t = G.dilate(1.0 / N, g)
    dens = W.solution_volume_density(t.coords, r, eps, samples, seed, variant, threads)
    half = W.solution_volume_density(t.coords, r, eps / 2, samples, seed, variant, threads)
    stable = abs(dens.value - half.value) <= 4 * math.hypot(dens.stderr, half.stderr) and half.resolved
    count = count_representations(g, r, N, "meet_in_middle", variant, budget, threads) if exact else None
    return CountReport(
        d=d, r=r, N=N, g=tuple(g.coords), count=count, normalization=norm,
        singular_series=sval, singular_series_detail=ss.to_dict(),
        density=dens.value, density_stderr=dens.stderr,
        density_half_eps=half.value, density_half_eps_stderr=half.stderr,
        density_stable=bool(stable), eps=eps, samples=samples, seed=seed,
        prediction=sval * dens.value, prediction_stderr=abs(sval) * dens.stderr,
    )


# -- residue classes ----------------------------------------------------------

def residue_class_scan(Q, r, N, d=2, window=0.5, variant="D", budget=None, threads=None):
    """Normalized counts of S_{r,N}(g) grouped by the class of g modulo Q.

    The classes of G0 modulo the subgroup Q Z^{d+d'} are indexed by g mod Q.
    For every class the table gives the total normalized mass and, over the
    window |g_{l1 l2}| <= window * N^{l1+l2}, the number of points, how many
    are represented, and the minimum and mean normalized count.
    """
    if not 1 <= Q <= 6:
        raise PreconditionError("residue class scan needs 1 <= Q <= 6")
    ixs = G.index_set(d)
    dim = ixs.size
    norm = float(N) ** (2 * r - ixs.homogeneous_dimension)
    values, counts = representation_histogram(r, N, d, variant, budget, threads)
    lim = np.floor(window * float(N) ** np.array(ixs.weights)).astype(np.int64)
    check_budget("residue class window", int(np.prod(2 * lim + 1)), budget)
    lookup = dict(zip(_row_keys(values), counts.tolist()))
    cls_of = R._encode(values, Q)
    mass = np.bincount(cls_of, weights=counts.astype(float), minlength=Q**dim)
    win = np.stack(np.meshgrid(*[np.arange(-m, m + 1) for m in lim], indexing="ij"), -1).reshape(-1, dim)
    wc = np.array([lookup.get(k, 0) for k in _row_keys(win)], dtype=float) / norm
    wcls = R._encode(win, Q)
    rows = []
    for c in range(Q**dim):
        sel = wcls == c
        b = [int((c // Q**j) % Q) for j in range(dim)]
        vals = wc[sel]
        rows.append({
            "class": b,
            "total_count": int(round(mass[c])),
            "normalized_mass": float(mass[c] / norm),
            "window_points": int(sel.sum()),
            "window_positive": int((vals > 0).sum()),
            "window_min": float(vals.min()) if len(vals) else None,
            "window_mean": float(vals.mean()) if len(vals) else None,
        })
    return rows


def scan_to_csv(rows):
    buf = io.StringIO()
    cols = ["class", "total_count", "normalized_mass", "window_points", "window_positive",
            "window_min", "window_mean"]
    wr = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    wr.writeheader()
    for row in rows:
        out = dict(row)
        out["class"] = " ".join(str(c) for c in row["class"])
        wr.writerow(out)
    return buf.getvalue()

"""Acceptance criteria 1-10.

Each test records one PASS/FAIL line through the ``acceptance`` fixture and
then asserts, so a failing criterion shows up both in the summary section and
as a red test.
"""
import itertools
import math
import random
import time
from fractions import Fraction

import numpy as np

from nilring import averages as A
from nilring import cli
from nilring import group as G
from nilring import jacobian as J
from nilring import residue as R
from nilring import waring as WR
from nilring import weyl as W


def el(*c):
    return G.GroupElement(G.degree_from_dim(len(c)), c)


def literal_products(pts, d, variant):
    """Vectorised oracle: multiply the moment-curve factors one at a time."""
    n, m = pts[:, : pts.shape[1] // 2], pts[:, pts.shape[1] // 2 :]
    k = G.index_set(d).size
    acc = np.zeros((len(pts), k), dtype=np.int64)
    lower = [l1 for l1, l2 in G.index_set(d).indices if l2 == 0]

    def curve(col):
        out = np.zeros((len(pts), k), dtype=np.int64)
        for i, l in enumerate(lower):
            out[:, i] = col**l
        return out

    for j in range(n.shape[1]):
        a, b = curve(n[:, j]), curve(m[:, j])
        if variant == "D":
            acc = G.multiply_array(G.multiply_array(acc, G.inverse_array(a, d), d), b, d)
        else:
            acc = G.multiply_array(G.multiply_array(acc, a, d), G.inverse_array(b, d), d)
    return acc


def test_criterion_01_group_axioms(acceptance):
    t0 = time.perf_counter()
    failures = 0
    small = [el(*c) for c in itertools.product((-1, 0, 1), repeat=3)]
    e = G.identity(2)
    for g in small:
        failures += not (g * e == g == e * g)
        failures += not (g * g.inverse()).is_identity()
        for h in small:
            gh = g * h
            for k in small:
                failures += gh * k != g * (h * k)
    rng = random.Random(0)
    for _ in range(10_000):
        d = rng.choice((2, 3))
        size = G.index_set(d).size
        g, h, k = (G.GroupElement(d, [rng.randint(-10**12, 10**12) for _ in range(size)]) for _ in range(3))
        failures += (g * h) * k != g * (h * k)
        failures += not (g * g.inverse()).is_identity()
        lam = rng.choice((1, 2, 3, 5, 7))
        failures += G.dilate(lam, g * h) != G.dilate(lam, g) * G.dilate(lam, h)
        n = rng.randint(-10**5, 10**5)
        failures += G.dilate(lam, G.moment_curve(n, d)) != G.moment_curve(lam * n, d)
    dt = time.perf_counter() - t0
    ok = failures == 0 and dt < 5
    acceptance(1, ok, f"failures={failures} time={dt:.2f}s (limit 5s)")
    assert ok


def test_criterion_02_closed_form(acceptance):
    t0 = time.perf_counter()
    failures = 0
    checked = 0
    for d in (2, 3):
        for r in (1, 2, 3):
            pts = np.array(list(itertools.product(range(-3, 4), repeat=2 * r)), dtype=np.int64)
            for variant in G.VARIANTS:
                fast = G.closed_form_array(pts[:, :r], pts[:, r:], d, variant)
                lit = literal_products(pts, d, variant)
                failures += int((fast != lit).any(axis=1).sum())
                checked += len(pts)
                # scalar paths on a sample, exact Python integers
                for row in pts[:: max(1, len(pts) // 200)]:
                    n, m = tuple(int(v) for v in row[:r]), tuple(int(v) for v in row[r:])
                    failures += G.closed_form_product(n, m, d, variant) != G.iterated_product(n, m, d, variant)
    dt = time.perf_counter() - t0
    ok = failures == 0 and dt < 60
    acceptance(2, ok, f"pairs={checked} failures={failures} time={dt:.1f}s (limit 60s)")
    assert ok


def test_criterion_03_local_counts(acceptance):
    t0 = time.perf_counter()
    r = 2
    bad = []
    for q in range(1, 9):
        if int(R.solution_table(q, 2, r).sum()) != q ** (2 * r):
            bad.append(("mass", q))
    e = 2 * r - 3
    for p in (2, 3):
        for n in (1, 2):
            q = p**n
            t = R.solution_table(q, 2, r)
            for idx in range(q**3):
                h = el(idx % q, idx // q % q, idx // q**2)
                B = 1 + sum((R.coefficient_A(p**j, h, r, method="ramanujan") for j in range(1, n + 1)), Fraction(0))
                if B != Fraction(int(t[idx])) / Fraction(q) ** e:
                    bad.append(("B", p, n, h.coords))
    rng = random.Random(11)
    for _ in range(20):
        h = el(*[rng.randint(-1000, 1000) for _ in range(3)])
        for q1, q2 in ((2, 3), (2, 5), (3, 5)):
            lhs = R.coefficient_A(q1 * q2, h, r, method="ramanujan")
            if lhs != R.coefficient_A(q1, h, r, method="ramanujan") * R.coefficient_A(q2, h, r, method="ramanujan"):
                bad.append(("mult", q1, q2, h.coords))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 120
    acceptance(3, ok, f"violations={len(bad)} time={dt:.1f}s (limit 120s)")
    assert ok, bad[:5]


def test_criterion_04_counting(acceptance):
    t0 = time.perf_counter()
    bad = []
    if WR.count_representations((0, 0, 0), 1, 1) != 3:
        bad.append("S11")
    _, counts = WR.representation_histogram(2, 2)
    if int(counts.sum()) != 5**4:
        bad.append("mass")
    for N in (1, 2, 3, 4):
        for g in itertools.product((-1, 0, 1), repeat=3):
            if WR.count_representations(g, 2, N) != WR.count_representations(g, 2, N, strategy="direct"):
                bad.append(("mim", N, g))
    for N in (1, 2, 3):
        if WR.count_representations((1, 0, 0), 2, N) != 0:
            bad.append(("parity", N))
    if R.local_factor(2, el(1, 0, 0), 2, n=1).B != 0:
        bad.append("B2")
    dt = time.perf_counter() - t0
    ok = not bad and dt < 120
    acceptance(4, ok, f"violations={len(bad)} time={dt:.1f}s (limit 120s)")
    assert ok, bad[:5]


def test_criterion_05_arc_split(acceptance):
    t0 = time.perf_counter()
    delta = 20.0**-4
    a = WR.arc_split((0, 0, 0), 2, 4, delta=delta)
    tol = 1e-6 * 9**4
    partition_ok = a.s_min_method == "grid" and abs(a.partition_residual) <= tol
    b = WR.arc_split((0, 0, 0), 2, 8, delta=delta)
    n4 = abs(a.s_min) / a.normalization
    n8 = abs(b.s_min) / b.normalization
    dt = time.perf_counter() - t0
    ok = partition_ok and n8 < n4 and dt < 600
    acceptance(5, ok, f"residual(N=4)={a.partition_residual:.2e} <= {tol:.2e}: {partition_ok}; "
                      f"|S_min|/N^(2r-6): N=4 {n4:.1f}, N=8 {n8:.1f} ({b.s_min_method}); time={dt:.0f}s")
    assert ok


def test_criterion_06_assembly(acceptance):
    t0 = time.perf_counter()
    reps = {N: WR.predict_count((0, 0, 0), 3, N, samples=1_000_000, seed=0, qmax=6) for N in (4, 8)}
    ss = WR.singular_series((0, 0, 0), 3, 6)
    res = {N: rep.relative_residual for N, rep in reps.items()}
    dt = time.perf_counter() - t0
    within = res[8] <= 0.25
    shrinks = res[8] < res[4]
    paths = ss.relative_discrepancy <= 1e-3
    ok = within and shrinks and paths and dt < 1200
    acceptance(6, ok, f"residual N=4 {res[4]:.3f}, N=8 {res[8]:.3f} (<=0.25: {within}, shrinks: {shrinks}); "
                      f"series euler={ss.euler_value:.3f} fractions={ss.fraction_sum.real:.3f} "
                      f"rel={ss.relative_discrepancy:.3f}; time={dt:.0f}s")
    assert ok


def test_criterion_07_jacobian(acceptance):
    t0 = time.perf_counter()
    bad = []
    if J.rank(J.jacobian_at((0, 0), (1, 2))) != 3:
        bad.append("witness")
    z0, w0 = J.nonsingular_zero(2, 2, witness=((0, 0), (1, 2)))
    if (z0, w0) != ((0, 0, 2, 1), (1, 2, 0, 0)):
        bad.append(("zero", z0, w0))
    if not G.closed_form_product(z0, w0, 2).is_identity() or J.rank(J.jacobian_at(z0, w0)) != 3:
        bad.append("zero props")
    rng = random.Random(7)
    for _ in range(1000):
        r = rng.randint(1, 4)
        d = rng.choice((2, 3))
        n = tuple(rng.randint(-50, 50) for _ in range(r))
        m = tuple(rng.randint(-50, 50) for _ in range(r))
        for variant in G.VARIANTS:
            if not G.closed_form_product(n + m[::-1], m + n[::-1], d, variant).is_identity():
                bad.append(("telescope", n, m))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 10
    acceptance(7, ok, f"violations={len(bad)} time={dt:.1f}s (limit 10s)")
    assert ok, bad[:5]


def test_criterion_08_weyl_decay(acceptance):
    t0 = time.perf_counter()
    theta = (0.0, 0.0, (math.sqrt(5) - 1) / 2)
    vals = [abs(W.weyl_sum(P, 3, theta).value) / float(P) ** 6 for P in (4, 8, 16, 32)]
    decreasing = all(a > b for a, b in zip(vals, vals[1:]))
    primes = [p for p in range(2, 102) if R.factorize(p) == {p: 1}]
    env = [R.classical_gauss_envelope(p, 2) for p in primes]
    monotone = all(b <= a + 1e-12 for a, b in zip(env, env[1:]))
    dt = time.perf_counter() - t0
    ok = decreasing and monotone and dt < 600
    acceptance(8, ok, "normalised |S_P| " + ", ".join(f"{v:.4g}" for v in vals)
               + f"; envelope non-increasing over {len(primes)} primes: {monotone}; time={dt:.0f}s")
    assert ok


def _rand_box(rng, n, B, d=2):
    w = np.array(G.index_set(d).weights)
    c = np.stack([rng.integers(-B**k, B**k + 1, n) for k in w], axis=1)
    return A.BoxFunction(d, c, rng.integers(-5, 6, n) + 1j * rng.integers(-5, 6, n))


def test_criterion_09_averages(acceptance):
    t0 = time.perf_counter()
    bad = []
    rng = np.random.default_rng(0)
    for _ in range(20):
        f, K1, K2 = _rand_box(rng, 5, 2), _rand_box(rng, 4, 2), _rand_box(rng, 3, 1)
        # integer values, so both groupings must agree exactly
        if not A.convolve(f, A.delta(2)).allclose(f, 0) or not A.convolve(A.delta(2), f).allclose(f, 0):
            bad.append("unit")
        if not A.convolve(A.convolve(f, K1), K2).allclose(A.convolve(f, A.convolve(K1, K2)), 0):
            bad.append("assoc")
    rng = np.random.default_rng(1)
    for _ in range(1000):
        if not A.young_bound_holds(_rand_box(rng, 6, 2), _rand_box(rng, 4, 2)):
            bad.append("young")
    ratios = [A.maximal_function(A.delta(2), range(0, k + 1)).ratio for k in range(0, 7)]
    growth = [b / a for a, b in zip(ratios, ratios[1:])]
    if max(growth) >= 1.1:
        bad.append(("maximal", growth))
    rng = np.random.default_rng(2)
    fails = 0
    for _ in range(10):
        a = rng.normal(size=(10_000, 17)) + 1j * rng.normal(size=(10_000, 17))
        j0 = rng.integers(0, 16, 10_000)
        fails += int((~A.rademacher_menshov_batch(a, j0, 4)[2]).sum())
    if fails:
        bad.append(("rm", fails))
    seqs = rng.normal(size=(1000, 12))
    v = np.stack([A.variation_seminorm_batch(seqs, rho) for rho in (1, 1.5, 2, 3, 6)])
    if not (np.diff(v, axis=0) <= 1e-12).all():
        bad.append("monotone")
    dt = time.perf_counter() - t0
    ok = not bad and dt < 600
    acceptance(9, ok, f"violations={len(bad)} max octave growth={max(growth):.4f} time={dt:.1f}s")
    assert ok, bad[:5]


def test_criterion_10_reproducibility(acceptance, tmp_path):
    runs = [
        ["weyl", "--kind", "integral", "--r", "3", "--theta", "0,0,2", "--samples", "1000000", "--seed", "0"],
        ["count", "--r", "3", "--N", "4", "--g", "0,0,0"],
    ]
    same = True
    for i, argv in enumerate(runs):
        files = []
        for threads in (1, 4):
            path = tmp_path / f"run{i}_{threads}.json"
            assert cli.main(argv + ["--threads", str(threads), "--out", str(path)]) == 0
            files.append(path.read_bytes())
        same &= files[0] == files[1]
    acceptance(10, same, f"byte-identical across thread counts 1 and 4: {same}")
    assert same

import math

import numpy as np
import pytest

from nilring import averages as A
from nilring import group as G
from nilring.errors import PreconditionError


def rand_box(rng, n, B, d=2):
    w = np.array(G.index_set(d).weights)
    c = np.stack([rng.integers(-B**k, B**k + 1, n) for k in w], axis=1)
    return A.BoxFunction(d, c, rng.normal(size=n) + 1j * rng.normal(size=n))


def brute_convolve(f, K):
    out = {}
    for y, kv in K.to_dict().items():
        for z, fv in f.to_dict().items():
            x = (G.GroupElement(f.d, y) * G.GroupElement(f.d, z)).coords
            out[x] = out.get(x, 0) + fv * kv
    return out


def test_units():
    rng = np.random.default_rng(0)
    f = rand_box(rng, 8, 2)
    assert A.convolve(f, A.delta(2)).allclose(f)
    assert A.convolve(A.delta(2), f).allclose(f)


def test_convolution_forms_and_oracle():
    rng = np.random.default_rng(1)
    f, K = rand_box(rng, 6, 2), rand_box(rng, 5, 2)
    g = A.convolve(f, K)
    ref = brute_convolve(f, K)
    assert all(abs(g(k) - v) < 1e-12 for k, v in ref.items())
    for x in list(ref)[:10]:
        assert abs(A.convolve_at(f, K, x) - ref[x]) < 1e-12
    assert g.scale <= f.scale + K.scale


def test_associativity():
    rng = np.random.default_rng(2)
    f, K1, K2 = rand_box(rng, 5, 2), rand_box(rng, 4, 2), rand_box(rng, 3, 1)
    assert A.convolve(A.convolve(f, K1), K2).allclose(A.convolve(f, A.convolve(K1, K2)), 1e-9)


def test_young():
    rng = np.random.default_rng(3)
    for _ in range(100):
        assert A.young_bound_holds(rand_box(rng, 6, 2), rand_box(rng, 4, 2))


def test_smoothed_average():
    N = 3
    m = A.smoothed_average(A.delta(2), N)
    for n in range(-7, 8):
        expect = float(A.eta0(n / N)) / N
        assert abs(m(G.moment_curve(n, 2)) - expect) < 1e-15
    rng = np.random.default_rng(4)
    f = rand_box(rng, 10, 2)
    f = A.BoxFunction(2, f.coords, np.abs(f.values))
    out = A.smoothed_average(f, 2)
    assert np.all(out.values.real >= 0) and np.all(out.values.imag == 0)
    mass = sum(float(A.eta0(n / 2)) / 2 for n in range(-4, 5))
    assert abs(out.total() - f.total() * mass) < 1e-9


def test_maximal_function():
    single = A.maximal_function(A.delta(2), [3])
    avg = A.smoothed_average(A.delta(2), 8)
    assert single.function.allclose(A.BoxFunction(2, avg.coords, np.abs(avg.values)))
    small = A.maximal_function(A.delta(2), range(0, 3)).function.to_dict()
    big = A.maximal_function(A.delta(2), range(0, 5)).function.to_dict()
    assert all(big.get(k, 0).real >= v.real for k, v in small.items())
    ratios = [A.maximal_function(A.delta(2), range(0, k + 1)).ratio for k in (2, 4, 6)]
    assert all(b / a < 1.1 ** 2 for a, b in zip(ratios, ratios[1:]))


def test_maximal_matches_brute_force():
    rng = np.random.default_rng(5)
    f = rand_box(rng, 4, 1)
    res = A.maximal_function(f, [0, 1, 2]).function.to_dict()
    avgs = [A.smoothed_average(f, 2**k).to_dict() for k in (0, 1, 2)]
    keys = set().union(*avgs)
    for k in keys:
        assert abs(res.get(k, 0) - max(abs(a.get(k, 0)) for a in avgs)) < 1e-12


def all_subsequence_variation(a, rho):
    n = len(a)
    best = 0.0
    for mask in range(1, 2**n):
        idx = [i for i in range(n) if mask >> i & 1]
        s = sum(abs(a[j] - a[i]) ** rho for i, j in zip(idx, idx[1:]))
        best = max(best, s)
    return best ** (1 / rho)


def test_variation_examples():
    assert A.variation_seminorm([2, 2, 2, 2], 2) == 0
    assert abs(A.variation_seminorm([0, 1, 0], 2) - math.sqrt(2)) < 1e-15
    rng = np.random.default_rng(6)
    for rho in (1, 1.5, 2, 3.7):
        for _ in range(20):
            a = rng.normal(size=8) + 1j * rng.normal(size=8)
            assert abs(A.variation_seminorm(a, rho) - all_subsequence_variation(a, rho)) < 1e-9


def test_variation_monotone_and_sup_bound():
    rng = np.random.default_rng(7)
    for _ in range(200):
        a = rng.normal(size=12) + 1j * rng.normal(size=12)
        v = [A.variation_seminorm(a, r) for r in (1, 1.5, 2, 3, 6)]
        assert all(x >= y - 1e-12 for x, y in zip(v, v[1:]))
        t0 = rng.integers(12)
        assert np.abs(a).max() <= abs(a[t0]) + v[3] + 1e-12


def test_rademacher_menshov():
    assert A.rademacher_menshov_check(np.ones(17), 0, 4)[:2] == (0.0, 0.0)
    step = np.zeros(17)
    step[9:] = 2.5
    lhs, rhs, ok = A.rademacher_menshov_check(step, 0, 4)
    assert lhs == 2.5 and rhs >= 2.5 and ok
    with pytest.raises(ValueError):
        A.rademacher_menshov_check(np.ones(17), 16, 4)
    with pytest.raises(IndexError):
        A.rademacher_menshov_check(np.ones(10), 0, 4)
    rng = np.random.default_rng(8)
    a = rng.normal(size=(2000, 17)) + 1j * rng.normal(size=(2000, 17))
    j0 = rng.integers(0, 16, 2000)
    lhs, rhs, ok = A.rademacher_menshov_batch(a, j0, 4)
    assert ok.all()
    for i in range(20):
        l1, r1, _ = A.rademacher_menshov_check(a[i], int(j0[i]), 4)
        assert abs(l1 - lhs[i]) < 1e-12 and abs(r1 - rhs[i]) < 1e-12


def test_singular_operator():
    zero = A.CZKernel(lambda t: 0 * t, lambda t: 0 * t)
    out, ratio = A.singular_operator(A.delta(2), zero, R=8)
    assert len(out) == 0 and ratio == 0
    K = A.default_cz_kernel()
    out, _ = A.singular_operator(A.delta(2), K, R=6)
    for n in range(-6, 7):
        assert abs(out(G.moment_curve(n, 2)) - K(float(n))) < 1e-15
    rng = np.random.default_rng(9)
    for R in (16, 32, 64):
        assert A.singular_operator(rand_box(rng, 20, 3), K, R=R)[1] < 3
    with pytest.raises(PreconditionError):
        A.singular_operator(A.delta(2), A.CZKernel(lambda t: 2 / (1 + t * t)), R=8)


def test_jsonl_roundtrip():
    rng = np.random.default_rng(10)
    f = rand_box(rng, 7, 2)
    g = A.BoxFunction.from_jsonl(2, f.to_jsonl())
    assert g.allclose(f, 0)

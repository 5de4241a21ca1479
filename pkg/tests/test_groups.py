"""Group model construction, subgroups, quotients, and characters."""

import numpy as np
import pytest
from fractions import Fraction

from kemplab import (Arc, AxiomViolation, NotNormal, abelianization,
                     bohr_preimage, cyclic_subgroup, default_character_modulus,
                     enumerate_characters, is_normal, make_cyclic,
                     make_from_table, make_product, quotient,
                     symmetric_group_table)
from kemplab.errors import PreconditionError


def s3():
    table, _ = symmetric_group_table(3)
    return make_from_table(table, "S3")


def test_make_cyclic_trivial():
    z1 = make_cyclic(1)
    assert z1.order == 1 and z1.identity == 0
    assert z1.validate()


def test_make_cyclic_arithmetic():
    z6 = make_cyclic(6)
    assert z6.mul(2, 5) == 1
    assert z6.inv(2) == 4


def test_make_cyclic_flags():
    z13 = make_cyclic(13)
    assert z13.abelian and z13.order == 13


def test_make_cyclic_rejects_zero():
    with pytest.raises(PreconditionError):
        make_cyclic(0)


def test_product_z2_z3_isomorphic_to_z6():
    g = make_product(make_cyclic(2), make_cyclic(3))
    assert g.order == 6
    # witness the isomorphism by a generator of full order
    orders = sorted(g.element_order(x) for x in range(6))
    assert max(orders) == 6


def test_product_with_trivial_factor():
    z5 = make_cyclic(5)
    g = make_product(make_cyclic(1), z5)
    assert np.array_equal(g.full_table(), z5.full_table())


def test_product_order():
    g = make_product(make_cyclic(12), make_cyclic(3))
    assert g.order == 36
    assert g.validate()


def test_table_group_s3():
    g = s3()
    assert g.order == 6 and not g.abelian
    assert g.validate()


def test_table_group_z4_abelian():
    z4 = make_cyclic(4)
    g = make_from_table(z4.full_table())
    assert g.abelian


def test_nonassociative_table_rejected():
    table = np.array([[0, 1, 2], [1, 2, 0], [2, 1, 0]])
    with pytest.raises(AxiomViolation) as exc:
        make_from_table(table)
    assert exc.value.witness


def test_cyclic_subgroup_examples():
    z12 = make_cyclic(12)
    assert cyclic_subgroup(z12, 4).members == (0, 4, 8)
    assert cyclic_subgroup(z12, 0).members == (0,)
    assert cyclic_subgroup(z12, 5).order == 12


def test_quotient_product_by_fiber():
    g = make_product(make_cyclic(12), make_cyclic(3))
    h = cyclic_subgroup(g, 1)      # {0} x Z_3
    q, proj = quotient(g, h)
    assert q.order == 12
    assert all(proj[x] == x // 3 for x in range(36))
    assert np.array_equal(q.full_table(), make_cyclic(12).full_table())


def test_quotient_by_trivial_subgroup():
    z10 = make_cyclic(10)
    q, proj = quotient(z10, cyclic_subgroup(z10, 0))
    assert q.order == 10
    assert np.array_equal(q.full_table(), z10.full_table())


def test_quotient_s3_by_a3():
    g = s3()
    three_cycle = next(x for x in range(6) if g.element_order(x) == 3)
    a3 = cyclic_subgroup(g, three_cycle)
    q, _ = quotient(g, a3)
    assert q.order == 2


def test_not_normal_witnessed():
    g = s3()
    transposition = next(x for x in range(6) if g.element_order(x) == 2)
    h = cyclic_subgroup(g, transposition)
    assert is_normal(g, h) is not None
    with pytest.raises(NotNormal):
        quotient(g, h)


def test_characters_z13():
    z13 = make_cyclic(13)
    chars = enumerate_characters(z13, 13)
    assert len(chars) == 13
    assert all(c.verify() for c in chars)
    assert sum(1 for c in chars if c.surjective) == 12


def test_characters_modulus_one():
    chars = enumerate_characters(make_cyclic(13), 1)
    assert len(chars) == 1 and chars[0].is_trivial()


def test_characters_s3_to_z3_trivial_only():
    chars = enumerate_characters(s3(), 3)
    assert len(chars) == 1 and chars[0].is_trivial()


def test_characters_s3_abelianization():
    # abelianization of S_3 is Z_2
    q, _ = abelianization(s3())
    assert q.order == 2
    assert default_character_modulus(s3()) == 2
    assert len(enumerate_characters(s3(), 2)) == 2


def test_characters_complete_on_product():
    g = make_product(make_cyclic(48), make_cyclic(5))
    chars = enumerate_characters(g, 48)
    assert len(chars) == 48          # Hom(Z_48 x Z_5, Z_48) = Z_48
    assert all(c.verify() for c in chars)


def test_bohr_preimage_measures():
    g = make_product(make_cyclic(48), make_cyclic(5))
    chi = next(c for c in enumerate_characters(g, 48)
               if np.array_equal(c.image, np.arange(240) // 5 % 48))
    assert bohr_preimage(g, chi, Arc(48, 0, 10)).measure() == Fraction(10, 48)
    assert bohr_preimage(g, chi, Arc(48, 0, 48)).size == 240
    assert bohr_preimage(g, chi, Arc(48, 0, 0)).size == 0


def test_bohr_preimage_modulus_mismatch():
    g = make_cyclic(12)
    chi = enumerate_characters(g, 12)[1]
    with pytest.raises(PreconditionError):
        bohr_preimage(g, chi, Arc(13, 0, 3))


def test_measure_bi_invariance_sampled():
    g = s3()
    rng = np.random.default_rng(0)
    from kemplab import Subset
    for _ in range(20):
        s = Subset.from_indices(g, rng.choice(6, 3, replace=False))
        x = int(rng.integers(0, 6))
        assert s.translate(x, "left").size == s.size == s.translate(x, "right").size


def test_quotient_integral_for_full_fiber_sets():
    g = make_product(make_cyclic(12), make_cyclic(3))
    h = cyclic_subgroup(g, 1)
    q, proj = quotient(g, h)
    from kemplab import Subset
    s_q = Subset.from_indices(q, [0, 3, 7])
    pullback = Subset.from_indices(g, np.flatnonzero(np.isin(proj, s_q.indices())))
    assert pullback.measure() == s_q.measure()


def test_make_product_overflow_guard():
    big = make_cyclic(2 ** 16)
    with pytest.raises(PreconditionError):
        make_product(make_product(big, big), make_cyclic(2))


def test_default_character_modulus_product():
    g = make_product(make_cyclic(48), make_cyclic(5))
    assert default_character_modulus(g) == 240     # exponent of Z_48 x Z_5

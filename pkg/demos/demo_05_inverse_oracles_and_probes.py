# One-dimensional inverse oracles and toric expansion probes
#
# Freiman's 3k-4 on Z, the dilation-arc theorem on Z_n, and the
# interval theorem on Z serve as independent oracles; toric ratios
# probe which directions a set refuses to expand along.

from fractions import Fraction

from kemplab import (Escape, Subset, covering_tori, freiman_3k4, make_cyclic,
                     make_from_table, make_product, nonexpander_probe,
                     real_inverse, symmetric_group_table,
                     toric_expansion_ratios, torus_inverse)

# %% Freiman 3k-4 on Z: small doubling forces an AP interval
print("A = {0,1,2,5}:", freiman_3k4([0, 1, 2, 5]), "(doubling too large)")
print("A = {0,2,4}:  ", freiman_3k4([0, 2, 4]), "(step 2 divided out)")

# %% the dilation-arc theorem on Z_13
z13 = make_cyclic(13)
evens = Subset.from_indices(z13, [0, 2, 4, 6])
res = torus_inverse(z13, evens, evens, c=Fraction(1))
print("\nZ_13 even arc pattern: dilation", res.dilation,
      "maps A into", sorted(res.arc_a.member_set()))
print("full sets escape:", isinstance(
    torus_inverse(z13, Subset.full(z13), Subset.full(z13), c=Fraction(1)), Escape))

# %% the interval theorem on Z, with the two discrete corrections
print("\n{0,10}+{0,10}:", real_inverse([0, 10], [0, 10]), "(joint step 10)")
print("{0,1,4}+{0,1,4}:", real_inverse([0, 1, 4], [0, 1, 4]),
      "(the non-rectifiable pattern: growth, not structure)")

# %% toric ratios: a square box expands 4x along each axis and worse
# along diagonals (long cyclic subgroups sweep it around the torus)
g = make_product(make_cyclic(12), make_cyclic(12))
box = Subset.from_indices(g, [x * 12 + y for x in range(3) for y in range(3)])
rep = toric_expansion_ratios(g, box)
print("\n3x3 box in Z_12^2: axis ratio", rep.ratios[1],
      " worst ratio", rep.max_ratio, "along generator", rep.argmax_generator)

# %% covering tori: greedy cyclic subgroups whose product is everything
s3 = make_from_table(symmetric_group_table(3)[0], "S3")
print("S_3 covered by cyclic subgroups of orders",
      [h.order for h in covering_tori(s3)])

# %% the nonexpander probe: the best toric 2-nonexpander found on
# S_3 x Z_20 is a measure-1/4 subgroup; nothing below 1/4 exists
probe = nonexpander_probe(make_product(s3, make_cyclic(20)), 2,
                          budget=80, seed=7)
print("\nS_3 x Z_20 probe: best 2-nonexpander measure",
      probe.best_measure, f"({probe.evaluations} evaluations, seed 7)")

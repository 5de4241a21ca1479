"""Exact product sets, translate overlaps, and indicator convolutions.

Subsets are bitmasks over element indices (Python ints double as
arbitrary-width bitsets), so unions, intersections, and popcounts are
exact and cheap.  ``product_set`` is the deliberately naive reference
kernel; ``fast_product_set`` must agree with it bit for bit and gets
there through cyclic-shift ORs, row ORs, or an FFT convolution whose
output is thresholded exactly and re-verified wherever a bin lands near
the 0/1 boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import GroupMismatch, PreconditionError
from .groups import Arc, Character, GroupModel

# Row-OR translate rows are cached only for groups up to this order.
ROW_CACHE_LIMIT = 4096
_row_cache: dict = {}

# FFT bins farther than this from an integer trigger exact re-verification.
FFT_GUARD = 0.25


def _mask_from_indices(indices, n: int) -> int:
    m = 0
    for i in indices:
        i = int(i)
        if not 0 <= i < n:
            raise PreconditionError("index range", f"{i} not in 0..{n-1}")
        m |= 1 << i
    return m


def _indices_from_mask(mask: int, n: int) -> np.ndarray:
    if mask == 0:
        return np.empty(0, dtype=np.int64)
    b = np.frombuffer(mask.to_bytes((n + 7) // 8, "little"), dtype=np.uint8)
    bits = np.unpackbits(b, bitorder="little")[:n]
    return np.flatnonzero(bits).astype(np.int64)


class Subset:
    """An exact subset of a group model: bitmask plus cached popcount."""

    __slots__ = ("parent", "mask", "size")

    def __init__(self, parent: GroupModel, mask: int):
        if mask < 0 or mask >> parent.order:
            raise PreconditionError("mask width", "mask has bits beyond the group order")
        self.parent = parent
        self.mask = mask
        self.size = mask.bit_count()

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_indices(cls, parent: GroupModel, indices) -> "Subset":
        return cls(parent, _mask_from_indices(indices, parent.order))

    @classmethod
    def empty(cls, parent: GroupModel) -> "Subset":
        return cls(parent, 0)

    @classmethod
    def full(cls, parent: GroupModel) -> "Subset":
        return cls(parent, (1 << parent.order) - 1)

    @classmethod
    def singleton(cls, parent: GroupModel, g: int) -> "Subset":
        return cls(parent, 1 << g)

    # -- basics -----------------------------------------------------------

    def measure(self) -> Fraction:
        return Fraction(self.size, self.parent.order)

    def indices(self) -> np.ndarray:
        return _indices_from_mask(self.mask, self.parent.order)

    def bool_array(self) -> np.ndarray:
        out = np.zeros(self.parent.order, dtype=bool)
        out[self.indices()] = True
        return out

    def contains(self, g: int) -> bool:
        return bool((self.mask >> g) & 1)

    def union(self, other: "Subset") -> "Subset":
        self.parent.require_same(other.parent)
        return Subset(self.parent, self.mask | other.mask)

    def intersect(self, other: "Subset") -> "Subset":
        self.parent.require_same(other.parent)
        return Subset(self.parent, self.mask & other.mask)

    def difference(self, other: "Subset") -> "Subset":
        self.parent.require_same(other.parent)
        return Subset(self.parent, self.mask & ~other.mask)

    def symmetric_difference(self, other: "Subset") -> "Subset":
        self.parent.require_same(other.parent)
        return Subset(self.parent, self.mask ^ other.mask)

    def complement(self) -> "Subset":
        return Subset(self.parent, ~self.mask & ((1 << self.parent.order) - 1))

    def inverse(self) -> "Subset":
        """{a^-1 : a in A}; same measure by unimodularity."""
        g = self.parent
        return Subset.from_indices(g, g.inv_vec(self.indices()))

    def translate(self, g: int, side: str = "left") -> "Subset":
        """gA (left) or Ag (right), exact."""
        gm = self.parent
        if gm.kind == "cyclic":
            n = gm.order
            s = g % n
            full = (1 << n) - 1
            m = ((self.mask << s) | (self.mask >> (n - s))) & full if s else self.mask
            return Subset(gm, m)
        idx = self.indices()
        if side == "left":
            return Subset.from_indices(gm, gm.mul_vec(g, idx))
        return Subset.from_indices(gm, gm.rmul_vec(idx, g))

    def __eq__(self, other):
        return isinstance(other, Subset) and self.mask == other.mask \
            and self.parent.same_model(other.parent)

    def __hash__(self):
        return hash((self.parent.order, self.mask))

    def __repr__(self):
        return f"Subset(|A|={self.size}/{self.parent.order})"


def bohr_preimage(g_model: GroupModel, chi: Character, arc: Arc) -> Subset:
    """chi^-1(I): the Bohr set of the arc, the extremal sets of the theory."""
    if not chi.parent.same_model(g_model):
        raise GroupMismatch("character parent differs from the group")
    if arc.modulus != chi.modulus:
        raise PreconditionError("modulus match",
                                f"arc mod {arc.modulus} vs character mod {chi.modulus}")
    if arc.length == 0:
        return Subset.empty(g_model)
    offsets = (chi.image - arc.start) % arc.modulus
    return Subset.from_indices(g_model, np.flatnonzero(offsets < arc.length))


# -- product sets ----------------------------------------------------------


def product_set(g_model: GroupModel, a: Subset, b: Subset) -> Subset:
    """AB = {ab} by the naive double loop; the oracle kernel."""
    g_model.require_same(a.parent)
    g_model.require_same(b.parent)
    mask = 0
    for x in a.indices():
        x = int(x)
        for y in b.indices():
            mask |= 1 << g_model.mul(x, int(y))
    return Subset(g_model, mask)


def _mul_table_row(g_model: GroupModel, a: int) -> np.ndarray:
    """Cached left-translation row a * (0..N-1)."""
    key = (id(g_model), a)
    row = _row_cache.get(key)
    if row is None:
        row = g_model.mul_vec(a, g_model.elements())
        if g_model.order <= ROW_CACHE_LIMIT:
            _row_cache[key] = row
    return row


def _exact_bin_count(shape, a_idx, b_bool_nd, x) -> int:
    """Exact convolution count at bin x: #{a in A : a^-1 x in B} for the
    abelian product-of-cyclics model (subtraction per coordinate)."""
    coords = np.unravel_index(x, shape)
    a_coords = np.unravel_index(a_idx, shape)
    diff = tuple((c - ac) % s for c, ac, s in zip(coords, a_coords, shape))
    return int(np.count_nonzero(b_bool_nd[diff]))


def fast_product_set(g_model: GroupModel, a: Subset, b: Subset) -> Subset:
    """AB by the accelerated path; bit-identical to product_set.

    Abelian products of cyclics go through a real FFT over the factor
    shape with exact thresholding at count >= 1: any bin within
    FFT_GUARD of the 0/1 boundary is recomputed with exact integer
    arithmetic.  Other groups use row ORs over translate rows.
    """
    g_model.require_same(a.parent)
    g_model.require_same(b.parent)
    if a.size == 0 or b.size == 0:
        return Subset.empty(g_model)

    shape = g_model.cyclic_shape
    if shape is not None and g_model.order >= 32:
        fa = np.zeros(shape, dtype=np.float64)
        fb = np.zeros(shape, dtype=np.float64)
        fa.ravel()[a.indices()] = 1.0
        fb.ravel()[b.indices()] = 1.0
        axes = tuple(range(len(shape)))
        conv = np.fft.irfftn(np.fft.rfftn(fa) * np.fft.rfftn(fb), s=shape, axes=axes).ravel()
        support = conv > 0.5
        suspicious = np.flatnonzero(np.abs(conv - np.rint(conv)) > FFT_GUARD)
        if suspicious.size:
            a_idx = a.indices()
            b_nd = fb.astype(bool)
            for x in suspicious:
                support[x] = _exact_bin_count(shape, a_idx, b_nd, int(x)) >= 1
        return Subset.from_indices(g_model, np.flatnonzero(support))

    if g_model.kind == "cyclic":
        out = 0
        for x in a.indices():
            out |= b.translate(int(x)).mask
        return Subset(g_model, out)

    out = np.zeros(g_model.order, dtype=bool)
    b_idx = b.indices()
    for x in a.indices():
        out[_mul_table_row(g_model, int(x))[b_idx]] = True
    return Subset.from_indices(g_model, np.flatnonzero(out))


def cyclic_sumset_batch(n: int, a_indices, b_masks: np.ndarray, dtype=np.uint32) -> np.ndarray:
    """Sumsets A + B_j over many B masks at once (Z_n, n below the dtype width).

    Used by the exhaustive verification suites where per-call overhead
    would dominate; agreement with product_set is itself under test.
    """
    full = dtype((1 << n) - 1)
    out = np.zeros_like(b_masks)
    b = b_masks.astype(dtype)
    for s in a_indices:
        s = int(s)
        if s == 0:
            out |= b
        else:
            out |= ((b << dtype(s)) | (b >> dtype(n - s))) & full
    return out


_PC16 = np.array([bin(i).count("1") for i in range(1 << 16)], dtype=np.uint8)


def popcount_u32(masks: np.ndarray) -> np.ndarray:
    m = masks.astype(np.uint32)
    return (_PC16[m & np.uint32(0xFFFF)].astype(np.int64)
            + _PC16[(m >> np.uint32(16)) & np.uint32(0xFFFF)].astype(np.int64))


# -- overlaps --------------------------------------------------------------


def translate_overlap(g_model: GroupModel, a: Subset, g: int, side: str = "left") -> Fraction:
    """mu(A inter gA) or mu(A inter Ag), the pseudometric's core term."""
    g_model.require_same(a.parent)
    shifted = a.translate(g, side)
    return g_model.measure((a.mask & shifted.mask).bit_count())


@dataclass(frozen=True)
class OverlapProfile:
    """All translate overlaps of one set, as exact counts over N.

    counts[g] = |A inter gA| (left) or |A inter Ag| (right).  The mean
    identity sum(counts) = |A|^2 is a Fubini fact and doubles as an
    exactness certificate for the FFT route.
    """

    parent: GroupModel
    side: str
    counts: np.ndarray
    set_size: int

    def value(self, g: int) -> Fraction:
        return Fraction(int(self.counts[g]), self.parent.order)

    def mean(self) -> Fraction:
        return Fraction(int(self.counts.sum()), self.parent.order ** 2)

    def verify_mean_identity(self) -> bool:
        return int(self.counts.sum()) == self.set_size ** 2


def overlap_profile(g_model: GroupModel, a: Subset, side: str = "left") -> OverlapProfile:
    """Exact overlap counts for every translate.

    For cyclic-shape groups the counts are an autocorrelation computed
    by FFT and rounded; float64 error at the supported sizes is orders
    of magnitude below 1/2, and the Fubini identity is asserted as the
    exactness certificate (with a loop fallback if it ever failed).
    """
    g_model.require_same(a.parent)
    n = g_model.order
    shape = g_model.cyclic_shape

    if shape is not None and n >= 64:
        fa = np.zeros(shape, dtype=np.float64)
        fa.ravel()[a.indices()] = 1.0
        spec = np.fft.rfftn(fa)
        axes = tuple(range(len(shape)))
        corr = np.fft.irfftn(spec * np.conj(spec), s=shape, axes=axes).ravel()
        counts = np.rint(corr).astype(np.int64)
        # left overlap |A inter gA| with g decomposed over the shape:
        # autocorrelation bins are indexed by the translate itself.
        profile = OverlapProfile(g_model, side, counts, a.size)
        if profile.verify_mean_identity():
            return profile

    counts = np.zeros(n, dtype=np.int64)
    for g in range(n):
        counts[g] = (a.mask & a.translate(g, side).mask).bit_count()
    profile = OverlapProfile(g_model, side, counts, a.size)
    if not profile.verify_mean_identity():
        raise AssertionError("overlap mean identity failed; kernel bug")
    return profile

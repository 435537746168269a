"""Extremal constructions: simplex lattice sets, embeddings, smoothing.

The simplex family A = {x in Z^n : x_i >= 0, sum x_i <= L} realizes a
difference-set/sumset cardinality ratio log(|A-A|/|A|) / log(|A+A|/|A|)
approaching ln 6 / ln 4 at n = 2 and growing with n while staying below
the doubling bound 2.  Both sumset and difference set of the simplex are
again "simplex-shaped" (A+A is the simplex with parameter 2L; A-A is cut
out by the half-spaces sum(x_i)_+ <= L and sum(x_i)_- <= L), which gives
exact cardinality formulas; explicit enumeration is kept as the
independent cross-check for small parameters.

Also here: base-M digit embeddings that multiply row entropies by the
tensor power k, iid tensor powers, and the smoothing defect
h(U + eps*Z) - h(Z) - d*ln(eps) - H(U) for a finite U and a grid-density
noise Z.
"""

from __future__ import annotations

import math
from math import comb
from typing import Sequence

import numpy as np

from entropylab.errors import CollisionError, ResourceBoundError
from entropylab.grid import GridDensity, differential_entropy
from entropylab.lattice import (
    LatticePMF,
    _group_rows,
    _lex_order,
    independent_product,
    linear_combination,
)
from entropylab.nats import Nats

__all__ = [
    "LatticeSet",
    "simplex_lattice",
    "simplex_count",
    "simplex_sumset_count",
    "simplex_diffset_count",
    "sumset",
    "ruzsa_ratio",
    "tensor_iid",
    "default_embedding_base",
    "embed",
    "smoothing_gap",
]

_ENUM_BUDGET = 10**9
_CHUNK_ROWS = 512


class LatticeSet:
    """A finite set of integer points in Z^n."""

    __slots__ = ("points",)

    def __init__(self, points):
        pts = np.asarray(points, dtype=np.int64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("a lattice set needs a nonempty (n, dim) point array")
        pts = np.unique(pts, axis=0)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __setattr__(self, name, value):
        raise AttributeError("LatticeSet is immutable")

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def __contains__(self, point) -> bool:
        q = np.asarray(point, dtype=np.int64).reshape(1, -1)
        return bool(np.any(np.all(self.points == q, axis=1)))

    def __repr__(self) -> str:
        return f"LatticeSet(dim={self.dim}, size={len(self)})"


def simplex_lattice(n: int, level: int) -> LatticeSet:
    """The set {x in Z^n : x_i >= 0, sum_i x_i <= level}, materialized."""
    if n < 1 or level < 0:
        raise ValueError("need n >= 1 and level >= 0")
    size = simplex_count(n, level)
    if size * n > _ENUM_BUDGET:
        raise ResourceBoundError(f"simplex with {size} points exceeds the enumeration budget")
    # grow one coordinate at a time, carrying the remaining level budget
    partial = np.arange(level + 1, dtype=np.int64).reshape(-1, 1)
    remaining = level - partial[:, 0]
    for _ in range(1, n):
        reps = (remaining + 1).astype(np.int64)
        parents = np.repeat(np.arange(partial.shape[0]), reps)
        new_coord = np.concatenate(
            [np.arange(r + 1, dtype=np.int64) for r in remaining.tolist()]
        )
        partial = np.hstack([partial[parents], new_coord.reshape(-1, 1)])
        remaining = remaining[parents] - new_coord
    return LatticeSet(partial)


def simplex_count(n: int, level: int) -> int:
    """|simplex_lattice(n, level)| = C(level + n, n)."""
    return comb(level + n, n)


def simplex_sumset_count(n: int, level: int) -> int:
    """|A + A| for the simplex: the sum is the simplex at parameter 2L."""
    return comb(2 * level + n, n)


def simplex_diffset_count(n: int, level: int) -> int:
    """|A - A| for the simplex, counted by splitting into signs.

    A point of A - A is determined by its positive part (s nonzero
    coordinates summing to at most L) and negative part (t further
    coordinates, likewise), giving
    sum_{s+t<=n} C(n,s) C(n-s,t) C(L,s) C(L,t).
    """
    total = 0
    for s in range(n + 1):
        for t in range(n - s + 1):
            total += comb(n, s) * comb(n - s, t) * comb(level, s) * comb(level, t)
    return total


def sumset(a: LatticeSet, b: LatticeSet, sign: int = 1) -> LatticeSet:
    """The set {x + sign*y : x in a, y in b}, by direct enumeration."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    pairs = len(a) * len(b) * a.dim
    if pairs > _ENUM_BUDGET:
        raise ResourceBoundError(
            f"sumset enumeration of {pairs} coordinate pairs exceeds the budget"
        )
    other = b.points if sign == 1 else -b.points
    chunks = []
    acc = None
    for start in range(0, len(a), _CHUNK_ROWS):
        block = (a.points[start : start + _CHUNK_ROWS, None, :] + other[None, :, :]).reshape(
            -1, a.dim
        )
        block = np.unique(block, axis=0)
        acc = block if acc is None else np.unique(np.vstack([acc, block]), axis=0)
    return LatticeSet(acc)


def ruzsa_ratio(n: int, level: int) -> float:
    """log(|A-A|/|A|) / log(|A+A|/|A|) for the simplex A at (n, level).

    Uses the exact closed-form cardinalities, so large parameters cost
    nothing; the formulas are cross-validated against enumeration in the
    test suite.
    """
    if n < 1 or level < 1:
        raise ValueError("need n >= 1 and level >= 1")
    size = simplex_count(n, level)
    diff = simplex_diffset_count(n, level)
    sums = simplex_sumset_count(n, level)
    denom = math.log(sums / size)
    if abs(denom) < 1e-6:
        raise ValueError("degenerate denominator in the ratio")
    return math.log(diff / size) / denom


def tensor_iid(p: LatticePMF, k: int) -> LatticePMF:
    """Pmf of k iid copies of p as a single variable on Z^(dim*k)."""
    if k < 1:
        raise ValueError("tensor power must be >= 1")
    out = p
    for _ in range(k - 1):
        out = independent_product(out, p)
    return out


def _row_sums(pmfs: Sequence[LatticePMF], matrix: np.ndarray) -> list[LatticePMF]:
    return [linear_combination(pmfs, row) for row in matrix.tolist()]


def default_embedding_base(pmfs: Sequence[LatticePMF], matrix) -> int:
    """Smallest safe digit base: 1 + the largest row-combination span."""
    matrix = np.asarray(matrix, dtype=np.int64)
    span = 0
    for row_pmf in _row_sums(pmfs, matrix):
        width = row_pmf.points.max(axis=0) - row_pmf.points.min(axis=0)
        span = max(span, int(width.max()))
    return span + 1


def _digit_map(points: np.ndarray, k: int, dim: int, base: int) -> np.ndarray:
    """Collapse (x_1,...,x_k) blocks of width dim to sum_i x_i * base^(i-1)."""
    out = np.zeros((points.shape[0], dim), dtype=np.int64)
    weight = 1
    for i in range(k):
        out += points[:, i * dim : (i + 1) * dim] * weight
        weight *= base
    return out


def embed(
    pmfs: Sequence[LatticePMF], matrix, k: int, base: int | None = None
) -> list[LatticePMF]:
    """Replace each variable by a base-M digit embedding of k iid copies.

    The returned variables V_j are the pushforwards of k-fold tensor
    powers under (x_1,...,x_k) -> sum_i x_i M^(i-1).  For every row a of
    the coefficient matrix, H(sum_j a_j V_j) = k * H(sum_j a_j U_j)
    provided M exceeds the span of each row combination; the map is
    checked for collisions on every row support and raises otherwise.
    """
    matrix = np.asarray(matrix, dtype=np.int64)
    if matrix.ndim != 2 or matrix.shape[1] != len(pmfs):
        raise ValueError("matrix must have one column per pmf")
    if k < 1:
        raise ValueError("tensor power must be >= 1")
    dim = pmfs[0].dim
    if any(p.dim != dim for p in pmfs):
        raise ValueError("dimension mismatch between pmfs")
    m = default_embedding_base(pmfs, matrix) if base is None else int(base)
    if m < 1:
        raise ValueError("embedding base must be >= 1")
    for row_pmf in _row_sums(pmfs, matrix):
        tensor = tensor_iid(row_pmf, k)
        labels = _digit_map(tensor.points, k, dim, m)
        uniq = np.unique(labels, axis=0)
        if uniq.shape[0] != labels.shape[0]:
            raise CollisionError(
                f"base {m} collides on a row-combination support; increase the base"
            )
    out = []
    for p in pmfs:
        tensor = tensor_iid(p, k)
        labels = _digit_map(tensor.points, k, dim, m)
        rows, masses = _group_rows(labels, tensor.masses)
        out.append(LatticePMF(rows, masses))
    return out


def smoothing_gap(u: LatticePMF, z: GridDensity, eps: float) -> Nats:
    """h(U + eps*Z) - h(Z) - d*ln(eps) - H(U) for independent U, Z.

    U is a finite integer pmf, Z a grid density, and eps must be an
    exact power of two not exceeding 1 so that eps*Z lands on a dyadic
    grid; the grid must resolve Z with at least 2^6 cells per axis.
    """
    if u.dim != z.dim:
        raise ValueError("dimension mismatch between the pmf and the density")
    mantissa, exponent = math.frexp(float(eps))
    if eps <= 0 or eps > 1 or mantissa != 0.5:
        raise ValueError(f"eps must be a power of two in (0, 1], got {eps}")
    e = 1 - exponent  # eps = 2^-e
    if min(z.shape) < 2**6:
        raise ValueError("grid too coarse: the noise needs at least 2^6 cells per axis")
    k_mix = z.resolution + e
    step = 1 << k_mix
    # cells of eps*Z keep their integer coordinates at resolution k + e;
    # atom u shifts them by u * 2^(k+e)
    lo_mix = u.points.min(axis=0) * step + z.lo
    hi_mix = u.points.max(axis=0) * step + z.lo + np.asarray(z.shape, dtype=np.int64)
    shape = tuple(int(s) for s in (hi_mix - lo_mix))
    cells = 1
    for s in shape:
        cells *= s
    if cells > 2**24:
        raise ResourceBoundError("smoothing mixture grid exceeds the cell budget")
    mix = np.zeros(shape)
    scale = 2.0 ** (e * z.dim)
    for point, mass in zip(u.points.tolist(), u.masses):
        offset = tuple(
            int(c * step + zl - ml) for c, zl, ml in zip(point, z.lo, lo_mix)
        )
        sl = tuple(slice(o, o + s) for o, s in zip(offset, z.shape))
        mix[sl] += mass * scale * z.values
    mixture = GridDensity(k_mix, lo_mix, mix, _skip_checks=True)
    h_mix = differential_entropy(mixture)
    h_z = differential_entropy(z)
    from entropylab.lattice import shannon_entropy

    h_u = shannon_entropy(u)
    value = h_mix.value - h_z.value + e * z.dim * math.log(2.0) - h_u.value
    return Nats(value, h_mix.err + h_z.err + h_u.err)

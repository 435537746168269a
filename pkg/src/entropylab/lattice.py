"""Probability mass functions on integer lattices and cyclic groups.

Three finite distribution types live here:

* :class:`LatticePMF` - a sparse pmf on Z^d, stored as lexicographically
  sorted integer points with strictly positive masses.
* :class:`CyclicPMF` - a dense pmf on (Z/2^k Z)^n.
* :class:`JointPMF` - a sparse pmf on pairs of integer tuples, used for
  mutual-information bookkeeping.

The operations are the exact finite computations used everywhere else in
the package: Shannon entropy in nats, dilation by a nonzero integer,
convolution (distribution of a sum of independent variables), integer
linear combinations, and modular reduction onto cyclic groups.

Convolution switches regime by workload: a sparse product-accumulate
when ``|supp p| * |supp q| <= 2**22``, otherwise a dense FFT convolution
over the output bounding box with sufficient zero padding.  When the
pair count is large but the bounding box is astronomically sparse the
FFT buffer is unaffordable, and the sparse accumulate is used in chunks
instead.  After every convolution, masses below 1e-15 are pruned and the
result is renormalized.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.signal import fftconvolve

from entropylab.backend import kernels
from entropylab.nats import Nats

__all__ = [
    "LatticePMF",
    "CyclicPMF",
    "JointPMF",
    "shannon_entropy",
    "dilate",
    "convolve",
    "linear_combination",
    "cyclic_linear_combination",
    "lattice_to_cyclic",
    "floor_divide",
    "independent_product",
    "joint_of",
    "mutual_information",
]

MASS_TOL = 1e-12
PRUNE_EPS = 1e-15
MI_CLAMP = 1e-10
SPARSE_PAIR_LIMIT = 2**22
DENSE_ACC_LIMIT = 2**22
FFT_VOL_LIMIT = 2**24
_CHUNK_PAIRS = 2**21
_EPS = float(np.finfo(np.float64).eps)


def _as_points(points, dim_hint: int | None = None) -> np.ndarray:
    pts = np.asarray(points, dtype=np.int64)
    if pts.ndim == 1:
        # a flat list of 1-d points
        pts = pts.reshape(-1, 1) if dim_hint in (None, 1) else pts.reshape(1, -1)
    if pts.ndim != 2:
        raise ValueError("points must be a (n, dim) integer array")
    return pts


def _lex_order(points: np.ndarray) -> np.ndarray:
    if points.shape[0] <= 1:
        return np.arange(points.shape[0])
    return np.lexsort(points.T[::-1])


def _row_box(points: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """Bounding box of integer rows: (lo, shape, volume as python int)."""
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    shape = hi - lo + 1
    vol = 1
    for s in shape.tolist():
        vol *= int(s)
    return lo, shape, vol


def _strides(shape: np.ndarray) -> np.ndarray:
    st = np.ones(len(shape), dtype=np.int64)
    for j in range(len(shape) - 2, -1, -1):
        st[j] = st[j + 1] * int(shape[j + 1])
    return st


def _encode(points: np.ndarray, lo: np.ndarray, strides: np.ndarray) -> np.ndarray:
    return (points - lo) @ strides


def _decode(keys: np.ndarray, lo: np.ndarray, shape: np.ndarray) -> np.ndarray:
    out = np.empty((keys.shape[0], len(shape)), dtype=np.int64)
    rem = keys
    for j in range(len(shape) - 1, -1, -1):
        out[:, j] = rem % int(shape[j]) + int(lo[j])
        rem = rem // int(shape[j])
    return out


def _group_rows(rows: np.ndarray, masses: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Merge duplicate integer rows, summing their masses."""
    if rows.shape[0] == 0:
        return rows, masses
    lo, shape, vol = _row_box(rows)
    if vol <= 2**62:
        st = _strides(shape)
        keys, sums = kernels.group_sum(_encode(rows, lo, st), masses)
        return _decode(keys, lo, shape), sums
    # coordinates too spread out to linearize; lexicographic fallback
    uniq, inverse = np.unique(rows, axis=0, return_inverse=True)
    return uniq, np.bincount(inverse.ravel(), weights=masses, minlength=uniq.shape[0])


class LatticePMF:
    """Sparse pmf on Z^d: sorted integer points with positive masses."""

    __slots__ = ("points", "masses")

    def __init__(self, points, masses, *, _skip_checks: bool = False):
        masses = np.ascontiguousarray(masses, dtype=np.float64)
        pts = _as_points(points)
        if pts.shape[0] != masses.shape[0]:
            raise ValueError("points and masses must have matching lengths")
        if pts.shape[0] == 0:
            raise ValueError("a pmf needs at least one atom")
        if not _skip_checks:
            order = _lex_order(pts)
            pts = pts[order]
            masses = masses[order]
            if pts.shape[0] > 1 and np.any(np.all(pts[1:] == pts[:-1], axis=1)):
                raise ValueError("duplicate support points")
            if np.any(masses <= 0.0):
                raise ValueError("masses must be strictly positive")
            total = math.fsum(masses)
            if abs(total - 1.0) > MASS_TOL:
                raise ValueError(f"masses must sum to 1 within {MASS_TOL}, got {total}")
        pts.setflags(write=False)
        masses.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "masses", masses)

    def __setattr__(self, name, value):
        raise AttributeError("LatticePMF is immutable")

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def support_size(self) -> int:
        return self.points.shape[0]

    def __len__(self) -> int:
        return self.points.shape[0]

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {tuple(p): float(m) for p, m in zip(self.points.tolist(), self.masses)}

    def __repr__(self) -> str:
        return f"LatticePMF(dim={self.dim}, support={self.support_size})"

    @staticmethod
    def from_dict(atoms: Mapping[Sequence[int] | int, float]) -> "LatticePMF":
        points = []
        masses = []
        for point, mass in atoms.items():
            points.append((point,) if isinstance(point, int) else tuple(point))
            masses.append(mass)
        return LatticePMF(np.asarray(points, dtype=np.int64), masses)

    @staticmethod
    def point_mass(point: Sequence[int] | int) -> "LatticePMF":
        return LatticePMF.from_dict({point if isinstance(point, int) else tuple(point): 1.0})

    @staticmethod
    def uniform(points: Iterable[Sequence[int] | int]) -> "LatticePMF":
        pts = [(p,) if isinstance(p, int) else tuple(p) for p in points]
        if len(set(pts)) != len(pts):
            raise ValueError("duplicate support points")
        return LatticePMF(np.asarray(pts, dtype=np.int64), np.full(len(pts), 1.0 / len(pts)))


class CyclicPMF:
    """Dense pmf on (Z/2^k Z)^n stored as an n-dimensional table."""

    __slots__ = ("modulus_log2", "table")

    def __init__(self, modulus_log2: int, table, *, _skip_checks: bool = False):
        k = int(modulus_log2)
        if k < 1:
            raise ValueError("modulus_log2 must be >= 1")
        table = np.ascontiguousarray(table, dtype=np.float64)
        m = 1 << k
        if table.ndim < 1 or any(s != m for s in table.shape):
            raise ValueError(f"table must have shape (2^{k},)*n")
        if not _skip_checks:
            if np.any(table < 0.0):
                raise ValueError("masses must be nonnegative")
            total = math.fsum(table.ravel())
            if abs(total - 1.0) > MASS_TOL:
                raise ValueError(f"masses must sum to 1 within {MASS_TOL}, got {total}")
        table.setflags(write=False)
        object.__setattr__(self, "modulus_log2", k)
        object.__setattr__(self, "table", table)

    def __setattr__(self, name, value):
        raise AttributeError("CyclicPMF is immutable")

    @property
    def dim(self) -> int:
        return self.table.ndim

    @property
    def modulus(self) -> int:
        return 1 << self.modulus_log2

    def __repr__(self) -> str:
        return f"CyclicPMF(k={self.modulus_log2}, dim={self.dim})"

    @staticmethod
    def from_dict(modulus_log2: int, atoms: Mapping, dim: int = 1) -> "CyclicPMF":
        m = 1 << int(modulus_log2)
        table = np.zeros((m,) * dim)
        for point, mass in atoms.items():
            idx = (point,) if isinstance(point, int) else tuple(point)
            if len(idx) != dim:
                raise ValueError("residue tuple has wrong dimension")
            table[tuple(i % m for i in idx)] += mass
        return CyclicPMF(modulus_log2, table)


class JointPMF:
    """Sparse pmf on pairs (x, y) of integer tuples."""

    __slots__ = ("left", "right", "masses")

    def __init__(self, left, right, masses, *, _skip_checks: bool = False):
        left = _as_points(left)
        right = _as_points(right)
        masses = np.ascontiguousarray(masses, dtype=np.float64)
        if not (left.shape[0] == right.shape[0] == masses.shape[0]):
            raise ValueError("left, right and masses must have matching lengths")
        if left.shape[0] == 0:
            raise ValueError("a pmf needs at least one atom")
        rows = np.hstack([left, right])
        if not _skip_checks:
            if np.any(masses <= 0.0):
                raise ValueError("masses must be strictly positive")
            rows, masses = _group_rows(rows, masses)
            total = math.fsum(masses)
            if abs(total - 1.0) > MASS_TOL:
                raise ValueError(f"masses must sum to 1 within {MASS_TOL}, got {total}")
        order = _lex_order(rows)
        rows = rows[order]
        masses = masses[order]
        dl = left.shape[1]
        left = np.ascontiguousarray(rows[:, :dl])
        right = np.ascontiguousarray(rows[:, dl:])
        for a in (left, right, masses):
            a.setflags(write=False)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "masses", masses)

    def __setattr__(self, name, value):
        raise AttributeError("JointPMF is immutable")

    @property
    def support_size(self) -> int:
        return self.masses.shape[0]

    def marginal_left(self) -> LatticePMF:
        pts, ms = _group_rows(self.left, self.masses)
        return LatticePMF(pts, ms)

    def marginal_right(self) -> LatticePMF:
        pts, ms = _group_rows(self.right, self.masses)
        return LatticePMF(pts, ms)

    @staticmethod
    def independent(p: LatticePMF, q: LatticePMF) -> "JointPMF":
        """Product joint of two independent marginals."""
        n, m = len(p), len(q)
        left = np.repeat(p.points, m, axis=0)
        right = np.tile(q.points, (n, 1))
        masses = (p.masses[:, None] * q.masses[None, :]).ravel()
        return JointPMF(left, right, masses, _skip_checks=True)

    def __repr__(self) -> str:
        return (
            f"JointPMF(dims=({self.left.shape[1]}, {self.right.shape[1]}), "
            f"support={self.support_size})"
        )


def _mass_vector(p) -> np.ndarray:
    if isinstance(p, LatticePMF):
        return p.masses
    if isinstance(p, CyclicPMF):
        return p.table.ravel()
    if isinstance(p, JointPMF):
        return p.masses
    raise TypeError(f"not a pmf type: {type(p).__name__}")


def shannon_entropy(p) -> Nats:
    """Shannon entropy sum p*ln(1/p) in nats, with an error estimate."""
    total, abs_total = kernels.neg_xlogx_sum(_mass_vector(p))
    return Nats(total, 4.0 * _EPS * abs_total)


def dilate(p: LatticePMF, a: int) -> LatticePMF:
    """Pushforward of p under x -> a*x for a nonzero integer a."""
    a = int(a)
    if a == 0:
        raise ValueError("dilation by zero collapses the support")
    if a == 1:
        return p
    pmf = LatticePMF(p.points * a, p.masses, _skip_checks=True)
    # dilation is injective, but a < 0 reverses the canonical order
    order = _lex_order(pmf.points)
    return LatticePMF(pmf.points[order], pmf.masses[order], _skip_checks=True)


def _finalize_conv(points: np.ndarray, masses: np.ndarray) -> LatticePMF:
    keep = masses >= PRUNE_EPS
    points = points[keep]
    masses = masses[keep]
    if masses.size == 0:
        raise ValueError("convolution resulted in empty support after pruning")
    masses = masses / math.fsum(masses)
    order = _lex_order(points)
    return LatticePMF(points[order], masses[order], _skip_checks=True)


def _conv_sparse_encoded(p, q, lo_out, shape_out, vol: int) -> LatticePMF:
    st = _strides(shape_out)
    kp = _encode(p.points, p.points.min(axis=0), st)
    kq = _encode(q.points, q.points.min(axis=0), st)
    pairs = len(p) * len(q)
    size = vol if vol <= DENSE_ACC_LIMIT else 0
    if pairs <= _CHUNK_PAIRS or size > 0:
        keys, sums = kernels.pair_accumulate(kp, p.masses, kq, q.masses, size)
    else:
        # bound the materialized pair buffers, then merge the partials
        rows_per_chunk = max(1, _CHUNK_PAIRS // max(len(q), 1))
        parts_k, parts_v = [], []
        for start in range(0, len(p), rows_per_chunk):
            stop = start + rows_per_chunk
            keys, sums = kernels.pair_accumulate(
                kp[start:stop], p.masses[start:stop], kq, q.masses, 0
            )
            parts_k.append(keys)
            parts_v.append(sums)
        keys, sums = kernels.group_sum(np.concatenate(parts_k), np.concatenate(parts_v))
    return _finalize_conv(_decode(keys, lo_out, shape_out), sums)


def _conv_fft(p, q, lo_out, shape_out) -> LatticePMF:
    lo_p, shape_p, _ = _row_box(p.points)
    lo_q, shape_q, _ = _row_box(q.points)
    dense_p = np.zeros(tuple(int(s) for s in shape_p))
    dense_p[tuple((p.points - lo_p).T)] = p.masses
    dense_q = np.zeros(tuple(int(s) for s in shape_q))
    dense_q[tuple((q.points - lo_q).T)] = q.masses
    out = fftconvolve(dense_p, dense_q)
    np.maximum(out, 0.0, out=out)
    flat = out.ravel()
    nz = np.flatnonzero(flat)
    points = _decode(nz.astype(np.int64), lo_out, np.asarray(out.shape, dtype=np.int64))
    return _finalize_conv(points, flat[nz])


def convolve(p: LatticePMF, q: LatticePMF) -> LatticePMF:
    """Distribution of X + Y for independent X ~ p, Y ~ q."""
    if p.dim != q.dim:
        raise ValueError(f"dimension mismatch: {p.dim} vs {q.dim}")
    lo_p, shape_p, _ = _row_box(p.points)
    lo_q, shape_q, _ = _row_box(q.points)
    lo_out = lo_p + lo_q
    shape_out = shape_p + shape_q - 1
    vol = 1
    for s in shape_out.tolist():
        vol *= int(s)
    pairs = len(p) * len(q)
    if pairs > SPARSE_PAIR_LIMIT and vol <= FFT_VOL_LIMIT:
        return _conv_fft(p, q, lo_out, shape_out)
    if vol <= 2**62:
        return _conv_sparse_encoded(p, q, lo_out, shape_out, vol)
    # box too large to linearize: accumulate raw rows in chunks
    rows_per_chunk = max(1, _CHUNK_PAIRS // max(len(q), 1))
    rows_list, mass_list = [], []
    for start in range(0, len(p), rows_per_chunk):
        stop = start + rows_per_chunk
        sums = p.points[start:stop, None, :] + q.points[None, :, :]
        prods = (p.masses[start:stop, None] * q.masses[None, :]).ravel()
        r, m = _group_rows(sums.reshape(-1, p.dim), prods)
        rows_list.append(r)
        mass_list.append(m)
    rows, masses = _group_rows(np.concatenate(rows_list), np.concatenate(mass_list))
    return _finalize_conv(rows, masses)


def linear_combination(pmfs: Sequence[LatticePMF], coeffs: Sequence[int]) -> LatticePMF:
    """Distribution of sum_j a_j X_j for independent X_j ~ pmfs[j]."""
    if len(pmfs) != len(coeffs):
        raise ValueError("need one coefficient per pmf")
    coeffs = [int(a) for a in coeffs]
    acc = None
    for p, a in zip(pmfs, coeffs):
        if a == 0:
            continue
        term = dilate(p, a)
        acc = term if acc is None else convolve(acc, term)
    if acc is None:
        raise ValueError("all coefficients are zero")
    return acc


def floor_divide(p: LatticePMF, divisor: int) -> LatticePMF:
    """Pushforward of p under componentwise x -> floor(x / divisor)."""
    divisor = int(divisor)
    if divisor <= 0:
        raise ValueError("divisor must be a positive integer")
    if divisor == 1:
        return p
    rows, masses = _group_rows(p.points // divisor, p.masses)
    return LatticePMF(rows, masses, _skip_checks=True)


def _cyclic_scale(table: np.ndarray, a: int, m: int) -> np.ndarray:
    """Pushforward of a cyclic table under componentwise r -> a*r mod m."""
    a %= m
    idx = (a * np.arange(m, dtype=np.int64)) % m
    cur = table
    for axis in range(table.ndim):
        moved = np.moveaxis(cur, axis, 0)
        out = np.zeros_like(moved)
        np.add.at(out, idx, moved)
        cur = np.moveaxis(out, 0, axis)
    return cur


def cyclic_linear_combination(pmfs: Sequence[CyclicPMF], coeffs: Sequence[int]) -> CyclicPMF:
    """Distribution of sum_j a_j X_j mod 2^k, componentwise on (Z/2^k)^n."""
    if len(pmfs) != len(coeffs):
        raise ValueError("need one coefficient per pmf")
    k = pmfs[0].modulus_log2
    n = pmfs[0].dim
    if any(p.modulus_log2 != k or p.dim != n for p in pmfs):
        raise ValueError("all cyclic pmfs must share modulus and dimension")
    m = 1 << k
    tables = []
    for p, a in zip(pmfs, coeffs):
        a = int(a)
        if a == 0:
            continue
        tables.append(_cyclic_scale(p.table, a, m))
    if not tables:
        raise ValueError("all coefficients are zero")
    if len(tables) == 1:
        out = tables[0].copy()
    else:
        spectrum = np.fft.rfftn(tables[0])
        for t in tables[1:]:
            spectrum = spectrum * np.fft.rfftn(t)
        out = np.fft.irfftn(
            spectrum, s=tables[0].shape, axes=tuple(range(tables[0].ndim))
        )
    out[out < PRUNE_EPS] = 0.0
    out /= out.sum()
    return CyclicPMF(k, out, _skip_checks=True)


def lattice_to_cyclic(p: LatticePMF, modulus_log2: int) -> CyclicPMF:
    """Reduce a lattice pmf mod 2^k componentwise onto (Z/2^k)^dim."""
    k = int(modulus_log2)
    if k < 1:
        raise ValueError("modulus_log2 must be >= 1")
    m = 1 << k
    reduced = p.points % m
    shape = np.full(p.dim, m, dtype=np.int64)
    keys = _encode(reduced, np.zeros(p.dim, dtype=np.int64), _strides(shape))
    table = np.zeros(m**p.dim)
    np.add.at(table, keys, p.masses)
    return CyclicPMF(k, table.reshape((m,) * p.dim))


def independent_product(p: LatticePMF, q: LatticePMF) -> LatticePMF:
    """Pmf of the independent pair (X, Y) flattened onto Z^(dp+dq)."""
    n, m = len(p), len(q)
    if n * m > SPARSE_PAIR_LIMIT:
        raise ValueError("product support too large")
    left = np.repeat(p.points, m, axis=0)
    right = np.tile(q.points, (n, 1))
    masses = (p.masses[:, None] * q.masses[None, :]).ravel()
    pts = np.hstack([left, right])
    order = _lex_order(pts)
    return LatticePMF(pts[order], masses[order], _skip_checks=True)


def joint_of(f: Callable, p: LatticePMF) -> JointPMF:
    """Joint distribution of (X, f(X)) for X ~ p and a deterministic map f."""
    images = []
    for point in p.points.tolist():
        y = f(tuple(point) if p.dim > 1 else point[0])
        images.append((y,) if isinstance(y, (int, np.integer)) else tuple(y))
    widths = {len(y) for y in images}
    if len(widths) != 1:
        raise ValueError("map must produce tuples of a fixed dimension")
    return JointPMF(p.points, np.asarray(images, dtype=np.int64), p.masses)


def mutual_information(joint: JointPMF) -> Nats:
    """I(X;Y) = H(X) + H(Y) - H(X,Y), clamped to 0 below 1e-10."""
    h_l = shannon_entropy(joint.marginal_left())
    h_r = shannon_entropy(joint.marginal_right())
    h_j = shannon_entropy(joint)
    value = h_l.value + h_r.value - h_j.value
    err = h_l.err + h_r.err + h_j.err
    if value < MI_CLAMP:
        value = 0.0
    return Nats(value, err)

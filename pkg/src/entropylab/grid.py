"""Piecewise-constant densities on dyadic grids and their quantizations.

A :class:`GridDensity` is an exactly represented piecewise-constant
probability density on a half-open dyadic box in R^d: the box edges are
multiples of the cell side 2^-k, and the density takes one value per
cell.  All continuous-side computations in the package are exact for
this representative (up to floating-point rounding): entropies,
quantizations, fractional parts, convolutions with integer or dyadic
coefficients, truncations and torus reductions.

The key modeling fact used throughout: conditionally on its cell, a
grid-density variable is uniform within the cell and independent of the
cell index.  Writing X = (C + V) * 2^-K with C the cell coordinate and V
uniform on [0,1)^d, the floor of any integer combination satisfies

    floor(2^k sum_i a_i X_i) = floor((W + Z) / 2^(K-k)),
    W = sum_i a_i C_i,  Z = floor(sum_i a_i V_i),

because adding a fractional part never changes the floor of an integer
divided by 2^(K-k).  The law of Z is a polynomial volume computation
(:func:`floor_unit_sum_pmf`), so quantized sums, commutation gaps and
integer/fractional joints are all finite exact computations.
"""

from __future__ import annotations

import math
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.stats import norm

from entropylab.backend import kernels
from entropylab.errors import CoprimalityError
from entropylab.lattice import (
    CyclicPMF,
    JointPMF,
    LatticePMF,
    convolve,
    floor_divide,
    independent_product,
    lattice_to_cyclic,
    linear_combination,
    cyclic_linear_combination,
    shannon_entropy,
)
from entropylab.nats import Nats

__all__ = [
    "GridDensity",
    "uniform_density",
    "gaussian_density",
    "triangular_density",
    "power_density",
    "pmf_to_density",
    "differential_entropy",
    "refine",
    "translate",
    "quantize",
    "fractional_part",
    "truncate",
    "density_linear_combination",
    "renyi_gap",
    "floor_unit_sum_pmf",
    "quantization_commutation_gap",
    "int_frac_sum_joints",
    "epi_slack",
    "torus_quantize",
    "torus_commutation_gap",
]

INTEGRAL_TOL = 1e-10
_EPS = float(np.finfo(np.float64).eps)
_LN2 = math.log(2.0)
_MAX_CELLS = 2**24
_MAX_DYADIC_BITS = 32


def _dyadic_units(x, k: int, what: str) -> int:
    """Exact value of x * 2^k, requiring x to be a multiple of 2^-k."""
    if isinstance(x, (int, np.integer)):
        return int(x) << k if k >= 0 else int(x) >> (-k)
    num, den = float(x).as_integer_ratio()
    scaled = num * (1 << k) if k >= 0 else num
    if den != 0 and scaled % den == 0:
        return scaled // den
    raise ValueError(f"{what}={x} is not representable on a grid of resolution {k}")


def _dyadic_pair(a) -> tuple[int, int]:
    """Write a as t / 2^s with s >= 0 minimal; reject non-dyadic values."""
    if isinstance(a, (int, np.integer)):
        return int(a), 0
    num, den = float(a).as_integer_ratio()
    s = den.bit_length() - 1
    if (1 << s) != den or s > _MAX_DYADIC_BITS:
        raise ValueError(f"coefficient {a} is not a small dyadic rational")
    return num, s


class GridDensity:
    """Piecewise-constant density on a dyadic box at resolution k."""

    __slots__ = ("resolution", "lo", "values")

    def __init__(self, resolution: int, lo_units, values, *, _skip_checks: bool = False):
        k = int(resolution)
        values = np.ascontiguousarray(values, dtype=np.float64)
        if values.ndim < 1:
            raise ValueError("values must be a d-dimensional cell array")
        lo = np.asarray(lo_units, dtype=np.int64).reshape(-1)
        if lo.shape[0] != values.ndim:
            raise ValueError("lo_units length must match the value array dimension")
        if values.size > _MAX_CELLS:
            raise ValueError(f"grid of {values.size} cells exceeds the cell budget")
        if not _skip_checks:
            if np.any(values < 0.0) or not np.all(np.isfinite(values)):
                raise ValueError("cell values must be finite and nonnegative")
            total = math.fsum(values.ravel()) * 2.0 ** (-k * values.ndim)
            if abs(total - 1.0) > INTEGRAL_TOL:
                raise ValueError(f"integral must be 1 within {INTEGRAL_TOL}, got {total}")
        values.setflags(write=False)
        lo.setflags(write=False)
        object.__setattr__(self, "resolution", k)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("GridDensity is immutable")

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def hi(self) -> np.ndarray:
        return self.lo + np.asarray(self.values.shape, dtype=np.int64)

    @property
    def box(self) -> tuple[tuple[float, float], ...]:
        w = 2.0**-self.resolution
        return tuple((float(l) * w, float(h) * w) for l, h in zip(self.lo, self.hi))

    def cell_width(self) -> float:
        return 2.0**-self.resolution

    def integral(self) -> float:
        return math.fsum(self.values.ravel()) * 2.0 ** (-self.resolution * self.dim)

    def cells(self) -> tuple[np.ndarray, np.ndarray]:
        """Absolute cell coordinates (units of 2^-k) and their masses."""
        idx = np.argwhere(self.values > 0.0)
        coords = idx + self.lo[None, :]
        masses = self.values[tuple(idx.T)] * 2.0 ** (-self.resolution * self.dim)
        return coords.astype(np.int64), masses

    def __repr__(self) -> str:
        return f"GridDensity(dim={self.dim}, k={self.resolution}, cells={self.values.size})"

    @staticmethod
    def from_box(resolution: int, box, values) -> "GridDensity":
        """Build from dyadic float box edges instead of integer cell units."""
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 1 and np.ndim(box) == 1:
            box = (box,)
        lo = [_dyadic_units(b[0], resolution, "box edge") for b in box]
        for axis, b in enumerate(box):
            hi = _dyadic_units(b[1], resolution, "box edge")
            if hi - lo[axis] != values.shape[axis]:
                raise ValueError("box does not match the value array shape")
        return GridDensity(resolution, lo, values)


def uniform_density(box, k: int) -> GridDensity:
    """Uniform density on a dyadic box, one value per grid cell."""
    if np.ndim(box) == 1:
        box = (box,)
    lo = [_dyadic_units(b[0], k, "box edge") for b in box]
    hi = [_dyadic_units(b[1], k, "box edge") for b in box]
    shape = tuple(h - l for l, h in zip(lo, hi))
    if any(s <= 0 for s in shape):
        raise ValueError("box must have positive volume")
    volume = 1.0
    for s in shape:
        volume *= s * 2.0**-k
    return GridDensity(k, lo, np.full(shape, 1.0 / volume))


def gaussian_density(mean: float, sigma: float, trunc: float, k: int, dim: int = 1) -> GridDensity:
    """Normal(mean, sigma^2) truncated to [-N, N]^dim, cell-averaged exactly.

    Each cell carries the average of the true density over the cell, so
    quantizations of the result at any coarser resolution have the exact
    cell probabilities of the truncated Gaussian.  Coordinates are iid
    across axes.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if not -trunc < mean < trunc:
        raise ValueError("mean must lie inside the truncation box")
    n_units = _dyadic_units(trunc, k, "truncation")
    if n_units <= 0:
        raise ValueError("truncation must be positive")
    edges = np.arange(-n_units, n_units + 1, dtype=np.float64) * 2.0**-k
    cdf = norm.cdf(edges, loc=mean, scale=sigma)
    masses = np.diff(cdf)
    axis_values = masses / (cdf[-1] - cdf[0]) * 2.0**k
    values = axis_values
    for _ in range(dim - 1):
        values = np.multiply.outer(values, axis_values)
    return GridDensity(k, [-n_units] * dim, values)


def triangular_density(k: int) -> GridDensity:
    """Tent density min(x, 2-x) on [0, 2], cell-averaged exactly."""
    if k < 0:
        raise ValueError("resolution must be >= 0")
    n = 1 << k
    mid = (np.arange(2 * n, dtype=np.float64) + 0.5) * 2.0**-k
    values = np.where(mid <= 1.0, mid, 2.0 - mid)
    return GridDensity(k, [0], values)


def power_density(exponent: float, k: int) -> GridDensity:
    """Density (p+1) * x^p on [0, 1], cell-averaged exactly."""
    if exponent < 0:
        raise ValueError("exponent must be >= 0")
    if k < 0:
        raise ValueError("resolution must be >= 0")
    n = 1 << k
    edges = np.arange(n + 1, dtype=np.float64) * 2.0**-k
    values = np.diff(edges ** (exponent + 1.0)) * n
    return GridDensity(k, [0], values)


def pmf_to_density(p: LatticePMF, k: int) -> GridDensity:
    """Spread each atom of an integer pmf uniformly over its unit cell."""
    if k < 0:
        raise ValueError("resolution must be >= 0")
    lo_pt = p.points.min(axis=0)
    hi_pt = p.points.max(axis=0) + 1
    shape = tuple(int(s) << k for s in (hi_pt - lo_pt))
    values = np.zeros(shape)
    step = 1 << k
    for point, mass in zip(p.points.tolist(), p.masses):
        sl = tuple(
            slice((c - l) * step, (c - l + 1) * step) for c, l in zip(point, lo_pt.tolist())
        )
        values[sl] = mass
    return GridDensity(k, lo_pt * step, values)


def differential_entropy(f: GridDensity) -> Nats:
    """h(f) = sum over cells of v * 2^(-kd) * ln(1/v), in nats."""
    kd = f.resolution * f.dim
    masses = f.values.ravel() * 2.0**-kd
    total, abs_total = kernels.neg_xlogx_sum(masses)
    value = total - kd * _LN2
    return Nats(value, 4.0 * _EPS * (abs_total + abs(kd) * _LN2))


def refine(f: GridDensity, resolution: int) -> GridDensity:
    """Re-express f on a finer dyadic grid; exact, values unchanged."""
    if resolution < f.resolution:
        raise ValueError("refinement must not lower the resolution")
    if resolution == f.resolution:
        return f
    r = 1 << (resolution - f.resolution)
    values = f.values
    for axis in range(f.dim):
        values = np.repeat(values, r, axis=axis)
    return GridDensity(resolution, f.lo * r, values, _skip_checks=True)


def translate(f: GridDensity, shift) -> GridDensity:
    """Translate by a dyadic vector representable at f's resolution."""
    shift = np.atleast_1d(shift)
    if shift.shape[0] != f.dim:
        raise ValueError("shift must have one component per axis")
    units = np.asarray(
        [_dyadic_units(s, f.resolution, "shift") for s in shift.tolist()], dtype=np.int64
    )
    return GridDensity(f.resolution, f.lo + units, f.values, _skip_checks=True)


def quantize(f: GridDensity, k: int) -> LatticePMF:
    """Pmf of floor(2^k X) on Z^d for X ~ f; requires k <= resolution."""
    k = int(k)
    if k > f.resolution:
        raise ValueError(f"cannot quantize at {k} above the representation resolution {f.resolution}")
    m = 1 << (f.resolution - k)
    coords, masses = f.cells()
    pts = coords // m
    from entropylab.lattice import _group_rows  # shared row-merging helper

    pts, sums = _group_rows(pts, masses)
    keep = sums > 0.0
    sums = sums[keep]
    return LatticePMF(pts[keep], sums / math.fsum(sums))


def fractional_part(f: GridDensity, k: int) -> GridDensity:
    """Density of {2^k X} on [0,1)^d at resolution (resolution - k)."""
    k = int(k)
    if not 0 <= k < f.resolution:
        raise ValueError("need 0 <= k < resolution")
    kr = f.resolution - k
    m = 1 << kr
    coords, masses = f.cells()
    folded = coords % m
    shape = np.full(f.dim, m, dtype=np.int64)
    strides = np.ones(f.dim, dtype=np.int64)
    for j in range(f.dim - 2, -1, -1):
        strides[j] = strides[j + 1] * m
    keys = folded @ strides
    table = np.zeros(m**f.dim)
    np.add.at(table, keys, masses)
    values = table.reshape((m,) * f.dim) * float(m) ** f.dim
    return GridDensity(kr, [0] * f.dim, values, _skip_checks=True)


def truncate(f: GridDensity, bound) -> GridDensity:
    """Condition f on the box [-N, N)^d and renormalize."""
    n_units = _dyadic_units(bound, f.resolution, "truncation")
    if n_units <= 0:
        raise ValueError("truncation must be positive")
    slices = []
    new_lo = []
    for axis in range(f.dim):
        lo = int(f.lo[axis])
        start = max(lo, -n_units)
        stop = min(lo + f.values.shape[axis], n_units)
        if start >= stop:
            raise ValueError("truncation box does not meet the support")
        slices.append(slice(start - lo, stop - lo))
        new_lo.append(start)
    window = f.values[tuple(slices)]
    mass = math.fsum(window.ravel()) * 2.0 ** (-f.resolution * f.dim)
    if mass <= 0.0:
        raise ValueError("truncation box carries no mass")
    return GridDensity(f.resolution, new_lo, window / mass, _skip_checks=True)


def _scaled(f: GridDensity, t: int, s: int) -> GridDensity:
    """Density of (t / 2^s) X for X ~ f; exact, resolution becomes k+s."""
    if t == 0:
        raise ValueError("zero coefficient")
    a_abs = abs(t) * 2.0**-s
    values = f.values / a_abs**f.dim
    new_lo = []
    for axis in range(f.dim):
        n = f.values.shape[axis]
        lo = int(f.lo[axis])
        if t > 0:
            new_lo.append(t * lo)
        else:
            new_lo.append(t * (lo + n))
            values = np.flip(values, axis=axis)
        values = np.repeat(values, abs(t), axis=axis)
    return GridDensity(f.resolution + s, new_lo, values, _skip_checks=True)


def _cells_pmf(f: GridDensity) -> LatticePMF:
    coords, masses = f.cells()
    return LatticePMF(coords, masses / math.fsum(masses))


def _pmf_to_grid(p: LatticePMF, resolution: int) -> GridDensity:
    """Interpret pmf atoms as cell coordinates at the given resolution."""
    lo = p.points.min(axis=0)
    shape = tuple(int(s) for s in (p.points.max(axis=0) - lo + 1))
    values = np.zeros(shape)
    values[tuple((p.points - lo).T)] = p.masses * 2.0 ** (resolution * p.dim)
    return GridDensity(resolution, lo, values, _skip_checks=True)


def density_linear_combination(fs: Sequence[GridDensity], coeffs: Sequence) -> GridDensity:
    """Density of sum_j a_j X_j at cell level, for dyadic coefficients.

    Integer (and more generally dyadic t/2^s) coefficients scale each
    input exactly onto a finer grid; the inputs are then refined to the
    finest resolution present and convolved cell-by-cell.  The output
    resolution is that finest cell side, so no resampling ever happens.
    """
    if len(fs) != len(coeffs):
        raise ValueError("need one coefficient per density")
    dim = fs[0].dim
    if any(f.dim != dim for f in fs):
        raise ValueError("dimension mismatch between densities")
    scaled = []
    for f, a in zip(fs, coeffs):
        t, s = _dyadic_pair(a)
        if t == 0:
            continue
        scaled.append(_scaled(f, t, s))
    if not scaled:
        raise ValueError("all coefficients are zero")
    resolution = max(g.resolution for g in scaled)
    cell_pmfs = [_cells_pmf(refine(g, resolution)) for g in scaled]
    acc = cell_pmfs[0]
    for term in cell_pmfs[1:]:
        acc = convolve(acc, term)
    return _pmf_to_grid(acc, resolution)


def renyi_gap(f: GridDensity, k: int) -> Nats:
    """H(floor(2^k X)) - d*k*ln 2 - h(X), the dyadic expansion gap."""
    h_q = shannon_entropy(quantize(f, k))
    h_f = differential_entropy(f)
    return Nats(h_q.value - f.dim * k * _LN2 - h_f.value, h_q.err + h_f.err)


def _unit_sum_cdf(cs: Sequence[int], s: float) -> float:
    """P[sum_i U_i <= s] for independent U_i uniform on [0, c_i]."""
    m = len(cs)
    total = float(sum(cs))
    if s <= 0.0:
        return 0.0
    if s >= total:
        return 1.0
    acc = s**m
    for r in range(1, m + 1):
        sign = -1.0 if r % 2 else 1.0
        for subset in combinations(cs, r):
            rest = s - sum(subset)
            if rest > 0.0:
                acc += sign * rest**m
    denom = math.factorial(m)
    for c in cs:
        denom *= c
    return acc / denom


def floor_unit_sum_pmf(coeffs: Sequence[int], dim: int = 1) -> LatticePMF:
    """Exact law of floor(sum_i a_i V_i) for V_i iid uniform on [0,1)^dim.

    The one-dimensional cdf of the sum is a polynomial spline evaluated
    by inclusion-exclusion; coordinates are independent, so higher
    dimensions are the iid product of the one-dimensional law.
    """
    cs = [int(a) for a in coeffs if int(a) != 0]
    if not cs:
        raise ValueError("all coefficients are zero")
    if len(cs) > 20:
        raise ValueError("too many coefficients for exact volume enumeration")
    mags = [abs(a) for a in cs]
    shift = sum(a for a in cs if a < 0)
    span = sum(mags)
    atoms = {}
    prev = 0.0
    for z in range(span):
        cur = _unit_sum_cdf(mags, float(z + 1))
        mass = cur - prev
        prev = cur
        if mass > 0.0:
            atoms[z + shift] = mass
    line = LatticePMF.from_dict(atoms)
    out = line
    for _ in range(dim - 1):
        out = independent_product(out, line)
    return out


def _check_unit_box(f: GridDensity):
    if any(l != 0 for l in f.lo) or any(s != 1 << f.resolution for s in f.values.shape):
        raise ValueError("density must live on the unit box [0,1)^d")


def _check_coprime(coeffs: Sequence[int]) -> list[int]:
    cs = [int(a) for a in coeffs]
    nonzero = [abs(a) for a in cs if a != 0]
    if not nonzero:
        raise ValueError("all coefficients are zero")
    if math.gcd(*nonzero) != 1:
        raise CoprimalityError(f"coefficients {cs} must have gcd 1")
    return cs


def _exact_quantized_sum(fs: Sequence[GridDensity], coeffs: Sequence[int], k: int) -> LatticePMF:
    """Exact pmf of floor(2^k sum_i a_i X_i) for grid densities X_i."""
    resolution = max(f.resolution for f in fs)
    refined = [refine(f, resolution) for f in fs]
    w = linear_combination([quantize(g, resolution) for g in refined], coeffs)
    z = floor_unit_sum_pmf(coeffs, fs[0].dim)
    return floor_divide(convolve(w, z), 1 << (resolution - k))


def quantization_commutation_gap(fs: Sequence[GridDensity], coeffs: Sequence[int], k: int) -> Nats:
    """H(floor(2^k sum a_i X_i)) - H(sum a_i floor(2^k X_i)), exactly.

    Requires densities on the unit box and coefficients with gcd 1.
    """
    cs = _check_coprime(coeffs)
    if len(fs) != len(cs):
        raise ValueError("need one coefficient per density")
    dim = fs[0].dim
    if any(f.dim != dim for f in fs):
        raise ValueError("dimension mismatch between densities")
    for f in fs:
        _check_unit_box(f)
    if not 0 <= k <= min(f.resolution for f in fs):
        raise ValueError("need 0 <= k <= the coarsest representation resolution")
    h_a = shannon_entropy(_exact_quantized_sum(fs, cs, k))
    h_b = shannon_entropy(linear_combination([quantize(f, k) for f in fs], cs))
    return Nats(h_a.value - h_b.value, h_a.err + h_b.err)


def int_frac_sum_joints(
    fs: Sequence[GridDensity], coeffs: Sequence[int], k: int
) -> tuple[JointPMF, JointPMF]:
    """Joints of (Z_k, A_k) and (Z_k, B_k) for one-dimensional densities.

    A_k = floor(2^k sum a_i X_i), B_k = sum a_i floor(2^k X_i) and
    Z_k = floor(sum a_i {2^k X_i}) = A_k - B_k; the joints are exact.
    """
    cs = _check_coprime(coeffs)
    if any(f.dim != 1 for f in fs):
        raise ValueError("joint enumeration is implemented for dimension 1")
    for f in fs:
        _check_unit_box(f)
    resolution = max(f.resolution for f in fs)
    if not 0 <= k <= min(f.resolution for f in fs):
        raise ValueError("need 0 <= k <= the coarsest representation resolution")
    m = 1 << (resolution - k)
    b_arr = np.zeros(1, dtype=np.int64)
    r_arr = np.zeros(1, dtype=np.int64)
    mass = np.ones(1)
    for f, a in zip(fs, cs):
        if a == 0:
            continue
        cells = quantize(refine(f, resolution), resolution)
        coords = cells.points[:, 0]
        q = a * (coords >> (resolution - k))
        r = a * (coords & (m - 1))
        b_arr = (b_arr[:, None] + q[None, :]).ravel()
        r_arr = (r_arr[:, None] + r[None, :]).ravel()
        mass = (mass[:, None] * cells.masses[None, :]).ravel()
        if mass.size > _MAX_CELLS:
            raise ValueError("joint enumeration exceeds the cell budget")
        # compress duplicate (B, R) pairs to keep the product bounded
        pair_rows = np.stack([b_arr, r_arr], axis=1)
        from entropylab.lattice import _group_rows

        pair_rows, mass = _group_rows(pair_rows, mass)
        b_arr = pair_rows[:, 0]
        r_arr = pair_rows[:, 1]
    zf = floor_unit_sum_pmf(cs, 1)
    f_sup = zf.points[:, 0]
    z = (r_arr[:, None] + f_sup[None, :]) // m
    b = np.broadcast_to(b_arr[:, None], z.shape)
    w = (mass[:, None] * zf.masses[None, :]).ravel()
    z = z.ravel()
    b = b.ravel()
    keep = w > 0.0
    z, b, w = z[keep], b[keep], w[keep]
    joint_za = JointPMF(z, b + z, w)
    joint_zb = JointPMF(z, b, w)
    return joint_za, joint_zb


def epi_slack(f: GridDensity, g: GridDensity) -> Nats:
    """h(X+Y) - (h(X)+h(Y))/2 - (d/2) ln 2, nonnegative for valid densities."""
    if f.dim != g.dim:
        raise ValueError("dimension mismatch")
    h_sum = differential_entropy(density_linear_combination([f, g], [1, 1]))
    h_f = differential_entropy(f)
    h_g = differential_entropy(g)
    value = h_sum.value - 0.5 * (h_f.value + h_g.value) - 0.5 * f.dim * _LN2
    return Nats(value, h_sum.err + 0.5 * (h_f.err + h_g.err))


def torus_quantize(f: GridDensity, k: int) -> CyclicPMF:
    """Pmf of floor(2^k Theta) on (Z/2^k)^n for Theta ~ f on [0,1)^n."""
    _check_unit_box(f)
    if not 1 <= k <= f.resolution:
        raise ValueError("need 1 <= k <= resolution")
    return lattice_to_cyclic(quantize(f, k), k)


def torus_commutation_gap(fs: Sequence[GridDensity], coeffs: Sequence[int], k: int) -> Nats:
    """H(A_k) - H(B_k) for the mod-2^k quantized sum on the torus.

    A_k = floor(2^k sum a_i Theta_i) mod 2^k computed from the exact
    real-line law, B_k = sum a_i floor(2^k Theta_i) mod 2^k.
    """
    cs = _check_coprime(coeffs)
    for f in fs:
        _check_unit_box(f)
    if not 1 <= k <= min(f.resolution for f in fs):
        raise ValueError("need 1 <= k <= the coarsest representation resolution")
    a_line = _exact_quantized_sum(fs, cs, k)
    h_a = shannon_entropy(lattice_to_cyclic(a_line, k))
    h_b = shannon_entropy(cyclic_linear_combination([torus_quantize(f, k) for f in fs], cs))
    return Nats(h_a.value - h_b.value, h_a.err + h_b.err)

"""Distances and information functionals between finite distributions.

Total variation, Kullback-Leibler divergence, translation distance for
grid densities, the conditional total-variation inequality, and the
bound relating mutual information to the total variation between a
joint law and the product of its marginals:

    I(W; Y) <= ln(|W| - 1) * T + h_b(T),   T = TV(P_WY, P_W x P_Y),

where h_b is the natural-log binary entropy.  KL divergence raises on an
absolute-continuity violation rather than returning infinity, so every
returned value is finite by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from entropylab.lattice import (
    CyclicPMF,
    JointPMF,
    LatticePMF,
    _group_rows,
    mutual_information,
)
from entropylab.grid import GridDensity, quantize, refine, translate
from entropylab.nats import Nats

__all__ = [
    "TVValue",
    "total_variation",
    "kl_divergence",
    "binary_entropy",
    "shift_tv",
    "conditional_tv_bound_check",
    "ConditionalTVCheck",
    "t_information_bound",
    "int_frac_mutual_information",
]

_TV_SLACK = 1e-12


@dataclass(frozen=True)
class TVValue:
    """A total-variation distance, pinned to [0, 1]."""

    value: float

    def __post_init__(self):
        if not -_TV_SLACK <= self.value <= 1.0 + _TV_SLACK:
            raise ValueError(f"total variation must lie in [0,1], got {self.value}")
        object.__setattr__(self, "value", min(max(self.value, 0.0), 1.0))

    def __float__(self) -> float:
        return self.value


def _aligned_masses(p: LatticePMF, q: LatticePMF) -> tuple[np.ndarray, np.ndarray]:
    """Mass vectors of p and q over the union of their supports."""
    if p.dim != q.dim:
        raise ValueError("dimension mismatch")
    rows = np.vstack([p.points, q.points])
    tagged = np.concatenate([p.masses, np.zeros(len(q))])
    other = np.concatenate([np.zeros(len(p)), q.masses])
    union, mp = _group_rows(rows, tagged)
    _, mq = _group_rows(rows, other)
    return mp, mq


def total_variation(p, q) -> TVValue:
    """TV(p, q) = (1/2) * L1 distance between the two distributions."""
    if isinstance(p, LatticePMF) and isinstance(q, LatticePMF):
        mp, mq = _aligned_masses(p, q)
        return TVValue(0.5 * math.fsum(np.abs(mp - mq)))
    if isinstance(p, CyclicPMF) and isinstance(q, CyclicPMF):
        if p.modulus_log2 != q.modulus_log2 or p.dim != q.dim:
            raise ValueError("cyclic pmfs must share modulus and dimension")
        return TVValue(0.5 * math.fsum(np.abs(p.table.ravel() - q.table.ravel())))
    if isinstance(p, JointPMF) and isinstance(q, JointPMF):
        rows_p = np.hstack([p.left, p.right])
        rows_q = np.hstack([q.left, q.right])
        if rows_p.shape[1] != rows_q.shape[1]:
            raise ValueError("joint pmfs must have matching pair dimensions")
        rows = np.vstack([rows_p, rows_q])
        mp = np.concatenate([p.masses, np.zeros(len(q.masses))])
        mq = np.concatenate([np.zeros(len(p.masses)), q.masses])
        _, a = _group_rows(rows, mp)
        _, b = _group_rows(rows, mq)
        return TVValue(0.5 * math.fsum(np.abs(a - b)))
    if isinstance(p, GridDensity) and isinstance(q, GridDensity):
        return _grid_tv(p, q)
    raise TypeError("total_variation expects two distributions of the same kind")


def _grid_union_values(p: GridDensity, q: GridDensity):
    if p.dim != q.dim:
        raise ValueError("dimension mismatch")
    k = max(p.resolution, q.resolution)
    p = refine(p, k)
    q = refine(q, k)
    lo = np.minimum(p.lo, q.lo)
    hi = np.maximum(p.hi, q.hi)
    shape = tuple(int(s) for s in (hi - lo))
    a = np.zeros(shape)
    b = np.zeros(shape)
    sl_p = tuple(slice(int(l - u), int(l - u + n)) for l, u, n in zip(p.lo, lo, p.shape))
    sl_q = tuple(slice(int(l - u), int(l - u + n)) for l, u, n in zip(q.lo, lo, q.shape))
    a[sl_p] = p.values
    b[sl_q] = q.values
    return a, b, k


def _grid_tv(p: GridDensity, q: GridDensity) -> TVValue:
    a, b, k = _grid_union_values(p, q)
    cell = 2.0 ** (-k * p.dim)
    return TVValue(0.5 * cell * math.fsum(np.abs(a - b).ravel()))


def kl_divergence(p, q) -> Nats:
    """D(p || q) in nats; raises if p is not absolutely continuous w.r.t. q."""
    if isinstance(p, LatticePMF) and isinstance(q, LatticePMF):
        mp, mq = _aligned_masses(p, q)
    elif isinstance(p, GridDensity) and isinstance(q, GridDensity):
        a, b, k = _grid_union_values(p, q)
        cell = 2.0 ** (-k * p.dim)
        mp = a.ravel() * cell
        mq = b.ravel() * cell
    elif isinstance(p, CyclicPMF) and isinstance(q, CyclicPMF):
        if p.modulus_log2 != q.modulus_log2 or p.dim != q.dim:
            raise ValueError("cyclic pmfs must share modulus and dimension")
        mp = p.table.ravel()
        mq = q.table.ravel()
    else:
        raise TypeError("kl_divergence expects two distributions of the same kind")
    bad = (mp > 0.0) & (mq <= 0.0)
    if np.any(bad):
        raise ValueError(
            "kl_divergence undefined: p has mass outside the support of q "
            f"({int(bad.sum())} offending atoms)"
        )
    pos = mp > 0.0
    terms = mp[pos] * np.log(mp[pos] / mq[pos])
    value = math.fsum(terms)
    err = 4.0 * float(np.finfo(np.float64).eps) * math.fsum(np.abs(terms))
    return Nats(max(value, 0.0), err)


def binary_entropy(t: float) -> float:
    """h_b(t) = -t ln t - (1-t) ln(1-t), stable at and near the endpoints."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"binary entropy needs t in [0,1], got {t}")
    if t == 0.0 or t == 1.0:
        return 0.0
    # log1p keeps the (1-t) term accurate for t near 0; swap roles near 1
    if t > 0.5:
        t = 1.0 - t
    return -t * math.log(t) - (1.0 - t) * math.log1p(-t)


def shift_tv(f: GridDensity, shift) -> TVValue:
    """TV between f and its translate by a dyadic on-grid shift."""
    return _grid_tv(f, translate(f, shift))


@dataclass(frozen=True)
class ConditionalTVCheck:
    """Both sides of the conditional total-variation inequality."""

    lhs: float
    rhs: float
    event_probability: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 1e-10


def conditional_tv_bound_check(
    coupling: JointPMF, z_of: Callable, event: Iterable
) -> ConditionalTVCheck:
    """Check TV(P_X|Z in E, P_Y|Z in E) <= TV(P_X, P_Y) / P[Z in E].

    The coupling assigns mass to pairs (x, y) carrying a common value
    Z = z_of(x) = z_of(y); the map must agree on every support pair.
    """
    event = set(event)

    def _z(row: np.ndarray):
        val = z_of(tuple(row) if row.shape[0] > 1 else int(row[0]))
        return val if not isinstance(val, (list, np.ndarray)) else tuple(val)

    z_left = [_z(r) for r in coupling.left]
    z_right = [_z(r) for r in coupling.right]
    for zl, zr in zip(z_left, z_right):
        if zl != zr:
            raise ValueError("z_of must take the same value on both halves of each pair")
    in_event = np.asarray([z in event for z in z_left], dtype=bool)
    prob = float(math.fsum(coupling.masses[in_event]))
    if prob <= 0.0:
        raise ValueError("the conditioning event has zero probability")
    p_x = coupling.marginal_left()
    p_y = coupling.marginal_right()
    unconditional = total_variation(p_x, p_y).value
    cond_masses = coupling.masses[in_event] / prob
    cond_x = LatticePMF(*_group_rows(coupling.left[in_event], cond_masses))
    cond_y = LatticePMF(*_group_rows(coupling.right[in_event], cond_masses))
    lhs = total_variation(cond_x, cond_y).value
    return ConditionalTVCheck(lhs=lhs, rhs=unconditional / prob, event_probability=prob)


def t_information_bound(joint: JointPMF, wcard: int) -> tuple[Nats, float]:
    """Mutual information and its total-variation bound for a joint law.

    Returns ``(I(W;Y), ln(wcard-1) * T + h_b(T))`` where T is the total
    variation between the joint and the product of its marginals, and
    the first marginal takes at most ``wcard`` values.  Raises if the
    computed information exceeds the bound beyond rounding, since that
    would contradict the inequality.
    """
    wcard = int(wcard)
    if wcard < 2:
        raise ValueError("the alphabet bound must be at least 2")
    w_marg = joint.marginal_left()
    if len(w_marg) > wcard:
        raise ValueError(f"first marginal has {len(w_marg)} atoms, more than wcard={wcard}")
    product = JointPMF.independent(w_marg, joint.marginal_right())
    t = total_variation(joint, product).value
    info = mutual_information(joint)
    bound = (math.log(wcard - 1) if wcard > 2 else 0.0) * t + binary_entropy(t)
    if info.value > bound + 1e-10:
        raise ArithmeticError(
            f"information {info.value} exceeds its bound {bound}; numerical inconsistency"
        )
    return info, bound


def int_frac_mutual_information(f: GridDensity, k: int) -> Nats:
    """I(floor(2^k X); {2^k X}) for a grid density X, computed exactly.

    Within each cell the variable is uniform and independent of the cell
    index, so the information reduces to that between the cell's integer
    part and its residue at the representation resolution.
    """
    if not 0 <= k < f.resolution:
        raise ValueError("need 0 <= k < resolution")
    m = 1 << (f.resolution - k)
    coords, masses = f.cells()
    return mutual_information(JointPMF(coords // m, coords % m, masses))

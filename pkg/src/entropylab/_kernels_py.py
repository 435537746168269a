"""Pure-numpy implementations of the hot kernels.

These mirror the signatures of the compiled module ``_kernels_cy`` and are
selected by :mod:`entropylab.backend` when the extension is unavailable or
explicitly disabled.  Accuracy notes: ``neg_xlogx_sum`` uses ``math.fsum``
(exactly rounded), which is at least as accurate as the compiled Kahan
loop; the grouped sums below use numpy reductions whose ordering differs
from the compiled sequential scan only at the level of double rounding.
"""

from __future__ import annotations

import math

import numpy as np


def neg_xlogx_sum(w: np.ndarray) -> tuple[float, float]:
    """Sum of -w*ln(w) over strictly positive entries.

    Returns ``(total, abs_total)`` where ``abs_total`` is the sum of the
    absolute values of the individual terms (used for error estimates).
    Zero entries contribute zero; negative entries must have been rejected
    by the caller's validation.
    """
    w = np.asarray(w, dtype=np.float64).ravel()
    pos = w[w > 0.0]
    if pos.size == 0:
        return 0.0, 0.0
    terms = -(pos * np.log(pos))
    return math.fsum(terms), math.fsum(np.abs(terms))


def group_sum(keys: np.ndarray, vals: np.ndarray, size: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Sum ``vals`` grouped by int64 ``keys``; returns (unique_keys, sums).

    If ``size > 0`` all keys lie in ``[0, size)`` and a dense accumulator
    of that length is used; otherwise the pairs are sorted and segment
    summed.  Groups whose total is exactly zero are dropped only on the
    dense path (they are indistinguishable from absent keys there).
    """
    keys = np.ascontiguousarray(keys, dtype=np.int64)
    vals = np.ascontiguousarray(vals, dtype=np.float64)
    if size > 0:
        acc = np.bincount(keys, weights=vals, minlength=size)
        nz = np.flatnonzero(acc)
        return nz.astype(np.int64), acc[nz]
    order = np.argsort(keys, kind="stable")
    ks = keys[order]
    vs = vals[order]
    if ks.size == 0:
        return ks, vs
    starts = np.concatenate(([0], np.flatnonzero(np.diff(ks)) + 1))
    return ks[starts], np.add.reduceat(vs, starts)


def pair_accumulate(
    kp: np.ndarray,
    mp: np.ndarray,
    kq: np.ndarray,
    mq: np.ndarray,
    size: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Accumulate the outer pair sums kp[i]+kq[j] with weights mp[i]*mq[j]."""
    kp = np.ascontiguousarray(kp, dtype=np.int64)
    kq = np.ascontiguousarray(kq, dtype=np.int64)
    mp = np.ascontiguousarray(mp, dtype=np.float64)
    mq = np.ascontiguousarray(mq, dtype=np.float64)
    keys = (kp[:, None] + kq[None, :]).ravel()
    vals = (mp[:, None] * mq[None, :]).ravel()
    return group_sum(keys, vals, size)

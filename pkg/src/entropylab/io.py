"""Plain-text serialization for pmfs and grid densities.

Lattice pmfs are written one atom per line as ``x1 x2 ... xd : mass``;
``#`` starts a comment.  Cyclic pmfs carry a first line ``cyclic k n``
and list nonzero residues in the same atom format.  Grid densities
carry ``grid d k lo1 hi1 ... lod hid`` followed by ``c1 ... cd : value``
lines giving the cell coordinate in units of 2^-k and the density value
on that cell.  Masses and values use shortest round-trip float notation,
so a file read back reproduces the object bit for bit.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from entropylab.grid import GridDensity
from entropylab.lattice import CyclicPMF, LatticePMF

__all__ = ["dumps", "loads", "save", "load"]


def _atom_lines(points: np.ndarray, weights: np.ndarray) -> list[str]:
    return [
        " ".join(str(c) for c in pt) + " : " + repr(float(w))
        for pt, w in zip(points.tolist(), weights)
    ]


def dumps(obj) -> str:
    """Serialize a LatticePMF, CyclicPMF or GridDensity to text."""
    if isinstance(obj, LatticePMF):
        return "\n".join(_atom_lines(obj.points, obj.masses)) + "\n"
    if isinstance(obj, CyclicPMF):
        idx = np.argwhere(obj.table > 0.0)
        vals = obj.table[tuple(idx.T)]
        header = f"cyclic {obj.modulus_log2} {obj.dim}"
        return "\n".join([header] + _atom_lines(idx, vals)) + "\n"
    if isinstance(obj, GridDensity):
        w = 2.0**-obj.resolution
        edges = " ".join(
            f"{repr(float(l) * w)} {repr(float(h) * w)}" for l, h in zip(obj.lo, obj.hi)
        )
        header = f"grid {obj.dim} {obj.resolution} {edges}"
        idx = np.argwhere(obj.values > 0.0)
        coords = idx + np.asarray(obj.lo)[None, :]
        vals = obj.values[tuple(idx.T)]
        return "\n".join([header] + _atom_lines(coords, vals)) + "\n"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _parse_atoms(lines: list[tuple[int, str]], dim: int | None, what: str):
    points = []
    weights = []
    for lineno, line in lines:
        if ":" not in line:
            raise ValueError(f"line {lineno}: expected 'coords : value' in {what}")
        left, _, right = line.partition(":")
        try:
            pt = [int(tok) for tok in left.split()]
            w = float(right.strip())
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        if dim is not None and len(pt) != dim:
            raise ValueError(f"line {lineno}: expected {dim} coordinates, got {len(pt)}")
        points.append(pt)
        weights.append(w)
    if not points:
        raise ValueError(f"no atoms found in {what}")
    widths = {len(p) for p in points}
    if len(widths) != 1:
        raise ValueError(f"inconsistent coordinate dimensions in {what}")
    return np.asarray(points, dtype=np.int64), np.asarray(weights)


def loads(text: str):
    """Parse text produced by :func:`dumps` (format auto-detected)."""
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((lineno, line))
    if not lines:
        raise ValueError("empty distribution file")
    header = lines[0][1].split()
    if header[0] == "cyclic":
        if len(header) != 3:
            raise ValueError("cyclic header must be 'cyclic k n'")
        k, n = int(header[1]), int(header[2])
        points, weights = _parse_atoms(lines[1:], n, "cyclic pmf")
        table = np.zeros(((1 << k),) * n)
        table[tuple(points.T)] = weights
        return CyclicPMF(k, table)
    if header[0] == "grid":
        if len(header) < 3:
            raise ValueError("grid header must be 'grid d k lo1 hi1 ... lod hid'")
        d, k = int(header[1]), int(header[2])
        edges = [float(tok) for tok in header[3:]]
        if len(edges) != 2 * d:
            raise ValueError("grid header needs one lo/hi pair per dimension")
        scale = float(1 << k)
        lo = np.asarray([round(edges[2 * i] * scale) for i in range(d)], dtype=np.int64)
        hi = np.asarray([round(edges[2 * i + 1] * scale) for i in range(d)], dtype=np.int64)
        for i in range(d):
            if lo[i] / scale != edges[2 * i] or hi[i] / scale != edges[2 * i + 1]:
                raise ValueError(f"grid edges on axis {i} are not multiples of 2^-{k}")
        points, weights = _parse_atoms(lines[1:], d, "grid density")
        values = np.zeros(tuple((hi - lo).tolist()))
        values[tuple((points - lo[None, :]).T)] = weights
        return GridDensity(k, lo, values)
    points, weights = _parse_atoms(lines, None, "lattice pmf")
    return LatticePMF(points, weights)


def save(obj, path) -> None:
    Path(path).write_text(dumps(obj))


def load(path):
    return loads(Path(path).read_text())

"""Discrete probability measures on R^n stored as weighted point clouds."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np


class MeasureError(ValueError):
    """Raised for invalid measure construction or incompatible operands."""


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Weighted point cloud ``sum_i w_i delta_{x_i}``.

    ``points`` has shape ``(m, dim)`` and ``weights`` shape ``(m,)``. Both
    arrays are read-only; every operation returns a new measure.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.points.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def __len__(self):
        return self.size

    def is_uniform(self) -> bool:
        return bool(np.all(self.weights == self.weights[0]))

    def mean(self) -> np.ndarray:
        return self.weights @ self.points

    def __repr__(self):
        return f"DiscreteMeasure(size={self.size}, dim={self.dim})"


def from_points(points, weights=None) -> DiscreteMeasure:
    """Build a measure from coordinates, normalizing the weights.

    Missing weights default to uniform ``1/m``. A 1D sequence of scalars is
    read as ``m`` atoms on the real line.
    """
    pts = np.array(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
        raise MeasureError("points must be a nonempty (m, n) array")
    if not np.all(np.isfinite(pts)):
        raise MeasureError("points must be finite")
    m = pts.shape[0]
    if weights is None:
        w = np.full(m, 1.0 / m)
    else:
        w = np.array(weights, dtype=float).reshape(-1)
        if w.shape[0] != m:
            raise MeasureError(f"got {w.shape[0]} weights for {m} points")
        if not np.all(np.isfinite(w)):
            raise MeasureError("weights must be finite")
        if np.any(w < 0):
            raise MeasureError("weights must be nonnegative")
        total = w.sum()
        if total <= 0:
            raise MeasureError("weights must not all be zero")
        w = w / total
    return DiscreteMeasure(pts, w)


def _with_points(m: DiscreteMeasure, points: np.ndarray) -> DiscreteMeasure:
    # weights are already normalized; skip renormalization to keep them bit-identical
    return DiscreteMeasure(np.ascontiguousarray(points, dtype=float), m.weights.copy())


def translate(m: DiscreteMeasure, b) -> DiscreteMeasure:
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.shape[0] != m.dim:
        raise MeasureError(f"shift has dimension {b.shape[0]}, measure has {m.dim}")
    return _with_points(m, m.points + b)


def pushforward(m: DiscreteMeasure, f: Callable[[np.ndarray], np.ndarray],
                vectorized: bool = False) -> DiscreteMeasure:
    """Relocate every atom by ``f``; coincident images stay separate atoms.

    With ``vectorized=True`` ``f`` receives the whole ``(m, n)`` array at once.
    """
    if vectorized:
        out = np.asarray(f(m.points.copy()), dtype=float)
    else:
        out = np.array([np.asarray(f(x.copy()), dtype=float).reshape(-1) for x in m.points])
    if out.shape != m.points.shape:
        raise MeasureError(f"map returned shape {out.shape}, expected {m.points.shape}")
    if not np.all(np.isfinite(out)):
        raise MeasureError("map produced non-finite coordinates")
    return _with_points(m, out)


def second_moment(m: DiscreteMeasure) -> float:
    return float(m.weights @ np.einsum("ij,ij->i", m.points, m.points))


# Point-cloud text format: header ``dim=<n>``, then ``x1,...,xn[,w]`` per line.

def read_point_cloud(path) -> DiscreteMeasure:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or not lines[0].startswith("dim="):
        raise MeasureError(f"{path}: missing 'dim=<n>' header")
    dim = int(lines[0][4:])
    rows = [[float(v) for v in ln.split(",")] for ln in lines[1:]]
    if not rows:
        raise MeasureError(f"{path}: no atoms")
    widths = {len(r) for r in rows}
    if widths == {dim}:
        return from_points(rows)
    if widths == {dim + 1}:
        arr = np.array(rows)
        return from_points(arr[:, :dim], arr[:, dim])
    raise MeasureError(f"{path}: rows must have {dim} or {dim + 1} columns")


def write_point_cloud(m: DiscreteMeasure, path, with_weights: bool = True) -> None:
    with open(path, "w") as fh:
        fh.write(f"dim={m.dim}\n")
        for x, w in zip(m.points, m.weights):
            vals = list(x) + ([w] if with_weights else [])
            fh.write(",".join(repr(float(v)) for v in vals) + "\n")

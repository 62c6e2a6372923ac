"""Closed-form optimal transport between measures on the real line.

A 1D measure is summarized by its atoms sorted ascending (stable for ties)
together with the running sum of their weights. The CDF is right-continuous
and the quantile is the pseudo-inverse ``min{z : F(z) >= q}``; the monotone
map is ``F_tgt^{-1} o F_src`` and ``W_2`` is the L2 distance between
quantile functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measure import DiscreteMeasure, MeasureError

# Slack used when matching source cumulative masses against target ones, so
# that equal partial sums computed in different orders land on the same atom.
_QTOL = 1e-12


@dataclass(frozen=True, eq=False)
class SortedSide:
    """One side of a 1D transport: atoms sorted ascending with prefix sums."""

    positions: np.ndarray
    weights: np.ndarray
    cumulative: np.ndarray
    order: np.ndarray  # order[r] = input index of the r-th smallest atom

    @classmethod
    def from_atoms(cls, positions, weights=None) -> "SortedSide":
        x = np.asarray(positions, dtype=float).reshape(-1)
        if weights is None:
            w = np.full(x.shape[0], 1.0 / x.shape[0])
        else:
            w = np.asarray(weights, dtype=float).reshape(-1)
        order = np.argsort(x, kind="stable")
        ws = w[order]
        cum = np.cumsum(ws)
        cum[-1] = 1.0
        return cls(x[order], ws, cum, order)

    @classmethod
    def from_measure(cls, m: DiscreteMeasure) -> "SortedSide":
        _require_1d(m)
        return cls.from_atoms(m.points[:, 0], m.weights)

    def cdf(self, x) -> np.ndarray | float:
        idx = np.searchsorted(self.positions, x, side="right")
        out = np.where(idx > 0, self.cumulative[np.maximum(idx - 1, 0)], 0.0)
        return float(out) if np.ndim(out) == 0 else out

    def quantile(self, q) -> np.ndarray | float:
        q_arr = np.asarray(q, dtype=float)
        if np.any(q_arr <= 0) or np.any(q_arr > 1):
            raise ValueError("quantile level must lie in (0, 1]")
        out = self.positions[np.searchsorted(self.cumulative, q_arr, side="left")]
        return float(out) if np.ndim(out) == 0 else out

    def _quantile_tolerant(self, q: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.cumulative, np.asarray(q) - _QTOL, side="left")
        return self.positions[np.clip(idx, 0, len(self.positions) - 1)]


@dataclass(frozen=True, eq=False)
class SliceTransport1D:
    """Monotone rearrangement from ``source`` onto ``target``.

    Calling the object evaluates ``F_tgt^{-1}(F_src(x))`` at arbitrary
    points; :meth:`map_atoms` gives the images of the source atoms
    themselves, resolving tied positions by stable input order so that
    equal-count uniform measures are matched one-to-one.
    """

    source: SortedSide
    target: SortedSide

    def __call__(self, x):
        f = np.asarray(self.source.cdf(x), dtype=float)
        # below the source support F = 0; send those points to the lowest target atom
        f = np.maximum(f, _QTOL * 2)
        out = self.target._quantile_tolerant(f)
        return float(out) if np.ndim(out) == 0 else out

    def map_atoms(self) -> np.ndarray:
        """Images of the source atoms, in the source's input order."""
        src, tgt = self.source, self.target
        n_src = len(src.positions)
        if n_src == len(tgt.positions) and _uniform(src.weights) and _uniform(tgt.weights):
            images_sorted = tgt.positions
        else:
            images_sorted = tgt._quantile_tolerant(src.cumulative)
        out = np.empty(n_src)
        out[src.order] = images_sorted
        return out

    def w2_squared(self) -> float:
        return float(_w2_sq_sorted(self.source.positions[None], self.source.weights[None],
                                   self.target.positions[None], self.target.weights[None])[0])


def _uniform(w: np.ndarray) -> bool:
    return bool(np.all(w == w[0]))


def _require_1d(m: DiscreteMeasure) -> None:
    if m.dim != 1:
        raise MeasureError(f"expected a one-dimensional measure, got dim={m.dim}")


def cdf(side: SortedSide, x):
    return side.cdf(x)


def quantile(side: SortedSide, q):
    return side.quantile(q)


def transport_map_1d(src: DiscreteMeasure, tgt: DiscreteMeasure) -> SliceTransport1D:
    _require_1d(src)
    _require_1d(tgt)
    return SliceTransport1D(SortedSide.from_measure(src), SortedSide.from_measure(tgt))


def w2_1d(src: DiscreteMeasure, tgt: DiscreteMeasure) -> float:
    _require_1d(src)
    _require_1d(tgt)
    return float(np.sqrt(w2_squared_atoms(src.points[:, 0], src.weights,
                                          tgt.points[:, 0], tgt.weights)))


def w2_squared_atoms(x, wx, y, wy):
    """Squared W_2 between 1D atom sets.

    ``x`` and ``y`` may be 1D (one pair) or 2D with one pair per row (e.g.
    one row per projection direction); the weights are shared by all rows.
    Returns a float or an array with one value per row.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    single = x.ndim == 1
    x2 = np.atleast_2d(x)
    y2 = np.atleast_2d(y)
    wx = np.asarray(wx, dtype=float)
    wy = np.asarray(wy, dtype=float)
    ox = np.argsort(x2, axis=1, kind="stable")
    oy = np.argsort(y2, axis=1, kind="stable")
    xs = np.take_along_axis(x2, ox, axis=1)
    ys = np.take_along_axis(y2, oy, axis=1)
    if x2.shape[1] == y2.shape[1] and _uniform(wx) and _uniform(wy):
        out = np.mean((xs - ys) ** 2, axis=1)
    else:
        out = _w2_sq_sorted(xs, wx[ox], ys, wy[oy])
    return float(out[0]) if single else out


def _w2_sq_sorted(xs, wxs, ys, wys) -> np.ndarray:
    """Exact integral of the squared quantile gap over the merged mass grid.

    Rows of ``xs``/``ys`` are sorted positions, ``wxs``/``wys`` the matching
    weights (per row). Between consecutive merged breakpoints both quantile
    functions are constant, and the index of the active atom on each side is
    the number of that side's breakpoints already passed.
    """
    d, m = xs.shape
    p = ys.shape[1]
    cx = np.cumsum(wxs, axis=1)
    cy = np.cumsum(wys, axis=1)
    cx[:, -1] = 1.0
    cy[:, -1] = 1.0
    vals = np.concatenate([cx, cy], axis=1)
    flags = np.concatenate([np.ones((d, m), dtype=np.int64), np.zeros((d, p), dtype=np.int64)], axis=1)
    order = np.argsort(vals, axis=1, kind="stable")
    grid = np.take_along_axis(vals, order, axis=1)
    from_x = np.take_along_axis(flags, order, axis=1)
    passed_x = np.cumsum(from_x, axis=1) - from_x
    passed_y = np.arange(m + p)[None, :] - passed_x
    widths = np.diff(grid, axis=1, prepend=0.0)
    qx = np.take_along_axis(xs, np.minimum(passed_x, m - 1), axis=1)
    qy = np.take_along_axis(ys, np.minimum(passed_y, p - 1), axis=1)
    return np.sum(widths * (qx - qy) ** 2, axis=1)

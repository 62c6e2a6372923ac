"""j-slice matching maps.

For an orthogonal frame ``P = [theta_1, ..., theta_n]`` the map moves a point
along the first ``j`` directions by the 1D optimal maps between the projected
source and target, and leaves the remaining coordinates alone::

    T(x) = x + sum_{i <= j} (T_i(x . theta_i) - x . theta_i) theta_i

``j = 1`` is the single-slice map along ``theta_1``; ``j = n`` the
matrix-slice map.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .measure import DiscreteMeasure, MeasureError
from .ot1d import SliceTransport1D, SortedSide
from .slicing import OrthogonalFrame, slice_images

_MONO_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SliceMatchingMap:
    frame: OrthogonalFrame
    j: int
    slice_transports: list[SliceTransport1D]
    source: DiscreteMeasure
    target: DiscreteMeasure

    @property
    def matched_directions(self) -> np.ndarray:
        return self.frame.matrix[:, : self.j].T

    def __call__(self, x):
        return apply(self, x)


def build(src: DiscreteMeasure, tgt: DiscreteMeasure, frame: OrthogonalFrame, j: int) -> SliceMatchingMap:
    if src.dim != tgt.dim:
        raise MeasureError(f"dimension mismatch: {src.dim} vs {tgt.dim}")
    if frame.n != src.dim:
        raise MeasureError(f"frame is {frame.n}-dimensional, measures are {src.dim}-dimensional")
    if not 1 <= j <= frame.n:
        raise ValueError(f"j must lie in 1..{frame.n}, got {j}")
    transports = []
    for i in range(j):
        theta = frame.matrix[:, i]
        transports.append(SliceTransport1D(SortedSide.from_atoms(src.points @ theta, src.weights),
                                           SortedSide.from_atoms(tgt.points @ theta, tgt.weights)))
    return SliceMatchingMap(frame, j, transports, src, tgt)


def apply(smap: SliceMatchingMap, x) -> np.ndarray:
    """Evaluate the map at arbitrary points (a vector or an ``(k, n)`` array).

    Uses ``F_tgt^{-1}(F_src(.))`` on each matched slice, so off-support
    points are handled by the step-function CDF of the source slice.
    """
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != smap.frame.n:
        raise MeasureError(f"point has dimension {pts.shape[1]}, map is {smap.frame.n}-dimensional")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    out = pts.copy()
    for i, t in enumerate(smap.slice_transports):
        theta = smap.frame.matrix[:, i]
        proj = pts @ theta
        out += np.outer(np.asarray(t(proj)) - proj, theta)
    return out[0] if single else out


def displacements(src: DiscreteMeasure, tgt: DiscreteMeasure, frame: OrthogonalFrame, j: int):
    """Per-atom displacement ``T(x) - x`` on the source support and the per-slice squared costs.

    Returns ``(disp, slice_costs)`` with ``disp`` of shape ``(m, n)`` and
    ``slice_costs[i] = sum_k w_k (T_i(x_k . theta_i) - x_k . theta_i)^2``.
    Tied projections are resolved by stable input order.
    """
    cols = frame.matrix[:, :j].T
    ps, images = slice_images(src, tgt, cols)
    gap = images - ps
    disp = gap.T @ cols
    return disp, (gap ** 2) @ src.weights


def atom_images(smap: SliceMatchingMap) -> np.ndarray:
    """Images of the source atoms; ties split by stable order rather than collapsed."""
    disp, _ = displacements(smap.source, smap.target, smap.frame, smap.j)
    return smap.source.points + disp


def pushforward_matched(smap: SliceMatchingMap) -> DiscreteMeasure:
    return DiscreteMeasure(atom_images(smap), smap.source.weights.copy())


@dataclass
class DirectionWitness:
    index: int
    matched: bool
    monotone: bool
    identity: bool
    max_inversion: float
    max_identity_gap: float


@dataclass
class CompatibilityReport:
    compatible: bool
    directions: list[DirectionWitness] = field(default_factory=list)

    def __bool__(self):
        return self.compatible


def compatibility_report(points: np.ndarray, images: np.ndarray, frame: OrthogonalFrame,
                         j: int | None = None) -> CompatibilityReport:
    """Check that ``points -> images`` has the form ``sum_i f_i(x . theta_i) theta_i``
    with every ``f_i`` nondecreasing.

    Coordinates of the images in the frame are compared against those of the
    points direction by direction. When ``j`` is given, directions past ``j``
    must additionally be left unchanged.
    """
    points = np.asarray(points, dtype=float)
    images = np.asarray(images, dtype=float)
    scale = max(1.0, float(np.max(np.abs(points))), float(np.max(np.abs(images))))
    tol = _MONO_TOL * scale
    witnesses = []
    for i in range(frame.n):
        theta = frame.matrix[:, i]
        s = points @ theta
        t = images @ theta
        order = np.argsort(s, kind="stable")
        steps = np.diff(t[order])
        inversion = float(max(0.0, -steps.min())) if steps.size else 0.0
        gap = float(np.max(np.abs(t - s)))
        matched = j is None or i < j
        witnesses.append(DirectionWitness(i, matched, inversion <= tol, gap <= tol, inversion, gap))
    ok = all(w.monotone and (w.matched or w.identity) for w in witnesses)
    return CompatibilityReport(ok, witnesses)


def is_compatible(smap: SliceMatchingMap) -> CompatibilityReport:
    return compatibility_report(smap.source.points, atom_images(smap), smap.frame, smap.j)

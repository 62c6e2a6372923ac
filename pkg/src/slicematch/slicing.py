"""Projections, random directions and frames, and sliced estimators.

Every Monte-Carlo quantity is returned as an :class:`Estimate` carrying the
standard error of the sample mean, so callers can compare against analytic
values at a stated number of standard errors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .measure import DiscreteMeasure, MeasureError, from_points
from .ot1d import SliceTransport1D, SortedSide, w2_squared_atoms

DEFAULT_SEED = 20240517
SAMPLER_KINDS = ("uniform-sphere", "haar-orthogonal", "fixed-list")

# keep (directions x atoms) work arrays around this many floats
_CHUNK_ELEMS = 4_000_000


class Estimate(NamedTuple):
    value: float
    stderr: float


@dataclass(frozen=True, eq=False)
class OrthogonalFrame:
    """Orthogonal matrix whose columns are the directions ``theta_1..theta_n``."""

    matrix: np.ndarray

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def columns(self) -> list[np.ndarray]:
        return [self.matrix[:, i] for i in range(self.n)]

    def orthogonality_error(self) -> float:
        return float(np.max(np.abs(self.matrix.T @ self.matrix - np.eye(self.n))))

    @classmethod
    def from_matrix(cls, matrix, atol: float = 1e-12) -> "OrthogonalFrame":
        mat = np.array(matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("frame must be a square matrix")
        frame = cls(mat)
        if frame.orthogonality_error() > atol:
            raise ValueError("frame columns are not orthonormal")
        return frame

    @classmethod
    def identity(cls, n: int) -> "OrthogonalFrame":
        return cls(np.eye(n))


def haar_frames(rng: np.random.Generator, n: int, count: int) -> np.ndarray:
    """Draw ``count`` Haar-distributed orthogonal ``n x n`` matrices.

    In two dimensions a rotation by a uniform angle is followed by a
    reflection of the second column with probability 1/2. Otherwise a
    Gaussian matrix is QR-factored and the columns are sign-corrected by
    ``sign(diag(R))``, which makes the law exactly Haar.
    """
    if n < 1:
        raise ValueError("dimension must be positive")
    if n == 2:
        beta = rng.uniform(0.0, 2.0 * np.pi, size=count)
        flip = np.where(rng.random(count) < 0.5, -1.0, 1.0)
        c, s = np.cos(beta), np.sin(beta)
        out = np.empty((count, 2, 2))
        out[:, 0, 0], out[:, 1, 0] = c, -s
        out[:, 0, 1], out[:, 1, 1] = s * flip, c * flip
        return out
    g = rng.standard_normal((count, n, n))
    q, r = np.linalg.qr(g)
    d = np.sign(np.diagonal(r, axis1=1, axis2=2))
    d[d == 0] = 1.0
    return q * d[:, None, :]


def sphere_directions(rng: np.random.Generator, n: int, count: int) -> np.ndarray:
    if n < 1:
        raise ValueError("dimension must be positive")
    g = rng.standard_normal((count, n))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    return g / norms


class DirectionSampler:
    """Reproducible stream of directions or orthogonal frames.

    ``kind`` is ``"uniform-sphere"``, ``"haar-orthogonal"`` or
    ``"fixed-list"``. A fixed list holds either directions ``(L, n)`` or
    frames ``(L, n, n)`` and is cycled through in order. Directions drawn
    from a Haar sampler are the first columns of fresh frames.
    """

    def __init__(self, kind: str = "haar-orthogonal", seed: int = DEFAULT_SEED, fixed=None):
        if kind not in SAMPLER_KINDS:
            raise ValueError(f"unknown sampler kind {kind!r}")
        self.kind = kind
        self.seed = int(seed)
        self._rng = np.random.default_rng(self.seed)
        self._cursor = 0
        self.fixed = None
        if kind == "fixed-list":
            if fixed is None or len(fixed) == 0:
                raise ValueError("fixed-list sampler needs a nonempty list")
            self.fixed = np.array(fixed, dtype=float)
            if self.fixed.ndim not in (2, 3):
                raise ValueError("fixed list must hold directions (L, n) or frames (L, n, n)")

    def reset(self) -> None:
        self._rng = np.random.default_rng(self.seed)
        self._cursor = 0

    def _take_fixed(self, count: int) -> np.ndarray:
        idx = (self._cursor + np.arange(count)) % len(self.fixed)
        self._cursor += count
        return self.fixed[idx]

    def directions(self, n: int, count: int) -> np.ndarray:
        """``(count, n)`` array of unit vectors."""
        if n < 1:
            raise ValueError("dimension must be positive")
        if self.kind == "uniform-sphere":
            return sphere_directions(self._rng, n, count)
        if self.kind == "haar-orthogonal":
            return haar_frames(self._rng, n, count)[:, :, 0]
        items = self._take_fixed(count)
        dirs = items[:, :, 0] if items.ndim == 3 else items
        if dirs.shape[1] != n:
            raise MeasureError(f"fixed directions have dimension {dirs.shape[1]}, need {n}")
        return dirs

    def frames(self, n: int, count: int) -> np.ndarray:
        """``(count, n, n)`` array of orthogonal matrices (columns = directions)."""
        if n < 1:
            raise ValueError("dimension must be positive")
        if self.kind == "haar-orthogonal":
            return haar_frames(self._rng, n, count)
        if self.kind == "fixed-list" and self.fixed.ndim == 3:
            items = self._take_fixed(count)
            if items.shape[1] != n:
                raise MeasureError(f"fixed frames have dimension {items.shape[1]}, need {n}")
            return items
        raise ValueError(f"sampler kind {self.kind!r} cannot produce orthogonal frames")


def sample_sphere(sampler: DirectionSampler, n: int) -> np.ndarray:
    return sampler.directions(n, 1)[0]


def sample_haar(sampler: DirectionSampler, n: int) -> OrthogonalFrame:
    return OrthogonalFrame(np.array(sampler.frames(n, 1)[0]))


def project(m: DiscreteMeasure, theta) -> DiscreteMeasure:
    """1D measure of the atoms' coordinates along the unit vector ``theta``."""
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.shape[0] != m.dim:
        raise MeasureError(f"direction has dimension {theta.shape[0]}, measure has {m.dim}")
    if abs(np.linalg.norm(theta) - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    return from_points(m.points @ theta, m.weights)


def _check_pair(src: DiscreteMeasure, tgt: DiscreteMeasure) -> None:
    if src.dim != tgt.dim:
        raise MeasureError(f"dimension mismatch: {src.dim} vs {tgt.dim}")


def _chunks(total: int, per_item: int):
    step = max(1, _CHUNK_ELEMS // max(per_item, 1))
    for start in range(0, total, step):
        yield slice(start, min(total, start + step))


def slice_distances_sq(src: DiscreteMeasure, tgt: DiscreteMeasure, dirs: np.ndarray) -> np.ndarray:
    """``W_2^2`` between the projections of ``src`` and ``tgt`` along each row of ``dirs``."""
    _check_pair(src, tgt)
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    out = np.empty(dirs.shape[0])
    for sl in _chunks(dirs.shape[0], src.size + tgt.size):
        d = dirs[sl]
        out[sl] = w2_squared_atoms(d @ src.points.T, src.weights, d @ tgt.points.T, tgt.weights)
    return out


def frame_slice_losses(src: DiscreteMeasure, tgt: DiscreteMeasure, frames: np.ndarray, j: int) -> np.ndarray:
    """``(count, j)`` squared slice distances along the first ``j`` columns of each frame."""
    frames = np.asarray(frames, dtype=float)
    count, n, _ = frames.shape
    _check_j(j, n)
    cols = frames[:, :, :j].transpose(0, 2, 1).reshape(count * j, n)
    return slice_distances_sq(src, tgt, cols).reshape(count, j)


def _check_j(j: int, n: int) -> None:
    if not 1 <= j <= n:
        raise ValueError(f"j must lie in 1..{n}, got {j}")


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(values))
    if values.shape[0] < 2:
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / np.sqrt(values.shape[0]))


def _check_count(count: int) -> None:
    if count < 1:
        raise ValueError("direction count must be at least 1")


def sw2(src: DiscreteMeasure, tgt: DiscreteMeasure, sampler: DirectionSampler, count: int) -> Estimate:
    """Monte-Carlo sliced Wasserstein-2 distance.

    The squared distance is averaged over ``count`` directions; its standard
    error is carried through the square root by the delta method.
    """
    _check_pair(src, tgt)
    _check_count(count)
    mean, se = _mean_se(slice_distances_sq(src, tgt, sampler.directions(src.dim, count)))
    value = float(np.sqrt(max(mean, 0.0)))
    return Estimate(value, se / (2.0 * value) if value > 0 else 0.0)


def loss_l(src, tgt, sampler: DirectionSampler, count: int) -> Estimate:
    """Half the mean squared slice distance over random directions."""
    _check_pair(src, tgt)
    _check_count(count)
    mean, se = _mean_se(slice_distances_sq(src, tgt, sampler.directions(src.dim, count)))
    return Estimate(0.5 * mean, 0.5 * se)


def loss_lj(src, tgt, sampler: DirectionSampler, count: int, j: int) -> Estimate:
    """Half the mean, over random frames, of the summed squared distances along the first ``j`` columns."""
    _check_pair(src, tgt)
    _check_count(count)
    _check_j(j, src.dim)
    per_frame = frame_slice_losses(src, tgt, sampler.frames(src.dim, count), j).sum(axis=1)
    mean, se = _mean_se(per_frame)
    return Estimate(0.5 * mean, 0.5 * se)


def slice_images(src: DiscreteMeasure, tgt: DiscreteMeasure, dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Source projections and their images under the 1D optimal maps.

    Returns two ``(len(dirs), src.size)`` arrays: ``x . theta`` for every
    source atom and the monotone-rearrangement image of that value.
    """
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    ps = dirs @ src.points.T
    pt = dirs @ tgt.points.T
    if src.size == tgt.size and src.is_uniform() and tgt.is_uniform():
        order = np.argsort(ps, axis=1, kind="stable")
        images = np.empty_like(ps)
        np.put_along_axis(images, order, np.sort(pt, axis=1, kind="stable"), axis=1)
        return ps, images
    images = np.empty_like(ps)
    for r in range(dirs.shape[0]):
        t = SliceTransport1D(SortedSide.from_atoms(ps[r], src.weights),
                             SortedSide.from_atoms(pt[r], tgt.weights))
        images[r] = t.map_atoms()
    return ps, images


def frechet_field(src, tgt, sampler: DirectionSampler, count: int, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Monte-Carlo average of ``x - T^j(x)`` at every source atom.

    Returns ``(field, stderr)``, both of shape ``(src.size, src.dim)``.
    """
    _check_pair(src, tgt)
    _check_count(count)
    n = src.dim
    _check_j(j, n)
    frames = sampler.frames(n, count)
    total = np.zeros((src.size, n))
    total_sq = np.zeros((src.size, n))
    for sl in _chunks(count, j * (src.size + tgt.size)):
        fr = frames[sl]
        c = fr.shape[0]
        cols = fr[:, :, :j].transpose(0, 2, 1).reshape(c * j, n)
        ps, images = slice_images(src, tgt, cols)
        gap = (ps - images).reshape(c, j, src.size)
        disp = np.einsum("cjm,cjn->cmn", gap, cols.reshape(c, j, n))
        total += disp.sum(axis=0)
        total_sq += (disp ** 2).sum(axis=0)
    mean = total / count
    if count < 2:
        return mean, np.zeros_like(mean)
    var = np.maximum(total_sq - count * mean ** 2, 0.0) / (count - 1)
    return mean, np.sqrt(var / count)

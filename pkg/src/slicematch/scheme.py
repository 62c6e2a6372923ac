"""Stochastic j-slice matching iteration.

Each step draws an orthogonal frame ``P_k`` and a step size ``gamma_k`` and
moves every atom part of the way towards its slice-matching image::

    x  ->  (1 - gamma_k) x + gamma_k T^j_{sigma_k, mu; P_k}(x)
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .measure import DiscreteMeasure, MeasureError
from .slicing import DEFAULT_SEED, DirectionSampler, OrthogonalFrame, slice_distances_sq, sw2
from . import matching

SCHEDULE_KINDS = ("inverse-k", "log-over-k", "constant", "custom-list")
CSV_HEADER = ["k", "gamma", "slice_loss_sum", "consecutive_cost", "sw2_estimate", "sw2_stderr"]


@dataclass(frozen=True)
class Schedule:
    """Step sizes ``gamma_k``.

    ``inverse-k`` gives ``1/k`` and ``log-over-k`` gives ``(1 + log2 k)/k``
    for ``k >= 1``; both use ``gamma_0 = 1``. ``constant`` returns
    ``parameter`` for every k. ``custom-list`` holds ``gamma_1, gamma_2, ...``
    (index 0 reuses the first entry).
    """

    kind: str = "log-over-k"
    parameter: float = 1.0
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "constant" and not 0.0 <= self.parameter <= 1.0:
            raise ValueError("constant step size must lie in [0, 1]")
        if self.kind == "custom-list":
            if not self.values:
                raise ValueError("custom-list schedule needs values")
            if any(not 0.0 <= v <= 1.0 for v in self.values):
                raise ValueError("custom step sizes must lie in [0, 1]")

    @property
    def a2_compliant(self) -> bool:
        """Whether the sequence satisfies sum gamma = inf, sum gamma^2 < inf."""
        return self.kind in ("inverse-k", "log-over-k")

    def gamma(self, k: int) -> float:
        if k < 0:
            raise ValueError("step index must be nonnegative")
        if self.kind == "constant":
            g = self.parameter
        elif self.kind == "custom-list":
            idx = max(k - 1, 0)
            if idx >= len(self.values):
                raise IndexError(f"custom schedule exhausted at k={k}")
            g = self.values[idx]
        elif k == 0:
            g = 1.0
        elif self.kind == "inverse-k":
            g = 1.0 / k
        else:
            g = (1.0 + math.log2(k)) / k
        return min(1.0, max(0.0, g))

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "parameter": self.parameter}
        if self.values:
            d["values"] = list(self.values)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Schedule":
        return cls(d["kind"], float(d.get("parameter", 1.0)), tuple(d.get("values", ())))


def schedule_gamma(s: Schedule, k: int) -> float:
    return s.gamma(k)


def step(current: DiscreteMeasure, target: DiscreteMeasure, frame: OrthogonalFrame, j: int,
         gamma: float) -> tuple[DiscreteMeasure, float]:
    """One iteration; returns the next measure and ``sum_{i<=j} W_2^2`` of the matched slices."""
    if current.dim != target.dim:
        raise MeasureError(f"dimension mismatch: {current.dim} vs {target.dim}")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    if frame.n != current.dim or not 1 <= j <= frame.n:
        raise ValueError(f"need a {current.dim}-dimensional frame and 1 <= j <= {current.dim}")
    disp, _ = matching.displacements(current, target, frame, j)
    slice_loss = slice_distances_sq(current, target, frame.matrix[:, :j].T).sum()
    nxt = DiscreteMeasure(current.points + gamma * disp, current.weights.copy())
    return nxt, float(slice_loss)


@dataclass
class StepRecord:
    k: int
    gamma: float
    slice_loss_sum: float
    consecutive_cost: float
    sw2_estimate: float
    sw2_stderr: float
    frame: np.ndarray | None = None


@dataclass
class Trajectory:
    """Recorded run.

    ``records[0]`` describes the initial measure (no step taken, all step
    quantities zero). ``records[k]`` for ``k >= 1`` describes the step
    ``sigma_{k-1} -> sigma_k``: the step size and frame used, the matched
    slice losses of ``sigma_{k-1}``, ``gamma^2`` times that sum, and the SW_2
    estimate of ``sigma_k`` against the target.
    """

    initial: DiscreteMeasure
    target: DiscreteMeasure
    j: int
    schedule: Schedule
    records: list[StepRecord]
    final: DiscreteMeasure
    config: dict = field(default_factory=dict)
    snapshots: dict[int, DiscreteMeasure] = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return len(self.records) - 1

    def sw2_series(self) -> np.ndarray:
        return np.array([r.sw2_estimate for r in self.records])

    def frame(self, k: int) -> OrthogonalFrame:
        """Frame used for the step out of ``sigma_k``."""
        fr = self.records[k + 1].frame
        if fr is None:
            raise ValueError("trajectory was recorded without frames")
        return OrthogonalFrame(np.array(fr))

    def replay(self, k: int) -> DiscreteMeasure:
        """Recompute ``sigma_k`` from the initial measure and the retained frames."""
        if k in self.snapshots:
            return self.snapshots[k]
        m = self.initial
        for i in range(k):
            m, _ = step(m, self.target, self.frame(i), self.j, self.records[i + 1].gamma)
        return m


def run(initial: DiscreteMeasure, target: DiscreteMeasure, j: int, schedule: Schedule,
        sampler: DirectionSampler | None = None, iterations: int = 100, *,
        sw2_dirs: int = 2000, sw2_seed: int | None = None, snapshot_every: int | None = None,
        sw2_threshold: float | None = None) -> Trajectory:
    """Run ``iterations`` steps with frames drawn from ``sampler``.

    SW_2 diagnostics use a separate Haar stream seeded with ``sw2_seed``
    (derived from the frame sampler's seed when omitted). ``sw2_dirs=0``
    disables them. Iteration k uses ``schedule.gamma(k + 1)``. With
    ``sw2_threshold`` the run stops early once the estimate drops below it.
    """
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    if initial.dim != target.dim:
        raise MeasureError(f"dimension mismatch: {initial.dim} vs {target.dim}")
    n = initial.dim
    if not 1 <= j <= n:
        raise ValueError(f"j must lie in 1..{n}, got {j}")
    sampler = sampler or DirectionSampler("haar-orthogonal", DEFAULT_SEED)
    if sw2_seed is None:
        sw2_seed = int(np.random.SeedSequence(sampler.seed).spawn(1)[0].generate_state(1, np.uint64)[0])
    diag = DirectionSampler("haar-orthogonal", sw2_seed)

    def measure_sw2(m):
        if sw2_dirs <= 0:
            return math.nan, math.nan
        return tuple(sw2(m, target, diag, sw2_dirs))

    est, se = measure_sw2(initial)
    records = [StepRecord(0, 0.0, 0.0, 0.0, est, se)]
    snapshots = {0: initial} if snapshot_every else {}
    current = initial
    for k in range(iterations):
        frame = OrthogonalFrame(np.array(sampler.frames(n, 1)[0]))
        gamma = schedule.gamma(k + 1)
        current, loss = step(current, target, frame, j, gamma)
        est, se = measure_sw2(current)
        records.append(StepRecord(k + 1, gamma, loss, gamma * gamma * loss, est, se,
                                  np.array(frame.matrix)))
        if snapshot_every and ((k + 1) % snapshot_every == 0 or k + 1 == iterations):
            snapshots[k + 1] = current
        if sw2_threshold is not None and est <= sw2_threshold:
            if snapshot_every:
                snapshots[k + 1] = current
            break
    config = {"j": j, "n": n, "schedule": schedule.to_dict(), "seed": sampler.seed,
              "sampler": sampler.kind, "sw2_seed": sw2_seed, "sw2_dirs": sw2_dirs,
              "iterations": iterations}
    return Trajectory(initial, target, j, schedule, records, current, config, snapshots)


@dataclass
class ConsecutiveResidual:
    displacement_cost: float
    predicted: float
    residual: float
    relative: float
    exact_w2_sq: float | None = None
    oracle_residual: float | None = None


def consecutive_residual(current: DiscreteMeasure, target: DiscreteMeasure, frame: OrthogonalFrame,
                         j: int, gamma: float, exact: bool = False) -> ConsecutiveResidual:
    """Compare the cost of the coupling ``x_i -> x_i'`` induced by one step with
    ``gamma^2 * sum_{i<=j} W_2^2`` of the matched slices.

    With ``exact=True`` the brute-force oracle also computes ``W_2^2`` between
    the two iterates, which should coincide with the induced cost.
    """
    nxt, loss = step(current, target, frame, j, gamma)
    diff = nxt.points - current.points
    cost = float(current.weights @ np.einsum("ij,ij->i", diff, diff))
    predicted = gamma * gamma * loss
    residual = abs(cost - predicted)
    scale = max(abs(cost), abs(predicted))
    rel = residual / scale if scale > 0 else 0.0
    out = ConsecutiveResidual(cost, predicted, residual, rel)
    if exact:
        from .oracle import w2_exact

        w, _ = w2_exact(nxt, current)
        out.exact_w2_sq = w * w
        out.oracle_residual = abs(w * w - cost)
    return out


def check_lemma_consecutive(trajectory: Trajectory, k: int, w2_oracle: bool = False) -> ConsecutiveResidual:
    """Residual of the consecutive-iterate identity for the step out of ``sigma_k``."""
    if trajectory.records[k + 1].frame is None:
        raise ValueError("trajectory was recorded without frames")
    current = trajectory.replay(k)
    return consecutive_residual(current, trajectory.target, trajectory.frame(k), trajectory.j,
                                trajectory.records[k + 1].gamma, exact=w2_oracle)


def running_min(values: Sequence[float]) -> np.ndarray:
    return np.minimum.accumulate(np.asarray(values, dtype=float))


def block_minima(values: Sequence[float], window: int) -> np.ndarray:
    """Minimum over consecutive non-overlapping windows (the last one may be shorter)."""
    v = np.asarray(values, dtype=float)
    return np.array([v[i:i + window].min() for i in range(0, len(v), window)])


def first_reaching(values: Sequence[float], level: float) -> int | None:
    hits = np.nonzero(np.asarray(values) <= level)[0]
    return int(hits[0]) if hits.size else None


def write_trajectory_csv(traj: Trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for r in traj.records:
            w.writerow([r.k] + [f"{v:.17g}" for v in (r.gamma, r.slice_loss_sum, r.consecutive_cost,
                                                       r.sw2_estimate, r.sw2_stderr)])


def read_trajectory_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {key: np.array([float(r[key]) for r in rows]) for key in CSV_HEADER}

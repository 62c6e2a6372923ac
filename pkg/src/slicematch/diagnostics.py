"""Randomized identity batteries shared by ``slicematch check`` and the tests.

Each battery draws its own instances from a seed, evaluates one structural
identity of the scheme, and returns the worst residual together with any
failing instance in a JSON-serializable form for replay.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .measure import DiscreteMeasure, from_points
from .oracle import w2_exact
from .scheme import consecutive_residual, step
from .slicing import DirectionSampler, OrthogonalFrame, haar_frames, sw2

CONSECUTIVE_REL_TOL = 1e-10
ORACLE_REL_TOL = 1e-10
STATIONARY_TOL = 1e-12


@dataclass
class CheckReport:
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def lines(self) -> list[str]:
        status = "PASS" if self.passed else "FAIL"
        out = [f"[{status}] {self.name}"]
        out += [f"    {k} = {v:.3e}" if isinstance(v, float) else f"    {k} = {v}"
                for k, v in self.metrics.items()]
        return out


def _instance(rng, n, m, spread=1.0):
    src = from_points(rng.standard_normal((m, n)))
    shift = rng.normal(0, 2.0, n)
    scale = rng.uniform(0.5, 2.0, n) * spread
    tgt = from_points(rng.standard_normal((m, n)) * scale + shift)
    return src, tgt


def _dump(src: DiscreteMeasure, tgt: DiscreteMeasure, frame: np.ndarray | None = None, **extra) -> dict:
    d = {"source": src.points.tolist(), "target": tgt.points.tolist()}
    if frame is not None:
        d["frame"] = np.asarray(frame).tolist()
    d.update(extra)
    return d


def consecutive_battery(seed: int, count: int = 100, atoms: int = 32, exact_count: int = 30,
                    exact_atoms: int = 8) -> CheckReport:
    """Induced-coupling cost of a step vs ``gamma^2`` times the matched slice losses,
    plus the exact W_2 oracle on small sub-instances."""
    rng = np.random.default_rng(seed)
    worst_rel, worst_oracle = 0.0, 0.0
    failures = []
    for t in range(count + exact_count):
        exact = t >= count
        n = int(rng.choice([2, 3]))
        j = int(rng.integers(1, n + 1))
        gamma = float(rng.choice([0.1, 0.5, 1.0]))
        m = int(rng.integers(2, exact_atoms + 1)) if exact else atoms
        src, tgt = _instance(rng, n, m)
        frame = haar_frames(rng, n, 1)[0]
        res = consecutive_residual(src, tgt, OrthogonalFrame(frame), j, gamma, exact=exact)
        worst_rel = max(worst_rel, res.relative)
        bad = res.relative > CONSECUTIVE_REL_TOL
        if exact:
            scale = max(res.displacement_cost, 1e-300)
            rel_oracle = res.oracle_residual / scale
            worst_oracle = max(worst_oracle, rel_oracle)
            bad = bad or rel_oracle > ORACLE_REL_TOL
        if bad:
            failures.append(_dump(src, tgt, frame, j=j, gamma=gamma))
    return CheckReport("lemma36", not failures,
                       {"instances": count + exact_count, "max_relative_residual": worst_rel,
                        "max_oracle_relative_residual": worst_oracle}, failures)


def stationarity_battery(seed: int, count: int = 50, max_atoms: int = 40) -> CheckReport:
    """Two full steps (gamma = 1, j = n) with the same frame: the second is a no-op."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    failures = []
    for _ in range(count):
        n = int(rng.choice([1, 2, 3]))
        m = int(rng.integers(2, max_atoms + 1))
        src, tgt = _instance(rng, n, m)
        frame = OrthogonalFrame(haar_frames(rng, n, 1)[0])
        first, _ = step(src, tgt, frame, n, 1.0)
        second, _ = step(first, tgt, frame, n, 1.0)
        diff = float(np.max(np.abs(second.points - first.points)))
        worst = max(worst, diff)
        if diff > STATIONARY_TOL:
            failures.append(_dump(src, tgt, frame.matrix))
    return CheckReport("stationarity", not failures,
                       {"instances": count, "max_coordinate_change": worst}, failures)


def bounds_battery(seed: int, count: int = 50, directions: int = 2000, max_atoms: int = 8) -> CheckReport:
    """Monte-Carlo SW_2 never exceeds exact W_2 by more than three standard errors."""
    rng = np.random.default_rng(seed)
    sampler = DirectionSampler("uniform-sphere", int(rng.integers(2**63)))
    worst = -np.inf
    failures = []
    for _ in range(count):
        n = int(rng.choice([2, 3]))
        m = int(rng.integers(1, max_atoms + 1))
        src, tgt = _instance(rng, n, m)
        est = sw2(src, tgt, sampler, directions)
        w, _ = w2_exact(src, tgt)
        excess = est.value - (w + 3.0 * est.stderr)
        worst = max(worst, excess)
        if excess > 0:
            failures.append(_dump(src, tgt, sw2=est.value, stderr=est.stderr, w2=w))
    return CheckReport("bounds", not failures,
                       {"instances": count, "max_excess_over_w2_plus_3se": float(worst)}, failures)


BATTERIES = {
    "lemma36": consecutive_battery,
    "stationarity": stationarity_battery,
    "bounds": bounds_battery,
}

"""Exact W_2 for small discrete instances, used as ground truth in tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment, linprog

from .measure import DiscreteMeasure, MeasureError

DEFAULT_CAP = 64


class OracleCapExceeded(ValueError):
    pass


@dataclass
class ExactPlan:
    coupling: list[tuple[int, int, float]]
    cost: float

    def marginals(self, m: int, p: int) -> tuple[np.ndarray, np.ndarray]:
        row, col = np.zeros(m), np.zeros(p)
        for i, j, mass in self.coupling:
            row[i] += mass
            col[j] += mass
        return row, col


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def w2_exact(src: DiscreteMeasure, tgt: DiscreteMeasure, cap: int = DEFAULT_CAP) -> tuple[float, ExactPlan]:
    """Minimal ``(sum pi_ij |x_i - y_j|^2)^(1/2)`` over couplings.

    Equal-count uniform instances are solved as an assignment problem, all
    others as a linear program over the transport polytope (dual simplex).
    """
    if src.dim != tgt.dim:
        raise MeasureError(f"dimension mismatch: {src.dim} vs {tgt.dim}")
    m, p = src.size, tgt.size
    if max(m, p) > cap:
        raise OracleCapExceeded(f"instance has {max(m, p)} atoms, oracle cap is {cap}")
    cost = _sq_dists(src.points, tgt.points)
    if m == p and src.is_uniform() and tgt.is_uniform():
        rows, cols = linear_sum_assignment(cost)
        coupling = [(int(i), int(j), 1.0 / m) for i, j in zip(rows, cols)]
        total = float(np.sum(cost[rows, cols]) / m)
    else:
        a_eq = np.zeros((m + p, m * p))
        for i in range(m):
            a_eq[i, i * p:(i + 1) * p] = 1.0
        for j in range(p):
            a_eq[m + j, j::p] = 1.0
        b_eq = np.concatenate([src.weights, tgt.weights])
        # one marginal constraint is redundant; dropping it keeps the system full rank
        res = linprog(cost.ravel(), A_eq=a_eq[:-1], b_eq=b_eq[:-1], bounds=(0, None),
                      method="highs-ds",
                      options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
        if res.status != 0:
            raise RuntimeError(f"transport LP failed: {res.message}")
        plan = res.x.reshape(m, p)
        idx = np.argwhere(plan > 0)
        coupling = [(int(i), int(j), float(plan[i, j])) for i, j in idx]
        total = float(np.sum(plan * cost))
    total = max(total, 0.0)
    return float(np.sqrt(total)), ExactPlan(coupling, total)

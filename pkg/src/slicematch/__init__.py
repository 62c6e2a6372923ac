"""Stochastic slice-matching transfer of discrete probability measures."""

from .measure import DiscreteMeasure, from_points, pushforward, second_moment, translate
from .ot1d import SliceTransport1D, SortedSide, cdf, quantile, transport_map_1d, w2_1d
from .slicing import (DirectionSampler, Estimate, OrthogonalFrame, frechet_field, loss_l, loss_lj,
                      project, sample_haar, sample_sphere, sw2)
from .matching import SliceMatchingMap, apply, build, is_compatible, pushforward_matched
from .scheme import Schedule, Trajectory, check_lemma_consecutive, run, schedule_gamma, step
from .oracle import ExactPlan, w2_exact

__version__ = "0.1.0"

__all__ = [
    "DiscreteMeasure", "from_points", "pushforward", "second_moment", "translate",
    "SliceTransport1D", "SortedSide", "cdf", "quantile", "transport_map_1d", "w2_1d",
    "DirectionSampler", "Estimate", "OrthogonalFrame", "frechet_field", "loss_l", "loss_lj",
    "project", "sample_haar", "sample_sphere", "sw2",
    "SliceMatchingMap", "apply", "build", "is_compatible", "pushforward_matched",
    "Schedule", "Trajectory", "check_lemma_consecutive", "run", "schedule_gamma", "step",
    "ExactPlan", "w2_exact",
]

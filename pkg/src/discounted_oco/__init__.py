"""Discounted online convex optimization with uniform regret over discount factors."""

__version__ = "0.1.0"

from .core import Domain, LossSequence, ProblemBounds, make_loss_sequence, project
from .special import ConfidenceParams, erf_halfgauss, g, g_tilde, potential_phi, threshold_U
from .dnp import PredictorState, discounted_payoff, predict, run_sequence, update
from .ogd import OgdState, ogd_step, run_ogd, step_size_for
from .combiner import CombinerState, combine, feed_losses
from .sogd import DiscountGrid, ExpertStack, build_grid, run_sogd, sogd_round
from .regret import (
    RegretReport,
    best_comparator,
    check_bound,
    discounted_loss,
    regret_report,
    smoothed_average_decompose,
)

__all__ = [
    "CombinerState", "ConfidenceParams", "DiscountGrid", "Domain", "ExpertStack", "LossSequence",
    "OgdState", "PredictorState", "ProblemBounds", "RegretReport", "best_comparator", "build_grid",
    "check_bound", "combine", "discounted_loss", "discounted_payoff", "erf_halfgauss", "feed_losses", "g",
    "g_tilde", "make_loss_sequence", "ogd_step", "potential_phi", "predict", "project", "regret_report",
    "run_ogd", "run_sequence", "run_sogd", "smoothed_average_decompose", "sogd_round", "step_size_for",
    "threshold_U", "update",
]

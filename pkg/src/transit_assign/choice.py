"""Gains and discrete choice models.

Gains are expressed in seconds.  Every model first drops zero-gain options,
so an option worse than the best one by more than the delay tolerance never
receives probability mass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .network import INF

MODELS = ("linear", "logit", "kirchhoff", "optimal")


class EmptyChoiceSet(ValueError):
    """No option has a positive gain (or a finite PAT)."""


@dataclass(frozen=True)
class ModelConfig:
    model: str = "linear"
    beta: float = 1.0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown decision model {self.model!r}; expected one of {MODELS}")


def compute_gains(pats: Sequence[float], delay_tolerance: float) -> list[float]:
    """``g_i = max(0, min_{j != i} pat_j - pat_i + delay_tolerance)``.

    Infinite PATs (``None``, ``math.inf`` or the integer INF sentinel) get
    gain 0.  A set with a single finite option yields gain ``inf`` for it:
    it is the sole choice.
    """
    finite = [i for i, p in enumerate(pats) if p is not None and p != math.inf and p < INF]
    if not finite:
        raise EmptyChoiceSet("all PATs are infinite")
    gains = [0.0] * len(pats)
    if len(finite) == 1:
        gains[finite[0]] = math.inf
        return gains
    # min over the others = global min, or second min for the argmin itself
    order = sorted(finite, key=lambda i: pats[i])
    lo, second = pats[order[0]], pats[order[1]]
    for i in finite:
        other = second if i == order[0] else lo
        gains[i] = max(0.0, other - pats[i] + delay_tolerance)
    return gains


def probabilities(gains: Sequence[float], config: ModelConfig) -> list[float]:
    """Map gains to a probability vector under ``config.model``."""
    survivors = [i for i, g in enumerate(gains) if g > 0]
    if not survivors:
        raise EmptyChoiceSet("every option has gain 0")
    probs = [0.0] * len(gains)
    if len(survivors) == 1:
        probs[survivors[0]] = 1.0
        return probs
    g = [gains[i] for i in survivors]
    if any(math.isinf(x) for x in g):
        # a sole-choice marker beats everything else
        w = [1.0 if math.isinf(x) else 0.0 for x in g]
    elif config.model == "optimal":
        top = max(g)
        w = [0.0] * len(g)
        w[g.index(top)] = 1.0
    elif config.model == "logit":
        top = max(g)
        w = [math.exp(config.beta * (x - top)) for x in g]
    elif config.model == "kirchhoff":
        if config.beta == 0:
            w = [1.0] * len(g)
        else:
            top = max(g)
            w = [(x / top) ** config.beta for x in g]
    else:
        ranked = sorted(g, reverse=True)
        top = ranked[0]
        delta = ranked[0] - ranked[1]
        w = [max(x, 2 * x - top + delta) for x in g]
    total = math.fsum(w)
    for i, wi in zip(survivors, w):
        probs[i] = wi / total
    return probs


def choose(pats: Sequence[int], delay_tolerance: float, config: ModelConfig) -> list[float]:
    """Probabilities for options given their PATs.

    With zero delay tolerance, options tied for the best PAT all end up with
    gain 0; they are then treated as equally good survivors.
    """
    gains = compute_gains(pats, delay_tolerance)
    if not any(x > 0 for x in gains):
        best = min(p for p in pats if p < INF)
        gains = [1.0 if p == best else 0.0 for p in pats]
    return probabilities(gains, config)

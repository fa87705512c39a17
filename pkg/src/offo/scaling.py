"""Scaling-factor rules that turn gradient history into the positive vector w_k.

Six rules are implemented behind one update interface.  The ``-comp`` kinds
keep one accumulator per coordinate, the ``-agg`` kinds share a single scalar
accumulator (built from Euclidean gradient norms) across all coordinates:

* ``adagrad-comp``  w_i = (sigma + sum_l g_{i,l}^2)^mu            (tag ``adagi1``)
* ``adagrad-agg``   w_i = (sigma + sum_l ||g_l||^2)^mu            (tag ``adag1``)
* ``ewma-comp``     same as adagrad-comp with beta2 discounting   (tag ``adagi2``)
* ``ewma-agg``      same as adagrad-agg with beta2 discounting    (tag ``adag2``)
* ``maxg-comp``     w_i = (k+1)^nu * max(sigma, max_l |g_{i,l}|)  (tag ``maxgi01``)
* ``maxg-agg``      w_i = (k+1)^nu * max(sigma, max_l ||g_l||)    (tag ``maxg01``)
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionMismatch, InvalidParameter, NonFiniteInput

KINDS = (
    "adagrad-agg",
    "adagrad-comp",
    "ewma-agg",
    "ewma-comp",
    "maxg-agg",
    "maxg-comp",
)

#: benchmark variant tag -> scaling kind
VARIANT_TAGS = {
    "adag1": "adagrad-agg",
    "adagi1": "adagrad-comp",
    "adag2": "ewma-agg",
    "adagi2": "ewma-comp",
    "maxg01": "maxg-agg",
    "maxgi01": "maxg-comp",
}


@dataclass(frozen=True)
class ScalingStrategy:
    """Parameters of one scaling rule.

    ``mu`` is the accumulator exponent, ``nu`` the iteration-power exponent of
    the maxg kinds, ``varsigma`` the positive floor constant, ``vartheta`` the
    admissible-interval width parameter and ``beta2`` the EWMA discount.
    """

    kind: str
    mu: float = 0.5
    nu: float = 0.1
    varsigma: float = 0.01
    vartheta: float = 1.0
    beta2: float = 0.9

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameter(f"unknown scaling kind {self.kind!r}")
        if not 0.0 < self.mu < 1.0:
            raise InvalidParameter(f"mu must lie in (0,1), got {self.mu}")
        if not 0.0 < self.varsigma <= 1.0:
            raise InvalidParameter(f"varsigma must lie in (0,1], got {self.varsigma}")
        if not 0.0 < self.vartheta <= 1.0:
            raise InvalidParameter(f"vartheta must lie in (0,1], got {self.vartheta}")
        if self.kind.startswith("ewma") and not 0.0 < self.beta2 < 1.0:
            raise InvalidParameter(f"beta2 must lie in (0,1), got {self.beta2}")
        if self.kind.startswith("maxg") and not 0.0 < self.nu <= self.mu:
            raise InvalidParameter(
                f"maxg kinds need 0 < nu <= mu < 1, got nu={self.nu}, mu={self.mu}"
            )

    @property
    def floor(self) -> float:
        """Proven lower bound on every emitted w_{i,k} (the AS.5 constant)."""
        if self.kind.startswith("maxg"):
            return self.varsigma
        return self.varsigma**self.mu * np.sqrt(self.vartheta)

    @classmethod
    def from_tag(cls, tag: str, **overrides) -> "ScalingStrategy":
        """Build the strategy named by a benchmark variant tag such as ``adagi1``."""
        if tag not in VARIANT_TAGS:
            raise InvalidParameter(f"unknown scaling tag {tag!r}")
        return cls(kind=VARIANT_TAGS[tag], **overrides)


@dataclass
class ScalingState:
    """Mutable per-run accumulator behind :func:`update_scaling`."""

    strategy: ScalingStrategy
    n: int
    k: int = -1
    acc: np.ndarray = field(default=None)  # per-coordinate accumulator
    agg: float = 0.0  # shared scalar accumulator of the -agg kinds

    def copy(self) -> "ScalingState":
        return replace(self, acc=None if self.acc is None else self.acc.copy())


def init_scaling(strategy: ScalingStrategy, n: int) -> ScalingState:
    """Create the k=0 state with empty accumulators for an n-dimensional run."""
    if n < 1:
        raise InvalidParameter(f"dimension must be >= 1, got {n}")
    state = ScalingState(strategy=strategy, n=n)
    if strategy.kind == "maxg-comp":
        # running max starts at the floor so max(varsigma, .) is built in
        state.acc = np.full(n, strategy.varsigma)
    elif strategy.kind == "maxg-agg":
        state.agg = strategy.varsigma
    elif strategy.kind.endswith("comp"):
        state.acc = np.zeros(n)
    return state


def update_scaling(state: ScalingState, g_k: np.ndarray, k: int) -> np.ndarray:
    """Fold gradient ``g_k`` of iteration ``k`` into the state and emit w_k.

    ``k`` is passed explicitly (consecutive, starting at 0) so recorded runs
    can be replayed off-line against the same state trajectory.
    """
    g_k = np.asarray(g_k, dtype=float)
    if g_k.shape != (state.n,):
        raise DimensionMismatch(f"gradient has shape {g_k.shape}, expected ({state.n},)")
    if not np.isfinite(g_k).all():
        raise NonFiniteInput("gradient contains NaN or inf")
    if k != state.k + 1:
        raise InvalidParameter(f"updates must arrive with consecutive k; got {k} after {state.k}")
    state.k = k

    strat = state.strategy
    kind = strat.kind
    # overflow of a squared-gradient accumulator surfaces as w = inf, which
    # the driver reports as a failed run; no warning needed here
    with np.errstate(over="ignore"):
        if kind == "adagrad-comp":
            state.acc = state.acc + g_k * g_k
            return (strat.varsigma + state.acc) ** strat.mu
        if kind == "adagrad-agg":
            state.agg = state.agg + float(g_k @ g_k)
            return np.full(state.n, (strat.varsigma + state.agg) ** strat.mu)
        if kind == "ewma-comp":
            state.acc = strat.beta2 * state.acc + g_k * g_k
            return (strat.varsigma + state.acc) ** strat.mu
        if kind == "ewma-agg":
            state.agg = strat.beta2 * state.agg + float(g_k @ g_k)
            return np.full(state.n, (strat.varsigma + state.agg) ** strat.mu)
        if kind == "maxg-comp":
            state.acc = np.maximum(state.acc, np.abs(g_k))
            return (k + 1) ** strat.nu * state.acc
        if kind == "maxg-agg":
            state.agg = max(state.agg, float(np.linalg.norm(g_k)))
            return np.full(state.n, (k + 1) ** strat.nu * state.agg)
    raise AssertionError(f"unreachable kind {kind}")

"""Bounded symmetric Hessian approximations B_k for the quadratic model.

Four kinds are supported:

* ``zero``   B = 0 (purely first-order),
* ``bb``     the scalar diagonal approximation  B = (||s||^2 / y's) I,
* ``lbfgs``  up to ``m`` direct BFGS updates applied on top of the scalar
  diagonal base built from the newest accepted secant pair,
* ``exact``  the problem's own (symmetrised) Hessian at the new iterate.

Every kind enforces the spectral-norm cap ``kappaB`` by rescaling the whole
operator, which preserves symmetry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidParameter, NonFiniteInput

KINDS = ("zero", "bb", "lbfgs", "exact")

#: relative curvature threshold below which a secant pair is discarded
CURVATURE_MIN = 1e-15

#: iterations of the power method used for the norm estimate
POWER_ITERS = 30


@dataclass
class _Pair:
    s: np.ndarray
    y: np.ndarray


@dataclass
class HessianModel:
    """Matrix-free symmetric operator with a spectral-norm cap."""

    kind: str
    n: int
    kappaB: float = 1e6
    m: int = 3  # lbfgs pair budget
    sigma: float = 0.0  # scalar of the diagonal base (bb and lbfgs)
    pairs: list = field(default_factory=list)  # lbfgs ring buffer
    dense: np.ndarray = None  # exact kind only
    scale: float = 1.0  # cap-enforcement rescaling of the whole operator
    # per-pair precomputations for the direct BFGS form
    _us: list = field(default_factory=list)  # u_j = B_j s_j
    _phis: list = field(default_factory=list)  # phi_j = s_j' B_j s_j
    _rhos: list = field(default_factory=list)  # rho_j = 1 / y_j's_j

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameter(f"unknown model kind {self.kind!r}")
        if self.kappaB < 1.0:
            raise InvalidParameter(f"kappaB must be >= 1, got {self.kappaB}")
        if self.kind == "lbfgs" and self.m < 1:
            raise InvalidParameter("lbfgs needs at least one pair slot")

    @property
    def is_zero(self) -> bool:
        """True when the operator is identically zero (lets callers shortcut)."""
        if self.kind == "zero":
            return True
        if self.kind in ("bb", "lbfgs"):
            return self.sigma == 0.0 and not self.pairs
        return self.dense is None

    def norm_bound(self) -> float:
        """Current estimate of ||B||_2 (exact for zero/bb, else power method)."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "bb":
            return abs(self.sigma) * self.scale
        if self.is_zero:
            return 0.0
        return _power_norm(self, self.n)


def init_model(kind: str, n: int, kappaB: float = 1e6, m: int = 3) -> HessianModel:
    """Fresh model; bb/lbfgs start at B = 0 until a usable secant pair arrives."""
    if kind == "lbfgs3":
        kind, m = "lbfgs", 3
    return HessianModel(kind=kind, n=n, kappaB=kappaB, m=m)


def apply_model(model: HessianModel, v: np.ndarray) -> np.ndarray:
    """Matrix-free product B v."""
    v = np.asarray(v, dtype=float)
    if v.shape != (model.n,):
        raise DimensionMismatch(f"vector has shape {v.shape}, expected ({model.n},)")
    if model.kind == "zero" or model.is_zero:
        return np.zeros(model.n)
    if model.kind == "bb":
        return (model.scale * model.sigma) * v
    if model.kind == "exact":
        return model.scale * (model.dense @ v)
    # lbfgs: direct (non-inverse) BFGS recursion applied pair by pair
    out = model.sigma * v
    for pair, u, phi, rho in zip(model.pairs, model._us, model._phis, model._rhos):
        out += -(u @ v) / phi * u + rho * (pair.y @ v) * pair.y
    return model.scale * out


def update_model(model, s_k, y_k, x_next=None, problem=None) -> HessianModel:
    """Fold the just-completed step into the model and re-enforce the cap.

    ``s_k``/``y_k`` are the step and gradient difference of the completed
    iteration (both None on the very first call, when no step exists yet).
    The exact kind ignores them and evaluates the problem Hessian at
    ``x_next``.  Mutates and returns ``model``.
    """
    if model.kind == "exact":
        if problem is None or x_next is None:
            raise InvalidParameter("exact model needs the problem and the new iterate")
        hess = np.asarray(problem.evaluate(x_next, ("hessian",))["hessian"], dtype=float)
        model.dense = 0.5 * (hess + hess.T)  # noisy oracles may break symmetry
        model.scale = 1.0
        _enforce_cap(model)
        return model
    if model.kind == "zero" or s_k is None:
        return model

    s_k = np.asarray(s_k, dtype=float)
    y_k = np.asarray(y_k, dtype=float)
    if s_k.shape != (model.n,) or y_k.shape != (model.n,):
        raise DimensionMismatch("secant pair has wrong shape")
    if not (np.isfinite(s_k).all() and np.isfinite(y_k).all()):
        raise NonFiniteInput("secant pair contains NaN or inf")

    ss = float(s_k @ s_k)
    ys = float(y_k @ s_k)
    if ss == 0.0 or ys < CURVATURE_MIN * ss:
        return model  # curvature safeguard failed: keep the previous operator

    if model.kind == "bb":
        model.sigma = ss / ys
        model.scale = 1.0
        _enforce_cap(model)
        return model

    # lbfgs: fresh scalar base from the newest pair, then re-apply the buffer
    model.pairs.append(_Pair(s_k.copy(), y_k.copy()))
    if len(model.pairs) > model.m:
        model.pairs.pop(0)
    model.sigma = ss / ys
    model.scale = 1.0
    _rebuild_lbfgs(model)
    _enforce_cap(model)
    return model


def _rebuild_lbfgs(model: HessianModel) -> None:
    """Recompute u_j = B_j s_j and phi_j for the stored pairs (base changed)."""
    accepted, us, phis, rhos = [], [], [], []
    for pair in model.pairs:
        u = model.sigma * pair.s
        for uj, phij, rhoj, pj in zip(us, phis, rhos, accepted):
            u = u - (uj @ pair.s) / phij * uj + rhoj * (pj.y @ pair.s) * pj.y
        phi = float(pair.s @ u)
        # BFGS of a positive-definite base keeps phi > 0; guard rounding anyway
        if phi <= 0.0:
            continue
        accepted.append(pair)
        us.append(u)
        phis.append(phi)
        rhos.append(1.0 / float(pair.y @ pair.s))
    model.pairs, model._us, model._phis, model._rhos = accepted, us, phis, rhos


def _power_norm(model: HessianModel, n: int) -> float:
    """Power-method estimate of the spectral norm (deterministic start)."""
    gen = np.random.Generator(np.random.Philox(key=[0xB0B, 0], counter=[n, 0, 0, 0]))
    v = gen.standard_normal(n)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(POWER_ITERS):
        w = apply_model(model, v)
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0
        est = nw
        v = w / nw
    return est


def _enforce_cap(model: HessianModel) -> None:
    if model.kind == "bb":
        est = abs(model.sigma)
    elif model.kind == "exact":
        est = float(np.linalg.norm(model.dense, 2))
    else:
        # cheap upper bound by the triangle inequality; the power estimate is
        # only needed when the bound cannot already certify the cap
        upper = model.sigma + sum(
            float(u @ u) / phi + rho * float(p.y @ p.y)
            for u, phi, rho, p in zip(model._us, model._phis, model._rhos, model.pairs))
        if upper <= model.kappaB:
            return
        est = _power_norm(model, model.n)
    if est > model.kappaB:
        model.scale = model.kappaB / est

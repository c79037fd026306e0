"""Exact identification of softmax components from choice probabilities.

Given a softmax dataset with some revealed preference ``a^ > b^`` at
``t^``, the components are recovered from weights of evidence::

    u(x) = w_t^(x, b^) / w_t^(a^, b^)
    alpha(x) = l_0(x, b^)
    lam(t) = 1 / w_t(a^, b^)

The result is one member of the equivalence class ``(k u + h, alpha + l, k lam)``;
:func:`params_equivalent` decides membership in that class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.special import logsumexp

from .core import SoftmaxParams, log_odds, ordered_pairs, softmax_dist, weight_of_evidence
from .dataset import ChoiceDataset
from .errors import InvalidNeuralBiasError, NotSoftmaxError


def find_anchor(d: ChoiceDataset, tol: float = 1e-9):
    """Anchor ``(a^, b^, t^)`` maximizing ``w_t(a, b)``, or ``None`` for a constant dataset.

    The process counts as constant when no ``p_t(a, b)`` exceeds
    ``p_0(a, b) + tol``. Ties for the maximum keep the first triple in
    (deadline, universe) scan order.
    """
    best, best_w = None, -math.inf
    moved = False
    for t in d.deadlines:
        for a, b in ordered_pairs(d.universe):
            if d.binary_prob(t, a, b) > d.binary_prob(0.0, a, b) + tol:
                moved = True
                w = weight_of_evidence(d, t, a, b)
                if w > best_w:
                    best, best_w = (a, b, t), w
    return best if moved else None


def detect_constant(d: ChoiceDataset, tol: float = 1e-9) -> bool:
    """True iff deliberation never moves a binary probability above its zero-deadline value."""
    return find_anchor(d, tol) is None


@dataclass(frozen=True)
class IdentifiedParams:
    """Identified components with their anchors.

    For a constant process ``u`` is zero and ``constant`` is set; the noise
    is not identified and is stored as 1 at every deadline only so the
    params remain evaluable (any positive value gives the same
    probabilities).
    """

    params: SoftmaxParams
    anchors: tuple
    constant: bool

    def to_dict(self) -> dict:
        p = self.params
        return {
            "constant": self.constant,
            "anchors": list(self.anchors),
            "u": {str(k): v for k, v in p.u.items()},
            "alpha": {str(k): v for k, v in p.alpha.items()},
            "lam": None if self.constant else [[_num(t), v] for t, v in p.lam.items()],
        }


def _num(t):
    return int(t) if float(t).is_integer() else t


def identify(d: ChoiceDataset, anchor: tuple | None = None, tol: float = 1e-9) -> IdentifiedParams:
    """Recover ``(u, alpha, lam)`` from the binary tables of ``d``.

    ``anchor`` overrides the automatic choice; it must satisfy
    ``w_t^(a^, b^) > 0``. Raises :class:`NotSoftmaxError` if the implied
    noise is nonpositive at some deadline.
    """
    universe = d.universe
    if anchor is None:
        anchor = find_anchor(d, tol)
    if anchor is None:
        b_hat = universe[0]
        alpha = {x: 0.0 if x == b_hat else log_odds(d, 0.0, x, b_hat) for x in universe}
        params = SoftmaxParams({x: 0.0 for x in universe}, alpha,
                               {t: 1.0 for t in d.deadlines}, ordered=d.grid.ordered)
        return IdentifiedParams(params, (None, b_hat, None), True)

    a_hat, b_hat, t_hat = anchor
    scale = weight_of_evidence(d, t_hat, a_hat, b_hat)
    if not scale > 0:
        raise NotSoftmaxError(f"anchor {anchor!r} has nonpositive weight of evidence {scale!r}")
    u = {x: 0.0 if x == b_hat else weight_of_evidence(d, t_hat, x, b_hat) / scale
         for x in universe}
    u[a_hat] = 1.0
    alpha = {x: 0.0 if x == b_hat else log_odds(d, 0.0, x, b_hat) for x in universe}
    lam = {}
    for t in d.deadlines:
        w = weight_of_evidence(d, t, a_hat, b_hat)
        if not w > 0:
            raise NotSoftmaxError(
                f"w_{t:g}({a_hat!r}, {b_hat!r}) = {w!r} <= 0: Preference Consistency fails")
        lam[t] = 1.0 / w
    params = SoftmaxParams(u, alpha, lam, ordered=d.grid.ordered)
    return IdentifiedParams(params, (a_hat, b_hat, t_hat), False)


def reconstruction_residual(params: SoftmaxParams, d: ChoiceDataset) -> float:
    """Largest relative error of ``params`` against every table of ``d``."""
    worst = 0.0
    for (t, menu), dist in d.tables.items():
        fitted = softmax_dist(params, t, menu).as_array()
        obs = dist.as_array()
        worst = max(worst, float(np.max(np.abs(fitted - obs) / np.maximum(obs, 1e-300))))
    return worst


@dataclass(frozen=True)
class EquivalenceReport:
    """Outcome of an equivalence test ``q = (k u + h, alpha + l, k lam)``.

    ``residuals`` are scale-normalized maxima for the three components;
    ``j`` is only set by :func:`cross_validate`.
    """

    equivalent: bool
    k: float
    h: float
    l: float
    residual: float
    residuals: dict
    j: float | None = None

    def to_dict(self) -> dict:
        return {"equivalent": self.equivalent, "k": self.k, "h": self.h, "l": self.l,
                "j": self.j, "residual": self.residual, "residuals": dict(self.residuals)}


def _fit_affine(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares ``y = k x + h`` using centered differences for ``k``."""
    xc, yc = x - x.mean(), y - y.mean()
    denom = float(xc @ xc)
    k = float(xc @ yc) / denom if denom > 0 else math.nan
    return k, float(y.mean() - k * x.mean())


def _scaled(res: float, ref: np.ndarray) -> float:
    return float(res / max(1.0, float(np.max(np.abs(ref)))))


def params_equivalent(p: SoftmaxParams, q: SoftmaxParams, tol: float = 1e-9) -> EquivalenceReport:
    """Whether ``q`` is a cardinal transform of ``p``.

    Scaling utility by ``k`` must scale noise by the same ``k`` so that
    ``u / lam`` is unchanged up to a constant. Residuals are absolute errors divided by ``max(1, max |target|)``.
    Constant utilities are compared on the bias only.
    """
    if p.universe != q.universe or tuple(p.lam) != tuple(q.lam):
        raise ValueError("params live on different universes or grids")
    up, uq = p.utility_array(), q.utility_array()
    ap, aq = p.bias_array(), q.bias_array()
    l = float(np.mean(aq - ap))
    res_a = _scaled(np.max(np.abs(aq - ap - l)), aq)
    p_const, q_const = np.ptp(up) == 0, np.ptp(uq) == 0
    if p_const or q_const:
        ok = p_const and q_const and res_a <= tol
        res = {"u": 0.0 if ok else math.inf, "alpha": res_a, "lam": 0.0}
        return EquivalenceReport(ok, 1.0, float(uq.mean() - up.mean()), l,
                                 max(res.values()), res)
    k, h = _fit_affine(up, uq)
    res_u = _scaled(np.max(np.abs(uq - k * up - h)), uq)
    lp = np.array(list(p.lam.values()))
    lq = np.array(list(q.lam.values()))
    res_l = float(np.max(np.abs(lq - k * lp) / lq)) if k > 0 else math.inf
    res = {"u": res_u, "alpha": res_a, "lam": res_l}
    residual = max(res.values())
    return EquivalenceReport(bool(k > 0 and residual <= tol), k, h, l, residual, res)


def cross_validate(behavioral: SoftmaxParams, v: Mapping, mu: Mapping, beta: Mapping,
                   tol: float = 1e-9) -> EquivalenceReport:
    """Match behavioral ``(u, alpha, lam)`` with neural ``(v, mu, beta)``.

    Expects ``v = k u + h``, ``mu = j exp(alpha)`` and ``beta(t) = 1 / (k lam(t))``
    for some ``j, k > 0``.
    """
    universe = behavioral.universe
    mu_arr = np.array([float(mu[x]) for x in universe])
    if np.any(mu_arr <= 0):
        raise InvalidNeuralBiasError("neural bias must be strictly positive")
    if abs(mu_arr.sum() - 1.0) > 1e-9:
        raise InvalidNeuralBiasError(f"neural bias sums to {mu_arr.sum()!r}, not 1")
    u = behavioral.utility_array()
    if np.ptp(u) == 0:
        raise ValueError("behavioral utility is constant; the scale k is not identified")
    alpha = behavioral.bias_array()
    vv = np.array([float(v[x]) for x in universe])
    k, h = _fit_affine(u, vv)
    res_v = _scaled(np.max(np.abs(vv - k * u - h)), vv)
    log_j = -float(logsumexp(alpha))
    res_mu = float(np.max(np.abs(mu_arr - np.exp(alpha + log_j))))
    deadlines = tuple(behavioral.lam)
    lam = np.array([behavioral.lam[t] for t in deadlines])
    b = np.array([float(beta[t]) for t in deadlines])
    res_b = float(np.max(np.abs(b - 1.0 / (k * lam)) / b)) if k > 0 else math.inf
    res = {"v": res_v, "mu": res_mu, "beta": res_b}
    residual = max(res.values())
    return EquivalenceReport(bool(k > 0 and residual <= tol), k, h, 0.0, residual, res,
                             j=math.exp(log_j))

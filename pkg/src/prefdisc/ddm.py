"""Binary value-based drift-diffusion comparisons and Gibbs priors.

A comparison of proposal ``a`` against incumbent ``b`` runs

    dZ = (v(a) - v(b)) dtau + sqrt(2) dW,   Z(0) = zeta(a, b)

until ``|Z| = beta``; hitting ``+beta`` accepts ``a``. The closed-form
acceptance probability is

    P(a, b) = (1 - exp(-(zeta + beta) delta)) / (1 - exp(-2 beta delta)),

with ``delta = v(a) - v(b)``. The Gibbs prior ``pi(a, b)`` is the ex ante
probability whose Gibbs transition under evidence ``beta * delta`` gives
``P(a, b)``; the maps between ``zeta`` and ``pi`` are mutually inverse.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Hashable, Mapping

import numba
import numpy as np
from scipy.special import expit, logit

from .errors import IntransitiveError, RunawayError

#: Below this |delta| the acceptance probability uses its first-order expansion.
DELTA_SWITCH = 1e-8
#: Below this |x| the g function uses its second-order series.
G_SWITCH = 1e-6
DEFAULT_DT = 1e-4
DEFAULT_MAX_STEPS = 10**9


@dataclass(frozen=True)
class DdmSpec:
    """``DDM(v, beta, zeta)`` over the labels of ``v`` (in key order).

    ``zeta`` holds only pairs ``(a, b)`` with ``a`` before ``b``; the reverse
    entry is its negation, so antisymmetry holds by construction. Missing
    pairs default to 0.
    """

    v: Mapping
    beta: float
    zeta: Mapping

    def __post_init__(self):
        v = {k: float(x) for k, x in self.v.items()}
        beta = float(self.beta)
        if not beta > 0:
            raise ValueError("threshold beta must be positive")
        order = {k: i for i, k in enumerate(v)}
        zeta = {}
        for (a, b), z in self.zeta.items():
            if a not in order or b not in order or a == b:
                raise ValueError(f"bad zeta pair {(a, b)!r}")
            z = float(z)
            if order[a] > order[b]:
                a, b, z = b, a, -z
            if (a, b) in zeta and zeta[(a, b)] != z:
                raise ValueError(f"zeta given twice for {(a, b)!r} with conflicting values")
            if not abs(z) < beta:
                raise ValueError(f"|zeta{(a, b)!r}| = {abs(z)!r} is not below beta = {beta!r}")
            zeta[(a, b)] = z
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "zeta", {p: zeta[p] for p in sorted(zeta, key=lambda p: (
            order[p[0]], order[p[1]]))})

    @classmethod
    def unbiased(cls, v: Mapping, beta: float) -> "DdmSpec":
        return cls(v, beta, {})

    @property
    def labels(self) -> tuple:
        return tuple(self.v)

    def zeta_of(self, a: Hashable, b: Hashable) -> float:
        if (a, b) in self.zeta:
            return self.zeta[(a, b)]
        if (b, a) in self.zeta:
            return -self.zeta[(b, a)]
        if a not in self.v or b not in self.v or a == b:
            raise KeyError((a, b))
        return 0.0

    def restrict(self, menu) -> "DdmSpec":
        menu = [x for x in self.v if x in set(menu)]
        keep = set(menu)
        return DdmSpec({x: self.v[x] for x in menu}, self.beta,
                       {p: z for p, z in self.zeta.items() if p[0] in keep and p[1] in keep})

    def to_dict(self) -> dict:
        return {"v": {str(k): x for k, x in self.v.items()}, "beta": self.beta,
                "zeta": [[a, b, z] for (a, b), z in self.zeta.items()]}

    @classmethod
    def from_dict(cls, doc: Mapping) -> "DdmSpec":
        v = dict(doc["v"])
        by_str = {str(k): k for k in v}
        zeta = {}
        for a, b, z in doc.get("zeta", []):
            zeta[(by_str[str(a)], by_str[str(b)])] = z
        return cls(v, doc["beta"], zeta)


@dataclass(frozen=True)
class ComparisonOutcome:
    winner: Hashable
    rt: float


@dataclass(frozen=True)
class GibbsPrior:
    labels: tuple
    probs: tuple

    def __getitem__(self, label):
        return self.probs[self.labels.index(label)]

    def as_dict(self) -> dict:
        return dict(zip(self.labels, self.probs))


# ---------------------------------------------------------------------------
# closed forms


def _acceptance(delta: float, zeta: float, beta: float) -> float:
    if abs(delta) < DELTA_SWITCH:
        # first-order expansion keeps the branch continuous to ~1e-16
        return (zeta + beta) / (2 * beta) + (beta + zeta) * (beta - zeta) * delta / (4 * beta)
    x = (zeta + beta) * delta
    y = 2 * beta * delta
    if delta > 0:
        return math.expm1(-x) / math.expm1(-y)
    # rescaled so nothing overflows when delta is very negative
    return math.exp(y - x) * math.expm1(x) / math.expm1(y)


def _log_acceptance(delta: float, zeta: float, beta: float) -> float:
    if abs(delta) < DELTA_SWITCH:
        return math.log(_acceptance(delta, zeta, beta))
    x = (zeta + beta) * delta
    y = 2 * beta * delta
    if delta > 0:
        return math.log(-math.expm1(-x)) - math.log(-math.expm1(-y))
    return (y - x) + math.log(-math.expm1(x)) - math.log(-math.expm1(y))


def acceptance_prob(spec: DdmSpec, a, b) -> float:
    """Probability that proposal ``a`` beats incumbent ``b``."""
    if a == b:
        raise ValueError("a comparison needs two distinct alternatives")
    return _acceptance(spec.v[a] - spec.v[b], spec.zeta_of(a, b), spec.beta)


def log_acceptance_prob(spec: DdmSpec, a, b) -> float:
    if a == b:
        raise ValueError("a comparison needs two distinct alternatives")
    return _log_acceptance(spec.v[a] - spec.v[b], spec.zeta_of(a, b), spec.beta)


def gibbs_posterior(v_a: float, v_b: float, beta: float, pi_ab: float) -> float:
    """Gibbs transition of prior ``pi_ab`` under evidence ``beta * (v_a - v_b)``."""
    return float(expit(logit(pi_ab) + beta * (v_a - v_b)))


def _log_abs_expm1(z: float) -> float:
    """``ln |e^z - 1|`` without overflow for large positive ``z``."""
    if z > 1.0:
        return z + math.log1p(-math.exp(-z))
    if z > 0:
        return math.log(math.expm1(z))
    return math.log(-math.expm1(z))


def _prior_log_odds(spec: DdmSpec, a, b) -> float:
    """``ln P(a,b)/P(b,a) - beta delta``, simplified so that ``zeta = 0`` gives exactly 0.

    It equals ``zeta delta + ln|1 - e^{-(beta+zeta) delta}| - ln|1 - e^{-(beta-zeta) delta}|``;
    near zero drift the two logs are replaced by their common leading term,
    which leaves an error of order ``delta**2``.
    """
    delta = spec.v[a] - spec.v[b]
    zeta, beta = spec.zeta_of(a, b), spec.beta
    if abs(delta) < DELTA_SWITCH:
        return math.log((beta + zeta) / (beta - zeta))
    return (zeta * delta + _log_abs_expm1(-(beta + zeta) * delta)
            - _log_abs_expm1(-(beta - zeta) * delta))


def gibbs_prior_binary(spec: DdmSpec, a, b) -> float:
    """Ex ante probability ``pi(a, b)`` whose Gibbs transition is ``P(a, b)``."""
    return float(expit(_prior_log_odds(spec, a, b)))


def g_function(x: float, y: float) -> float:
    """``g(x, y) = ln((e^y e^x + 1) / (e^y e^-x + 1)) / x - 1`` and its ``x -> 0`` limit.

    ``g`` is even in ``x``. The log ratio is evaluated as
    ``log1p(2 sinh(x) / (e^-x + e^-y))`` to avoid cancellation at small ``x``.
    """
    x = abs(x)
    s = float(expit(y))
    if x < G_SWITCH:
        return 2 * s - 1 + x * x * s * (1 - s) * (1 - 2 * s) / 3
    if x < 30.0:
        ratio = 2 * math.sinh(x) / (math.exp(-x) + math.exp(-y)) if y > -700 else 0.0
        return math.log1p(ratio) / x - 1
    return (np.logaddexp(0.0, y + x) - np.logaddexp(0.0, y - x)) / x - 1


def _zeta_from_log_odds(delta: float, beta: float, log_odds: float) -> float:
    return beta * g_function(beta * delta, log_odds)


def zeta_from_prior_binary(v_a: float, v_b: float, beta: float, pi_ab: float) -> float:
    """Initial condition in ``(-beta, beta)`` whose Gibbs prior is ``pi_ab``."""
    if not 0 < pi_ab < 1:
        raise ValueError("pi_ab must lie strictly between 0 and 1")
    return _zeta_from_log_odds(v_a - v_b, beta, float(logit(pi_ab)))


# ---------------------------------------------------------------------------
# transitivity and the global Gibbs bijection


@dataclass(frozen=True)
class TransitivityReport:
    transitive: bool
    worst_triple: tuple | None
    residual: float

    def __bool__(self):
        return self.transitive


def is_transitive(spec: DdmSpec, tol: float = 1e-9) -> TransitivityReport:
    """Compare the log-probabilities of the two 3-cycles through every triple."""
    worst, worst_res = None, 0.0
    lp = log_acceptance_prob
    for a, b, c in itertools.combinations(spec.labels, 3):
        forward = lp(spec, b, a) + lp(spec, c, b) + lp(spec, a, c)
        backward = lp(spec, c, a) + lp(spec, b, c) + lp(spec, a, b)
        res = abs(forward - backward)
        if res > worst_res or worst is None:
            worst, worst_res = (a, b, c), res
    return TransitivityReport(worst_res <= tol, worst, worst_res)


def prior_from_transitive_zeta(spec: DdmSpec, tol: float = 1e-9) -> GibbsPrior:
    """Global Gibbs prior of a transitive DDM, referenced to its first label."""
    check = is_transitive(spec, tol)
    if not check:
        raise IntransitiveError(
            f"DDM is intransitive (triple {check.worst_triple!r}, residual {check.residual:.3g})")
    ref = spec.labels[0]
    logs = np.array([0.0 if x == ref else _prior_log_odds(spec, x, ref) for x in spec.labels])
    z = np.exp(logs - logs.max())
    return GibbsPrior(spec.labels, tuple(z / z.sum()))


def zeta_from_global_prior(v: Mapping, beta: float, pi: Mapping | GibbsPrior) -> DdmSpec:
    """The unique transitive DDM whose global Gibbs prior is ``pi``."""
    if isinstance(pi, GibbsPrior):
        pi = pi.as_dict()
    labels = tuple(v)
    logs = {}
    for x in labels:
        if not pi[x] > 0:
            raise ValueError("prior must be fully supported")
        logs[x] = math.log(pi[x])
    zeta = {(a, b): _zeta_from_log_odds(v[a] - v[b], beta, logs[a] - logs[b])
            for a, b in itertools.combinations(labels, 2)}
    return DdmSpec(v, beta, zeta)


# ---------------------------------------------------------------------------
# sampling


#: Bridge exponents above this are treated as certain non-crossings.
_BRIDGE_CUTOFF = 40.0


@numba.njit(cache=True)
def _walk(z, drift, beta, dt, rng, max_steps):
    """Euler-Maruyama walk from ``z``; returns (+1 | -1 | 0, steps taken).

    With constant drift the Gaussian step is exact at grid points, so the
    only discretization error is a barrier crossed and recrossed inside one
    step. A Brownian-bridge test removes it: given endpoints at distances
    ``g0, g1`` from a barrier, the path touched it with probability
    ``exp(-g0 g1 / dt)`` (diffusion variance 2). The test only draws when
    that probability is non-negligible.
    """
    sd = math.sqrt(2.0 * dt)
    mu = drift * dt
    for k in range(1, max_steps + 1):
        prev = z
        z += mu + sd * rng.standard_normal()
        if z >= beta:
            return 1, k
        if z <= -beta:
            return -1, k
        up = (beta - prev) * (beta - z) / dt
        if up < _BRIDGE_CUTOFF and rng.random() < math.exp(-up):
            return 1, k
        down = (beta + prev) * (beta + z) / dt
        if down < _BRIDGE_CUTOFF and rng.random() < math.exp(-down):
            return -1, k
    return 0, max_steps


@numba.njit(cache=True)
def _walk_many(n, z, drift, beta, dt, rng, max_steps):
    wins = np.zeros(n, dtype=np.bool_)
    steps = np.zeros(n, dtype=np.int64)
    for i in range(n):
        hit, k = _walk(z, drift, beta, dt, rng, max_steps)
        if hit == 0:
            return wins, steps, i
        wins[i] = hit > 0
        steps[i] = k
    return wins, steps, -1


def sample_comparison(spec: DdmSpec, a, b, rng: np.random.Generator, dt: float = DEFAULT_DT,
                      max_steps: int = DEFAULT_MAX_STEPS) -> ComparisonOutcome:
    """Simulate one comparison of proposal ``a`` against incumbent ``b``.

    The response time is ``steps * dt``. Deterministic given the state of
    ``rng`` and ``dt``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    hit, k = _walk(spec.zeta_of(a, b), spec.v[a] - spec.v[b], spec.beta, dt, rng, max_steps)
    if hit == 0:
        raise RunawayError(f"no barrier hit within {max_steps} steps (dt={dt})")
    return ComparisonOutcome(a if hit > 0 else b, k * dt)


def sample_comparisons(spec: DdmSpec, a, b, n: int, rng: np.random.Generator,
                       dt: float = DEFAULT_DT,
                       max_steps: int = DEFAULT_MAX_STEPS) -> tuple[np.ndarray, np.ndarray]:
    """``n`` independent comparisons; returns (proposal won, response times)."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    wins, steps, failed = _walk_many(n, spec.zeta_of(a, b), spec.v[a] - spec.v[b],
                                     spec.beta, dt, rng, max_steps)
    if failed >= 0:
        raise RunawayError(f"sample {failed}: no barrier hit within {max_steps} steps")
    return wins, steps * dt

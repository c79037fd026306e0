"""Menu exploration, the Metropolis-DDM runner and its incumbent chain.

Kernels are column-stochastic: ``matrix[i, j]`` is the probability of
moving to ``labels[i]`` from ``labels[j]``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .core import ChoiceDistribution
from .ddm import (DEFAULT_DT, DdmSpec, _walk, acceptance_prob, prior_from_transitive_zeta)
from .errors import ConvergenceError, UnsupportedSizeError


@dataclass(frozen=True)
class MarkovKernel:
    labels: tuple
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        object.__setattr__(self, "labels", tuple(self.labels))
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        n = len(self.labels)
        if m.shape != (n, n):
            raise ValueError(f"matrix shape {m.shape} does not match {n} labels")
        if np.any(m < 0):
            raise ValueError("kernel has negative entries")
        if np.max(np.abs(m.sum(axis=0) - 1.0)) > 1e-12:
            raise ValueError("kernel columns must sum to 1")

    def __getitem__(self, key):
        a, b = key
        return self.matrix[self.labels.index(a), self.labels.index(b)]

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "matrix": self.matrix.tolist()}


def build_exploration(menu: Sequence[Hashable], topology="uniform", rho: float = 1.0) -> MarkovKernel:
    """Symmetric exploration matrix over ``menu``.

    ``topology`` is ``"uniform"`` or an iterable of undirected edges. For a
    graph, off-diagonal mass is ``k / d(a, b)**rho`` with ``d`` the
    shortest-path distance and one global ``k`` chosen so the heaviest column
    sums to 1; leftover mass sits on the diagonal as a self-proposal.
    """
    labels = tuple(menu)
    n = len(labels)
    if n < 2:
        raise UnsupportedSizeError("exploration needs at least two alternatives")
    if isinstance(topology, str):
        if topology != "uniform":
            raise ValueError(f"unknown topology {topology!r}")
        q = np.full((n, n), 1.0 / (n - 1))
        np.fill_diagonal(q, 0.0)
        return MarkovKernel(labels, q)
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    idx = {x: i for i, x in enumerate(labels)}
    adj = np.zeros((n, n))
    for a, b in topology:
        if a == b:
            continue
        adj[idx[a], idx[b]] = adj[idx[b], idx[a]] = 1.0
    dist = shortest_path(adj, method="D", unweighted=True, directed=False)
    if np.isinf(dist).any():
        raise ValueError("exploration graph is disconnected")
    off = ~np.eye(n, dtype=bool)
    w = np.zeros((n, n))
    w[off] = dist[off] ** (-float(rho))
    k = 1.0 / w.sum(axis=0).max()
    q = k * w
    q[np.diag_indices(n)] = 1.0 - q.sum(axis=0)
    return MarkovKernel(labels, np.clip(q, 0.0, None))


def incumbent_matrix(q: MarkovKernel, spec: DdmSpec) -> MarkovKernel:
    """``M(a | b) = Q(a | b) P(a, b)`` off the diagonal; rejections stay on it."""
    labels = q.labels
    n = len(labels)
    m = np.zeros((n, n))
    for j, b in enumerate(labels):
        for i, a in enumerate(labels):
            if i != j:
                m[i, j] = q.matrix[i, j] * acceptance_prob(spec, a, b)
        m[j, j] = 1.0 - m[:, j].sum()
    return MarkovKernel(labels, m)


def stationary(spec: DdmSpec, menu: Iterable[Hashable] | None = None) -> ChoiceDistribution:
    """Softmax stationary law ``m(a) ~ pi(a) exp(beta v(a))`` of a transitive DDM on ``menu``."""
    sub = spec if menu is None else spec.restrict(menu)
    prior = prior_from_transitive_zeta(sub)
    logs = np.log(np.array(prior.probs)) + sub.beta * np.array([sub.v[x] for x in sub.labels])
    z = np.exp(logs - logs.max())
    return ChoiceDistribution(sub.labels, z / z.sum())


def stationary_oracle(m: MarkovKernel, tol: float = 1e-12, max_iters: int = 10**6) -> ChoiceDistribution:
    """Power iteration from the uniform law until successive iterates are within ``tol`` in TV."""
    n = len(m.labels)
    x = np.full(n, 1.0 / n)
    mat = m.matrix
    for _ in range(max_iters):
        nxt = mat @ x
        nxt /= nxt.sum()
        if 0.5 * np.abs(nxt - x).sum() < tol:
            return ChoiceDistribution(m.labels, nxt)
        x = nxt
    raise ConvergenceError(f"power iteration did not converge in {max_iters} iterations")


@dataclass(frozen=True)
class ReversibilityReport:
    reversible: bool
    worst_pair: tuple | None
    residual: float

    def __bool__(self):
        return self.reversible


def check_reversibility(m: MarkovKernel, dist: ChoiceDistribution, tol: float = 1e-12) -> ReversibilityReport:
    """Detailed balance ``M(a|b) m(b) = M(b|a) m(a)`` for every pair."""
    if tuple(dist.labels) != m.labels:
        raise ValueError("distribution and kernel have different labels")
    flux = m.matrix * dist.as_array()[None, :]
    gap = np.abs(flux - flux.T)
    i, j = np.unravel_index(np.argmax(gap), gap.shape)
    worst = float(gap[i, j])
    pair = (m.labels[i], m.labels[j]) if len(m.labels) > 1 else None
    return ReversibilityReport(worst <= tol, pair, worst)


# ---------------------------------------------------------------------------
# the runner


@dataclass(frozen=True)
class Step:
    """One pass of the repeat loop.

    ``tau`` is the elapsed time when the comparison ended; for the final,
    abandoned comparison ``winner`` is ``None`` and ``tau`` is the first grid
    time past the deadline.
    """

    incumbent: Hashable
    proposal: Hashable
    tau: float
    winner: Hashable | None


@dataclass(frozen=True)
class RunTrace:
    steps: tuple
    choice: Hashable
    start: Hashable
    deadline: float

    @property
    def iterations(self) -> int:
        return len(self.steps)

    @property
    def elapsed(self) -> float:
        """Time spent in completed comparisons."""
        done = [s.tau for s in self.steps if s.winner is not None]
        return done[-1] if done else 0.0

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps({"n": i, "incumbent": s.incumbent, "proposal": s.proposal,
                                     "tau": s.tau, "winner": s.winner})
                         for i, s in enumerate(self.steps))


def _deadline_steps(deadline: float, dt: float) -> int:
    """Largest ``k`` with ``k * dt <= deadline`` (guarding against float noise)."""
    k = math.floor(deadline / dt)
    if (k + 1) * dt <= deadline:
        k += 1
    while k > 0 and k * dt > deadline:
        k -= 1
    return k


def _as_probs(mu, labels) -> np.ndarray:
    if isinstance(mu, ChoiceDistribution):
        mu = mu.as_dict()
    if mu is None:
        return np.full(len(labels), 1.0 / len(labels))
    p = np.array([float(mu[x]) for x in labels])
    if np.any(p < 0) or abs(p.sum() - 1) > 1e-9:
        raise ValueError("initial distribution must be a probability vector over the menu")
    return p


def run(spec: DdmSpec, q: MarkovKernel, mu, deadline: float, rng: np.random.Generator,
        dt: float = DEFAULT_DT) -> RunTrace:
    """One Metropolis-DDM episode over the menu of ``q``.

    Elapsed time is tracked in whole ``dt`` steps. The comparison that would
    end past the deadline is abandoned and the incumbent entering it is
    chosen; it is simulated only up to the deadline, which leaves the law of
    the choice unchanged.
    """
    if not deadline > 0:
        raise ValueError("deadline must be positive")
    labels = q.labels
    n = len(labels)
    start_cdf = np.cumsum(_as_probs(mu, labels))
    start_cdf[-1] = 1.0
    start = labels[int(np.searchsorted(start_cdf, rng.random(), side="right"))]
    if n == 1:
        return RunTrace((), start, start, float(deadline))
    cols = np.cumsum(q.matrix, axis=0)
    cols[-1, :] = 1.0
    idx = {x: i for i, x in enumerate(labels)}
    budget = _deadline_steps(deadline, dt)
    used = 0
    b = start
    steps = []
    while True:
        j = idx[b]
        i = int(np.searchsorted(cols[:, j], rng.random(), side="right"))
        if i == j:
            continue
        a = labels[i]
        remaining = budget - used
        hit, k = _walk(spec.zeta_of(a, b), spec.v[a] - spec.v[b], spec.beta, dt, rng,
                       remaining + 1)
        if hit == 0 or k > remaining:
            steps.append(Step(b, a, (budget + 1) * dt, None))
            break
        used += k
        winner = a if hit > 0 else b
        steps.append(Step(b, a, used * dt, winner))
        b = winner
    return RunTrace(tuple(steps), b, start, float(deadline))

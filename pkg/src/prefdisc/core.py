"""Softmax random choice processes and the odds/evidence calculus.

A softmax process assigns, for every deadline ``t`` and menu ``A``,

    p_t(a, A) = exp(u(a) / lam(t) + alpha(a)) / sum_b exp(u(b) / lam(t) + alpha(b))

with the zero deadline ``t = 0`` standing for "no deliberation" (only the
bias ``alpha`` matters). The zero point is handled as its own branch rather
than through ``lam = inf``.

Everything in this module works on finite universes whose labels are kept in
a fixed order; that order drives argmax tie enumeration and the ordering of
serialized relations.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import DegenerateOddsError, PrefdiscError, UnsupportedSizeError

Label = Hashable

#: Probabilities at or below this floor are treated as zero before taking logs.
PROB_FLOOR = 1e-300


def canonical_menu(universe: Sequence[Label], members: Iterable[Label]) -> tuple:
    """Return ``members`` as a tuple sorted by position in ``universe``.

    Raises ``ValueError`` on empty menus, duplicates, or unknown labels.
    """
    members = list(members)
    if not members:
        raise ValueError("menu must be nonempty")
    if len(set(members)) != len(members):
        raise ValueError(f"menu has duplicate members: {members!r}")
    index = {x: i for i, x in enumerate(universe)}
    missing = [m for m in members if m not in index]
    if missing:
        raise ValueError(f"labels not in universe: {missing!r}")
    return tuple(sorted(members, key=index.__getitem__))


def ordered_pairs(universe: Sequence[Label]) -> list[tuple]:
    """All ordered pairs of distinct labels, in universe order."""
    return [(a, b) for a in universe for b in universe if a != b]


def unordered_pairs(universe: Sequence[Label]) -> list[tuple]:
    """All unordered pairs as ``(a, b)`` with ``a`` before ``b`` in universe order."""
    return list(itertools.combinations(universe, 2))


@dataclass(frozen=True)
class ChoiceDistribution:
    """A probability distribution over a menu."""

    labels: tuple
    probs: tuple

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if len(self.labels) != len(self.probs):
            raise ValueError("labels and probs differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate labels in {self.labels!r}")
        if any(p < 0 or p > 1 for p in self.probs):
            raise ValueError(f"probabilities outside [0, 1]: {self.probs}")
        if abs(math.fsum(self.probs) - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {math.fsum(self.probs)!r}, not 1")

    def __getitem__(self, label):
        try:
            return self.probs[self.labels.index(label)]
        except ValueError:
            raise KeyError(label) from None

    def __len__(self):
        return len(self.labels)

    def as_array(self) -> np.ndarray:
        return np.array(self.probs)

    def as_dict(self) -> dict:
        return dict(zip(self.labels, self.probs))


@dataclass(frozen=True)
class TimeGrid:
    """Positive deadlines ``T``; the zero point is implicit.

    With ``ordered=False`` every "s > t" in the consistency axioms becomes
    "s != t".
    """

    deadlines: tuple
    ordered: bool = True

    def __post_init__(self):
        ds = tuple(float(t) for t in self.deadlines)
        if not ds:
            raise ValueError("time grid needs at least one deadline")
        if any(t <= 0 for t in ds):
            raise ValueError("deadlines must be positive")
        if len(set(ds)) != len(ds):
            raise ValueError("deadlines must be distinct")
        if self.ordered and any(b <= a for a, b in zip(ds, ds[1:])):
            raise ValueError("ordered deadlines must be strictly increasing")
        object.__setattr__(self, "deadlines", ds)

    @property
    def with_zero(self) -> tuple:
        return (0.0,) + self.deadlines

    def later_pairs(self) -> list[tuple]:
        """Pairs ``(t, s)`` to compare: ``s > t``, or ``s != t`` when unordered."""
        if self.ordered:
            return list(itertools.combinations(self.deadlines, 2))
        return [(t, s) for t in self.deadlines for s in self.deadlines if s != t]


@dataclass(frozen=True)
class SoftmaxParams:
    """Utility ``u``, bias ``alpha`` and noise ``lam`` of a softmax process.

    ``u`` and ``alpha`` map every universe label to a real; ``lam`` maps every
    positive deadline to a positive real. The universe order is the key
    order of ``u``.
    """

    u: Mapping
    alpha: Mapping
    lam: Mapping
    ordered: bool = True

    def __post_init__(self):
        u = {k: float(v) for k, v in self.u.items()}
        alpha = {k: float(v) for k, v in self.alpha.items()}
        lam = {float(t): float(v) for t, v in self.lam.items()}
        if len(u) < 2:
            raise UnsupportedSizeError("universe needs at least two alternatives")
        if set(alpha) != set(u):
            raise ValueError("u and alpha must share the same universe")
        if any(not v > 0 for v in lam.values()):
            raise ValueError("noise must be positive at every deadline")
        if self.ordered:
            lam = dict(sorted(lam.items()))
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "alpha", {k: alpha[k] for k in u})
        object.__setattr__(self, "lam", lam)

    @classmethod
    def from_arrays(cls, labels, u, alpha, deadlines, lam, ordered=True):
        return cls(dict(zip(labels, u)), dict(zip(labels, alpha)),
                   dict(zip(deadlines, lam)), ordered=ordered)

    @property
    def universe(self) -> tuple:
        return tuple(self.u)

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(tuple(self.lam), ordered=self.ordered)

    def utility_array(self, menu=None) -> np.ndarray:
        return np.array([self.u[x] for x in (menu or self.universe)])

    def bias_array(self, menu=None) -> np.ndarray:
        return np.array([self.alpha[x] for x in (menu or self.universe)])


def _noise(params: SoftmaxParams, t) -> float | None:
    """Noise at ``t``; ``None`` stands for the zero point."""
    t = float(t)
    if t == 0.0:
        return None
    try:
        return params.lam[t]
    except KeyError:
        raise ValueError(f"deadline {t!r} is not on the grid {tuple(params.lam)}") from None


def _stable_softmax(x: np.ndarray) -> np.ndarray:
    z = np.exp(x - x.max())
    return z / z.sum()


def softmax_dist(params: SoftmaxParams, t, menu: Iterable[Label]) -> ChoiceDistribution:
    """Full choice distribution of the softmax process at deadline ``t``."""
    menu = canonical_menu(params.universe, menu)
    lam = _noise(params, t)
    scores = params.bias_array(menu)
    if lam is not None:
        # centring keeps a constant utility from perturbing the bias scores
        u = params.utility_array(menu)
        scores = scores + (u - u.max()) / lam
    return ChoiceDistribution(menu, _stable_softmax(scores))


def softmax_prob(params: SoftmaxParams, t, menu: Iterable[Label], a: Label) -> float:
    """Probability ``p_t(a, menu)`` of a softmax process."""
    menu = canonical_menu(params.universe, menu)
    if a not in menu:
        raise ValueError(f"{a!r} is not in menu {menu!r}")
    return softmax_dist(params, t, menu)[a]


# ---------------------------------------------------------------------------
# odds and evidence


@dataclass(frozen=True)
class EvidenceStats:
    """Odds calculus for an ordered pair ``(a, b)`` at deadline ``t``."""

    a: Label
    b: Label
    t: float
    odds: float
    log_odds: float
    strength: float
    weight: float
    easiness: float


def _universe_of(p) -> tuple:
    return p.universe if isinstance(p, SoftmaxParams) else tuple(p.universe)


def log_odds(p, t, a: Label, b: Label) -> float:
    """Log-odds ``ln p_t(a, b) / p_t(b, a)``.

    ``p`` is either a :class:`SoftmaxParams` (evaluated in closed form) or a
    dataset exposing ``binary_prob(t, a, b)``.
    """
    if a == b:
        raise ValueError("log-odds need two distinct alternatives")
    if isinstance(p, SoftmaxParams):
        lam = _noise(p, t)
        ell = p.alpha[a] - p.alpha[b]
        if lam is not None:
            ell += (p.u[a] - p.u[b]) / lam
        return ell
    pab = p.binary_prob(t, a, b)
    pba = p.binary_prob(t, b, a)
    if pab <= PROB_FLOOR or pba <= PROB_FLOOR:
        raise DegenerateOddsError(
            f"degenerate odds at t={t!r} for ({a!r}, {b!r}): p={pab!r} vs {pba!r}")
    return math.log(pab) - math.log(pba)


def weight_of_evidence(p, t, a: Label, b: Label) -> float:
    """``w_t(a, b) = l_t(a, b) - l_0(a, b)``; exactly ``(u(a)-u(b))/lam(t)`` for softmax params."""
    if isinstance(p, SoftmaxParams):
        lam = _noise(p, t)
        return 0.0 if lam is None else (p.u[a] - p.u[b]) / lam
    return log_odds(p, t, a, b) - log_odds(p, 0.0, a, b)


def evidence_stats(p, t, a: Label, b: Label) -> EvidenceStats:
    """Odds, log-odds, strength and weight of evidence, and easiness for ``(a, b)``."""
    ell = log_odds(p, t, a, b)
    w = weight_of_evidence(p, t, a, b)
    if isinstance(p, SoftmaxParams):
        odds = math.exp(ell)
    else:
        odds = p.binary_prob(t, a, b) / p.binary_prob(t, b, a)
    return EvidenceStats(a, b, float(t), odds, ell, math.exp(w), w, abs(w))


def weight_matrix(p, t) -> np.ndarray:
    """Matrix ``W[i, j] = w_t(x_i, x_j)`` over the universe (zero diagonal)."""
    universe = _universe_of(p)
    n = len(universe)
    W = np.zeros((n, n))
    for i, j in itertools.combinations(range(n), 2):
        w = weight_of_evidence(p, t, universe[i], universe[j])
        W[i, j] = w
        W[j, i] = -w
    return W


# ---------------------------------------------------------------------------
# revealed relations and the duality map


@dataclass(frozen=True)
class RevealedRelations:
    """Preference, preference intensity and ease of comparison.

    ``pref`` holds ordered pairs ``(a, b)`` meaning a is preferred to b.
    ``intensity`` holds ``((a, b), (c, d))`` meaning the preference for a over
    b is stronger than that for c over d. ``ease`` holds ``((a, b), (c, d))``
    of unordered pairs (canonical universe order) meaning {a, b} is easier.
    """

    universe: tuple
    pref: frozenset = field(default_factory=frozenset)
    intensity: frozenset = field(default_factory=frozenset)
    ease: frozenset = field(default_factory=frozenset)

    def to_dict(self) -> dict:
        order = {x: i for i, x in enumerate(self.universe)}

        def key(item):
            flat = []
            for part in item:
                flat.extend(part if isinstance(part, tuple) else (part,))
            return [order[x] for x in flat]

        return {
            "pref": [list(x) for x in sorted(self.pref, key=key)],
            "intensity": [[list(x), list(y)] for x, y in sorted(self.intensity, key=key)],
            "ease": [[list(x), list(y)] for x, y in sorted(self.ease, key=key)],
        }


def _relations_from_weights(universe, W: np.ndarray) -> RevealedRelations:
    idx = {x: i for i, x in enumerate(universe)}
    opairs = ordered_pairs(universe)
    upairs = unordered_pairs(universe)
    pref = frozenset((a, b) for a, b in opairs if W[idx[a], idx[b]] > 0)
    intensity = frozenset(
        (x, y) for x in opairs for y in opairs
        if W[idx[x[0]], idx[x[1]]] > W[idx[y[0]], idx[y[1]]])
    ease = frozenset(
        (x, y) for x in upairs for y in upairs
        if abs(W[idx[x[0]], idx[x[1]]]) > abs(W[idx[y[0]], idx[y[1]]]))
    return RevealedRelations(tuple(universe), pref, intensity, ease)


def revealed_relations(p, t) -> RevealedRelations:
    """Relations revealed at deadline ``t`` from weights of evidence.

    Comparisons are exact: computed weights that differ in the last bit are
    not ties.
    """
    if float(t) == 0.0:
        raise ValueError("relations are revealed at positive deadlines only")
    return _relations_from_weights(_universe_of(p), weight_matrix(p, t))


def relations_from_utility(v: Mapping) -> RevealedRelations:
    """Psychometric preferences and preference intensity represented by ``v``."""
    universe = tuple(v)
    vals = np.array([v[x] for x in universe], dtype=float)
    return _relations_from_weights(universe, vals[:, None] - vals[None, :])


def duality_map(pref: frozenset, ease: frozenset, universe: Sequence[Label]) -> frozenset:
    """Preference intensity derived from psychometric preferences ``(pref, ease)``.

    ``(a, b)`` beats ``(c, d)`` when either both are weakly favourable and
    ``{a, b}`` is easier, or a > b while d > c, or both are weakly
    unfavourable and ``{c, d}`` is easier.
    """
    universe = tuple(universe)
    order = {x: i for i, x in enumerate(universe)}

    def upair(a, b):
        return (a, b) if order[a] < order[b] else (b, a)

    def easier(x, y):
        return (upair(*x), upair(*y)) in ease

    out = set()
    opairs = ordered_pairs(universe)
    for (a, b) in opairs:
        for (c, d) in opairs:
            weak_ab = (b, a) not in pref
            weak_cd = (d, c) not in pref
            weak_ba = (a, b) not in pref
            weak_dc = (c, d) not in pref
            if weak_ab and weak_cd and easier((a, b), (c, d)):
                out.add(((a, b), (c, d)))
            elif (a, b) in pref and (d, c) in pref:
                out.add(((a, b), (c, d)))
            elif weak_ba and weak_dc and easier((c, d), (a, b)):
                out.add(((a, b), (c, d)))
    return frozenset(out)


def duality_inverse(intensity: frozenset, universe: Sequence[Label]) -> tuple[frozenset, frozenset]:
    """Psychometric preferences ``(pref, ease)`` derived from a preference intensity.

    Needs at least three alternatives: with two, the "for all c" clause that
    defines preference is vacuous.
    """
    universe = tuple(universe)
    if len(universe) < 3:
        raise UnsupportedSizeError("duality inverse needs at least three alternatives")
    pref = frozenset(
        (a, b) for a, b in ordered_pairs(universe)
        if all(((a, c), (b, c)) in intensity for c in universe if c not in (a, b)))

    def hi_lo(a, b):
        return (b, a) if (b, a) in pref else (a, b)

    upairs = unordered_pairs(universe)
    ease = frozenset(
        (x, y) for x in upairs for y in upairs
        if (hi_lo(*x), hi_lo(*y)) in intensity)
    return pref, ease


# ---------------------------------------------------------------------------
# infinite deliberation


def limit_rule(params: SoftmaxParams, menu: Iterable[Label]) -> ChoiceDistribution:
    """Limit of ``p_t`` as noise vanishes: bias-weighted choice among the maximizers of ``u``."""
    menu = canonical_menu(params.universe, menu)
    u = params.utility_array(menu)
    winners = u == u.max()
    scores = np.where(winners, params.bias_array(menu), -np.inf)
    return ChoiceDistribution(menu, _stable_softmax(scores))


def stochastically_dominates(p_s: ChoiceDistribution, p_t: ChoiceDistribution,
                             u: Mapping, tol: float = 0.0) -> bool:
    """Whether ``p_s`` first-order dominates ``p_t`` in payoff ``u`` on a shared menu."""
    if p_s.labels != p_t.labels:
        raise PrefdiscError("distributions are over different menus")
    levels = sorted({u[x] for x in p_s.labels})
    ps, pt = p_s.as_array(), p_t.as_array()
    uu = np.array([u[x] for x in p_s.labels])
    for level in levels:
        above = uu > level
        if ps[above].sum() < pt[above].sum() - tol:
            return False
    return True

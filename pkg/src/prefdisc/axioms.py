"""Executable checks of the behavioral axioms on a :class:`ChoiceDataset`.

Every checker returns an :class:`AxiomReport`. A failing report carries
witnesses: tuples ``(t, s, alternatives, lhs, rhs)`` that, re-evaluated on
the dataset, reproduce the violated inequality.

Exact datasets are checked with tight absolute/relative bands (1e-9).
Empirical datasets use bands ``c / sqrt(n)`` with ``n`` the smallest cell
count (at least 1); the constants live in :data:`DEFAULT_BANDS`.
Quantities inside a band are ties and never produce violations.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Any, NamedTuple

import numpy as np

from .core import (SoftmaxParams, log_odds, ordered_pairs, stochastically_dominates,
                   unordered_pairs, weight_matrix)
from .dataset import ChoiceDataset

PASS, FAIL, NOT_APPLICABLE = "pass", "fail", "not-applicable"

#: Witnesses kept per report; the total count is recorded in ``details``.
MAX_WITNESSES = 100


@dataclass(frozen=True)
class Bands:
    """Tolerance settings.

    ``exact`` applies to exact datasets. The ``c_*`` constants scale the
    empirical bands as ``c / sqrt(n)``.
    """

    exact: float = 1e-9
    c_choice: float = 4.0
    c_weight: float = 3.0
    c_ratio: float = 5.0


DEFAULT_BANDS = Bands()


class Witness(NamedTuple):
    t: float
    s: float | None
    alternatives: tuple
    lhs: float
    rhs: float


@dataclass
class AxiomReport:
    axiom: str
    verdict: str
    witnesses: list = field(default_factory=list)
    tolerance: float | None = None
    notes: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["witnesses"] = [w._asdict() for w in self.witnesses]
        return out


def _band(d: ChoiceDataset, c: float, bands: Bands) -> float:
    if d.kind == "exact":
        return bands.exact
    return c / math.sqrt(max(1, d.min_cell_count))


def _finish(name, witnesses, tol, notes=None, details=None) -> AxiomReport:
    witnesses = sorted(witnesses, key=_witness_key)
    details = dict(details or {})
    details["violations"] = len(witnesses)
    return AxiomReport(name, FAIL if witnesses else PASS, witnesses[:MAX_WITNESSES], tol,
                       list(notes or []), details)


def _witness_key(w: Witness):
    return (w.t, -1.0 if w.s is None else w.s, repr(w.alternatives))


def _positive(d: ChoiceDataset) -> bool:
    return all(d.binary_prob(t, a, b) > 0
               for t in d.grid.with_zero for a, b in ordered_pairs(d.universe))


def _not_applicable(name, why) -> AxiomReport:
    return AxiomReport(name, NOT_APPLICABLE, notes=[why])


# ---------------------------------------------------------------------------


def check_positivity(d: ChoiceDataset) -> AxiomReport:
    """Every binary probability at every ``t`` in ``{0} U T`` is positive.

    Raises :class:`MissingDataError` if a binary table is absent.
    """
    witnesses, notes = [], []
    for t in d.grid.with_zero:
        for a, b in ordered_pairs(d.universe):
            p = d.binary_prob(t, a, b)
            if not p > 0:
                witnesses.append(Witness(t, None, (a, b), p, 0.0))
            if d.kind == "empirical":
                n = d.sample_size(t, (a, b))
                if p < 1 / (2 * n):
                    notes.append(f"small sample: p_{t:g}({a!r}, {b!r}) = {p:g} with n = {n}")
    return _finish("Positivity", witnesses, 0.0, notes)


def check_choice_axiom(d: ChoiceDataset, tol: float | None = None,
                       bands: Bands = DEFAULT_BANDS) -> AxiomReport:
    """Binary odds are independent of the menu (product form, safe with zeros).

    Checks ``|p_t(a,b) p_t(b,A) - p_t(b,a) p_t(a,A)| <= tol * max(terms)``.
    """
    tol = _band(d, bands.c_choice, bands) if tol is None else tol
    large = [(t, m) for (t, m) in d.tables if len(m) > 2]
    if not large:
        return _finish("Choice Axiom", [], tol, ["vacuous: no menu with more than two members"])
    witnesses = []
    for t, menu in sorted(large, key=lambda k: (k[0], len(k[1]), repr(k[1]))):
        dist = d.tables[(t, menu)]
        for a, b in itertools.combinations(menu, 2):
            lhs = d.binary_prob(t, a, b) * dist[b]
            rhs = d.binary_prob(t, b, a) * dist[a]
            if abs(lhs - rhs) > tol * max(lhs, rhs):
                witnesses.append(Witness(t, None, (a, b, menu), lhs, rhs))
    return _finish("Choice Axiom", witnesses, tol)


def fit_luce(d: ChoiceDataset, t, ref=None) -> dict:
    """Luce values at ``t`` normalized so that ``v(ref) = 0``.

    ``v(x) = ln p_t(x, ref) / p_t(ref, x)``; ``ref`` defaults to the first
    label of the universe.
    """
    ref = d.universe[0] if ref is None else ref
    return {x: 0.0 if x == ref else log_odds(d, t, x, ref) for x in d.universe}


def luce_residual(d: ChoiceDataset, t, v: dict) -> float:
    """Largest relative error when ``v`` reproduces every table at ``t``."""
    worst = 0.0
    for menu in d.menus(t):
        x = np.array([v[a] for a in menu])
        z = np.exp(x - x.max())
        fitted = z / z.sum()
        obs = d.tables[(float(t), menu)].as_array()
        worst = max(worst, float(np.max(np.abs(fitted - obs) / np.maximum(obs, 1e-300))))
    return worst


def _weights(d: ChoiceDataset) -> dict:
    return {t: weight_matrix(d, t) for t in d.deadlines}


def check_consistency(d: ChoiceDataset, tol: float | None = None,
                      bands: Bands = DEFAULT_BANDS) -> list[AxiomReport]:
    """Intensity, Preference and Ease Consistency across deadlines."""
    names = ("Intensity Consistency", "Preference Consistency", "Ease Consistency")
    if len(d.deadlines) < 2:
        return [_not_applicable(n, "needs at least two positive deadlines") for n in names]
    if not _positive(d):
        return [_not_applicable(n, "Positivity fails") for n in names]
    eps = _band(d, bands.c_weight, bands) if tol is None else tol
    W = _weights(d)
    idx = {x: i for i, x in enumerate(d.universe)}
    opairs = ordered_pairs(d.universe)
    upairs = unordered_pairs(d.universe)
    oi = np.array([[idx[a], idx[b]] for a, b in opairs])
    ui = np.array([[idx[a], idx[b]] for a, b in upairs])

    def wvec(t):
        return W[t][oi[:, 0], oi[:, 1]]

    def evec(t):
        return np.abs(W[t][ui[:, 0], ui[:, 1]])

    def banded_sign(x):
        return np.where(np.abs(x) <= eps, 0, np.sign(x))

    intensity, preference, ease = [], [], []
    for t, s in d.grid.later_pairs():
        wt, ws = wvec(t), wvec(s)
        dt_ = wt[:, None] - wt[None, :]
        ds_ = ws[:, None] - ws[None, :]
        bad = banded_sign(dt_) * banded_sign(ds_) < 0
        for i, j in zip(*np.nonzero(bad)):
            intensity.append(Witness(t, s, (opairs[i], opairs[j]), float(dt_[i, j]),
                                     float(ds_[i, j])))
        for i in np.nonzero((wt > eps) & ~(ws > -eps))[0]:
            preference.append(Witness(t, s, opairs[i], float(wt[i]), float(ws[i])))
        et, es = evec(t), evec(s)
        bad = (es[:, None] > es[None, :] + eps) & ~(et[:, None] > et[None, :] - eps)
        for i, j in zip(*np.nonzero(bad)):
            ease.append(Witness(t, s, (upairs[i], upairs[j]),
                                float(et[i] - et[j]), float(es[i] - es[j])))
    return [_finish(names[0], intensity, eps), _finish(names[1], preference, eps),
            _finish(names[2], ease, eps)]


def check_decreasing_error_rate(d: ChoiceDataset, fit: SoftmaxParams | None = None,
                                tol: float | None = None,
                                bands: Bands = DEFAULT_BANDS) -> AxiomReport:
    """Once deliberation favours a over b, longer deadlines never lower ``p(a, b)``.

    With ``fit`` the report also records whether the fitted noise is
    decreasing and whether payoff stochastic dominance holds on every menu
    present at both deadlines; for softmax data all three criteria agree.
    """
    name = "Decreasing Error Rate"
    if not d.grid.ordered:
        return _not_applicable(name, "needs an ordered time grid")
    eps = _band(d, bands.c_weight, bands) if tol is None else tol
    witnesses = []
    for t, s in d.grid.later_pairs():
        for a, b in ordered_pairs(d.universe):
            p0, pt, ps = (d.binary_prob(x, a, b) for x in (0.0, t, s))
            if pt > p0 + eps and ps < pt - eps:
                witnesses.append(Witness(t, s, (a, b), pt, ps))
    details = {}
    if fit is not None:
        lam = [fit.lam[t] for t in d.deadlines]
        lam_dec = all(y <= x for x, y in zip(lam, lam[1:]))
        dominance = True
        for t, s in d.grid.later_pairs():
            for menu in d.menus(t):
                if len(menu) > 1 and d.has_table(s, menu):
                    if not stochastically_dominates(d.table(s, menu), d.table(t, menu),
                                                    fit.u, tol=eps):
                        dominance = False
        details = {"decreasing_error_rate": not witnesses, "lambda_decreasing": lam_dec,
                   "payoff_dominance": dominance,
                   "criteria_agree": (not witnesses) == lam_dec == dominance}
    return _finish(name, witnesses, eps, details=details)


def _ratio_class(num: float, den: float, zero: float):
    """``None`` for 0/0, +-inf for x/0, else the quotient."""
    if abs(den) <= zero:
        return None if abs(num) <= zero else math.copysign(math.inf, num)
    return num / den


def _ratios_equal(r1, r2, rel: float) -> bool:
    if r1 is None or r2 is None:
        return r1 is None and r2 is None
    if math.isinf(r1) or math.isinf(r2):
        return r1 == r2
    return abs(r1 - r2) <= rel * max(abs(r1), abs(r2))


def check_relative_invariance(d: ChoiceDataset, tol: float | None = None,
                              bands: Bands = DEFAULT_BANDS) -> list[AxiomReport]:
    """Constant Relative Ease of Comparison, Constant Relative Weight of
    Evidence and Log-odds Ratio Invariance.

    A ratio pair is tested whenever either side is well defined (not 0/0);
    ``x/0`` is an infinity carrying the sign of ``x``, and equal infinities
    match.
    """
    names = ("Constant Relative Ease of Comparison", "Constant Relative Weight of Evidence",
             "Log-odds Ratio Invariance")
    if len(d.deadlines) < 2:
        return [_not_applicable(n, "needs at least two positive deadlines") for n in names]
    if not _positive(d):
        return [_not_applicable(n, "Positivity fails") for n in names]
    rel = _band(d, bands.c_ratio, bands) if tol is None else tol
    zero = _band(d, bands.c_weight, bands)
    W = _weights(d)
    idx = {x: i for i, x in enumerate(d.universe)}

    def w(t, a, b):
        return W[t][idx[a], idx[b]]

    found = ([], [], [])
    tested = [0, 0, 0]
    upairs = unordered_pairs(d.universe)
    opairs = ordered_pairs(d.universe)
    triples = [(a, b, c) for a in d.universe for b in d.universe for c in d.universe
               if len({a, b, c}) == 3]
    for t, s in d.grid.later_pairs():
        cases = (
            (0, [(x, y) for x in upairs for y in upairs if x != y],
             lambda u, x, y: (abs(w(u, *x)), abs(w(u, *y)))),
            (1, [(x, y) for x in opairs for y in opairs if x != y],
             lambda u, x, y: (w(u, *x), w(u, *y))),
            (2, [((a, c), (b, c)) for a, b, c in triples],
             lambda u, x, y: (w(u, *x), w(u, *y))),
        )
        for k, items, quantities in cases:
            for x, y in items:
                rt = _ratio_class(*quantities(t, x, y), zero)
                rs = _ratio_class(*quantities(s, x, y), zero)
                if rt is None and rs is None:
                    continue
                tested[k] += 1
                if not _ratios_equal(rt, rs, rel):
                    found[k].append(Witness(t, s, (x, y),
                                            float("nan") if rt is None else rt,
                                            float("nan") if rs is None else rs))
    reports = []
    for k, name in enumerate(names):
        notes = [] if tested[k] else ["vacuous: no well-defined ratio"]
        reports.append(_finish(name, found[k], rel, notes, {"tested": tested[k]}))
    return reports


def audit(d: ChoiceDataset, fit: SoftmaxParams | None = None,
          bands: Bands = DEFAULT_BANDS) -> list[AxiomReport]:
    """Run every checker; Positivity must be checkable (binary tables present)."""
    reports = [check_positivity(d), check_choice_axiom(d, bands=bands)]
    reports += check_consistency(d, bands=bands)
    reports.append(check_decreasing_error_rate(d, fit=fit, bands=bands))
    reports += check_relative_invariance(d, bands=bands)
    return reports

"""End-to-end acceptance checks, one test per criterion.

Each test records a single PASS/FAIL line, printed in the terminal summary.
The Monte Carlo criteria are slow (AC1 and AC2 take a few minutes together).
"""

import itertools
import math
import time

import numpy as np
import pytest

from prefdisc.axioms import (FAIL, NOT_APPLICABLE, PASS, audit, check_choice_axiom,
                             check_consistency, check_decreasing_error_rate, check_positivity,
                             check_relative_invariance)
from prefdisc.chain import (build_exploration, check_reversibility, incumbent_matrix,
                            stationary, stationary_oracle)
from prefdisc.core import (SoftmaxParams, TimeGrid, limit_rule, softmax_dist,
                           stochastically_dominates, weight_of_evidence)
from prefdisc.dataset import all_menus, dataset_from_dict, from_luce, from_softmax, sample_dataset
from prefdisc.ddm import (DdmSpec, acceptance_prob, gibbs_posterior, gibbs_prior_binary,
                          is_transitive, prior_from_transitive_zeta, sample_comparisons,
                          zeta_from_global_prior, zeta_from_prior_binary)
from prefdisc.experiments import PipelineConfig, pipeline, preset, simulate
from prefdisc.identify import identify, params_equivalent, reconstruction_residual


def tv(p, q):
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def random_softmax(rng, n=None, k=None):
    n = n or int(rng.integers(2, 7))
    k = k or int(rng.integers(1, 5))
    lam = np.sort(rng.uniform(0.2, 4, k))[::-1]
    return SoftmaxParams.from_arrays(range(n), rng.uniform(-3, 3, n), rng.uniform(-3, 3, n),
                                     range(1, k + 1), lam)


def random_prior(rng, n):
    p = rng.dirichlet(np.ones(n)) + 0.01
    return p / p.sum()


def transitive_spec(rng, n):
    labels = list(range(n))
    return zeta_from_global_prior(dict(zip(labels, rng.uniform(-2, 2, n))), rng.uniform(0.3, 2),
                                  dict(zip(labels, random_prior(rng, n))))


def arbitrary_spec(rng, n):
    beta = rng.uniform(0.3, 2)
    zeta = {(a, b): rng.uniform(-0.9, 0.9) * beta for a in range(n) for b in range(a + 1, n)}
    return DdmSpec(dict(zip(range(n), rng.uniform(-2, 2, n))), beta, zeta)


def path(n):
    return [(i, i + 1) for i in range(n - 1)]


@pytest.mark.slow
def test_ac1_simulation_reproduction(criterion):
    parts, ok = [], True
    for sim_id in (1, 2, 3, 4):
        start = time.perf_counter()
        run = simulate(preset(sim_id))
        elapsed = time.perf_counter() - start
        control = simulate(preset(sim_id, mode="control"))
        good = run.tv <= 0.05 and run.tv <= control.tv + 0.02 and elapsed <= 60
        ok &= good
        parts.append(f"sim{sim_id} tv={run.tv:.4f} control={control.tv:.4f} "
                     f"{elapsed:.1f}s {'ok' if good else 'over'}")
    criterion(1, "simulation reproduction", ok, "; ".join(parts))


@pytest.mark.slow
def test_ac2_ddm_oracle(criterion):
    n = 10**5
    worst_z, worst_rt = 0.0, 0.0
    for i, (delta, zeta, beta) in enumerate(itertools.product((-2, 0, 2), (-0.4, 0, 0.4),
                                                              (0.849, 1.442))):
        spec = DdmSpec({"a": float(delta), "b": 0.0}, beta, {("a", "b"): zeta})
        wins, rts = sample_comparisons(spec, "a", "b", n, np.random.default_rng(i))
        p = acceptance_prob(spec, "a", "b")
        worst_z = max(worst_z, abs(wins.mean() - p) / math.sqrt(p * (1 - p) / n))
        if delta == 0 and zeta == 0:
            worst_rt = max(worst_rt, abs(rts.mean() / (beta**2 / 2) - 1))
    ok = worst_z <= 3 and worst_rt <= 0.05
    criterion(2, "DDM closed-form oracle", ok,
              f"18 cells, max |z| = {worst_z:.2f}; zero-drift mean RT rel. error {worst_rt:.4f}")


def test_ac3_stationary_law(criterion):
    rng = np.random.default_rng(30)
    worst_tv, worst_q, disagreements = 0.0, 0.0, 0
    for _ in range(100):
        n = int(rng.integers(3, 9))
        spec = transitive_spec(rng, n)
        target = stationary(spec).as_array()
        found = []
        for q in (build_exploration(range(n)),
                  build_exploration(range(n), path(n), rho=rng.uniform(0.5, 3))):
            found.append(stationary_oracle(incumbent_matrix(q, spec)).as_array())
            worst_tv = max(worst_tv, tv(found[-1], target))
        worst_q = max(worst_q, tv(*found))
    for i in range(100):
        n = int(rng.integers(3, 9))
        spec = transitive_spec(rng, n) if i % 2 else arbitrary_spec(rng, n)
        m = incumbent_matrix(build_exploration(range(n)), spec)
        rev = bool(check_reversibility(m, stationary_oracle(m), tol=1e-10))
        disagreements += rev != bool(is_transitive(spec))
    ok = worst_tv < 1e-10 and worst_q < 1e-10 and disagreements == 0
    criterion(3, "stationary distribution", ok,
              f"max TV to closed form {worst_tv:.1e}, across Q {worst_q:.1e}; "
              f"reversibility/transitivity disagreements {disagreements}/100")


def test_ac4_gibbs_bijection(criterion):
    rng = np.random.default_rng(40)
    binary = glob = 0.0
    for _ in range(500):
        beta = rng.uniform(0.1, 3)
        delta, zeta = rng.uniform(-3, 3), rng.uniform(-0.99, 0.99) * beta
        spec = DdmSpec({"a": delta, "b": 0.0}, beta, {("a", "b"): zeta})
        pi = gibbs_prior_binary(spec, "a", "b")
        binary = max(binary, abs(zeta_from_prior_binary(delta, 0.0, beta, pi) - zeta))
        back = gibbs_prior_binary(
            DdmSpec({"a": delta, "b": 0.0}, beta,
                    {("a", "b"): zeta_from_prior_binary(delta, 0.0, beta, pi)}), "a", "b")
        binary = max(binary, abs(back - pi))
    for _ in range(100):
        n = int(rng.integers(2, 8))
        pi = random_prior(rng, n)
        spec = zeta_from_global_prior(dict(zip(range(n), rng.uniform(-2, 2, n))),
                                      rng.uniform(0.2, 3), dict(zip(range(n), pi)))
        glob = max(glob, float(np.max(np.abs(np.array(prior_from_transitive_zeta(spec).probs) - pi))))
    monotone = bound = True
    for beta in (0.3, 0.849, 1.442, 3.0):
        for delta in np.linspace(-4, 4, 41):
            for frac in np.arange(-95, 96, 5) / 100:
                spec = DdmSpec({"a": delta, "b": 0.0}, beta, {("a", "b"): frac * beta})
                p_acc = acceptance_prob(spec, "a", "b")
                pi = gibbs_prior_binary(spec, "a", "b")
                monotone &= (frac >= 0) == (pi >= 0.5)
                bound &= abs(p_acc - pi) <= beta / 4 * abs(delta) + 1e-14
    xi = np.arange(1, 10**6) * 1e-6
    variational = 0.0
    for _ in range(5):
        va, vb = rng.uniform(-2, 2, 2)
        beta, pi = rng.uniform(0.3, 3), rng.uniform(0.05, 0.95)
        rel = xi * np.log(xi / pi) + (1 - xi) * np.log((1 - xi) / (1 - pi))
        gain = va * xi + vb * (1 - xi) - (va * pi + vb * (1 - pi))
        best = xi[np.argmax(gain - rel / beta)]
        variational = max(variational, abs(best - gibbs_posterior(va, vb, beta, pi)))
    ok = binary < 1e-10 and glob < 1e-10 and monotone and bound and variational < 2e-6
    criterion(4, "Gibbs bijection", ok,
              f"binary roundtrip {binary:.1e}, global {glob:.1e}, monotone={monotone}, "
              f"bound={bound}, variational gap {variational:.1e}")


def test_ac5_identification(criterion):
    rng = np.random.default_rng(50)
    worst, anchors_ok = 0.0, True
    for _ in range(200):
        p = random_softmax(rng)
        d = from_softmax(p)
        base = identify(d)
        worst = max(worst, reconstruction_residual(base.params, d))
        anchors_ok &= params_equivalent(p, base.params).equivalent
        valid = [(a, b, t) for t in d.deadlines for a, b in itertools.permutations(d.universe, 2)
                 if weight_of_evidence(d, t, a, b) > 1e-3]
        if valid:
            other = identify(d, anchor=valid[int(rng.integers(len(valid)))]).params
            anchors_ok &= params_equivalent(base.params, other, tol=1e-8).equivalent
    cross = 0.0
    for _ in range(20):
        n = int(rng.integers(3, 6))
        labels = [f"x{i}" for i in range(n)]
        v = dict(zip(labels, rng.uniform(-3, 3, n)))
        prior = dict(zip(labels, random_prior(rng, n)))
        beta = {float(t): b for t, b in enumerate(np.sort(rng.uniform(0.3, 3, 3)), start=1)}
        rep = pipeline(PipelineConfig(v, prior, beta))
        cross = max(cross, rep.cross.residual if rep.passed else math.inf)
    ok = worst < 1e-9 and anchors_ok and cross < 1e-9
    criterion(5, "identification", ok,
              f"200 instances, reconstruction {worst:.1e}, anchor invariant={anchors_ok}; "
              f"pipeline residual {cross:.1e}")


def _luce(values, deadlines):
    grid = TimeGrid(tuple(deadlines))
    return from_luce({t: dict(enumerate(v)) for t, v in values.items()}, grid)


def _replays(name, d, r):
    """Recompute every witness of ``r`` from ``d`` and confirm the violation."""

    def w(t, a, b):
        return weight_of_evidence(d, t, a, b)

    eps = r.tolerance
    for wit in r.witnesses:
        t, s, alts = wit.t, wit.s, wit.alternatives
        if name == "Positivity":
            lhs, rhs = d.binary_prob(t, *alts), 0.0
            bad = lhs <= 0
        elif name == "Choice Axiom":
            a, b, menu = alts
            lhs = d.binary_prob(t, a, b) * d.table(t, menu)[b]
            rhs = d.binary_prob(t, b, a) * d.table(t, menu)[a]
            bad = abs(lhs - rhs) > eps * max(lhs, rhs)
        elif name == "Intensity Consistency":
            x, y = alts
            lhs, rhs = w(t, *x) - w(t, *y), w(s, *x) - w(s, *y)
            bad = abs(lhs) > eps and abs(rhs) > eps and lhs * rhs < 0
        elif name == "Preference Consistency":
            lhs, rhs = w(t, *alts), w(s, *alts)
            bad = lhs > eps and rhs <= -eps
        elif name == "Ease Consistency":
            x, y = alts
            lhs = abs(w(t, *x)) - abs(w(t, *y))
            rhs = abs(w(s, *x)) - abs(w(s, *y))
            bad = rhs > eps and lhs <= -eps
        elif name == "Decreasing Error Rate":
            lhs, rhs = d.binary_prob(t, *alts), d.binary_prob(s, *alts)
            bad = lhs > d.binary_prob(0, *alts) + eps and rhs < lhs - eps
        else:
            x, y = alts
            f = abs if name.startswith("Constant Relative Ease") else (lambda z: z)
            lhs = f(w(t, *x)) / f(w(t, *y))
            rhs = f(w(s, *x)) / f(w(s, *y))
            bad = abs(lhs - rhs) > eps * max(abs(lhs), abs(rhs))
        if not (bad and lhs == pytest.approx(wit.lhs) and rhs == pytest.approx(wit.rhs)):
            return False
    return True


def test_ac6_axiom_suite(criterion):
    rng = np.random.default_rng(60)
    sound = True
    for _ in range(50):
        p = random_softmax(rng)
        sound &= all(r.verdict in (PASS, NOT_APPLICABLE) for r in audit(from_softmax(p), fit=p))

    zero = dataset_from_dict({"universe": ["a", "b"], "deadlines": [1], "tables": [
        {"t": 0, "menu": ["a", "b"], "probs": {"a": 0.5, "b": 0.5}},
        {"t": 1, "menu": ["a", "b"], "probs": {"a": 1.0, "b": 0.0}}]})
    tables = [{"t": t, "menu": m, "probs": dict.fromkeys(m, 0.5)}
              for t in (0, 1) for m in (["a", "b"], ["a", "c"], ["b", "c"])]
    tables.append({"t": 1, "menu": ["a", "b", "c"], "probs": {"a": 0.6, "b": 0.2, "c": 0.2}})
    menu_effect = dataset_from_dict({"universe": ["a", "b", "c"], "deadlines": [1],
                                     "tables": tables})
    flip = _luce({0: [0, 0, 0], 1: [0, 1, 3], 2: [0, 3, 4]}, (1, 2))
    reversal = _luce({0: [0, 0, 0], 1: [0, 1, 2], 2: [0, -1, 2]}, (1, 2))
    rising = from_softmax(SoftmaxParams({"a": 0, "b": 1}, {"a": 0, "b": 0}, {1: 1.0, 2: 2.0}))
    u = np.array([0.0, 1.0, 2.0])
    curved = _luce({0: [0, 0, 0], 1: list(u + u**2), 2: list(2 * u + 4 * u**2)}, (1, 2))
    failing = [(zero, [check_positivity(zero)]),
               (menu_effect, [check_choice_axiom(menu_effect)]),
               (flip, check_consistency(flip)),
               (reversal, check_consistency(reversal)),
               (rising, [check_decreasing_error_rate(rising)]),
               (curved, check_relative_invariance(curved))]
    caught = {}
    for d, reports in failing:
        for r in reports:
            if r.verdict == FAIL:
                caught[r.axiom] = caught.get(r.axiom, True) and _replays(r.axiom, d, r)
    expected = {"Positivity", "Choice Axiom", "Intensity Consistency", "Preference Consistency",
                "Ease Consistency", "Decreasing Error Rate",
                "Constant Relative Ease of Comparison", "Constant Relative Weight of Evidence",
                "Log-odds Ratio Invariance"}
    replayable = set(caught) == expected and all(caught.values())

    agree = checked = 0
    for _ in range(40):
        n, k = int(rng.integers(3, 6)), int(rng.integers(2, 4))
        base = rng.uniform(-2, 2, n)
        v0 = rng.uniform(-1, 1, n)
        vals = {0: list(v0)}
        for t in range(1, k + 1):
            bend = rng.uniform(0.1, 1) if rng.random() < 0.5 else 0.0
            vals[t] = list(v0 + t * base + bend * base**3)
        d = _luce(vals, range(1, k + 1))
        gate = {r.axiom: r.verdict for r in audit(d)}
        if PASS != gate["Positivity"] or PASS != gate["Choice Axiom"] \
                or PASS != gate["Preference Consistency"]:
            continue
        checked += 1
        ease, _, lori = check_relative_invariance(d)
        agree += ease.verdict == lori.verdict
    ok = sound and replayable and checked > 0 and agree == checked
    criterion(6, "axiom suite", ok,
              f"softmax sound={sound}; failing cases caught and replayed for "
              f"{sum(caught.values())}/{len(expected)} checkers; ratio-axiom agreement "
              f"{agree}/{checked}")


def test_ac7_limit_behavior(criterion):
    rng = np.random.default_rng(70)
    worst = 0.0
    for _ in range(50):
        u = rng.choice(np.arange(0, 2.0, 0.1), size=5)
        p = SoftmaxParams.from_arrays(range(5), u, rng.normal(size=5), [1], [1e-3])
        for menu in all_menus(range(5)):
            gap = np.diff(np.unique(u[list(menu)]))
            if gap.size and gap.min() < 0.1 - 1e-12:
                continue
            worst = max(worst, float(np.abs(softmax_dist(p, 1, menu).as_array()
                                            - limit_rule(p, menu).as_array()).max()))
    dominance = True
    for _ in range(30):
        p = random_softmax(rng, n=int(rng.integers(2, 6)), k=3)
        for menu in all_menus(p.universe):
            for t, s in p.grid.later_pairs():
                dominance &= stochastically_dominates(softmax_dist(p, s, menu),
                                                      softmax_dist(p, t, menu), p.u, tol=1e-12)
    ok = worst < 1e-6 and dominance
    criterion(7, "limit behavior", ok,
              f"max deviation at lambda=1e-3: {worst:.1e}; dominance={dominance}")


def test_ac8_determinism(criterion):
    cfg = preset(3, replications=400, seed=17)
    reports = [simulate(cfg, workers=w).to_json() for w in (1, 1, 4)]
    sims = len(set(reports)) == 1
    spec = DdmSpec({"a": 0.3, "b": 0.0}, 1.0, {("a", "b"): 0.2})
    draws = [sample_comparisons(spec, "a", "b", 1000, np.random.default_rng(5)) for _ in range(2)]
    ddm = all(np.array_equal(x, y) for x, y in zip(*draws))
    base = from_softmax(random_softmax(np.random.default_rng(8), n=3, k=2))
    samples = [sample_dataset(base, 500, np.random.default_rng(9)) for _ in range(2)]
    data = samples[0] == samples[1]
    ok = sims and ddm and data
    criterion(8, "determinism", ok,
              f"simulation identical across runs and 1/4 workers={sims}; "
              f"comparisons={ddm}; sampled datasets={data}")

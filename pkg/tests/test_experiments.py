import csv
import io
import json
import math

import numpy as np
import pytest

from prefdisc import experiments
from prefdisc.core import ChoiceDistribution, TimeGrid
from prefdisc.dataset import from_luce
from prefdisc.experiments import (CALIBRATED_V_RANGE, PRESET_V_SHIFT, PipelineConfig, PipelineError,
                                  SimulationConfig, pipeline, preset, reproduce, simulate)


def softmax(x):
    z = np.exp(np.asarray(x, dtype=float) - np.max(x))
    return z / z.sum()


class TestConfig:
    def test_presets(self):
        for sim_id, (rule, beta, t) in {1: ("linear", 0.849, 4), 2: ("vee", 0.849, 4),
                                        3: ("linear", 1.442, 12), 4: ("vee", 1.442, 12)}.items():
            cfg = preset(sim_id)
            assert (cfg.v, cfg.beta, cfg.deadline) == (rule, beta, t)
            assert cfg.n == 8 and cfg.replications == 10_000 and cfg.zeta == "zero"
            shifted = np.array(list(cfg.values().values())) + PRESET_V_SHIFT
            assert shifted.min() >= CALIBRATED_V_RANGE[0] and shifted.max() <= CALIBRATED_V_RANGE[1]

    def test_value_rules(self):
        assert preset(1).values() == {a: a - 3.5 for a in range(8)}
        assert preset(2).values() == {a: abs(a - 3.5) for a in range(8)}

    def test_unknown_preset(self):
        with pytest.raises(ValueError):
            preset(5)

    @pytest.mark.parametrize("bad", [dict(replications=0), dict(deadline=0.0), dict(mode="x"),
                                     dict(v="cubic"), dict(v={0: 0.0, 1: 100.0}, n=2, v_range=(0, 1)),
                                     dict(v={0: 0.0}, n=2)])
    def test_invalid(self, bad):
        with pytest.raises(ValueError):
            SimulationConfig(**bad)

    def test_dict_roundtrip(self):
        cfg = preset(2, zeta={str(a): (a + 1) / 36 for a in range(8)}, topology=[(0, 1), (1, 2)],
                     rho=2.0, n=3, v_range=None)
        doc = json.loads(json.dumps(cfg.to_dict()))
        assert SimulationConfig.from_dict(doc) == cfg
        with pytest.raises(ValueError):
            SimulationConfig.from_dict({**doc, "colour": "red"})


class TestTargets:
    def test_sim3_target(self):
        target = preset(3).spec()
        from prefdisc.chain import stationary
        got = stationary(target).as_array()
        assert got == pytest.approx(softmax(1.442 * (np.arange(8) - 3.5)), abs=1e-14)

    def test_sharpening(self):
        from prefdisc.chain import stationary
        t1 = stationary(preset(1).spec()).as_array()
        t3 = stationary(preset(3).spec()).as_array()
        assert t3[7] > t1[7]

    def test_vee_symmetry(self):
        from prefdisc.chain import stationary
        for sim_id in (2, 4):
            t = stationary(preset(sim_id).spec()).as_array()
            for a in range(4):
                assert t[a] == t[7 - a]


class TestSimulate:
    def test_single_replication(self):
        r = simulate(preset(1, replications=1))
        b = int(np.argmax(r.counts))
        assert sum(r.counts) == 1 and r.empirical.probs[b] == 1.0
        assert r.tv == pytest.approx(1 - r.target.probs[b], abs=1e-15)

    def test_deterministic(self):
        cfg = preset(1, replications=200, seed=3)
        assert simulate(cfg).to_json() == simulate(cfg).to_json()

    def test_seed_matters(self):
        a = simulate(preset(1, replications=200, seed=3))
        b = simulate(preset(1, replications=200, seed=4))
        assert a.counts != b.counts

    def test_workers(self):
        cfg = preset(2, replications=300, seed=11)
        one = simulate(cfg, workers=1)
        three = simulate(cfg, workers=3)
        assert one.to_json() == three.to_json()

    def test_chi2_and_counts(self):
        r = simulate(preset(3, replications=500, seed=1))
        n = 500
        expected = n * r.target.as_array()
        assert sum(r.counts) == n
        assert r.chi2 == pytest.approx(float(np.sum((np.array(r.counts) - expected) ** 2 / expected)))
        assert 0 <= r.tv <= 1
        assert r.mean_iterations >= 1 and r.mean_rt > 0

    def test_control_noise(self):
        r = simulate(preset(1, mode="control"))
        assert r.tv < 0.03 and r.mean_iterations is None

    def test_sim2_pairs(self):
        r = reproduce(2)
        emp = r.empirical.as_array()
        n = r.config.replications
        for a in range(4):
            b = 7 - a
            se = math.sqrt((emp[a] + emp[b] - (emp[a] - emp[b]) ** 2) / n)
            assert abs(emp[a] - emp[b]) <= 3 * se

    def test_prior_bias_config(self):
        prior = {a: w for a, w in zip(range(3), (0.6, 0.3, 0.1))}
        cfg = SimulationConfig(n=3, v={0: 0.0, 1: 0.5, 2: 1.0}, beta=1.0, zeta=prior,
                               deadline=1.0, replications=50)
        r = simulate(cfg)
        want = softmax(np.log(list(prior.values())) + np.array([0, 0.5, 1.0]))
        assert r.target.as_array() == pytest.approx(want, abs=1e-12)

    def test_runaway_names_replication(self, monkeypatch):
        from prefdisc.errors import RunawayError

        def boom(*args, **kwargs):
            raise RunawayError("stuck")
        monkeypatch.setattr(experiments, "run", boom)
        with pytest.raises(RunawayError, match="replication 0"):
            simulate(preset(1, replications=3))

    def test_outputs(self):
        r = simulate(preset(4, replications=100))
        doc = json.loads(r.to_json())
        assert doc["seed"] == 0 and doc["config"]["beta"] == 1.442
        assert sum(doc["counts"]) == 100
        rows = list(csv.DictReader(io.StringIO(r.to_csv())))
        assert [int(row["alternative"]) for row in rows] == list(range(8))
        assert sum(int(row["count"]) for row in rows) == 100
        assert float(rows[7]["target"]) == r.target.probs[7]


class TestPipeline:
    beta = {1.0: 0.5, 2.0: 1.0, 3.0: 2.0}

    def test_uniform_prior(self):
        v = {"a": 0.0, "b": 1.0, "c": 2.0, "d": 3.0}
        rep = pipeline(PipelineConfig(v, dict.fromkeys(v, 0.25), self.beta))
        assert rep.passed
        u = rep.identified.params.u
        k, h = rep.cross.k, rep.cross.h
        assert max(abs(v[x] - (k * u[x] + h)) for x in v) < 1e-9
        assert rep.reconstruction < 1e-9
        assert all(r.verdict != "fail" for r in rep.axioms if r.axiom != "Decreasing Error Rate")

    def test_nonuniform_prior(self):
        v = {"a": 0.0, "b": 1.0, "c": 2.0, "d": 3.0}
        mu = {"a": 0.1, "b": 0.4, "c": 0.2, "d": 0.3}
        rep = pipeline(PipelineConfig(v, mu, self.beta))
        assert rep.passed
        alpha = rep.identified.params.alpha
        got = softmax([alpha[x] for x in v])
        assert np.max(np.abs(got - np.array(list(mu.values())))) < 1e-9
        for t, b in self.beta.items():
            beta_hat = 1 / rep.identified.params.lam[t]
            assert beta_hat == pytest.approx(rep.cross.k * b, rel=1e-9)

    def test_needs_two_deadlines(self):
        with pytest.raises(ValueError):
            pipeline(PipelineConfig({"a": 0, "b": 1}, {"a": 0.5, "b": 0.5}, {1.0: 1.0}))

    def test_gate(self, monkeypatch):
        # preference appears at t=1 and reverses at t=2: not a softmax process
        bad = from_luce({0: {"a": 0, "b": 0, "c": 0}, 1: {"a": 1, "b": 0, "c": 0.5},
                         2: {"a": -1, "b": 0, "c": 0.5}}, TimeGrid((1, 2)))
        monkeypatch.setattr(experiments, "neural_dataset", lambda cfg: bad)
        cfg = PipelineConfig({"a": 0, "b": 1, "c": 2}, dict.fromkeys("abc", 1 / 3),
                             {1.0: 1.0, 2.0: 2.0})
        with pytest.raises(PipelineError) as info:
            pipeline(cfg)
        assert info.value.reports and all(r.verdict == "fail" for r in info.value.reports)

    def test_json(self):
        v = {"a": 0.0, "b": 1.0, "c": 2.0}
        rep = pipeline(PipelineConfig(v, dict.fromkeys(v, 1 / 3), {1.0: 1.0, 2.0: 2.0}))
        doc = json.loads(rep.to_json())
        assert doc["passed"] is True and doc["config"]["beta"] == [[1, 1.0], [2, 2.0]]
        again = PipelineConfig.from_dict(doc["config"])
        assert again.beta == {1.0: 1.0, 2.0: 2.0}

    def test_neural_dataset_zero_point(self):
        v = {"a": 0.0, "b": 2.0}
        d = experiments.neural_dataset(PipelineConfig(v, {"a": 0.7, "b": 0.3}, {1.0: 1.0, 2.0: 3.0}))
        assert d.table(0, ("a", "b")) == ChoiceDistribution(("a", "b"), [0.7, 0.3])
        assert d.binary_prob(2.0, "b", "a") == pytest.approx(0.3 * math.exp(6) / (0.3 * math.exp(6) + 0.7))

"""
Auditing choice data
====================

A softmax process passes every behavioral axiom exactly. A finite sample
of it passes within noise bands. A process whose preference between two
alternatives reverses as the deadline grows fails, and the report names
the offending pair.
"""

import numpy as np

import prefdisc as pd

params = pd.SoftmaxParams(
    u={"a": 0.0, "b": 1.0, "c": 2.0},
    alpha={"a": 0.5, "b": 0.0, "c": -0.5},
    lam={1: 2.0, 2: 1.0, 3: 0.5},
)
exact = pd.from_softmax(params)

# With 5000 draws per menu the bands scale with the smallest cell count.
sampled = pd.sample_dataset(exact, 5000, np.random.default_rng(0))

for label, data in (("exact", exact), ("sampled", sampled)):
    print(label)
    for r in pd.audit(data):
        print(f"  {r.axiom:40s} {r.verdict:15s} tolerance {r.tolerance:.3g}")

###############################################################################
# A process that is Luce at every deadline but whose values reverse
# between t=1 and t=2 violates Preference Consistency.

grid = pd.TimeGrid((1, 2))
reversing = pd.from_luce({0: {"a": 0, "b": 0, "c": 0},
                          1: {"a": 1, "b": 0, "c": 2},
                          2: {"a": -1, "b": 0, "c": 2}}, grid)
for r in pd.audit(reversing):
    if r.verdict == "fail":
        wit = r.witnesses[0]
        print(f"{r.axiom}: {len(r.witnesses)} witnesses, e.g. {wit.alternatives} "
              f"at t={wit.t:g} vs s={wit.s}: {wit.lhs:.3f} vs {wit.rhs:.3f}")

try:
    pd.identify(reversing)
except pd.NotSoftmaxError as exc:
    print("identification refused:", exc)

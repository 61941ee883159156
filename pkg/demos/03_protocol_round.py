"""Run one full aggregation round over the simulated network.

Ten users hold private vectors; the aggregator learns only their sum.  The
transcript records every delivered message so we can audit what each node
actually observed.
"""

import numpy as np

from fedtrend import netsim, secagg

rng = secagg.seeded_rng(7)
secrets = [
    secagg.FeatureVector(values=rng.uniform(0.0, 1.0, 8), bounds=(0.0, 1.0))
    for _ in range(10)
]

aggregate, transcript = netsim.run_round(secrets, netsim.RoundConfig(seed=7))

direct = secagg.ordered_sum([s.values for s in secrets])
print("aggregate:         ", np.round(aggregate.values, 4))
print("direct sum:        ", np.round(direct, 4))
print("max |difference|:  ", np.max(np.abs(aggregate.values - direct)))

n = len(secrets)
print(f"\nmessages delivered: {len(transcript.messages)} (N^2 + N = {n * n + n})")
for kind in netsim.MessageKind:
    print(f"  {kind.value:10s} {transcript.count(kind)}")

report = netsim.transcript_privacy_check(transcript, secrets)
print("\nprivacy audit violations:", len(report.violations))

validation = secagg.validate_aggregate(aggregate, n, (0.0, 1.0))
print("aggregate within [N*a, N*b]:", validation.ok)

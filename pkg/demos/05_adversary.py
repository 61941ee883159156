"""What an active adversary can and cannot do to the aggregate.

A participant can lie about her vector, but only within the declared value
range: pushing the aggregate outside [N*a, N*b] is detected, and an
out-of-range share trips the per-message transcript check.  Manipulation
that stays inside the admissible range is undetectable by construction.
"""

import numpy as np

from fedtrend import netsim, secagg

rng = secagg.seeded_rng(3)
secrets = [
    secagg.FeatureVector(values=rng.uniform(0.0, 1.0, 6), bounds=(0.0, 1.0))
    for _ in range(10)
]
cfg = netsim.RoundConfig(seed=3)

# 1. blatant inflation: +11 on one coordinate escapes [0, 10]
_, _, report = netsim.inject_adversary(
    secrets, cfg, "inflate_coordinate", adversary=2, coordinate=4, amount=11.0
)
print("inflate +11.0       -> flagged coordinates:", [j for j, _ in report.flagged])

# 2. subtle inflation: +0.4 stays inside the admissible range
_, _, report = netsim.inject_adversary(
    secrets, cfg, "inflate_coordinate", adversary=2, coordinate=4, amount=0.4
)
print("inflate +0.4        -> validation ok:", report.ok, "(undetectable by design)")

# 3. out-of-range share: the aggregate is fine, the transcript is not
aggregate, transcript, report = netsim.inject_adversary(
    secrets, cfg, "out_of_range_share", adversary=5, coordinate=1
)
privacy = netsim.transcript_privacy_check(transcript, secrets)
direct = secagg.ordered_sum([s.values for s in secrets])
print("out-of-range share  -> aggregate error:", np.max(np.abs(aggregate.values - direct)))
print("                       range validation ok:", report.ok)
print("                       transcript violations:", [r for _, r in privacy.violations])

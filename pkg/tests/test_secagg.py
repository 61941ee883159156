import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fedtrend.secagg import (
    FeatureVector,
    ObfuscatedVector,
    SystemEntropySource,
    aggregate,
    combine_received,
    make_shares,
    ordered_sum,
    seeded_rng,
    validate_aggregate,
    vector_from_bytes,
    vector_to_bytes,
)

RECONSTRUCTION_TOL = 1e-9


def unit_vector(rng, d):
    return FeatureVector(values=rng.uniform(0.0, 1.0, d), bounds=(0.0, 1.0))


def run_protocol(secrets, share_range, seed):
    """Share, exchange, combine, aggregate: the math without the network."""
    n = len(secrets)
    share_sets = [
        make_shares(s, n, share_range, rng=seeded_rng((seed, i)), owner=i)
        for i, s in enumerate(secrets)
    ]
    obfuscated = [
        combine_received(
            share_sets[i].diagonal,
            [share_sets[k].share_for(i) for k in range(n) if k != i],
            owner=i,
        )
        for i in range(n)
    ]
    return aggregate(obfuscated, per_user_bounds=secrets[0].bounds)


# ---------------------------------------------------------------------------
# make_shares
# ---------------------------------------------------------------------------


def test_single_user_share_is_the_vector():
    v = FeatureVector(values=np.array([0.25, 0.75]), bounds=(0.0, 1.0))
    share_set = make_shares(v, 1, 100.0, rng=seeded_rng(0), owner=0)
    assert share_set.shares.shape == (1, 2)
    assert np.array_equal(share_set.diagonal, v.values)


def test_shares_sum_back_to_vector():
    v = FeatureVector(values=np.array([0.5, 0.25]), bounds=(0.0, 1.0))
    for seed in range(20):
        share_set = make_shares(v, 3, 100.0, rng=seeded_rng(seed), owner=0)
        total = ordered_sum(share_set.shares)
        assert np.max(np.abs(total - v.values)) <= 1e-12


def test_diagonal_is_exact_residual():
    # The kept share is bit-for-bit the residual of the random-share sum.
    v = FeatureVector(values=np.array([0.1, 0.9, 0.5]), bounds=(0.0, 1.0))
    share_set = make_shares(v, 5, 100.0, rng=seeded_rng(3), owner=2)
    others = [k for k in range(5) if k != 2]
    residual = v.values - ordered_sum(share_set.shares[others])
    assert np.array_equal(share_set.diagonal, residual)


def test_off_diagonal_shares_in_range():
    v = FeatureVector(values=np.zeros(16), bounds=(0.0, 1.0))
    share_set = make_shares(v, 10, 5.0, rng=seeded_rng(1), owner=4)
    others = [k for k in range(10) if k != 4]
    assert np.all(np.abs(share_set.shares[others]) <= 5.0)


def test_shares_deterministic_for_fixed_seed():
    v = FeatureVector(values=np.array([0.5, 0.25]), bounds=(0.0, 1.0))
    a = make_shares(v, 3, 100.0, rng=seeded_rng(42), owner=0)
    b = make_shares(v, 3, 100.0, rng=seeded_rng(42), owner=0)
    assert a.shares.tobytes() == b.shares.tobytes()


def test_make_shares_rejects_nonfinite():
    v = FeatureVector(values=np.array([np.inf]), bounds=(0.0, float("inf")))
    with pytest.raises(ValueError):
        make_shares(v, 2, 100.0, rng=seeded_rng(0))


def test_make_shares_validates_arguments():
    v = FeatureVector(values=np.zeros(2), bounds=(0.0, 1.0))
    with pytest.raises(ValueError):
        make_shares(v, 0, 100.0, rng=seeded_rng(0))
    with pytest.raises(ValueError):
        make_shares(v, 2, 0.0, rng=seeded_rng(0))
    with pytest.raises(ValueError):
        make_shares(v, 2, 100.0, rng=seeded_rng(0), owner=2)


def test_share_uniformity():
    # 10^4 off-diagonal shares: range respected, per-coordinate mean within
    # five standard errors of zero.
    d, n_samples, share_range = 4, 10_000, 100.0
    rng = seeded_rng(123)
    v = FeatureVector(values=np.zeros(d), bounds=(0.0, 1.0))
    share_set = make_shares(v, n_samples + 1, share_range, rng=rng, owner=0)
    samples = share_set.shares[1:]
    assert np.all(np.abs(samples) <= share_range)
    stderr = (2 * share_range / np.sqrt(12)) / np.sqrt(n_samples)
    assert np.all(np.abs(samples.mean(axis=0)) <= 5 * stderr)


def test_system_entropy_source_range():
    source = SystemEntropySource()
    draws = source.uniform(-7.0, 7.0, (100, 3))
    assert draws.shape == (100, 3)
    assert np.all(np.abs(draws) <= 7.0)


# ---------------------------------------------------------------------------
# combine_received / aggregate
# ---------------------------------------------------------------------------


def test_combine_with_no_peers():
    kept = np.array([1.0, 2.0])
    assert np.array_equal(combine_received(kept, []).values, kept)


def test_combine_simple_sum():
    out = combine_received(np.array([1.0, 0.0]), [np.array([-1.0, 2.0])])
    assert out.values.tolist() == [0.0, 2.0]


def test_combine_length_mismatch():
    with pytest.raises(ValueError):
        combine_received(np.zeros(2), [np.zeros(3)])


def test_aggregate_all_zero():
    vectors = [ObfuscatedVector(owner=i, values=np.zeros(3)) for i in range(4)]
    agg = aggregate(vectors, per_user_bounds=(0.0, 1.0))
    assert np.all(agg.values == 0.0)
    assert agg.bounds == (0.0, 4.0)


def test_aggregate_two_users_close_to_direct_sum():
    secrets = [
        FeatureVector(values=np.array([0.2]), bounds=(0.0, 1.0)),
        FeatureVector(values=np.array([0.3]), bounds=(0.0, 1.0)),
    ]
    agg = run_protocol(secrets, 100.0, seed=5)
    assert abs(agg.values[0] - 0.5) <= 1e-9


def test_aggregate_requires_vectors():
    with pytest.raises(ValueError):
        aggregate([])


def test_aggregate_order_independent():
    rng = seeded_rng(9)
    vectors = [ObfuscatedVector(owner=i, values=rng.uniform(-5, 5, 6)) for i in range(5)]
    forward = aggregate(vectors, per_user_bounds=(0.0, 1.0))
    backward = aggregate(vectors[::-1], per_user_bounds=(0.0, 1.0))
    assert np.array_equal(forward.values, backward.values)


def test_full_round_n10_d1000_direct_sum_oracle():
    rng = seeded_rng(7)
    secrets = [unit_vector(rng, 1000) for _ in range(10)]
    agg = run_protocol(secrets, 100.0, seed=7)
    direct = ordered_sum([s.values for s in secrets])
    assert np.max(np.abs(agg.values - direct)) <= RECONSTRUCTION_TOL


@pytest.mark.parametrize("n", [1, 2, 5, 10, 50])
@pytest.mark.parametrize("d", [1, 10, 1000])
@pytest.mark.parametrize("share_range", [1.0, 100.0, 1e6])
def test_reconstruction_grid(n, d, share_range):
    rng = seeded_rng((n, d, int(share_range)))
    secrets = [unit_vector(rng, d) for _ in range(n)]
    agg = run_protocol(secrets, share_range, seed=11)
    direct = ordered_sum([s.values for s in secrets])
    # Rounding of the pinned ascending-order sums accumulates like a random
    # walk: ~eps * D * N^1.5.  The 4x-eps floor covers the D=1e6 corners
    # where that exceeds the nominal 1e-9 * max(1, D*N*1e-7) envelope.
    eps = 2.0**-52
    tol = max(1e-9 * max(1.0, share_range * n * 1e-7), 4 * eps * share_range * n**1.5)
    assert np.max(np.abs(agg.values - direct)) <= tol


@settings(max_examples=25, deadline=None)
@given(
    n=st.integers(min_value=1, max_value=12),
    d=st.integers(min_value=1, max_value=64),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_reconstruction_property(n, d, seed):
    rng = seeded_rng(seed)
    secrets = [unit_vector(rng, d) for _ in range(n)]
    agg = run_protocol(secrets, 100.0, seed=seed)
    direct = ordered_sum([s.values for s in secrets])
    assert np.max(np.abs(agg.values - direct)) <= RECONSTRUCTION_TOL


# ---------------------------------------------------------------------------
# validate_aggregate
# ---------------------------------------------------------------------------


def test_validation_accepts_honest_round():
    rng = seeded_rng(2)
    secrets = [unit_vector(rng, 32) for _ in range(10)]
    agg = run_protocol(secrets, 100.0, seed=2)
    assert validate_aggregate(agg, 10, (0.0, 1.0)).ok


def test_validation_flags_inflated_coordinate():
    values = np.array([0.5, 0.5 + 1000.0, 0.5])
    agg = FeatureVector(values=values, bounds=(0.0, 10.0))
    report = validate_aggregate(agg, 10, (0.0, 1.0))
    assert not report.ok
    assert [j for j, _ in report.flagged] == [1]


def test_validation_boundary_inclusive():
    agg = FeatureVector(values=np.array([10.0, 0.0]), bounds=(0.0, 10.0))
    report = validate_aggregate(agg, 10, (0.0, 1.0), tolerance=0.0)
    assert report.ok


def test_validation_never_raises_on_nan():
    agg = FeatureVector(values=np.array([np.nan]), bounds=(0.0, 1.0))
    report = validate_aggregate(agg, 1, (0.0, 1.0))
    assert isinstance(report.ok, bool)


# ---------------------------------------------------------------------------
# serialization helpers
# ---------------------------------------------------------------------------


def test_vector_bytes_roundtrip():
    values = np.array([0.1, -0.25, 1e-300, 7.0])
    assert np.array_equal(vector_from_bytes(vector_to_bytes(values)), values)
    assert len(vector_to_bytes(values)) == 32

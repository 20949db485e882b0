import math
from collections import Counter

import numpy as np
import pytest

import oracles
from condwalk.conditioned import make_rng
from condwalk.errors import BudgetError, DomainError
from condwalk.polymer import (PolymerParams, contact_counts, decoupling_check, expected_contacts,
                              log_z_derivative, partition_function, polymer_dp, sample_polymer,
                              sample_polymers, window_doubling_change)
from condwalk.steplaw import walk_pmf
from test_conditioned import chi2_pvalue


@pytest.mark.parametrize("N", [1, 2, 5, 8])
@pytest.mark.parametrize("a", [0, 1, 2])
@pytest.mark.parametrize("eps", [-0.7, 0.0, 0.9])
def test_partition_function_matches_enumeration(law, N, a, eps):
    p = PolymerParams(N, a, eps, window=a + 2 * N + 2)
    ref = oracles.polymer_Z(law, N, a, eps)
    assert abs(partition_function(law, p) - ref) <= 1e-12 * max(1.0, ref)


@pytest.mark.parametrize("eps", [-2.0, 0.3, 1.5])
def test_two_step_lazy_example(lazy, eps):
    # enumeration: (0,0) w.p. 1/4 with two contacts, (1,0) and (-1,0) w.p. 1/16 each with one
    Z = partition_function(lazy, PolymerParams(2, 0, eps, 4))
    assert Z == pytest.approx(math.exp(2 * eps) / 4 + math.exp(eps) / 8, rel=1e-14)


@pytest.mark.parametrize("a", [0, 3])
def test_zero_pinning_reduction(law, a):
    N = 40
    p = PolymerParams.with_default_window(law, N, a, 0.0)
    pmf = walk_pmf(law, N)
    assert partition_function(law, p) == pytest.approx(sum(pmf[z] for z in range(a + 1)), rel=1e-13)


@pytest.mark.parametrize("a", [0, 2])
@pytest.mark.parametrize("eps", [-1.0, 0.4, 1.0])
def test_log_z_derivative_is_mean_contacts(law, a, eps):
    p = PolymerParams.with_default_window(law, 64, a, eps)
    assert abs(log_z_derivative(law, p) - expected_contacts(law, p)) < 1e-6


def test_window_doubling(law):
    p = PolymerParams.with_default_window(law, 128, 1, 0.5)
    assert window_doubling_change(law, p) < 1e-9


def test_small_window_is_rejected(law):
    p = PolymerParams(200, 0, -1.0, window=3)
    with pytest.raises(BudgetError):
        partition_function(law, p)
    assert polymer_dp(law, p).bias_bound > 0


def test_params_validation():
    with pytest.raises(DomainError):
        PolymerParams(0, 0, 0.0, 2)
    with pytest.raises(DomainError):
        PolymerParams(4, 2, 0.0, 2)
    with pytest.raises(DomainError):
        PolymerParams(4, -1, 0.0, 2)


def test_samples_end_in_stripe(law):
    p = PolymerParams.with_default_window(law, 50, 2, 0.3)
    paths = sample_polymers(law, p, 2000, make_rng(2, "stripe"))
    assert np.all((paths[:, -1] >= 0) & (paths[:, -1] <= 2))
    assert np.all(paths[:, 0] == 0)
    assert set(np.unique(np.diff(paths, axis=1))) <= set(law.offsets)
    sample_polymer(law, p, make_rng(0)).validate(law)


def test_zero_pinning_sampler_chi_square(law):
    N, a, m, size = 30, 1, 12, 100_000
    p = PolymerParams.with_default_window(law, N, a, 0.0)
    got = sample_polymers(law, p, size, make_rng(8, law.name))[:, m]
    first, rest = walk_pmf(law, m), walk_pmf(law, N - m)
    weights = {int(z): first[z] * sum(rest[w - z] for w in range(a + 1)) for z in first.positions}
    total = sum(weights.values())
    exact = {z: w / total for z, w in weights.items() if w > 0}
    assert chi2_pvalue(Counter(got.tolist()), exact, size) > 1e-3


def test_contacts_increase_with_pinning(law):
    N, a, size = 64, 0, 10_000
    means, ses = [], []
    for eps in (-1.0, 0.0, 1.0):
        p = PolymerParams.with_default_window(law, N, a, eps)
        c = contact_counts(sample_polymers(law, p, size, make_rng(1, f"c{eps}")), a)
        means.append(c.mean())
        ses.append(c.std(ddof=1) / math.sqrt(size))
        assert abs(c.mean() - expected_contacts(law, p)) < 3 * ses[-1]
    for i in range(2):
        assert means[i + 1] - means[i] > -3 * math.hypot(ses[i], ses[i + 1])
    assert means[0] < means[1] < means[2]


@pytest.mark.parametrize("a", [0, 1])
@pytest.mark.parametrize("N", [4, 6])
def test_decoupling(law, a, N):
    rep = decoupling_check(law, PolymerParams(N, a, 0.8, a + N + 1))
    assert rep.status == "pass", rep.computed
    assert rep.computed[-1]["value"] <= 1e-12


def test_decoupling_single_contact_lazy(lazy):
    rep = decoupling_check(lazy, PolymerParams(4, 0, 0.5, 5))
    assert rep.passed and rep.parameters["classes_tested"] >= 1


def test_decoupling_vacuous_and_limits(lazy):
    rep = decoupling_check(lazy, PolymerParams(1, 0, 0.5, 2))
    assert rep.passed and any("vacuous" in n for n in rep.notes)
    with pytest.raises(DomainError):
        decoupling_check(lazy, PolymerParams(9, 0, 0.5, 10))


def test_decoupling_detects_dependence(lazy):
    # a functional that leaks the global path through a shared counter breaks factorization
    seen = []

    def leaky(seg):
        seen.append(len(seg))
        return len(seen) % 2

    rep = decoupling_check(lazy, PolymerParams(6, 0, 0.5, 7), functional=leaky)
    assert rep.status == "fail"

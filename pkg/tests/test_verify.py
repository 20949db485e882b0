import json
import math

import numpy as np
import pytest

from condwalk.formats import dumps_json
from condwalk.verify import (SequenceRule, SuiteConfig, VerificationReport, aggregate_pass, cell_l1,
                             check_conditioned_local, check_fdd_convergence, check_killed_density,
                             check_killed_local, check_pi_limit, check_renewal_mass, check_renewal_product,
                             check_survival_ratio, check_wiener_hopf, ks_statistic, lattice_ks, run_suite,
                             suite_document, suite_jobs)
from condwalk.conditioned import bridge_marginal_exact
from condwalk.errors import ConfigError
from condwalk.steplaw import LatticePmf

SMALL = (64, 256, 1024)


def _consistent(rep: VerificationReport):
    """A pass must sit inside the tolerance at the largest n."""
    if rep.status == "pass":
        last = rep.computed[-1]
        tol = last.get("tolerance", rep.tolerance)
        assert abs(last["value"] - rep.reference) <= tol
    assert rep.status in ("pass", "fail", "inconclusive", "error")
    json.dumps(rep.to_dict(), allow_nan=False)


@pytest.mark.parametrize("text, a_n, expected", [
    ("const:3", 10.0, 3), ("frac:1/4", 10.0, 2), ("pow:2/3", 27.0, 9), ("frac:0.5", 9.0, 4),
])
def test_sequence_rules(text, a_n, expected):
    assert SequenceRule.parse(text)(a_n) == expected
    assert str(SequenceRule.parse(text)).startswith(text.split(":")[0])


@pytest.mark.parametrize("bad", ["lin:2", "const", "frac:x"])
def test_bad_sequence_rule(bad):
    with pytest.raises((ConfigError, ValueError)):
        SequenceRule.parse(bad)


def test_trend_downgrade():
    rep = VerificationReport("c", "l", {}, [{"n": 1, "value": 1.0}], 1.0, 0.1, trend_ok=False, passed=True)
    assert rep.status == "inconclusive" and not rep.passed
    assert not aggregate_pass([rep]) and aggregate_pass([rep], expected_inconclusive=["c"])


def test_ratio_checks_small_ladder(law):
    for rep in (check_renewal_mass(law, SMALL), check_renewal_mass(law, SMALL, "frac:1/2"),
                check_killed_local(law, SMALL), check_killed_local(law, SMALL, 1, "frac:1/4"),
                check_renewal_product(law, SMALL), check_killed_density(law, SMALL),
                check_pi_limit(law, SMALL)):
        _consistent(rep)
        assert rep.computed[-1]["error"] < rep.computed[0]["error"] + 1e-12


def test_start_zero_reduces_to_renewal_mass(law):
    a = check_killed_local(law, SMALL, 0, "const:2")
    b = check_renewal_mass(law, SMALL, "const:2")
    for ra, rb in zip(a.computed, b.computed):
        assert ra["value"] == pytest.approx(rb["value"], rel=1e-14)


def test_shared_input_between_local_checks(law):
    a = check_killed_local(law, SMALL, 3, "const:3")
    b = check_conditioned_local(law, SMALL, "const:3", "const:3")
    for ra, rb in zip(a.computed, b.computed):
        assert ra["killed"] == rb["conditioned_mass"]


def test_renewal_form_of_conditioned_local_converges(law):
    rep = check_conditioned_local(law, (256, 1024, 4096))
    forms = [r["renewal_form"] for r in rep.computed]
    assert abs(forms[-1] - 1) < 0.05 and forms == sorted(forms)


def test_fixed_endpoint_conditioned_local_limit_is_not_one(lazy):
    # with the endpoint held fixed the ratio tends to V(y)U(y)sigma^2/(2y^2), = 4 for the lazy walk at y = 1
    rep = check_conditioned_local(lazy, (1024, 4096, 16384), "frac:1/2", "const:1")
    assert rep.status == "fail"
    assert rep.computed[-1]["value"] == pytest.approx(4.0, rel=0.05)


def test_strict_pairing_has_a_different_limit(lazy, three):
    # pairing two strict epochs gives 4/pi (lazy) and 2/pi (three point), not 1/pi
    lz = check_pi_limit(lazy, (1024, 4096)).computed[-1]
    tp = check_pi_limit(three, (1024, 4096)).computed[-1]
    assert lz["strict_pairing"] == pytest.approx(4 / math.pi, rel=0.02)
    assert tp["strict_pairing"] == pytest.approx(2 / math.pi, rel=0.02)


def test_lazy_strictly_negative_tail_identity(lazy):
    # P[S_1 < 0, ..., S_n < 0] = P[S_1 = -1] P_0[killed walk survives n - 1 steps]
    from condwalk.ladder import first_ladder_laws, survival_curve
    fl = first_ladder_laws(lazy, 200)
    surv = survival_curve(lazy, 0, 199)
    np.testing.assert_allclose(fl.plus_tail[1:], 0.25 * surv, rtol=1e-12)


@pytest.mark.parametrize("lam", [0.05, 0.5, 2.0])
def test_wiener_hopf(law, lam):
    rep = check_wiener_hopf(law, lam, n_max=10**4)
    _consistent(rep)
    assert rep.status == "pass"
    row = rep.computed[0]
    assert abs(row["lhs_minus"] - row["rhs_minus"]) < 1e-10


def test_wiener_hopf_truncation_is_inconclusive(law):
    rep = check_wiener_hopf(law, 0.001, n_max=100)
    assert rep.status == "inconclusive"


def test_survival_ratio_monotone_in_start(law):
    rep = check_survival_ratio(law, SMALL, (0, 1, 2, 4, 8))
    at = [r["ratio"] for r in rep.computed if r["n"] == SMALL[-1]]
    assert at == sorted(at)
    assert rep.computed[0]["value"] == 1.0  # x = 0 is exact


def test_ks_statistic_matches_scipy():
    from scipy import stats
    x = np.random.default_rng(0).standard_normal(500)
    ours = ks_statistic(x, stats.norm.cdf)
    assert ours == pytest.approx(stats.kstest(x, "norm").statistic, abs=1e-12)


def test_lattice_distances_vanish_on_identical_laws():
    from condwalk.excursion import marginal_cdf_grid
    a_n, t = 5.0, 0.5
    z = np.arange(0, 60)
    cells = np.diff(np.concatenate([[0.0], marginal_cdf_grid(t, (z + 0.5) / a_n)]))
    pmf = LatticePmf(0, cells)
    assert cell_l1(pmf, a_n, t) < 1e-6
    assert lattice_ks(pmf, a_n, t) > 0


def test_fdd_report_structure(lazy):
    rep = check_fdd_convergence(lazy, n=64, samples=2000, seed=3, exact_n=256)
    _consistent(rep)
    ks = [r for r in rep.computed if r["metric"] == "ks"]
    l1 = [r for r in rep.computed if r["metric"] == "l1"]
    assert len(ks) == 3 and len(l1) == 3
    assert rep.seed == 3 and rep.extra["noise_floor"] == pytest.approx(1.36 / math.sqrt(2000))
    again = check_fdd_convergence(lazy, n=64, samples=2000, seed=3, exact_n=256)
    assert again.to_dict() == rep.to_dict()


def test_exact_marginal_ks_shrinks_with_n(lazy):
    from condwalk.steplaw import norming
    ks = [lattice_ks(bridge_marginal_exact(lazy, 1, 1, n, n // 2), norming(lazy, n), 0.5) for n in (256, 1024, 4096)]
    assert ks[0] > ks[1] > ks[2]
    # the gap is of order 1/a_n: halving per factor four in n
    assert ks[1] / ks[2] == pytest.approx(2, rel=0.15)


def test_suite_jobs_and_unknown():
    jobs = suite_jobs(SuiteConfig(laws=("lazy_srw",), checks=("pi_limit", "wiener_hopf")))
    assert [j[0] for j in jobs] == ["pi_limit", "wiener_hopf", "wiener_hopf"]
    with pytest.raises(ConfigError):
        suite_jobs(SuiteConfig(checks=("nope",)))


def test_run_suite_deterministic_and_parallel():
    cfg = SuiteConfig(laws=("lazy_srw", "three_point"), checks=("renewal_mass", "pi_limit", "fdd"),
                      n_max=256, samples=1000, fdd_n=64)
    a = dumps_json(suite_document(run_suite(cfg), cfg))
    b = dumps_json(suite_document(run_suite(cfg), cfg))
    cfg2 = SuiteConfig(**{**cfg.__dict__, "workers": 2})
    par = suite_document(run_suite(cfg2), cfg2)
    assert a == b
    assert json.loads(a)["reports"] == par["reports"]


def test_bad_law_becomes_error_report():
    cfg = SuiteConfig(laws=("no_such_law",), checks=("pi_limit",), n_max=64)
    reps = run_suite(cfg)
    assert reps[0].status == "error" and not aggregate_pass(reps)


def test_empty_suite_passes():
    reps = run_suite(SuiteConfig(checks=()))
    assert reps == [] and aggregate_pass(reps)


def test_renewal_mass_two_step_value(lazy):
    # n = 2, y = 0: u(2, 0) = 5/16 by enumeration, U(0) = 4, P[S_2 = 0] = 3/8
    rep = check_renewal_mass(lazy, (2,), "const:0")
    assert rep.computed[0]["value"] == pytest.approx((5 / 16) * 2 / (4 * 3 / 8), rel=1e-14)


def test_fixed_start_and_endpoint_conditioned_local(lazy):
    rep = check_conditioned_local(lazy, (1024, 4096), "const:2", "const:1")
    assert rep.status == "fail"
    assert rep.computed[-1]["value"] == pytest.approx(4.0, rel=0.02)


def test_killed_density_small_v(law):
    # floor(v a_n) is 0 or 1 here, and a_n P_x[killed S_n = y] is then O(1/a_n)
    vals = [r["value"] for r in check_killed_density(law, (256, 1024, 4096), u=1.0, v=0.02).computed]
    assert vals[-1] < vals[0] and vals[-1] < 0.015


def test_wiener_hopf_large_lambda(law):
    row = check_wiener_hopf(law, 40.0).computed[0]
    for k in ("lhs_minus", "rhs_minus", "lhs_plus", "rhs_plus"):
        assert row[k] == pytest.approx(1.0, abs=1e-12)


def test_survival_ratio_example(lazy):
    rep = check_survival_ratio(lazy, (256, 1024, 4096), (3,))
    assert rep.computed[-1]["V"] == pytest.approx(4.0)
    assert rep.status == "pass"


def test_fdd_second_seed_within_noise(lazy):
    a = check_fdd_convergence(lazy, n=128, samples=20_000, seed=1, exact_n=None)
    b = check_fdd_convergence(lazy, n=128, samples=20_000, seed=2, exact_n=None)
    floor = a.extra["noise_floor"]
    for ra, rb in zip(a.computed, b.computed):
        assert abs(ra["value"] - rb["value"]) < 2 * floor


def test_fdd_near_zero_time(lazy):
    rep = check_fdd_convergence(lazy, n=256, times=(0.01,), samples=5000, seed=0, exact_n=None)
    assert rep.computed[0]["value"] < rep.computed[0]["ks_exact"] + 2 * rep.extra["noise_floor"]

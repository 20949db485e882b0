import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from condwalk.errors import DomainError, TableInconsistencyError, TruncationError
from condwalk.ladder import (RenewalTable, build_renewal_table, duality_check, first_ladder_laws,
                             harmonicity_error, killed_final, killed_pmf, ladder_height_laws,
                             renewal_U, renewal_U_partial, renewal_V, survival, survival_curve,
                             u_mass, v_mass)
from condwalk.steplaw import StepLaw


@st.composite
def mean_zero_laws(draw):
    """p_{-d} = c u, p_u = c d, p_0 = 1 - c (u + d) > 0."""
    d = draw(st.integers(1, 3))
    u = draw(st.integers(1, 3).filter(lambda k: math.gcd(k, d) == 1))
    w = draw(st.integers(1, 9))
    c = Fraction(w, 10 * (u + d))
    return StepLaw.from_mapping({-d: c * u, 0: 1 - c * (u + d), u: c * d}, name=f"h{d}_{u}_{w}")


@pytest.mark.parametrize("x", [0, 1, 2])
@pytest.mark.parametrize("n", range(0, 8))
def test_killed_matches_enumeration(law, x, n):
    exact = oracles.killed(law, x, n)
    row = killed_final(law, x, n)
    for z in range(len(row)):
        assert abs(row[z] - float(exact.get(z, 0))) < 1e-14
    assert all(z < len(row) for z in exact)


def test_killed_rows_and_survival(law):
    kd = killed_pmf(law, 1, 6)
    for j in range(7):
        np.testing.assert_allclose(kd.row(j).probs, killed_final(law, 1, j), atol=1e-16)
    curve = survival_curve(law, 1, 6)
    assert curve[0] == 1.0 and np.all(np.diff(curve) <= 0)
    assert survival(law, 1, 6) == pytest.approx(curve[-1])
    with pytest.raises(DomainError):
        survival(law, -1, 3)


def test_lazy_two_step_killed():
    from condwalk.steplaw import make_builtin_law
    row = killed_final(make_builtin_law("lazy_srw"), 0, 2)
    np.testing.assert_allclose(row, [5 / 16, 1 / 4, 1 / 16])


@pytest.mark.parametrize("n", range(1, 8))
def test_u_and_v_mass_match_enumeration(law, n):
    for x in range(0, 4):
        assert abs(u_mass(law, n, x) - float(oracles.killed(law, 0, n).get(x, 0))) < 1e-14
    for x in range(1, 4):
        assert abs(v_mass(law, n, x) - float(oracles.v_mass(law, n, x))) < 1e-14


def test_v_mass_small_values(lazy):
    assert v_mass(lazy, 1, 1) == pytest.approx(0.25)
    assert v_mass(lazy, 2, 1) == pytest.approx(0.125)
    with pytest.raises(DomainError):
        v_mass(lazy, 0, 1)


@pytest.mark.parametrize("n", range(1, 7))
def test_weak_ascending_joint_matches_enumeration(law, n):
    fl = first_ladder_laws(law, 6)
    for h in range(law.max_up + 1):
        assert abs(fl.plus_joint[n, h] - float(oracles.weak_ascending_joint(law, n, h))) < 1e-14


def test_ladder_tails_are_consistent(law):
    fl = first_ladder_laws(law, 64)
    np.testing.assert_allclose(1 - fl.minus_joint[1:].sum(axis=1).cumsum(), fl.minus_tail[1:], atol=1e-14)
    np.testing.assert_allclose(1 - fl.plus_joint[1:].sum(axis=1).cumsum(), fl.plus_tail[1:], atol=1e-14)


@pytest.mark.parametrize("n", range(0, 9))
def test_duality(law, n):
    for x in range(0, 4):
        a, b = duality_check(law, n, x)
        assert abs(a - b) < 1e-12


def test_height_laws_builtin(lazy, three):
    hl = ladder_height_laws(lazy)
    np.testing.assert_allclose(hl.h_minus, [0, 1], atol=1e-15)
    np.testing.assert_allclose(hl.h_plus, [0.75, 0.25], atol=1e-15)
    ht = ladder_height_laws(three)
    np.testing.assert_allclose(ht.h_minus, [0, 0.5, 0.5], atol=1e-14)
    np.testing.assert_allclose(ht.h_plus, [0.5, 0.5], atol=1e-14)


def test_closed_forms(lazy, three):
    x = np.arange(201)
    np.testing.assert_allclose(renewal_V(lazy, 200), x + 1, atol=1e-10)
    np.testing.assert_allclose(renewal_U(lazy, 200), 4 * (x + 1), atol=1e-9)
    np.testing.assert_allclose(renewal_U(three, 200), 2 * (x + 1), atol=1e-9)
    np.testing.assert_allclose(renewal_V(three, 3), [1, 1.5, 2.25, 2.875], atol=1e-12)


def test_harmonicity(law):
    assert harmonicity_error(law, renewal_V(law, 256)) < 1e-9


def test_renewal_slopes(law):
    V, U = renewal_V(law, 400), renewal_U(law, 400)
    assert V[400] * U[400] / 400**2 == pytest.approx(2 / law.sigma2, rel=0.02)


def test_ladder_dp_cannot_meet_tight_budget(law):
    with pytest.raises(TruncationError) as exc:
        renewal_V(law, 10, n_max=1024, method="ladder_dp")
    assert exc.value.bound > 1e-3


def test_ladder_dp_close_with_loose_budget(law):
    approx = renewal_V(law, 10, n_max=4096, method="ladder_dp", tol=0.05)
    exact = renewal_V(law, 10)
    # missing epochs beyond n_max drop at most P[T^- > n_max] per renewal step
    assert np.max(np.abs(approx / exact - 1)) < 0.2
    assert np.all(approx <= exact + 1e-12)


def test_u_partial_sums_below_exact(law):
    partial, tail = renewal_U_partial(law, 5, 2048)
    exact = renewal_U(law, 5)
    assert np.all(partial <= exact + 1e-9)
    assert np.all(exact - partial <= tail)


def test_unknown_method(law):
    with pytest.raises(DomainError):
        renewal_V(law, 3, method="magic")


def test_renewal_table_roundtrip(three):
    t = build_renewal_table(three, 32, 128)
    back = RenewalTable.from_json(t.to_json(seed=5))
    np.testing.assert_array_equal(back.V, t.V)
    assert back.law == three
    doc = json.loads(t.to_json())
    doc["V"][3] += 0.1
    with pytest.raises(TableInconsistencyError):
        RenewalTable.from_json(json.dumps(doc))
    doc["schema"] = "other/9"
    with pytest.raises(TableInconsistencyError):
        RenewalTable.from_json(json.dumps(doc))


@settings(max_examples=25, deadline=None)
@given(mean_zero_laws())
def test_random_law_harmonicity(law):
    assert harmonicity_error(law, renewal_V(law, 64)) < 1e-9
    hl = ladder_height_laws(law)
    assert hl.residual < 1e-10
    assert hl.h_minus.min() >= -1e-12 and hl.h_plus.min() >= -1e-12


@settings(max_examples=25, deadline=None)
@given(mean_zero_laws(), st.integers(1, 6), st.integers(0, 4))
def test_random_law_duality(law, n, x):
    a, b = duality_check(law, n, x)
    assert abs(a - b) < 1e-12


@settings(max_examples=25, deadline=None)
@given(mean_zero_laws(), st.integers(0, 5), st.integers(0, 5), st.integers(0, 12))
def test_random_law_time_reversal(law, x, y, n):
    fwd = killed_final(law, x, n)
    bwd = killed_final(law.reversed(), y, n)
    a = fwd[y] if y < len(fwd) else 0.0
    b = bwd[x] if x < len(bwd) else 0.0
    assert abs(a - b) < 1e-14


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(1, 9))
def test_skip_free_downwards_gives_linear_V(u, w):
    c = Fraction(w, 10 * (u + 1))
    law = StepLaw.from_mapping({-1: c * u, 0: 1 - c * (u + 1), u: c})
    np.testing.assert_allclose(renewal_V(law, 50), np.arange(51) + 1, atol=1e-10)


def test_descending_epoch_tail_index(law):
    # P[T^- > n] is regularly varying with index -1/2: doubling n divides it by sqrt 2
    tail = survival_curve(law, 0, 8192)
    ratios = [tail[n] / tail[2 * n] for n in (1024, 2048, 4096)]
    assert all(abs(r - math.sqrt(2)) < 5e-3 for r in ratios)
    assert abs(ratios[-1] - math.sqrt(2)) < abs(ratios[0] - math.sqrt(2))

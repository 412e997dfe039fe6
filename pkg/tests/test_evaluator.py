"""Positions, occupation measures, payoffs, and the two closed forms."""

import math

import numpy as np
import pytest

from markovscale import (
    InputError,
    absorbing_closed_form,
    analyze,
    critical_closed_form,
    expm,
    limit_payoff,
    load_chain,
    occupation,
    position,
)
from markovscale.evaluator import payoff_vector

from helpers import fixture


@pytest.fixture(scope="module")
def eightstate():
    return analyze(load_chain(fixture("eightstate.json")))


@pytest.fixture(scope="module")
def twostate():
    return analyze(load_chain(fixture("twostate_unit.json")))


# ------------------------------------------------------------------ expm


def test_expm_of_symmetric_rate_one_generator():
    A = np.array([[-1.0, 1.0], [1.0, -1.0]])
    E = expm(A * math.log(2))
    np.testing.assert_allclose(E, [[0.625, 0.375], [0.375, 0.625]], atol=1e-14)


def test_expm_degenerate_and_long_run_limits():
    np.testing.assert_allclose(expm(np.zeros((3, 3))), np.eye(3), atol=0)
    A = np.array([[-1.0, 1.0], [1.0, -1.0]])
    np.testing.assert_allclose(expm(A * 60.0), np.full((2, 2), 0.5), atol=1e-12)


def test_expm_rejects_bad_input():
    with pytest.raises(InputError):
        expm(np.zeros((2, 3)))
    with pytest.raises(InputError):
        expm(np.array([[0.0, np.nan], [0.0, 0.0]]))


# -------------------------------------------------------------- position


def test_position_at_time_zero_is_mu_times_m(eightstate):
    np.testing.assert_allclose(
        position(eightstate, t=0.0), eightstate.mu @ eightstate.M, atol=0
    )


def test_fraction_is_a_reparametrized_time(eightstate):
    for f in (0.0, 0.25, 0.5, 0.9, 0.999):
        want = position(eightstate, t=-math.log1p(-f))
        got = position(eightstate, fraction=f)
        assert np.array_equal(got, want)


def test_position_argument_validation(eightstate):
    with pytest.raises(InputError):
        position(eightstate)
    with pytest.raises(InputError):
        position(eightstate, t=1.0, fraction=0.5)
    with pytest.raises(InputError):
        position(eightstate, t=-0.5)
    with pytest.raises(InputError):
        position(eightstate, fraction=1.0)
    with pytest.raises(InputError):
        position(eightstate, fraction=-0.1)


def test_two_state_position_matches_the_scalar_solution(twostate):
    # symmetric unit-rate flip: P_t(1,1) = (1 + e^(-2t)) / 2
    for t in (0.0, 0.3, 1.0, 4.0):
        P = position(twostate, t=t)
        want = 0.5 * (1.0 + math.exp(-2.0 * t))
        assert P[0, 0] == pytest.approx(want, abs=1e-14)
        assert P[0, 1] == pytest.approx(1.0 - want, abs=1e-14)
        np.testing.assert_allclose(P, P.T, atol=1e-15)


# ------------------------------------------------------------ occupation


def test_finite_occupation_carries_the_discount_mass(eightstate):
    for t in (0.1, 1.0, 5.0):
        occ = occupation(eightstate, t=t)
        assert occ.horizon == t
        np.testing.assert_allclose(
            occ.matrix.sum(axis=1), np.full(8, 1.0 - math.exp(-t)), atol=1e-10
        )
        assert np.all(occ.matrix >= -1e-12)


def test_total_occupation_is_row_stochastic(eightstate):
    tot = occupation(eightstate, total=True)
    assert tot.horizon is None
    np.testing.assert_allclose(tot.matrix.sum(axis=1), np.ones(8), atol=1e-10)


def test_finite_occupation_converges_to_the_total(eightstate):
    tot = occupation(eightstate, total=True).matrix
    occ = occupation(eightstate, t=50.0).matrix
    np.testing.assert_allclose(occ, tot, atol=1e-8)


def test_occupation_argument_validation(eightstate):
    with pytest.raises(InputError):
        occupation(eightstate)
    with pytest.raises(InputError):
        occupation(eightstate, t=1.0, total=True)
    with pytest.raises(InputError):
        occupation(eightstate, t=0.0)
    with pytest.raises(InputError):
        occupation(eightstate, t=-1.0)


# ---------------------------------------------------------------- payoff


def test_constant_payoff_is_preserved(eightstate):
    np.testing.assert_allclose(limit_payoff(eightstate, np.ones(8)), np.ones(8), atol=1e-12)
    np.testing.assert_allclose(
        limit_payoff(eightstate, np.full(8, 0.37)), np.full(8, 0.37), atol=1e-12
    )


def test_two_state_payoff_solves_the_resolvent(twostate):
    np.testing.assert_allclose(
        limit_payoff(twostate, [1.0, 0.0]), [2.0 / 3.0, 1.0 / 3.0], atol=1e-12
    )


def test_eightstate_payoff_on_an_indicator(eightstate):
    # reward only state 4; solving (Id - A) x = M g by hand over the classes
    # {1,2,3}, {4}, {7,8} gives x = (6/13, 9/13, 0)
    g = {s: (1.0 if s == "4" else 0.0) for s in eightstate.chain.states}
    v = limit_payoff(eightstate, g)
    idx = eightstate.chain.index
    assert v[idx["1"]] == pytest.approx(6.0 / 13.0, abs=1e-12)
    assert v[idx["3"]] == pytest.approx(6.0 / 13.0, abs=1e-12)
    assert v[idx["4"]] == pytest.approx(9.0 / 13.0, abs=1e-12)
    assert v[idx["5"]] == pytest.approx(5.0 / 13.0, abs=1e-12)  # 1/3 of each class
    assert v[idx["7"]] == pytest.approx(0.0, abs=1e-12)


def test_payoff_vector_accepts_both_forms(twostate):
    chain = twostate.chain
    np.testing.assert_array_equal(payoff_vector(chain, {"1": 0.2, "2": 0.8}), [0.2, 0.8])
    np.testing.assert_array_equal(payoff_vector(chain, [0.2, 0.8]), [0.2, 0.8])


def test_payoff_vector_validation(twostate):
    chain = twostate.chain
    with pytest.raises(InputError, match="missing"):
        payoff_vector(chain, {"1": 0.2})
    with pytest.raises(InputError, match="unknown"):
        payoff_vector(chain, {"1": 0.2, "2": 0.8, "3": 0.1})
    with pytest.raises(InputError, match="shape"):
        payoff_vector(chain, [0.2, 0.8, 0.1])
    with pytest.raises(InputError, match="non-finite"):
        payoff_vector(chain, [0.2, math.inf])


# ---------------------------------------------------- absorbing closed form


def absorbing(doc):
    return load_chain({"states": doc["states"], "transitions": doc["transitions"]})


def test_absorbing_closed_form_all_three_regimes():
    fast = absorbing(
        {
            "states": ["o", "a", "b"],
            "transitions": [
                {"from": "o", "to": "a", "coeff": 3.0, "exp": "1/2"},
                {"from": "o", "to": "b", "coeff": 1.0, "exp": "1/2"},
            ],
        }
    )
    np.testing.assert_allclose(absorbing_closed_form(fast, 1.0), [0.0, 0.75, 0.25], atol=0)
    np.testing.assert_allclose(absorbing_closed_form(fast, 0.0), [1.0, 0.0, 0.0], atol=0)

    unit = absorbing(
        {
            "states": ["o", "a"],
            "transitions": [{"from": "o", "to": "a", "coeff": 1.0, "exp": "1"}],
        }
    )
    row = absorbing_closed_form(unit, 1.0)
    np.testing.assert_allclose(row, [math.exp(-1.0), 1.0 - math.exp(-1.0)], atol=1e-15)

    slow = absorbing(
        {
            "states": ["o", "a"],
            "transitions": [{"from": "o", "to": "a", "coeff": 1.0, "exp": "2"}],
        }
    )
    np.testing.assert_allclose(absorbing_closed_form(slow, 123.0), [1.0, 0.0], atol=0)


def test_absorbing_closed_form_agrees_with_the_general_pipeline():
    doc = {
        "states": ["o", "a", "b", "c"],
        "transitions": [
            {"from": "o", "to": "a", "coeff": 0.7, "exp": "1"},
            {"from": "o", "to": "b", "coeff": 0.2, "exp": "1"},
            {"from": "o", "to": "c", "coeff": 0.4, "exp": "3/2"},
        ],
    }
    chain = load_chain(doc)
    model = analyze(chain)
    for t in (0.0, 0.5, 2.0):
        np.testing.assert_allclose(
            absorbing_closed_form(chain, t), position(model, t=t)[0], atol=1e-12
        )


def test_absorbing_closed_form_rejects_other_shapes():
    with pytest.raises(InputError, match="exactly one"):
        absorbing_closed_form(load_chain(fixture("twostate_unit.json")), 1.0)
    lonely = load_chain({"states": ["x"], "transitions": []})
    with pytest.raises(InputError, match="exactly one"):
        absorbing_closed_form(lonely, 1.0)
    ok = load_chain(
        {
            "states": ["o", "a"],
            "transitions": [{"from": "o", "to": "a", "coeff": 1.0, "exp": "1"}],
        }
    )
    with pytest.raises(InputError):
        absorbing_closed_form(ok, -1.0)


# ----------------------------------------------------- critical closed form


def test_critical_closed_form_is_the_matrix_exponential():
    chain = load_chain(fixture("twostate_unit.json"))
    A = np.array([[-1.0, 1.0], [1.0, -1.0]])
    for t in (0.0, 0.7, 3.0):
        np.testing.assert_allclose(critical_closed_form(chain, t), expm(A * t), atol=0)


def test_critical_closed_form_ignores_slower_entries():
    chain = load_chain(fixture("twostate_heavy.json"))  # only exponent-2 entries
    np.testing.assert_allclose(critical_closed_form(chain, 5.0), np.eye(2), atol=0)


def test_critical_cycle_mixes_to_uniform():
    doc = {
        "states": ["p", "q", "r"],
        "transitions": [
            {"from": "p", "to": "q", "coeff": 1.0, "exp": "1"},
            {"from": "q", "to": "r", "coeff": 1.0, "exp": "1"},
            {"from": "r", "to": "p", "coeff": 1.0, "exp": "1"},
        ],
    }
    E = critical_closed_form(load_chain(doc), 80.0)
    np.testing.assert_allclose(E, np.full((3, 3), 1.0 / 3.0), atol=1e-12)


def test_critical_closed_form_rejects_fast_entries():
    doc = {
        "states": ["p", "q"],
        "transitions": [{"from": "p", "to": "q", "coeff": 0.5, "exp": "1/2"}],
    }
    with pytest.raises(InputError, match="not critical"):
        critical_closed_form(load_chain(doc), 1.0)


# ------------------------------------------------------------- derivative


def test_position_time_derivative_at_zero_is_mu_a_m(eightstate):
    h = 1e-4
    diff = (position(eightstate, t=h) - position(eightstate, t=0.0)) / h
    # forward difference has O(h) bias; a central one is not available at t=0,
    # so compare against the derivative a half step in
    mid = (position(eightstate, t=2 * h) - position(eightstate, t=0.0)) / (2 * h)
    want = eightstate.mu @ eightstate.A @ eightstate.M
    np.testing.assert_allclose(mid, want, atol=1e-3)
    np.testing.assert_allclose(diff, want, atol=1e-3)

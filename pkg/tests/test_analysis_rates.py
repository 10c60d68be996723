import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles.independent import rx, teleport_born
from pbqc.analysis.rates import (TELEPORT_RATE_EXACT, b2_basis_rate, measure_hold_rate_exact,
                                 optimal_b2_basis_search, rate_monte_carlo, rate_profile, rate_quadrature_teleport,
                                 success_closed_form, su2, teleport_integral, teleport_integrand)


@pytest.fixture(scope="module")
def quad():
    return rate_quadrature_teleport()


@pytest.mark.parametrize("strategy,mean", [("RandomGuess", 0.5), ("MeasureHold", 0.75)])
def test_monte_carlo_rates(strategy, mean):
    r = rate_monte_carlo(strategy, 100_000, seed=3)
    assert abs(r.rate - mean) < 3 * math.sqrt(mean * (1 - mean) / r.samples)
    assert abs(r.rate - mean) < 0.005


def test_measure_hold_exact():
    assert measure_hold_rate_exact() == Fraction(3, 4)


def test_teleport_quadrature_bracketed_by_frozen_monte_carlo(quad, frozen):
    value, history = quad
    mc = frozen["teleport_rate_mc"]
    assert 0.84 <= value <= 0.86
    assert abs(value - mc["mean"]) < 4 * mc["stderr"]
    assert abs(history[-1][1] - history[-2][1]) < 1e-6
    assert value == pytest.approx(TELEPORT_RATE_EXACT, abs=1e-6)


def test_teleport_monte_carlo_agrees_with_quadrature(quad):
    r = rate_monte_carlo("TeleportOptimal", 100_000, seed=4)
    assert abs(r.rate - quad[0]) < 4 * math.hypot(r.stderr, 1e-6)


def test_scalar_engine_agrees_with_batched():
    a = rate_monte_carlo("TeleportOptimal", 4000, seed=9, engine="scalar")
    b = rate_monte_carlo("TeleportOptimal", 100_000, seed=9)
    assert abs(a.rate - b.rate) < 4 * math.hypot(a.stderr, b.stderr)


def test_half_domain_symmetry():
    north = teleport_integral(256, 256, t_range=(0.0, 1.0))
    south = teleport_integral(256, 256, t_range=(-1.0, 0.0))
    assert north == pytest.approx(south, abs=1e-9)


@given(st.floats(0, math.pi), st.floats(0, 2 * math.pi))
def test_integrand_matches_born_oracle(theta, phi):
    assert float(teleport_integrand(theta, phi)) == pytest.approx(teleport_born(theta, phi), abs=1e-12)


@given(st.floats(0, math.pi), st.floats(0, 2 * math.pi))
def test_strategy_ladder(theta, phi):
    guess = float(success_closed_form("RandomGuess", theta))
    hold = float(success_closed_form("MeasureHold", theta))
    tele = float(success_closed_form("TeleportOptimal", theta, phi))
    assert guess <= hold + 1e-12
    assert tele >= 0.75 - 1e-12


def test_rate_ladder_is_strictly_monotone(quad):
    guess = rate_monte_carlo("RandomGuess", 50_000, seed=2).rate
    hold = float(measure_hold_rate_exact())
    assert guess < hold < quad[0]


@given(st.floats(0, math.pi), st.floats(0, 2 * math.pi))
def test_integrand_symmetries(theta, phi):
    v = float(teleport_integrand(theta, phi))
    assert float(teleport_integrand(theta, phi + math.pi)) == pytest.approx(v, abs=1e-12)
    assert float(teleport_integrand(math.pi - theta, phi)) == pytest.approx(v, abs=1e-12)


def test_profile_against_frozen_slices(frozen):
    rows = rate_profile([r["theta"] for r in frozen["teleport_profile"]], n_phi=4096)
    for row, want in zip(rows, frozen["teleport_profile"]):
        assert row["TeleportOptimal"] == pytest.approx(want["value"], abs=1e-9)
        assert row["MeasureHold"] >= row["RandomGuess"] - 1e-12


def test_b2_basis_rates(frozen):
    assert b2_basis_rate(np.eye(2)) == pytest.approx(frozen["b2_rate_identity"], abs=1e-3)
    assert b2_basis_rate(su2([math.pi / 2, 0, 0])) == pytest.approx(frozen["b2_rate_rx_half_pi"], abs=1e-3)
    assert np.allclose(su2([math.pi / 2, 0, 0]), rx(math.pi / 2))


def test_basis_search_does_not_beat_quadrature(quad):
    res = optimal_b2_basis_search(restarts=8, seed=1)
    assert res.best_rate <= quad[0] + 1e-3
    assert res.best_rate >= res.identity_rate - 1e-3


def test_reproducible_per_seed():
    a = rate_monte_carlo("TeleportOptimal", 20_000, seed=17)
    b = rate_monte_carlo("TeleportOptimal", 20_000, seed=17)
    c = rate_monte_carlo("TeleportOptimal", 20_000, seed=18)
    assert a == b and a.rate != c.rate


def test_rejects_tiny_sample_counts():
    with pytest.raises(ValueError):
        rate_monte_carlo("RandomGuess", 10, seed=0)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from fiberlink import analytic, numeric
from fiberlink.analytic import CaseLabel
from fiberlink.errors import NotFinite, NotNormalized, RangeExceeded
from fiberlink.model import Amplitudes, initial_amplitudes, params_from_ratio

ratios = st.floats(min_value=0.0, max_value=10.0)
angles = st.floats(min_value=-math.pi, max_value=math.pi)
times = st.floats(min_value=0.0, max_value=50.0)


def expm_oracle(r, theta, tau):
    """Reference propagation by Pade matrix exponential of the band matrix."""
    h = np.diag([1.0, r, r, 1.0], 1)
    h = h + h.T
    psi0 = np.array([math.cos(theta), 0, 0, 0, math.sin(theta)], dtype=complex)
    return expm(-1j * h * tau) @ psi0


# --- amplitudes -------------------------------------------------------------


@pytest.mark.parametrize("theta", [0.0, 0.3, math.pi / 4, -2.0])
def test_amplitudes_at_zero_time(params, theta):
    np.testing.assert_allclose(
        analytic.amplitudes(params, theta, 0.0).as_array(),
        initial_amplitudes(theta).as_array(),
        atol=1e-15,
    )


def test_amplitudes_photonic_at_quarter_period():
    # r = 0, theta = -pi/4, tau = pi/2: cos(tau) = 0, sin(tau) = 1 by hand
    amps = analytic.amplitudes(params_from_ratio(0.0), -math.pi / 4, math.pi / 2).as_array()
    s = 1 / math.sqrt(2)
    np.testing.assert_allclose(amps, [0, -1j * s, 0, 1j * s, 0], atol=1e-15)
    np.testing.assert_allclose(amps, expm_oracle(0.0, -math.pi / 4, math.pi / 2), atol=1e-12)


def test_amplitudes_match_numeric_example():
    p = params_from_ratio(1.0)
    exact = analytic.amplitudes(p, math.pi / 4, 1.3).as_array()
    oracle = numeric.evolve(p, initial_amplitudes(math.pi / 4), 1.3)
    assert np.max(np.abs(exact - oracle)) <= 1e-9


@settings(max_examples=300, deadline=None)
@given(ratios, angles, times)
def test_amplitudes_match_expm(r, theta, tau):
    exact = analytic.amplitude_arrays(r, theta, tau)
    assert np.max(np.abs(exact - expm_oracle(r, theta, tau))) <= 1e-9


@settings(max_examples=100, deadline=None)
@given(ratios, angles, st.floats(min_value=0.1, max_value=20.0))
def test_amplitudes_solve_schroedinger(r, theta, tau):
    # central difference of i dN/dtau = H N
    h = np.diag([1.0, r, r, 1.0], 1)
    h = h + h.T
    step = 1e-5
    fwd = analytic.amplitude_arrays(r, theta, tau + step)
    bwd = analytic.amplitude_arrays(r, theta, tau - step)
    deriv = (fwd - bwd) / (2 * step)
    residual = 1j * deriv - h @ analytic.amplitude_arrays(r, theta, tau)
    assert np.max(np.abs(residual)) < 1e-6 * (1 + r) ** 3


def test_printed_n5_variant_is_not_unitary():
    # cos(w tau^2) in N5 breaks normalization; the adopted cos(w tau) keeps it
    r, theta, tau = 1.0, 0.3, 1.7
    amps = analytic.amplitude_arrays(r, theta, tau)
    w = math.sqrt(3)
    sym, anti = math.cos(theta) + math.sin(theta), math.cos(theta) - math.sin(theta)
    variant = amps.copy()
    variant[4] = (2 * r * r + math.cos(w * tau**2)) / (4 * r * r + 2) * sym - math.cos(tau) / 2 * anti
    assert abs(np.sum(np.abs(amps) ** 2) - 1) < 1e-14
    assert abs(np.sum(np.abs(variant) ** 2) - 1) > 1e-3


def test_normalization_random_sweep(rng):
    for _ in range(10_000):
        r, theta, tau = rng.uniform(0, 10), rng.uniform(-math.pi, math.pi), rng.uniform(0, 50)
        norm2 = np.sum(np.abs(analytic.amplitude_arrays(r, theta, tau)) ** 2)
        assert abs(norm2 - 1) <= 1e-12


@given(ratios, times)
def test_fiber_never_populated_for_antisymmetric_state(r, tau):
    assert abs(analytic.amplitudes(params_from_ratio(r), -math.pi / 4, tau).n3) <= 1e-15


def test_amplitudes_errors():
    p = params_from_ratio(1.0)
    with pytest.raises(NotFinite):
        analytic.amplitudes(p, 0.0, math.nan)
    with pytest.raises(NotFinite):
        analytic.amplitudes(p, math.inf, 1.0)
    with pytest.raises(RangeExceeded):
        analytic.amplitudes(p, 0.0, 1e4 + 1)
    analytic.amplitudes(p, 0.0, -1e4)


# --- reduced density --------------------------------------------------------


def test_reduced_density_examples():
    rho = analytic.reduced_density(Amplitudes(1, 0, 0, 0, 0)).rho
    np.testing.assert_array_equal(rho, np.diag([0, 1, 0, 0]))

    s = math.sqrt(2) / 2
    rho = analytic.reduced_density(Amplitudes(s, 0, 0, 0, s)).rho
    expected = np.zeros((4, 4))
    expected[1:3, 1:3] = 0.5
    np.testing.assert_allclose(rho, expected, atol=1e-16)

    t = 1 / math.sqrt(3)
    rho = analytic.reduced_density(Amplitudes(0, t, t, t, 0)).rho
    np.testing.assert_allclose(rho, np.diag([0, 0, 0, 1]), atol=1e-15)


def test_reduced_density_not_normalized():
    with pytest.raises(NotNormalized):
        analytic.reduced_density(Amplitudes(1, 1, 0, 0, 0))


@settings(max_examples=200, deadline=None)
@given(ratios, angles, times)
def test_reduced_density_is_physical(r, theta, tau):
    rho = analytic.reduced_density(analytic.amplitudes(params_from_ratio(r), theta, tau))
    rho.validate()


# --- concurrence ------------------------------------------------------------


def test_closed_form_examples(params):
    assert analytic.concurrence_closed_form(params, math.pi / 4, 0.0) == pytest.approx(1.0, abs=1e-15)
    for theta in (0.0, 0.2, -1.1, 2.5):
        assert analytic.concurrence_closed_form(params, theta, 0.0) == pytest.approx(
            abs(math.sin(2 * theta)), abs=1e-15
        )


def test_closed_form_minimum_r1():
    # r = 1: w = sqrt(3), tau = pi/sqrt(3) puts cos(w tau) = -1 -> ((2-1)/3)^2
    p = params_from_ratio(1.0)
    tau = math.pi / math.sqrt(3)
    c = analytic.concurrence_closed_form(p, math.pi / 4, tau)
    assert c == pytest.approx(1 / 9, abs=1e-14)
    psi = numeric.evolve(p, initial_amplitudes(math.pi / 4), tau)
    assert numeric.wootters_concurrence(numeric.partial_trace(psi)) == pytest.approx(1 / 9, abs=1e-12)


def test_closed_form_array_shape():
    taus = np.linspace(0, 3, 7)
    out = analytic.concurrence_closed_form(params_from_ratio(0.3), 0.1, taus)
    assert out.shape == taus.shape
    assert isinstance(analytic.concurrence_closed_form(params_from_ratio(0.3), 0.1, 1.0), float)


def test_case_minus_quarter_pi():
    for r in (0.0, 0.7, 4.0):
        assert analytic.concurrence_case(CaseLabel.MINUS_QUARTER_PI, params_from_ratio(r), math.pi) == pytest.approx(1.0, abs=1e-15)


@given(times)
def test_case_plus_quarter_pi_uncoupled_equals_minus(tau):
    p = params_from_ratio(0.0)
    a = analytic.concurrence_case(CaseLabel.PLUS_QUARTER_PI, p, tau)
    assert a == pytest.approx(math.cos(tau) ** 2, abs=1e-14)


def test_case_plus_quarter_pi_r2():
    # r = 2: w = 3. tau = pi/3 gives cos(pi) = -1 -> (7/9)^2; tau = 2pi/3 gives cos(2pi) = 1 -> 1
    p = params_from_ratio(2.0)
    assert analytic.concurrence_case(CaseLabel.PLUS_QUARTER_PI, p, math.pi / 3) == pytest.approx(49 / 81, abs=1e-14)
    assert analytic.concurrence_case(CaseLabel.PLUS_QUARTER_PI, p, 2 * math.pi / 3) == pytest.approx(1.0, abs=1e-14)
    psi = numeric.evolve(p, initial_amplitudes(math.pi / 4), math.pi / 3)
    assert numeric.wootters_concurrence(numeric.partial_trace(psi)) == pytest.approx(49 / 81, abs=1e-12)


def test_case_general_requires_theta():
    with pytest.raises(ValueError):
        analytic.concurrence_case(CaseLabel.GENERAL, params_from_ratio(1.0), 1.0)
    assert analytic.concurrence_case(CaseLabel.GENERAL, params_from_ratio(1.0), 1.0, theta=0.4) == analytic.concurrence_closed_form(params_from_ratio(1.0), 0.4, 1.0)


@settings(max_examples=300, deadline=None)
@given(ratios, times, st.sampled_from([CaseLabel.MINUS_QUARTER_PI, CaseLabel.PLUS_QUARTER_PI, CaseLabel.TWELFTH_PI]))
def test_cases_agree_with_closed_form(r, tau, case):
    p = params_from_ratio(r)
    assert analytic.concurrence_case(case, p, tau) == pytest.approx(
        analytic.concurrence_closed_form(p, case.theta, tau), abs=1e-12
    )


@settings(max_examples=200, deadline=None)
@given(ratios, ratios, times)
def test_minus_quarter_pi_independent_of_r(r1, r2, tau):
    a = analytic.concurrence_case(CaseLabel.MINUS_QUARTER_PI, params_from_ratio(r1), tau)
    b = analytic.concurrence_closed_form(params_from_ratio(r2), -math.pi / 4, tau)
    assert a == pytest.approx(b, abs=1e-12)


@given(ratios, st.floats(min_value=0.0, max_value=30.0))
def test_minus_quarter_pi_period_pi(r, tau):
    p = params_from_ratio(r)
    assert analytic.concurrence_closed_form(p, -math.pi / 4, tau + math.pi) == pytest.approx(
        analytic.concurrence_closed_form(p, -math.pi / 4, tau), abs=1e-12
    )


@pytest.mark.parametrize("r", [2.0, 12.0])  # sqrt(2 r^2 + 1) = 3 and 17
def test_plus_quarter_pi_periodic_for_integer_frequency(r):
    w = math.sqrt(2 * r * r + 1)
    period = 2 * math.pi / w
    taus = np.linspace(0, 5, 41)
    p = params_from_ratio(r)
    np.testing.assert_allclose(
        analytic.concurrence_closed_form(p, math.pi / 4, taus + period),
        analytic.concurrence_closed_form(p, math.pi / 4, taus),
        atol=1e-12,
    )


@settings(max_examples=300, deadline=None)
@given(ratios, angles, times)
def test_concurrence_in_unit_interval(r, theta, tau):
    c = analytic.concurrence_closed_form(params_from_ratio(r), theta, tau)
    assert -1e-12 <= c <= 1 + 1e-12


@settings(max_examples=300, deadline=None)
@given(ratios, angles, times)
def test_closed_form_matches_wootters(r, theta, tau):
    p = params_from_ratio(r)
    rho = analytic.reduced_density(analytic.amplitudes(p, theta, tau))
    assert analytic.concurrence_closed_form(p, theta, tau) == pytest.approx(
        numeric.wootters_concurrence(rho), abs=1e-9
    )

"""Hamiltonian catalogue, numerical fluxes, initial data, barrier bound."""

import math

import numpy as np
import pytest

from caputohj.fraccalc import FracOrder
from caputohj.hamiltonian import (HamiltonianSpec, InitialData,
                                  barrier_constant, godunov_eikonal,
                                  lax_friedrichs)


def test_eikonal_potential_evaluates_pointwise():
    h = HamiltonianSpec.eikonal_potential(1.0, 1)
    # H(y, p) = |p| + cos(2 pi y)
    assert h.eval(0.0, 2.0) == pytest.approx(2.0 + 1.0)
    assert h.eval(0.5, -3.0) == pytest.approx(3.0 - 1.0)
    assert h.eval(0.25, 0.0) == pytest.approx(0.0, abs=1e-15)
    y = np.linspace(0, 1, 9)
    vals = h.eval(y, 1.0)
    assert vals.shape == (9,)
    assert vals[0] == pytest.approx(2.0)


def test_family_constants():
    h = HamiltonianSpec.eikonal_potential(0.5, 3)
    assert h.lip_p == 1.0
    assert h.lip_y == pytest.approx(2 * math.pi * 3 * 0.5)
    assert h.coercivity_low == 1.0
    assert h.coercivity_off == 0.5
    plain = HamiltonianSpec.eikonal()
    assert plain.lip_y == 0.0
    assert plain.coercivity_off == 0.0
    shifted = HamiltonianSpec.eikonal_plus_constant(-2.0)
    assert shifted.eval(0.3, 1.0) == pytest.approx(1.0 - 2.0)
    assert shifted.coercivity_off == 2.0


def test_potential_only_for_separable_kinds():
    h = HamiltonianSpec.eikonal_potential(1.0, 2)
    assert h.potential(0.0) == pytest.approx(1.0)
    cust = HamiltonianSpec.custom(lambda y, p: abs(p) + y * 0.0, lip_y=0.0,
                                  lip_p=1.0, coercivity_low=1.0)
    with pytest.raises(ValueError):
        cust.potential(0.0)


def test_max_on_slope_ball_closed_form_matches_sampling():
    h = HamiltonianSpec.eikonal_potential(1.0, 1)
    # max over |p| <= r, y of |p| - A cos(...) = r + A
    assert h.max_on_slope_ball(2.0) == pytest.approx(3.0)
    cust = HamiltonianSpec.custom(lambda y, p: np.abs(p) + np.cos(2 * np.pi * y),
                                  lip_y=2 * np.pi, lip_p=1.0,
                                  coercivity_low=1.0, coercivity_off=1.0)
    assert cust.max_on_slope_ball(2.0) == pytest.approx(3.0, abs=1e-4)


def test_lax_friedrichs_consistency_and_theta_guard():
    h = HamiltonianSpec.eikonal_potential(1.0, 1)
    # consistent: equal one-sided slopes reduce the flux to H itself
    assert lax_friedrichs(h, 0.25, 1.2, 1.2, theta=1.0) == pytest.approx(
        h.eval(0.25, 1.2))
    # dissipation acts on the slope jump
    base = lax_friedrichs(h, 0.25, 1.0, 1.0, theta=1.0)
    assert lax_friedrichs(h, 0.25, 1.0 - 0.2, 1.0 + 0.2, theta=1.0) \
        == pytest.approx(base - 1.0 * 0.2)
    with pytest.raises(ValueError):
        lax_friedrichs(h, 0.0, 0.0, 0.0, theta=0.5)  # below lip_p


def test_godunov_upwind_gradient():
    h = HamiltonianSpec.eikonal_potential(1.0, 1)
    # |Du| via max(p_minus, -p_plus, 0): increasing data => backward slope
    assert godunov_eikonal(h, 0.0, 2.0, 3.0) == pytest.approx(2.0 + 1.0)
    assert godunov_eikonal(h, 0.0, -2.0, -3.0) == pytest.approx(3.0 + 1.0)
    assert godunov_eikonal(h, 0.0, -1.0, 1.0) == pytest.approx(0.0 + 1.0)
    cust = HamiltonianSpec.custom(lambda y, p: p ** 2, lip_y=0.0, lip_p=8.0,
                                  coercivity_low=1.0)
    with pytest.raises(ValueError):
        godunov_eikonal(cust, 0.0, 1.0, 1.0)


def test_initial_data_catalogue():
    zero = InitialData.zero()
    assert zero.lip == 0.0
    assert zero.evaluate(np.array([0.0, 0.3]))[1] == 0.0

    cos = InitialData.cosine(0.25, 1)
    x = np.linspace(0, 1, 129)
    vals = cos.evaluate(x)
    assert vals[0] == pytest.approx(0.25)
    assert np.max(np.abs(vals)) == pytest.approx(0.25)
    assert cos.lip == pytest.approx(2 * math.pi * 0.25)
    # sampled slope never beats the advertised constant
    slopes = np.abs(np.diff(vals)) / (x[1] - x[0])
    assert np.max(slopes) <= cos.lip + 1e-9

    hat = InitialData.hat(1.0)
    vals = hat.evaluate(np.array([0.0, 0.25, 0.5, 0.75]))
    assert vals == pytest.approx([-1.0, 0.0, 1.0, 0.0])
    assert hat.lip == 4.0
    # periodic: same value at both ends of the cell
    assert hat.evaluate(np.array([0.0]))[0] == pytest.approx(
        hat.evaluate(np.array([1.0]))[0])


def test_barrier_constant_frozen_value():
    """max_{|p| <= lip(u0)} H / Gamma(1 - alpha) for the stock setup:
    (1 + 1) / Gamma(1/2) = 2 / sqrt(pi)."""
    h = HamiltonianSpec.eikonal_potential(1.0, 1)
    u0 = InitialData.cosine(1.0 / (2.0 * math.pi), 1)   # lip = 1
    frac = FracOrder.of(0.5)
    assert u0.lip == pytest.approx(1.0)
    assert barrier_constant(h, u0, frac) == pytest.approx(1.1283791670955126,
                                                          rel=1e-12)

"""Sup/inf parabolic envelopes and the regularization error constant."""

import math

import numpy as np
import pytest

from caputohj.envelopes import (envelope_error_constant, envelope_report,
                                inf_convolve, sup_convolve)
from caputohj.fraccalc import FracOrder, HistoryScalar, TimeGrid

FRAC = FracOrder.of(0.5)


def _history(fn, n=1000, t_final=1.0):
    grid = TimeGrid.of(t_final, n, FRAC)
    return HistoryScalar.from_callable(fn, grid)


def test_sup_convolve_constant_is_fixed_point():
    hist = _history(lambda t: 3.0, n=200)
    env = sup_convolve(hist, 0.05)
    assert np.max(np.abs(env.values - 3.0)) == 0.0
    assert np.array_equal(env.argpoints, np.arange(201))


def test_sup_convolve_linear_interior_value():
    """f(t) = t: maximizer sits at xi = t + delta, value t + delta/2."""
    hist = _history(lambda t: t, n=2000)
    env = sup_convolve(hist, 0.1)
    mid = 1000                   # t = 0.5
    assert env.values[mid] == pytest.approx(0.55, abs=2e-4)
    # boundary clamp: at t = 1 the maximizer cannot move past the end
    assert env.values[-1] == pytest.approx(1.0, abs=1e-12)
    assert env.argpoints[-1] == 2000
    # maximizer offset approximately delta on the interior
    t = hist.tgrid.times()
    assert t[env.argpoints[mid]] - t[mid] == pytest.approx(0.1, abs=1e-3)


def test_envelopes_bracket_the_function():
    hist = _history(lambda t: math.sin(3.0 * t), n=800)
    upper = sup_convolve(hist, 0.02)
    lower = inf_convolve(hist, 0.02)
    assert np.all(upper.values >= hist.samples - 1e-12)
    assert np.all(lower.values <= hist.samples + 1e-12)
    # duality: inf-convolution is minus the sup-convolution of -f
    neg = HistoryScalar(samples=-hist.samples, tgrid=hist.tgrid)
    assert np.max(np.abs(lower.values + sup_convolve(neg, 0.02).values)) == 0.0


def test_sup_convolve_rejects_bad_delta():
    hist = _history(lambda t: t, n=50)
    for bad in (0.0, -0.1):
        with pytest.raises(ValueError):
            sup_convolve(hist, bad)


def test_envelope_report_on_root_function():
    """The canonical 1/2-Hölder profile passes every bound at several
    regularization widths (the acceptance run repeats this at 2000 nodes)."""
    hist = _history(lambda t: math.sqrt(t), n=600)
    for delta in (0.1, 0.01):
        report = envelope_report(hist, delta, holder=(1.0, 0.5))
        assert report.all_ok, {k: (v.measured, v.bound)
                               for k, v in report.items.items()}
        assert set(report.items) == {"ordering", "lipschitz_scale",
                                     "argpoint_distance", "uniform_gap",
                                     "holder_preserved"}


def test_envelope_report_json_shape():
    hist = _history(lambda t: math.sqrt(t), n=300)
    payload = envelope_report(hist, 0.05, holder=(1.0, 0.5)).to_json_dict()
    assert payload["delta"] == 0.05
    for item in payload["items"].values():
        assert set(item) == {"ok", "measured", "bound"}


def test_envelope_report_rejects_false_certificate():
    # sin(8t) oscillates too fast to be 1/2-Hölder with constant 1
    hist = _history(lambda t: math.sin(8.0 * t), n=500)
    with pytest.raises(ValueError):
        envelope_report(hist, 0.01, holder=(1.0, 0.5))


def test_uniform_gap_bound_value():
    """(2M)^(2/(2-a)) delta^(a/(2-a)) at M=1, a=1/2, delta=0.01:
    2^(4/3) * 0.01^(1/3) = 0.54288...; the measured gap sits well under."""
    hist = _history(lambda t: math.sqrt(t), n=2000)
    report = envelope_report(hist, 0.01, holder=(1.0, 0.5))
    item = report.items["uniform_gap"]
    slack = 2.0 * (1.0 / 2000) ** 0.5
    assert item.bound == pytest.approx(2 ** (4 / 3) * 0.01 ** (1 / 3) + slack,
                                       rel=1e-12)
    assert item.measured <= item.bound


def test_error_constant_frozen_value_and_monotonicity():
    # 2^(a+2) a M^(2-a) / Gamma(1-a) * delta^((1-a)/4) at a=1/2, M=1:
    # (4 sqrt(2) / 2) / sqrt(pi) * 0.01^(1/8)
    got = envelope_error_constant(FRAC, 1.0, 0.01)
    expect = (2.0 ** 2.5 * 0.5 / math.sqrt(math.pi)) * 0.01 ** 0.125
    assert got == pytest.approx(expect, rel=1e-12)
    assert got == pytest.approx(0.8973669225416061, rel=1e-9)
    assert envelope_error_constant(FRAC, 1.0, 1e-12) \
        < envelope_error_constant(FRAC, 1.0, 1e-6)
    assert envelope_error_constant(FRAC, 0.0, 0.01) == 0.0
    with pytest.raises(ValueError):
        envelope_error_constant(FRAC, 1.0, 0.0)
    with pytest.raises(ValueError):
        envelope_error_constant(FRAC, 1.0, 1.0)
    with pytest.raises(ValueError):
        envelope_error_constant(FRAC, -1.0, 0.1)

"""Parabolic sup/inf envelopes of time signals and their quantitative
regularization properties.

For a sampled ``f`` on ``[0, T]`` the sup-envelope

    f^d(t) = max_xi { f(xi) - (t - xi)^2 / (2 delta) }

trades a sup-norm error of order ``delta^(a/(2-a))`` for a Lipschitz
bound of order ``1/delta`` -- the standard regularisation step when
moving from Holder-in-time estimates to equations with a genuine time
derivative.  :func:`envelope_report` measures each side of that trade on
the grid and compares against the quantitative bounds, with an explicit
grid-slack term since the continuum maximizer may fall between nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fraccalc import FracOrder, HistoryScalar, gamma

__all__ = [
    "ConvolvedFunction",
    "sup_convolve",
    "inf_convolve",
    "EnvelopeItem",
    "EnvelopeReport",
    "envelope_report",
    "envelope_error_constant",
]

_CHUNK = 256


@dataclass(frozen=True, eq=False)
class ConvolvedFunction:
    """An envelope with the node index attaining each maximum/minimum."""

    base: HistoryScalar
    delta: float
    kind: str  # "sup" or "inf"
    values: np.ndarray
    argpoints: np.ndarray


def sup_convolve(f: HistoryScalar, delta: float) -> ConvolvedFunction:
    """Exhaustive-scan sup-envelope over the grid nodes (O(n^2)).

    Ties resolve to the smallest node index, matching ``argmax``.
    """
    delta = float(delta)
    if delta <= 0.0:
        raise ValueError(f"envelope aperture must be positive, got {delta}")
    samples = f.samples
    n = samples.size
    t = f.tgrid.times()[:n]
    values = np.empty(n)
    argpoints = np.empty(n, dtype=int)
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        cand = samples[None, :] - (t[lo:hi, None] - t[None, :]) ** 2 / (2.0 * delta)
        idx = np.argmax(cand, axis=1)
        argpoints[lo:hi] = idx
        values[lo:hi] = cand[np.arange(hi - lo), idx]
    return ConvolvedFunction(base=f, delta=delta, kind="sup",
                             values=values, argpoints=argpoints)


def inf_convolve(f: HistoryScalar, delta: float) -> ConvolvedFunction:
    """Inf-envelope through the exact duality ``f_d = -((-f)^d)``."""
    mirrored = HistoryScalar(samples=-f.samples, tgrid=f.tgrid)
    sup = sup_convolve(mirrored, delta)
    return ConvolvedFunction(base=f, delta=sup.delta, kind="inf",
                             values=-sup.values, argpoints=sup.argpoints)


@dataclass(frozen=True)
class EnvelopeItem:
    ok: bool
    measured: float
    bound: float


@dataclass(frozen=True, eq=False)
class EnvelopeReport:
    """One measured-vs-bound entry per envelope property.

    Items: ``ordering`` (f <= f^d <= max f, exact), ``lipschitz_scale``
    (Lip f^d <= C/delta, C = 2 osc + T), ``argpoint_distance``
    (|t - xi|^(2-a) <= 2 M delta), ``uniform_gap``
    (||f^d - f|| <= (2M)^(2/(2-a)) delta^(a/(2-a))) and
    ``holder_preserved`` (Holder constant of f^d <= 16 C M).  The last
    two distance/gap bounds carry the grid slack ``2 dt^a M``.
    """

    delta: float
    holder_constant: float
    holder_exponent: float
    items: dict

    @property
    def all_ok(self) -> bool:
        return all(item.ok for item in self.items.values())

    def to_json_dict(self) -> dict:
        return {
            "delta": self.delta,
            "holder_constant": self.holder_constant,
            "holder_exponent": self.holder_exponent,
            "items": {
                name: {"ok": item.ok, "measured": item.measured,
                       "bound": item.bound}
                for name, item in self.items.items()
            },
            "all_ok": self.all_ok,
        }


def _grid_holder_constant(values: np.ndarray, t: np.ndarray, exponent: float) -> float:
    """Max of |v_n - v_m| / |t_n - t_m|^exponent over all node pairs."""
    best = 0.0
    n = values.size
    for m in range(1, n):
        ratios = np.abs(values[m:] - values[:-m]) / (t[m:] - t[:-m]) ** exponent
        best = max(best, float(np.max(ratios)))
    return best


def envelope_report(f: HistoryScalar, delta: float, holder) -> EnvelopeReport:
    """Measure the envelope properties of ``f`` against their bounds.

    ``holder = (M, a)`` declares that ``f`` is ``a``-Holder with
    constant ``M`` on the grid; the declaration is certified first by a
    brute-force scan and a ``ValueError`` is raised if it fails, since
    every bound below is conditional on it.
    """
    holder_m, exponent = (float(holder[0]), float(holder[1]))
    if holder_m < 0.0:
        raise ValueError(f"Holder constant must be nonnegative, got {holder_m}")
    if not 0.0 < exponent <= 1.0:
        raise ValueError(f"Holder exponent must lie in (0, 1], got {exponent}")

    samples = f.samples
    n = samples.size
    if n < 2:
        raise ValueError("envelope report needs at least two samples")
    t = f.tgrid.times()[:n]
    t_final = float(t[-1])
    dt = f.tgrid.dt

    measured_m = _grid_holder_constant(samples, t, exponent)
    if measured_m > holder_m * (1.0 + 1e-9) + 1e-12:
        raise ValueError(
            f"certification failed: measured Holder constant {measured_m:.6g} "
            f"exceeds the declared {holder_m:.6g}"
        )

    env = sup_convolve(f, delta)
    values = env.values
    slack = 2.0 * dt ** exponent * holder_m

    # (a) ordering: f <= f^d <= max f, exactly.
    violation = max(float(np.max(samples - values)),
                    float(np.max(values) - float(np.max(samples))))
    ordering = EnvelopeItem(ok=bool(violation <= 1e-12), measured=violation,
                            bound=0.0)

    # (b) Lipschitz in t at scale 1/delta.
    osc = float(np.max(samples) - np.min(samples))
    c_scale = 2.0 * osc + t_final
    lip_measured = float(np.max(np.abs(np.diff(values)))) / dt
    lip_bound = c_scale / delta
    lipschitz_scale = EnvelopeItem(ok=bool(lip_measured <= lip_bound),
                                   measured=lip_measured, bound=lip_bound)

    # (c) the maximizer stays within a delta-sized neighbourhood.
    arg_gap = float(np.max(np.abs(t - t[env.argpoints]) ** (2.0 - exponent)))
    arg_bound = 2.0 * holder_m * delta + slack
    argpoint_distance = EnvelopeItem(ok=bool(arg_gap <= arg_bound),
                                     measured=arg_gap, bound=arg_bound)

    # (d) uniform envelope-to-function gap.
    gap = float(np.max(values - samples))
    gap_bound = ((2.0 * holder_m) ** (2.0 / (2.0 - exponent))
                 * delta ** (exponent / (2.0 - exponent)) + slack)
    uniform_gap = EnvelopeItem(ok=bool(gap <= gap_bound), measured=gap,
                               bound=gap_bound)

    # (e) the envelope keeps the Holder class, constant-factor slack.
    env_holder = _grid_holder_constant(values, t, exponent)
    holder_bound = 16.0 * c_scale * holder_m
    holder_preserved = EnvelopeItem(ok=bool(env_holder <= holder_bound),
                                    measured=env_holder, bound=holder_bound)

    return EnvelopeReport(
        delta=float(delta),
        holder_constant=holder_m,
        holder_exponent=exponent,
        items={
            "ordering": ordering,
            "lipschitz_scale": lipschitz_scale,
            "argpoint_distance": argpoint_distance,
            "uniform_gap": uniform_gap,
            "holder_preserved": holder_preserved,
        },
    )


def envelope_error_constant(frac: FracOrder, holder_m: float, delta: float) -> float:
    """The vanishing constant ``2^(a+2) a M^(2-a) / Gamma(1-a) * delta^((1-a)/4)``
    controlling the envelope substitution error in the memory derivative.

    Monotone in ``delta`` and zero for ``M = 0``.
    """
    holder_m = float(holder_m)
    delta = float(delta)
    if holder_m < 0.0:
        raise ValueError(f"Holder constant must be nonnegative, got {holder_m}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"aperture must lie in (0, 1), got {delta}")
    a = frac.alpha
    return (2.0 ** (a + 2.0) * a * holder_m ** (2.0 - a)
            / gamma(1.0 - a) * delta ** ((1.0 - a) / 4.0))

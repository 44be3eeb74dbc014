"""Hamiltonians on the unit torus and the monotone fluxes built from them.

The workhorse family is eikonal-plus-potential, ``H(y, p) = |p| + V(y)``
with a smooth 1-periodic potential.  It is coercive in ``p``, Lipschitz
in both arguments, and its cell problem admits an independent
closed-form reference, which is what the verification layers lean on.
Arbitrary periodic Hamiltonians enter through the ``custom`` factory as
long as their Lipschitz/coercivity data is supplied.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fraccalc import FracOrder

__all__ = [
    "HamiltonianSpec",
    "InitialData",
    "lax_friedrichs",
    "godunov_eikonal",
    "barrier_constant",
]

_EIKONAL_KINDS = ("eikonal", "eikonal_potential", "eikonal_plus_constant")


@dataclass(frozen=True)
class HamiltonianSpec:
    """A periodic Hamiltonian ``H(y, p)`` with its regularity constants.

    ``lip_y`` and ``lip_p`` bound the Lipschitz constants in the fast
    variable and the gradient; ``(coercivity_low, coercivity_off)``
    certify ``H(y, p) >= coercivity_low * |p| - coercivity_off``.
    Monotone fluxes and time steppers size their dissipation from these
    numbers, so custom Hamiltonians must state them honestly.
    """

    kind: str
    amplitude: float = 0.0
    frequency: int = 1
    offset: float = 0.0
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    lip_y: float = 0.0
    lip_p: float = 1.0
    coercivity_low: float = 1.0
    coercivity_off: float = 0.0

    # -- factories ---------------------------------------------------

    @classmethod
    def eikonal(cls) -> "HamiltonianSpec":
        """``H(y, p) = |p|``."""
        return cls(kind="eikonal")

    @classmethod
    def eikonal_potential(cls, amplitude: float = 1.0, frequency: int = 1) -> "HamiltonianSpec":
        """``H(y, p) = |p| + A * cos(2 pi k y)``."""
        amplitude = float(amplitude)
        frequency = int(frequency)
        if frequency < 1:
            raise ValueError(f"potential frequency must be a positive integer, got {frequency}")
        if not np.isfinite(amplitude):
            raise ValueError("potential amplitude must be finite")
        return cls(kind="eikonal_potential", amplitude=amplitude, frequency=frequency,
                   lip_y=2.0 * np.pi * frequency * abs(amplitude),
                   coercivity_off=abs(amplitude))

    @classmethod
    def eikonal_plus_constant(cls, offset: float) -> "HamiltonianSpec":
        """``H(y, p) = |p| + c``; trivially homogenizes to itself."""
        offset = float(offset)
        if not np.isfinite(offset):
            raise ValueError("offset must be finite")
        return cls(kind="eikonal_plus_constant", offset=offset,
                   coercivity_off=max(-offset, 0.0))

    @classmethod
    def custom(cls, fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
               lip_y: float, lip_p: float, coercivity_low: float,
               coercivity_off: float = 0.0) -> "HamiltonianSpec":
        """Wrap a vectorised ``fn(y, p)`` with stated constants."""
        lip_y, lip_p = float(lip_y), float(lip_p)
        coercivity_low, coercivity_off = float(coercivity_low), float(coercivity_off)
        if lip_p <= 0.0:
            raise ValueError(f"lip_p must be positive, got {lip_p}")
        if lip_y < 0.0 or coercivity_low < 0.0 or coercivity_off < 0.0:
            raise ValueError("lip_y and coercivity constants must be nonnegative")
        return cls(kind="custom", fn=fn, lip_y=lip_y, lip_p=lip_p,
                   coercivity_low=coercivity_low, coercivity_off=coercivity_off)

    # -- evaluation --------------------------------------------------

    @property
    def is_eikonal_family(self) -> bool:
        return self.kind in _EIKONAL_KINDS

    def potential(self, y):
        """``V(y) = H(y, 0)`` for the eikonal family."""
        if not self.is_eikonal_family:
            raise ValueError(f"no additive potential for kind {self.kind!r}")
        y = np.asarray(y, dtype=float)
        if self.kind == "eikonal_potential":
            return self.amplitude * np.cos(2.0 * np.pi * self.frequency * y)
        if self.kind == "eikonal_plus_constant":
            return np.full_like(y, self.offset)
        return np.zeros_like(y)

    def eval(self, y, p):
        """Pointwise ``H(y, p)``; broadcasts like numpy."""
        y = np.asarray(y, dtype=float)
        p = np.asarray(p, dtype=float)
        if self.is_eikonal_family:
            out = np.abs(p) + self.potential(y)
        else:
            if self.fn is None:
                raise ValueError("custom Hamiltonian is missing its callable")
            out = np.asarray(self.fn(y, p), dtype=float)
        if out.ndim == 0:
            return float(out)
        return out

    def max_on_slope_ball(self, radius: float) -> float:
        """``max { H(y, p) : y in torus, |p| <= radius }``.

        Closed form for the eikonal family; a dense sample otherwise.
        """
        radius = float(radius)
        if radius < 0.0:
            raise ValueError(f"slope radius must be nonnegative, got {radius}")
        if self.kind == "eikonal":
            return radius
        if self.kind == "eikonal_potential":
            return radius + abs(self.amplitude)
        if self.kind == "eikonal_plus_constant":
            return radius + self.offset
        y = np.linspace(0.0, 1.0, 2049)
        p = np.linspace(-radius, radius, 513)
        vals = self.eval(y[:, None], p[None, :])
        return float(np.max(vals))


def lax_friedrichs(h: HamiltonianSpec, y, p_minus, p_plus, theta: float):
    """Lax-Friedrichs numerical Hamiltonian.

    ``H(y, (p- + p+)/2) - theta/2 * (p+ - p-)``; monotone in each
    one-sided slope once ``theta`` dominates the gradient Lipschitz
    constant, which is required up front.
    """
    theta = float(theta)
    if theta < h.lip_p:
        raise ValueError(
            f"dissipation theta={theta} below the gradient Lipschitz bound {h.lip_p}"
        )
    p_minus = np.asarray(p_minus, dtype=float)
    p_plus = np.asarray(p_plus, dtype=float)
    return h.eval(y, 0.5 * (p_minus + p_plus)) - 0.5 * theta * (p_plus - p_minus)


def godunov_eikonal(h: HamiltonianSpec, y, p_minus, p_plus):
    """Exact upwind flux for ``H(y, p) = |p| + V(y)``.

    The Godunov state for ``|.|`` is ``max(p-^+, (-p+)^+)``; no extra
    dissipation term, hence no smearing of kinks.
    """
    if not h.is_eikonal_family:
        raise ValueError("Godunov flux implemented for the eikonal family only")
    p_minus = np.asarray(p_minus, dtype=float)
    p_plus = np.asarray(p_plus, dtype=float)
    grad = np.maximum(np.maximum(p_minus, -p_plus), 0.0)
    return h.eval(y, grad)


@dataclass(frozen=True)
class InitialData:
    """Periodic initial condition with a known Lipschitz constant."""

    kind: str
    amplitude: float = 0.0
    frequency: int = 1
    lip: float = 0.0

    @classmethod
    def zero(cls) -> "InitialData":
        return cls(kind="zero")

    @classmethod
    def cosine(cls, amplitude: float, frequency: int = 1) -> "InitialData":
        amplitude = float(amplitude)
        frequency = int(frequency)
        if frequency < 1:
            raise ValueError(f"frequency must be a positive integer, got {frequency}")
        return cls(kind="cosine", amplitude=amplitude, frequency=frequency,
                   lip=2.0 * np.pi * frequency * abs(amplitude))

    @classmethod
    def hat(cls, amplitude: float) -> "InitialData":
        """Mean-zero triangle wave with corners, range ``[-A, A]``."""
        amplitude = float(amplitude)
        return cls(kind="hat", amplitude=amplitude, lip=4.0 * abs(amplitude))

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            out = np.zeros_like(x)
        elif self.kind == "cosine":
            out = self.amplitude * np.cos(2.0 * np.pi * self.frequency * x)
        elif self.kind == "hat":
            frac = np.mod(x, 1.0)
            out = self.amplitude * (4.0 * np.minimum(frac, 1.0 - frac) - 1.0)
        else:
            raise ValueError(f"unknown initial data kind {self.kind!r}")
        if out.ndim == 0:
            return float(out)
        return out


def barrier_constant(h: HamiltonianSpec, u0: InitialData, frac: FracOrder) -> float:
    """Growth constant of the flat barriers above and below the evolution.

    Comparison with ``u0(x) -/+ M * t^alpha`` confines the solution for
    ``M = max { H(y, p) : y in torus, |p| <= Lip u0 }``; this returns
    that maximum divided by ``Gamma(1 - alpha)``, the normalisation in
    which the memory derivative of the barrier envelope is computed.
    """
    return h.max_on_slope_ball(u0.lip) / frac.gamma_1_minus_alpha

"""Planar two-body problem with a Kepler term plus an anisotropic inverse-power term.

The potential is U(x, y) = -1/sqrt(x^2 + y^2) - b/(mu*x^2 + y^2)^(beta/2) with
anisotropy mu >= 1, coupling b > 0 and exponent beta.  This module holds the
unregularized Hamiltonian system and the discrete symmetry group of the flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "DomainError",
    "Params",
    "CartesianState",
    "SymmetryId",
    "potential",
    "grad_potential",
    "cartesian_field",
    "cartesian_rhs",
    "hamiltonian",
    "apply_symmetry",
    "compose_symmetries",
]

ORIGIN_RADIUS = 1e-12  # states closer to collision than this are rejected


class DomainError(ValueError):
    """Evaluation requested at a singular point (e.g. the collision at the origin)."""


@dataclass(frozen=True)
class Params:
    """Problem constants: exponent beta, anisotropy mu, coupling b, energy level h.

    mu >= 1 and b > 0 are enforced here; bounds on beta differ between the
    regularized analyses (beta > 2 or beta = 2) and the perturbative one
    (beta > 3/2), so each operation checks the bound it needs.
    """

    beta: float
    mu: float
    b: float
    h: float = 0.0

    def __post_init__(self):
        for name in ("beta", "mu", "b", "h"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.mu < 1.0:
            raise ValueError("mu must satisfy mu >= 1")
        if self.b <= 0.0:
            raise ValueError("b must be positive")

    @property
    def epsilon(self) -> float:
        """Anisotropy strength mu - 1 (never stored independently)."""
        return self.mu - 1.0

    def require_beta_above(self, bound: float, strict: bool = True) -> None:
        ok = self.beta > bound if strict else self.beta >= bound
        if not ok:
            op = ">" if strict else ">="
            raise ValueError(f"operation requires beta {op} {bound}, got beta={self.beta}")

    def require_beta_equal(self, value: float) -> None:
        if self.beta != value:
            raise ValueError(f"operation requires beta = {value}, got beta={self.beta}")


@dataclass(frozen=True)
class CartesianState:
    x: float
    y: float
    px: float
    py: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.px, self.py])

    @staticmethod
    def from_array(y: np.ndarray) -> "CartesianState":
        return CartesianState(*map(float, y))

    @property
    def radius(self) -> float:
        return math.hypot(self.x, self.y)


def _check_off_origin(x: float, y: float) -> None:
    if math.hypot(x, y) < ORIGIN_RADIUS:
        raise DomainError("state at the collision singularity (x, y) = (0, 0)")


def potential(s: CartesianState, p: Params) -> float:
    _check_off_origin(s.x, s.y)
    q = p.mu * s.x * s.x + s.y * s.y
    return -1.0 / math.hypot(s.x, s.y) - p.b / q ** (p.beta / 2.0)


def grad_potential(s: CartesianState, p: Params) -> tuple[float, float]:
    """Gradient of the potential; agrees with central finite differences."""
    _check_off_origin(s.x, s.y)
    r3 = math.hypot(s.x, s.y) ** 3
    q = p.mu * s.x * s.x + s.y * s.y
    aniso = p.b * p.beta * q ** (-(p.beta + 2.0) / 2.0)
    return (s.x / r3 + aniso * p.mu * s.x, s.y / r3 + aniso * s.y)


def cartesian_field(s: CartesianState, p: Params) -> np.ndarray:
    """(dx, dy, dpx, dpy) = (px, py, -dU/dx, -dU/dy)."""
    ux, uy = grad_potential(s, p)
    return np.array([s.px, s.py, -ux, -uy])


def cartesian_rhs(p: Params):
    """Vector-field closure for the integrator, guarding the origin."""

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        return cartesian_field(CartesianState(*y), p)

    return rhs


def hamiltonian(s: CartesianState, p: Params) -> float:
    return 0.5 * (s.px * s.px + s.py * s.py) + potential(s, p)


class SymmetryId(Enum):
    """Sign actions on (x, y, px, py, t); the eight maps form a Z2 x Z2 x Z2 group."""

    ID = (1, 1, 1, 1, 1)
    S0 = (1, 1, -1, -1, -1)
    S1 = (1, -1, -1, 1, -1)
    S2 = (-1, 1, 1, -1, -1)
    S3 = (-1, -1, -1, -1, 1)
    S4 = (-1, 1, -1, 1, 1)
    S5 = (1, -1, 1, -1, 1)
    S6 = (-1, -1, 1, 1, -1)

    @property
    def time_sign(self) -> int:
        return self.value[4]


_BY_SIGNS = {g.value: g for g in SymmetryId}


def apply_symmetry(g: SymmetryId, s: CartesianState, t: float) -> tuple[CartesianState, float]:
    sx, sy, spx, spy, st = g.value
    return CartesianState(sx * s.x, sy * s.y, spx * s.px, spy * s.py), st * t


def compose_symmetries(g1: SymmetryId, g2: SymmetryId) -> SymmetryId:
    """g1 after g2; sign vectors multiply componentwise, so the set is closed."""
    signs = tuple(a * b for a, b in zip(g1.value, g2.value))
    return _BY_SIGNS[signs]

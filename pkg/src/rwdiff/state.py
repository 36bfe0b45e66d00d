"""Phase-space points of the diffusion and its temporal/spherical parts."""

from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import Optional

import numpy as np

from .errors import DegenerateVelocityError, ParameterError


@dataclass(frozen=True)
class TemporalState:
    t: float
    tdot: float

    def __post_init__(self):
        if not self.t > 0:
            raise ParameterError("cosmological time t must be positive")
        if not self.tdot >= 1.0:
            raise ParameterError(f"tdot must be >= 1, got {self.tdot}")

    @property
    def rapidity(self):
        return math.acosh(self.tdot)


@dataclass(frozen=True, eq=False)
class SphericalState:
    temporal: TemporalState
    theta: np.ndarray

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float).reshape(3)
        if abs(np.linalg.norm(theta) - 1.0) > 1e-12:
            raise ParameterError("theta must be a unit vector")
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)

    @classmethod
    def from_direction(cls, t, tdot, direction):
        v = np.asarray(direction, dtype=float)
        return cls(TemporalState(t, tdot), v / np.linalg.norm(v))

    @property
    def t(self):
        return self.temporal.t

    @property
    def tdot(self):
        return self.temporal.tdot


@dataclass(frozen=True, eq=False)
class UnitTangentState:
    t: float
    x: np.ndarray
    tdot: float
    xdot: np.ndarray

    def __post_init__(self):
        if not self.t > 0:
            raise ParameterError("cosmological time t must be positive")
        if not self.tdot >= 1.0:
            raise ParameterError(f"tdot must be >= 1, got {self.tdot}")
        for name in ("x", "xdot"):
            v = np.array(getattr(self, name), dtype=float).reshape(3)
            v.setflags(write=False)
            object.__setattr__(self, name, v)


def to_full(e: SphericalState, x, model) -> UnitTangentState:
    """Attach a spatial position; xdot = theta * sqrt(tdot^2 - 1) / alpha(t)."""
    speed = math.sqrt((e.tdot - 1.0) * (e.tdot + 1.0))
    xdot = e.theta * (speed / model.alpha(e.t))
    return UnitTangentState(e.t, np.asarray(x, dtype=float), e.tdot, xdot)


def to_spherical(u: UnitTangentState):
    """Split a unit tangent vector into ``(SphericalState, x)``."""
    norm = float(np.linalg.norm(u.xdot))
    if norm == 0.0:
        raise DegenerateVelocityError(
            "xdot = 0 (tdot = 1): the direction theta is undefined; perturb the start "
            "or use the temporal dynamics only"
        )
    return SphericalState(TemporalState(u.t, u.tdot), u.xdot / norm), np.array(u.x)


def pseudo_norm_defect(u: UnitTangentState, model) -> float:
    """Signed defect tdot^2 - 1 - alpha(t)^2 |xdot|^2 (zero on the unit tangent bundle)."""
    spatial = model.alpha(u.t) * float(np.linalg.norm(u.xdot))
    return (u.tdot - 1.0) * (u.tdot + 1.0) - spatial * spatial


@dataclass
class SamplePath:
    """A trajectory recorded on a uniform proper-time grid.

    ``speed`` holds sqrt(tdot^2 - 1) = alpha |xdot|, kept separately from
    ``tdot`` because it carries the precision that ``tdot`` loses close to 1.
    ``clock``, ``theta`` and ``x`` are present for spherical and full paths.
    """

    step: float
    s: np.ndarray
    t: np.ndarray
    tdot: np.ndarray
    speed: np.ndarray
    clock: Optional[np.ndarray] = None
    theta: Optional[np.ndarray] = None
    x: Optional[np.ndarray] = None
    kind: str = "temporal"
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.s)

    @property
    def horizon(self):
        return float(self.s[-1] - self.s[0])

    def temporal_state(self, i) -> TemporalState:
        return TemporalState(float(self.t[i]), max(float(self.tdot[i]), 1.0))

    def spherical_state(self, i) -> SphericalState:
        if self.theta is None:
            raise ValueError("path carries no spherical component")
        return SphericalState(self.temporal_state(i), self.theta[i] / np.linalg.norm(self.theta[i]))

    def full_state(self, i, model) -> UnitTangentState:
        if self.x is None:
            raise ValueError("path carries no spatial component")
        xdot = self.theta[i] * (self.speed[i] / model.alpha(float(self.t[i])))
        return UnitTangentState(float(self.t[i]), self.x[i], max(float(self.tdot[i]), 1.0), xdot)

    def check_invariants(self):
        """Raise AssertionError if t is not strictly increasing or the clock decreases."""
        if np.any(np.diff(self.t) <= 0):
            raise AssertionError("t is not strictly increasing along the path")
        if self.clock is not None and np.any(np.diff(self.clock) < 0):
            raise AssertionError("clock decreases along the path")

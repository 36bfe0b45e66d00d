"""Expansion functions of a spatially flat Robertson-Walker space-time.

Two closed-form families are supported::

    exponential         alpha(t) = exp(H t)
    power_exponential   alpha(t) = exp(H t) * (1 + t)**p,   p >= 0

Both are increasing and log-concave with Hubble function
H(t) = alpha'/alpha decreasing to H_inf > 0.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy import integrate

from .errors import DomainError, ParameterError, QuadratureError

EXPONENTIAL = "exponential"
POWER_EXPONENTIAL = "power_exponential"
FAMILIES = (EXPONENTIAL, POWER_EXPONENTIAL)

# integer codes understood by the compiled kernels
_KIND_CODES = {EXPONENTIAL: 0, POWER_EXPONENTIAL: 1}


@dataclass(frozen=True)
class ExpansionModel:
    family: str = EXPONENTIAL
    h_infinity: float = 1.0
    p: float = 0.0
    t_min: float = 1e-9

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown expansion family {self.family!r}")
        if not (self.h_infinity > 0 and math.isfinite(self.h_infinity)):
            raise ParameterError("h_infinity must be a positive finite number")
        if not self.p >= 0:
            raise ParameterError("p must be nonnegative")
        if self.family == EXPONENTIAL and self.p != 0:
            raise ParameterError("the exponential family takes no exponent p")
        if not self.t_min > 0:
            raise ParameterError("t_min must be positive")

    @classmethod
    def pure_exponential(cls, h_infinity, t_min=1e-9):
        return cls(EXPONENTIAL, float(h_infinity), 0.0, t_min)

    @classmethod
    def power_exponential(cls, h_infinity, p, t_min=1e-9):
        return cls(POWER_EXPONENTIAL, float(h_infinity), float(p), t_min)

    @classmethod
    def from_dict(cls, data):
        family = data.get("family", EXPONENTIAL)
        h = float(data.get("h_infinity", 1.0))
        if family == EXPONENTIAL:
            return cls.pure_exponential(h)
        return cls.power_exponential(h, float(data.get("p", 0.0)))

    def to_dict(self):
        return {"family": self.family, "h_infinity": self.h_infinity, "p": self.p}

    @property
    def kernel_params(self):
        """``(kind, h_infinity, p)`` in the form the numba kernels take."""
        return _KIND_CODES[self.family], float(self.h_infinity), float(self.p)

    def _check(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(~(t > self.t_min)):
            raise DomainError(f"expansion quantities need t > t_min={self.t_min}")
        return t

    @staticmethod
    def _out(values):
        return values.item() if np.ndim(values) == 0 else values

    # -- closed forms -------------------------------------------------

    def log_alpha(self, t):
        t = self._check(t)
        out = self.h_infinity * t
        if self.p:
            out = out + self.p * np.log1p(t)
        return self._out(out)

    def alpha(self, t):
        return self._out(np.exp(self.log_alpha(t)))

    def hubble(self, t):
        t = self._check(t)
        out = self.h_infinity + self.p / (1.0 + t)
        return self._out(np.asarray(out, dtype=float))

    def hubble_derivative(self, t):
        t = self._check(t)
        return self._out(np.asarray(-self.p / (1.0 + t) ** 2, dtype=float))

    def hubble_limit(self):
        return self.h_infinity

    def alpha_prime(self, t):
        return self._out(np.asarray(self.hubble(t)) * self.alpha(t))

    def alpha_second(self, t):
        # alpha''/alpha = H' + H^2
        h = np.asarray(self.hubble(t))
        return self._out((np.asarray(self.hubble_derivative(t)) + h * h) * self.alpha(t))

    def christoffel(self, t):
        """Nonzero Christoffel values ``(Gamma^0_ii, Gamma^i_0i) = (alpha alpha', H)``."""
        h = self.hubble(t)
        a = self.alpha(t)
        return h * a * a, h

    def scalar_curvature(self, t):
        h = np.asarray(self.hubble(t))
        out = -6.0 * (np.asarray(self.hubble_derivative(t)) + 2.0 * h * h)
        return self._out(out)

    # -- tail of 1/alpha ----------------------------------------------

    def _tail_ratio(self, t):
        """alpha(t) * int_t^inf du/alpha(u), a number in (0, 1/H_inf]."""
        if self.p == 0:
            return 1.0 / self.h_infinity
        h, p, base = self.h_infinity, self.p, 1.0 + t

        def integrand(v):
            return math.exp(-h * v - p * math.log1p(v / base))

        value, abserr = integrate.quad(integrand, 0.0, math.inf, epsabs=1e-13, epsrel=1e-11, limit=200)
        if not math.isfinite(value) or abserr > 1e-9 * max(value, 1e-300):
            raise QuadratureError(f"tail integral of 1/alpha did not converge at t={t} (err {abserr:.2e})")
        return value

    def log_inv_alpha_tail(self, t):
        """log of int_t^inf du/alpha(u); finite even where the tail underflows."""
        t = float(self._check(t))
        return math.log(self._tail_ratio(t)) - self.log_alpha(t)

    def inv_alpha_tail(self, t):
        """int_t^inf du/alpha(u).

        Closed form for the exponential family, adaptive quadrature after
        factoring out 1/alpha(t) otherwise. Underflows cleanly to 0.0 for
        large t; use ``log_inv_alpha_tail`` when the magnitude matters.
        """
        if np.ndim(t):
            return np.array([self.inv_alpha_tail(float(v)) for v in np.ravel(t)]).reshape(np.shape(t))
        if math.isinf(t):
            return 0.0
        return math.exp(self.log_inv_alpha_tail(t))

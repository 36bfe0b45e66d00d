"""The invariant law of tdot for a constant Hubble rate.

For positive ``a`` and ``b`` the probability density on (1, inf) is

    nu_{a,b}(x) = C * sqrt(x^2 - 1) * exp(-c x),    c = 2 a / b^2.

Every integral is taken after the substitution x = cosh(r), which turns
the integrand into a smooth function on [0, inf). Modified Bessel
functions come from direct quadrature of their integral representation
(see ``bessel_k``) and serve as closed-form cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np
from scipy import integrate, optimize

from .errors import ParameterError, QuadratureError

QUAD_EPSABS = 1e-9
QUAD_EPSREL = 1e-9


def _r_cutoff(c):
    """Rapidity past which exp(-c (cosh r - 1)) sinh(r)^2 is below 1e-300."""
    return math.acosh(1.0 + 700.0 / c) + 1.0


def _quad(func, lo, hi, what="integral", epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL):
    value, abserr = integrate.quad(func, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=400)
    if not math.isfinite(value) or abserr > 10 * max(epsabs, epsrel * abs(value)):
        raise QuadratureError(f"{what}: quadrature did not converge (estimate {value}, error {abserr:.2e})")
    return value


def bessel_k(nu, c):
    """K_nu(c) = int_0^inf exp(-c cosh r) cosh(nu r) dr, by adaptive quadrature."""
    if not c > 0:
        raise ParameterError("bessel_k needs c > 0")

    # exp(-c) factored out so large c does not underflow the integrand
    def integrand(r):
        base = -c * (math.cosh(r) - 1.0)
        return 0.5 * (math.exp(base + nu * r) + math.exp(base - nu * r))

    hi = _r_cutoff(c) + abs(nu)
    return math.exp(-c) * _quad(integrand, 0.0, hi, what=f"K_{nu}({c})", epsabs=1e-13, epsrel=1e-12)


@dataclass(frozen=True)
class InvariantMeasure:
    a: float
    b: float
    c: float
    log_norm_constant: float
    _table: dict = field(default=None, repr=False, compare=False)

    @property
    def norm_constant(self):
        return math.exp(self.log_norm_constant)

    @property
    def r_max(self):
        return _r_cutoff(self.c)

    # -- pointwise quantities ----------------------------------------

    def density(self, x):
        x = np.asarray(x, dtype=float)
        inside = x > 1.0
        xs = np.where(inside, x, 2.0)
        log_tail = self.log_norm_constant - self.c * xs
        out = np.where(inside, np.sqrt((xs - 1.0) * (xs + 1.0)) * np.exp(log_tail), 0.0)
        return out.item() if out.ndim == 0 else out

    def _weight(self, r):
        """Density of r where x = cosh(r): C sinh(r)^2 exp(-c cosh r)."""
        sh = math.sinh(r)
        return sh * sh * math.exp(self.log_norm_constant - self.c * math.cosh(r))

    def expectation(self, f):
        """nu(f) for a scalar function f of x, by quadrature in r = arccosh(x)."""
        return _quad(lambda r: f(math.cosh(r)) * self._weight(r), 0.0, self.r_max, what="expectation")

    def moment_of_speed(self, g):
        """nu(g(sqrt(x^2 - 1))) evaluated without forming x^2 - 1."""
        return _quad(lambda r: g(math.sinh(r)) * self._weight(r), 0.0, self.r_max, what="expectation")

    @cached_property
    def mean(self):
        return self.expectation(lambda x: x)

    @cached_property
    def variance(self):
        second = self.expectation(lambda x: x * x)
        return second - self.mean**2

    def clock_slope(self, sigma=None):
        """Long-run growth rate sigma^2 * nu(1 / (x^2 - 1)) of the clock.

        ``sigma`` defaults to ``b``, the noise level for which this measure
        is invariant.
        """
        sigma = self.b if sigma is None else sigma
        # sinh^2 cancels against 1/(x^2-1); integrand is C exp(-c cosh r)
        core = _quad(lambda r: math.exp(-self.c * (math.cosh(r) - 1.0)), 0.0, self.r_max, what="clock slope")
        return sigma * sigma * math.exp(self.log_norm_constant - self.c) * core

    # -- distribution function ---------------------------------------

    _PANELS = 3000
    _ORDER = 10

    def _tabulate(self):
        # remaining mass beyond r_max is below ~1e-17
        r_max = math.acosh(1.0 + 45.0 / self.c) + 1.0
        edges = np.linspace(0.0, r_max, self._PANELS + 1)
        nodes, weights = np.polynomial.legendre.leggauss(self._ORDER)
        h = edges[1] - edges[0]
        r = edges[:-1, None] + 0.5 * h * (nodes[None, :] + 1.0)
        mass = 0.5 * h * (self._weight_vec(r) * weights).sum(axis=1)
        cum = np.concatenate([[0.0], np.cumsum(mass)])
        # rescale by the tabulated total (off from 1 by rounding only) so cdf(inf) == 1
        total = cum[-1]
        cum /= total
        return {"edges": edges, "cum": cum, "h": h, "nodes": nodes, "weights": weights, "r_max": r_max, "total": total}

    def _weight_vec(self, r):
        sh = np.sinh(r)
        return sh * sh * np.exp(self.log_norm_constant - self.c * np.cosh(r))

    @property
    def table(self):
        if self._table is None:
            object.__setattr__(self, "_table", self._tabulate())
        return self._table

    def cdf(self, x):
        """nu((1, x]); vectorised composite Gauss-Legendre quadrature in r."""
        tab = self.table
        x = np.asarray(x, dtype=float)
        r = np.arccosh(np.clip(x, 1.0, None))
        r = np.minimum(r, tab["r_max"])
        idx = np.minimum((r / tab["h"]).astype(np.int64), self._PANELS - 1)
        lo = tab["edges"][idx]
        half = 0.5 * (r - lo)
        pts = lo[..., None] + half[..., None] * (tab["nodes"] + 1.0)
        partial = half * (self._weight_vec(pts) * tab["weights"]).sum(axis=-1) / tab["total"]
        out = np.clip(tab["cum"][idx] + partial, 0.0, 1.0)
        out = np.where(x <= 1.0, 0.0, out)
        return out.item() if out.ndim == 0 else out

    def ppf(self, q):
        if not 0.0 < q < 1.0:
            raise ParameterError("quantile level must lie in (0, 1)")
        hi = 2.0
        while self.cdf(hi) < q:
            hi = 1.0 + 2.0 * (hi - 1.0)
        return optimize.brentq(lambda v: self.cdf(v) - q, 1.0, hi, xtol=1e-13, rtol=1e-13)

    @cached_property
    def median(self):
        return self.ppf(0.5)

    # -- exact sampling ----------------------------------------------

    def sample(self, rng, size=None):
        """Exact draws by rejection from the proposal density proportional to x exp(-c x).

        The proposal is 1 + Gamma(k, 1/c) with k = 1 w.p. c/(c+1) and k = 2
        otherwise; a candidate is accepted with probability sqrt(x^2-1)/x.
        """
        n = 1 if size is None else int(size)
        out = np.empty(n)
        filled = 0
        while filled < n:
            batch = max(64, int(1.3 * (n - filled) * self.mean) + 16)
            shape = np.where(rng.random(batch) < self.c / (self.c + 1.0), 1.0, 2.0)
            x = 1.0 + rng.gamma(shape, 1.0 / self.c)
            keep = x[rng.random(batch) * x < np.sqrt((x - 1.0) * (x + 1.0))]
            take = min(len(keep), n - filled)
            out[filled : filled + take] = keep[:take]
            filled += take
        return out[0] if size is None else out


def make_measure(a, b) -> InvariantMeasure:
    """Build nu_{a,b}, computing its normalising constant by quadrature."""
    if not (a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b)):
        raise ParameterError(f"invariant measure needs a > 0 and b > 0, got a={a}, b={b}")
    c = 2.0 * a / (b * b)

    def integrand(r):
        sh = math.sinh(r)
        return sh * sh * math.exp(-c * (math.cosh(r) - 1.0))

    scaled = _quad(integrand, 0.0, _r_cutoff(c), what="normalising constant", epsabs=1e-13, epsrel=1e-12)
    return InvariantMeasure(float(a), float(b), c, c - math.log(scaled))

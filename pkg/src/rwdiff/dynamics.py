"""Integrators for the relativistic diffusion on a flat Robertson-Walker space-time.

Paths are produced by the compiled loops in ``_kernels``. The reference
generator is the factorised representation: the temporal pair (t, tdot),
the clock C_s = sigma^2 int ds / (tdot^2 - 1), a spherical Brownian motion
run at clock time for the direction theta, and dx = theta sqrt(tdot^2-1)/alpha ds.
The direct integrator of the 8-dimensional system serves as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from . import _kernels as K
from .errors import (
    DegenerateClockError,
    DegenerateVelocityError,
    DomainError,
    NumericalRankError,
    ParameterError,
    PseudoNormBlowupError,
)
from .state import (
    SamplePath,
    SphericalState,
    TemporalState,
    UnitTangentState,
    pseudo_norm_defect,
    to_spherical,
)
from .streams import as_generator

TEMPORAL_SCHEMES = ("lifted", "implicit", "euler")


@dataclass(frozen=True)
class IntegratorConfig:
    """Step size, noise level and horizon, all in proper time.

    ``stride`` thins the recorded grid (the integration step is unchanged)
    and ``max_dc`` caps the clock increment of a single spherical step.
    ``scheme`` selects the temporal integrator used by ``simulate_temporal``.
    """

    step: float = 1e-3
    sigma: float = 1.0
    horizon: float = 2000.0
    pn_tolerance: float | None = None
    stride: int = 1
    max_dc: float = 0.01
    scheme: str = "lifted"

    def __post_init__(self):
        problems = []
        if not (self.step > 0 and math.isfinite(self.step)):
            problems.append("step must be positive")
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            problems.append("sigma must be nonnegative")
        if not (self.horizon >= 0 and math.isfinite(self.horizon)):
            problems.append("horizon must be nonnegative")
        elif self.horizon > 0 and not self.step < self.horizon:
            problems.append("step must be smaller than horizon")
        if self.pn_tolerance is not None and not self.pn_tolerance > 0:
            problems.append("pn_tolerance must be positive")
        if not (isinstance(self.stride, (int, np.integer)) and self.stride >= 1):
            problems.append("stride must be a positive integer")
        if not self.max_dc > 0:
            problems.append("max_dc must be positive")
        if self.scheme not in TEMPORAL_SCHEMES:
            problems.append(f"scheme must be one of {TEMPORAL_SCHEMES}")
        if problems:
            raise ParameterError("; ".join(problems))
        if self.pn_tolerance is None:
            object.__setattr__(self, "pn_tolerance", 50.0 * self.step)

    @property
    def n_steps(self):
        return int(round(self.horizon / self.step))

    def with_(self, **changes):
        fields = dict(self.__dict__)
        if "step" in changes and "pn_tolerance" not in changes:
            fields["pn_tolerance"] = None
        fields.update(changes)
        return IntegratorConfig(**fields)


def _grid(cfg):
    n = cfg.n_steps
    idx = np.arange(0, n + 1, cfg.stride)
    if idx[-1] != n:
        idx = np.append(idx, n)
    return n, idx


def _split_rng(rng):
    """(temporal, sphere) generators from a pair, a generator or a seed."""
    if isinstance(rng, tuple):
        return as_generator(rng[0]), as_generator(rng[1])
    gen = as_generator(rng)
    child_t, child_s = gen.spawn(2)
    return child_t, child_s


def _check_t(t, model):
    if not t > model.t_min:
        raise DomainError(f"initial time must exceed t_min={model.t_min}")


# -- temporal part -----------------------------------------------------------


def step_temporal(state: TemporalState, model, cfg: IntegratorConfig, dB) -> TemporalState:
    """Advance (t, tdot) by one step of length cfg.step.

    A scalar increment ``dB ~ N(0, step)`` drives the drift-implicit rapidity
    scheme (or Euler-Maruyama with the clamp tdot >= 1 when
    ``cfg.scheme == "euler"``); a 3-vector drives one lifted step.
    """
    kind, h, p = model.kernel_params
    _check_t(state.t, model)
    ds = cfg.step
    hub = model.hubble(state.t)
    dB = np.asarray(dB, dtype=float)
    if dB.shape == (3,):
        r = state.rapidity
        k = K.drift_rate(r, *K.sinh_cosh(r), hub, cfg.sigma**2) * ds
        y = np.array([r, 0.0, 0.0]) * (1.0 + k) + cfg.sigma * dB
        rn = float(np.linalg.norm(y))
        _, ch = K.sinh_cosh(rn)
        return TemporalState(state.t + state.tdot * ds, max(ch, 1.0))
    if cfg.scheme == "euler":
        tdot = K.euler_tdot_step(state.tdot, hub, cfg.sigma, ds, float(dB))
        return TemporalState(state.t + state.tdot * ds, tdot)
    r = K.implicit_rapidity_step(state.rapidity, hub, cfg.sigma, ds, float(dB))
    return TemporalState(state.t + state.tdot * ds, max(math.cosh(r), 1.0))


def simulate_temporal(init: TemporalState, model, cfg: IntegratorConfig, rng, scheme=None) -> SamplePath:
    scheme = scheme or cfg.scheme
    if scheme not in TEMPORAL_SCHEMES:
        raise ParameterError(f"unknown temporal scheme {scheme!r}")
    _check_t(init.t, model)
    rng = as_generator(rng)
    _, h, p = model.kernel_params
    n, idx = _grid(cfg)
    m = len(idx)
    t, tdot, speed = np.empty(m), np.empty(m), np.empty(m)
    if scheme == "lifted":
        K.run_lifted(rng, rng, init.t, init.rapidity, np.zeros(3), np.zeros(3), h, p, cfg.sigma, cfg.step, n,
                     cfg.stride, K.MODE_TEMPORAL, cfg.max_dc, np.zeros(3), 1.0, -1.0,
                     t, tdot, speed, np.empty(m), np.empty((1, 3)), np.empty((1, 3)))
    else:
        code = K.SCHEME_IMPLICIT if scheme == "implicit" else K.SCHEME_EULER
        K.run_scalar(rng, init.t, init.tdot, h, p, cfg.sigma, cfg.step, n, cfg.stride, code, t, tdot, speed)
    return SamplePath(cfg.step, idx * cfg.step, t, tdot, speed, kind="temporal",
                      diagnostics={"scheme": scheme})


def clock(path: SamplePath, sigma) -> np.ndarray:
    """Trapezoidal clock sigma^2 int ds / (tdot^2 - 1) along a recorded path.

    A start exactly at tdot = 1 is handled by half-weighting the first cell.
    """
    if sigma == 0:
        return np.zeros(len(path))
    speed = np.asarray(path.speed, dtype=float)
    if np.any(speed[1:] <= 0):
        raise DegenerateClockError("tdot = 1 at an interior grid point; the step is too coarse")
    inv = np.empty_like(speed)
    inv[1:] = 1.0 / speed[1:] ** 2
    if speed[0] > 0:
        inv[0] = 1.0 / speed[0] ** 2
        cells = 0.5 * (inv[:-1] + inv[1:])
    else:
        cells = 0.5 * inv[1:]
        cells[1:] += 0.5 * inv[1:-1]
    out = np.zeros(len(speed))
    out[1:] = sigma * sigma * np.cumsum(cells * np.diff(path.s))
    return out


# -- sphere -------------------------------------------------------------------


def sphere_step(theta, dC, rng, max_dc=math.inf) -> np.ndarray:
    """Spherical Brownian motion over clock time dC by exponential-map steps.

    ``max_dc`` splits long clock intervals into sub-steps; by default the
    whole interval is one geodesic step.
    """
    theta = np.asarray(theta, dtype=float)
    if abs(np.linalg.norm(theta) - 1.0) > 1e-10:
        raise ParameterError("theta must be a unit vector")
    if dC < 0:
        raise ParameterError("clock increment must be nonnegative")
    if dC == 0:
        return theta.copy()
    return K.run_sphere(as_generator(rng), theta, float(dC), float(max_dc))


def simulate_spherical(init: SphericalState, model, cfg: IntegratorConfig, rng, watch_cap=None) -> SamplePath:
    """Joint path of (t, tdot, theta) with its clock.

    ``rng`` is a (temporal, sphere) pair of generators or a single generator
    split into two. ``watch_cap=(center, angle, after)`` records in
    ``diagnostics["cap_entry"]`` the first proper time after ``after`` at
    which theta lies within ``angle`` of ``center`` (-1 if never).
    """
    return _run_lifted(init.t, init.temporal.rapidity, init.theta, None, model, cfg, rng, K.MODE_SPHERICAL, watch_cap)


def simulate_full_factorized(init: UnitTangentState, model, cfg: IntegratorConfig, rng, watch_cap=None) -> SamplePath:
    """Full diffusion as temporal path, clock, time-changed sphere and dx = F(e) ds.

    Velocities are reconstructed from (t, tdot, theta), so the pseudo-norm
    relation holds exactly at every stored state. A start with xdot = 0 and
    sigma > 0 draws the initial direction uniformly from the sphere stream.
    """
    defect = pseudo_norm_defect(init, model)
    if abs(defect) > cfg.pn_tolerance:
        raise ParameterError(f"initial pseudo-norm defect {defect:.3e} exceeds tolerance")
    rng_t, rng_s = _split_rng(rng)
    speed = model.alpha(init.t) * float(np.linalg.norm(init.xdot))
    if speed == 0.0:
        if cfg.sigma == 0:
            raise DegenerateVelocityError(
                "sigma = 0 and tdot = 1: the path is the comoving observer; use geodesic_flow"
            )
        theta = rng_s.standard_normal(3)
        theta /= np.linalg.norm(theta)
    else:
        theta = to_spherical(init)[0].theta
    return _run_lifted(init.t, math.asinh(speed), theta, init.x, model, cfg, (rng_t, rng_s), K.MODE_FULL, watch_cap)


def _run_lifted(t0, r0, theta, x0, model, cfg, rng, mode, watch_cap):
    _check_t(t0, model)
    rng_t, rng_s = _split_rng(rng)
    _, h, p = model.kernel_params
    n, idx = _grid(cfg)
    m = len(idx)
    t, tdot, speed, clk = np.empty(m), np.empty(m), np.empty(m), np.empty(m)
    thetas = np.empty((m, 3))
    full = mode == K.MODE_FULL
    xs = np.empty((m, 3)) if full else np.empty((1, 3))
    if watch_cap is None:
        center, cap_cos, after = np.zeros(3), 1.0, -1.0
    else:
        center, angle, after = watch_cap
        center = np.asarray(center, dtype=float)
        cap_cos = math.cos(angle)
    x0 = np.zeros(3) if x0 is None else np.asarray(x0, dtype=float)
    _, cap_entry = K.run_lifted(rng_t, rng_s, float(t0), float(r0), np.asarray(theta, dtype=float), x0, h, p,
                                cfg.sigma, cfg.step, n, cfg.stride, mode, cfg.max_dc, center, cap_cos,
                                float(after), t, tdot, speed, clk, thetas, xs)
    diagnostics = {}
    if watch_cap is not None:
        diagnostics["cap_entry"] = cap_entry
    return SamplePath(cfg.step, idx * cfg.step, t, tdot, speed, clock=clk, theta=thetas,
                      x=xs if full else None, kind="full" if full else "spherical", diagnostics=diagnostics)


# -- direct integration -------------------------------------------------------


@dataclass(frozen=True)
class NoiseSquareRoot:
    """4x3 matrix B with B B^T = Sigma; rows are (tdot, xdot^1, xdot^2, xdot^3)."""

    matrix: np.ndarray

    def covariance(self):
        return self.matrix @ self.matrix.T


def diffusion_matrix(state: UnitTangentState, model, sigma) -> np.ndarray:
    """Sigma = sigma^2 (g^{-1} + xi xi^T) with xi = (tdot, xdot)."""
    alpha = model.alpha(state.t)
    xi = np.concatenate([[state.tdot], state.xdot])
    ginv = np.diag([-1.0, alpha**-2, alpha**-2, alpha**-2])
    return sigma**2 * (ginv + np.outer(xi, xi))


def noise_square_root(state: UnitTangentState, model, sigma) -> NoiseSquareRoot:
    alpha = model.alpha(state.t)
    v = alpha * state.xdot
    frame, pivot = K.noise_frame(state.tdot, v[0], v[1], v[2])
    if pivot <= 1e-14:
        raise NumericalRankError("noise frame is degenerate: state is not finite or tdot < 1")
    b = sigma * frame
    b[1:] /= alpha
    return NoiseSquareRoot(b)


def simulate_full_direct(init: UnitTangentState, model, cfg: IntegratorConfig, rng, project=True) -> SamplePath:
    """Euler-Maruyama for (t, x, tdot, xdot) with noise B dW.

    The drift is evaluated after the noise increment within each step (see
    ``_kernels.run_direct``), which keeps the one-step defect of order ds
    uniformly in tdot.
    The pseudo-norm defect is monitored before each retraction onto the
    unit hyperboloid; ``project=False`` skips the retraction, in which case
    the constraint is linearly unstable and the defect grows.
    """
    _check_t(init.t, model)
    defect = pseudo_norm_defect(init, model)
    if abs(defect) > cfg.pn_tolerance:
        raise ParameterError(f"initial pseudo-norm defect {defect:.3e} exceeds tolerance")
    rng = as_generator(rng[0] if isinstance(rng, tuple) else rng)
    _, h, p = model.kernel_params
    n, idx = _grid(cfg)
    m = len(idx)
    t, tdot, speed = np.empty(m), np.empty(m), np.empty(m)
    thetas, xs = np.empty((m, 3)), np.empty((m, 3))
    status, at, worst, last = K.run_direct(rng, float(init.t), np.array(init.x), float(init.tdot), np.array(init.xdot),
                                           h, p, cfg.sigma, cfg.step, n, cfg.stride, cfg.pn_tolerance, project,
                                           t, tdot, speed, thetas, xs)
    if status == 1:
        raise PseudoNormBlowupError(
            f"pseudo-norm defect {last:.3e} exceeded {cfg.pn_tolerance:.3e} at step {at}; reduce the step",
            step_index=at, defect=last,
        )
    if status == 2:
        raise PseudoNormBlowupError(f"velocity left the future light cone at step {at}", step_index=at, defect=last)
    if status == 3:
        raise NumericalRankError(f"noise frame degenerated at step {at}")
    if status == 4:
        raise DomainError(f"alpha(t) leaves floating-point range at step {at}; shorten the horizon")
    return SamplePath(cfg.step, idx * cfg.step, t, tdot, speed, theta=thetas, x=xs, kind="full",
                      diagnostics={"max_defect": worst, "projected": bool(project)})


def geodesic_flow(init: UnitTangentState, model, cfg: IntegratorConfig, method="rk4") -> SamplePath:
    """The sigma = 0 flow.

    ``rk4`` integrates (t, w, x) with w = alpha |xdot| = sqrt(tdot^2 - 1) and
    reports log(alpha w) in ``diagnostics["log_first_integral"]``; ``euler``
    runs the direct integrator with sigma = 0 and no retraction.
    """
    _check_t(init.t, model)
    if method == "euler":
        path = simulate_full_direct(init, model, cfg.with_(sigma=0.0, pn_tolerance=math.inf), None, project=False)
        alpha_path = np.exp(np.asarray(model.log_alpha(path.t)))
        with np.errstate(divide="ignore"):
            path.diagnostics["log_first_integral"] = np.log(alpha_path * path.speed)
        return path
    if method != "rk4":
        raise ParameterError(f"unknown geodesic method {method!r}")
    defect = pseudo_norm_defect(init, model)
    if abs(defect) > max(cfg.pn_tolerance, 1e-12):
        raise ParameterError("geodesic_flow needs a state on the unit tangent bundle")
    _, h, p = model.kernel_params
    n, idx = _grid(cfg)
    m = len(idx)
    norm = float(np.linalg.norm(init.xdot))
    w0 = model.alpha(init.t) * norm
    theta = init.xdot / norm if norm > 0 else np.zeros(3)
    t, tdot, speed, logk = np.empty(m), np.empty(m), np.empty(m), np.empty(m)
    xs = np.empty((m, 3))
    K.run_geodesic(float(init.t), float(w0), theta, np.array(init.x), h, p, cfg.step, n, cfg.stride,
                   t, tdot, speed, xs, logk)
    thetas = np.tile(theta, (m, 1))
    return SamplePath(cfg.step, idx * cfg.step, t, tdot, speed, theta=thetas, x=xs, kind="full",
                      diagnostics={"log_first_integral": logk})

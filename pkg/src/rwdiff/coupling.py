"""Coupling experiments: comparison sandwich, shift coupling, mirror coupling."""

from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import Optional

import numpy as np

from . import _kernels as K
from .dynamics import IntegratorConfig, _check_t, _grid
from .errors import AntipodalDegeneracyError, GridRangeError, ParameterError
from .state import SamplePath, SphericalState, TemporalState
from .streams import as_generator


@dataclass
class CouplingReport:
    coupled: bool
    coupling_time: Optional[float] = None
    diagnostics: dict = field(default_factory=dict)
    trace: Optional[dict] = field(default=None, repr=False)

    def __post_init__(self):
        if self.coupled != (self.coupling_time is not None):
            raise ValueError("coupling_time must be given exactly when coupled")

    def to_dict(self):
        return {"coupled": self.coupled, "coupling_time": self.coupling_time,
                "diagnostics": {k: float(v) for k, v in self.diagnostics.items()}}


def _generators(rng, count):
    if isinstance(rng, (tuple, list)):
        if len(rng) != count:
            raise ParameterError(f"expected {count} generators, got {len(rng)}")
        return [as_generator(g) for g in rng]
    return as_generator(rng).spawn(count)


# -- comparison ---------------------------------------------------------------


def comparison_triple(t0, tdot0, model, cfg: IntegratorConfig, rng, scheme="implicit"):
    """Integrate u (H frozen at H(t0)), tdot (H(t)) and v (H_inf) with shared noise.

    Returns ``(u_path, mid_path, v_path, report)``; the report counts steps
    at which u <= tdot <= v fails by more than 10 * step (by more than 0
    when sigma = 0).
    """
    if not tdot0 >= 1:
        raise ParameterError("tdot0 must be >= 1")
    _check_t(t0, model)
    if scheme not in ("implicit", "euler"):
        raise ParameterError(f"unknown comparison scheme {scheme!r}")
    _, h, p = model.kernel_params
    n, idx = _grid(cfg)
    tol = 0.0 if cfg.sigma == 0 else 10.0 * cfg.step
    tdots = np.empty((3, len(idx)))
    ts = np.empty((3, len(idx)))
    code = K.SCHEME_IMPLICIT if scheme == "implicit" else K.SCHEME_EULER
    violations, worst = K.run_comparison(as_generator(rng), float(t0), float(tdot0), h, p, cfg.sigma, cfg.step,
                                         n, cfg.stride, code, tol, tdots, ts)
    s = idx * cfg.step
    paths = [
        SamplePath(cfg.step, s, ts[j], tdots[j], np.sqrt(np.maximum((tdots[j] - 1) * (tdots[j] + 1), 0.0)))
        for j in range(3)
    ]
    report = CouplingReport(False, None, {"violations": violations, "max_excess": worst, "tolerance": tol})
    return paths[0], paths[1], paths[2], report


# -- shift coupling -----------------------------------------------------------


def reparametrize_by_t(path: SamplePath, grid) -> np.ndarray:
    """tdot as a function of cosmological time, u(t) = tdot(s(t)), on ``grid``."""
    grid = np.asarray(grid, dtype=float)
    lo, hi = path.t[0], path.t[-1]
    if np.any(grid < lo) or np.any(grid > hi):
        raise GridRangeError(f"grid must lie inside [{lo}, {hi}]")
    s = np.interp(grid, path.t, path.s)
    return np.interp(s, path.s, path.tdot)


def shift_coupling_experiment(init1: TemporalState, init2: TemporalState, model, cfg: IntegratorConfig, rng):
    """Run two independent temporal paths until their curves t -> tdot cross.

    ``rng`` is a pair of generators (one per path) or a generator that is
    split. Passing two identically seeded generators gives shared noise.
    The coupling time is the crossing in cosmological time t; the
    diagnostics carry the proper times T1, T2 of the crossing on each path.
    """
    report, _, _ = _shift(init1, init2, model, cfg, _generators(rng, 2), None)
    return report


def _shift(init1, init2, model, cfg, gens, sphere):
    _check_t(init1.t, model)
    _check_t(init2.t, model)
    _, h, p = model.kernel_params
    n = cfg.n_steps
    lifted1 = np.empty(K.LIFTED_FIELDS)
    lifted2 = np.empty(K.LIFTED_FIELDS)
    if sphere is None:
        srng1, srng2 = gens
        theta1 = theta2 = np.zeros(3)
        track = False
    else:
        srng1, srng2, theta1, theta2 = sphere
        track = True
    coupled, t_star, s1, s2 = K.shift_lockstep(gens[0], gens[1], srng1, srng2, float(init1.t), init1.rapidity,
                                               float(init2.t), init2.rapidity, theta1, theta2, h, p, cfg.sigma,
                                               cfg.step, n, cfg.max_dc, track, lifted1, lifted2)
    diagnostics = {"tau0": max(init1.t, init2.t), "steps1": round(lifted1[4] / cfg.step),
                   "steps2": round(lifted2[4] / cfg.step)}
    if coupled:
        diagnostics.update(T1=s1, T2=s2)
    report = CouplingReport(bool(coupled), float(t_star) if coupled else None, diagnostics)
    return report, lifted1, lifted2


# -- mirror coupling ----------------------------------------------------------


def reflection_matrix(normal) -> np.ndarray:
    """R = I - 2 n n^T for a unit normal n."""
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    return np.eye(3) - 2.0 * np.outer(n, n)


def median_normal(theta1, theta2):
    """Unit normal of the plane bisecting theta1 and theta2, or None if they coincide."""
    diff = np.asarray(theta1, dtype=float) - np.asarray(theta2, dtype=float)
    nrm = float(np.linalg.norm(diff))
    if nrm == 0.0:
        return None
    if np.linalg.norm(np.asarray(theta1) + np.asarray(theta2)) < 1e-12:
        raise AntipodalDegeneracyError("directions are antipodal; the median plane is undefined")
    return diff / nrm


def mirror_coupling_experiment(e1: SphericalState, e2: SphericalState, model, cfg: IntegratorConfig, rng,
                               record_after=0):
    """Shift-couple the temporal parts, then mirror-couple the directions.

    After the temporal coupling at proper times T1, T2 the second direction
    is taken to be the reflection of the first across the median plane of
    (theta1_T1, theta2_T2) until the first one hits the median great circle,
    and equal to it afterwards. The coupling time is the proper time of path
    1 at the hit. ``record_after`` further steps are recorded in ``trace``.
    ``rng`` holds four generators (temporal 1, sphere 1, temporal 2, sphere 2)
    or one generator that is split.
    """
    gt1, gs1, gt2, gs2 = _generators(rng, 4)
    shift, lifted1, lifted2 = _shift(e1.temporal, e2.temporal, model, cfg, (gt1, gt2),
                                     (gs1, gs2, np.array(e1.theta), np.array(e2.theta)))
    diagnostics = dict(shift.diagnostics)
    if not shift.coupled:
        return CouplingReport(False, None, diagnostics)
    diagnostics["t_couple"] = shift.coupling_time
    theta1, theta2 = lifted1[6:9].copy(), lifted2[6:9].copy()
    normal = median_normal(theta1, theta2)
    steps_left = cfg.n_steps - int(diagnostics["steps1"])
    out1 = np.empty((int(record_after), 3))
    out2 = np.empty((int(record_after), 3))
    _, h, p = model.kernel_params
    if normal is None:
        # already equal: the reflection is never used and the hit is immediate
        hit, s_hit, rows = K.mirror_phase(gt1, gs1, lifted1, np.zeros(3), h, p, cfg.sigma, cfg.step,
                                          min(steps_left, int(record_after)), cfg.max_dc, True, out1, out2)
    else:
        hit, s_hit, rows = K.mirror_phase(gt1, gs1, lifted1, normal, h, p, cfg.sigma, cfg.step, steps_left,
                                          cfg.max_dc, True, out1, out2)
        diagnostics["mirror_gap"] = float(np.linalg.norm(theta1 - theta2))
    trace = {"theta1": out1[:rows], "theta2": out2[:rows], "normal": normal} if record_after else None
    if not hit:
        return CouplingReport(False, None, diagnostics, trace)
    diagnostics["T_star"] = s_hit
    return CouplingReport(True, float(s_hit), diagnostics, trace)


def reflected_direction(theta1, normal, hit):
    """The mirror partner R theta1 before the hit and theta1 itself afterwards."""
    theta1 = np.asarray(theta1, dtype=float)
    if hit or normal is None:
        return theta1.copy()
    return K.reflect(theta1, np.asarray(normal, dtype=float))

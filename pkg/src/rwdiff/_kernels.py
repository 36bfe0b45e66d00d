"""Compiled inner loops.

The temporal component is integrated through its rapidity r = arccosh(tdot)
which solves

    dr = (sigma^2 coth r - H(t) sinh r) ds + sigma dB.

Near r = 0 this behaves like a three-dimensional Bessel process, so r is
carried as the norm of a lifted vector Y in R^3 driven by a 3-d Brownian
motion,

    dY = (g(|Y|)/|Y|) Y ds + sigma dW,   g(r) = sigma^2 (coth r - 1/r) - H sinh r,

whose Euler steps never reach the singular boundary. The singular part of
the clock integrand 1/sinh(r)^2 = 1/r^2 + rem(r) is integrated exactly
along each linear segment of Y; the bounded remainder by the trapezoid rule.

Expansion models enter as (h, p): H(t) = h + p/(1+t), log alpha = h t + p log1p(t).
"""

import math

import numpy as np
from numba import njit

MODE_TEMPORAL = 0
MODE_SPHERICAL = 1
MODE_FULL = 2

SCHEME_IMPLICIT = 0
SCHEME_EULER = 1

_NB = dict(nogil=True, cache=True)


@njit(**_NB)
def hubble(h, p, t):
    return h + p / (1.0 + t)


@njit(**_NB)
def log_alpha(h, p, t):
    return h * t + p * math.log1p(t)


@njit(**_NB)
def sinh_cosh(r):
    # both from one expm1 so that sinh keeps full relative precision near 0
    em = math.expm1(r)
    inv = 1.0 / (em + 1.0)
    return 0.5 * em * (em + 2.0) * inv, 1.0 + 0.5 * em * em * inv


@njit(**_NB)
def drift_rate(r, sh, ch, hub, s2):
    """g(r)/r, analytic at r = 0; sh, ch are sinh(r), cosh(r)."""
    if r < 1e-3:
        r2 = r * r
        return s2 * (1.0 / 3.0 - r2 / 45.0) - hub * (1.0 + r2 / 6.0)
    return (s2 * (ch / sh - 1.0 / r) - hub * sh) / r


@njit(**_NB)
def smooth_remainder(r, sh):
    """1/sinh(r)^2 - 1/r^2."""
    if r < 1e-2:
        return -1.0 / 3.0 + r * r / 15.0
    return 1.0 / (sh * sh) - 1.0 / (r * r)


@njit(**_NB)
def segment_inverse_square(y0, y1, y2, z0, z1, z2):
    """int_0^1 du / |y + u (z - y)|^2, i.e. the subtended angle over |y x z|."""
    c0 = y1 * z2 - y2 * z1
    c1 = y2 * z0 - y0 * z2
    c2 = y0 * z1 - y1 * z0
    cross = math.sqrt(c0 * c0 + c1 * c1 + c2 * c2)
    dot = y0 * z0 + y1 * z1 + y2 * z2
    if cross <= 1e-9 * abs(dot):
        if dot > 0.0:
            return 1.0 / dot
        return math.inf
    return math.atan2(cross, dot) / cross


@njit(**_NB)
def lifted_init(r):
    sh, ch = sinh_cosh(r)
    return r, 0.0, 0.0, r, sh, ch, smooth_remainder(r, sh)


@njit(**_NB)
def lifted_step(rng, y0, y1, y2, r, sh, ch, rem, t, h, p, sigma, ds, sq, want_clock):
    """One step of (t, Y).

    (r, sh, ch, rem) caches |Y|, sinh, cosh and the clock remainder at the
    current point; the same quantities are returned for the new point along
    with the new t and the clock increment.
    """
    s2 = sigma * sigma
    k = drift_rate(r, sh, ch, hubble(h, p, t), s2) * ds
    z0 = y0 + k * y0 + sigma * sq * rng.standard_normal()
    z1 = y1 + k * y1 + sigma * sq * rng.standard_normal()
    z2 = y2 + k * y2 + sigma * sq * rng.standard_normal()
    rn = math.sqrt(z0 * z0 + z1 * z1 + z2 * z2)
    shn, chn = sinh_cosh(rn)
    remn = smooth_remainder(rn, shn)
    tn = t + ch * ds
    dc = 0.0
    if want_clock and s2 > 0.0:
        if r == 0.0:
            # 1/r^2 is not integrable from an exact start at tdot = 1: half-weight the cell
            dc = 0.5 * s2 * ds / (shn * shn)
        else:
            w = segment_inverse_square(y0, y1, y2, z0, z1, z2)
            dc = s2 * ds * (w + 0.5 * (rem + remn))
    return z0, z1, z2, rn, shn, chn, remn, tn, dc


@njit(**_NB)
def sphere_step(rng, a0, a1, a2, dc):
    """Geodesic step of spherical Brownian motion over clock time dc."""
    sd = math.sqrt(dc)
    g0 = sd * rng.standard_normal()
    g1 = sd * rng.standard_normal()
    g2 = sd * rng.standard_normal()
    proj = g0 * a0 + g1 * a1 + g2 * a2
    g0 -= proj * a0
    g1 -= proj * a1
    g2 -= proj * a2
    phi = math.sqrt(g0 * g0 + g1 * g1 + g2 * g2)
    if phi == 0.0:
        return a0, a1, a2
    cs = math.cos(phi)
    sn = math.sin(phi) / phi
    b0 = cs * a0 + sn * g0
    b1 = cs * a1 + sn * g1
    b2 = cs * a2 + sn * g2
    nrm = math.sqrt(b0 * b0 + b1 * b1 + b2 * b2)
    return b0 / nrm, b1 / nrm, b2 / nrm


@njit(**_NB)
def sphere_advance(rng, a0, a1, a2, dc, max_dc):
    if dc <= 0.0:
        return a0, a1, a2
    n = max(1, int(math.ceil(dc / max_dc)))
    sub = dc / n
    for _ in range(n):
        a0, a1, a2 = sphere_step(rng, a0, a1, a2, sub)
    return a0, a1, a2


@njit(**_NB)
def run_sphere(rng, theta, clock_total, max_dc):
    a0, a1, a2 = sphere_advance(rng, theta[0], theta[1], theta[2], clock_total, max_dc)
    return np.array([a0, a1, a2])


@njit(**_NB)
def _kahan(total, comp, inc):
    y = inc - comp
    nxt = total + y
    return nxt, (nxt - total) - y


@njit(**_NB)
def run_lifted(rng_t, rng_s, t0, r0, theta0, x0, h, p, sigma, ds, n, stride, mode, max_dc,
               cap_center, cap_cos, cap_after,
               out_t, out_tdot, out_speed, out_clock, out_theta, out_x):
    """Integrate n steps, recording every ``stride`` steps and the final one.

    Returns (clock, time of first entry into the cap after cap_after or -1).
    """
    sq = math.sqrt(ds)
    y0, y1, y2, r, sh, ch, rem = lifted_init(r0)
    t = t0
    want_clock = mode != MODE_TEMPORAL
    clock = 0.0
    pending = 0.0
    a0, a1, a2 = theta0[0], theta0[1], theta0[2]
    p0, p1, p2 = x0[0], x0[1], x0[2]
    e0 = e1 = e2 = 0.0
    cap_hit = -1.0
    watch_cap = mode != MODE_TEMPORAL and cap_after >= 0.0

    ia = math.exp(-log_alpha(h, p, t)) if mode == MODE_FULL else 0.0
    out_t[0] = t
    out_tdot[0] = ch
    out_speed[0] = sh
    out_clock[0] = 0.0
    if mode != MODE_TEMPORAL:
        out_theta[0, 0] = a0
        out_theta[0, 1] = a1
        out_theta[0, 2] = a2
    if mode == MODE_FULL:
        out_x[0, 0] = p0
        out_x[0, 1] = p1
        out_x[0, 2] = p2

    k = 1
    for i in range(1, n + 1):
        sh_old = sh
        y0, y1, y2, r, sh, ch, rem, tn, dc = lifted_step(
            rng_t, y0, y1, y2, r, sh, ch, rem, t, h, p, sigma, ds, sq, want_clock
        )
        clock += dc
        record = i % stride == 0 or i == n
        if mode == MODE_FULL:
            b0, b1, b2 = sphere_advance(rng_s, a0, a1, a2, dc, max_dc)
            ian = math.exp(-log_alpha(h, p, tn))
            u_old = 0.5 * ds * sh_old * ia
            u_new = 0.5 * ds * sh * ian
            # compensated sums: late increments are far below ulp(x)
            p0, e0 = _kahan(p0, e0, u_old * a0 + u_new * b0)
            p1, e1 = _kahan(p1, e1, u_old * a1 + u_new * b1)
            p2, e2 = _kahan(p2, e2, u_old * a2 + u_new * b2)
            a0, a1, a2 = b0, b1, b2
            ia = ian
        elif mode == MODE_SPHERICAL:
            pending += dc
            if pending >= max_dc or record or (watch_cap and cap_hit < 0.0 and i * ds >= cap_after):
                a0, a1, a2 = sphere_advance(rng_s, a0, a1, a2, pending, max_dc)
                pending = 0.0
        t = tn
        if watch_cap and cap_hit < 0.0 and i * ds >= cap_after:
            if a0 * cap_center[0] + a1 * cap_center[1] + a2 * cap_center[2] >= cap_cos:
                cap_hit = i * ds
        if record:
            out_t[k] = t
            out_tdot[k] = ch
            out_speed[k] = sh
            out_clock[k] = clock
            if mode != MODE_TEMPORAL:
                out_theta[k, 0] = a0
                out_theta[k, 1] = a1
                out_theta[k, 2] = a2
            if mode == MODE_FULL:
                out_x[k, 0] = p0
                out_x[k, 1] = p1
                out_x[k, 2] = p2
            k += 1
    return clock, cap_hit


# -- scalar schemes ---------------------------------------------------------


@njit(**_NB)
def implicit_rapidity_step(r, hub, sigma, ds, db):
    """Drift-implicit step for r: the singular sigma^2/r term is taken at the new point.

    r' solves r' = A + sigma^2 ds / r' with A = r + g(r) ds + sigma db, so
    r' = (A + sqrt(A^2 + 4 sigma^2 ds)) / 2 > 0. The map is increasing in r
    and decreasing in H.
    """
    s2 = sigma * sigma
    sh, ch = sinh_cosh(r)
    a = r + drift_rate(r, sh, ch, hub, s2) * r * ds + sigma * db
    if s2 == 0.0:
        return max(a, 0.0)
    return 0.5 * (a + math.sqrt(a * a + 4.0 * s2 * ds))


@njit(**_NB)
def euler_tdot_step(tdot, hub, sigma, ds, db):
    """Euler-Maruyama step of the tdot equation followed by the clamp tdot >= 1."""
    q = (tdot - 1.0) * (tdot + 1.0)
    nxt = tdot + (-hub * q + 1.5 * sigma * sigma * tdot) * ds + sigma * math.sqrt(q) * db
    return max(nxt, 1.0)


@njit(**_NB)
def run_scalar(rng, t0, tdot0, h, p, sigma, ds, n, stride, scheme, out_t, out_tdot, out_speed):
    sq = math.sqrt(ds)
    t = t0
    tdot = tdot0
    r = math.acosh(tdot0)
    out_t[0] = t
    out_tdot[0] = tdot
    out_speed[0] = math.sqrt((tdot - 1.0) * (tdot + 1.0))
    k = 1
    for i in range(1, n + 1):
        db = sq * rng.standard_normal()
        hub = hubble(h, p, t)
        if scheme == SCHEME_IMPLICIT:
            t += math.cosh(r) * ds
            r = implicit_rapidity_step(r, hub, sigma, ds, db)
            sh, tdot = sinh_cosh(r)
        else:
            t += tdot * ds
            tdot = euler_tdot_step(tdot, hub, sigma, ds, db)
            sh = math.sqrt((tdot - 1.0) * (tdot + 1.0))
        if i % stride == 0 or i == n:
            out_t[k] = t
            out_tdot[k] = tdot
            out_speed[k] = sh
            k += 1


@njit(**_NB)
def run_comparison(rng, t0, tdot0, h, p, sigma, ds, n, stride, scheme, tol, out_tdot, out_t):
    """Three temporal paths sharing every Gaussian increment.

    Rows of the outputs are u (H frozen at H(t0)), the true tdot (H(t_s))
    and v (H_infinity). Returns the number of steps at which
    u <= tdot <= v fails by more than tol, and the largest excess.
    """
    sq = math.sqrt(ds)
    h0 = hubble(h, p, t0)
    tu = tm = tv = t0
    ru = rm = rv = math.acosh(tdot0)
    du = dm = dv = tdot0
    violations = 0
    worst = 0.0
    for j in range(3):
        out_tdot[j, 0] = tdot0
        out_t[j, 0] = t0
    k = 1
    for i in range(1, n + 1):
        db = sq * rng.standard_normal()
        hub = hubble(h, p, tm)
        tu += du * ds
        tm += dm * ds
        tv += dv * ds
        if scheme == SCHEME_IMPLICIT:
            ru = implicit_rapidity_step(ru, h0, sigma, ds, db)
            rm = implicit_rapidity_step(rm, hub, sigma, ds, db)
            rv = implicit_rapidity_step(rv, h, sigma, ds, db)
            du = math.cosh(ru)
            dm = math.cosh(rm)
            dv = math.cosh(rv)
        else:
            du = euler_tdot_step(du, h0, sigma, ds, db)
            dm = euler_tdot_step(dm, hub, sigma, ds, db)
            dv = euler_tdot_step(dv, h, sigma, ds, db)
        gap = max(du - dm, dm - dv)
        if gap > tol:
            violations += 1
        if gap > worst:
            worst = gap
        if i % stride == 0 or i == n:
            out_tdot[0, k] = du
            out_tdot[1, k] = dm
            out_tdot[2, k] = dv
            out_t[0, k] = tu
            out_t[1, k] = tm
            out_t[2, k] = tv
            k += 1
    return violations, worst


# -- direct integration of the 8-dimensional system -------------------------


@njit(**_NB)
def noise_frame(tdot, v0, v1, v2):
    """Columns e_1..e_3: g-orthonormal and g-orthogonal to n = (tdot, v).

    Spatial components are in orthonormal-frame units (multiplied by
    alpha); ``v`` is alpha * xdot. The triad is the spatial part of the
    boost taking (1, 0, 0, 0) to n, e_j = (v_j, delta_ij + v_i v_j / (1 + tdot)),
    which avoids the tdot^2 cancellation of Gram-Schmidt. Returns
    (frame, pivot) with pivot 0 for a non-finite or past-directed input.
    """
    frame = np.empty((4, 3))
    if not (math.isfinite(tdot) and math.isfinite(v0) and math.isfinite(v1) and math.isfinite(v2)) or tdot < 1.0:
        frame[:] = 0.0
        return frame, 0.0
    f = 1.0 / (1.0 + tdot)
    v = np.empty(3)
    v[0] = v0
    v[1] = v1
    v[2] = v2
    for j in range(3):
        frame[0, j] = v[j]
        for i in range(3):
            frame[i + 1, j] = v[i] * v[j] * f
        frame[j + 1, j] += 1.0
    return frame, 1.0


@njit(**_NB)
def run_direct(rng, t0, x0, tdot0, xdot0, h, p, sigma, ds, n, stride, tol, project,
               out_t, out_tdot, out_speed, out_theta, out_x):
    """Euler-Maruyama on (t, x, tdot, xdot) with noise B dW, B = sigma [e_1 e_2 e_3].

    Each step applies the noise increment first and then an explicit Euler
    drift step from the perturbed state. Evaluating the drift before the
    noise leaves a one-step defect of order |v|^3 ds^1.5; this ordering
    removes it, leaving sigma^2 (3 ds - |dW|^2) plus O(ds^2) terms.

    With ``project`` the velocity is rescaled onto the unit hyperboloid after
    each step; the defect is measured before that. Returns
    (status, step index, max |defect|, defect at failure) where status is
    0 ok, 1 defect above tol, 2 spacelike or past-directed velocity,
    3 degenerate frame, 4 alpha out of floating range.
    """
    sq = math.sqrt(ds)
    t = t0
    x = x0.copy()
    td = tdot0
    xd = xdot0.copy()
    worst = 0.0
    la = log_alpha(h, p, t)
    alpha = math.exp(la)
    _record_direct(0, t, td, xd, x, alpha, out_t, out_tdot, out_speed, out_theta, out_x)
    k = 1
    for i in range(1, n + 1):
        if la > 300.0:
            return 4, i, worst, 0.0
        d0 = sq * rng.standard_normal()
        d1 = sq * rng.standard_normal()
        d2 = sq * rng.standard_normal()
        if sigma > 0.0:
            frame, pivot = noise_frame(td, alpha * xd[0], alpha * xd[1], alpha * xd[2])
            if pivot <= 1e-14:
                return 3, i, worst, pivot
            td += sigma * (frame[0, 0] * d0 + frame[0, 1] * d1 + frame[0, 2] * d2)
            for m in range(3):
                xd[m] += sigma * (frame[m + 1, 0] * d0 + frame[m + 1, 1] * d1 + frame[m + 1, 2] * d2) / alpha
        hub = hubble(h, p, t)
        v0 = alpha * xd[0]
        v1 = alpha * xd[1]
        v2 = alpha * xd[2]
        vv = v0 * v0 + v1 * v1 + v2 * v2
        # drift: Christoffel terms plus the Ito correction 3 sigma^2/2
        a_t = -hub * vv + 1.5 * sigma * sigma * td
        a_x = -2.0 * hub * td + 1.5 * sigma * sigma
        nt = t + td * ds
        for m in range(3):
            x[m] += xd[m] * ds
        ntd = td + a_t * ds
        nxd0 = xd[0] + a_x * xd[0] * ds
        nxd1 = xd[1] + a_x * xd[1] * ds
        nxd2 = xd[2] + a_x * xd[2] * ds
        t = nt
        la = log_alpha(h, p, t)
        alpha = math.exp(la)
        w0 = alpha * nxd0
        w1 = alpha * nxd1
        w2 = alpha * nxd2
        ww = w0 * w0 + w1 * w1 + w2 * w2
        defect = (ntd - 1.0) * (ntd + 1.0) - ww
        if abs(defect) > worst:
            worst = abs(defect)
        if abs(defect) > tol:
            return 1, i, worst, defect
        if project:
            minus_q = ntd * ntd - ww
            if ntd <= 0.0 or minus_q <= 0.0:
                return 2, i, worst, defect
            scale = 1.0 / math.sqrt(minus_q)
            ntd *= scale
            nxd0 *= scale
            nxd1 *= scale
            nxd2 *= scale
        td = max(ntd, 1.0)
        xd[0] = nxd0
        xd[1] = nxd1
        xd[2] = nxd2
        if i % stride == 0 or i == n:
            _record_direct(k, t, td, xd, x, alpha, out_t, out_tdot, out_speed, out_theta, out_x)
            k += 1
    return 0, n, worst, 0.0


@njit(**_NB)
def _record_direct(k, t, td, xd, x, alpha, out_t, out_tdot, out_speed, out_theta, out_x):
    nrm = math.sqrt(xd[0] * xd[0] + xd[1] * xd[1] + xd[2] * xd[2])
    out_t[k] = t
    out_tdot[k] = td
    out_speed[k] = alpha * nrm
    for m in range(3):
        out_theta[k, m] = xd[m] / nrm if nrm > 0.0 else 0.0
        out_x[k, m] = x[m]


# -- geodesic flow ----------------------------------------------------------


@njit(**_NB)
def _geodesic_rhs(t, w, h, p):
    # (dt/ds, dw/ds, |dx/ds|) with w = alpha |xdot| = sinh of the rapidity
    tdot = math.sqrt(1.0 + w * w)
    return tdot, -hubble(h, p, t) * tdot * w, w * math.exp(-log_alpha(h, p, t))


@njit(**_NB)
def run_geodesic(t0, w0, theta, x0, h, p, ds, n, stride, out_t, out_tdot, out_speed, out_x, out_logk):
    """Classical RK4 for the sigma = 0 flow; the direction theta is constant."""
    t = t0
    w = w0
    dist = 0.0
    k = 0
    for i in range(n + 1):
        if i % stride == 0 or i == n:
            out_t[k] = t
            out_tdot[k] = math.sqrt(1.0 + w * w)
            out_speed[k] = w
            for m in range(3):
                out_x[k, m] = x0[m] + dist * theta[m]
            out_logk[k] = log_alpha(h, p, t) + math.log(w) if w > 0.0 else -math.inf
            k += 1
        if i == n:
            break
        a1, b1, c1 = _geodesic_rhs(t, w, h, p)
        a2, b2, c2 = _geodesic_rhs(t + 0.5 * ds * a1, w + 0.5 * ds * b1, h, p)
        a3, b3, c3 = _geodesic_rhs(t + 0.5 * ds * a2, w + 0.5 * ds * b2, h, p)
        a4, b4, c4 = _geodesic_rhs(t + ds * a3, w + ds * b3, h, p)
        t += ds * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0
        w += ds * (b1 + 2.0 * b2 + 2.0 * b3 + b4) / 6.0
        dist += ds * (c1 + 2.0 * c2 + 2.0 * c3 + c4) / 6.0


# -- couplings --------------------------------------------------------------

LIFTED_FIELDS = 9  # y0, y1, y2, t, s, clock, theta0, theta1, theta2


@njit(**_NB)
def shift_lockstep(rng1, rng2, srng1, srng2, t01, r01, t02, r02, theta1, theta2,
                   h, p, sigma, ds, n, max_dc, track_sphere, lifted1, lifted2):
    """Advance two independent temporal paths in merged cosmological time.

    Path i is linear in t between its step nodes. The difference
    d(t) = u1(t) - u2(t) is evaluated at every merged node starting from
    tau0 = max(t01, t02); the first zero or sign change is located by linear
    interpolation. Each path takes at most n steps. ``lifted1``/``lifted2``
    receive the final states (see LIFTED_FIELDS) for continuation.

    Returns (coupled, t_star, T1, T2) with T_i the proper time of path i at t_star.
    """
    sq = math.sqrt(ds)
    ya0, ya1, ya2, ra, sha, cha, rema = lifted_init(r01)
    yb0, yb1, yb2, rb, shb, chb, remb = lifted_init(r02)
    ta, tb = t01, t02
    ia = ib = 0
    ca = cb = 0.0
    a0, a1, a2 = theta1[0], theta1[1], theta1[2]
    b0, b1, b2 = theta2[0], theta2[1], theta2[2]
    prev_ta, prev_ua = ta, cha
    prev_tb, prev_ub = tb, chb
    tau0 = max(t01, t02)
    coupled = False
    t_star = math.nan
    s1 = s2 = math.nan
    started = False
    tau = tau0
    d_prev = 0.0
    while True:
        if started or ta < tau0 or tb < tau0:
            # advance the path whose current node is the earliest
            if ta <= tb:
                if ia >= n:
                    break
                prev_ta, prev_ua = ta, cha
                ya0, ya1, ya2, ra, sha, cha, rema, ta, dc = lifted_step(
                    rng1, ya0, ya1, ya2, ra, sha, cha, rema, ta, h, p, sigma, ds, sq, track_sphere
                )
                ia += 1
                ca += dc
                if track_sphere:
                    a0, a1, a2 = sphere_advance(srng1, a0, a1, a2, dc, max_dc)
            else:
                if ib >= n:
                    break
                prev_tb, prev_ub = tb, chb
                yb0, yb1, yb2, rb, shb, chb, remb, tb, dc = lifted_step(
                    rng2, yb0, yb1, yb2, rb, shb, chb, remb, tb, h, p, sigma, ds, sq, track_sphere
                )
                ib += 1
                cb += dc
                if track_sphere:
                    b0, b1, b2 = sphere_advance(srng2, b0, b1, b2, dc, max_dc)
        if ta < tau0 or tb < tau0:
            continue
        new_tau = min(ta, tb)
        d_new = _interp(new_tau, prev_ta, prev_ua, ta, cha) - _interp(new_tau, prev_tb, prev_ub, tb, chb)
        if not started:
            started = True
            # both paths now cover tau0
            d_prev = _interp(tau0, prev_ta, prev_ua, ta, cha) - _interp(tau0, prev_tb, prev_ub, tb, chb)
            if d_prev == 0.0:
                coupled = True
                t_star = tau0
                break
        if new_tau <= tau:
            continue
        if d_new == 0.0 or (d_new > 0.0) != (d_prev > 0.0):
            coupled = True
            t_star = tau + (new_tau - tau) * d_prev / (d_prev - d_new)
            break
        tau = new_tau
        d_prev = d_new
    if coupled:
        s1 = ds * (ia - 1 + _fraction(t_star, prev_ta, ta)) if ia > 0 else 0.0
        s2 = ds * (ib - 1 + _fraction(t_star, prev_tb, tb)) if ib > 0 else 0.0
    _store(lifted1, ya0, ya1, ya2, ta, ia * ds, ca, a0, a1, a2)
    _store(lifted2, yb0, yb1, yb2, tb, ib * ds, cb, b0, b1, b2)
    return coupled, t_star, s1, s2


@njit(**_NB)
def _store(out, y0, y1, y2, t, s, clock, a0, a1, a2):
    out[0] = y0
    out[1] = y1
    out[2] = y2
    out[3] = t
    out[4] = s
    out[5] = clock
    out[6] = a0
    out[7] = a1
    out[8] = a2


@njit(**_NB)
def _interp(tau, t_lo, u_lo, t_hi, u_hi):
    if t_hi <= t_lo:
        return u_hi
    return u_lo + (u_hi - u_lo) * (tau - t_lo) / (t_hi - t_lo)


@njit(**_NB)
def _fraction(tau, t_lo, t_hi):
    if t_hi <= t_lo:
        return 1.0
    return min(max((tau - t_lo) / (t_hi - t_lo), 0.0), 1.0)


@njit(**_NB)
def mirror_phase(rng_t, rng_s, lifted, normal, h, p, sigma, ds, n, max_dc, stop_on_hit,
                 out_theta1, out_theta2):
    """Continue path 1 with theta2' = R theta1 until <theta1, normal> changes sign.

    From the hit on theta2' is a copy of theta1. At most n steps are taken;
    with ``stop_on_hit`` the loop ends after the hit plus as many steps as
    the output arrays hold, which record (theta1, theta2') after the hit.
    ``lifted`` is updated in place. A zero ``normal`` counts as a hit at
    the start. Returns (hit, proper time at hit, rows recorded).
    """
    sq = math.sqrt(ds)
    y0, y1, y2 = lifted[0], lifted[1], lifted[2]
    t = lifted[3]
    s = lifted[4]
    clock = lifted[5]
    r = math.sqrt(y0 * y0 + y1 * y1 + y2 * y2)
    sh, ch = sinh_cosh(r)
    rem = smooth_remainder(r, sh)
    a0, a1, a2 = lifted[6], lifted[7], lifted[8]
    n0, n1, n2 = normal[0], normal[1], normal[2]
    side = a0 * n0 + a1 * n1 + a2 * n2
    hit = side == 0.0
    s_hit = s if hit else math.nan
    k = 0
    for _ in range(n):
        if hit and stop_on_hit and k >= out_theta1.shape[0]:
            break
        y0, y1, y2, r, sh, ch, rem, t, dc = lifted_step(rng_t, y0, y1, y2, r, sh, ch, rem, t, h, p, sigma, ds, sq, True)
        clock += dc
        a0, a1, a2 = sphere_advance(rng_s, a0, a1, a2, dc, max_dc)
        s += ds
        if not hit:
            new_side = a0 * n0 + a1 * n1 + a2 * n2
            if new_side == 0.0 or (new_side > 0.0) != (side > 0.0):
                hit = True
                s_hit = s
            continue
        if k < out_theta1.shape[0]:
            # theta2' has been merged into theta1: the copy is exact
            c0, c1, c2 = a0, a1, a2
            out_theta1[k, 0] = a0
            out_theta1[k, 1] = a1
            out_theta1[k, 2] = a2
            out_theta2[k, 0] = c0
            out_theta2[k, 1] = c1
            out_theta2[k, 2] = c2
            k += 1
    _store(lifted, y0, y1, y2, t, s, clock, a0, a1, a2)
    return hit, s_hit, k


@njit(**_NB)
def reflect(a, normal):
    d = 2.0 * (a[0] * normal[0] + a[1] * normal[1] + a[2] * normal[2])
    return np.array([a[0] - d * normal[0], a[1] - d * normal[1], a[2] - d * normal[2]])

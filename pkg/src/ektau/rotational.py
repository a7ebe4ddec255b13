"""Rotationally invariant CMC surfaces about the z-axis by ODE shooting.

The profile f(r) of a rotational graph satisfies, at the on-axis point
(r, 0), the radial reduction of the graph equation: the jet there is
(fx, fy, fxx, fxy, fyy) = (f', 0, f'', 0, f'/r).  Rather than writing the
resulting second-order ODE in closed form, each step solves the scalar
equation H(jet) = H_target for f'', which is exact because the second
fundamental form is affine in the second derivatives.

Shooting starts from the regularity expansion at the pole (f'(0) = 0, both
principal curvatures equal, so f''(0) = H) and integrates outward with an
adaptive Runge-Kutta scheme until the angle function crosses 1e-6: the
equator of the rotational sphere, where the graph turns vertical.  The
upward orientation is used, so the profile rises from the pole; the
pole-to-equator height equals the hemisphere height of the downward cap by
the orientation-reversing isometry (x, y, z) -> (x, -y, -z).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from . import model
from .errors import EktauError, NoSphere, SingularStep, UnsupportedSign
from .graph_geometry import shape_scalar
from .model import SpaceParams

EQUATOR_NU = 1e-6


@dataclass
class ProfileCurve:
    """Radial samples (r, f, f') of a rotational CMC graph."""

    H: float
    params: SpaceParams
    samples: np.ndarray        # (m, 3): r, f, f'
    nu: np.ndarray             # (m,)
    termination: str           # "equator" | "domain_boundary" | "step_limit"
    hemisphere_height: float | None

    def to_columnar(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("# r f fprime nu\n")
            for (r, f, fp), nv in zip(self.samples, self.nu):
                fh.write("%.17g %.17g %.17g %.17g\n" % (r, f, fp, nv))


@dataclass(frozen=True)
class PlanarCircle:
    """Constant-geodesic-curvature circle in the base plane."""

    params: SpaceParams
    geodesic_curvature: float
    radius: float              # Euclidean (kappa=0) or hyperbolic geodesic radius
    closed: bool
    model_radius: float = float("nan")


def _radial_eval(r: float, p: float, params: SpaceParams):
    """(H at f''=0, dH/df'', nu) for the radial jet at (r, 0)."""
    H0, nu, _, dH = shape_scalar(r, 0.0, p, 0.0, 0.0, 0.0, p / r, params, +1)
    return H0, dH, nu


def _solve_fpp(r: float, p: float, H_target: float, params: SpaceParams) -> float:
    H0, dH, _ = _radial_eval(r, p, params)
    if not math.isfinite(dH) or abs(dH) < 1e-300:
        raise SingularStep("cannot solve for f'' at r=%g (dH/df''=%g)" % (r, dH))
    return (H_target - H0) / dH


def _series_quartic(H: float, params: SpaceParams, r_star: float) -> float:
    """Quartic coefficient of the pole expansion f = H r^2/2 + a4 r^4 + ...

    Fixed-point fit against the radial equation at r_star; in the flat case
    the limit is H^3/8.
    """
    a4 = 0.0
    for _ in range(8):
        p = H * r_star + 4.0 * a4 * r_star**3
        fpp = _solve_fpp(r_star, p, H, params)
        a4_new = (fpp - H) / (12.0 * r_star**2)
        if abs(a4_new - a4) < 1e-12 * (1.0 + abs(a4_new)):
            a4 = a4_new
            break
        a4 = a4_new
    return a4


def shoot_rotational_graph(H: float, params: SpaceParams,
                           step: float | None = None) -> ProfileCurve:
    """Integrate the rotational profile from the pole to the equator.

    `step` sets the series-start radius (10*step) and the integration
    tolerance; the default resolves the profile to well below 1e-6 in the
    hemisphere height.
    """
    if params.kappa > 0:
        raise UnsupportedSign("rotational shooting restricted to kappa <= 0")
    if not model.sphere_exists(H, params):
        raise NoSphere("no rotational sphere: 4H^2 + kappa = %g <= 0"
                       % (4 * H * H + params.kappa))
    if step is None:
        step = 0.002 / H
    if step <= 0:
        raise ValueError("step must be positive")

    r0 = 10.0 * step
    a4 = _series_quartic(H, params, r0)
    f0 = 0.5 * H * r0**2 + a4 * r0**4
    p0 = H * r0 + 4.0 * a4 * r0**3
    rtol = min(1e-8, max(1e-12, (H * step) ** 2 * 1e-2))
    atol = rtol * 1e-2 * (1.0 + 1.0 / H)
    r_dom = math.inf
    if params.kappa < 0:
        r_dom = params.domain_radius * (1.0 - 1e-9)

    # Phase 1: integrate f(r) while the graph is far from vertical.  The
    # r-parametrization turns stiff as nu -> 0, so stop at nu = 1e-2.
    def rhs_r(r, y):
        return (y[1], _solve_fpp(r, y[1], H, params))

    def steepening(r, y):
        _, _, nu = _radial_eval(r, y[1], params)
        return nu - 1e-2
    steepening.terminal = True
    steepening.direction = -1

    events1 = [steepening]
    r_max = min(8.0 / H, r_dom)
    if params.kappa < 0:
        def domain_edge_r(r, y):
            return r_dom - r
        domain_edge_r.terminal = True
        events1.append(domain_edge_r)

    sol1 = solve_ivp(rhs_r, (r0, r_max), (f0, p0), method="RK45",
                     rtol=rtol, atol=atol, events=events1)
    if not sol1.success and sol1.status != 1:
        raise SingularStep("profile integration failed: %s" % sol1.message)

    r_ser = np.linspace(0.0, r0, 6)
    f_ser = 0.5 * H * r_ser**2 + a4 * r_ser**4
    p_ser = H * r_ser + 4.0 * a4 * r_ser**3
    rr = np.concatenate([r_ser[:-1], sol1.t])
    ff = np.concatenate([f_ser[:-1], sol1.y[0]])
    pp = np.concatenate([p_ser[:-1], sol1.y[1]])

    if sol1.status == 1 and params.kappa < 0 and len(sol1.t_events[1]):
        termination, hemi = "domain_boundary", None
    elif sol1.status != 1:
        termination, hemi = "step_limit", None
    else:
        # Phase 2: approach the equator in s = log f'.  The slope grows
        # monotonically, so the vertical point cannot be overstepped, and
        # the geometric stretching keeps the step count small.
        r1 = float(sol1.t_events[0][0])
        f1, p1 = (float(v) for v in sol1.y_events[0][0])

        def rhs_s(s, y):
            p = math.exp(s)
            fpp = _solve_fpp(y[0], p, H, params)
            if fpp <= 0:
                raise SingularStep("profile lost convexity near the equator")
            return (p / fpp, p * p / fpp)

        def equator(s, y):
            _, _, nu = _radial_eval(y[0], math.exp(s), params)
            return nu - EQUATOR_NU
        equator.terminal = True
        equator.direction = -1

        events2 = [equator]
        if params.kappa < 0:
            def domain_edge_s(s, y):
                return r_dom - y[0]
            domain_edge_s.terminal = True
            events2.append(domain_edge_s)

        s1 = math.log(p1)
        sol2 = solve_ivp(rhs_s, (s1, math.log(1e9)), (r1, f1), method="RK45",
                         rtol=rtol, atol=atol, events=events2)
        if not sol2.success and sol2.status != 1:
            raise SingularStep("equator approach failed: %s" % sol2.message)
        # the first phase-2 sample repeats the handoff point
        rr = np.concatenate([rr, sol2.y[0][1:]])
        ff = np.concatenate([ff, sol2.y[1][1:]])
        pp = np.concatenate([pp, np.exp(sol2.t[1:])])
        if sol2.status == 1 and len(sol2.t_events[0]):
            # the terminal event point is the last appended sample
            termination = "equator"
            hemi = float(sol2.y_events[0][0][1])
        elif sol2.status == 1:
            termination, hemi = "domain_boundary", None
        else:
            termination, hemi = "step_limit", None

    nu = np.empty_like(rr)
    nu[0] = 1.0
    for i in range(1, len(rr)):
        _, _, nu[i] = _radial_eval(rr[i], pp[i], params)

    return ProfileCurve(H=H, params=params,
                        samples=np.stack([rr, ff, pp], axis=1), nu=nu,
                        termination=termination, hemisphere_height=hemi)


def hemisphere_height(H: float, params: SpaceParams,
                      step: float | None = None) -> float:
    """Pole-to-equator height of the rotational H-sphere's graphable half.

    Runs the shoot at the default (or given) step with one halved-step
    confirmation; disagreement beyond 1e-6 of the height scale aborts.
    """
    if step is None:
        step = 0.002 / H
    prof = shoot_rotational_graph(H, params, step)
    if prof.termination != "equator" or prof.hemisphere_height is None:
        raise NoSphere("profile did not reach an equator (termination=%s)"
                       % prof.termination)
    confirm = shoot_rotational_graph(H, params, 0.5 * step)
    if confirm.hemisphere_height is None:
        raise NoSphere("refinement profile did not reach an equator")
    h1, h2 = prof.hemisphere_height, confirm.hemisphere_height
    if abs(h1 - h2) > 1e-6 * max(1.0, abs(h2)):
        raise EktauError("hemisphere height failed refinement confirmation: "
                         "%.12g vs %.12g" % (h1, h2))
    return h2


def _circle_geodesic_curvature(r_model: float, params: SpaceParams) -> float:
    """Geodesic curvature of the origin-centered base circle of model radius r.

    Generic curve-curvature evaluation in the conformal base metric
    lam^2 (dx^2 + dy^2): acceleration through the 2D Christoffels, projected
    orthogonally to the tangent.  Evaluated at (r, 0) by symmetry.
    """
    lam, lam_x, lam_y, *_ = model.conformal_factor_jet(r_model, 0.0, params)
    lam = float(lam); lam_x = float(lam_x); lam_y = float(lam_y)
    # c(t) = (r cos t, r sin t) at t=0: c' = (0, r), c'' = (-r, 0)
    cp = np.array([0.0, r_model])
    cpp = np.array([-r_model, 0.0])
    dln = np.array([lam_x / lam, lam_y / lam])
    # conformal Christoffels: G^k_ij = d_i ln(lam) delta_kj + d_j ln(lam) delta_ki
    #                                  - d_k ln(lam) delta_ij
    acc = cpp.copy()
    for k in range(2):
        s = 0.0
        for i in range(2):
            for j in range(2):
                gam = (dln[j] if k == i else 0.0) + (dln[i] if k == j else 0.0) \
                    - (dln[k] if i == j else 0.0)
                s += gam * cp[i] * cp[j]
        acc[k] += s
    g = lam * lam * np.eye(2)
    speed2 = cp @ g @ cp
    T = cp / math.sqrt(speed2)
    a_perp = acc - (acc @ g @ T) * T
    return float(math.sqrt(a_perp @ g @ a_perp) / speed2)


def cmc_cylinder_curve(H: float, params: SpaceParams) -> PlanarCircle:
    """Base curve of the vertical cylinder with mean curvature H.

    The cylinder over a base curve gamma has constant mean curvature H
    exactly when the geodesic curvature of gamma is 2H; the curve closes up
    iff (2H)^2 + kappa > 0.  For kappa < 0 the geodesic radius of the closed
    circle is found by a root solve of the numerically evaluated geodesic
    curvature against 2H.
    """
    if H <= 0:
        raise ValueError("cylinder curve needs H > 0")
    if params.kappa > 0:
        raise UnsupportedSign("cylinder curves restricted to kappa <= 0")
    kg = 2.0 * H
    closed = kg * kg + params.kappa > 0
    if params.kappa == 0:
        return PlanarCircle(params=params, geodesic_curvature=kg,
                            radius=1.0 / kg, closed=True, model_radius=1.0 / kg)
    if not closed:
        return PlanarCircle(params=params, geodesic_curvature=kg,
                            radius=float("nan"), closed=False)
    R = params.domain_radius
    r_model = brentq(lambda r: _circle_geodesic_curvature(r, params) - kg,
                     1e-9 * R, R * (1.0 - 1e-12), xtol=1e-15, rtol=8.9e-16)
    rho = model.base_distance((0.0, 0.0), (r_model, 0.0), params)
    return PlanarCircle(params=params, geodesic_curvature=kg, radius=rho,
                        closed=True, model_radius=float(r_model))

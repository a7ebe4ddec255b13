"""Dirichlet solver for vertical graphs of prescribed constant mean curvature.

The unknown is the nodal height field on a uniform lattice covering the
domain.  Nodal jets come from centered second-order differences; at each
interior node the residual is H(jet) - H_target, driven to zero by a damped
Newton iteration whose Jacobian combines the exact sensitivities of H with
respect to the second derivatives with centered differences for the first
derivatives.

Disk domains close the stencils with ghost values extrapolated along the
lattice direction whose circle crossing lies closest to the ghost: the
Dirichlet value is imposed at the exact crossing point and a quadratic
(falling back to linear for thin cuts) through the crossing and one or two
interior nodes defines the ghost value.  The closure is linear in the
unknowns, so it folds into the Jacobian exactly.

Vertical translations are isometries, so the solver always works with
boundary value zero internally and shifts the result; translation
equivariance holds to the bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import model
from .errors import (ConfigInvalid, NonConvergence, NotConverged, OutOfDomain,
                     VerticalBlowup)
from .graph_geometry import (AmbientCache, mean_curvature_arrays,
                             mean_curvature_sensitivities, shape_arrays)
from .model import SpaceParams

BLOWUP_NU = 1e-3

# ghost extrapolation: crossing fraction above which the quadratic through
# the nearest node is ill conditioned and the closure skips that node
_GHOST_QUADRATIC_LIMIT = 0.8


@dataclass
class SolverConfig:
    tol_residual: float = 1e-10
    max_newton: int = 50
    damping: float = 1.0
    continuation_steps: int = 12
    # relative step for the finite-difference linearization of the graph
    # operator with respect to the first-order jet entries
    jet_fd_step: float = 1e-6
    auto_continue: bool = True

    def __post_init__(self):
        if self.tol_residual <= 0:
            raise ConfigInvalid("tol_residual must be positive")
        if self.max_newton < 1:
            raise ConfigInvalid("max_newton must be >= 1")


class DomainGrid:
    """Uniform lattice with an interior mask over a disk or rectangle.

    The lattice covers the bounding box with n nodes per side.  `interior`
    flags the unknowns; for disks, `ghost` flags exterior nodes adjacent to
    the interior whose values are defined by the boundary closure.
    """

    def __init__(self, shape: str, center, n: int, params: SpaceParams,
                 radius: float | None = None, extents=None):
        if n < 8:
            raise ConfigInvalid("need n >= 8 nodes per side")
        if shape not in ("disk", "rectangle"):
            raise ConfigInvalid("shape must be 'disk' or 'rectangle'")
        self.shape = shape
        self.center = (float(center[0]), float(center[1]))
        self.n = int(n)
        self.params = params
        cx, cy = self.center
        if shape == "disk":
            if radius is None or radius <= 0:
                raise ConfigInvalid("disk grid needs a positive radius")
            self.radius = float(radius)
            self.extents = (self.radius, self.radius)
        else:
            if extents is None:
                raise ConfigInvalid("rectangle grid needs extents")
            self.radius = None
            self.extents = (float(extents[0]), float(extents[1]))
            if min(self.extents) <= 0:
                raise ConfigInvalid("extents must be positive")
        ex, ey = self.extents
        self.xs = np.linspace(cx - ex, cx + ex, self.n)
        self.ys = np.linspace(cy - ey, cy + ey, self.n)
        self.hx = self.xs[1] - self.xs[0]
        self.hy = self.ys[1] - self.ys[0]
        self.X, self.Y = np.meshgrid(self.xs, self.ys, indexing="ij")

        if shape == "disk":
            r2 = (self.X - cx) ** 2 + (self.Y - cy) ** 2
            self.interior = r2 < self.radius**2 * (1.0 - 1e-12)
        else:
            self.interior = np.zeros((self.n, self.n), dtype=bool)
            self.interior[1:-1, 1:-1] = True

        if not params.contains(self.X[self.interior], self.Y[self.interior]):
            raise OutOfDomain("grid interior leaves the model domain")

        self._index_interior()
        self._build_closure()
        self._build_stencils()
        self._amb: AmbientCache | None = None

    # -- masks and indexing ------------------------------------------------

    def _index_interior(self):
        self.n_interior = int(self.interior.sum())
        self.idx = -np.ones((self.n, self.n), dtype=np.int64)
        self.idx[self.interior] = np.arange(self.n_interior)
        ii, jj = np.nonzero(self.interior)
        self.interior_ij = np.stack([ii, jj], axis=1)
        # neighbours (8-connectivity) of the interior define the ghost band
        near = np.zeros_like(self.interior)
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                if di == dj == 0:
                    continue
                src = self.interior[
                    max(0, -di):self.n - max(0, di),
                    max(0, -dj):self.n - max(0, dj)]
                near[max(0, di):self.n - max(0, -di),
                     max(0, dj):self.n - max(0, -dj)] |= src
        self.ghost = near & ~self.interior

    # -- boundary closure --------------------------------------------------

    def _build_closure(self):
        """full = closure_A @ u + closure_b * boundary_value."""
        n2 = self.n * self.n
        rows, cols, vals = [], [], []
        b = np.zeros(n2)
        flat = lambda i, j: i * self.n + j
        for k in range(self.n_interior):
            i, j = self.interior_ij[k]
            rows.append(flat(i, j)); cols.append(k); vals.append(1.0)
        if self.shape == "rectangle":
            edge = ~self.interior
            b[edge.ravel()] = 1.0
        else:
            exterior = ~self.interior & ~self.ghost
            b[exterior.ravel()] = 1.0
            for i, j in zip(*np.nonzero(self.ghost)):
                w = self._ghost_weights(i, j)
                b[flat(i, j)] = w["bv"]
                for (ni, nj), wt in w["nodes"]:
                    rows.append(flat(i, j)); cols.append(self.idx[ni, nj])
                    vals.append(wt)
        self.closure_A = sp.csr_matrix(
            (vals, (rows, cols)), shape=(n2, self.n_interior))
        self.closure_b = b

    def _ghost_weights(self, i: int, j: int) -> dict:
        cx, cy = self.center
        R = self.radius
        pg = np.array([self.xs[i], self.ys[j]])
        best = None
        # axis directions first; diagonals as fallback
        dirs = [(1, 0), (-1, 0), (0, 1), (0, -1),
                (1, 1), (1, -1), (-1, 1), (-1, -1)]
        for di, dj in dirs:
            i1, j1 = i + di, j + dj
            if not (0 <= i1 < self.n and 0 <= j1 < self.n) or not self.interior[i1, j1]:
                continue
            p1 = np.array([self.xs[i1], self.ys[j1]])
            d = p1 - pg
            a = d @ d
            bq = 2.0 * d @ (pg - np.array([cx, cy]))
            cq = (pg - np.array([cx, cy])) @ (pg - np.array([cx, cy])) - R * R
            disc = bq * bq - 4 * a * cq
            if disc < 0:
                continue
            sq = math.sqrt(disc)
            for s in ((-bq - sq) / (2 * a), (-bq + sq) / (2 * a)):
                if -1e-12 <= s <= 1.0 + 1e-12:
                    s = min(max(s, 0.0), 1.0)
                    cand = (s, (di, dj), (i1, j1))
                    if best is None or s < best[0]:
                        best = cand
                    break
        if best is None:
            # isolated corner ghost; pin it to the boundary value
            return {"bv": 1.0, "nodes": []}
        s, (di, dj), (i1, j1) = best
        i2, j2 = i1 + di, j1 + dj
        have_n2 = (0 <= i2 < self.n and 0 <= j2 < self.n
                   and self.interior[i2, j2])
        if s <= _GHOST_QUADRATIC_LIMIT and have_n2:
            # quadratic through the crossing (distance s in units of the
            # step) and the nodes at distances 1 and 2, evaluated at 0
            w_bv = 2.0 / ((1.0 - s) * (2.0 - s))
            w1 = -2.0 * s / (1.0 - s)
            w2 = s / (2.0 - s)
            return {"bv": w_bv, "nodes": [((i1, j1), w1), ((i2, j2), w2)]}
        if s > _GHOST_QUADRATIC_LIMIT and have_n2:
            # crossing sits almost on the nearest node: skip it so the
            # weights stay bounded as s -> 1
            w_bv = 2.0 / (2.0 - s)
            w2 = -s / (2.0 - s)
            return {"bv": w_bv, "nodes": [((i2, j2), w2)]}
        s = min(s, _GHOST_QUADRATIC_LIMIT)
        w_bv = 1.0 / (1.0 - s)
        w1 = -s / (1.0 - s)
        return {"bv": w_bv, "nodes": [((i1, j1), w1)]}

    # -- stencil matrices ---------------------------------------------------

    def _build_stencils(self):
        """Sparse maps from full lattice values to interior-node jets."""
        n = self.n
        hx, hy = self.hx, self.hy
        flat = lambda i, j: i * n + j
        mats = {}
        stencils = {
            "fx": [((1, 0), 1 / (2 * hx)), ((-1, 0), -1 / (2 * hx))],
            "fy": [((0, 1), 1 / (2 * hy)), ((0, -1), -1 / (2 * hy))],
            "fxx": [((1, 0), 1 / hx**2), ((0, 0), -2 / hx**2), ((-1, 0), 1 / hx**2)],
            "fyy": [((0, 1), 1 / hy**2), ((0, 0), -2 / hy**2), ((0, -1), 1 / hy**2)],
            "fxy": [((1, 1), 1 / (4 * hx * hy)), ((-1, -1), 1 / (4 * hx * hy)),
                    ((1, -1), -1 / (4 * hx * hy)), ((-1, 1), -1 / (4 * hx * hy))],
        }
        for name, entries in stencils.items():
            rows, cols, vals = [], [], []
            for k in range(self.n_interior):
                i, j = self.interior_ij[k]
                for (di, dj), w in entries:
                    rows.append(k); cols.append(flat(i + di, j + dj)); vals.append(w)
            mats[name] = sp.csr_matrix(
                (vals, (rows, cols)), shape=(self.n_interior, n * n))
        self.stencil = mats
        # composed with the closure: interior unknowns -> jets directly
        self.stencil_u = {k: (m @ self.closure_A).tocsr() for k, m in mats.items()}
        self.stencil_b = {k: m @ self.closure_b for k, m in mats.items()}

    # -- helpers -------------------------------------------------------------

    def ambient(self) -> AmbientCache:
        if self._amb is None:
            ii, jj = self.interior_ij[:, 0], self.interior_ij[:, 1]
            self._amb = AmbientCache(self.X[ii, jj], self.Y[ii, jj], self.params)
        return self._amb

    def full_values(self, u: np.ndarray, boundary_value: float = 0.0) -> np.ndarray:
        v = self.closure_A @ u + self.closure_b * boundary_value
        return v.reshape(self.n, self.n)

    def boundary_distance(self) -> np.ndarray:
        """Base-plane distance of each interior node to the domain boundary."""
        ii, jj = self.interior_ij[:, 0], self.interior_ij[:, 1]
        x, y = self.X[ii, jj], self.Y[ii, jj]
        p = self.params
        if self.shape == "disk":
            cx, cy = self.center
            if p.kappa == 0:
                r = np.hypot(x - cx, y - cy)
                return self.radius - r
            # radial geodesic distance in the conformal disk model
            d = np.array([
                model.base_distance((cx, cy), (xi, yi), p) for xi, yi in zip(x, y)])
            dR = model.base_distance((cx, cy), (cx + self.radius, cy), p)
            return dR - d
        if p.kappa == 0:
            cx, cy = self.center
            ex, ey = self.extents
            return np.minimum.reduce([
                x - (cx - ex), (cx + ex) - x, y - (cy - ey), (cy + ey) - y])
        # hyperbolic rectangle: sample the boundary and take the minimum
        ts = np.linspace(0.0, 1.0, 4 * self.n)
        cx, cy = self.center
        ex, ey = self.extents
        edges = np.concatenate([
            np.stack([cx - ex + 2 * ex * ts, np.full_like(ts, cy - ey)], 1),
            np.stack([cx - ex + 2 * ex * ts, np.full_like(ts, cy + ey)], 1),
            np.stack([np.full_like(ts, cx - ex), cy - ey + 2 * ey * ts], 1),
            np.stack([np.full_like(ts, cx + ex), cy - ey + 2 * ey * ts], 1)])
        out = np.empty(len(x))
        for k, (xi, yi) in enumerate(zip(x, y)):
            out[k] = min(model.base_distance((xi, yi), (bx, by), p)
                         for bx, by in edges)
        return out

    def descriptor(self) -> dict:
        d = {"shape": self.shape, "center": list(self.center), "n": self.n}
        if self.shape == "disk":
            d["radius"] = self.radius
        else:
            d["extents"] = list(self.extents)
        return d

    @classmethod
    def from_descriptor(cls, d: dict, params: SpaceParams) -> "DomainGrid":
        return cls(shape=d["shape"], center=tuple(d["center"]), n=int(d["n"]),
                   params=params, radius=d.get("radius"),
                   extents=tuple(d["extents"]) if "extents" in d else None)


def disk_grid(radius: float, n: int, params: SpaceParams, center=(0.0, 0.0)) -> DomainGrid:
    return DomainGrid("disk", center, n, params, radius=radius)


def rectangle_grid(extents, n: int, params: SpaceParams, center=(0.0, 0.0)) -> DomainGrid:
    return DomainGrid("rectangle", center, n, params, extents=extents)


@dataclass
class GraphSolution:
    """Converged graph over a masked grid with convergence metadata."""

    grid: DomainGrid
    values: np.ndarray
    params: SpaceParams
    H_target: float
    boundary_value: float
    residual_max: float
    converged: bool
    min_abs_nu: float
    max_sigma_interior: float
    newton_iterations: int = 0
    orientation: int = -1

    def interior_values(self) -> np.ndarray:
        return self.values[self.grid.interior]

    def jets(self):
        """Nodal jet arrays (fx, fy, fxx, fxy, fyy) at interior nodes."""
        full = (self.values - self.boundary_value).ravel()
        g = self.grid
        return tuple(g.stencil[k] @ full for k in ("fx", "fy", "fxx", "fxy", "fyy"))

    def to_record(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "grid": self.grid.descriptor(),
            "H_target": self.H_target,
            "boundary_value": self.boundary_value,
            "residual_max": self.residual_max,
            "converged": self.converged,
            "min_abs_nu": self.min_abs_nu,
            "max_sigma_interior": self.max_sigma_interior,
            "newton_iterations": self.newton_iterations,
            "orientation": self.orientation,
            "blowup_threshold": BLOWUP_NU,
            "values": [float(v) for v in self.values.ravel()],
        }

    @classmethod
    def from_record(cls, rec: dict) -> "GraphSolution":
        params = SpaceParams.from_dict(rec["params"])
        grid = DomainGrid.from_descriptor(rec["grid"], params)
        values = np.array(rec["values"], dtype=float).reshape(grid.n, grid.n)
        return cls(grid=grid, values=values, params=params,
                   H_target=float(rec["H_target"]),
                   boundary_value=float(rec["boundary_value"]),
                   residual_max=float(rec["residual_max"]),
                   converged=bool(rec["converged"]),
                   min_abs_nu=float(rec["min_abs_nu"]),
                   max_sigma_interior=float(rec["max_sigma_interior"]),
                   newton_iterations=int(rec.get("newton_iterations", 0)),
                   orientation=int(rec.get("orientation", -1)))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_record(), fh, sort_keys=True)

    @classmethod
    def load(cls, path) -> "GraphSolution":
        with open(path) as fh:
            return cls.from_record(json.load(fh))


def _jets_from_u(grid: DomainGrid, u: np.ndarray):
    return {k: grid.stencil_u[k] @ u for k in ("fx", "fy", "fxx", "fxy", "fyy")}


def _residual(grid: DomainGrid, u, H_target, orientation):
    j = _jets_from_u(grid, u)
    H, nu = mean_curvature_arrays(grid.ambient(), j["fx"], j["fy"],
                                  j["fxx"], j["fxy"], j["fyy"], orientation)
    return H - H_target, nu, j


def _jacobian(grid: DomainGrid, j, orientation, fd_step):
    _, _, dH = mean_curvature_sensitivities(
        grid.ambient(), j["fx"], j["fy"], j["fxx"], j["fxy"], j["fyy"],
        orientation, fd_step=fd_step)
    J = None
    for name in ("fx", "fy", "fxx", "fxy", "fyy"):
        term = sp.diags(dH[name]) @ grid.stencil_u[name]
        J = term if J is None else J + term
    return J.tocsc()


def _newton(grid: DomainGrid, H_target: float, cfg: SolverConfig,
            orientation: int, u0: np.ndarray):
    """Damped Newton on the nodal residual; raises on blowup or stall."""
    u = u0.copy()
    r, nu, j = _residual(grid, u, H_target, orientation)
    if np.min(np.abs(nu)) < BLOWUP_NU:
        raise VerticalBlowup("initial iterate is not a graph: min|nu| < %g" % BLOWUP_NU)
    rnorm = float(np.max(np.abs(r)))
    forced_left = 25
    history: list[tuple[float, float]] = [(rnorm, float(np.min(np.abs(nu))))]
    chase = False
    for it in range(1, cfg.max_newton + 1):
        if rnorm <= cfg.tol_residual:
            return u, rnorm, nu, it - 1
        J = _jacobian(grid, j, orientation, cfg.jet_fd_step)
        try:
            du = spla.splu(J).solve(-r)
        except RuntimeError:
            # singular Jacobian: regularize (pseudo-transient step)
            mu = 1e-8 + 1e-2 * rnorm
            du = spla.splu((J + mu * sp.identity(J.shape[0], format="csc")).tocsc()).solve(-r)
        accepted = False
        if not chase:
            t = cfg.damping
            for _ in range(14):
                u_try = u + t * du
                try:
                    r_try, nu_try, j_try = _residual(grid, u_try, H_target, orientation)
                except Exception:
                    t *= 0.5
                    continue
                rn_try = float(np.max(np.abs(r_try)))
                if math.isfinite(rn_try) and rn_try < rnorm * (1.0 - 1e-4 * t):
                    u, r, nu, j, rnorm = u_try, r_try, nu_try, j_try, rn_try
                    accepted = True
                    break
                t *= 0.5
        if not accepted:
            # Near a fold the line search stalls while the Newton direction
            # still points along the steepening branch: keep taking full
            # steps as long as min|nu| strictly descends, so that genuine
            # non-existence terminates as the graph turning vertical rather
            # than as an unexplained stall.
            if forced_left <= 0:
                raise NonConvergence(
                    "Newton stalled at residual %.3e (H=%g)" % (rnorm, H_target))
            forced_left -= 1
            trial = None
            t = 1.0
            for _ in range(14):
                try:
                    r_try, nu_try, j_try = _residual(grid, u + t * du, H_target,
                                                     orientation)
                    rn_try = float(np.max(np.abs(r_try)))
                    if math.isfinite(rn_try):
                        trial = (u + t * du, r_try, nu_try, j_try, rn_try)
                        break
                except Exception:
                    pass
                t *= 0.5
            if trial is None:
                raise NonConvergence(
                    "Newton diverged at residual %.3e (H=%g)" % (rnorm, H_target))
            u_try, r_try, nu_try, j_try, rn_try = trial
            steepening = float(np.min(np.abs(nu_try))) < float(np.min(np.abs(nu)))
            if not steepening and rn_try >= rnorm:
                raise NonConvergence(
                    "Newton stalled at residual %.3e (H=%g)" % (rnorm, H_target))
            u, r, nu, j, rnorm = u_try, r_try, nu_try, j_try, rn_try
        if np.min(np.abs(nu)) < BLOWUP_NU:
            raise VerticalBlowup(
                "graph turned vertical during iteration: min|nu| < %g at H=%g"
                % (BLOWUP_NU, H_target))
        nu_min = float(np.min(np.abs(nu)))
        history.append((rnorm, nu_min))
        # Damped steps that barely move the residual while the graph keeps
        # steepening are the signature of a solution sliding past a fold:
        # switch to undamped steps so the verticality threshold is reached
        # instead of exhausting the iteration budget.
        if not chase and len(history) > 5:
            r_then, nu_then = history[-6]
            if rnorm > 0.98 * r_then and nu_min < 0.7 * nu_then:
                chase = True
    if rnorm <= cfg.tol_residual:
        return u, rnorm, nu, cfg.max_newton
    raise NonConvergence(
        "Newton exhausted %d iterations, residual %.3e (H=%g)"
        % (cfg.max_newton, rnorm, H_target))


def solve_dirichlet(grid: DomainGrid, boundary_value: float, H: float,
                    params: SpaceParams, cfg: SolverConfig | None = None,
                    orientation: int = -1,
                    init_values: np.ndarray | None = None) -> GraphSolution:
    """Solve H(graph jet) = H at every interior node, Dirichlet data on the boundary.

    The discrete problem is solved with boundary value zero and shifted
    afterwards.  init_values (full-lattice array, already relative to the
    same boundary value) warm-starts the iteration.
    """
    if grid.params.to_dict() != params.to_dict():
        raise ConfigInvalid("grid was built for different space parameters")
    if H < 0:
        raise ConfigInvalid("H must be >= 0 (flip the orientation instead)")
    cfg = cfg or SolverConfig()
    if init_values is not None:
        u0 = np.asarray(init_values, dtype=float).ravel()[
            grid.interior.ravel()] - boundary_value
    else:
        u0 = np.zeros(grid.n_interior)
    try:
        u, rnorm, nu, iters = _newton(grid, H, cfg, orientation, u0)
    except (NonConvergence, VerticalBlowup):
        if not (cfg.auto_continue and init_values is None and H > 0):
            raise
        # cold start overshot: ramp H up from zero; a blowup under the
        # warm-started ramp is genuine and propagates
        u = np.zeros(grid.n_interior)
        iters = 0
        for Hk in np.linspace(0.0, H, 5)[1:]:
            u, rnorm, nu, its = _newton(grid, float(Hk), cfg, orientation, u)
            iters += its
    full = grid.full_values(u, 0.0) + boundary_value
    j = _jets_from_u(grid, u)
    data = shape_arrays(grid.ambient(), j["fx"], j["fy"], j["fxx"], j["fxy"],
                        j["fyy"], orientation)
    return GraphSolution(
        grid=grid, values=full, params=params, H_target=H,
        boundary_value=boundary_value, residual_max=rnorm, converged=True,
        min_abs_nu=float(np.min(np.abs(data["nu"]))),
        max_sigma_interior=float(np.sqrt(np.max(data["sigma_sq"]))),
        newton_iterations=iters, orientation=orientation)


def graph_height(sol: GraphSolution) -> float:
    """Largest vertical offset from the boundary section."""
    if not sol.converged:
        raise NotConverged("height is defined for converged solutions")
    return float(np.max(np.abs(sol.interior_values() - sol.boundary_value)))


@dataclass
class ContinuationStep:
    H: float
    solution: GraphSolution | None
    failure: str | None
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.solution is not None

    @property
    def height(self) -> float | None:
        return graph_height(self.solution) if self.solution is not None else None


def continuation_in_H(grid: DomainGrid, boundary_value: float, H_min: float,
                      H_max: float, steps: int, params: SpaceParams,
                      cfg: SolverConfig | None = None,
                      orientation: int = -1) -> list[ContinuationStep]:
    """Warm-started sweep of solves over `steps` equispaced H values.

    Failures are recorded with their mode and never abort the sweep; each
    subsequent solve restarts from the last success.
    """
    if not (0 <= H_min < H_max):
        raise ConfigInvalid("need 0 <= H_min < H_max")
    if steps < 2:
        raise ConfigInvalid("need at least two sweep points")
    cfg = cfg or SolverConfig()
    out: list[ContinuationStep] = []
    warm: np.ndarray | None = None
    for H in np.linspace(H_min, H_max, steps):
        H = float(H)
        try:
            sol = solve_dirichlet(grid, boundary_value, H, params, cfg,
                                  orientation=orientation, init_values=warm)
            warm = sol.values
            out.append(ContinuationStep(H=H, solution=sol, failure=None))
        except VerticalBlowup as exc:
            out.append(ContinuationStep(H=H, solution=None,
                                        failure="vertical_blowup", message=str(exc)))
        except NonConvergence as exc:
            out.append(ContinuationStep(H=H, solution=None,
                                        failure="non_convergence", message=str(exc)))
    return out


def sigma_profile(sol: GraphSolution, n_bins: int = 10):
    """Max |sigma| binned by base-plane distance to the domain boundary."""
    if not sol.converged:
        raise NotConverged("sigma profile requires a converged solution")
    fx, fy, fxx, fxy, fyy = sol.jets()
    data = shape_arrays(sol.grid.ambient(), fx, fy, fxx, fxy, fyy,
                        sol.orientation)
    sigma = np.sqrt(np.maximum(data["sigma_sq"], 0.0))
    dist = sol.grid.boundary_distance()
    edges = np.linspace(0.0, float(dist.max()) + 1e-15, n_bins + 1)
    prof = []
    for k in range(n_bins):
        m = (dist >= edges[k]) & (dist < edges[k + 1])
        if not m.any():
            continue
        prof.append((float(0.5 * (edges[k] + edges[k + 1])), float(sigma[m].max())))
    return prof

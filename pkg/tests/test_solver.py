"""Dirichlet solver: oracles, invariants, continuation, serialization."""

import math

import numpy as np
import pytest

from ektau.errors import ConfigInvalid, NotConverged, OutOfDomain
from ektau.model import SpaceParams
from ektau.solver import (DomainGrid, GraphSolution, continuation_in_H,
                          disk_grid, graph_height, rectangle_grid,
                          sigma_profile, solve_dirichlet)

NIL = SpaceParams(0.0, 0.5)
PSL = SpaceParams(-1.0, 0.5)
FLAT = SpaceParams(0.0, 0.0)

CAP_ORACLE = 1.0 - math.sqrt(1.0 - 0.25)  # 1/H - sqrt(1/H^2 - R^2), H=1, R=1/2

# Dirichlet solve in Nil (tau=1/2) on the unit disk at H=0.8, frozen by
# Richardson extrapolation over n in {32, 64, 128} and cross-checked against
# the rotational profile through r=1 (0.5325537)
NIL_DISK_H08 = 0.53240


class TestGrids:
    def test_minimum_size(self):
        with pytest.raises(ConfigInvalid):
            disk_grid(0.5, 7, FLAT)

    def test_disk_mask_inside_model_domain(self):
        with pytest.raises(OutOfDomain):
            disk_grid(2.5, 24, PSL)

    def test_ghosts_touch_interior(self):
        g = disk_grid(0.7, 24, NIL)
        gi, gj = np.nonzero(g.ghost)
        for i, j in zip(gi, gj):
            neigh = g.interior[max(0, i - 1):i + 2, max(0, j - 1):j + 2]
            assert neigh.any()

    def test_closure_partition_of_unity(self):
        # ghost weights reproduce constants: A @ 1 + b = 1
        g = disk_grid(0.7, 32, PSL)
        ones = np.ones(g.n_interior)
        full = g.closure_A @ ones + g.closure_b
        np.testing.assert_allclose(full, 1.0, atol=1e-12)

    def test_descriptor_roundtrip(self):
        g = disk_grid(0.7, 24, NIL, center=(0.1, -0.2))
        g2 = DomainGrid.from_descriptor(g.descriptor(), NIL)
        assert g2.shape == "disk" and g2.n == 24 and g2.radius == 0.7
        r = rectangle_grid((0.4, 0.3), 16, FLAT)
        r2 = DomainGrid.from_descriptor(r.descriptor(), FLAT)
        assert r2.extents == (0.4, 0.3)


class TestSolveDirichlet:
    def test_zero_H_is_the_section(self):
        g = disk_grid(0.6, 24, NIL)
        sol = solve_dirichlet(g, 0.0, 0.0, NIL)
        assert sol.newton_iterations == 0
        assert sol.residual_max < 1e-10
        assert graph_height(sol) == 0.0

    def test_euclidean_cap_height(self):
        g = disk_grid(0.5, 64, FLAT)
        sol = solve_dirichlet(g, 0.0, 1.0, FLAT)
        assert graph_height(sol) == pytest.approx(CAP_ORACLE, rel=0.02)
        assert sol.residual_max <= 1e-10

    def test_defining_equation_holds_at_nodes(self):
        g = disk_grid(0.5, 32, FLAT)
        sol = solve_dirichlet(g, 0.0, 1.0, FLAT)
        from ektau.graph_geometry import mean_curvature_arrays
        fx, fy, fxx, fxy, fyy = sol.jets()
        H, _ = mean_curvature_arrays(g.ambient(), fx, fy, fxx, fxy, fyy,
                                     sol.orientation)
        assert np.abs(H - 1.0).max() <= 1e-10

    def test_translation_equivariance(self):
        g = disk_grid(0.5, 24, FLAT)
        a = solve_dirichlet(g, 0.0, 1.0, FLAT)
        b = solve_dirichlet(g, 1.3, 1.0, FLAT)
        np.testing.assert_allclose(b.values, a.values + 1.3, atol=1e-12)
        assert graph_height(a) == pytest.approx(graph_height(b), abs=1e-12)

    def test_single_sign_above_boundary(self):
        for params in (FLAT, NIL):
            g = disk_grid(0.6, 24, params)
            sol = solve_dirichlet(g, 0.0, 0.7, params)
            assert sol.interior_values().min() >= -1e-12

    def test_nil_unit_disk_frozen_value(self):
        g = disk_grid(1.0, 64, NIL)
        sol = solve_dirichlet(g, 0.0, 0.8, NIL)
        assert graph_height(sol) == pytest.approx(NIL_DISK_H08, abs=5e-4)
        assert sol.min_abs_nu > 0

    def test_refinement_ratio(self):
        hs = {}
        for n in (32, 64, 128):
            g = disk_grid(0.5, n, FLAT)
            hs[n] = graph_height(solve_dirichlet(g, 0.0, 1.0, FLAT))
        ratio = (hs[32] - hs[64]) / (hs[64] - hs[128])
        assert 3.5 <= ratio <= 4.5

    def test_rectangle_solve(self):
        g = rectangle_grid((0.4, 0.4), 24, FLAT)
        sol = solve_dirichlet(g, 0.0, 0.5, FLAT)
        assert sol.converged and graph_height(sol) > 0
        # boundary nodes carry the boundary value exactly
        edge = ~g.interior
        np.testing.assert_array_equal(sol.values[edge], 0.0)

    def test_mismatched_params_rejected(self):
        g = disk_grid(0.5, 24, FLAT)
        with pytest.raises(ConfigInvalid):
            solve_dirichlet(g, 0.0, 0.5, NIL)


class TestContinuation:
    def test_flat_unit_disk_blows_up_past_one(self):
        g = disk_grid(1.0, 32, FLAT)
        steps = continuation_in_H(g, 0.0, 0.0, 1.2, 13, FLAT)
        assert all(s.ok for s in steps if s.H <= 0.91)
        late = [s for s in steps if s.H > 1.05]
        assert late and all(s.failure == "vertical_blowup" for s in late)

    def test_zero_H_always_succeeds(self):
        g = disk_grid(0.8, 24, NIL)
        steps = continuation_in_H(g, 0.0, 0.0, 0.4, 3, NIL)
        assert steps[0].H == 0.0 and steps[0].ok

    def test_heights_nondecreasing_on_success_prefix(self):
        g = disk_grid(1.0, 32, FLAT)
        steps = continuation_in_H(g, 0.0, 0.0, 1.1, 12, FLAT)
        heights = [s.height for s in steps if s.ok]
        assert all(b >= a - 1e-6 for a, b in zip(heights, heights[1:]))

    def test_sweep_never_aborts(self):
        g = disk_grid(1.0, 24, NIL)
        steps = continuation_in_H(g, 0.0, 0.5, 2.0, 7, NIL)
        assert len(steps) == 7
        assert any(not s.ok for s in steps)


class TestSigmaProfile:
    def test_flat_section_is_totally_geodesic(self):
        g = disk_grid(0.6, 24, FLAT)
        sol = solve_dirichlet(g, 0.0, 0.0, FLAT)
        for _, s in sigma_profile(sol):
            assert s < 1e-12

    def test_nil_section_profile_matches_pointwise_norm(self):
        # sections with tau > 0 are minimal but not totally geodesic: the
        # profile reports the pointwise |sigma| of the section
        from ektau.graph_geometry import Jet2, shape_data
        g = disk_grid(0.8, 24, NIL)
        sol = solve_dirichlet(g, 0.0, 0.0, NIL)
        prof = sigma_profile(sol)
        assert prof
        # the twist vanishes on the fiber axis and grows outward
        assert max(s for _, s in prof) > 0.05
        oracle = max(
            math.sqrt(shape_data(Jet2(x, y, 0, 0, 0, 0, 0, 0), NIL).sigma_sq)
            for x, y in zip(g.X[g.interior], g.Y[g.interior]))
        assert max(s for _, s in prof) == pytest.approx(oracle, rel=1e-8)

    def test_euclidean_cap_is_umbilic(self):
        g = disk_grid(0.5, 48, FLAT)
        sol = solve_dirichlet(g, 0.0, 1.0, FLAT)
        prof = sigma_profile(sol)
        inner = [(d, s) for d, s in prof if d > 0.05]
        assert inner
        for _, s in inner:
            assert s == pytest.approx(math.sqrt(2.0), abs=2e-3)

    def test_bounded_far_from_boundary_across_sweep(self):
        g = disk_grid(1.0, 24, FLAT)
        steps = continuation_in_H(g, 0.0, 0.1, 0.9, 5, FLAT)
        far = []
        for s in steps:
            assert s.ok
            far.extend(v for d, v in sigma_profile(s.solution) if d > 0.2)
        assert max(far) < 5.0


class TestSerialization:
    def test_roundtrip(self, tmp_path):
        g = disk_grid(0.6, 24, NIL)
        sol = solve_dirichlet(g, 0.25, 0.6, NIL)
        path = tmp_path / "sol.json"
        sol.save(path)
        back = GraphSolution.load(path)
        assert graph_height(back) == graph_height(sol)
        np.testing.assert_array_equal(back.values, sol.values)
        assert back.params == sol.params
        assert back.H_target == sol.H_target

    def test_reloaded_jets_reproduce_residual(self, tmp_path):
        g = disk_grid(0.6, 24, NIL)
        sol = solve_dirichlet(g, 0.0, 0.6, NIL)
        path = tmp_path / "sol.json"
        sol.save(path)
        back = GraphSolution.load(path)
        from ektau.graph_geometry import mean_curvature_arrays
        fx, fy, fxx, fxy, fyy = back.jets()
        H, _ = mean_curvature_arrays(back.grid.ambient(), fx, fy, fxx, fxy,
                                     fyy, back.orientation)
        assert np.abs(H - 0.6).max() <= 10 * back.residual_max + 1e-12


class TestNotConvergedGuards:
    def test_graph_height_requires_convergence(self):
        g = disk_grid(0.5, 24, FLAT)
        sol = solve_dirichlet(g, 0.0, 0.5, FLAT)
        sol.converged = False
        with pytest.raises(NotConverged):
            graph_height(sol)
        with pytest.raises(NotConverged):
            sigma_profile(sol)

"""Rotational profiles, hemisphere heights, cylinder base curves."""

import math

import numpy as np
import pytest

from ektau.errors import NoSphere, UnsupportedSign
from ektau.model import SpaceParams
from ektau.rotational import (EQUATOR_NU, _circle_geodesic_curvature,
                              _series_quartic, cmc_cylinder_curve,
                              hemisphere_height, shoot_rotational_graph)

NIL = SpaceParams(0.0, 0.5)
PSL = SpaceParams(-1.0, 0.5)
FLAT = SpaceParams(0.0, 0.0)

# frozen by halved-step refinement (two resolutions agreeing to 1e-6)
NIL_HEMI_H1 = 1.0795583
PSL_HEMI_H1 = 1.3089867


class TestSeriesStart:
    def test_quartic_matches_flat_expansion(self):
        # flat profile 1/H - sqrt(1/H^2 - r^2) = H r^2/2 + H^3 r^4/8 + ...
        for H in (0.5, 1.0, 2.0):
            a4 = _series_quartic(H, FLAT, 0.02 / H)
            assert a4 == pytest.approx(H**3 / 8.0, rel=5e-3)


class TestShooting:
    def test_flat_profile_is_circle_arc(self):
        prof = shoot_rotational_graph(1.0, FLAT)
        r, f = prof.samples[:, 0], prof.samples[:, 1]
        m = r < 0.999
        np.testing.assert_allclose(f[m], 1 - np.sqrt(1 - r[m] ** 2), atol=1e-6)

    def test_equator_termination(self):
        for params in (FLAT, NIL, PSL):
            prof = shoot_rotational_graph(1.0, params)
            assert prof.termination == "equator"
            assert abs(prof.nu[-1]) < 2 * EQUATOR_NU
            assert abs(prof.samples[-1, 2]) > 1e4  # f' diverges exactly there

    def test_samples_strictly_increasing_and_regular_at_pole(self):
        prof = shoot_rotational_graph(0.8, NIL)
        r = prof.samples[:, 0]
        assert np.all(np.diff(r) > 0)
        assert prof.samples[0, 0] == 0.0
        assert prof.samples[0, 2] == 0.0  # f'(0) = 0

    def test_defining_equation_along_profile(self):
        # the accepted states satisfy H(jet) = H_target when the second
        # derivative is reconstructed from the integrated slope field
        from ektau.rotational import _solve_fpp
        from ektau.graph_geometry import shape_scalar
        prof = shoot_rotational_graph(1.0, NIL)
        worst = 0.0
        for r, f, p in prof.samples[5:-1]:
            fpp = _solve_fpp(r, p, 1.0, NIL)
            H, _, _, _ = shape_scalar(r, 0.0, p, 0.0, fpp, 0.0, p / r, NIL, +1)
            worst = max(worst, abs(H - 1.0))
        assert worst < 1e-8

    def test_no_sphere_raises(self):
        with pytest.raises(NoSphere):
            shoot_rotational_graph(0.49, PSL)
        with pytest.raises(NoSphere):
            shoot_rotational_graph(1.0, SpaceParams(-4.0, 0.5))

    def test_kappa_positive_rejected(self):
        with pytest.raises(UnsupportedSign):
            shoot_rotational_graph(1.0, SpaceParams(2.0, 0.1))

    def test_columnar_serialization(self, tmp_path):
        prof = shoot_rotational_graph(1.0, FLAT)
        path = tmp_path / "profile.dat"
        prof.to_columnar(path)
        data = np.loadtxt(path)
        assert data.shape == (len(prof.samples), 4)
        np.testing.assert_allclose(data[:, :3], prof.samples)
        np.testing.assert_allclose(data[:, 3], prof.nu)


class TestHemisphereHeight:
    def test_flat_one_over_H(self):
        for H in (0.5, 1.0, 2.0):
            assert hemisphere_height(H, FLAT) == pytest.approx(1.0 / H, abs=1e-4)

    def test_nil_frozen_value_and_refinement(self):
        coarse = shoot_rotational_graph(1.0, NIL, step=0.002)
        fine = shoot_rotational_graph(1.0, NIL, step=0.001)
        assert abs(coarse.hemisphere_height - fine.hemisphere_height) < 1e-6
        assert hemisphere_height(1.0, NIL) == pytest.approx(NIL_HEMI_H1, abs=1e-5)

    def test_psl_frozen_value(self):
        assert hemisphere_height(1.0, PSL) == pytest.approx(PSL_HEMI_H1, abs=1e-5)

    def test_decreasing_in_H(self):
        hs = [hemisphere_height(H, NIL) for H in (0.6, 1.0, 2.0, 5.0, 10.0)]
        assert all(a > b for a, b in zip(hs, hs[1:]))

    def test_height_decay_below_critical_fails(self):
        with pytest.raises(NoSphere):
            hemisphere_height(0.49, PSL)


class TestCylinderCurves:
    def test_flat_circle(self):
        c = cmc_cylinder_curve(1.0, FLAT)
        assert c.closed and c.radius == pytest.approx(0.5)
        assert c.geodesic_curvature == 2.0

    def test_closedness_matches_sphere_condition(self):
        c = cmc_cylinder_curve(1.0, SpaceParams(-4.0, 0.5))
        assert not c.closed and math.isnan(c.radius)
        c = cmc_cylinder_curve(1.01, SpaceParams(-4.0, 0.5))
        assert c.closed

    def test_hyperbolic_radius_against_closed_form(self):
        # geodesic circles of curvature k_g in curvature kappa = -a^2 have
        # k_g = a coth(a rho): rho = artanh(a / k_g) / a
        for H in (0.75, 1.0, 1.5):
            c = cmc_cylinder_curve(H, PSL)
            assert c.radius == pytest.approx(math.atanh(1.0 / (2 * H)), rel=1e-10)

    def test_numeric_curvature_evaluation(self):
        # the root-find target itself, cross-checked at the solved radius
        c = cmc_cylinder_curve(1.0, PSL)
        assert _circle_geodesic_curvature(c.model_radius, PSL) == pytest.approx(
            2.0, rel=1e-12)

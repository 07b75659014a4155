import itertools

import numpy as np
import pytest

from cellhom.geometry import (
    CellDomain,
    ResolutionError,
    boundary_nodes,
    localize_integrand,
    make_box_cell,
    make_cell,
    rotation_for_normal,
)
from cellhom.integrand import InputDomainError, area, euclid, laminate, validate_admissibility

NORMALS_2D = [(0.0, 1.0), (0.0, -1.0), (1.0, 0.0), (-1.0, 0.0), (0.6, 0.8), (-0.6, -0.8)]
NORMALS_3D = [(0.0, 0.0, 1.0), (0.0, 0.0, -1.0), (1.0, 0.0, 0.0), (2 / 3, 1 / 3, 2 / 3)]


class TestRotation:
    def test_identity_for_last_axis(self):
        R = rotation_for_normal((0.0, 1.0)).matrix
        np.testing.assert_allclose(R, np.eye(2))

    def test_antipodal_last_axis_is_flip(self):
        R = rotation_for_normal((0.0, -1.0)).matrix
        np.testing.assert_allclose(R, np.diag([1.0, -1.0]))
        np.testing.assert_allclose(R @ [0.0, 1.0], [0.0, -1.0], atol=1e-14)

    @pytest.mark.parametrize("nu", NORMALS_2D + NORMALS_3D)
    def test_defining_identities(self, nu):
        rot = rotation_for_normal(nu)
        R = rot.matrix
        n = len(nu)
        assert np.max(np.abs(R.T @ R - np.eye(n))) <= 1e-12
        e_n = np.zeros(n)
        e_n[-1] = 1.0
        assert np.linalg.norm(R @ e_n - np.asarray(nu)) <= 1e-12

    @pytest.mark.parametrize("nu", [(0.6, 0.8), (1.0, 0.0), (2 / 3, 1 / 3, 2 / 3)])
    def test_antipodal_cube_point_set(self, nu):
        # R(-nu) Q and R(nu) Q must coincide as point sets
        nu = np.asarray(nu)
        n = len(nu)
        Rp = rotation_for_normal(nu).matrix
        Rm = rotation_for_normal(-nu).matrix
        corners = np.array(list(itertools.product([-0.5, 0.5], repeat=n)))
        a = np.round(corners @ Rp.T, 12)
        b = np.round(corners @ Rm.T, 12)
        set_a = {tuple(row) for row in a}
        set_b = {tuple(row) for row in b}
        assert set_a == set_b

    def test_rational_normal_gives_rational_matrix(self):
        R = rotation_for_normal((0.6, 0.8)).matrix
        np.testing.assert_allclose(5 * R, np.round(5 * R), atol=1e-12)

    def test_rejects_non_unit(self):
        with pytest.raises(InputDomainError):
            rotation_for_normal((0.5, 0.5))
        with pytest.raises(InputDomainError):
            rotation_for_normal((0.0, 0.0))


class TestMakeCell:
    def test_unrotated_square(self):
        cell = make_cell(center=(0.0, 0.0), side=8.0, nu=(0.0, 1.0), k=1, h=1.0)
        assert cell.dims == (8, 8)
        assert cell.node_shape == (9, 9)
        np.testing.assert_allclose(cell.realised_sides, [8.0, 8.0])

    def test_elongated_extents(self):
        cell = make_cell(center=(0.0, 0.0), side=4.0, nu=(0.0, 1.0), k=3, h=0.5)
        np.testing.assert_allclose(cell.realised_sides, [12.0, 4.0])
        assert cell.node_shape == (25, 9)

    def test_volume_formula(self):
        cell = make_cell(center=(0.0, 0.0), side=4.0, nu=(0.0, 1.0), k=2, h=0.5)
        assert cell.volume == pytest.approx(2 ** (2 - 1) * 4.0**2)

    def test_resolution_error(self):
        with pytest.raises(ResolutionError):
            make_cell(center=(0.0, 0.0), side=1.0, nu=(0.0, 1.0), k=1, h=0.5)

    def test_rotated_cell_nodes_cover_rotated_box(self):
        cell = make_cell(center=(1.0, -2.0), side=4.0, nu=(0.6, 0.8), k=1, h=0.5)
        nodes = cell.global_nodes.reshape(-1, 2)
        back = (nodes - cell.center) @ cell.rotation.matrix
        assert np.max(np.abs(back)) <= 2.0 + 1e-12

    def test_frame_map_is_isometry(self, rng):
        cell = make_cell(center=(1.0, -2.0), side=4.0, nu=(0.6, 0.8), k=1, h=0.5)
        a, b = rng.normal(size=(2, 2))
        da = cell.frame_map(a) - cell.frame_map(b)
        assert np.linalg.norm(da) == pytest.approx(np.linalg.norm(a - b))


class TestBoundaryNodes:
    @pytest.fixture
    def grid3(self):
        # 3x3 nodes (2x2 cells)
        return make_box_cell((0.0, 1.0), lo=(0.0, 0.0), hi=(2.0, 2.0), h=1.0)

    def test_all_is_rim(self, grid3):
        assert len(boundary_nodes(grid3, "all")) == 8

    def test_para_is_top_and_bottom_rows(self, grid3):
        para = boundary_nodes(grid3, "para")
        assert len(para) == 6
        coords = grid3.local_nodes.reshape(-1, 2)[para]
        assert set(np.round(coords[:, 1], 12)) == {0.0, 2.0}

    def test_inclusion_exclusion(self, grid3):
        n_all = len(boundary_nodes(grid3, "all"))
        n_perp = len(boundary_nodes(grid3, "perp"))
        n_para = len(boundary_nodes(grid3, "para"))
        corners = set(boundary_nodes(grid3, "perp")) & set(boundary_nodes(grid3, "para"))
        assert n_all == n_perp + n_para - len(corners)
        assert len(corners) == 4

    def test_unknown_selector(self, grid3):
        with pytest.raises(InputDomainError):
            boundary_nodes(grid3, "sides")


class TestLocalizeIntegrand:
    def test_translation_only_for_identity_rotation(self):
        cell = make_cell(center=(2.0, 3.0), side=4.0, nu=(0.0, 1.0), k=1, h=0.5)
        g = laminate(1.0, 2.0)
        loc = localize_integrand(cell, g)
        z = np.array([[0.25, 0.0]])
        xi = np.ones((1, 1, 2))
        np.testing.assert_allclose(
            loc.eval_cells(z, xi), g.eval_cells(z + cell.center, xi)
        )

    def test_euclid_rotation_invariant(self, rng):
        cell = make_cell(center=(0.0, 0.0), side=4.0, nu=(0.6, 0.8), k=1, h=0.5)
        loc = localize_integrand(cell, euclid())
        for _ in range(10):
            z = rng.normal(size=(1, 2))
            xi = rng.normal(size=(1, 1, 2))
            assert loc.eval_cells(z, xi)[0] == pytest.approx(np.linalg.norm(xi))

    def test_laminate_becomes_local_normal_direction(self, rng):
        # laminate varying along y1, normal e1: locally the coefficient
        # varies along z2 (the last local axis maps onto the normal)
        cell = make_cell(center=(0.0, 0.0), side=4.0, nu=(1.0, 0.0), k=1, h=0.5)
        g = laminate(1.0, 2.0, segment=1.0, axis=0)
        loc = localize_integrand(cell, g)
        R, c = cell.rotation.matrix, cell.center
        for _ in range(20):
            z = rng.uniform(-2, 2, size=(1, 2))
            xi = rng.normal(size=(1, 1, 2))
            expected = g.eval_cells(z @ R.T + c, xi @ R.T)
            np.testing.assert_allclose(loc.eval_cells(z, xi), expected)
        z_sweep = np.column_stack([np.zeros(9), np.linspace(-2, 2, 9)])
        coeffs = loc.coeff_cells(z_sweep)
        assert len(set(np.round(coeffs, 12))) == 2

    def test_preserves_admissibility_constants(self):
        cell = make_cell(center=(0.7, -0.3), side=4.0, nu=(0.6, 0.8), k=1, h=0.5)
        g = laminate(1.0, 2.0)
        loc = localize_integrand(cell, g)
        report = validate_admissibility(loc)
        assert report.passed
        assert loc.C == g.C and loc.alpha == g.alpha

    def test_generic_integrand_transforms_gradient(self, rng):
        from cellhom.integrand import Integrand

        def aniso(x, xi):
            return float(abs(xi[0, 0]) + 0.5 * abs(xi[0, 1]))

        g = Integrand.from_pointwise("aniso", aniso, C=2.0, alpha=0.5)
        cell = make_cell(center=(0.0, 0.0), side=4.0, nu=(0.6, 0.8), k=1, h=0.5)
        loc = localize_integrand(cell, g)
        R = cell.rotation.matrix
        z = rng.normal(size=(3, 2))
        xi = rng.normal(size=(3, 1, 2))
        np.testing.assert_allclose(
            loc.eval_cells(z, xi), g.eval_cells(z @ R.T, xi @ R.T)
        )

import logging

import numpy as np
import pytest

import lie_euclid
from errors import ValidationError
from forms import BodyGrid
from kinematics import (Configuration, DisplacementField, StrainState, apply_motion, exponential_configuration,
                        finite_strain, infinitesimal_strain, linearization_check, moving_frames_strain,
                        section_change)
from presets import get_configuration_preset, get_displacement_preset

# Configure logging
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=logging.DEBUG
)
logger = logging.getLogger(__name__)

GRID = BodyGrid.unit_cube(8)


def test_rigid_configuration_has_zero_strain():
    rng = np.random.default_rng(11)
    for _ in range(5):
        cfg = Configuration.rigid(GRID, lie_euclid.random_motion(rng))
        assert finite_strain(cfg).max_abs() < 1e-12
    cfg = get_configuration_preset("rigid").configuration(GRID)
    assert finite_strain(cfg).max_abs() < 1e-12


def test_identity_and_translation_presets():
    for name in ("identity", "translation"):
        cfg = get_configuration_preset(name).configuration(GRID)
        assert finite_strain(cfg).max_abs() < 1e-12, f"{name} preset should be strain free"


def test_dilation_and_shear_strain():
    E = finite_strain(get_configuration_preset("dilation").configuration(GRID))
    for a in range(3):
        expected = np.zeros(6)
        expected[a] = 1.0
        np.testing.assert_allclose(E.block(a), np.broadcast_to(expected, GRID.vertex_shape + (6,)), atol=1e-12)
    E = finite_strain(get_configuration_preset("shear").configuration(GRID))
    np.testing.assert_allclose(E.block(1)[..., 0], 1.0, atol=1e-12)
    assert np.max(np.abs(E.block(0))) < 1e-12


def test_twist_gives_constant_curvature():
    E = finite_strain(get_configuration_preset("twist").configuration(GRID))
    np.testing.assert_allclose(E.block(2)[..., 3:], np.broadcast_to([0.0, 0.0, 0.5], GRID.vertex_shape + (3,)),
                               atol=2e-3)
    assert np.max(np.abs(E.block(0)[..., 3:])) < 1e-12


def test_shear_displacement_strain():
    strain = infinitesimal_strain(get_displacement_preset("shear").field(GRID))
    np.testing.assert_allclose(strain.eps[..., 1, 0], 1.0, atol=1e-12)
    eps = strain.eps.copy()
    eps[..., 1, 0] = 0.0
    assert np.max(np.abs(eps)) < 1e-12
    assert np.max(np.abs(strain.tau)) < 1e-12


def test_microrotation_strain_is_antisymmetric():
    """eps_ij = -e_ijk phi_k for a constant microrotation and no displacement"""
    strain = infinitesimal_strain(get_displacement_preset("rotation").field(GRID))
    np.testing.assert_allclose(strain.eps[..., 0, 1], -0.5, atol=1e-14)
    np.testing.assert_allclose(strain.eps[..., 1, 0], 0.5, atol=1e-14)
    np.testing.assert_allclose(strain.eps[..., 2, :], 0.0, atol=1e-14)


def test_infinitesimal_rigid_motion_is_strain_free():
    xi = DisplacementField.rigid(GRID, [0.1, 0.2, -0.3], [0.4, -0.5, 0.6])
    strain = infinitesimal_strain(xi)
    assert max(np.max(np.abs(strain.eps)), np.max(np.abs(strain.tau))) < 1e-12


def test_strain_matches_exact_strain_form():
    preset = get_displacement_preset("mms_full")
    errors = []
    for n in (8, 16):
        grid = BodyGrid.unit_cube(n)
        numeric = infinitesimal_strain(preset.field(grid)).packed()
        errors.append(float(np.max(np.abs(numeric - preset.strain(grid).packed()))))
    logger.info(f"Strain errors {errors}")
    assert errors[0] / errors[1] > 3.0


def test_exponential_of_rigid_field_is_rigid():
    xi = DisplacementField.rigid(GRID, [0.3, -0.1, 0.2], [0.5, 0.7, -0.4])
    cfg = exponential_configuration(xi, 0.7)
    assert finite_strain(cfg).max_abs() < 1e-12


def test_linearization_defect_is_first_order():
    xi = get_displacement_preset("smooth_random", 5).field(GRID)
    coarse, fine = linearization_check(xi, 1e-2), linearization_check(xi, 1e-3)
    ratio = coarse / fine
    logger.info(f"Linearization defects {coarse:.3e}, {fine:.3e} (ratio {ratio:.2f})")
    assert 8.0 < ratio < 12.0
    with pytest.raises(ValidationError):
        linearization_check(xi, 0.0)


def test_moving_frames_agree_with_finite_strain():
    cfg = get_configuration_preset("rigid").configuration(GRID)
    assert moving_frames_strain(cfg).max_abs() < 1e-12
    preset = get_configuration_preset("smooth_random", 3)
    errors = []
    for n in (8, 16):
        cfg = preset.configuration(BodyGrid.unit_cube(n))
        errors.append((moving_frames_strain(cfg) - finite_strain(cfg)).max_abs())
    assert errors[1] < errors[0] / 3.0, f"Moving-frames disagreement did not shrink: {errors}"


def test_left_invariance():
    rng = np.random.default_rng(12)
    cfg = get_configuration_preset("smooth_random", 4).configuration(GRID)
    moved = apply_motion(cfg, lie_euclid.random_motion(rng))
    assert (finite_strain(moved) - finite_strain(cfg)).max_abs() < 1e-10


def test_section_change_by_inversion():
    E = finite_strain(get_configuration_preset("twist").configuration(GRID))
    flipped = section_change(E, -np.eye(3))
    np.testing.assert_allclose(flipped.data[..., :3], -E.data[..., :3], atol=1e-15)
    np.testing.assert_allclose(flipped.data[..., 3:], E.data[..., 3:], atol=1e-15)


def test_section_change_round_trip():
    rng = np.random.default_rng(14)
    E = finite_strain(get_configuration_preset("smooth_random", 4).configuration(GRID))
    constant = lie_euclid.random_rotation(rng)
    field = lie_euclid.exp_so3(rng.uniform(-1.0, 1.0, GRID.vertex_shape + (3,)))
    for S in (constant, field):
        St = np.swapaxes(S, -1, -2)
        moved = section_change(E, S)
        assert np.max(np.abs(moved.data - E.data)) > 1e-3
        np.testing.assert_allclose(section_change(moved, St).data, E.data, atol=1e-12)


def test_twist_translational_strain():
    """Q = Rz(x3 / 2) with y = x: slot a holds Q^T e_a - e_a, exact up to the rotation samples"""
    E = finite_strain(get_configuration_preset("twist").configuration(GRID))
    theta = GRID.points()[..., 2] / 2.0
    c, s = np.cos(theta), np.sin(theta)
    zero = np.zeros_like(theta)
    expected = [np.stack([c - 1.0, -s, zero], axis=-1),
                np.stack([s, c - 1.0, zero], axis=-1),
                np.stack([zero, zero, zero], axis=-1)]
    for a in range(3):
        np.testing.assert_allclose(E.block(a)[..., :3], expected[a], atol=1e-12)
    assert np.max(np.abs(E.block(0)[..., :3])) > 0.05


def test_configuration_rejects_non_rotations():
    with pytest.raises(ValidationError):
        Configuration(GRID, GRID.points(), 2.0 * np.eye(3))
    with pytest.raises(ValidationError):
        Configuration(GRID, GRID.points()[..., :2], np.eye(3))


def test_strain_state_form_layout():
    eps = np.arange(9.0).reshape(3, 3)
    strain = StrainState(GRID, eps, np.zeros((3, 3)))
    form = strain.as_form()
    np.testing.assert_array_equal(form.block(2)[0, 0, 0, :3], eps[2])
    np.testing.assert_array_equal(StrainState.from_form(form).eps, strain.eps)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])

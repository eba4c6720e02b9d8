import logging

import numpy as np
import pytest

import lie_euclid
from errors import ValidationError
from forms import COCHAIN, AnalyticForm, BodyGrid, MotorForm, complex_for, covariant_d_star
from kinematics import Configuration, DisplacementField
from mechanics import (FACES, LoadState, StressState, balance_residual, boundary_traction, covariant_balance,
                       divergence_defect, gauge_shift, net_load, pullback_stress, rigid_virtual_fields,
                       stress_potential, virtual_work_residual)

# Configure logging
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=logging.DEBUG
)
logger = logging.getLogger(__name__)

GRID = BodyGrid.unit_cube(4)
SIGMA = np.array([[1.0, 0.5, -0.2], [0.3, 2.0, 0.1], [0.4, -0.6, 1.5]])
CHI = np.array([[0.2, 0.0, 0.1], [-0.3, 0.4, 0.0], [0.0, 0.25, -0.1]])


def constant_equilibrium():
    """Constant stress balanced by the body couple m = -e_ijk sigma_jk"""
    S = StressState(GRID, SIGMA, CHI)
    L = LoadState(GRID, np.zeros(3), -np.einsum("ijk,jk->i", lie_euclid.levi_civita(), SIGMA))
    return S, L


def test_constant_symmetric_stress_is_balanced():
    S = StressState(GRID, 0.5 * (SIGMA + SIGMA.T), CHI)
    force, moment = balance_residual(S, LoadState.zeros(GRID))
    assert np.max(np.abs(force)) < 1e-14
    assert np.max(np.abs(moment)) < 1e-15


def test_balance_forms_agree():
    S, L = constant_equilibrium()
    force, moment = balance_residual(S, L)
    force_form, moment_form = covariant_balance(S, L)
    np.testing.assert_allclose(force, force_form, atol=1e-14)
    np.testing.assert_allclose(moment, moment_form, atol=1e-14)
    assert np.max(np.abs(moment)) < 1e-14


def test_boundary_tractions():
    S = StressState(GRID, SIGMA, CHI)
    plus = boundary_traction(S, "+x1")
    np.testing.assert_allclose(plus.total(), np.concatenate([SIGMA[0], CHI[0]]), atol=1e-14)
    minus = boundary_traction(S, "-x2")
    np.testing.assert_allclose(minus.total(), -np.concatenate([SIGMA[1], CHI[1]]), atol=1e-14)
    assert sorted(FACES) == sorted(["-x1", "+x1", "-x2", "+x2", "-x3", "+x3"])
    with pytest.raises(ValidationError):
        boundary_traction(S, "x4")


def test_net_load_of_equilibrium_vanishes():
    S, L = constant_equilibrium()
    np.testing.assert_allclose(net_load(S, L), np.zeros(6), atol=1e-13)
    assert len(rigid_virtual_fields(GRID)) == 6


def test_virtual_work_with_affine_fields():
    S, L = constant_equilibrium()
    rng = np.random.default_rng(51)
    for _ in range(5):
        A, c, phi = rng.standard_normal((3, 3)), rng.standard_normal(3), rng.standard_normal(3)
        xi = DisplacementField(GRID, GRID.points() @ A.T + c, phi)
        residual = virtual_work_residual(S, L, xi)
        assert abs(residual) < 1e-12, f"Virtual work residual {residual:.3e}"


def test_divergence_defect_of_constant_stress():
    assert divergence_defect(StressState(GRID, SIGMA, CHI)) < 1e-13


def smooth_potential() -> AnalyticForm:
    def slot(a):
        def evaluate(p):
            base = np.sin(np.pi * (a + 1) * p[..., 0]) * np.cos(np.pi * p[..., 1]) + p[..., 2] ** 2
            return np.stack([base, 0.5 * base, -base, base * p[..., 0], np.zeros_like(base), 0.3 * base], axis=-1)
        return evaluate
    return AnalyticForm(1, [slot(a) for a in range(3)], "comotor")


def test_stress_potential_is_self_equilibrated():
    S = stress_potential(smooth_potential().evaluate(BodyGrid.unit_cube(8)))
    assert isinstance(S, StressState)
    force, moment = covariant_balance(S, LoadState.zeros(S.grid))
    residual = float(max(np.max(np.abs(force)), np.max(np.abs(moment))))
    logger.info(f"Balance residual of D*Y: {residual:.3e}")
    assert residual < 1e-9


def test_gauge_shift_is_exact_on_cochains():
    grid = BodyGrid((3, 4, 3), (0.5, 0.25, 0.5))
    cx = complex_for(grid)
    rng = np.random.default_rng(52)
    Y = MotorForm(1, rng.integers(-4, 5, size=(cx.n_cells(1), 6)).astype(float), grid, "comotor", COCHAIN)
    alpha = MotorForm(0, rng.integers(-4, 5, size=(cx.n_cells(0), 6)).astype(float), grid, "comotor", COCHAIN)
    np.testing.assert_array_equal(stress_potential(gauge_shift(Y, alpha)).data, stress_potential(Y).data)
    assert covariant_d_star(stress_potential(Y)).max_abs() == 0.0
    with pytest.raises(ValidationError):
        gauge_shift(Y, Y)


def test_pullback_by_identity_and_rotation():
    S = StressState(GRID, SIGMA, CHI)
    same = pullback_stress(S, Configuration.identity(GRID))
    np.testing.assert_allclose(same.sigma, S.sigma, atol=1e-12)
    np.testing.assert_allclose(same.chi, S.chi, atol=1e-12)
    R = lie_euclid.exp_so3(np.array([0.1, -0.2, 0.3]))
    rotated = pullback_stress(S, Configuration.rigid(GRID, lie_euclid.EuclideanMotion(np.zeros(3), R)))
    # cofactor R and comotor values R: R^T sigma R
    np.testing.assert_allclose(rotated.sigma[1, 1, 1], R.T @ SIGMA @ R, atol=1e-12)


def test_pullback_ignores_rigid_translation():
    """Moments are taken about the material point, so placing the body elsewhere adds no f x y coupling"""
    S = StressState(GRID, SIGMA, CHI)
    R = lie_euclid.exp_so3(np.array([-0.4, 0.2, 0.7]))
    motion = lie_euclid.EuclideanMotion(np.array([0.3, -1.0, 2.0]), R)
    pulled = pullback_stress(S, Configuration.rigid(GRID, motion))
    np.testing.assert_allclose(pulled.sigma, np.broadcast_to(R.T @ SIGMA @ R, GRID.vertex_shape + (3, 3)),
                               atol=1e-12)
    np.testing.assert_allclose(pulled.chi, np.broadcast_to(R.T @ CHI @ R, GRID.vertex_shape + (3, 3)), atol=1e-12)


def test_pullback_rejects_inverted_configuration():
    y = GRID.points() * np.array([-1.0, 1.0, 1.0])
    with pytest.raises(ValidationError):
        pullback_stress(StressState.zeros(GRID), Configuration(GRID, y, np.eye(3)))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])

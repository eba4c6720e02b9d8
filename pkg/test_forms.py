import logging

import numpy as np
import pytest

import lie_euclid
from errors import ChainError, DomainError, ValidationError
from forms import (COCHAIN, AnalyticForm, BodyGrid, Chain, FlatConnection, MotorForm, boundary, coboundary,
                   complex_for, covariant_d, dual_leibniz_residual, exterior_d, integrate, pairing, sample, wedge)
from presets import random_polynomial_form

# Configure logging
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=logging.DEBUG
)
logger = logging.getLogger(__name__)


def random_cochain(grid, degree, value_space="motor", seed=0):
    """Small integer data keeps every discrete identity exact"""
    rng = np.random.default_rng(seed)
    form = MotorForm.zeros(degree, grid, value_space, COCHAIN)
    return form.like(rng.integers(-5, 6, size=form.data.shape).astype(float))


def test_grid_validation():
    with pytest.raises(ValidationError):
        BodyGrid((1, 4, 4))
    with pytest.raises(ValidationError):
        BodyGrid((4, 4, 4), (0.25, 0.0, 0.25))
    grid = BodyGrid.unit_cube(4)
    assert grid.vertex_shape == (5, 5, 5)
    assert grid.refine().dims == (8, 8, 8)
    np.testing.assert_allclose(grid.points()[-1, -1, -1], [1.0, 1.0, 1.0])


def test_cell_counts():
    cx = complex_for(BodyGrid((2, 3, 4)))
    assert cx.n_cells(0) == 3 * 4 * 5
    assert cx.n_cells(1) == 2 * 4 * 5 + 3 * 3 * 5 + 3 * 4 * 4
    assert cx.n_cells(3) == 24
    component, index = cx.cell_from_index(2, cx.cell_index(2, 1, (1, 2, 3)))
    assert (component, index) == (1, (1, 2, 3))


def test_coboundary_squared_is_exactly_zero():
    grid = BodyGrid((3, 4, 5))
    for degree in (0, 1):
        a = random_cochain(grid, degree, seed=degree)
        dd = coboundary(coboundary(a))
        assert np.all(dd.data == 0.0), f"d(d a) nonzero for a degree {degree} cochain"


def test_d_squared_is_exactly_zero_on_a_fine_grid():
    grid = BodyGrid.unit_cube(16)
    for degree in (0, 1):
        a = random_cochain(grid, degree, seed=7 + degree)
        assert np.all(coboundary(coboundary(a)).data == 0.0)
        assert np.all(covariant_d(covariant_d(a)).data == 0.0), f"D(D a) nonzero for a degree {degree} cochain"


def test_coboundary_of_top_degree_is_rejected():
    with pytest.raises(DomainError):
        coboundary(random_cochain(BodyGrid((2, 2, 2)), 3))


def test_discrete_stokes():
    """The integral of d a over faces equals the integral of a over their boundary"""
    grid = BodyGrid((4, 4, 4))
    a = random_cochain(grid, 1, seed=3)
    patch = Chain.from_cells(grid, [("face3", 1, 1, 2), ("face3", 2, 1, 2), ("face1", 3, 1, 1, -1)])
    np.testing.assert_array_equal(integrate(coboundary(a), patch), integrate(a, boundary(patch)))


def test_boundary_of_boundary_is_zero():
    grid = BodyGrid((3, 3, 3))
    cube = Chain.from_cells(grid, [("cell", 0, 0, 0), ("cell", 1, 2, 0)])
    assert boundary(boundary(cube)).is_zero()
    square = boundary(Chain.from_cells(grid, [("face2", 1, 1, 1)]))
    assert len(square.cells()) == 4
    with pytest.raises(ChainError):
        boundary(Chain.from_cells(grid, [("vertex", 0, 0, 0)]))


def test_chain_construction_errors():
    grid = BodyGrid((2, 2, 2))
    with pytest.raises(ChainError):
        Chain.from_cells(grid, [("edge1", 0, 0, 0), ("face1", 0, 0, 0)])
    with pytest.raises(ChainError):
        Chain.from_cells(grid, [("ridge", 0, 0, 0)])
    with pytest.raises(ChainError):
        Chain.from_cells(grid, [("edge1", 2, 0, 0)])
    with pytest.raises(ChainError):
        integrate(random_cochain(grid, 2), Chain.from_cells(grid, [("edge2", 0, 0, 0)]))


def test_chain_arithmetic_cancels():
    grid = BodyGrid((2, 2, 2))
    c = Chain.from_cells(grid, [("edge1", 0, 0, 0), ("edge2", 1, 0, 0, 2)])
    assert (c - c).is_zero()
    assert ("edge2", 1, 0, 0, 2) in c.cells()


def test_cup_product_leibniz():
    """d(a u b) = da u b + (-1)^p a u db on integer scalar cochains"""
    grid = BodyGrid((3, 3, 3))
    for p, q in ((0, 1), (1, 1), (0, 2)):
        a = random_cochain(grid, p, "scalar", seed=10 + p)
        b = random_cochain(grid, q, "scalar", seed=20 + q)
        lhs = coboundary(wedge(a, b))
        rhs = wedge(coboundary(a), b).data + (-1) ** p * wedge(a, coboundary(b)).data
        np.testing.assert_array_equal(lhs.data, rhs)


def test_wedge_degree_overflow():
    grid = BodyGrid((2, 2, 2))
    a = MotorForm.zeros(2, grid)
    with pytest.raises(DomainError):
        wedge(a, a)


def test_form_shape_checks():
    grid = BodyGrid((2, 2, 2))
    with pytest.raises(ValidationError):
        MotorForm(1, np.zeros((3, 3, 3, 3, 5)), grid)
    with pytest.raises(DomainError):
        MotorForm(4, np.zeros((1,)), grid)
    with pytest.raises(ValidationError):
        MotorForm.zeros(1, grid) + MotorForm.zeros(2, grid)


def test_exterior_d_of_linear_field():
    grid = BodyGrid((4, 5, 6), (0.25, 0.2, 0.5))
    f = AnalyticForm(0, [lambda p: p[..., 0] + 2.0 * p[..., 1] - 3.0 * p[..., 2]], "scalar").evaluate(grid)
    df = exterior_d(f)
    for a, slope in enumerate((1.0, 2.0, -3.0)):
        np.testing.assert_allclose(df.block(a), slope, atol=1e-12)
    assert exterior_d(df).max_abs() < 1e-12


def test_gauss_sampling_commutes_with_d():
    """Sampling d(phi) equals the coboundary of sampled phi for a quadratic phi"""
    grid = BodyGrid((3, 4, 3), (0.5, 0.25, 1.0 / 3.0), (0.1, -0.2, 0.0))
    phi = AnalyticForm(0, [lambda p: p[..., 0] ** 2 + p[..., 0] * p[..., 1]], "scalar")
    dphi = AnalyticForm(1, [
        lambda p: 2.0 * p[..., 0] + p[..., 1],
        lambda p: p[..., 0],
        lambda p: np.zeros(p.shape[:-1]),
    ], "scalar")
    np.testing.assert_allclose(sample(dphi, grid).data, coboundary(sample(phi, grid)).data, atol=1e-12)


def test_pairing_of_stress_and_strain():
    """A_i pairs with dx_i: the volume coefficient is the sum over i of <sigma_i, e_i>"""
    grid = BodyGrid((2, 3, 2))
    rng = np.random.default_rng(31)
    sigma = MotorForm(2, rng.standard_normal((3,) + grid.vertex_shape + (6,)), grid, "comotor")
    e = MotorForm(1, rng.standard_normal((3,) + grid.vertex_shape + (6,)), grid, "motor")
    work = pairing(sigma, e)
    assert work.degree == 3 and work.value_space == "scalar"
    np.testing.assert_allclose(work.data[0], np.einsum("a...i,a...i->...", sigma.data, e.data), atol=1e-12)

    unit = MotorForm.zeros(2, grid, "comotor")
    unit.data[0, ..., 0] = 1.0
    stretch = MotorForm.zeros(1, grid)
    stretch.data[0, ..., 0] = 1.0
    np.testing.assert_array_equal(pairing(unit, stretch).data, 1.0)
    assert pairing(MotorForm.zeros(2, grid, "comotor"), e).max_abs() == 0.0
    with pytest.raises(ValidationError):
        pairing(e, sigma)


def test_dual_leibniz_rule_converges_at_second_order():
    """Quadratic Pi and affine xi: only d of their cubic pairing carries a stencil error, exactly O(h^2)"""
    sizes = (8, 16, 32)
    bent = random_polynomial_form(1, 1, seed=40).analytic()
    for q, p in ((2, 0), (1, 1), (0, 1)):
        Pi = random_polynomial_form(q, 2, seed=20 + q, value_space="comotor").analytic()
        xi = random_polynomial_form(p, 1, seed=30 + p).analytic()
        for curved in (False, True):
            errors = []
            for n in sizes:
                grid = BodyGrid.unit_cube(n)
                conn = FlatConnection(grid).form() + bent.evaluate(grid) if curved else None
                errors.append(dual_leibniz_residual(Pi.evaluate(grid), xi.evaluate(grid), conn).max_abs())
            order = np.log2(errors[-2] / errors[-1])
            logger.info(f"q={q} p={p} curved={curved}: errors {errors}, order {order:.3f}")
            assert errors[0] > 1e-6
            assert abs(order - 2.0) < 0.2


def test_dual_leibniz_degree_overflow():
    grid = BodyGrid((2, 2, 2))
    with pytest.raises(DomainError):
        dual_leibniz_residual(MotorForm.zeros(2, grid, "comotor"), MotorForm.zeros(1, grid))


def test_flat_connection_is_flat():
    grid = BodyGrid((3, 3, 3), (0.5, 0.25, 1.0))
    conn = FlatConnection(grid)
    assert conn.curvature().max_abs() == 0.0
    assert conn.curvature(COCHAIN).max_abs() == 0.0


def test_covariant_d_of_constant_motor():
    """For a constant 0-form D a reduces to the bracket with the translation generators"""
    grid = BodyGrid((2, 2, 2))
    value = np.array([0.5, -1.0, 2.0, 0.0, 0.0, 1.0])
    a = MotorForm(0, np.broadcast_to(value, (1,) + grid.vertex_shape + (6,)).copy(), grid)
    Da = covariant_d(a)
    for b in range(3):
        generator = np.zeros(6)
        generator[b] = 1.0
        np.testing.assert_allclose(Da.block(b), np.broadcast_to(lie_euclid.bracket(generator, value),
                                                                grid.vertex_shape + (6,)), atol=1e-14)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])

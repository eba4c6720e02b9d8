import logging

import numpy as np
import pytest

import lie_euclid
from errors import BranchError, DomainError, ValidationError
from lie_euclid import CoMotor, EuclideanMotion, Motor

# Configure logging
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=logging.DEBUG
)
logger = logging.getLogger(__name__)


def test_hat_vee_and_levi_civita():
    """hat is the cross product and vee inverts it"""
    rng = np.random.default_rng(1)
    a, b = rng.standard_normal((2, 3))
    np.testing.assert_allclose(lie_euclid.hat(a) @ b, np.cross(a, b), atol=1e-15)
    np.testing.assert_array_equal(lie_euclid.vee(lie_euclid.hat(a)), a)
    eps = lie_euclid.levi_civita()
    assert eps[0, 1, 2] == 1.0 and eps[1, 0, 2] == -1.0 and eps[0, 0, 1] == 0.0


def test_exp_log_roundtrip():
    """log(exp(w)) = w for random motors with angle below 3"""
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(200):
        w = lie_euclid.random_motor(rng)
        back = lie_euclid.log_se3(lie_euclid.exp_se3(w))
        worst = max(worst, float(np.max(np.abs(back.vector() - w.vector()))))
    logger.info(f"Largest exp/log roundtrip error {worst:.3e}")
    assert worst < 1e-10, f"Roundtrip error {worst:.3e} too large"


def test_exp_small_angle_branch():
    """The Taylor branch agrees with the closed form near the threshold"""
    w = np.array([0.3, -0.2, 0.1, 1e-7, 0.0, 0.0])
    x, S = lie_euclid.exp_parts(w)
    np.testing.assert_allclose(S, np.eye(3) + lie_euclid.hat(w[3:]), atol=1e-13)
    np.testing.assert_allclose(lie_euclid.log_parts(x, S), w, atol=1e-12)


def test_log_rejects_improper_and_branch_cut():
    with pytest.raises(DomainError):
        lie_euclid.log_parts(np.zeros(3), -np.eye(3))
    S = lie_euclid.exp_so3(np.array([0.0, 0.0, np.pi]))
    with pytest.raises(BranchError):
        lie_euclid.log_parts(np.zeros(3), S)


def test_group_laws():
    rng = np.random.default_rng(3)
    g, h = lie_euclid.random_motion(rng), lie_euclid.random_motion(rng, proper=False)
    p = rng.standard_normal(3)
    np.testing.assert_allclose(lie_euclid.act(lie_euclid.compose(g, h), p),
                               lie_euclid.act(g, lie_euclid.act(h, p)), atol=1e-12)
    identity = lie_euclid.compose(g, lie_euclid.inverse(g))
    np.testing.assert_allclose(identity.matrix(), np.eye(4), atol=1e-12)
    np.testing.assert_allclose(lie_euclid.compose(g, h).matrix(), g.matrix() @ h.matrix(), atol=1e-12)


def test_motion_rejects_non_orthogonal_frame():
    with pytest.raises(ValidationError):
        EuclideanMotion(np.zeros(3), np.diag([1.0, 1.0, 1.1]))


def test_bracket_is_a_lie_bracket():
    """Antisymmetry, Jacobi identity and agreement with the matrix commutator"""
    rng = np.random.default_rng(4)
    w, z, v = rng.standard_normal((3, 6))
    br = lie_euclid.bracket
    np.testing.assert_allclose(br(w, z), -br(z, w), atol=1e-14)
    jacobi = br(w, br(z, v)) + br(z, br(v, w)) + br(v, br(w, z))
    np.testing.assert_allclose(jacobi, 0.0, atol=1e-12)
    W, Z = lie_euclid.motor_matrix(w), lie_euclid.motor_matrix(z)
    np.testing.assert_allclose(lie_euclid.motor_from_matrix(W @ Z - Z @ W), br(w, z), atol=1e-13)


def test_coadjoint_duality():
    """<coad(w, mu), z> = -<mu, [w, z]> for random triples"""
    rng = np.random.default_rng(5)
    w, z, mu = rng.standard_normal((3, 1000, 6))
    lhs = lie_euclid.pair(lie_euclid.coadjoint(w, mu), z)
    rhs = -lie_euclid.pair(mu, lie_euclid.bracket(w, z))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_adjoint_homomorphism_and_bracket_matrix():
    rng = np.random.default_rng(6)
    g, h = lie_euclid.random_motion(rng), lie_euclid.random_motion(rng, proper=False)
    w, z = lie_euclid.random_motor(rng), lie_euclid.random_motor(rng)
    gh = lie_euclid.compose(g, h)
    np.testing.assert_allclose(lie_euclid.Ad(gh, w).vector(),
                               lie_euclid.Ad(g, lie_euclid.Ad(h, w)).vector(), atol=1e-12)
    np.testing.assert_allclose(lie_euclid.ad_matrix(w) @ z.vector(), lie_euclid.ad(w, z).vector(), atol=1e-12)


def test_adjoint_of_proper_motion_is_conjugation():
    rng = np.random.default_rng(7)
    g = lie_euclid.random_motion(rng)
    w = lie_euclid.random_motor(rng)
    conjugated = g.matrix() @ w.matrix() @ np.linalg.inv(g.matrix())
    np.testing.assert_allclose(lie_euclid.Ad(g, w).matrix(), conjugated, atol=1e-12)


def test_coadjoint_group_action_duality():
    """<Ad*_g mu, w> = <mu, Ad_g w>, improper motions included"""
    rng = np.random.default_rng(8)
    for proper in (True, False):
        g = lie_euclid.random_motion(rng, proper=proper)
        w = lie_euclid.random_motor(rng)
        mu = CoMotor.from_vector(rng.standard_normal(6))
        assert abs(lie_euclid.Ad_star(g, mu).pair(w) - mu.pair(lie_euclid.Ad(g, w))) < 1e-12


def test_vectorized_coadjoint_action():
    rng = np.random.default_rng(10)
    motions = [lie_euclid.random_motion(rng, proper=(k % 2 == 0)) for k in range(4)]
    mu = rng.standard_normal((4, 6))
    x = np.stack([g.x for g in motions])
    S = np.stack([g.S for g in motions])
    expected = np.stack([lie_euclid.Ad_star(g, CoMotor.from_vector(v)).vector() for g, v in zip(motions, mu)])
    np.testing.assert_allclose(lie_euclid.coadjoint_action(x, S, mu), expected, atol=1e-12)


def test_translation_couples_force_into_moment():
    """A pure translation keeps f and adds the moment arm: m -> m + f x x"""
    f, m, x = np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 0.5]), np.array([0.0, 2.0, 0.0])
    moved = lie_euclid.coadjoint_action(x, np.eye(3), np.concatenate([f, m]))
    np.testing.assert_allclose(moved, [1.0, 0.0, 0.0, 0.0, 0.0, 2.5], atol=1e-15)
    back = lie_euclid.coadjoint_action(-x, np.eye(3), moved)
    np.testing.assert_allclose(back, np.concatenate([f, m]), atol=1e-15)


def test_translate_motor_matches_adjoint():
    rng = np.random.default_rng(9)
    x = rng.standard_normal(3)
    w = lie_euclid.random_motor(rng)
    expected = lie_euclid.Ad(EuclideanMotion(x, np.eye(3)), w).vector()
    np.testing.assert_allclose(lie_euclid.translate_motor(x, w.vector()), expected, atol=1e-14)


def test_motor_from_matrix_rejects_non_algebra_values():
    bad = np.zeros((4, 4))
    bad[1, 1] = 1.0
    with pytest.raises(ValidationError):
        lie_euclid.motor_from_matrix(bad)
    assert np.array_equal(Motor.from_vector(np.arange(6.0)).vector(), np.arange(6.0))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])

"""
Euclidean group kernel.

Motions are stored in homogeneous form

    g = [[1, 0],
         [x, S]]

so that a point p maps to S p + x. A motor (u, phi) embeds as
[[0, 0], [u, hat(phi)]] and a comotor (f, m) pairs with it as f.u + m.phi.
Array kernels work on stacked 6-vectors ``(..., 6)`` laid out as
(u, phi) or (f, m); the small dataclasses wrap single elements.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import polar

import config
from errors import BranchError, DomainError, ValidationError

# Configure logging
logger = logging.getLogger(__name__)

_LEVI_CIVITA = np.zeros((3, 3, 3))
_LEVI_CIVITA[0, 1, 2] = _LEVI_CIVITA[1, 2, 0] = _LEVI_CIVITA[2, 0, 1] = 1.0
_LEVI_CIVITA[0, 2, 1] = _LEVI_CIVITA[2, 1, 0] = _LEVI_CIVITA[1, 0, 2] = -1.0


def levi_civita() -> np.ndarray:
    """Return a copy of the permutation symbol as a 3x3x3 array"""
    return _LEVI_CIVITA.copy()


def hat(phi: np.ndarray) -> np.ndarray:
    """
    Map axial vectors to antisymmetric matrices, so that hat(phi) @ w = phi x w

    Args:
        phi: Array of shape (..., 3)

    Returns:
        Array of shape (..., 3, 3)
    """
    phi = np.asarray(phi, dtype=float)
    out = np.zeros(phi.shape + (3,))
    out[..., 0, 1] = -phi[..., 2]
    out[..., 0, 2] = phi[..., 1]
    out[..., 1, 0] = phi[..., 2]
    out[..., 1, 2] = -phi[..., 0]
    out[..., 2, 0] = -phi[..., 1]
    out[..., 2, 1] = phi[..., 0]
    return out


def vee(matrix: np.ndarray) -> np.ndarray:
    """Inverse of hat; reads the axial vector off the lower triangle"""
    matrix = np.asarray(matrix, dtype=float)
    return np.stack([matrix[..., 2, 1], matrix[..., 0, 2], matrix[..., 1, 0]], axis=-1)


def skew(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix - np.swapaxes(matrix, -1, -2))


def orthogonality_drift(S: np.ndarray) -> float:
    S = np.asarray(S, dtype=float)
    gram = np.swapaxes(S, -1, -2) @ S
    return float(np.max(np.abs(gram - np.eye(3)), initial=0.0))


def check_orthogonal(S: np.ndarray, proper: bool = False) -> np.ndarray:
    """
    Validate a single 3x3 frame and re-project it when it drifted slightly

    Args:
        S: Candidate orthogonal matrix
        proper: Additionally require det S = +1

    Returns:
        The matrix, polar-projected onto O(3) if its drift exceeded the
        re-orthonormalization threshold

    Raises:
        ValidationError: if the drift exceeds the rejection threshold
    """
    S = np.array(S, dtype=float)
    if S.shape != (3, 3) or not np.all(np.isfinite(S)):
        raise ValidationError(f"Expected a finite 3x3 matrix, got shape {S.shape}")
    drift = orthogonality_drift(S)
    if drift > config.ORTHO_REJECT_TOL:
        raise ValidationError(f"Matrix is not orthogonal (drift {drift:.3e})")
    if drift > config.ORTHO_DRIFT_TOL:
        logger.debug(f"Re-orthonormalizing frame with drift {drift:.3e}")
        S, _ = polar(S)
    if proper and np.linalg.det(S) < 0:
        raise ValidationError("Expected a proper rotation (det = +1)")
    return S


def _rodrigues_coefficients(theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """A = sin t / t, B = (1 - cos t) / t^2, C = (t - sin t) / t^3 with Taylor tails"""
    theta = np.asarray(theta, dtype=float)
    small = theta < config.SMALL_ANGLE
    t = np.where(small, 1.0, theta)
    t2 = theta * theta
    a = np.where(small, 1.0 - t2 / 6.0 + t2 * t2 / 120.0, np.sin(t) / t)
    b = np.where(small, 0.5 - t2 / 24.0 + t2 * t2 / 720.0, (1.0 - np.cos(t)) / (t * t))
    c = np.where(small, 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0, (t - np.sin(t)) / (t * t * t))
    return a, b, c


def exp_so3(phi: np.ndarray) -> np.ndarray:
    """Rodrigues formula, vectorized over leading axes"""
    phi = np.asarray(phi, dtype=float)
    theta = np.linalg.norm(phi, axis=-1)
    a, b, _ = _rodrigues_coefficients(theta)
    Phi = hat(phi)
    return np.eye(3) + a[..., None, None] * Phi + b[..., None, None] * (Phi @ Phi)


def exp_parts(w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Group exponential of stacked motors

    Args:
        w: Array (..., 6) of motors (u, phi)

    Returns:
        Tuple (x, S) with x of shape (..., 3) and S of shape (..., 3, 3)
    """
    w = np.asarray(w, dtype=float)
    u, phi = w[..., :3], w[..., 3:]
    theta = np.linalg.norm(phi, axis=-1)
    a, b, c = _rodrigues_coefficients(theta)
    Phi = hat(phi)
    Phi2 = Phi @ Phi
    S = np.eye(3) + a[..., None, None] * Phi + b[..., None, None] * Phi2
    V = np.eye(3) + b[..., None, None] * Phi + c[..., None, None] * Phi2
    x = np.einsum("...ij,...j->...i", V, u)
    return x, S


def log_parts(x: np.ndarray, S: np.ndarray) -> np.ndarray:
    """
    Principal logarithm of stacked proper motions

    Args:
        x: Translations (..., 3)
        S: Rotations (..., 3, 3)

    Returns:
        Motors (..., 6)

    Raises:
        DomainError: if any rotation is improper
        BranchError: if any angle is within the branch margin of pi
    """
    x = np.asarray(x, dtype=float)
    S = np.asarray(S, dtype=float)
    if np.any(np.linalg.det(S) < 0):
        raise DomainError("Logarithm is undefined for improper motions (det S = -1)")
    axis_sin = vee(skew(S))
    sin_t = np.linalg.norm(axis_sin, axis=-1)
    cos_t = np.clip(0.5 * (np.trace(S, axis1=-2, axis2=-1) - 1.0), -1.0, 1.0)
    theta = np.arctan2(sin_t, cos_t)
    if np.any(theta >= np.pi - config.LOG_BRANCH_MARGIN):
        raise BranchError(f"Rotation angle {float(np.max(theta)):.12f} is outside the principal branch")

    small = theta < config.SMALL_ANGLE
    t = np.where(small, 1.0, theta)
    t2 = theta * theta
    ratio = np.where(small, 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0, t / np.where(small, 1.0, sin_t))
    phi = ratio[..., None] * axis_sin

    a, b, _ = _rodrigues_coefficients(theta)
    d = np.where(
        small,
        1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0,
        (1.0 - a / (2.0 * np.where(small, 1.0, b))) / (t * t),
    )
    Phi = hat(phi)
    V_inv = np.eye(3) - 0.5 * Phi + d[..., None, None] * (Phi @ Phi)
    u = np.einsum("...ij,...j->...i", V_inv, x)
    return np.concatenate([u, phi], axis=-1)


def motor_matrix(w: np.ndarray) -> np.ndarray:
    """Embed stacked motors (..., 6) as 4x4 matrices with a zero first row"""
    w = np.asarray(w, dtype=float)
    out = np.zeros(w.shape[:-1] + (4, 4))
    out[..., 1:, 0] = w[..., :3]
    out[..., 1:, 1:] = hat(w[..., 3:])
    return out


def motor_from_matrix(matrix: np.ndarray, tol: Optional[float] = None) -> np.ndarray:
    """
    Read motors back from 4x4 matrices, checking the se(3) structure

    Raises:
        ValidationError: if the first row is nonzero or the rotation block
            is not antisymmetric beyond the tolerance (relative to the data)
    """
    matrix = np.asarray(matrix, dtype=float)
    tol = config.SE3_PROJECTION_TOL if tol is None else tol
    scale = max(1.0, float(np.max(np.abs(matrix), initial=0.0)))
    block = matrix[..., 1:, 1:]
    first_row = float(np.max(np.abs(matrix[..., 0, :]), initial=0.0))
    asym = float(np.max(np.abs(block + np.swapaxes(block, -1, -2)), initial=0.0))
    if first_row > tol * scale or asym > tol * scale:
        raise ValidationError(
            f"Matrix values leave se(3): first row {first_row:.3e}, symmetric part {asym:.3e}"
        )
    return np.concatenate([matrix[..., 1:, 0], vee(skew(block))], axis=-1)


def bracket(w: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Lie bracket of stacked motors: (phi_w x u_z - phi_z x u_w, phi_w x phi_z)"""
    w = np.asarray(w, dtype=float)
    z = np.asarray(z, dtype=float)
    u_w, p_w = w[..., :3], w[..., 3:]
    u_z, p_z = z[..., :3], z[..., 3:]
    return np.concatenate(
        [np.cross(p_w, u_z) - np.cross(p_z, u_w), np.cross(p_w, p_z)], axis=-1
    )


def coadjoint(w: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Infinitesimal coadjoint action: (phi x f, u x f + phi x m)"""
    w = np.asarray(w, dtype=float)
    mu = np.asarray(mu, dtype=float)
    u, p = w[..., :3], w[..., 3:]
    f, m = mu[..., :3], mu[..., 3:]
    return np.concatenate([np.cross(p, f), np.cross(u, f) + np.cross(p, m)], axis=-1)


def pair(mu: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Duality pairing f.u + m.phi over the last axis"""
    return np.einsum("...i,...i->...", np.asarray(mu, dtype=float), np.asarray(w, dtype=float))


def translate_motor(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Adjoint action of the pure translation by x: (u + x x phi, phi)"""
    w = np.asarray(w, dtype=float)
    return np.concatenate([w[..., :3] + np.cross(x, w[..., 3:]), w[..., 3:]], axis=-1)


def coadjoint_action(x: np.ndarray, S: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Group coadjoint action of (x, S) on stacked comotors: (S^T f, det(S) S^T (m + f x x))"""
    x = np.asarray(x, dtype=float)
    S = np.asarray(S, dtype=float)
    mu = np.asarray(mu, dtype=float)
    St = np.swapaxes(S, -1, -2)
    det = np.sign(np.linalg.det(S))[..., None]
    f, m = mu[..., :3], mu[..., 3:]
    return np.concatenate([np.einsum("...ij,...j->...i", St, f),
                           det * np.einsum("...ij,...j->...i", St, m + np.cross(f, x))], axis=-1)


@dataclass(frozen=True, eq=False)
class Motor:
    """Element (u, phi) of se(3)"""

    u: np.ndarray = field(default_factory=lambda: np.zeros(3))
    phi: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float).reshape(3))
        object.__setattr__(self, "phi", np.asarray(self.phi, dtype=float).reshape(3))

    @classmethod
    def from_vector(cls, v: np.ndarray) -> "Motor":
        v = np.asarray(v, dtype=float).reshape(6)
        return cls(v[:3], v[3:])

    def vector(self) -> np.ndarray:
        return np.concatenate([self.u, self.phi])

    def matrix(self) -> np.ndarray:
        return motor_matrix(self.vector())


@dataclass(frozen=True, eq=False)
class CoMotor:
    """Element (f, m) of the dual of se(3)"""

    f: np.ndarray = field(default_factory=lambda: np.zeros(3))
    m: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "f", np.asarray(self.f, dtype=float).reshape(3))
        object.__setattr__(self, "m", np.asarray(self.m, dtype=float).reshape(3))

    @classmethod
    def from_vector(cls, v: np.ndarray) -> "CoMotor":
        v = np.asarray(v, dtype=float).reshape(6)
        return cls(v[:3], v[3:])

    def vector(self) -> np.ndarray:
        return np.concatenate([self.f, self.m])

    def pair(self, w: Motor) -> float:
        return float(self.f @ w.u + self.m @ w.phi)


@dataclass(frozen=True, eq=False)
class EuclideanMotion:
    """Element of E(3): translation x and orthogonal frame S"""

    x: np.ndarray = field(default_factory=lambda: np.zeros(3))
    S: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).reshape(3)
        if not np.all(np.isfinite(x)):
            raise ValidationError("Translation must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "S", check_orthogonal(self.S))

    @classmethod
    def identity(cls) -> "EuclideanMotion":
        return cls(np.zeros(3), np.eye(3))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "EuclideanMotion":
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (4, 4) or np.max(np.abs(matrix[0] - [1.0, 0.0, 0.0, 0.0])) > config.ORTHO_REJECT_TOL:
            raise ValidationError("Homogeneous matrix must have first row (1, 0, 0, 0)")
        return cls(matrix[1:, 0], matrix[1:, 1:])

    @property
    def det(self) -> float:
        return float(np.sign(np.linalg.det(self.S)))

    def matrix(self) -> np.ndarray:
        out = np.eye(4)
        out[1:, 0] = self.x
        out[1:, 1:] = self.S
        return out


def compose(g: EuclideanMotion, h: EuclideanMotion) -> EuclideanMotion:
    return EuclideanMotion(g.S @ h.x + g.x, g.S @ h.S)


def inverse(g: EuclideanMotion) -> EuclideanMotion:
    return EuclideanMotion(-g.S.T @ g.x, g.S.T)


def act(g: EuclideanMotion, p: np.ndarray) -> np.ndarray:
    """Apply a motion to points of shape (..., 3)"""
    p = np.asarray(p, dtype=float)
    return np.einsum("ij,...j->...i", g.S, p) + g.x


def exp_se3(w: Motor) -> EuclideanMotion:
    x, S = exp_parts(w.vector())
    return EuclideanMotion(x, S)


def log_se3(g: EuclideanMotion) -> Motor:
    return Motor.from_vector(log_parts(g.x, g.S))


def Ad(g: EuclideanMotion, w: Motor) -> Motor:
    """Adjoint action g w g^-1 = (S u + x x phi', phi') with phi' = det(S) S phi"""
    phi = g.det * (g.S @ w.phi)
    return Motor(g.S @ w.u + np.cross(g.x, phi), phi)


def ad(w: Motor, z: Motor) -> Motor:
    return Motor.from_vector(bracket(w.vector(), z.vector()))


def coad(w: Motor, mu: CoMotor) -> CoMotor:
    return CoMotor.from_vector(coadjoint(w.vector(), mu.vector()))


def Ad_star(g: EuclideanMotion, mu: CoMotor) -> CoMotor:
    """Group coadjoint action defined by <Ad*_g mu, w> = <mu, Ad_g w>"""
    return CoMotor.from_vector(coadjoint_action(g.x, g.S, mu.vector()))


def ad_matrix(w: Motor) -> np.ndarray:
    """6x6 matrix of z -> ad(w, z)"""
    out = np.zeros((6, 6))
    out[:3, :3] = hat(w.phi)
    out[:3, 3:] = hat(w.u)
    out[3:, 3:] = hat(w.phi)
    return out


def random_rotation(rng: np.random.Generator, proper: bool = True) -> np.ndarray:
    """Haar-distributed rotation from the QR decomposition of a Gaussian matrix"""
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q if proper else -q


def random_motor(rng: np.random.Generator, scale: float = 1.0, max_angle: float = 3.0) -> Motor:
    direction = rng.standard_normal(3)
    direction /= np.linalg.norm(direction)
    angle = rng.uniform(0.0, max_angle)
    return Motor(scale * rng.standard_normal(3), angle * direction)


def random_motion(rng: np.random.Generator, scale: float = 1.0, proper: bool = True) -> EuclideanMotion:
    return EuclideanMotion(scale * rng.standard_normal(3), random_rotation(rng, proper=proper))

"""Configurations, finite and infinitesimal strain, and the moving-frames strain oracle."""

import logging
from dataclasses import dataclass

import numpy as np

import config
from errors import ValidationError
from forms import BodyGrid, MotorForm, SMOOTH, covariant_d
import lie_euclid

# Configure logging
logger = logging.getLogger(__name__)

_IDENTITY_COFRAME = np.concatenate([np.eye(3), np.zeros((3, 3))], axis=1)


@dataclass(eq=False)
class Configuration:
    """Deformed positions y and microrotations Q sampled at the grid vertices"""

    grid: BodyGrid
    y: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        shape = self.grid.vertex_shape
        self.y = np.asarray(self.y, dtype=float)
        self.Q = np.broadcast_to(np.asarray(self.Q, dtype=float), shape + (3, 3)).copy()
        if self.y.shape != shape + (3,):
            raise ValidationError(f"Positions have shape {self.y.shape}, expected {shape + (3,)}")
        if not (np.all(np.isfinite(self.y)) and np.all(np.isfinite(self.Q))):
            raise ValidationError("Configuration contains non-finite values")
        drift = lie_euclid.orthogonality_drift(self.Q)
        det_error = float(np.max(np.abs(np.linalg.det(self.Q) - 1.0)))
        if drift > config.ROTATION_FIELD_TOL or det_error > config.ROTATION_FIELD_TOL:
            raise ValidationError(
                f"Microrotation field is not a proper rotation (drift {drift:.3e}, det error {det_error:.3e})")

    @classmethod
    def identity(cls, grid: BodyGrid) -> "Configuration":
        return cls(grid, grid.points(), np.eye(3))

    @classmethod
    def rigid(cls, grid: BodyGrid, motion: lie_euclid.EuclideanMotion) -> "Configuration":
        return cls(grid, lie_euclid.act(motion, grid.points()), motion.S)

    @classmethod
    def from_rotation_vectors(cls, grid: BodyGrid, y: np.ndarray, phi: np.ndarray) -> "Configuration":
        return cls(grid, y, lie_euclid.exp_so3(phi))


@dataclass(eq=False)
class DisplacementField:
    """Infinitesimal displacement u and microrotation axial vector phi at the vertices"""

    grid: BodyGrid
    u: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        shape = self.grid.vertex_shape + (3,)
        self.u = np.broadcast_to(np.asarray(self.u, dtype=float), shape).copy()
        self.phi = np.broadcast_to(np.asarray(self.phi, dtype=float), shape).copy()
        if not (np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.phi))):
            raise ValidationError("Displacement field contains non-finite values")

    @classmethod
    def zeros(cls, grid: BodyGrid) -> "DisplacementField":
        return cls(grid, np.zeros(3), np.zeros(3))

    @classmethod
    def rigid(cls, grid: BodyGrid, a: np.ndarray, b: np.ndarray) -> "DisplacementField":
        """Infinitesimal rigid motion u = a + b x x, phi = b"""
        points = grid.points()
        return cls(grid, np.asarray(a, dtype=float) + np.cross(b, points), np.asarray(b, dtype=float))

    @classmethod
    def from_values(cls, grid: BodyGrid, values: np.ndarray) -> "DisplacementField":
        values = np.asarray(values, dtype=float)
        return cls(grid, values[..., :3], values[..., 3:])

    def values(self) -> np.ndarray:
        return np.concatenate([self.u, self.phi], axis=-1)

    def as_form(self) -> MotorForm:
        return MotorForm(0, self.values()[None], self.grid, "motor", SMOOTH)


@dataclass(eq=False)
class StrainState:
    """
    Components of a motor-valued 1-form: eps[..., i, j] and tau[..., i, j]
    with i the form slot and j the value direction.
    """

    grid: BodyGrid
    eps: np.ndarray
    tau: np.ndarray

    def __post_init__(self):
        shape = self.grid.vertex_shape + (3, 3)
        self.eps = np.broadcast_to(np.asarray(self.eps, dtype=float), shape).copy()
        self.tau = np.broadcast_to(np.asarray(self.tau, dtype=float), shape).copy()

    @classmethod
    def from_form(cls, form: MotorForm) -> "StrainState":
        if form.degree != 1 or form.value_space != "motor" or form.is_cochain:
            raise ValidationError("Strain must be a smooth motor-valued 1-form")
        data = np.moveaxis(form.data, 0, -2)
        return cls(form.grid, data[..., :3], data[..., 3:])

    def as_form(self) -> MotorForm:
        data = np.concatenate([self.eps, self.tau], axis=-1)
        return MotorForm(1, np.moveaxis(data, -2, 0), self.grid, "motor", SMOOTH)

    def packed(self) -> np.ndarray:
        """Row-major eps followed by row-major tau, shape (..., 18)"""
        lead = self.eps.shape[:-2]
        return np.concatenate([self.eps.reshape(lead + (9,)), self.tau.reshape(lead + (9,))], axis=-1)


def _derivative(values: np.ndarray, grid: BodyGrid, axis: int) -> np.ndarray:
    return np.gradient(values, grid.spacing[axis], axis=axis, edge_order=2)


def finite_strain(cfg: Configuration) -> MotorForm:
    """
    Pullback of the Maurer-Cartan form minus its reference value

    Slot a carries (Q^T d_a y - e_a, vee(Q^T d_a Q)) with the rotational
    part antisymmetrized before reading off the axial vector.
    """
    Qt = np.swapaxes(cfg.Q, -1, -2)
    slots = []
    for a in range(3):
        dy = _derivative(cfg.y, cfg.grid, a)
        dQ = _derivative(cfg.Q, cfg.grid, a)
        translational = np.einsum("...ij,...j->...i", Qt, dy) - _IDENTITY_COFRAME[a, :3]
        rotational = lie_euclid.vee(lie_euclid.skew(Qt @ dQ))
        slots.append(np.concatenate([translational, rotational], axis=-1))
    return MotorForm(1, np.stack(slots), cfg.grid, "motor", SMOOTH)


def section_change(E: MotorForm, S: np.ndarray) -> MotorForm:
    """
    Express a motor-valued form in the frame rotated by S

    Translational parts become S^T u; rotational parts are conjugated,
    vee(S^T hat(phi) S), so an inversion leaves them unchanged.

    Args:
        E: Smooth motor-valued form
        S: Constant 3x3 or per-vertex (..., 3, 3) orthogonal field
    """
    if E.value_space != "motor" or E.is_cochain:
        raise ValidationError("section_change expects a smooth motor-valued form")
    S = np.asarray(S, dtype=float)
    if S.shape == (3, 3):
        S = lie_euclid.check_orthogonal(S)
    else:
        drift = lie_euclid.orthogonality_drift(S)
        if drift > config.ORTHO_REJECT_TOL:
            raise ValidationError(f"Frame field is not orthogonal (drift {drift:.3e})")
    St = np.swapaxes(S, -1, -2)
    u = np.einsum("...ij,...j->...i", St, E.data[..., :3])
    phi = lie_euclid.vee(St @ lie_euclid.hat(E.data[..., 3:]) @ S)
    return E.like(np.concatenate([u, phi], axis=-1))


def infinitesimal_strain(d: DisplacementField) -> StrainState:
    """eps_ij = d_i u_j - e_ijk phi_k and tau_ij = d_i phi_j, computed as D of the motor 0-form"""
    return StrainState.from_form(covariant_d(d.as_form()))


def exponential_configuration(xi: DisplacementField, t: float) -> Configuration:
    """
    Configuration reached by following the motor field t * (u, phi) pointwise:
    y = x + translation of exp(t xi(x)), Q = rotation of exp(t xi(x)).
    Infinitesimal rigid fields generate exact rigid motions.
    """
    x, S = lie_euclid.exp_parts(t * xi.values())
    return Configuration(xi.grid, xi.grid.points() + x, S)


def linearization_check(xi: DisplacementField, t: float) -> float:
    """Sup-norm defect |E(psi_t) / t - e(xi)|, expected to shrink linearly with t"""
    if t <= 0.0:
        raise ValidationError(f"Linearization parameter must be positive, got {t}")
    E = finite_strain(exponential_configuration(xi, t))
    e = covariant_d(xi.as_form())
    defect = float(np.max(np.abs(E.data / t - e.data)))
    logger.debug(f"Linearization defect at t={t:.1e}: {defect:.3e}")
    return defect


def _relative_logs(cfg: Configuration, axis: int, step: int) -> np.ndarray:
    """log(F(p)^-1 F(p + step e_axis)) for every vertex p where the neighbour exists"""
    n = cfg.grid.vertex_shape[axis]
    y = np.moveaxis(cfg.y, axis, 0)
    Q = np.moveaxis(cfg.Q, axis, 0)
    if step > 0:
        base, other = slice(0, n - step), slice(step, n)
    else:
        base, other = slice(-step, n), slice(0, n + step)
    Qt = np.swapaxes(Q[base], -1, -2)
    dx = np.einsum("...ij,...j->...i", Qt, y[other] - y[base])
    return lie_euclid.log_parts(dx, Qt @ Q[other])


def moving_frames_strain(cfg: Configuration) -> MotorForm:
    """
    Strain from finite differences of frame logarithms

    Each slot is the centred difference of log(F(x)^-1 F(x +- h e_a)),
    second-order one-sided at the ends, minus the reference value (e_a, 0).
    It agrees with ``finite_strain`` to second order in the spacing.
    """
    slots = []
    for a in range(3):
        h = cfg.grid.spacing[a]
        forward = _relative_logs(cfg, a, 1)
        backward = _relative_logs(cfg, a, -1)
        forward2 = _relative_logs(cfg, a, 2)
        backward2 = _relative_logs(cfg, a, -2)
        n = cfg.grid.vertex_shape[a]
        out = np.zeros((n,) + forward.shape[1:])
        out[1:-1] = (forward[1:] - backward[:-1]) / (2.0 * h)
        out[0] = (4.0 * forward[0] - forward2[0]) / (2.0 * h)
        out[-1] = (-4.0 * backward[-1] + backward2[-1]) / (2.0 * h)
        slots.append(np.moveaxis(out, 0, a) - _IDENTITY_COFRAME[a])
    return MotorForm(1, np.stack(slots), cfg.grid, "motor", SMOOTH)


def apply_motion(cfg: Configuration, g: lie_euclid.EuclideanMotion) -> Configuration:
    """Left multiplication by a constant rigid motion"""
    return Configuration(cfg.grid, lie_euclid.act(g, cfg.y), g.S @ cfg.Q)

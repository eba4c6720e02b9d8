"""Stress 2-forms, balance laws, virtual work, boundary tractions and stress potentials."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from errors import ValidationError
from forms import BodyGrid, MotorForm, SMOOTH, covariant_d_star
from kinematics import Configuration, DisplacementField, infinitesimal_strain
import lie_euclid

# Configure logging
logger = logging.getLogger(__name__)

_EPS = lie_euclid.levi_civita()

FACES = ("-x1", "+x1", "-x2", "+x2", "-x3", "+x3")


@dataclass(eq=False)
class StressState:
    """
    Stress 2-form sigma_ij v*_j A_i + chi_ij r*_j A_i: area index i,
    direction index j.
    """

    grid: BodyGrid
    sigma: np.ndarray
    chi: np.ndarray

    def __post_init__(self):
        shape = self.grid.vertex_shape + (3, 3)
        self.sigma = np.broadcast_to(np.asarray(self.sigma, dtype=float), shape).copy()
        self.chi = np.broadcast_to(np.asarray(self.chi, dtype=float), shape).copy()

    @classmethod
    def zeros(cls, grid: BodyGrid) -> "StressState":
        return cls(grid, np.zeros((3, 3)), np.zeros((3, 3)))

    @classmethod
    def from_form(cls, form: MotorForm) -> "StressState":
        if form.degree != 2 or form.value_space != "comotor" or form.is_cochain:
            raise ValidationError("Stress must be a smooth comotor-valued 2-form")
        data = np.moveaxis(form.data, 0, -2)
        return cls(form.grid, data[..., :3], data[..., 3:])

    def as_form(self) -> MotorForm:
        data = np.concatenate([self.sigma, self.chi], axis=-1)
        return MotorForm(2, np.moveaxis(data, -2, 0), self.grid, "comotor", SMOOTH)

    def packed(self) -> np.ndarray:
        lead = self.sigma.shape[:-2]
        return np.concatenate([self.sigma.reshape(lead + (9,)), self.chi.reshape(lead + (9,))], axis=-1)


@dataclass(eq=False)
class LoadState:
    """
    Body force f and body couple m per unit volume, plus an optional stress
    field whose boundary trace gives the applied tractions.
    """

    grid: BodyGrid
    f: np.ndarray
    m: np.ndarray
    traction: Optional[StressState] = None

    def __post_init__(self):
        shape = self.grid.vertex_shape + (3,)
        self.f = np.broadcast_to(np.asarray(self.f, dtype=float), shape).copy()
        self.m = np.broadcast_to(np.asarray(self.m, dtype=float), shape).copy()
        if not (np.all(np.isfinite(self.f)) and np.all(np.isfinite(self.m))):
            raise ValidationError("Loads contain non-finite values")

    @classmethod
    def zeros(cls, grid: BodyGrid) -> "LoadState":
        return cls(grid, np.zeros(3), np.zeros(3))

    def values(self) -> np.ndarray:
        return np.concatenate([self.f, self.m], axis=-1)

    def as_form(self) -> MotorForm:
        return MotorForm(3, self.values()[None], self.grid, "comotor", SMOOTH)


def _derivative(values: np.ndarray, grid: BodyGrid, axis: int) -> np.ndarray:
    return np.gradient(values, grid.spacing[axis], axis=axis, edge_order=2)


def balance_residual(S: StressState, L: LoadState) -> Tuple[np.ndarray, np.ndarray]:
    """
    Local balance of linear and angular momentum

    Returns:
        (r_force, r_moment) with r_force_i = d_j sigma_ji + f_i and
        r_moment_i = d_j chi_ji + e_ijk sigma_jk + m_i
    """
    r_force = L.f.copy()
    r_moment = L.m + np.einsum("ijk,...jk->...i", _EPS, S.sigma)
    for j in range(3):
        r_force += _derivative(S.sigma[..., j, :], S.grid, j)
        r_moment += _derivative(S.chi[..., j, :], S.grid, j)
    return r_force, r_moment


def covariant_balance(S: StressState, L: LoadState) -> Tuple[np.ndarray, np.ndarray]:
    """Same residual read off the 3-form D*Sigma + F"""
    form = covariant_d_star(S.as_form()) + L.as_form()
    return form.data[0, ..., :3], form.data[0, ..., 3:]


def _trapezoid_weights(grid: BodyGrid, axis: int) -> np.ndarray:
    weights = np.full(grid.dims[axis] + 1, grid.spacing[axis])
    weights[0] *= 0.5
    weights[-1] *= 0.5
    return weights


def volume_weights(grid: BodyGrid) -> np.ndarray:
    w = [_trapezoid_weights(grid, a) for a in range(3)]
    return np.einsum("i,j,k->ijk", *w)


def _parse_face(face: str) -> Tuple[int, int]:
    if face not in FACES:
        raise ValidationError(f"Unknown boundary face '{face}', expected one of {', '.join(FACES)}")
    return int(face[2]) - 1, (1 if face[0] == "+" else -1)


@dataclass
class FaceTraction:
    """Outward-signed force and couple per unit area on one boundary face"""

    face: str
    axis: int
    sign: int
    values: np.ndarray
    weights: np.ndarray

    def total(self) -> np.ndarray:
        return np.einsum("ab,abk->k", self.weights, self.values)


def boundary_traction(S: StressState, face: str) -> FaceTraction:
    """
    Restriction of the stress 2-form to a boundary face

    On the +x_a face the traction is (sigma_a., chi_a.); on the -x_a face
    the outward orientation flips its sign.
    """
    axis, sign = _parse_face(face)
    index = S.grid.dims[axis] if sign > 0 else 0
    rows = np.concatenate([S.sigma[..., axis, :], S.chi[..., axis, :]], axis=-1)
    values = sign * np.take(rows, index, axis=axis)
    others = [a for a in range(3) if a != axis]
    weights = np.outer(_trapezoid_weights(S.grid, others[0]), _trapezoid_weights(S.grid, others[1]))
    return FaceTraction(face, axis, sign, values, weights)


def boundary_work(traction_source: StressState, xi: DisplacementField) -> float:
    """Closed-surface integral of <xi, T> with T the outward trace of the stress"""
    total = 0.0
    values = xi.values()
    for face in FACES:
        traction = boundary_traction(traction_source, face)
        index = xi.grid.dims[traction.axis] if traction.sign > 0 else 0
        on_face = np.take(values, index, axis=traction.axis)
        total += float(np.einsum("ab,ab->", traction.weights, lie_euclid.pair(traction.values, on_face)))
    return total


def virtual_work_residual(S: StressState, L: LoadState, xi: DisplacementField) -> float:
    """
    Virtual work balance: int <xi, F> + oint <xi, T> - int <D xi, Sigma>

    Tractions come from ``L.traction`` when given, otherwise from the
    boundary trace of ``S``. Volume integrals use the trapezoid rule.
    """
    weights = volume_weights(S.grid)
    external = float(np.sum(weights * lie_euclid.pair(L.values(), xi.values())))
    boundary = boundary_work(L.traction if L.traction is not None else S, xi)
    strain = infinitesimal_strain(xi)
    internal = float(np.sum(weights * (np.einsum("...ij,...ij->...", S.sigma, strain.eps)
                                       + np.einsum("...ij,...ij->...", S.chi, strain.tau))))
    return external + boundary - internal


def rigid_virtual_fields(grid: BodyGrid) -> List[DisplacementField]:
    """Three translations followed by three infinitesimal rotations about the origin"""
    fields = []
    for i in range(3):
        fields.append(DisplacementField.rigid(grid, np.eye(3)[i], np.zeros(3)))
    for i in range(3):
        fields.append(DisplacementField.rigid(grid, np.zeros(3), np.eye(3)[i]))
    return fields


def net_load(S: StressState, L: LoadState) -> np.ndarray:
    """Net force and torque about the origin: oint <xi, T> + int <xi, F> for the six rigid fields"""
    weights = volume_weights(S.grid)
    source = L.traction if L.traction is not None else S
    out = np.zeros(6)
    for n, xi in enumerate(rigid_virtual_fields(S.grid)):
        out[n] = boundary_work(source, xi) + float(np.sum(weights * lie_euclid.pair(L.values(), xi.values())))
    return out


def divergence_defect(S: StressState) -> float:
    """Largest |oint <xi, T> - int <xi, D*Sigma>| over the rigid virtual fields"""
    weights = volume_weights(S.grid)
    divergence = covariant_d_star(S.as_form()).data[0]
    defect = 0.0
    for xi in rigid_virtual_fields(S.grid):
        volume = float(np.sum(weights * lie_euclid.pair(divergence, xi.values())))
        defect = max(defect, abs(boundary_work(S, xi) - volume))
    return defect


def stress_potential(Y: MotorForm) -> Union[StressState, MotorForm]:
    """Self-equilibrated stress Sigma = D*Y; cochain potentials give a 2-cochain"""
    if Y.degree != 1 or Y.value_space != "comotor":
        raise ValidationError("A stress potential is a comotor-valued 1-form")
    sigma = covariant_d_star(Y)
    if sigma.is_cochain:
        return sigma
    return StressState.from_form(sigma)


def gauge_shift(Y: MotorForm, alpha: MotorForm) -> MotorForm:
    """Y + D*alpha, which leaves D*Y unchanged"""
    if alpha.degree != 0 or alpha.value_space != "comotor":
        raise ValidationError("A gauge parameter is a comotor-valued 0-form")
    return Y + covariant_d_star(alpha)


def pullback_stress(S: StressState, cfg: Configuration) -> StressState:
    """
    Reference (second Piola-Kirchhoff type) stress of a spatial stress field

    The area forms pull back by the cofactor of F = dy/dx. The comotor
    values, taken about the material point y, are referred to the spatial
    origin and then pulled back by the coadjoint action of the pointwise
    motion (y, Q).

    Raises:
        ValidationError: if det F <= 0 anywhere on the grid
    """
    if S.grid != cfg.grid:
        raise ValidationError("Stress and configuration live on different grids")
    F = np.stack([_derivative(cfg.y, cfg.grid, K) for K in range(3)], axis=-1)
    det = np.linalg.det(F)
    if float(np.min(det)) <= 0.0:
        raise ValidationError(f"Deformation gradient is singular or inverting (min det {float(np.min(det)):.3e})")
    cofactor = det[..., None, None] * np.swapaxes(np.linalg.inv(F), -1, -2)
    areas = np.einsum("...iK,...ij->...Kj", cofactor, np.concatenate([S.sigma, S.chi], axis=-1))
    y = cfg.y[..., None, :]
    at_origin = lie_euclid.coadjoint_action(-y, np.eye(3), areas)
    pulled = lie_euclid.coadjoint_action(y, cfg.Q[..., None, :, :], at_origin)
    return StressState(S.grid, pulled[..., :3], pulled[..., 3:])

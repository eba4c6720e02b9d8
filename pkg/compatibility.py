"""
Strain compatibility: defect densities as the covariant derivative of
strain, the Bianchi identity, Cartan-connection curvature and Burgers
circuits on the cubical complex.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

import config
from errors import ChainError, ValidationError
from forms import (BASIS, COCHAIN, SMOOTH, BodyGrid, Chain, FlatConnection, MotorForm,
                   boundary, complex_for, covariant_d, exterior_d, integrate, sample, to_motor, wedge)
from kinematics import Configuration, StrainState, finite_strain
import lie_euclid

# Configure logging
logger = logging.getLogger(__name__)

_EPS = lie_euclid.levi_civita()


@dataclass(eq=False)
class DefectDensity:
    """
    Dislocation density T[..., a, b, k] and disclination density
    Omega[..., a, b, k]: form indices a, b (antisymmetric), value index k.
    """

    grid: BodyGrid
    T: np.ndarray
    Omega: np.ndarray

    def __post_init__(self):
        shape = self.grid.vertex_shape + (3, 3, 3)
        self.T = np.broadcast_to(np.asarray(self.T, dtype=float), shape).copy()
        self.Omega = np.broadcast_to(np.asarray(self.Omega, dtype=float), shape).copy()
        for name, values in (("T", self.T), ("Omega", self.Omega)):
            asym = float(np.max(np.abs(values + np.swapaxes(values, -3, -2)), initial=0.0))
            if asym > 1e-12 * max(1.0, float(np.max(np.abs(values), initial=0.0))):
                raise ValidationError(f"Defect density {name} is not antisymmetric in its form indices")

    @classmethod
    def from_form(cls, J: MotorForm) -> "DefectDensity":
        if J.degree != 2 or J.value_space != "motor" or J.is_cochain:
            raise ValidationError("Defect density must be a smooth motor-valued 2-form")
        T = np.einsum("abc,c...k->...abk", _EPS, J.data[..., :3])
        Omega = np.einsum("abc,c...k->...abk", _EPS, J.data[..., 3:])
        return cls(J.grid, T, Omega)

    def as_form(self) -> MotorForm:
        translational = 0.5 * np.einsum("abc,...abk->c...k", _EPS, self.T)
        rotational = 0.5 * np.einsum("abc,...abk->c...k", _EPS, self.Omega)
        return MotorForm(2, np.concatenate([translational, rotational], axis=-1), self.grid, "motor", SMOOTH)

    def max_abs(self, margin: int = 0) -> float:
        return self.as_form().max_abs(margin)


@dataclass(eq=False)
class CartanConnection:
    """
    Motor-valued 1-form eta in the identity trivialization: slot a carries
    the coframe row theta[..., a, :] and the rotational part A[..., a, :].
    """

    grid: BodyGrid
    theta: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        shape = self.grid.vertex_shape + (3, 3)
        self.theta = np.broadcast_to(np.asarray(self.theta, dtype=float), shape).copy()
        self.A = np.broadcast_to(np.asarray(self.A, dtype=float), shape).copy()
        det = np.linalg.det(self.theta)
        if float(np.min(np.abs(det))) <= config.COFRAME_DET_MIN:
            raise ValidationError(f"Coframe is singular (min |det| = {float(np.min(np.abs(det))):.3e})")

    @classmethod
    def flat(cls, grid: BodyGrid) -> "CartanConnection":
        return cls(grid, np.eye(3), np.zeros((3, 3)))

    @classmethod
    def from_form(cls, form: MotorForm) -> "CartanConnection":
        strain = StrainState.from_form(form)
        return cls(form.grid, strain.eps, strain.tau)

    @classmethod
    def from_configuration(cls, cfg: Configuration) -> "CartanConnection":
        """Pullback of the Maurer-Cartan form by the configuration"""
        flat = FlatConnection(cfg.grid).form(SMOOTH)
        return cls.from_form(finite_strain(cfg) + flat)

    def as_form(self, representation: str = SMOOTH) -> MotorForm:
        form = StrainState(self.grid, self.theta, self.A).as_form()
        if representation == COCHAIN:
            return sample(form)
        return form

    def perturbed(self, motor: np.ndarray, slot: int) -> "CartanConnection":
        """Add a constant motor to one slot of the connection"""
        motor = np.asarray(motor, dtype=float).reshape(6)
        theta, A = self.theta.copy(), self.A.copy()
        theta[..., slot, :] += motor[:3]
        A[..., slot, :] += motor[3:]
        return CartanConnection(self.grid, theta, A)


ConnectionInput = Union[CartanConnection, FlatConnection, MotorForm, None]


def strain_incompatibility(e: Union[StrainState, MotorForm]) -> Union[DefectDensity, MotorForm]:
    """
    Defect density De of a strain 1-form

    Components: T_abj = d_a eps_bj - d_b eps_aj + e_bjl tau_al - e_ajl tau_bl
    and Omega_abk = d_a tau_bk - d_b tau_ak. Cochain input returns the
    2-cochain De computed exactly on the complex.
    """
    form = e.as_form() if isinstance(e, StrainState) else e
    if form.degree != 1 or form.value_space != "motor":
        raise ValidationError("Strain incompatibility expects a motor-valued 1-form")
    J = covariant_d(form)
    if J.is_cochain:
        return J
    return DefectDensity.from_form(J)


def bianchi_check(J: Union[DefectDensity, MotorForm]) -> float:
    """Sup norm of DJ; vanishes whenever J is itself a covariant derivative"""
    form = J.as_form() if isinstance(J, DefectDensity) else J
    if form.degree != 2 or form.value_space != "motor":
        raise ValidationError("Bianchi check expects a motor-valued 2-form")
    residual = covariant_d(form).max_abs()
    logger.debug(f"Bianchi residual {residual:.3e}")
    return residual


def _connection(eta: ConnectionInput, grid: BodyGrid, representation: str) -> MotorForm:
    if eta is None:
        eta = FlatConnection(grid)
    if isinstance(eta, MotorForm):
        return eta
    if isinstance(eta, CartanConnection):
        return eta.as_form(representation)
    return eta.form(representation)


def cartan_curvature(eta: ConnectionInput, grid: Optional[BodyGrid] = None,
                     representation: str = SMOOTH) -> MotorForm:
    """Curvature 2-form d eta + eta ^ eta"""
    if grid is None:
        grid = eta.grid
    form = _connection(eta, grid, representation)
    return exterior_d(form) + to_motor(wedge(form, form))


def finite_compatibility_residual(E: MotorForm, eta: ConnectionInput = None) -> float:
    """
    Sup norm of D_eta E + E ^ E + Theta(eta)

    The sum equals d(E + eta) + (E + eta) ^ (E + eta), the structure
    equation of E + eta, so it vanishes when E + eta is a pulled-back
    Maurer-Cartan form.
    """
    form = _connection(eta, E.grid, E.representation)
    residual = covariant_d(E, form) + to_motor(wedge(E, E)) + cartan_curvature(form, E.grid)
    return residual.max_abs()


@dataclass
class BurgersReport:
    """Closed-loop integral of strain and the defect flux through a spanning surface"""

    circuit: np.ndarray
    flux: np.ndarray

    @property
    def defect(self) -> float:
        return float(np.max(np.abs(self.circuit - self.flux)))

    def as_dict(self) -> Dict[str, object]:
        return {
            "circuit": [float(v) for v in self.circuit],
            "flux": [float(v) for v in self.flux],
            "stokes_defect": self.defect,
        }


def transport_to_far_corner(form: MotorForm) -> MotorForm:
    """
    Refer each cell value to the origin by the adjoint action of the
    translation to the cell's far corner (anchor plus every cell direction).
    """
    if not form.is_cochain or form.value_space != "motor":
        raise ValidationError("Transport expects a motor-valued cochain")
    points = form.grid.points()
    blocks = []
    for c, axes in enumerate(BASIS[form.degree]):
        corner = points[tuple(slice(1, None) if a in axes else slice(None) for a in range(3))]
        blocks.append(lie_euclid.translate_motor(corner, form.block(c)))
    return MotorForm.from_blocks(form.degree, blocks, form.grid, "motor", COCHAIN)


def burgers_circuit(e: Union[StrainState, MotorForm], loop: Chain, cap: Chain) -> BurgersReport:
    """
    Burgers motor of the defects enclosed by a loop

    Edge values are transported to a common base point before summing, so
    the circuit equals the flux of the transported De through any cap with
    boundary equal to the loop; the identity is exact on the complex.

    Raises:
        ChainError: if the loop is open or the cap does not bound it
    """
    form = e.as_form() if isinstance(e, StrainState) else e
    cochain = sample(form)
    if loop.degree != 1 or cap.degree != 2:
        raise ChainError("Burgers circuit needs a 1-chain loop and a 2-chain cap")
    if not boundary(loop).is_zero():
        raise ChainError("Loop is not closed")
    if not (boundary(cap) - loop).is_zero():
        raise ChainError("Boundary of the cap differs from the loop")
    circuit = integrate(transport_to_far_corner(cochain), loop)
    flux = integrate(transport_to_far_corner(covariant_d(cochain)), cap)
    report = BurgersReport(np.asarray(circuit, dtype=float), np.asarray(flux, dtype=float))
    logger.info(f"Burgers circuit {np.round(report.circuit, 12).tolist()}, Stokes defect {report.defect:.3e}")
    return report


def impulse_defect_cochain(grid: BodyGrid, burgers: Sequence[float] = (1, 0, 0, 0, 0, 0),
                           line_at: Tuple[int, int] = (0, 0)) -> MotorForm:
    """
    Strain cochain whose defect density is the Burgers motor on the x3-normal
    faces (i0, j0, k) for every k, a straight dislocation line along x3

    The cochain equals the Burgers motor on the x2-edges at j = j0 with
    i > i0 and vanishes elsewhere.
    """
    i0, j0 = (int(v) for v in line_at)
    if not (0 <= i0 < grid.dims[0] and 0 <= j0 < grid.dims[1]):
        raise ValidationError(f"Defect line position {line_at} is outside the grid {grid.dims}")
    burgers = np.asarray(burgers, dtype=float).reshape(6)
    blocks = [np.zeros(shape + (6,)) for shape in (complex_for(grid).cell_shape(1, a) for a in range(3))]
    blocks[1][i0 + 1:, j0, :] = burgers
    return MotorForm.from_blocks(1, blocks, grid, "motor", COCHAIN)


def face_patch(grid: BodyGrid, normal: int, anchor: Sequence[int],
               size: Tuple[int, int] = (1, 1)) -> Tuple[Chain, Chain]:
    """
    Rectangular patch of faces normal to an axis and its boundary loop

    Returns:
        (loop, cap) with loop = boundary(cap)
    """
    axes = BASIS[2][normal]
    name = f"face{normal + 1}"
    cells = []
    for s in range(size[0]):
        for t in range(size[1]):
            index = list(anchor)
            index[axes[0]] += s
            index[axes[1]] += t
            cells.append((name, *index, 1))
    cap = Chain.from_cells(grid, cells)
    return boundary(cap), cap


def dislocation_loop(grid: BodyGrid, line_at: Tuple[int, int], k: int, radius: int = 0) -> Tuple[Chain, Chain]:
    """Loop and cap around the x3-line of ``impulse_defect_cochain`` at height k"""
    i0, j0 = line_at
    anchor = (i0 - radius, j0 - radius, k)
    if min(anchor[:2]) < 0 or i0 + radius >= grid.dims[0] or j0 + radius >= grid.dims[1]:
        raise ChainError(f"Loop of radius {radius} around {line_at} leaves the grid")
    return face_patch(grid, 2, anchor, (2 * radius + 1, 2 * radius + 1))

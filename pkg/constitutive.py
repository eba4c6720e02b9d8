"""
Linear micropolar constitutive laws.

Strain and stress are packed as 18-vectors: row-major eps (or sigma) in
slots 0-8 followed by row-major tau (or chi) in slots 9-17. A stiffness
operator is the 18x18 matrix C with S = C E.
"""

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigvalsh

import config
from errors import ConfigError, ValidationError
from kinematics import StrainState
from mechanics import StressState

# Configure logging
logger = logging.getLogger(__name__)

SYMMETRY_CLASSES = ("isotropic", "hemitropic", "centrosymmetric", "anisotropic", "odd")


@dataclass
class MaterialConstants:
    """
    Isotropic moduli (lam, mu1, mu2) and couple moduli (alpha, beta1, beta2)
    in force/area and force units; hemitropic coupling (c1, c2, c3); odd
    couplings as (slot A, slot B, k) entries of an antisymmetric addition.
    """

    lam: float = 0.0
    mu1: float = 0.0
    mu2: float = 0.0
    alpha: float = 0.0
    beta1: float = 0.0
    beta2: float = 0.0
    c1: float = 0.0
    c2: float = 0.0
    c3: float = 0.0
    odd_couplings: Sequence[Tuple[int, int, float]] = field(default_factory=list)
    matrix: Optional[np.ndarray] = None


@dataclass(eq=False)
class StiffnessOperator:
    C: np.ndarray
    symmetry: str = "anisotropic"

    def __post_init__(self):
        self.C = np.asarray(self.C, dtype=float)
        if self.C.shape != (18, 18) or not np.all(np.isfinite(self.C)):
            raise ValidationError(f"Stiffness must be a finite 18x18 matrix, got shape {self.C.shape}")
        if self.symmetry not in SYMMETRY_CLASSES:
            raise ValidationError(f"Unknown symmetry class '{self.symmetry}'")

    @property
    def hyperelastic(self) -> bool:
        return bool(np.array_equal(self.C, self.C.T))

    @property
    def pd_margin(self) -> float:
        """Smallest eigenvalue of the symmetric part"""
        return float(eigvalsh(0.5 * (self.C + self.C.T))[0])

    @property
    def positive_definite(self) -> bool:
        return self.pd_margin > 0.0

    def blocks(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(C_eps_eps, C_eps_tau, C_tau_eps, C_tau_tau), each 9x9"""
        return self.C[:9, :9], self.C[:9, 9:], self.C[9:, :9], self.C[9:, 9:]


def isotropic_block(a: float, b: float, c: float) -> np.ndarray:
    """9x9 matrix of X -> a tr(X) I + b X + c X^T"""
    delta = np.eye(3)
    tensor = (a * np.einsum("ij,kl->ijkl", delta, delta)
              + b * np.einsum("ik,jl->ijkl", delta, delta)
              + c * np.einsum("il,jk->ijkl", delta, delta))
    return tensor.reshape(9, 9)


def build_stiffness(constants: MaterialConstants, symmetry: str) -> StiffnessOperator:
    """
    Assemble the stiffness matrix of a symmetry class

    isotropic: sigma = lam tr(eps) I + mu1 eps + mu2 eps^T and
    chi = alpha tr(tau) I + beta1 tau + beta2 tau^T; hemitropic adds the
    same three-term form with (c1, c2, c3) in both coupling blocks; odd adds
    antisymmetric entries to the isotropic or hemitropic matrix; anisotropic
    takes ``constants.matrix`` as given.
    """
    if symmetry not in SYMMETRY_CLASSES:
        raise ValidationError(f"Unknown symmetry class '{symmetry}'")
    if symmetry == "anisotropic":
        if constants.matrix is None:
            raise ValidationError("Anisotropic material needs a full 18x18 matrix")
        operator = StiffnessOperator(constants.matrix, symmetry)
    else:
        C = np.zeros((18, 18))
        C[:9, :9] = isotropic_block(constants.lam, constants.mu1, constants.mu2)
        C[9:, 9:] = isotropic_block(constants.alpha, constants.beta1, constants.beta2)
        if symmetry in ("hemitropic", "odd"):
            coupling = isotropic_block(constants.c1, constants.c2, constants.c3)
            C[:9, 9:] = coupling
            C[9:, :9] = coupling
        if symmetry == "odd":
            if not constants.odd_couplings:
                raise ValidationError("Odd material needs at least one antisymmetric coupling")
            for slot_a, slot_b, k in constants.odd_couplings:
                if slot_a == slot_b or not (0 <= slot_a < 18 and 0 <= slot_b < 18):
                    raise ValidationError(f"Invalid odd coupling slots ({slot_a}, {slot_b})")
                C[slot_a, slot_b] += k
                C[slot_b, slot_a] -= k
        elif constants.odd_couplings:
            raise ValidationError(f"Odd couplings are not allowed for a {symmetry} material")
        operator = StiffnessOperator(C, "centrosymmetric" if symmetry == "centrosymmetric" else symmetry)

    margin = operator.pd_margin
    if margin <= 0.0:
        logger.warning(f"Stiffness of class {symmetry} is not positive definite (margin {margin:.3e})")
    else:
        logger.debug(f"Built {symmetry} stiffness with positive-definiteness margin {margin:.3e}")
    return operator


def centrosymmetric_projection(operator: StiffnessOperator) -> StiffnessOperator:
    """Drop every translation-rotation coupling"""
    C = operator.C.copy()
    C[:9, 9:] = 0.0
    C[9:, :9] = 0.0
    return StiffnessOperator(C, "centrosymmetric")


def pack(eps: np.ndarray, tau: np.ndarray) -> np.ndarray:
    lead = np.shape(eps)[:-2]
    return np.concatenate([np.reshape(eps, lead + (9,)), np.reshape(tau, lead + (9,))], axis=-1)


def unpack(vector: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    lead = np.shape(vector)[:-1]
    return np.reshape(vector[..., :9], lead + (3, 3)), np.reshape(vector[..., 9:], lead + (3, 3))


def apply_law(C: StiffnessOperator, e: StrainState) -> StressState:
    packed = np.einsum("AB,...B->...A", C.C, e.packed())
    sigma, chi = unpack(packed)
    return StressState(e.grid, sigma, chi)


def quadratic_energy(C: StiffnessOperator, E: np.ndarray) -> np.ndarray:
    """1/2 E.C E for packed strains (..., 18)"""
    return 0.5 * np.einsum("...A,AB,...B->...", E, C.C, E)


def stored_energy(C: StiffnessOperator, e: StrainState) -> np.ndarray:
    """
    Stored energy density U = 1/2 <C e, e>

    Raises:
        ValidationError: if C lacks major symmetry, since no potential exists
    """
    if not C.hyperelastic:
        raise ValidationError("Stored energy requires a stiffness with major symmetry (C = C^T)")
    return quadratic_energy(C, e.packed())


def energy_gradient_check(C: StiffnessOperator, e: np.ndarray, step: Optional[float] = None) -> float:
    """
    Relative defect max |dU/dE - C E| / max(|C E|, 1) of central differences of U

    Args:
        C: Stiffness operator, symmetric or not
        e: StrainState or packed strains (..., 18)
        step: Finite-difference step, defaults to config.FD_STEP
    """
    step = config.FD_STEP if step is None else step
    E = e.packed() if isinstance(e, StrainState) else np.asarray(e, dtype=float)
    stress = np.einsum("AB,...B->...A", C.C, E)
    gradient = np.zeros_like(E)
    for slot in range(18):
        shift = np.zeros(18)
        shift[slot] = step
        gradient[..., slot] = (quadratic_energy(C, E + shift) - quadratic_energy(C, E - shift)) / (2.0 * step)
    scale = max(1.0, float(np.max(np.abs(stress), initial=0.0)))
    return float(np.max(np.abs(gradient - stress), initial=0.0)) / scale


def transform_strain(E: np.ndarray, R: np.ndarray) -> np.ndarray:
    """(eps, tau) -> (R^T eps R, det(R) R^T tau R) on packed strains"""
    R = np.asarray(R, dtype=float)
    eps, tau = unpack(np.asarray(E, dtype=float))
    det = float(np.sign(np.linalg.det(R)))
    return pack(R.T @ eps @ R, det * (R.T @ tau @ R))


def material_symmetry_check(C: StiffnessOperator, R: np.ndarray, samples: int = 20,
                            rng: Optional[np.random.Generator] = None) -> float:
    """Largest |U(E) - U(E_R)| over random packed strains"""
    R = np.asarray(R, dtype=float)
    if np.max(np.abs(R.T @ R - np.eye(3))) > config.ORTHO_REJECT_TOL:
        raise ValidationError("Symmetry transformation must be an orthogonal matrix")
    rng = rng if rng is not None else np.random.default_rng(config.SEED)
    E = rng.standard_normal((samples, 18))
    return float(np.max(np.abs(quadratic_energy(C, E) - quadratic_energy(C, transform_strain(E, R)))))


def circle_cycle(slot_a: int, slot_b: int, radius: float = 1.0, steps: Optional[int] = None) -> np.ndarray:
    """Closed circle of packed strains in the (slot_a, slot_b) plane, first sample repeated at the end"""
    steps = config.CYCLE_STEPS if steps is None else steps
    t = np.linspace(0.0, 2.0 * np.pi, steps + 1)
    path = np.zeros((steps + 1, 18))
    path[:, slot_a] = radius * np.cos(t)
    path[:, slot_b] = radius * np.sin(t)
    path[-1] = path[0]
    return path


def cycle_work(C: StiffnessOperator, cycle: np.ndarray) -> float:
    """
    Work of the stress around a closed strain path, trapezoid rule

    Symmetric C telescopes to zero; an antisymmetric pair (A, B) over a
    circle of radius r yields pi r^2 (C_BA - C_AB).
    """
    cycle = np.asarray(cycle, dtype=float)
    if cycle.ndim != 2 or cycle.shape[1] != 18 or cycle.shape[0] < 2:
        raise ValidationError("A strain cycle is an (n, 18) array of packed strains")
    if not np.array_equal(cycle[0], cycle[-1]):
        raise ValidationError("Strain path is not closed (first and last samples differ)")
    stress = cycle @ C.C.T
    increments = np.diff(cycle, axis=0)
    return float(np.sum(0.5 * (stress[:-1] + stress[1:]) * increments))


_MATERIAL_KEYS = {"class", "constants", "couplings", "matrix"}
_CONSTANT_KEYS = {"lam", "mu1", "mu2", "alpha", "beta1", "beta2", "c1", "c2", "c3"}


def material_from_dict(data: Dict[str, Any], source: str = "material") -> StiffnessOperator:
    """
    Build a stiffness operator from a material document

    Raises:
        ConfigError: on unknown keys, unknown classes or malformed values
    """
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: material document must be a JSON object")
    unknown = set(data) - _MATERIAL_KEYS
    if unknown:
        raise ConfigError(f"{source}: unknown material keys {sorted(unknown)}")
    symmetry = data.get("class")
    if symmetry not in SYMMETRY_CLASSES:
        raise ConfigError(f"{source}: material class must be one of {', '.join(SYMMETRY_CLASSES)}")
    raw = data.get("constants", {})
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: 'constants' must be an object")
    unknown = set(raw) - _CONSTANT_KEYS
    if unknown:
        raise ConfigError(f"{source}: unknown material constants {sorted(unknown)}")
    try:
        constants = MaterialConstants(**{k: float(v) for k, v in raw.items()})
        constants.odd_couplings = [(int(a), int(b), float(k)) for a, b, k in data.get("couplings", [])]
        if "matrix" in data:
            constants.matrix = np.asarray(data["matrix"], dtype=float)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{source}: malformed material values ({e})")
    try:
        return build_stiffness(constants, symmetry)
    except ValidationError as e:
        raise ConfigError(f"{source}: {e}")


def load_material(path: str) -> StiffnessOperator:
    """Read a JSON material file"""
    if not os.path.exists(path):
        raise ConfigError(f"Material file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        logger.error(f"Error loading material file {path}: {e}")
        raise ConfigError(f"Cannot read material file {path}: {e}")
    operator = material_from_dict(data, path)
    logger.info(f"Loaded {operator.symmetry} material from {path}")
    return operator

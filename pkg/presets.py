"""
Named analytic fields built from sympy expressions in x1, x2, x3.

Expressions are differentiated symbolically and turned into numpy callables
with ``sympy.lambdify``; exact derivatives feed the manufactured loads and
the convergence studies.
"""

import logging
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import sympy

import config
from errors import ConfigError, DomainError
from forms import BASIS, VALUE_SHAPES, AnalyticForm, BodyGrid, MotorForm, locate
from kinematics import Configuration, DisplacementField, StrainState
import lie_euclid
from mechanics import LoadState, StressState

# Configure logging
logger = logging.getLogger(__name__)

X = sympy.symbols("x1 x2 x3")
_PI = sympy.pi
_LEVI = lie_euclid.levi_civita()


def _lambdify(exprs: Sequence[sympy.Expr], shape: tuple) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized evaluation of a flat list of expressions, reshaped to ``shape``"""
    function = sympy.lambdify(X, list(exprs), "numpy")

    def evaluate(points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        lead = points.shape[:-1]
        values = function(points[..., 0], points[..., 1], points[..., 2])
        flat = np.stack([np.broadcast_to(np.asarray(v, dtype=float), lead) for v in values], axis=-1)
        return flat.reshape(lead + shape)

    return evaluate


def _sine(*factors: int) -> sympy.Expr:
    expr = sympy.Integer(1)
    for x, k in zip(X, factors):
        expr *= sympy.sin(k * _PI * x)
    return expr


@dataclass(eq=False)
class DisplacementPreset:
    """Analytic displacement u(x) and microrotation phi(x)"""

    name: str
    u: Sequence[sympy.Expr]
    phi: Sequence[sympy.Expr]

    def __post_init__(self):
        self.u = [sympy.sympify(e) for e in self.u]
        self.phi = [sympy.sympify(e) for e in self.phi]
        components = self.u + self.phi
        self.values = _lambdify(components, (6,))
        gradient = [sympy.diff(q, X[k]) for k in range(3) for q in components]
        self.gradient = _lambdify(gradient, (3, 6))
        hessian = [sympy.diff(q, X[j], X[k]) for j in range(3) for k in range(3) for q in components]
        self.hessian = _lambdify(hessian, (3, 3, 6))

    def field(self, grid: BodyGrid) -> DisplacementField:
        return DisplacementField.from_values(grid, self.values(grid.points()))

    def _strain_slot(self, a: int) -> Callable[[np.ndarray], np.ndarray]:
        def slot(points: np.ndarray) -> np.ndarray:
            grad = self.gradient(points)[..., a, :]
            phi = self.values(points)[..., 3:]
            eps = grad[..., :3] - np.cross(phi, np.eye(3)[a])
            return np.concatenate([eps, grad[..., 3:]], axis=-1)
        return slot

    def strain_form(self) -> AnalyticForm:
        """Exact strain 1-form with slots (d_a u - phi x e_a, d_a phi)"""
        return AnalyticForm(1, [self._strain_slot(a) for a in range(3)], "motor")

    def strain(self, grid: BodyGrid) -> StrainState:
        return StrainState.from_form(self.strain_form().evaluate(grid))


@dataclass(eq=False)
class ConfigurationPreset:
    """Analytic positions y(x) and microrotations Q(x) = exp(hat(psi(x)))"""

    name: str
    y: Sequence[sympy.Expr]
    psi: Sequence[sympy.Expr]

    def __post_init__(self):
        self.y = [sympy.sympify(e) for e in self.y]
        self.psi = [sympy.sympify(e) for e in self.psi]
        self._y = _lambdify(self.y, (3,))
        self._psi = _lambdify(self.psi, (3,))

    def configuration(self, grid: BodyGrid) -> Configuration:
        points = grid.points()
        return Configuration.from_rotation_vectors(grid, self._y(points), self._psi(points))


@dataclass(eq=False)
class StressPreset:
    """Analytic stress components sigma_ij(x), chi_ij(x) and their equilibrating loads"""

    name: str
    sigma: Sequence[Sequence[sympy.Expr]]
    chi: Sequence[Sequence[sympy.Expr]]

    def __post_init__(self):
        sigma = [[sympy.sympify(e) for e in row] for row in self.sigma]
        chi = [[sympy.sympify(e) for e in row] for row in self.chi]
        self._sigma = _lambdify([e for row in sigma for e in row], (3, 3))
        self._chi = _lambdify([e for row in chi for e in row], (3, 3))
        force = [-sum(sympy.diff(sigma[j][i], X[j]) for j in range(3)) for i in range(3)]
        moment = [-(sum(sympy.diff(chi[j][i], X[j]) for j in range(3))
                    + sum(int(_LEVI[i, j, k]) * sigma[j][k] for j in range(3) for k in range(3)))
                  for i in range(3)]
        self._loads = _lambdify(force + moment, (6,))

    def stress(self, grid: BodyGrid) -> StressState:
        points = grid.points()
        return StressState(grid, self._sigma(points), self._chi(points))

    def loads(self, grid: BodyGrid) -> LoadState:
        """Body force and couple that put the stress in equilibrium"""
        values = self._loads(grid.points())
        return LoadState(grid, values[..., :3], values[..., 3:])


@dataclass(eq=False)
class PolynomialForm:
    """Form whose components are polynomial in x1, x2, x3, one flat expression list per basis component"""

    degree: int
    components: Sequence[Sequence[sympy.Expr]]
    value_space: str = "motor"

    def __post_init__(self):
        self.components = [[sympy.sympify(e) for e in exprs] for exprs in self.components]

    def analytic(self) -> AnalyticForm:
        shape = VALUE_SHAPES[self.value_space]
        return AnalyticForm(self.degree, [_lambdify(exprs, shape) for exprs in self.components], self.value_space)

    def evaluate(self, grid: BodyGrid) -> MotorForm:
        return self.analytic().evaluate(grid)

    def exterior_d(self) -> "PolynomialForm":
        """Exact exterior derivative"""
        if self.degree >= 3:
            raise DomainError("Exterior derivative of a 3-form vanishes identically on a 3D body")
        size = len(self.components[0])
        out = [[sympy.Integer(0)] * size for _ in BASIS[self.degree + 1]]
        for exprs, axes in zip(self.components, BASIS[self.degree]):
            for axis in range(3):
                target = locate((axis,) + axes)
                if target is None:
                    continue
                index, sign = target
                out[index] = [o + sign * sympy.diff(e, X[axis]) for o, e in zip(out[index], exprs)]
        return PolynomialForm(self.degree + 1, out, self.value_space)


def random_polynomial_form(degree: int, order: int, seed: Optional[int] = None,
                           value_space: str = "motor") -> PolynomialForm:
    """Polynomial form of total degree ``order`` with normal coefficients"""
    rng = np.random.default_rng(config.SEED if seed is None else seed)
    monomials = [sympy.Mul(*powers) for k in range(order + 1) for powers in combinations_with_replacement(X, k)]
    size = int(np.prod(VALUE_SHAPES[value_space]))
    components = [[sum(sympy.Float(rng.standard_normal()) * m for m in monomials) for _ in range(size)]
                  for _ in BASIS[degree]]
    return PolynomialForm(degree, components, value_space)


def _random_trig(rng: np.random.Generator, amplitude: float) -> sympy.Expr:
    k = rng.integers(1, 3, size=3)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    coefficient = amplitude * rng.standard_normal()
    argument = sum(int(k[a]) * _PI * X[a] for a in range(3)) / 2
    return sympy.Float(coefficient) * sympy.sin(argument + sympy.Float(phase))


def _rigid_expressions(a: Sequence[float], b: Sequence[float]) -> List[sympy.Expr]:
    return [sympy.Float(a[i]) + sum(int(_LEVI[i, j, k]) * sympy.Float(b[j]) * X[k]
                                    for j in range(3) for k in range(3)) for i in range(3)]


RIGID_TRANSLATION = (0.1, -0.2, 0.3)
RIGID_ROTATION = (0.2, 0.1, -0.3)


def _zero(seed: Optional[int]) -> DisplacementPreset:
    return DisplacementPreset("zero", [0, 0, 0], [0, 0, 0])


def _rigid(seed: Optional[int]) -> DisplacementPreset:
    return DisplacementPreset("rigid", _rigid_expressions(RIGID_TRANSLATION, RIGID_ROTATION),
                              [sympy.Float(v) for v in RIGID_ROTATION])


def _shear(seed: Optional[int]) -> DisplacementPreset:
    return DisplacementPreset("shear", [X[1], 0, 0], [0, 0, 0])


def _rotation(seed: Optional[int]) -> DisplacementPreset:
    return DisplacementPreset("rotation", [0, 0, 0], [0, 0, sympy.Rational(1, 2)])


def _mms_sine(seed: Optional[int]) -> DisplacementPreset:
    s = _sine(1, 1, 1)
    return DisplacementPreset("mms_sine", [s, s, s], [0, 0, 0])


def _mms_full(seed: Optional[int]) -> DisplacementPreset:
    x1, x2, x3 = X
    u = [_sine(1, 1, 1),
         sympy.sin(_PI * x1) * sympy.cos(_PI * x2) * x3 / 2,
         sympy.cos(_PI * x1) * x2 ** 2 / 2]
    phi = [sympy.sin(_PI * x2) * sympy.sin(_PI * x3) / 2,
           x1 * sympy.cos(_PI * x3) / 2,
           sympy.sin(_PI * (x1 + x2)) / 4]
    return DisplacementPreset("mms_full", u, phi)


def _smooth_random(seed: Optional[int]) -> DisplacementPreset:
    rng = np.random.default_rng(config.SEED if seed is None else seed)
    exprs = [_random_trig(rng, 0.5) for _ in range(6)]
    return DisplacementPreset("smooth_random", exprs[:3], exprs[3:])


DISPLACEMENT_PRESETS: Dict[str, Callable[[Optional[int]], DisplacementPreset]] = {
    "zero": _zero,
    "rigid": _rigid,
    "shear": _shear,
    "rotation": _rotation,
    "mms_sine": _mms_sine,
    "mms_full": _mms_full,
    "smooth_random": _smooth_random,
}


def _config_identity(seed: Optional[int]) -> ConfigurationPreset:
    return ConfigurationPreset("identity", list(X), [0, 0, 0])


def _config_translation(seed: Optional[int]) -> ConfigurationPreset:
    return ConfigurationPreset("translation", [X[i] + sympy.Float(RIGID_TRANSLATION[i]) for i in range(3)], [0, 0, 0])


def _config_rigid(seed: Optional[int]) -> ConfigurationPreset:
    psi = (0.3, -0.4, 0.5)
    R = lie_euclid.exp_so3(np.asarray(psi))
    y = [sympy.Float(RIGID_TRANSLATION[i]) + sum(sympy.Float(R[i, j]) * X[j] for j in range(3)) for i in range(3)]
    return ConfigurationPreset("rigid", y, [sympy.Float(v) for v in psi])


def _config_twist(seed: Optional[int]) -> ConfigurationPreset:
    return ConfigurationPreset("twist", list(X), [0, 0, sympy.Rational(1, 2) * X[2]])


def _config_dilation(seed: Optional[int]) -> ConfigurationPreset:
    return ConfigurationPreset("dilation", [2 * x for x in X], [0, 0, 0])


def _config_shear(seed: Optional[int]) -> ConfigurationPreset:
    return ConfigurationPreset("shear", [X[0] + X[1], X[1], X[2]], [0, 0, 0])


def _config_smooth_random(seed: Optional[int]) -> ConfigurationPreset:
    rng = np.random.default_rng(config.SEED if seed is None else seed)
    y = [X[i] + _random_trig(rng, 0.1) for i in range(3)]
    psi = [_random_trig(rng, 0.3) for _ in range(3)]
    return ConfigurationPreset("smooth_random", y, psi)


CONFIGURATION_PRESETS: Dict[str, Callable[[Optional[int]], ConfigurationPreset]] = {
    "identity": _config_identity,
    "translation": _config_translation,
    "rigid": _config_rigid,
    "twist": _config_twist,
    "dilation": _config_dilation,
    "shear": _config_shear,
    "smooth_random": _config_smooth_random,
}


def smooth_random_stress(seed: Optional[int] = None) -> StressPreset:
    """Stress preset with random trigonometric components, nonsymmetric sigma included"""
    rng = np.random.default_rng(config.SEED if seed is None else seed)
    sigma = [[_random_trig(rng, 1.0) for _ in range(3)] for _ in range(3)]
    chi = [[_random_trig(rng, 1.0) for _ in range(3)] for _ in range(3)]
    return StressPreset("smooth_random", sigma, chi)


def get_displacement_preset(name: str, seed: Optional[int] = None) -> DisplacementPreset:
    if name not in DISPLACEMENT_PRESETS:
        raise ConfigError(f"Unknown displacement preset '{name}', expected one of {sorted(DISPLACEMENT_PRESETS)}")
    return DISPLACEMENT_PRESETS[name](seed)


def get_configuration_preset(name: str, seed: Optional[int] = None) -> ConfigurationPreset:
    if name not in CONFIGURATION_PRESETS:
        raise ConfigError(f"Unknown configuration preset '{name}', expected one of {sorted(CONFIGURATION_PRESETS)}")
    return CONFIGURATION_PRESETS[name](seed)

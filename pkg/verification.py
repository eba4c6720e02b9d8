"""
Property suites behind the ``verify`` command.

Each check measures one quantity and compares it with a threshold. The
quick level uses fewer random samples and coarser grid sequences than the
full level; every random draw comes from one seeded generator.
"""

import logging
import time
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

import config
from errors import ConfigError
from compatibility import burgers_circuit, dislocation_loop, face_patch, finite_compatibility_residual, \
    impulse_defect_cochain, strain_incompatibility
from constitutive import MaterialConstants, build_stiffness, circle_cycle, cycle_work, \
    energy_gradient_check, material_symmetry_check
from forms import AnalyticForm, BodyGrid, COCHAIN, MotorForm, coboundary, complex_for, covariant_d, \
    covariant_d_star, dual_leibniz_residual, integrate
from kinematics import Configuration, apply_motion, finite_strain, linearization_check, moving_frames_strain
import lie_euclid
from mechanics import LoadState, balance_residual, covariant_balance, virtual_work_residual
from presets import get_configuration_preset, get_displacement_preset, random_polynomial_form, smooth_random_stress
from solver import mms_verify, reciprocity_defect

# Configure logging
logger = logging.getLogger(__name__)

CoadFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]

ISOTROPIC = MaterialConstants(lam=1.0, mu1=1.0, mu2=0.5, alpha=1.0, beta1=1.0, beta2=0.5)
HEMITROPIC = MaterialConstants(lam=1.0, mu1=1.0, mu2=0.5, alpha=1.0, beta1=1.0, beta2=0.5, c1=0.1, c2=0.2, c3=0.05)
ODD_COUPLING = (0, 4, 0.3)
ORDER_FLOOR = 1.8


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""

    def as_dict(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "passed": self.passed,
            "measured": self.measured,
            "threshold": self.threshold,
            "detail": self.detail,
        }


def observed_orders(sizes: Sequence[int], errors: Sequence[float]) -> List[float]:
    """log(e_i / e_(i+1)) / log(n_(i+1) / n_i) for successive refinements"""
    orders = []
    for i in range(1, len(sizes)):
        if errors[i] > 0.0 and errors[i - 1] > 0.0:
            orders.append(float(np.log(errors[i - 1] / errors[i]) / np.log(sizes[i] / sizes[i - 1])))
        else:
            orders.append(float("nan"))
    return orders


def _below(name: str, measured: float, threshold: float, detail: str = "") -> CheckResult:
    return CheckResult(name, bool(measured < threshold), float(measured), threshold, detail)


def _order_at_least(name: str, sizes: Sequence[int], errors: Sequence[float], floor: float = ORDER_FLOOR) -> CheckResult:
    order = observed_orders(sizes, errors)[-1]
    detail = ", ".join(f"n={n}: {e:.3e}" for n, e in zip(sizes, errors))
    return CheckResult(name, bool(order >= floor), order, floor, detail)


def _order_near(name: str, sizes: Sequence[int], errors: Sequence[float], target: float,
                band: float = 0.2) -> CheckResult:
    order = observed_orders(sizes, errors)[-1]
    detail = ", ".join(f"n={n}: {e:.3e}" for n, e in zip(sizes, errors))
    return CheckResult(name, bool(abs(order - target) <= band), order, target, detail + f" (band {band})")


def _random_motors(rng: np.random.Generator, samples: int, max_angle: float = 3.0) -> np.ndarray:
    direction = rng.standard_normal((samples, 3))
    direction /= np.linalg.norm(direction, axis=-1, keepdims=True)
    angle = rng.uniform(0.0, max_angle, size=(samples, 1))
    return np.concatenate([rng.standard_normal((samples, 3)), angle * direction], axis=-1)


def check_exp_log(rng: np.random.Generator, samples: int) -> CheckResult:
    w = _random_motors(rng, samples)
    x, S = lie_euclid.exp_parts(w)
    error = float(np.max(np.abs(lie_euclid.log_parts(x, S) - w)))
    return _below("exp_log_roundtrip", error, 1e-10, f"{samples} motors, angle < 3")


def check_coadjoint_duality(rng: np.random.Generator, samples: int,
                            coad: Optional[CoadFunction] = None) -> CheckResult:
    """<coad(w, mu), z> + <mu, [w, z]> vanishes for every triple"""
    coad = coad or lie_euclid.coadjoint
    w, z, mu = (rng.standard_normal((samples, 6)) for _ in range(3))
    expected = lie_euclid.pair(mu, lie_euclid.bracket(w, z))
    defect = np.abs(lie_euclid.pair(coad(w, mu), z) + expected) / (1.0 + np.abs(expected))
    return _below("coadjoint_duality", float(np.max(defect)), 1e-12, f"{samples} triples")


def check_coboundary_squared(rng: np.random.Generator) -> CheckResult:
    grid = BodyGrid((3, 4, 5), (0.25, 0.5, 0.125))
    cx = complex_for(grid)
    worst = 0.0
    for degree in (0, 1):
        a = MotorForm(degree, rng.integers(-5, 6, size=(cx.n_cells(degree), 6)).astype(float), grid, "motor", COCHAIN)
        worst = max(worst, coboundary(coboundary(a)).max_abs())
        worst = max(worst, covariant_d(covariant_d(a)).max_abs())
    return CheckResult("cochain_d_squared", worst == 0.0, worst, 0.0, "d^2 and D^2 on integer cochains")


def check_stokes(rng: np.random.Generator) -> CheckResult:
    grid = BodyGrid.unit_cube(8)
    a = MotorForm(1, rng.integers(-5, 6, size=(complex_for(grid).n_cells(1), 6)).astype(float), grid, "motor", COCHAIN)
    worst = 0.0
    for normal in range(3):
        loop, cap = face_patch(grid, normal, (1, 2, 3), (3, 4))
        worst = max(worst, float(np.max(np.abs(integrate(coboundary(a), cap) - integrate(a, loop)))))
    return CheckResult("discrete_stokes", worst == 0.0, worst, 0.0, "3x4 face patches, all normals")


def check_burgers_impulse() -> List[CheckResult]:
    grid = BodyGrid.unit_cube(8)
    burgers = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    e = impulse_defect_cochain(grid, burgers, (3, 3))
    small = burgers_circuit(e, *dislocation_loop(grid, (3, 3), 2, 0))
    large = burgers_circuit(e, *dislocation_loop(grid, (3, 3), 5, 2))
    return [
        CheckResult("burgers_equals_flux", small.defect == 0.0 and large.defect == 0.0,
                    max(small.defect, large.defect), 0.0, "impulse defect line"),
        CheckResult("burgers_equals_motor", bool(np.array_equal(small.circuit, burgers)),
                    float(np.max(np.abs(small.circuit - burgers))), 0.0, f"circuit {small.circuit.tolist()}"),
        CheckResult("burgers_homotopic_loops", bool(np.array_equal(small.circuit, large.circuit)),
                    float(np.max(np.abs(small.circuit - large.circuit))), 0.0, "radius 0 versus radius 2"),
    ]


def check_rigid_nullity(rng: np.random.Generator, count: int = 100) -> CheckResult:
    grid = BodyGrid.unit_cube(4)
    worst = 0.0
    for _ in range(count):
        cfg = Configuration.rigid(grid, lie_euclid.random_motion(rng))
        worst = max(worst, finite_strain(cfg).max_abs())
    return _below("rigid_strain_nullity", worst, 1e-10, f"{count} random rigid configurations")


def check_left_invariance(rng: np.random.Generator, seed: int, count: int = 10) -> CheckResult:
    cfg = get_configuration_preset("smooth_random", seed).configuration(BodyGrid.unit_cube(6))
    E = finite_strain(cfg)
    worst = 0.0
    for _ in range(count):
        moved = finite_strain(apply_motion(cfg, lie_euclid.random_motion(rng)))
        worst = max(worst, (moved - E).max_abs())
    return _below("left_invariance", worst, 1e-10, f"{count} random constant motions")


def check_linearization(seed: int) -> CheckResult:
    xi = get_displacement_preset("smooth_random", seed).field(BodyGrid.unit_cube(8))
    steps = [1e-2, 1e-3, 1e-4]
    defects = [linearization_check(xi, t) for t in steps]
    slope = float(np.log10(defects[0] / defects[-1]) / np.log10(steps[0] / steps[-1]))
    detail = ", ".join(f"t={t:.0e}: {d:.3e}" for t, d in zip(steps, defects))
    return CheckResult("linearization_slope", bool(abs(slope - 1.0) <= 0.1), slope, 1.0, detail + " (band 0.1)")


def check_moving_frames(seed: int, sizes: Sequence[int]) -> CheckResult:
    preset = get_configuration_preset("smooth_random", seed)
    errors = []
    for n in sizes:
        cfg = preset.configuration(BodyGrid.unit_cube(n))
        errors.append((moving_frames_strain(cfg) - finite_strain(cfg)).max_abs())
    return _order_at_least("moving_frames_agreement_order", sizes, errors)


def check_defect_order(seed: int, sizes: Sequence[int]) -> CheckResult:
    """D applied to the exact strain of a smooth displacement: the discrete D o D residual"""
    preset = get_displacement_preset("smooth_random", seed)
    errors = [strain_incompatibility(preset.strain_form().evaluate(BodyGrid.unit_cube(n))).max_abs()
              for n in sizes]
    return _order_at_least("strain_incompatibility_order", sizes, errors)


def _exact_dual_derivative(seed: int) -> AnalyticForm:
    """Exact D* alpha of a smooth comotor 0-form alpha = (f, m): slot a is (d_a f, d_a m + e_a x f)"""
    preset = get_displacement_preset("smooth_random", seed)

    def slot(a: int) -> Callable[[np.ndarray], np.ndarray]:
        def evaluate(points: np.ndarray) -> np.ndarray:
            out = preset.gradient(points)[..., a, :].copy()
            out[..., 3:] += np.cross(np.eye(3)[a], preset.values(points)[..., :3])
            return out
        return evaluate

    return AnalyticForm(1, [slot(a) for a in range(3)], "comotor")


def check_dual_flatness(seed: int, sizes: Sequence[int]) -> CheckResult:
    exact = _exact_dual_derivative(seed)
    errors = [covariant_d_star(exact.evaluate(BodyGrid.unit_cube(n))).max_abs() for n in sizes]
    return _order_at_least("dual_d_squared_order", sizes, errors)


def check_dual_leibniz(seed: int, sizes: Sequence[int]) -> CheckResult:
    """Quadratic comotor 1-form against an affine motor 1-form, so the residual is exactly O(h^2)"""
    Pi = random_polynomial_form(1, 2, seed, "comotor").analytic()
    xi = random_polynomial_form(1, 1, seed + 1).analytic()
    errors = []
    for n in sizes:
        grid = BodyGrid.unit_cube(n)
        errors.append(dual_leibniz_residual(Pi.evaluate(grid), xi.evaluate(grid)).max_abs())
    return _order_near("dual_leibniz_order", sizes, errors, 2.0)


def check_finite_compatibility(seed: int, sizes: Sequence[int]) -> CheckResult:
    preset = get_configuration_preset("smooth_random", seed)
    errors = [finite_compatibility_residual(finite_strain(preset.configuration(BodyGrid.unit_cube(n))))
              for n in sizes]
    return _order_at_least("finite_compatibility_order", sizes, errors)


def check_balance(seed: int, sizes: Sequence[int]) -> List[CheckResult]:
    preset = smooth_random_stress(seed)
    agreement = 0.0
    errors = []
    for n in sizes:
        grid = BodyGrid.unit_cube(n)
        S, L = preset.stress(grid), preset.loads(grid)
        force, moment = balance_residual(S, L)
        force_form, moment_form = covariant_balance(S, L)
        agreement = max(agreement, float(np.max(np.abs(force - force_form))), float(np.max(np.abs(moment - moment_form))))
        errors.append(float(max(np.max(np.abs(force)), np.max(np.abs(moment)))))
    return [
        _below("balance_forms_agree", agreement, 1e-10, "component balance versus D* Sigma + F"),
        _order_at_least("balance_residual_order", sizes, errors),
    ]


def check_virtual_work(seed: int, sizes: Sequence[int], fields: int = 20) -> CheckResult:
    preset = smooth_random_stress(seed)
    virtual = [get_displacement_preset("smooth_random", seed + 1 + i) for i in range(fields)]
    # one level finer: the 8 -> 16 pair is still pre-asymptotic
    refined = [2 * n for n in sizes]
    errors = []
    for n in refined:
        grid = BodyGrid.unit_cube(n)
        S, L = preset.stress(grid), preset.loads(grid)
        errors.append(max(abs(virtual_work_residual(S, L, xi.field(grid))) for xi in virtual))
    return _order_at_least("virtual_work_order", refined, errors)


def check_constitutive(rng: np.random.Generator, samples: int) -> List[CheckResult]:
    isotropic = build_stiffness(ISOTROPIC, "isotropic")
    hemitropic = build_stiffness(HEMITROPIC, "hemitropic")
    odd = build_stiffness(replace(ISOTROPIC, odd_couplings=[ODD_COUPLING]), "odd")

    gradient = max(energy_gradient_check(hemitropic, rng.standard_normal((samples, 18))),
                   energy_gradient_check(isotropic, rng.standard_normal((samples, 18))))

    radius = 0.5
    slot_a, slot_b, _ = ODD_COUPLING
    work = cycle_work(odd, circle_cycle(slot_a, slot_b, radius, config.CYCLE_STEPS))
    expected = np.pi * radius ** 2 * (odd.C[slot_b, slot_a] - odd.C[slot_a, slot_b])
    symmetric_work = abs(cycle_work(isotropic, circle_cycle(slot_a, slot_b, radius, config.CYCLE_STEPS)))

    rotations = [lie_euclid.random_rotation(rng, proper=bool(i % 2)) for i in range(10)]
    invariance = max(material_symmetry_check(isotropic, R, 20, rng) for R in rotations)
    proper = max(material_symmetry_check(hemitropic, R, 20, rng) for R in rotations[1::2])
    improper = min(material_symmetry_check(hemitropic, R, 20, rng) for R in rotations[0::2])

    return [
        _below("energy_gradient", gradient, 1e-6, "central differences of the stored energy"),
        _below("odd_cycle_work", abs(work - expected) / abs(expected), 1e-4,
               f"work {work:.8f}, expected {expected:.8f}"),
        _below("symmetric_cycle_work", symmetric_work, 1e-12, "hyperelastic cycle"),
        _below("isotropic_invariance", invariance, 1e-10, "proper and improper rotations"),
        _below("hemitropic_proper_invariance", proper, 1e-10, "proper rotations"),
        CheckResult("hemitropic_chirality", bool(improper > 1e-6), improper, 1e-6, "improper rotations break it"),
    ]


def check_mms(sizes: Sequence[int]) -> List[CheckResult]:
    preset = get_displacement_preset("mms_full")
    results = []
    for name, constants in (("isotropic", ISOTROPIC), ("hemitropic", HEMITROPIC)):
        report = mms_verify(build_stiffness(constants, name), preset, sizes)
        results.append(_order_near(f"mms_order_{name}", report.sizes, report.errors, 2.0))
    return results


def check_reciprocity(rng: np.random.Generator) -> CheckResult:
    grid = BodyGrid.unit_cube(5)
    C = build_stiffness(HEMITROPIC, "hemitropic")
    shape = grid.vertex_shape + (3,)
    loads = [LoadState(grid, rng.standard_normal(shape), rng.standard_normal(shape)) for _ in range(2)]
    return _below("reciprocity", reciprocity_defect(C, grid, *loads), 1e-8, "hemitropic material, zero boundary data")


def run_suite(level: str = "quick", seed: Optional[int] = None, coad: Optional[CoadFunction] = None,
              samples: Optional[int] = None, grids: Optional[Sequence[int]] = None) -> List[CheckResult]:
    """
    Run every property check

    Args:
        level: 'quick' or 'full'; selects sample counts and grid sequences
        seed: Seed of the random generator, defaults to config.SEED
        coad: Alternative coadjoint action for the duality check
        samples: Overrides the level's random sample count
        grids: Overrides the level's grid sequence
    """
    if level not in ("quick", "full"):
        raise ConfigError(f"Unknown verification level '{level}'")
    seed = config.SEED if seed is None else seed
    samples = samples or (config.QUICK_SAMPLES if level == "quick" else config.FULL_SAMPLES)
    sizes = list(grids or (config.QUICK_GRIDS if level == "quick" else config.FULL_GRIDS))
    rng = np.random.default_rng(seed)
    logger.info(f"Verification level {level}: {samples} samples, grids {sizes}, seed {seed}")

    suites = [
        lambda: [check_exp_log(rng, samples)],
        lambda: [check_coadjoint_duality(rng, samples, coad)],
        lambda: [check_coboundary_squared(rng)],
        lambda: [check_stokes(rng)],
        check_burgers_impulse,
        lambda: [check_rigid_nullity(rng)],
        lambda: [check_left_invariance(rng, seed)],
        lambda: [check_linearization(seed)],
        lambda: [check_moving_frames(seed, sizes)],
        lambda: [check_defect_order(seed, sizes)],
        lambda: [check_dual_flatness(seed, sizes)],
        lambda: [check_dual_leibniz(seed, sizes)],
        lambda: [check_finite_compatibility(seed, sizes)],
        lambda: check_balance(seed, sizes),
        lambda: [check_virtual_work(seed, sizes)],
        lambda: check_constitutive(rng, min(samples, 100)),
        lambda: check_mms(sizes),
        lambda: [check_reciprocity(rng)],
    ]
    results: List[CheckResult] = []
    for suite in suites:
        start = time.perf_counter()
        for result in suite():
            status = "PASS" if result.passed else "FAIL"
            logger.info(f"{status} {result.name}: measured {result.measured:.3e}, threshold {result.threshold:.3e}")
            results.append(result)
        logger.debug(f"Suite finished in {time.perf_counter() - start:.2f} s")
    return results

import json
import logging

import numpy as np
import pytest

import lie_euclid
from constitutive import (MaterialConstants, StiffnessOperator, apply_law, build_stiffness,
                          centrosymmetric_projection, circle_cycle, cycle_work, energy_gradient_check,
                          load_material, material_from_dict, material_symmetry_check, pack, stored_energy,
                          transform_strain)
from errors import ConfigError, ValidationError
from forms import BodyGrid
from kinematics import StrainState

# Configure logging
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=logging.DEBUG
)
logger = logging.getLogger(__name__)

ISOTROPIC = MaterialConstants(lam=1.0, mu1=1.0, mu2=0.5, alpha=1.0, beta1=1.0, beta2=0.5)
HEMITROPIC = MaterialConstants(lam=1.0, mu1=1.0, mu2=0.5, alpha=1.0, beta1=1.0, beta2=0.5, c1=0.1, c2=0.2, c3=0.05)


def odd_material(k: float = 0.3) -> StiffnessOperator:
    constants = MaterialConstants(**{name: getattr(ISOTROPIC, name)
                                     for name in ("lam", "mu1", "mu2", "alpha", "beta1", "beta2")})
    constants.odd_couplings = [(0, 4, k)]
    return build_stiffness(constants, "odd")


def test_isotropic_law():
    rng = np.random.default_rng(31)
    eps, tau = rng.standard_normal((2, 3, 3))
    grid = BodyGrid((2, 2, 2))
    S = apply_law(build_stiffness(ISOTROPIC, "isotropic"), StrainState(grid, eps, tau))
    sigma = np.trace(eps) * np.eye(3) + eps + 0.5 * eps.T
    chi = np.trace(tau) * np.eye(3) + tau + 0.5 * tau.T
    np.testing.assert_allclose(S.sigma[0, 0, 0], sigma, atol=1e-14)
    np.testing.assert_allclose(S.chi[1, 2, 0], chi, atol=1e-14)


def test_positive_definiteness_margin():
    C = build_stiffness(ISOTROPIC, "isotropic")
    assert C.hyperelastic and C.positive_definite
    soft = build_stiffness(MaterialConstants(lam=-10.0, mu1=1.0, mu2=0.5, alpha=1.0, beta1=1.0, beta2=0.5),
                           "isotropic")
    assert soft.pd_margin < 0.0 and not soft.positive_definite


def test_anisotropic_needs_matrix():
    with pytest.raises(ValidationError):
        build_stiffness(MaterialConstants(), "anisotropic")
    C = build_stiffness(MaterialConstants(matrix=2.0 * np.eye(18)), "anisotropic")
    assert C.pd_margin == pytest.approx(2.0)
    with pytest.raises(ValidationError):
        StiffnessOperator(np.eye(17))


def test_odd_couplings_only_for_odd_class():
    constants = MaterialConstants(lam=1.0, mu1=1.0, odd_couplings=[(0, 4, 0.3)])
    with pytest.raises(ValidationError):
        build_stiffness(constants, "isotropic")
    with pytest.raises(ValidationError):
        build_stiffness(MaterialConstants(lam=1.0), "odd")
    with pytest.raises(ValidationError):
        build_stiffness(MaterialConstants(lam=1.0, odd_couplings=[(3, 3, 1.0)]), "odd")


def test_odd_cycle_work():
    """A circle of radius r in the coupled plane produces work -2 pi k r^2"""
    k, radius = 0.3, 0.5
    C = odd_material(k)
    assert not C.hyperelastic
    work = cycle_work(C, circle_cycle(0, 4, radius, 1000))
    expected = -2.0 * np.pi * k * radius ** 2
    logger.info(f"Odd cycle work {work:.8f}, expected {expected:.8f}")
    assert abs(work - expected) / abs(expected) < 1e-4


def test_symmetric_cycle_work_vanishes():
    C = build_stiffness(HEMITROPIC, "hemitropic")
    assert abs(cycle_work(C, circle_cycle(0, 4, 0.5, 1000))) < 1e-12
    assert abs(cycle_work(C, circle_cycle(2, 13, 2.0, 64))) < 1e-12


def test_open_cycle_is_rejected():
    path = circle_cycle(0, 4, 1.0, 10)
    with pytest.raises(ValidationError):
        cycle_work(build_stiffness(ISOTROPIC, "isotropic"), path[:-1])


def test_stored_energy_requires_major_symmetry():
    grid = BodyGrid((2, 2, 2))
    e = StrainState(grid, np.eye(3), np.zeros((3, 3)))
    energy = stored_energy(build_stiffness(ISOTROPIC, "isotropic"), e)
    # 1/2 (lam * 9 + mu1 * 3 + mu2 * 3)
    np.testing.assert_allclose(energy, 0.5 * (9.0 + 3.0 + 1.5))
    with pytest.raises(ValidationError):
        stored_energy(odd_material(), e)


def test_energy_gradient_check():
    rng = np.random.default_rng(32)
    E = rng.standard_normal((50, 18))
    assert energy_gradient_check(build_stiffness(HEMITROPIC, "hemitropic"), E) < 1e-6
    assert energy_gradient_check(odd_material(), E) > 1e-2


def test_isotropic_invariance_and_hemitropic_chirality():
    rng = np.random.default_rng(33)
    isotropic = build_stiffness(ISOTROPIC, "isotropic")
    hemitropic = build_stiffness(HEMITROPIC, "hemitropic")
    for _ in range(5):
        R = lie_euclid.random_rotation(rng)
        assert material_symmetry_check(isotropic, R, 20, rng) < 1e-10
        assert material_symmetry_check(isotropic, -R, 20, rng) < 1e-10
        assert material_symmetry_check(hemitropic, R, 20, rng) < 1e-10
        assert material_symmetry_check(hemitropic, -R, 20, rng) > 1e-6
    with pytest.raises(ValidationError):
        material_symmetry_check(isotropic, 2.0 * np.eye(3))


def test_centrosymmetric_projection():
    projected = centrosymmetric_projection(build_stiffness(HEMITROPIC, "hemitropic"))
    np.testing.assert_array_equal(projected.C, build_stiffness(ISOTROPIC, "isotropic").C)
    assert projected.symmetry == "centrosymmetric"


def test_transform_strain_by_inversion():
    rng = np.random.default_rng(34)
    eps, tau = rng.standard_normal((2, 3, 3))
    np.testing.assert_allclose(transform_strain(pack(eps, tau), -np.eye(3)), pack(eps, -tau), atol=1e-15)


def test_material_from_dict():
    C = material_from_dict({"class": "hemitropic", "constants": {"lam": 1, "mu1": 1, "mu2": 0.5, "alpha": 1,
                                                                "beta1": 1, "beta2": 0.5, "c1": 0.1, "c2": 0.2,
                                                                "c3": 0.05}})
    np.testing.assert_array_equal(C.C, build_stiffness(HEMITROPIC, "hemitropic").C)
    odd = material_from_dict({"class": "odd", "constants": {"lam": 1, "mu1": 1}, "couplings": [[0, 4, 0.3]]})
    assert odd.C[0, 4] - odd.C[4, 0] == pytest.approx(0.6)
    for bad in ({"class": "isotropic", "density": 2},
                {"class": "granite"},
                {"class": "isotropic", "constants": {"nu": 0.3}},
                {"class": "isotropic", "constants": {"lam": "stiff"}},
                {"class": "anisotropic"},
                ["isotropic"]):
        with pytest.raises(ConfigError):
            material_from_dict(bad)


def test_load_material(tmp_path):
    path = tmp_path / "material.json"
    path.write_text(json.dumps({"class": "isotropic", "constants": {"lam": 1, "mu1": 1, "mu2": 0.5}}))
    assert load_material(str(path)).symmetry == "isotropic"
    with pytest.raises(ConfigError):
        load_material(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ConfigError):
        load_material(str(broken))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])

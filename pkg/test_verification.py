import logging
import math

import numpy as np
import pytest

import lie_euclid
from errors import ConfigError
from verification import (CheckResult, check_burgers_impulse, check_coadjoint_duality, check_coboundary_squared,
                          check_dual_leibniz, check_exp_log, check_rigid_nullity, check_stokes, observed_orders,
                          run_suite)

# Configure logging
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=logging.DEBUG
)
logger = logging.getLogger(__name__)


def test_observed_orders():
    assert observed_orders([4, 8, 16], [1.0, 0.25, 0.0625]) == pytest.approx([2.0, 2.0])
    assert observed_orders([4, 8], [1.0, 0.5]) == pytest.approx([1.0])
    assert math.isnan(observed_orders([4, 8], [1.0, 0.0])[0])


def test_check_result_as_dict():
    result = CheckResult("stokes", True, 0.0, 0.0, "patches")
    assert result.as_dict() == {"name": "stokes", "passed": True, "measured": 0.0, "threshold": 0.0,
                                "detail": "patches"}


def test_coadjoint_duality_detects_wrong_action():
    assert check_coadjoint_duality(np.random.default_rng(1), 50).passed

    def negated(w, mu):
        return -lie_euclid.coadjoint(w, mu)

    result = check_coadjoint_duality(np.random.default_rng(1), 50, negated)
    assert not result.passed
    assert result.measured > 1e-3


def test_exact_checks_pass():
    rng = np.random.default_rng(2)
    for result in (check_exp_log(rng, 200), check_coboundary_squared(rng), check_stokes(rng),
                   check_rigid_nullity(rng, 5)):
        logger.info(f"{result.name}: {result.measured:.3e}")
        assert result.passed, result.name


def test_burgers_impulse_checks():
    results = check_burgers_impulse()
    assert [r.name for r in results] == ["burgers_equals_flux", "burgers_equals_motor", "burgers_homotopic_loops"]
    assert all(r.passed for r in results)


def test_dual_leibniz_order_is_two():
    result = check_dual_leibniz(3, [8, 16])
    assert result.passed, result.detail
    assert result.measured == pytest.approx(2.0, abs=0.05)


def test_quick_suite_passes():
    results = run_suite("quick")
    failed = [f"{r.name} ({r.measured:.3e} vs {r.threshold:.3e})" for r in results if not r.passed]
    assert not failed, f"failed checks: {', '.join(failed)}"
    assert {"virtual_work_order", "dual_leibniz_order"} <= {r.name for r in results}


def test_unknown_level_is_rejected():
    with pytest.raises(ConfigError):
        run_suite("exhaustive")


if __name__ == "__main__":
    pytest.main([__file__, "-v"])

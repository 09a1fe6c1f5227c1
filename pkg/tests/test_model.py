import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cdma_ra.errors import ConfigError
from cdma_ra.model import (
    PowerClass,
    PowerProfile,
    SystemConfig,
    limit_loaded_power_cdf,
    power_from_snr_db,
    profile_moments,
    require_valid,
    traffic_load,
    validate_profile,
)

from conftest import two_class, single_class


def test_validate_single_class_ok():
    assert validate_profile(single_class()) == []


def test_validate_duplicate_power():
    prof = PowerProfile((PowerClass(10, 0.5, 1), PowerClass(10, 0.5, 1)))
    problems = validate_profile(prof)
    assert len(problems) == 1 and "duplicate" in problems[0]


def test_validate_fraction_sum():
    prof = PowerProfile((PowerClass(10, 0.6, 1), PowerClass(1000, 0.6, 1)))
    problems = validate_profile(prof)
    assert len(problems) == 1 and "1.2" in problems[0]


def test_validate_collects_every_problem():
    prof = PowerProfile((PowerClass(1000, 0.5, 1.5), PowerClass(10, 0.0, -0.1, arrival_rate=1.0)))
    problems = validate_profile(prof)
    assert any("tx_prob" in p for p in problems)
    assert any("classes[1].fraction" in p for p in problems)
    assert any("arrival_rate" in p for p in problems)
    assert any("not greater" in p for p in problems)
    with pytest.raises(ConfigError):
        require_valid(prof)


def test_validate_admits_zero_tx_prob():
    assert validate_profile(two_class((0.0, 1.0))) == []


def test_system_config_rejects_bad_values():
    with pytest.raises(ConfigError):
        SystemConfig(alpha=0)
    with pytest.raises(ConfigError):
        SystemConfig(alpha=1, noise_var=-1)


def test_snr_db_conversion():
    assert power_from_snr_db(10, 1.0) == pytest.approx(10.0, rel=1e-15)
    assert power_from_snr_db(30, 1.0) == pytest.approx(1000.0, rel=1e-15)
    assert power_from_snr_db(0, 2.5) == 2.5


def test_profile_moments_full_access():
    m1, m2 = profile_moments(two_class())
    assert m1 == pytest.approx(1.0, abs=1e-15)
    assert m2 == pytest.approx(100.0, rel=1e-14)


def test_profile_moments_partial_access():
    m1, m2 = profile_moments(two_class((1.0, 0.0)))
    assert m1 == pytest.approx(10 / 11, rel=1e-14)
    assert m2 == pytest.approx(100 / 11, rel=1e-14)


def test_profile_moments_zero_mac():
    assert profile_moments(two_class((0.0, 0.0))) == (0.0, 0.0)


def test_traffic_load_examples():
    assert traffic_load(0.95, two_class()) == pytest.approx(0.95, rel=1e-15)
    assert traffic_load(0.95, two_class((0.65, 1.0))) == pytest.approx(0.95 * (0.65 * 10 / 11 + 1 / 11), rel=1e-14)
    assert traffic_load(0.95, two_class((0.65, 1.0))) == pytest.approx(0.64773, abs=1e-5)
    assert traffic_load(2.0, single_class(theta=0.5)) == 1.0


def test_loaded_power_cdf_examples():
    prof = two_class((0.5, 1.0))
    assert limit_loaded_power_cdf(prof, 0.0) == pytest.approx(1 - (0.5 * 10 / 11 + 1 / 11), abs=1e-15)
    assert limit_loaded_power_cdf(prof, 0.0) == pytest.approx(0.45455, abs=1e-5)
    assert limit_loaded_power_cdf(prof, 10.0) == pytest.approx(0.90909, abs=1e-5)
    assert limit_loaded_power_cdf(prof, 1000.0) == 1.0
    assert limit_loaded_power_cdf(prof, 5.0) == limit_loaded_power_cdf(prof, 0.0)


def test_loaded_power_cdf_full_access_is_f():
    prof = two_class()
    xs = np.array([0.0, 9.99, 10.0, 500.0, 1000.0, 1e6])
    f = np.array([0.0, 0.0, 10 / 11, 10 / 11, 1.0, 1.0])
    np.testing.assert_allclose(limit_loaded_power_cdf(prof, xs), f, atol=1e-15)


def test_loaded_power_cdf_silent_system():
    prof = two_class((0.0, 0.0))
    assert np.all(limit_loaded_power_cdf(prof, np.array([0.0, 10.0, 1e9])) == 1.0)


def test_loaded_power_cdf_domain():
    with pytest.raises(ValueError):
        limit_loaded_power_cdf(two_class(), -1.0)


@st.composite
def profiles(draw, max_classes=5):
    m = draw(st.integers(1, max_classes))
    powers = sorted(draw(st.lists(st.floats(0.01, 1e4), min_size=m, max_size=m, unique=True)))
    weights = draw(st.lists(st.floats(0.05, 1.0), min_size=m, max_size=m))
    total = math.fsum(weights)
    fractions = [w / total for w in weights]
    fractions[-1] = 1.0 - math.fsum(fractions[:-1])
    thetas = draw(st.lists(st.floats(0.0, 1.0), min_size=m, max_size=m))
    return PowerProfile.from_arrays(powers, fractions, thetas)


@given(profiles(), st.lists(st.floats(0.0, 2e4), min_size=2, max_size=20))
def test_loaded_power_cdf_is_monotone_cdf(prof, xs):
    xs = np.sort(np.array(xs))
    h = limit_loaded_power_cdf(prof, xs)
    assert np.all(np.diff(h) >= -1e-15)
    assert np.all((h >= -1e-12) & (h <= 1.0))
    assert limit_loaded_power_cdf(prof, float(prof.powers[-1])) == 1.0
    assert limit_loaded_power_cdf(prof, 0.0) == pytest.approx(1 - profile_moments(prof)[0], abs=1e-12)


@given(profiles(), st.floats(0.0, 1.0))
def test_moments_linear_in_theta(prof, c):
    scaled = prof.with_tx_probs(c * prof.tx_probs)
    m1, m2 = profile_moments(prof)
    s1, s2 = profile_moments(scaled)
    assert s1 == pytest.approx(c * m1, rel=1e-12, abs=1e-15)
    assert s2 == pytest.approx(c * m2, rel=1e-12, abs=1e-12)


@given(profiles(), st.floats(0.01, 10.0))
def test_traffic_load_is_alpha_times_mean_theta(prof, alpha):
    assert traffic_load(alpha, prof) == alpha * profile_moments(prof)[0]

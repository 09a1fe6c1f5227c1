import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from cdma_ra.asymptotic import link_capacity
from cdma_ra.errors import ConfigError, ModelDomainError, ResourceError
from cdma_ra.mac_opt import (
    SweepRow,
    evaluate_mac,
    golden_section_max,
    grid_argmax,
    grid_values,
    optimize_mac,
    sweep_grid,
)
from cdma_ra.model import PowerProfile, Receiver, SystemConfig

from conftest import single_class, two_class
from test_asymptotic import C_DEC_OPT, C_MF_OPT, C_MMSE_TWO_CLASS


def cfg(receiver, alpha=0.95, sigma2=1.0):
    return SystemConfig(alpha, sigma2, receiver)


def test_evaluate_mac_examples():
    prof = two_class()
    assert evaluate_mac(cfg(Receiver.MMSE), prof, (1, 1))[0] == pytest.approx(C_MMSE_TWO_CLASS, abs=1e-12)
    assert evaluate_mac(cfg(Receiver.MF), prof, (1, 0))[0] == pytest.approx(C_MF_OPT, abs=1e-12)
    for r in Receiver:
        assert evaluate_mac(cfg(r), prof, (0, 0))[0] == 0.0


def test_evaluate_mac_infeasible_decorrelator():
    with pytest.raises(ModelDomainError):
        evaluate_mac(cfg(Receiver.DECORRELATOR, alpha=2.0), two_class(), (1, 1))


def test_evaluate_mac_rejects_out_of_range():
    with pytest.raises(ConfigError):
        evaluate_mac(cfg(Receiver.MF), two_class(), (1.2, 0))


def test_grid_values():
    assert grid_values(0.05)[13] == 0.65
    assert len(grid_values(0.05)) == 21
    with pytest.raises(ConfigError):
        grid_values(0.3)


@pytest.mark.parametrize("receiver,argmax", [
    (Receiver.MMSE, (1.0, 1.0)),
    (Receiver.DECORRELATOR, (0.65, 1.0)),
    (Receiver.MF, (1.0, 0.0)),
])
def test_sweep_grid_two_class(receiver, argmax):
    rows = sweep_grid(cfg(receiver), two_class(), 0.05)
    assert len(rows) == 441
    assert [r.thetas for r in rows] == sorted(r.thetas for r in rows)
    assert grid_argmax(rows).thetas == argmax


def test_sweep_marks_infeasible():
    rows = sweep_grid(cfg(Receiver.DECORRELATOR, alpha=2.0), two_class(), 0.25)
    bad = [r for r in rows if not r.feasible]
    assert bad and all(math.isnan(r.eta) and r.c == -math.inf for r in bad)
    assert all(r.load > 1 for r in bad)


def test_sweep_refuses_huge_grid():
    big = PowerProfile.from_arrays(np.arange(1, 9) * 1.0, [1 / 8] * 8)
    with pytest.raises(ResourceError):
        sweep_grid(cfg(Receiver.MF), big, 0.1)


def test_grid_argmax_tie_prefers_largest():
    rows = [SweepRow((0.0, 1.0), 1.0, 0.5, 2.0), SweepRow((1.0, 0.0), 1.0, 0.5, 2.0),
            SweepRow((0.5, 0.5), 1.0, 0.5, 1.0)]
    assert grid_argmax(rows).thetas == (1.0, 0.0)


def test_grid_argmax_all_infeasible():
    with pytest.raises(ModelDomainError):
        grid_argmax(sweep_grid(cfg(Receiver.DECORRELATOR, alpha=50.0), two_class(), 0.5)[1:])


def test_golden_section_on_parabola():
    x, fx, n = golden_section_max(lambda x: -(x - 0.3) ** 2, 0.0, 1.0, 1e-8)
    assert x == pytest.approx(0.3, abs=1e-8)
    assert n < 60


def test_optimize_mf():
    res = optimize_mac(cfg(Receiver.MF), two_class())
    assert res.theta_star == pytest.approx((1.0, 0.0), abs=1e-6)
    assert res.c_star == pytest.approx(0.443, abs=5e-4)


def test_optimize_decorrelator():
    res = optimize_mac(cfg(Receiver.DECORRELATOR), two_class())
    assert res.theta_star[0] == pytest.approx(0.65, abs=0.02)
    assert res.theta_star[1] == pytest.approx(1.0, abs=1e-6)
    assert res.c_star == pytest.approx(0.977, abs=5e-4)
    # interior optimum: scan oracle from hand evaluations
    scan = [evaluate_mac(cfg(Receiver.DECORRELATOR), two_class(), (t, 1))[0] for t in (0.60, 0.65, 0.70)]
    assert scan == pytest.approx([0.971, 0.977, 0.972], abs=5e-4)
    assert scan[1] > max(scan[0], scan[2])


def test_optimize_single_class_mmse_full_access():
    c = cfg(Receiver.MMSE)
    res = optimize_mac(c, single_class(10.0))
    assert res.theta_star == (1.0,)
    scan = [evaluate_mac(c, single_class(10.0), (t,))[0] for t in np.linspace(0, 1, 201)]
    assert np.all(np.diff(scan) > 0)


@pytest.mark.parametrize("receiver", list(Receiver))
def test_optimize_beats_fine_grid(receiver):
    c = cfg(receiver)
    res = optimize_mac(c, two_class())
    best = grid_argmax(sweep_grid(c, two_class(), 0.05))
    assert res.c_star >= best.c - 1e-9
    assert res.c_star == pytest.approx(evaluate_mac(c, two_class(), res.theta_star)[0], abs=1e-12)
    assert all(res.c_star >= c_i for _, c_i in res.trace)
    cs = [c_i for _, c_i in res.trace]
    assert cs == sorted(cs)


def test_optimize_three_class_decorrelator_respects_feasibility():
    prof = PowerProfile.from_arrays([1.0, 10.0, 100.0], [0.5, 0.3, 0.2])
    c = cfg(Receiver.DECORRELATOR, alpha=1.6)
    res = optimize_mac(c, prof)
    assert c.alpha * float(np.dot(prof.fractions, res.theta_star)) <= 1.0 + 1e-12
    assert res.c_star >= grid_argmax(sweep_grid(c, prof, 0.05)).c - 1e-9


@settings(max_examples=60, deadline=None)
@given(st.floats(0.1, 2.0), st.floats(0.05, 1.0), st.floats(1.0, 2.0), st.sampled_from(list(Receiver)))
def test_alpha_theta_scale_invariance(alpha, theta, gamma, receiver):
    # MAC shared by all classes: alpha and theta only enter as their product
    assume(theta * gamma <= 1.0)
    prof = two_class()
    base = cfg(receiver, alpha=alpha * gamma)
    scaled = cfg(receiver, alpha=alpha)
    assume(receiver is not Receiver.DECORRELATOR or alpha * gamma * theta <= 1.0)
    c1, e1 = evaluate_mac(base, prof, (theta, theta))
    c2, e2 = evaluate_mac(scaled, prof, (theta * gamma, theta * gamma))
    assert c1 == pytest.approx(c2, abs=1e-12)
    assert e1 == pytest.approx(e2, abs=1e-12)


def test_high_sir_mac_beats_power_control():
    p, eta, theta = 1000.0, 0.3, 0.4
    t = link_capacity(p, theta, eta)
    assert link_capacity(p, 2 * theta, eta) == pytest.approx(2 * t, rel=1e-15)
    assert link_capacity(2 * p, theta, eta) / t < 1.15

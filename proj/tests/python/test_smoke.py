import math

import numpy as np
import pytest

import phasered


def test_radial_cycle_and_sensitivity():
    m = phasered.make_model("radial")
    c = phasered.find_limit_cycle(m, [1.2, 0.1])
    assert c.period == pytest.approx(2 * math.pi, abs=1e-8)
    assert c.floquet == pytest.approx(-2.0, abs=1e-4)
    assert c.points.shape == (256, 2)
    Z = phasered.phase_sensitivity(m, c)
    theta = np.asarray(Z.grid)
    ref = np.stack([-np.sin(theta), np.cos(theta)], axis=1)
    assert np.max(np.abs(Z.Z - ref)) < 1e-6
    assert phasered.normalization_error(m, c, Z) < 1e-10


def test_spiral_phase_and_isochron():
    m = phasered.make_model("spiral")
    c = phasered.find_limit_cycle(m, [1.0, 0.0])
    x = np.array([0.5 * math.cos(1.0), 0.5 * math.sin(1.0)])
    expected = (1.0 + math.log(0.5)) % (2 * math.pi)
    assert phasered.asymptotic_phase(m, c, x) == pytest.approx(expected, abs=1e-7)
    iso = phasered.compute_isochron(m, c, 0.5, (0.4, 1.6), 8)
    pts = iso.points
    r = np.hypot(pts[:, 0], pts[:, 1])
    err = np.angle(np.exp(1j * (np.arctan2(pts[:, 1], pts[:, 0]) + np.log(r) - 0.5)))
    assert np.max(np.abs(err)) < 1e-6


def test_forced_average_and_locking():
    m = phasered.make_model("radial")
    c = phasered.find_limit_cycle(m, [1.1, 0.0])
    Z = phasered.phase_sensitivity(m, c)
    q = phasered.average_periodic(Z, c, 0, 0.05, 1.0, 1.0)
    assert q(0.0) == pytest.approx(-0.5, abs=1e-8)
    assert q.provenance == "periodic_average"
    k = phasered.CouplingFunction.from_function(lambda p: -math.sin(p))
    res = phasered.lock_analysis(0.025, 0.05, k)
    stable = [fp.psi for fp in res.fixed_points if fp.stable]
    assert res.locked and stable == [pytest.approx(math.asin(0.5), abs=1e-9)]


def test_prescribed_pair_coupling_vanishes():
    sl = [phasered.make_model("stuart_landau", {"omega": w, "c2": 1.0}) for w in (1.99, 2.01)]
    pm = phasered.build_phase_model(
        sl, 0.05, [[(0, 0, 0), (1, 0, 0)], [(1, 0, 0), (0, 0, 0)]],
        coupling="direct", prescribed_z=["imaginary_exp", "imaginary_exp"])
    assert pm.max_abs_q() < 1e-10
    assert pm.adjoint_max_q > 1.0
    assert pm.q(0, 0) is None


def test_diagnostics():
    t = np.arange(0.0, 1000.0, 0.5)
    rep = phasered.sync_measure(list(t), list(0.02 * t), 1e-3)
    assert rep.S == pytest.approx(0.02, rel=1e-6)
    assert not rep.locked
    fit = phasered.scaling_fit([(0.01, 0.1), (0.04, 0.2), (0.16, 0.4)])
    assert fit.exponent == pytest.approx(0.5, abs=1e-9)
    ratio = phasered.order_ratio(0.0, 0.02)
    assert ratio.first_order_vanishing


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        phasered.make_model("lorenz")
    with pytest.raises(ValueError):
        phasered.scaling_fit([(0.1, 0.2)])
    assert issubclass(phasered.ConvergenceError, RuntimeError)

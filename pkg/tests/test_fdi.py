import numpy as np
import pytest

from ftcontrol.controller import BeliefState, PrecisionSet
from ftcontrol.errors import CalibrationError
from ftcontrol.fdi import (HEALTHY, DeadReckoner, FaultIsolator, FaultVerdict,
                           calibrate, compute_residual, detect, load_monitor,
                           mahalanobis, recover, save_monitor)
from ftcontrol.sensors import SensorBundle


def make_monitor(dim=2, scale=1.0, alpha=0.05, seed=0, n_samples=5000):
    rng = np.random.default_rng(seed)
    return calibrate(rng.normal(0.0, scale, (n_samples, dim)), alpha)


def test_residual_is_observation_minus_belief():
    belief = BeliefState(mu=np.array([0.1, 0.2]), mu_prime=np.array([0.3, 0.4]),
                         mu_u=np.zeros(2))
    obs = SensorBundle(y_q=np.array([0.15, 0.1]), y_qdot=np.array([0.3, 0.5]),
                       y_v=np.array([1.0, -1.0]))
    g_v = np.array([0.9, -1.1])
    r_p, r_v = compute_residual(obs, belief, None, g_v=g_v)
    np.testing.assert_allclose(r_p, [0.05, -0.1, 0.0, 0.1], atol=1e-15)
    np.testing.assert_allclose(r_v, [0.1, 0.1], atol=1e-15)


def test_calibrate_rejects_degenerate_samples():
    with pytest.raises(CalibrationError):
        calibrate(np.ones((100, 2)), 0.05)  # zero-variance residuals


def test_calibrate_rejects_too_few_samples():
    with pytest.raises(CalibrationError):
        calibrate(np.random.default_rng(0).normal(size=(19, 2)), 0.05)


@pytest.mark.parametrize("alpha", [0.0, -0.1, 1.5])
def test_calibrate_rejects_bad_alpha(alpha):
    with pytest.raises(CalibrationError):
        calibrate(np.random.default_rng(0).normal(size=(100, 2)), alpha)


def test_threshold_is_dimension_over_alpha():
    monitor = make_monitor(dim=4, alpha=0.1, n_samples=400)
    assert monitor.threshold == 40.0


def test_calibrate_recovers_moments():
    rng = np.random.default_rng(3)
    mean = np.array([1.0, -2.0])
    cov = np.array([[2.0, 0.5], [0.5, 1.0]])
    samples = rng.multivariate_normal(mean, cov, 200000)
    monitor = calibrate(samples, 0.05)
    np.testing.assert_allclose(monitor.mean, mean, atol=0.02)
    np.testing.assert_allclose(monitor.cov, cov, atol=0.03)


def test_mahalanobis_zero_at_mean():
    monitor = make_monitor()
    assert mahalanobis(monitor.mean, monitor) == 0.0


def test_mahalanobis_identity_cov():
    monitor = calibrate(np.random.default_rng(1).normal(size=(100000, 2)), 0.05)
    monitor.mean = np.zeros(2)
    monitor.cov_inv = np.eye(2)
    assert mahalanobis(np.array([3.0, 4.0]), monitor) == pytest.approx(5.0)


def test_mahalanobis_diagonal_scaling():
    monitor = make_monitor()
    monitor.mean = np.zeros(2)
    monitor.cov_inv = np.diag([0.25, 1.0])  # cov diag(4, 1)
    assert mahalanobis(np.array([2.0, 0.0]), monitor) == pytest.approx(1.0)


def test_mahalanobis_affine_invariance():
    # d(Ax + b) under pushforward statistics equals d(x) under the originals
    rng = np.random.default_rng(4)
    x = rng.normal(size=(50000, 2))
    A = np.array([[2.0, 0.3], [-0.5, 1.5]])
    b = np.array([1.0, -2.0])
    m1 = calibrate(x, 0.05)
    m2 = calibrate(x @ A.T + b, 0.05)
    for _ in range(20):
        p = rng.normal(size=2)
        np.testing.assert_allclose(mahalanobis(A @ p + b, m2),
                                   mahalanobis(p, m1), rtol=1e-6)


def test_detect_boundary_is_healthy():
    monitor = make_monitor(alpha=0.05)
    assert not detect(monitor.threshold, monitor)
    assert detect(monitor.threshold * (1 + 1e-12), monitor)


def test_isolator_requires_persistence():
    mp, mv = make_monitor(dim=4, n_samples=400), make_monitor(dim=2)
    iso = FaultIsolator(mp, mv, persistence=3)
    big = mp.threshold * 10
    for k in range(2):
        assert iso.isolate(big, 0.0, k) == HEALTHY
    # a single healthy step resets the count
    assert iso.isolate(0.0, 0.0, 2) == HEALTHY
    for k in range(3, 5):
        assert iso.isolate(big, 0.0, k) == HEALTHY
    verdict = iso.isolate(big, 0.0, 5)
    assert verdict.detected and verdict.isolated_source == "encoders" \
        and verdict.step == 5


def test_isolator_latches():
    mp, mv = make_monitor(dim=4, n_samples=400), make_monitor(dim=2)
    iso = FaultIsolator(mp, mv, persistence=2)
    for k in range(2):
        iso.isolate(0.0, mv.threshold * 5, k)
    verdict = iso.isolate(0.0, 0.0, 2)
    assert verdict.isolated_source == "camera" and verdict.step == 1


def test_isolator_tie_break_normalized():
    mp, mv = make_monitor(dim=4, alpha=0.01, n_samples=400), make_monitor(dim=2)
    iso = FaultIsolator(mp, mv, persistence=1)
    # both alarm; camera is further over its own threshold
    verdict = iso.isolate(mp.threshold * 2, mv.threshold * 3, 0)
    assert verdict.isolated_source == "camera"


def test_recover_zeroes_only_isolated_group():
    pc = PrecisionSet.from_values(1e4, 1e6, 1e4)
    out = recover(pc, FaultVerdict(True, "encoders", 7))
    assert np.all(out.zero_q) and not np.any(out.zero_v)
    # velocity encoders keep their weight; only the position group drops
    assert not np.any(out.zero_qdot)
    np.testing.assert_array_equal(out.omega_q, 0.0)
    assert np.all(out.omega_qdot > 0)

    out2 = recover(pc, FaultVerdict(True, "camera", 7))
    assert np.all(out2.zero_v) and not np.any(out2.zero_q)
    # idempotent
    out3 = recover(out2, FaultVerdict(True, "camera", 7))
    np.testing.assert_array_equal(out3.zero_v, out2.zero_v)


def test_recover_requires_detection():
    with pytest.raises(ValueError):
        recover(PrecisionSet.from_values(1e4, 1e6, 1e4), HEALTHY)


def test_verdict_consistency_enforced():
    with pytest.raises(ValueError):
        FaultVerdict(detected=False, isolated_source="camera")


def test_dead_reckoner_tracks_consistent_encoders():
    rng = np.random.default_rng(9)
    dt = 1e-3
    reck = DeadReckoner(np.zeros(2), dt, gain=1e-3)
    q = np.zeros(2)
    for _ in range(5000):
        qd = np.array([1.0, -0.5])
        q = q + qd * dt
        r = reck.step(q + rng.normal(0, 1e-3, 2), qd + rng.normal(0, 1e-3, 2))
    assert np.all(np.abs(r) < 0.05)


def test_dead_reckoner_flags_frozen_position_channel():
    dt = 1e-3
    reck = DeadReckoner(np.zeros(2), dt, gain=1e-4)
    qd = np.array([1.0, 1.0])
    q = np.zeros(2)
    frozen = None
    for k in range(2000):
        q = q + qd * dt
        y_q = q.copy()
        if k >= 1000:
            if frozen is None:
                frozen = y_q[0]
            y_q[0] = frozen
        r = reck.step(y_q, qd)
    # the frozen channel's residual grows with the travelled distance while
    # the healthy channel's initial transient decays away
    assert abs(r[0]) > 0.5
    assert abs(r[1]) < 1e-3


def test_monitor_save_load_roundtrip(tmp_path):
    monitor = make_monitor(dim=4, alpha=0.01, n_samples=400)
    path = tmp_path / "monitor.npz"
    save_monitor(monitor, path)
    loaded = load_monitor(path)
    np.testing.assert_array_equal(loaded.mean, monitor.mean)
    np.testing.assert_array_equal(loaded.cov, monitor.cov)
    assert loaded.n == monitor.n and loaded.alpha == monitor.alpha
    r = np.array([0.3, -0.1, 0.2, 0.05])
    np.testing.assert_allclose(mahalanobis(r, loaded), mahalanobis(r, monitor),
                               rtol=1e-12)

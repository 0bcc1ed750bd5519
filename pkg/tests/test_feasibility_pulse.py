import filecmp
import math

import pytest

from crowgates.feasibility import DeviceParams, QUOTED_T1, omega_from_wavelength, params_estimate
from crowgates.pulse import crow_pulse_sim, group_velocity_theory, write_trajectory_csv


def test_default_estimate():
    r = params_estimate(DeviceParams())
    assert r["T1"] == pytest.approx(0.45e-9, rel=0.01)
    assert QUOTED_T1 / 3 <= r["T1"] <= 3 * QUOTED_T1
    assert r["pi_phase_time_N"] == pytest.approx(0.105e-9, rel=0.01)
    assert r["pi_phase_time_sqrtN"] == pytest.approx(10 * r["pi_phase_time_N"])
    assert r["crossing_time"] == pytest.approx(0.5e-9, rel=1e-3)
    assert r["loss_rate"] == pytest.approx(2.21e9, rel=1e-2)


def test_two_photon_gate_time_convention():
    d = DeviceParams(g1=2e9, g2=4e9)
    r = params_estimate(d)
    assert r["two_photon_gate_time_N"] == pytest.approx(math.pi * d.Delta / (math.sqrt(2) * d.N * 8e18))


def test_flags():
    fast = params_estimate(DeviceParams(g=3e10))
    assert fast["flags"]["pi_phase_time_N"] == "pass"
    slow = params_estimate(DeviceParams(g=1e8))
    assert slow["flags"]["pi_phase_time_N"] == "warn"


def test_invalid_device():
    with pytest.raises(ValueError):
        DeviceParams(Q=-1)
    with pytest.raises(ValueError):
        DeviceParams(v_g=0)


def test_omega_from_wavelength():
    assert omega_from_wavelength(852e-9) == pytest.approx(2 * math.pi * 3.5186e14, rel=1e-4)


def test_band_center_velocity():
    res = crow_pulse_sim(k=math.pi / 2)
    assert not res.flagged
    assert abs(res.v_group - res.v_theory) <= 0.05 * abs(res.v_theory)
    assert res.v_theory == group_velocity_theory(1.0, math.pi / 2) == -2.0


def test_band_edge_velocity_is_zero():
    res = crow_pulse_sim(k=0.0)
    assert abs(res.v_group) < 0.02


def test_packet_norm_conserved():
    res = crow_pulse_sim(length=32, width=3, t_max=3.0, n_steps=20)
    assert res.populations.sum(axis=1) == pytest.approx(1.0, abs=1e-10)


def test_boundary_flag():
    res = crow_pulse_sim(length=32, width=3, t_max=40.0)
    assert res.flagged and res.v_group is None


def test_pulse_validation():
    with pytest.raises(ValueError):
        crow_pulse_sim(length=4)
    with pytest.raises(ValueError):
        crow_pulse_sim(width=1)
    with pytest.raises(ValueError):
        crow_pulse_sim(disorder=0.1)


def test_disorder_is_seeded():
    a = crow_pulse_sim(length=32, width=3, disorder=0.2, seed=7, n_steps=10)
    b = crow_pulse_sim(length=32, width=3, disorder=0.2, seed=7, n_steps=10)
    c = crow_pulse_sim(length=32, width=3, disorder=0.2, seed=8, n_steps=10)
    assert (a.shifts == b.shifts).all() and (a.populations == b.populations).all()
    assert not (a.shifts == c.shifts).all()
    assert abs(a.shifts).max() <= 0.2


def test_csv_bytes_deterministic(tmp_path):
    for k, seed in enumerate((None, 99)):
        write_trajectory_csv(crow_pulse_sim(length=48, width=4, seed=seed), tmp_path / f"{k}.csv")
    assert filecmp.cmp(tmp_path / "0.csv", tmp_path / "1.csv", shallow=False)
    header = (tmp_path / "0.csv").read_text().splitlines()[0]
    assert header.startswith("t,centroid,site_0,site_1")

import math

import numpy as np
import pytest

from crowgates.validation import (
    dispersive_phase_rate,
    effective_vs_cascade,
    fit_rabi_frequency,
    model_hamiltonian,
    two_photon_rabi_trace,
)

SQRT2 = math.sqrt(2)


def test_fit_recovers_known_frequency():
    t = np.linspace(0, 40, 800)
    assert fit_rabi_frequency(t, 0.9 * np.sin(0.37 * t) ** 2 + 0.01) == pytest.approx(0.37, rel=1e-8)


def test_effective_trace_is_pure_rabi():
    g1 = 0.02
    times, p_g2, p_e0 = two_photon_rabi_trace("effective", g1, SQRT2 * g1, 1.0)
    w = 2 * g1**2
    np.testing.assert_allclose(p_e0, np.sin(w * times) ** 2, atol=1e-10)
    np.testing.assert_allclose(p_g2 + p_e0, 1.0, atol=1e-10)


def test_effective_phase_rate():
    assert dispersive_phase_rate("effective", 0.03, 0.05, 1.0) == pytest.approx(0.03**2, rel=1e-9)


def test_cascade_sign_flips_effective_rates():
    up = dispersive_phase_rate("cascade", 0.02, 0.03, 1.0, sign=1)
    down = dispersive_phase_rate("cascade", 0.02, 0.03, 1.0, sign=-1)
    assert up == pytest.approx(-down, rel=1e-6)
    assert abs(down) == pytest.approx(0.02**2, rel=0.02)


@pytest.mark.parametrize("sign", [1, -1])
def test_elimination_within_ten_percent(sign):
    r = effective_vs_cascade(0.02, SQRT2 * 0.02, 1.0, sign=sign)
    assert r["rabi_rel_error"] <= 0.1
    assert r["phi_rate_rel_error"] <= 0.1


def test_collective_scaling():
    r = effective_vs_cascade(0.01, 0.01 * SQRT2, 1.0, n_dopants=4)
    assert r["kappa_theory"] == pytest.approx(4 * SQRT2 * 0.01 * 0.01 * SQRT2)
    assert r["rabi_rel_error"] <= 0.1


def test_unknown_model():
    with pytest.raises(ValueError):
        model_hamiltonian("bogus", 0.1, 0.1, 1.0)

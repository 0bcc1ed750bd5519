import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crowgates.fock_space import DopantLevelSet, ModeSet, enumerate_basis
from crowgates.hamiltonians import (
    DopantSpec,
    EffectiveParams,
    ModeGraph,
    Schedule,
    ScheduleError,
    cascade_dopant_h,
    crow_hopping_h,
    effective_h,
    loss_rate_from_q,
    loss_term,
    schedule_h,
    two_level_dispersive_h,
)


def test_uniform_chain_in_carrier_frame_is_off_diagonal():
    basis = enumerate_basis(ModeSet(4, 2))
    H = crow_hopping_h(basis, ModeGraph.chain(4, 0.5, omega=3.0), frame_frequency=3.0)
    assert H.hermitian and H.hermiticity_error() == 0.0
    assert np.all(np.diag(H.dense()) == 0)


def test_two_mode_eigenvalues():
    basis = enumerate_basis(ModeSet(2, 1))
    H = crow_hopping_h(basis, ModeGraph.chain(2, 0.8))
    one = basis.photon_numbers == 1
    ev = np.linalg.eigvalsh(H.dense()[np.ix_(one, one)])
    np.testing.assert_allclose(ev, [-0.8, 0.8], atol=1e-14)


@given(st.floats(0.1, 3.0))
def test_open_chain_spectrum(J):
    basis = enumerate_basis(ModeSet(5, 1))
    H = crow_hopping_h(basis, ModeGraph.chain(5, J))
    one = basis.photon_numbers == 1
    ev = np.sort(np.linalg.eigvalsh(H.dense()[np.ix_(one, one)]))
    oracle = np.sort([2 * J * math.cos(k * math.pi / 6) for k in range(1, 6)])
    np.testing.assert_allclose(ev, oracle, atol=1e-12)


def test_mode_graph_validation():
    with pytest.raises(ValueError):
        ModeGraph((0.0, 0.0), ((0, 0, 1.0),))
    with pytest.raises(ValueError):
        ModeGraph((0.0, 0.0), ((0, 1, 1.0), (1, 0, 1.0)))
    with pytest.raises(ValueError):
        ModeGraph((0.0,), ((0, 1, 1.0),))


def test_cascade_vacuum_diagonal(one_mode_cascade):
    b = one_mode_cascade
    H = cascade_dopant_h(b, DopantSpec.symmetric(0.7, 0.1, 0.2)).dense()
    diag = [H[b.index((0,), (lev,)), b.index((0,), (lev,))].real for lev in "ghe"]
    np.testing.assert_allclose(diag, [0.0, 0.7, 0.0], atol=1e-15)


def test_cascade_reduces_to_detuned_jaynes_cummings(one_mode_cascade):
    b = one_mode_cascade
    delta, g1 = 1.3, 0.4
    H = cascade_dopant_h(b, DopantSpec.symmetric(delta, g1, 0.0)).dense()
    idx = [b.index((1,), ("g",)), b.index((0,), ("h",))]
    ev = np.linalg.eigvalsh(H[np.ix_(idx, idx)])
    assert ev[1] - ev[0] == pytest.approx(2 * math.sqrt(delta**2 / 4 + g1**2), abs=1e-14)


def test_collective_coupling_scales_with_root_n(one_mode_cascade):
    b = one_mode_cascade
    H1 = cascade_dopant_h(b, DopantSpec.symmetric(1.0, 0.1, 0.2)).dense()
    H4 = cascade_dopant_h(b, DopantSpec.symmetric(1.0, 0.1, 0.2, n_dopants=4)).dense()
    off = ~np.eye(b.dimension, dtype=bool)
    np.testing.assert_allclose(H4[off], 2 * H1[off], atol=1e-15)


def test_cascade_needs_three_levels():
    b = enumerate_basis(ModeSet(1, 2), [DopantLevelSet.two_level()])
    with pytest.raises(ValueError):
        cascade_dopant_h(b, DopantSpec(0, 1.0, levels=DopantLevelSet.two_level()))


def test_effective_matrix_elements(one_mode_cascade):
    b = one_mode_cascade
    g1, g2, d = 0.3, 0.5, 7.0
    H = effective_h(b, EffectiveParams(g1, g2, d))
    M = H.dense()
    i = lambda occ, lev: b.index((occ,), (lev,))
    assert M[i(1, "g"), i(1, "g")].real == pytest.approx(g1**2 / d)
    assert M[i(0, "e"), i(2, "g")].real == pytest.approx(math.sqrt(2) * g1 * g2 / d)
    assert M[i(0, "e"), i(0, "e")].real == pytest.approx(g2**2 / d)
    assert H.hermiticity_error() == 0.0


def test_effective_params():
    p = EffectiveParams(2 * math.sqrt(2), 1.0, 1.0)
    assert p.kappa == pytest.approx(4.0)
    assert p.phi_rate == pytest.approx(8.0)
    assert not p.valid_regime
    assert EffectiveParams(0.01, 0.02, 1.0).valid_regime
    with pytest.raises(ValueError):
        EffectiveParams(1.0, 1.0, 0.0)


def test_dispersive_rates():
    b = enumerate_basis(ModeSet(1, 1), [DopantLevelSet.two_level()])
    H = two_level_dispersive_h(b, 3e9, 3e10, 100).dense()
    assert H[b.index((1,), ("g",)), b.index((1,), ("g",))].real == pytest.approx(100 * 9e18 / 3e10)
    assert H[b.index((0,), ("g",)), b.index((0,), ("g",))] == 0
    H = two_level_dispersive_h(b, 3e9, 3e10, 100, collective="sqrtN").dense()
    assert H[b.index((1,), ("g",)), b.index((1,), ("g",))].real == pytest.approx(10 * 9e18 / 3e10)
    assert np.all(two_level_dispersive_h(b, 0.0, 1.0).dense() == 0)


def test_loss_term():
    b = enumerate_basis(ModeSet(2, 1))
    assert loss_term(b, [0.0, 0.0]).max_abs() == 0.0
    L = loss_term(b, [0.2, 0.0])
    assert not L.hermitian and L.anti_hermiticity_error() == 0.0
    assert loss_rate_from_q(2 * math.pi * 3.52e14, 1e6) == pytest.approx(2.21e9, rel=1e-3)
    with pytest.raises(ValueError):
        loss_term(b, [0.1])


def _builder(basis, delta, g1=0.1):
    return cascade_dopant_h(basis, DopantSpec.symmetric(delta, g1, g1))


def test_schedule_single_segment(one_mode_cascade):
    tl = schedule_h(one_mode_cascade, Schedule(((2.0, {}),)), _builder, {"delta": 1.0})
    assert len(tl) == 1 and tl[0][0] == 2.0


def test_stark_switch_schedule(one_mode_cascade):
    sched = Schedule.stark_switch(1.0, 2.0, 3.0, delta_on=1.0, delta_far=50.0)
    assert [o["delta"] for _, o in sched.segments] == [50.0, 1.0, 50.0]
    tl = schedule_h(one_mode_cascade, sched, _builder, {"delta": 10.0})
    assert [d for d, _ in tl] == [1.0, 2.0, 3.0]
    b = one_mode_cascade
    h_idx = b.index((0,), ("h",))
    assert [H.dense()[h_idx, h_idx].real for _, H in tl] == [50.0, 1.0, 50.0]


def test_schedule_merges_identical_neighbours(one_mode_cascade):
    sched = Schedule(((1.0, {"delta": 2.0}), (0.5, {"delta": 2.0}), (1.5, {})))
    tl = schedule_h(one_mode_cascade, sched, _builder, {"delta": 2.0})
    assert len(tl) == 1
    assert sum(d for d, _ in tl) == pytest.approx(sched.total_duration)


def test_schedule_errors(one_mode_cascade):
    with pytest.raises(ScheduleError):
        schedule_h(one_mode_cascade, Schedule(((1.0, {"omega": 2.0}),)), _builder, {"delta": 1.0})
    with pytest.raises(ValueError):
        Schedule(((0.0, {}),))
    with pytest.raises(ValueError):
        Schedule(())

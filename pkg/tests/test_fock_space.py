import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crowgates.fock_space import (
    BasisMismatchError,
    CapacityError,
    DopantLevelSet,
    ModeSet,
    StateVector,
    annihilation_op,
    basis_dimension,
    basis_state,
    creation_op,
    dopant_transition_op,
    enumerate_basis,
    identity_op,
    number_op,
    superposition,
    total_number_op,
)
from crowgates.hamiltonians import ModeGraph, crow_hopping_h


@pytest.mark.parametrize(
    "modes, n_max, dopants, expected",
    [
        (1, 2, [], 3),
        (2, 2, [], 6),
        (1, 2, [DopantLevelSet.cascade()], 9),
        (2, 2, [DopantLevelSet.cascade()] * 2, 54),
        (3, 1, [DopantLevelSet.two_level()], 8),
    ],
)
def test_dimensions(modes, n_max, dopants, expected):
    basis = enumerate_basis(ModeSet(modes, n_max), dopants)
    assert basis.dimension == expected
    assert basis_dimension(ModeSet(modes, n_max), dopants) == expected


def test_two_mode_ordering():
    basis = enumerate_basis(ModeSet(2, 2))
    assert [s[0] for s in basis.states] == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]


@given(st.integers(1, 4), st.integers(0, 4))
def test_dimension_is_stars_and_bars(modes, n_max):
    basis = enumerate_basis(ModeSet(modes, n_max))
    assert basis.dimension == math.comb(n_max + modes, modes)
    assert len(set(basis.states)) == basis.dimension
    assert basis.photon_numbers.max(initial=0) <= n_max


def test_capacity_error():
    with pytest.raises(CapacityError):
        enumerate_basis(ModeSet(20, 6), max_dimension=1000)


def test_excitation_cap_drops_states():
    full = enumerate_basis(ModeSet(1, 2), [DopantLevelSet.cascade()])
    capped = enumerate_basis(ModeSet(1, 2), [DopantLevelSet.cascade()], excitation_cap=2)
    assert capped.dimension < full.dimension
    assert capped.excitation_numbers.max() <= 2


def test_level_set_validation():
    assert DopantLevelSet(("e", "g")).level_labels == ("g", "e")
    with pytest.raises(ValueError):
        DopantLevelSet(("h", "e"))
    with pytest.raises(ValueError):
        DopantLevelSet(("g", "x"))


def test_annihilation_examples():
    basis = enumerate_basis(ModeSet(1, 2))
    a = annihilation_op(basis, 0)
    out = a @ basis_state(basis, (1,))
    assert out.amplitude((0,)) == pytest.approx(1.0)
    out = a @ basis_state(basis, (2,))
    assert out.amplitude((1,)) == pytest.approx(math.sqrt(2))
    psi = superposition(basis, {((0,), ()): 1, ((2,), ()): 1})
    n = number_op(basis, 0)
    assert np.vdot(psi.amplitudes, (n @ psi).amplitudes).real == pytest.approx(1.0)


def test_number_examples():
    basis = enumerate_basis(ModeSet(1, 2))
    n = number_op(basis, 0)
    assert (n @ basis_state(basis, (2,))).amplitude((2,)) == pytest.approx(2.0)
    assert (n @ basis_state(basis, (0,))).norm_squared() == 0.0


@given(st.integers(1, 3), st.integers(1, 4))
def test_canonical_commutator_below_top_layer(modes, n_max):
    basis = enumerate_basis(ModeSet(modes, n_max))
    for m in range(modes):
        a, ad = annihilation_op(basis, m), creation_op(basis, m)
        comm = (a @ ad - ad @ a).dense()
        below = basis.photon_numbers < n_max
        np.testing.assert_allclose(comm[np.ix_(below, below)], np.eye(below.sum()), atol=1e-14)


def test_dopant_operator_examples(one_mode_cascade):
    b = one_mode_cascade
    s = lambda i, j: dopant_transition_op(b, 0, i, j)
    out = s("g", "e") @ basis_state(b, (0,), ("e",))
    assert out.amplitude((0,), ("g",)) == pytest.approx(1.0)
    psi = superposition(b, {((0,), ("g",)): 1, ((0,), ("e",)): 1})
    out = s("g", "g") @ psi
    assert out.amplitude((0,), ("g",)) == pytest.approx(1 / math.sqrt(2))
    assert out.amplitude((0,), ("e",)) == 0
    assert (s("g", "e") @ s("e", "g") - s("g", "g")).max_abs() == 0.0


def test_dopant_level_missing():
    b = enumerate_basis(ModeSet(1, 1), [DopantLevelSet.two_level()])
    with pytest.raises(ValueError):
        dopant_transition_op(b, 0, "h", "g")


def test_total_number_commutes_with_hopping(two_mode_basis):
    H = crow_hopping_h(two_mode_basis, ModeGraph.chain(2, 0.7, 0.3))
    assert total_number_op(two_mode_basis).commutator(H).max_abs() <= 1e-12


def test_basis_mismatch():
    b1 = enumerate_basis(ModeSet(1, 2))
    b2 = enumerate_basis(ModeSet(2, 1))
    with pytest.raises(BasisMismatchError):
        number_op(b1, 0) + number_op(b2, 0)
    with pytest.raises(BasisMismatchError):
        StateVector(b1, np.zeros(5))


def test_equal_bases_are_interchangeable():
    b1 = enumerate_basis(ModeSet(2, 2))
    b2 = enumerate_basis(ModeSet(2, 2))
    assert b1.same_as(b2)
    assert (identity_op(b1) + identity_op(b2)).max_abs() == 2.0


def test_labels(one_mode_cascade):
    assert one_mode_cascade.label(one_mode_cascade.index((2,), ("e",))) == "|e,2>"

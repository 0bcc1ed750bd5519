"""Truncated photon-number bases tensored with dopant level spaces.

States are labelled by an occupation vector over the cavity modes and a
tuple of dopant levels.  The basis is ordered by total photon number, then
occupation vector, then dopant tuple (levels ordered g < h < e), so the
matrices built on it are block-structured by photon number.

Units: hbar = 1.  Frequencies and couplings are angular (rad/s) or
dimensionless when the detuning is used as the unit.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

LEVEL_ORDER = ("g", "h", "e")
# quanta carried by each dopant level when counting total excitation
LEVEL_QUANTA = {"g": 0, "h": 1, "e": 2}

DEFAULT_MAX_DIMENSION = 10**6


class CapacityError(ValueError):
    """Raised when a basis would exceed the configured dimension cap."""


class BasisMismatchError(ValueError):
    """Raised when objects built on different bases are combined."""


@dataclass(frozen=True)
class ModeSet:
    mode_count: int
    n_max_total: int

    def __post_init__(self):
        if self.mode_count < 1:
            raise ValueError(f"mode_count must be >= 1, got {self.mode_count}")
        if self.n_max_total < 0:
            raise ValueError(f"n_max_total must be >= 0, got {self.n_max_total}")


@dataclass(frozen=True)
class DopantLevelSet:
    level_labels: tuple[str, ...] = LEVEL_ORDER

    def __post_init__(self):
        labels = tuple(self.level_labels)
        if len(labels) not in (2, 3):
            raise ValueError(f"a dopant has 2 or 3 levels, got {labels}")
        unknown = [lab for lab in labels if lab not in LEVEL_ORDER]
        if unknown:
            raise ValueError(f"unknown level labels {unknown}; allowed {LEVEL_ORDER}")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate level labels in {labels}")
        if "g" not in labels:
            raise ValueError("every dopant needs a ground level 'g'")
        # canonical ordering regardless of how the caller listed them
        object.__setattr__(self, "level_labels", tuple(lab for lab in LEVEL_ORDER if lab in labels))

    @classmethod
    def cascade(cls) -> "DopantLevelSet":
        return cls(("g", "h", "e"))

    @classmethod
    def two_level(cls) -> "DopantLevelSet":
        return cls(("g", "e"))

    def __len__(self):
        return len(self.level_labels)


def _compositions(total: int, parts: int):
    """Occupation vectors of `parts` modes summing to `total`, lexicographic."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def basis_dimension(modes: ModeSet, dopants: Sequence[DopantLevelSet] = ()) -> int:
    """Untruncated-by-excitation dimension, computed without enumerating."""
    n_photon_states = math.comb(modes.n_max_total + modes.mode_count, modes.mode_count)
    return n_photon_states * math.prod(len(d) for d in dopants)


@dataclass(frozen=True, eq=False)
class HybridBasis:
    """Enumerated basis of (occupation vector, dopant level tuple) states.

    Build it with :func:`enumerate_basis`; the constructor does not check
    the ordering of ``states``.
    """

    modes: ModeSet
    dopants: tuple[DopantLevelSet, ...]
    states: tuple[tuple[tuple[int, ...], tuple[str, ...]], ...]
    excitation_cap: int | None = None
    index_of: dict = field(init=False, repr=False)
    occupations: np.ndarray = field(init=False, repr=False)
    photon_numbers: np.ndarray = field(init=False, repr=False)
    excitation_numbers: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "index_of", {s: k for k, s in enumerate(self.states)})
        occ = np.array([s[0] for s in self.states], dtype=np.int64).reshape(len(self.states), self.modes.mode_count)
        occ.setflags(write=False)
        object.__setattr__(self, "occupations", occ)
        nph = occ.sum(axis=1)
        nph.setflags(write=False)
        object.__setattr__(self, "photon_numbers", nph)
        quanta = np.array([sum(LEVEL_QUANTA[lev] for lev in s[1]) for s in self.states], dtype=np.int64)
        exc = nph + quanta
        exc.setflags(write=False)
        object.__setattr__(self, "excitation_numbers", exc)

    @property
    def dimension(self) -> int:
        return len(self.states)

    @property
    def mode_count(self) -> int:
        return self.modes.mode_count

    @property
    def n_max_total(self) -> int:
        return self.modes.n_max_total

    def index(self, occupation: Sequence[int], levels: Sequence[str] = ()) -> int:
        key = (tuple(int(n) for n in occupation), tuple(levels))
        try:
            return self.index_of[key]
        except KeyError:
            raise KeyError(f"state {key} is not in this basis") from None

    def same_as(self, other: "HybridBasis") -> bool:
        return self is other or (
            self.modes == other.modes
            and self.dopants == other.dopants
            and self.excitation_cap == other.excitation_cap
            and self.states == other.states
        )

    def check_same(self, other: "HybridBasis") -> None:
        if not self.same_as(other):
            raise BasisMismatchError("objects live on different bases")

    def label(self, k: int) -> str:
        occ, levels = self.states[k]
        photons = "".join(str(n) for n in occ) if max(occ, default=0) < 10 else ",".join(map(str, occ))
        return f"|{''.join(levels)},{photons}>" if levels else f"|{photons}>"

    def __repr__(self):
        return (
            f"HybridBasis(modes={self.modes.mode_count}, n_max_total={self.modes.n_max_total}, "
            f"dopants={[d.level_labels for d in self.dopants]}, dimension={self.dimension})"
        )


def enumerate_basis(
    modes: ModeSet,
    dopants: Sequence[DopantLevelSet] = (),
    *,
    excitation_cap: int | None = None,
    max_dimension: int = DEFAULT_MAX_DIMENSION,
) -> HybridBasis:
    """Enumerate every occupation vector with total <= ``n_max_total``,
    tensored with every dopant level tuple.

    If ``excitation_cap`` is given, states whose photons plus dopant quanta
    (h = 1, e = 2) exceed it are dropped.
    """
    dopants = tuple(dopants)
    full = basis_dimension(modes, dopants)
    if full > max_dimension:
        raise CapacityError(f"basis dimension {full} exceeds cap {max_dimension}")
    level_tuples = list(itertools.product(*(d.level_labels for d in dopants)))
    states = []
    for total in range(modes.n_max_total + 1):
        for occ in _compositions(total, modes.mode_count):
            for levels in level_tuples:
                if excitation_cap is not None:
                    if total + sum(LEVEL_QUANTA[lev] for lev in levels) > excitation_cap:
                        continue
                states.append((occ, levels))
    return HybridBasis(modes, dopants, tuple(states), excitation_cap)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    basis: HybridBasis
    entries: sp.csr_matrix
    hermitian: bool = False

    def __post_init__(self):
        m = sp.csr_matrix(self.entries, dtype=complex)
        n = self.basis.dimension
        if m.shape != (n, n):
            raise BasisMismatchError(f"matrix shape {m.shape} does not match basis dimension {n}")
        m.sort_indices()
        object.__setattr__(self, "entries", m)

    @property
    def shape(self):
        return self.entries.shape

    def dense(self) -> np.ndarray:
        return self.entries.toarray()

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.basis, self.entries.conj().T.tocsr(), self.hermitian)

    def hermiticity_error(self) -> float:
        diff = self.entries - self.entries.conj().T
        return float(abs(diff).max()) if diff.nnz else 0.0

    def anti_hermiticity_error(self) -> float:
        diff = self.entries + self.entries.conj().T
        return float(abs(diff).max()) if diff.nnz else 0.0

    def __add__(self, other):
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        self.basis.check_same(other.basis)
        return OperatorMatrix(self.basis, self.entries + other.entries, self.hermitian and other.hermitian)

    def __sub__(self, other):
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        self.basis.check_same(other.basis)
        return OperatorMatrix(self.basis, self.entries - other.entries, self.hermitian and other.hermitian)

    def __neg__(self):
        return OperatorMatrix(self.basis, -self.entries, self.hermitian)

    def __mul__(self, scalar):
        if isinstance(scalar, OperatorMatrix):
            return NotImplemented
        scalar = complex(scalar)
        return OperatorMatrix(self.basis, self.entries * scalar, self.hermitian and scalar.imag == 0)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            self.basis.check_same(other.basis)
            return OperatorMatrix(self.basis, self.entries @ other.entries, False)
        if isinstance(other, StateVector):
            self.basis.check_same(other.basis)
            return StateVector(self.basis, self.entries @ other.amplitudes)
        return NotImplemented

    def commutator(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self.basis.check_same(other.basis)
        return OperatorMatrix(self.basis, self.entries @ other.entries - other.entries @ self.entries)

    def max_abs(self) -> float:
        return float(abs(self.entries).max()) if self.entries.nnz else 0.0


@dataclass(frozen=True, eq=False)
class StateVector:
    basis: HybridBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != self.basis.dimension:
            raise BasisMismatchError(f"vector length {amps.shape[0]} != basis dimension {self.basis.dimension}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def normalized(self) -> "StateVector":
        return StateVector(self.basis, self.amplitudes / math.sqrt(self.norm_squared()))

    def amplitude(self, occupation: Sequence[int], levels: Sequence[str] = ()) -> complex:
        return complex(self.amplitudes[self.basis.index(occupation, levels)])

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def distance(self, other: "StateVector") -> float:
        self.basis.check_same(other.basis)
        return float(np.linalg.norm(self.amplitudes - other.amplitudes))

    def __add__(self, other):
        self.basis.check_same(other.basis)
        return StateVector(self.basis, self.amplitudes + other.amplitudes)

    def __mul__(self, scalar):
        return StateVector(self.basis, self.amplitudes * complex(scalar))

    __rmul__ = __mul__


def basis_state(basis: HybridBasis, occupation: Sequence[int], levels: Sequence[str] | None = None) -> StateVector:
    """Unit vector on one basis state; dopants default to all-ground."""
    if levels is None:
        levels = ("g",) * len(basis.dopants)
    vec = np.zeros(basis.dimension, dtype=complex)
    vec[basis.index(occupation, levels)] = 1.0
    return StateVector(basis, vec)


def superposition(basis: HybridBasis, terms: dict, normalize: bool = True) -> StateVector:
    """Build a state from ``{(occupation, levels): amplitude}``."""
    vec = np.zeros(basis.dimension, dtype=complex)
    for (occ, levels), amp in terms.items():
        vec[basis.index(occ, levels)] += amp
    state = StateVector(basis, vec)
    return state.normalized() if normalize else state


def _check_mode(basis: HybridBasis, mode_index: int):
    if not 0 <= mode_index < basis.mode_count:
        raise IndexError(f"mode index {mode_index} out of range for {basis.mode_count} modes")


def _check_dopant(basis: HybridBasis, dopant_index: int):
    if not 0 <= dopant_index < len(basis.dopants):
        raise IndexError(f"dopant index {dopant_index} out of range for {len(basis.dopants)} dopants")


def annihilation_op(basis: HybridBasis, mode_index: int) -> OperatorMatrix:
    """Photon annihilation operator on one mode, identity on dopants.

    The creation operator is its adjoint within the truncated space, so
    states that would exceed the photon cap are simply absent.
    """
    _check_mode(basis, mode_index)
    rows, cols, vals = [], [], []
    for col, (occ, levels) in enumerate(basis.states):
        n = occ[mode_index]
        if n == 0:
            continue
        target = (occ[:mode_index] + (n - 1,) + occ[mode_index + 1:], levels)
        row = basis.index_of.get(target)
        if row is None:  # removed by an excitation cap
            continue
        rows.append(row)
        cols.append(col)
        vals.append(math.sqrt(n))
    d = basis.dimension
    return OperatorMatrix(basis, sp.csr_matrix((vals, (rows, cols)), shape=(d, d)), False)


def creation_op(basis: HybridBasis, mode_index: int) -> OperatorMatrix:
    return annihilation_op(basis, mode_index).dag()


def number_op(basis: HybridBasis, mode_index: int) -> OperatorMatrix:
    _check_mode(basis, mode_index)
    return OperatorMatrix(basis, sp.diags(basis.occupations[:, mode_index].astype(complex)).tocsr(), True)


def total_number_op(basis: HybridBasis) -> OperatorMatrix:
    return OperatorMatrix(basis, sp.diags(basis.photon_numbers.astype(complex)).tocsr(), True)


def excitation_number_op(basis: HybridBasis) -> OperatorMatrix:
    """Photons plus dopant quanta (h counts 1, e counts 2)."""
    return OperatorMatrix(basis, sp.diags(basis.excitation_numbers.astype(complex)).tocsr(), True)


def dopant_transition_op(basis: HybridBasis, dopant_index: int, i: str, j: str) -> OperatorMatrix:
    """sigma_ij = |i><j| on one dopant, identity on photons and other dopants."""
    _check_dopant(basis, dopant_index)
    labels = basis.dopants[dopant_index].level_labels
    for lev in (i, j):
        if lev not in labels:
            raise ValueError(f"level {lev!r} not present in dopant {dopant_index} levels {labels}")
    rows, cols = [], []
    for col, (occ, levels) in enumerate(basis.states):
        if levels[dopant_index] != j:
            continue
        target = (occ, levels[:dopant_index] + (i,) + levels[dopant_index + 1:])
        row = basis.index_of.get(target)
        if row is None:
            continue
        rows.append(row)
        cols.append(col)
    d = basis.dimension
    mat = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(d, d))
    return OperatorMatrix(basis, mat, i == j)


def identity_op(basis: HybridBasis) -> OperatorMatrix:
    return OperatorMatrix(basis, sp.identity(basis.dimension, dtype=complex, format="csr"), True)


def zero_op(basis: HybridBasis) -> OperatorMatrix:
    d = basis.dimension
    return OperatorMatrix(basis, sp.csr_matrix((d, d), dtype=complex), True)

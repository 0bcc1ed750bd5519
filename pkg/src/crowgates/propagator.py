"""Time evolution of state vectors under piecewise-constant Hamiltonians.

Hermitian generators up to ``DENSE_CAP`` states are exponentiated through
their eigendecomposition; non-Hermitian ones through ``scipy.linalg.expm``.
Larger problems use an Arnoldi (Krylov subspace) approximation of
exp(-iHt) psi with adaptive sub-stepping.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as la

from .fock_space import OperatorMatrix, StateVector


DENSE_CAP = 4096
KRYLOV_TOL = 1e-12
KRYLOV_DIM = 40
KRYLOV_MAX_STEPS = 10_000
LEAKAGE_WARN = 1e-8


class KrylovConvergenceError(RuntimeError):
    pass


class TruncationWarning(UserWarning):
    pass


def _dense_propagator(H: OperatorMatrix, t: float) -> np.ndarray:
    mat = H.dense()
    if H.hermitian:
        evals, evecs = la.eigh(mat)
        return (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T
    return la.expm(-1j * t * mat)


def propagator_matrix(H: OperatorMatrix, t: float) -> np.ndarray:
    """Dense exp(-iHt); only for bases up to ``DENSE_CAP`` states."""
    if H.basis.dimension > DENSE_CAP:
        raise ValueError(f"dense propagator limited to {DENSE_CAP} states")
    return _dense_propagator(H, t)


def _arnoldi_step(A, v: np.ndarray, tau: float, m: int):
    """One Krylov step; returns (w approx exp(-i tau A) v, error estimate)."""
    beta = np.linalg.norm(v)
    n = v.shape[0]
    if beta == 0:
        return v.copy(), 0.0
    m = min(m, n)
    V = np.zeros((n, m + 1), dtype=complex)
    Hm = np.zeros((m + 1, m), dtype=complex)
    V[:, 0] = v / beta
    k_used = m
    breakdown = False
    for j in range(m):
        w = A @ V[:, j]
        # two passes of modified Gram-Schmidt keep the basis orthogonal to rounding
        for _ in range(2):
            for i in range(j + 1):
                c = np.vdot(V[:, i], w)
                Hm[i, j] += c
                w = w - c * V[:, i]
        h = np.linalg.norm(w)
        Hm[j + 1, j] = h
        if h < 1e-14 * max(1.0, np.abs(Hm[: j + 1, j]).max()):
            k_used = j + 1
            breakdown = True
            break
        V[:, j + 1] = w / h
    small = Hm[:k_used, :k_used]
    expo = la.expm(-1j * tau * small)
    coeff = expo[:, 0]
    result = beta * (V[:, :k_used] @ coeff)
    if breakdown:
        return result, 0.0
    err = beta * abs(Hm[k_used, k_used - 1]) * abs(tau) * abs(coeff[-1])
    return result, float(err)


def _krylov_evolve(H: OperatorMatrix, psi: np.ndarray, t: float, tol: float, m: int, max_steps: int) -> np.ndarray:
    A = H.entries
    remaining = t
    tau = t
    v = psi.copy()
    steps = 0
    norm0 = max(np.linalg.norm(psi), 1e-300)
    while remaining > 0:
        tau = min(tau, remaining)
        while True:
            steps += 1
            if steps > max_steps:
                raise KrylovConvergenceError(f"Krylov evolution did not reach tol={tol} in {max_steps} steps")
            w, err = _arnoldi_step(A, v, tau, m)
            # error budget proportional to the fraction of time covered
            if err <= tol * norm0 * (tau / t):
                break
            tau *= 0.5
        v = w
        remaining -= tau
        if err < 0.1 * tol * norm0 * (tau / t):
            tau *= 2.0
    return v


def evolve(
    H: OperatorMatrix,
    psi: StateVector,
    t: float,
    *,
    method: str = "auto",
    dense_cap: int = DENSE_CAP,
    tol: float = KRYLOV_TOL,
    krylov_dim: int = KRYLOV_DIM,
    max_steps: int = KRYLOV_MAX_STEPS,
) -> StateVector:
    """Return exp(-iHt) psi.

    ``method`` is ``"dense"``, ``"krylov"`` or ``"auto"`` (dense up to
    ``dense_cap`` states).
    """
    H.basis.check_same(psi.basis)
    if t < 0:
        raise ValueError("evolution time must be non-negative")
    if t == 0 or H.entries.nnz == 0:
        return StateVector(psi.basis, psi.amplitudes.copy())
    if method == "auto":
        method = "dense" if H.basis.dimension <= dense_cap else "krylov"
    if method == "dense":
        out = _dense_propagator(H, t) @ psi.amplitudes
    elif method == "krylov":
        out = _krylov_evolve(H, np.asarray(psi.amplitudes), t, tol, krylov_dim, max_steps)
    else:
        raise ValueError(f"unknown method {method!r}")
    return StateVector(psi.basis, out)


@dataclass
class EvolutionReport:
    final: StateVector
    segment_norms: list[float] = field(default_factory=list)
    leakage: float = 0.0

    @property
    def survival_probability(self) -> float:
        return self.final.norm_squared()


def top_layer_population(psi: StateVector) -> float:
    basis = psi.basis
    mask = basis.photon_numbers == basis.n_max_total
    return float(np.sum(np.abs(psi.amplitudes[mask]) ** 2))


def evolve_schedule(
    timeline: Sequence[tuple[float, OperatorMatrix]],
    psi: StateVector,
    *,
    leakage_warn: float = LEAKAGE_WARN,
    **evolve_kwargs,
) -> EvolutionReport:
    """Apply each (duration, H) segment in order.

    Leakage is the largest top-photon-layer population seen at segment
    boundaries. It only signals truncation trouble when the initial state
    starts below that layer, so the warning is skipped otherwise.
    """
    start_top = top_layer_population(psi)
    leakage = start_top
    norms = []
    state = psi
    for duration, H in timeline:
        state = evolve(H, state, duration, **evolve_kwargs)
        norms.append(state.norm_squared())
        leakage = max(leakage, top_layer_population(state))
    if start_top <= leakage_warn and leakage > leakage_warn:
        warnings.warn(
            f"population {leakage:.3e} reached the photon-number cap; truncation may be inadequate",
            TruncationWarning,
            stacklevel=2,
        )
    return EvolutionReport(state, norms, leakage)


def expectation(A: OperatorMatrix, psi: StateVector, *, imag_tol: float = 1e-10):
    """<psi|A|psi>; real for operators flagged Hermitian."""
    A.basis.check_same(psi.basis)
    val = complex(np.vdot(psi.amplitudes, A.entries @ psi.amplitudes))
    if A.hermitian:
        if abs(val.imag) > imag_tol * max(1.0, abs(val)):
            raise ValueError(f"Hermitian expectation has imaginary part {val.imag:.3e}")
        return val.real
    return val


def sample_trajectory(H: OperatorMatrix, psi: StateVector, times: Sequence[float]) -> np.ndarray:
    """States exp(-iHt) psi at each time, as rows (dense eigendecomposition)."""
    H.basis.check_same(psi.basis)
    mat = H.dense()
    times = np.asarray(times, dtype=float)
    if H.hermitian:
        evals, evecs = la.eigh(mat)
        coeff = evecs.conj().T @ psi.amplitudes
        return (np.exp(-1j * np.outer(times, evals)) * coeff) @ evecs.T
    evals, evecs = la.eig(mat)
    coeff = la.solve(evecs, psi.amplitudes)
    return (np.exp(-1j * np.outer(times, evals)) * coeff) @ evecs.T
